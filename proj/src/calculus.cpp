#include <mopic/calculus.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace mopic {

void center_division(Sequence& s, std::size_t mid) {
    s.division.clear();
    std::size_t levels = s.steps.size() + 1;
    for (std::size_t i = 0; i < levels; ++i)
        s.division.push_back(Rat(static_cast<long long>(i) - static_cast<long long>(mid)));
    s.mid = mid;
}

Replay replay(const Sequence& s) {
    if (s.division.size() != s.steps.size() + 1)
        throw InvalidSequence(0, "division length must equal the number of levels");
    for (std::size_t i = 0; i + 1 < s.division.size(); ++i)
        if (!(s.division[i] < s.division[i + 1]))
            throw InvalidSequence(i, "division timestamps must increase strictly");
    if (s.mid >= s.division.size())
        throw InvalidSequence(0, "mid level out of range");

    Replay rep;
    rep.levels.push_back(Diagram{});
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        try {
            rep.details.push_back(apply_detail(rep.levels.back(), s.steps[i]));
        } catch (const PreconditionViolated& e) {
            throw InvalidSequence(i, e.report.joined());
        } catch (const Error& e) {
            throw InvalidSequence(i, e.what());
        }
        rep.levels.push_back(rep.details.back().result);
    }
    if (!rep.levels.back().empty())
        throw InvalidSequence(s.steps.size(), "sequence does not end at the empty diagram");
    return rep;
}

// --- realize -----------------------------------------------------------------

namespace {

struct UnionFind {
    std::vector<int> parent;
    int add() {
        parent.push_back(static_cast<int>(parent.size()));
        return parent.back();
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

SurfaceInvariants realize(const Sequence& s) {
    Replay rep = replay(s);
    return realize(s, rep);
}

SurfaceInvariants realize(const Sequence& s, const Replay& rep) {
    SurfaceInvariants inv;

    // one union-find node per (level, component)
    UnionFind uf;
    std::vector<std::vector<Component>> comps;
    std::vector<std::map<EdgeId, int>> edge_node;  // per level: edge -> node
    std::vector<int> base;
    for (const Diagram& d : rep.levels) {
        comps.push_back(trace_components(d));
        base.push_back(static_cast<int>(uf.parent.size()));
        std::map<EdgeId, int> en;
        for (std::size_t c = 0; c < comps.back().size(); ++c) {
            int node = uf.add();
            for (EdgeId e : comps.back()[c].edges) en[e] = node;
        }
        edge_node.push_back(std::move(en));
    }

    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        const ApplyDetail& det = rep.details[i];
        // components sharing a surviving edge id continue across the step
        for (const auto& [e, node] : edge_node[i]) {
            auto it = edge_node[i + 1].find(e);
            if (it != edge_node[i + 1].end()) uf.unite(node, it->second);
        }
        for (const auto& [be, ae] : det.links) {
            auto b = edge_node[i].find(be);
            auto a = edge_node[i + 1].find(ae);
            if (b != edge_node[i].end() && a != edge_node[i + 1].end()) uf.unite(b->second, a->second);
        }
        for (const auto& [x, y] : det.after_unions) {
            auto a = edge_node[i + 1].find(x);
            auto b = edge_node[i + 1].find(y);
            if (a != edge_node[i + 1].end() && b != edge_node[i + 1].end())
                uf.unite(a->second, b->second);
        }
        inv.chi += static_cast<int>(det.events.births) + static_cast<int>(det.events.deaths) -
                   static_cast<int>(det.events.bands);
        bool upper = i >= s.mid;
        for (Sign dp : det.events.double_points) {
            (dp == Sign::plus ? inv.c_plus : inv.c_minus)++;
            if (upper)
                (dp == Sign::plus ? inv.c1_plus : inv.c1_minus)++;
            else
                (dp == Sign::plus ? inv.c2_plus : inv.c2_minus)++;
        }
    }

    std::set<int> roots;
    for (std::size_t i = 0; i < uf.parent.size(); ++i) roots.insert(uf.find(static_cast<int>(i)));
    inv.mu = static_cast<int>(roots.size());
    if (inv.chi % 2 != 0) throw InvalidSequence(0, "realizing surface has odd Euler characteristic");
    inv.genus_total = inv.mu - inv.chi / 2;
    return inv;
}

// --- shape validators ----------------------------------------------------------

namespace {

struct Ess {
    std::size_t idx;  // step index in the sequence
    const Transformation* t;
    const StepNote* note;
};

bool effectless(const Transformation& t) {
    if (std::holds_alternative<Isotopy>(t)) return true;
    if (const auto* s = std::get_if<Surgery1>(&t)) return s->bands.empty();
    if (const auto* m = std::get_if<HopfMerge>(&t)) return m->blocks.empty();
    if (const auto* h = std::get_if<HopfSplit>(&t)) return h->blocks.empty();
    return false;
}

std::vector<Ess> essential_steps(const Sequence& s, const Replay& rep) {
    std::vector<Ess> out;
    for (std::size_t i = 0; i < s.steps.size(); ++i)
        if (!effectless(s.steps[i])) out.push_back({i, &s.steps[i], &rep.details[i].note});
    return out;
}

bool crossing_free(const Diagram& d) { return d.crossings().empty(); }

bool h_trivial(const Diagram& d) {
    for (const auto& [b, info] : d.blocks()) {
        BlockTag tag = d.block_tag(b);
        if (tag != BlockTag::trivial && tag != BlockTag::hopf) return false;
    }
    return true;
}

int comp_count(const Diagram& d) { return static_cast<int>(trace_components(d).size()); }

std::set<EdgeId> band_refs(const Band& b) {
    std::set<EdgeId> out{b.attach1, b.attach2};
    for (const CoreEvent& ev : b.core)
        if (ev.kind != CoreKind::twist) out.insert(ev.target);
    return out;
}

std::set<EdgeId> step_band_footprint(const Surgery1& s, const StepNote& note) {
    std::set<EdgeId> out;
    for (const Band& b : s.bands)
        for (EdgeId e : band_refs(b)) out.insert(e);
    for (const BandNote& bn : note.bands)
        for (EdgeId e : bn.touched_edges) out.insert(e);
    return out;
}

// Conceptual ladder evaluated against one grouping of the surgery steps into
// the surgery slots. Each slot holds a run of consecutive essential indices;
// non-surgery slots hold at most one.
struct Ladder {
    std::vector<std::vector<int>> slots;
    std::vector<Diagram> levels;        // slot count + 1 conceptual levels
    std::vector<std::size_t> level_lo;  // raw level range per conceptual level
    std::vector<std::size_t> level_hi;
};

Ladder build_ladder(const Sequence& s, const Replay& rep, const std::vector<Ess>& ess,
                    const std::vector<std::vector<int>>& slot_runs) {
    Ladder lad;
    lad.slots = slot_runs;
    std::size_t n_levels = slot_runs.size() + 1;
    lad.levels.resize(n_levels);
    lad.level_lo.resize(n_levels);
    lad.level_hi.resize(n_levels);
    lad.levels[0] = rep.levels.front();
    lad.level_lo[0] = 0;
    std::vector<std::size_t> pending{0};  // levels awaiting their plateau end
    for (std::size_t k = 0; k < slot_runs.size(); ++k) {
        const auto& run = slot_runs[k];
        if (run.empty()) {
            lad.levels[k + 1] = lad.levels[k];
            lad.level_lo[k + 1] = lad.level_lo[k];
            pending.push_back(k + 1);
            continue;
        }
        std::size_t first_raw = ess[run.front()].idx;
        for (std::size_t q : pending) lad.level_hi[q] = first_raw;
        pending.clear();
        std::size_t last = static_cast<std::size_t>(run.back());
        std::size_t next_raw = (last + 1 < ess.size()) ? ess[last + 1].idx : s.steps.size();
        lad.levels[k + 1] = rep.levels[next_raw];
        lad.level_lo[k + 1] = ess[run.back()].idx + 1;
        pending.push_back(k + 1);
    }
    for (std::size_t q : pending) lad.level_hi[q] = s.steps.size();
    return lad;
}

// the "before" diagram of essential step e
const Diagram& before_of(const Replay& rep, const std::vector<Ess>& ess, int e) {
    return rep.levels[ess[e].idx];
}

struct SlotParse {
    bool ok = false;
    std::string why;
    int birth = -1, merge = -1, split = -1, death = -1;
    std::vector<int> surgeries;  // essential indices
};

SlotParse parse_slots(const std::vector<Ess>& ess) {
    SlotParse p;
    if (ess.empty()) {
        p.why = "sequence has no essential steps";
        return p;
    }
    std::size_t i = 0;
    if (!std::holds_alternative<Birth>(*ess[0].t)) {
        p.why = "first essential step is not a birth";
        return p;
    }
    p.birth = 0;
    i = 1;
    if (i < ess.size() && std::holds_alternative<HopfMerge>(*ess[i].t)) p.merge = static_cast<int>(i++);
    while (i < ess.size() && std::holds_alternative<Surgery1>(*ess[i].t))
        p.surgeries.push_back(static_cast<int>(i++));
    if (i < ess.size() && std::holds_alternative<HopfSplit>(*ess[i].t)) p.split = static_cast<int>(i++);
    if (i < ess.size() && std::holds_alternative<Death>(*ess[i].t)) p.death = static_cast<int>(i++);
    if (p.death < 0) {
        p.why = "last essential step is not a death";
        return p;
    }
    if (i != ess.size()) {
        p.why = "unexpected step after the final death (step kind " +
                std::string(kind_name(*ess[i].t)) + ")";
        return p;
    }
    p.ok = true;
    return p;
}

// all ways to cut the ordered surgery list into n_groups consecutive groups
std::vector<std::vector<std::size_t>> compositions(std::size_t n, int n_groups) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cuts;
    std::function<void(std::size_t, int)> go = [&](std::size_t from, int left) {
        if (left == 0) {
            if (cuts.back() == n) {
                auto full = cuts;
                out.push_back(full);
            }
            return;
        }
        for (std::size_t c = from; c <= n; ++c) {
            cuts.push_back(c);
            go(c, left - 1);
            cuts.pop_back();
        }
    };
    go(0, n_groups);
    return out;
}

struct TypedSurgery {
    bool all_merge = true;
    bool all_split = true;
    int band_count = 0;
};

TypedSurgery type_surgery(const Diagram& level, const Transformation& t) {
    TypedSurgery ts;
    const auto& s1 = std::get<Surgery1>(t);
    ts.band_count = static_cast<int>(s1.bands.size());
    auto kinds = classify_bands(level, s1.bands);
    for (bool merge : kinds) {
        ts.all_merge = ts.all_merge && merge;
        ts.all_split = ts.all_split && !merge;
    }
    return ts;
}

bool steps_equivalent(const Transformation& a, const Transformation& b, const Relabeling& r,
                      const Diagram& a_level, const Diagram& b_level);

// mirror clause shared by ribbon-clasp and symmetric checks
ValidationReport::Clause mirror_clause(const Sequence& s, const Replay& rep,
                                       const std::vector<Ess>& ess, const Ladder& lad) {
    ValidationReport::Clause cl{"(4) mirror symmetry", true, ""};
    std::size_t K = lad.levels.size() - 1;  // slot count
    // level isomorphism
    for (std::size_t k = 0; k <= K / 2; ++k) {
        if (!isomorphic(lad.levels[k], lad.levels[K - k])) {
            cl.pass = false;
            cl.note = "levels " + std::to_string(k) + " and " + std::to_string(K - k) +
                      " are not isomorphic";
            return cl;
        }
    }
    // mid placement inside the middle plateau
    std::size_t mid_slot = K / 2;
    if (s.mid < lad.level_lo[mid_slot] || s.mid > lad.level_hi[mid_slot]) {
        cl.pass = false;
        cl.note = "mid level is not the middle level";
        return cl;
    }
    // step pairing: the i-th step of the lower run mirrors the i-th-from-last
    // step of the matching upper run
    for (std::size_t j = 0; j < K / 2; ++j) {
        const auto& lo_run = lad.slots[j];
        const auto& up_run = lad.slots[K - 1 - j];
        if (lo_run.size() != up_run.size()) {
            cl.pass = false;
            cl.note = "slot " + std::to_string(j) + " has no matching mirror run";
            return cl;
        }
        for (std::size_t i = 0; i < lo_run.size(); ++i) {
            int lo = lo_run[i];
            int up = up_run[up_run.size() - 1 - i];
            Inverse inv;
            try {
                inv = invert(*ess[lo].t, *ess[lo].note);
            } catch (const UnsupportedReversal& e) {
                cl.pass = false;
                cl.note = e.what();
                return cl;
            }
            const Diagram& low_post = rep.levels[ess[lo].idx + 1];
            const Diagram& up_pre = before_of(rep, ess, up);
            bool matched = find_isomorphism(low_post, up_pre, [&](const Relabeling& r) {
                return steps_equivalent(inv.step, *ess[up].t, r, low_post, up_pre);
            });
            if (!matched) {
                cl.pass = false;
                cl.note = "step at slot " + std::to_string(K - 1 - j) +
                          " is not the mirror of slot " + std::to_string(j);
                return cl;
            }
        }
    }
    return cl;
}

// structural equality of b against a transported through r
bool steps_equivalent(const Transformation& a, const Transformation& b, const Relabeling& r,
                      const Diagram& a_level, const Diagram& b_level) {
    if (a.index() != b.index()) return false;
    auto map_edge = [&](EdgeId e) -> std::optional<EdgeId> {
        auto it = r.edges.find(e);
        if (it == r.edges.end()) return std::nullopt;
        return it->second;
    };
    auto block_fresh = [&](BlockId id, const Diagram& d) { return !d.has_block(id); };
    auto blocks_match = [&](BlockId x, BlockId y) {
        if (block_fresh(x, a_level) || block_fresh(y, b_level))
            return block_fresh(x, a_level) && block_fresh(y, b_level);
        auto it = r.blocks.find(x);
        return it != r.blocks.end() && it->second == y;
    };
    if (const auto* ba = std::get_if<Birth>(&a)) {
        const auto& bb = std::get<Birth>(b);
        if (ba->groups.size() != bb.groups.size()) return false;
        std::vector<bool> used(bb.groups.size(), false);
        for (const auto& ga : ba->groups) {
            bool ok = false;
            for (std::size_t i = 0; i < bb.groups.size() && !ok; ++i) {
                if (used[i]) continue;
                const auto& gb = bb.groups[i];
                if (ga.count != gb.count) continue;
                if (ga.scratch != gb.scratch) continue;
                if (ga.block.has_value() != gb.block.has_value()) continue;
                if (ga.block && !blocks_match(*ga.block, *gb.block)) continue;
                used[i] = ok = true;
            }
            if (!ok) return false;
        }
        return true;
    }
    if (const auto* da = std::get_if<Death>(&a)) {
        const auto& db = std::get<Death>(b);
        if (da->loops.size() != db.loops.size()) return false;
        std::set<LoopId> want(db.loops.begin(), db.loops.end());
        for (LoopId l : da->loops) {
            auto it = r.loops.find(l);
            if (it == r.loops.end() || !want.count(it->second)) return false;
        }
        return true;
    }
    if (const auto* sa = std::get_if<Surgery1>(&a)) {
        const auto& sb = std::get<Surgery1>(b);
        if (sa->bands.size() != sb.bands.size()) return false;
        auto band_eq = [&](const Band& x, const Band& y) {
            auto a1 = map_edge(x.attach1), a2 = map_edge(x.attach2);
            if (!a1 || !a2 || *a1 != y.attach1 || *a2 != y.attach2) return false;
            if (x.core.size() != y.core.size()) return false;
            for (std::size_t i = 0; i < x.core.size(); ++i) {
                const CoreEvent& ex = x.core[i];
                const CoreEvent& ey = y.core[i];
                if (ex.kind != ey.kind) return false;
                if (ex.kind == CoreKind::twist) {
                    if (ex.sign != ey.sign) return false;
                } else {
                    auto t = map_edge(ex.target);
                    if (!t || *t != ey.target) return false;
                }
            }
            return blocks_match(x.block, y.block);
        };
        std::vector<bool> used(sb.bands.size(), false);
        for (const Band& x : sa->bands) {
            bool ok = false;
            for (std::size_t i = 0; i < sb.bands.size() && !ok; ++i) {
                if (used[i]) continue;
                if (band_eq(x, sb.bands[i])) used[i] = ok = true;
            }
            if (!ok) return false;
        }
        return true;
    }
    if (const auto* ca = std::get_if<CrossingChange>(&a)) {
        const auto& cb = std::get<CrossingChange>(b);
        if (ca->crossings.size() != cb.crossings.size()) return false;
        std::set<CrossingId> want(cb.crossings.begin(), cb.crossings.end());
        for (CrossingId c : ca->crossings) {
            auto it = r.crossings.find(c);
            if (it == r.crossings.end() || !want.count(it->second)) return false;
        }
        return true;
    }
    if (const auto* ha = std::get_if<HopfSplit>(&a)) {
        const auto& xb = std::get<HopfSplit>(b).blocks;
        if (ha->blocks.size() != xb.size()) return false;
        std::vector<bool> used(xb.size(), false);
        for (const auto& [b1, s1] : ha->blocks) {
            bool ok = false;
            for (std::size_t i = 0; i < xb.size() && !ok; ++i) {
                if (used[i] || xb[i].second != s1) continue;
                auto it = r.blocks.find(b1);
                if (it != r.blocks.end() && it->second == xb[i].first) used[i] = ok = true;
            }
            if (!ok) return false;
        }
        return true;
    }
    if (const auto* ma = std::get_if<HopfMerge>(&a)) {
        const auto& xb = std::get<HopfMerge>(b).blocks;
        if (ma->blocks.size() != xb.size()) return false;
        std::vector<bool> used(xb.size(), false);
        for (const auto& spec : ma->blocks) {
            bool ok = false;
            for (std::size_t i = 0; i < xb.size() && !ok; ++i) {
                if (used[i] || xb[i].sign != spec.sign || xb[i].alternating != spec.alternating)
                    continue;
                auto it = r.blocks.find(spec.block);
                if (it != r.blocks.end() && it->second == xb[i].block) used[i] = ok = true;
            }
            if (!ok) return false;
        }
        return true;
    }
    // isotopies are transparent to shape checks; treat as equivalent
    return true;
}

}  // namespace

std::vector<bool> classify_bands(const Diagram& level, const std::vector<Band>& bands) {
    std::vector<bool> out;
    Diagram d = level;
    for (const Band& b : bands) {
        int before = comp_count(d);
        Surgery1 one;
        one.bands = {b};
        d = mopic::apply(d, one).first;
        int after = comp_count(d);
        out.push_back(after < before);
    }
    return out;
}

// --- the three validators -------------------------------------------------------

namespace {

ValidationReport check_ladder(const Sequence& s, Form form) {
    ValidationReport rep_out;
    rep_out.form = form;
    Replay rep;
    try {
        rep = replay(s);
    } catch (const Error& e) {
        rep_out.clauses.push_back({"replay", false, e.what()});
        return rep_out;
    }

    bool nine = form != Form::ribbon_clasp;
    std::size_t slot_count = nine ? 8 : 6;
    int surgery_groups = nine ? 4 : 2;

    auto ess = essential_steps(s, rep);
    SlotParse parse = parse_slots(ess);
    if (!parse.ok) {
        rep_out.clauses.push_back({"shape", false, parse.why});
        return rep_out;
    }
    rep_out.clauses.push_back({"shape", true, ""});

    SurfaceInvariants inv = realize(s, rep);
    int mu = inv.mu;
    int g = inv.genus_total;

    // typing of each surgery step at its own level is grouping-independent
    std::map<int, TypedSurgery> typed;
    for (int e : parse.surgeries)
        typed[e] = type_surgery(before_of(rep, ess, e), *ess[e].t);

    auto cuts_list = compositions(parse.surgeries.size(), surgery_groups);
    std::vector<ValidationReport::Clause> best;
    bool found = false;
    for (const auto& cuts : cuts_list) {
        std::vector<std::vector<int>> slots(slot_count);
        slots[0] = {parse.birth};
        slots[slot_count - 1] = {parse.death};
        if (parse.merge >= 0) slots[1] = {parse.merge};
        if (parse.split >= 0) slots[slot_count - 2] = {parse.split};
        std::size_t prev = 0;
        for (int gidx = 0; gidx < surgery_groups; ++gidx) {
            for (std::size_t k = prev; k < cuts[gidx]; ++k)
                slots[2 + gidx].push_back(parse.surgeries[k]);
            prev = cuts[gidx];
        }

        Ladder lad = build_ladder(s, rep, ess, slots);
        std::vector<ValidationReport::Clause> cls;
        auto clause = [&](const std::string& id, bool pass, const std::string& note) {
            cls.push_back({id, pass, pass ? "" : note});
        };

        const Diagram& o_minus = lad.levels[1];
        const Diagram& o_plus = lad.levels[slot_count - 1];
        clause("(1) trivial ends", crossing_free(o_minus) && crossing_free(o_plus) &&
                                       !o_minus.empty() && !o_plus.empty(),
               "O levels must be nonempty crossing-free trivial links");

        const Diagram& l_minus = lad.levels[2];
        const Diagram& l_plus = lad.levels[slot_count - 2];
        bool h_ok = h_trivial(l_minus) && h_trivial(l_plus);
        clause("(2) H-trivial Hopf phases", h_ok, "L levels must be H-trivial");

        auto group_typed = [&](int slot, bool want_merge) {
            for (int e : lad.slots[slot])
                if (want_merge ? !typed[e].all_merge : !typed[e].all_split) return false;
            return true;
        };
        auto group_footprint = [&](int slot) {
            std::set<EdgeId> out;
            for (int e : lad.slots[slot]) {
                const auto& sg = std::get<Surgery1>(*ess[e].t);
                for (EdgeId x : step_band_footprint(sg, *ess[e].note)) out.insert(x);
            }
            return out;
        };
        auto group_refs = [&](int slot) {
            std::set<EdgeId> out;
            for (int e : lad.slots[slot]) {
                const auto& sg = std::get<Surgery1>(*ess[e].t);
                for (const Band& b : sg.bands)
                    for (EdgeId x : band_refs(b)) out.insert(x);
            }
            return out;
        };
        auto disjoint = [&](int slot_a, int slot_b) {
            auto fa = group_footprint(slot_a);
            for (EdgeId e : group_refs(slot_b))
                if (fa.count(e)) return false;
            return true;
        };

        if (nine) {
            const Diagram& k_minus = lad.levels[3];
            const Diagram& l0 = lad.levels[4];
            const Diagram& k_plus = lad.levels[5];
            bool k_ok = comp_count(k_minus) == mu && comp_count(k_plus) == mu;
            bool typing_ok = group_typed(2, true) && group_typed(3, false) &&
                             group_typed(4, true) && group_typed(5, false);
            clause("(3) K levels", k_ok && typing_ok,
                   !k_ok ? "K levels must have mu = " + std::to_string(mu) + " components"
                         : "fusion/fission typing of the interior 1-surgeries is wrong");
            clause("(4) L0 level", comp_count(l0) == mu + g,
                   "L0 must have mu+g = " + std::to_string(mu + g) + " components");
            if (form == Form::normal) {
                bool mid_ok = s.mid >= lad.level_lo[4] && s.mid <= lad.level_hi[4];
                if (!mid_ok) {
                    cls.back().pass = false;
                    cls.back().note = "mid level is not the L0 level";
                }
            }
            clause("(5) band disjointness", disjoint(2, 3) && disjoint(4, 5),
                   "adjacent 1-surgery bands are not disjoint");
        } else {
            clause("(3) mid surgery", true, "");
        }

        if (form != Form::normal) {
            cls.push_back(mirror_clause(s, rep, ess, lad));
        }

        bool all = true;
        for (const auto& c : cls) all = all && c.pass;
        if (all) {
            for (auto& c : cls) rep_out.clauses.push_back(c);
            found = true;
            break;
        }
        if (best.empty()) best = cls;
        int bp = 0, cp = 0;
        for (const auto& c : best)
            if (c.pass) bp++;
        for (const auto& c : cls)
            if (c.pass) cp++;
        if (cp > bp) best = cls;
    }
    if (!found)
        for (auto& c : best) rep_out.clauses.push_back(c);
    return rep_out;
}

}  // namespace

ValidationReport check_normal_form(const Sequence& s) { return check_ladder(s, Form::normal); }

ValidationReport check_ribbon_clasp_normal_form(const Sequence& s) {
    return check_ladder(s, Form::ribbon_clasp);
}

ValidationReport check_symmetric_normal_form(const Sequence& s) {
    return check_ladder(s, Form::symmetric);
}

// --- transport and mirror_time ----------------------------------------------------

Transformation transport(const Transformation& t, const Relabeling& r, const Diagram& target) {
    std::uint32_t fresh_block = target.next_block_counter();
    std::map<BlockId, BlockId> fresh_map;
    auto map_block = [&](BlockId b) {
        auto it = r.blocks.find(b);
        if (it != r.blocks.end()) return it->second;
        auto [f, fresh] = fresh_map.emplace(b, BlockId{fresh_block});
        if (fresh) fresh_block++;
        return f->second;
    };
    auto map_edge = [&](EdgeId e) {
        auto it = r.edges.find(e);
        if (it == r.edges.end()) throw Error("transport: unmapped edge e" + std::to_string(e.v));
        return it->second;
    };
    auto map_crossing = [&](CrossingId c) {
        auto it = r.crossings.find(c);
        if (it == r.crossings.end())
            throw Error("transport: unmapped crossing x" + std::to_string(c.v));
        return it->second;
    };
    auto map_loop = [&](LoopId l) {
        auto it = r.loops.find(l);
        if (it == r.loops.end()) throw Error("transport: unmapped loop l" + std::to_string(l.v));
        return it->second;
    };

    Transformation out = t;
    if (auto* b = std::get_if<Birth>(&out)) {
        for (auto& g : b->groups)
            if (g.block) g.block = map_block(*g.block);
    } else if (auto* d = std::get_if<Death>(&out)) {
        for (auto& l : d->loops) l = map_loop(l);
    } else if (auto* s = std::get_if<Surgery1>(&out)) {
        for (auto& band : s->bands) {
            band.attach1 = map_edge(band.attach1);
            band.attach2 = map_edge(band.attach2);
            for (auto& ev : band.core)
                if (ev.kind != CoreKind::twist) ev.target = map_edge(ev.target);
            band.block = map_block(band.block);
            if (band.split_block) band.split_block = map_block(*band.split_block);
        }
    } else if (auto* iso = std::get_if<Isotopy>(&out)) {
        for (auto& mv : iso->moves) {
            if (auto* m = std::get_if<R1Plus>(&mv)) m->target = map_edge(m->target);
            else if (auto* m1 = std::get_if<R1Minus>(&mv)) m1->crossing = map_crossing(m1->crossing);
            else if (auto* m2 = std::get_if<R2Plus>(&mv)) {
                m2->mover = map_edge(m2->mover);
                m2->over_of = map_edge(m2->over_of);
            } else if (auto* m3 = std::get_if<R2Minus>(&mv)) {
                m3->c1 = map_crossing(m3->c1);
                m3->c2 = map_crossing(m3->c2);
            } else if (auto* m4 = std::get_if<R3>(&mv)) {
                m4->c_pq = map_crossing(m4->c_pq);
                m4->c_pr = map_crossing(m4->c_pr);
                m4->c_qr = map_crossing(m4->c_qr);
            } else if (auto* m5 = std::get_if<Retag>(&mv)) {
                m5->block = map_block(m5->block);
            } else if (auto* m6 = std::get_if<MoveToBlock>(&mv)) {
                for (auto& e : m6->members) e = map_edge(e);
                m6->block = map_block(m6->block);
            } else if (auto* m7 = std::get_if<Relabel>(&mv)) {
                for (auto& e : m7->edges) e = map_edge(e);
                for (auto& c : m7->crossings) c = map_crossing(c);
            }
        }
    } else if (auto* c = std::get_if<CrossingChange>(&out)) {
        for (auto& x : c->crossings) x = map_crossing(x);
    } else if (auto* h = std::get_if<HopfSplit>(&out)) {
        for (auto& [b2, sg] : h->blocks) b2 = map_block(b2);
    } else if (auto* m = std::get_if<HopfMerge>(&out)) {
        for (auto& spec : m->blocks) spec.block = map_block(spec.block);
    }
    return out;
}

Relabeling identity_relabeling(const Diagram& d) {
    Relabeling r;
    for (const auto& [id, x] : d.crossings()) {
        r.crossings[id] = id;
        for (EdgeId e : x.slots) r.edges[e] = e;
    }
    for (const auto& [id, l] : d.loops()) {
        r.loops[id] = id;
        r.edges[l.edge] = l.edge;
    }
    for (const auto& [id, info] : d.blocks()) r.blocks[id] = id;
    return r;
}

namespace {

Relabeling require_iso(const Diagram& a, const Diagram& b, const char* what) {
    Relabeling out;
    bool ok = find_isomorphism(a, b, [&](const Relabeling& r) {
        out = r;
        return true;
    });
    if (!ok) throw Error(std::string("internal: ") + what + ": levels fail to match");
    return out;
}

}  // namespace

Transformation transport_apply(const Transformation& old_step, const Diagram& old_pre,
                               Relabeling& chi, Diagram& cur) {
    if (const auto* iso = std::get_if<Isotopy>(&old_step); iso && iso->moves.size() > 1) {
        // chain moves: each references its own intermediate state
        Isotopy out;
        Diagram sim = old_pre;
        for (const Move& mv : iso->moves) {
            Isotopy one_old;
            one_old.moves = {mv};
            Isotopy one_new = std::get<Isotopy>(transport(one_old, chi, cur));
            cur = mopic::apply(cur, one_new).first;
            sim = mopic::apply(sim, one_old).first;
            chi = require_iso(sim, cur, "isotopy transport");
            out.moves.push_back(one_new.moves[0]);
        }
        return out;
    }
    Transformation t = transport(old_step, chi, cur);
    Diagram next = mopic::apply(cur, t).first;
    Diagram old_post = mopic::apply(old_pre, old_step).first;
    cur = std::move(next);
    chi = require_iso(old_post, cur, "step transport");
    return t;
}

std::size_t append_mirrored_step(const Transformation& fwd, const StepNote& note,
                                 const Diagram& fwd_pre, std::vector<Transformation>& out,
                                 Diagram& cur, Relabeling& chi) {
    Inverse inv = invert(fwd, note);
    std::size_t appended = 0;
    bool sizes_match = false;
    if (const auto* iso0 = std::get_if<Isotopy>(&inv.step))
        if (const auto* fiso = std::get_if<Isotopy>(&fwd))
            sizes_match = iso0->moves.size() == fiso->moves.size();
    if (const auto* iso = std::get_if<Isotopy>(&inv.step);
        iso && iso->moves.size() > 1 && sizes_match) {
        // inverse move p applies at forward intermediate state k-p
        const auto& fmoves = std::get<Isotopy>(fwd).moves;
        std::vector<Diagram> inter{fwd_pre};
        for (const Move& mv : fmoves) {
            Isotopy one;
            one.moves = {mv};
            inter.push_back(mopic::apply(inter.back(), one).first);
        }
        Isotopy built;
        for (std::size_t p = 0; p < iso->moves.size(); ++p) {
            Isotopy one;
            one.moves = {iso->moves[p]};
            Isotopy tx = std::get<Isotopy>(transport(one, chi, cur));
            cur = mopic::apply(cur, tx).first;
            chi = require_iso(inter[fmoves.size() - 1 - p], cur,
                              ("mirrored isotopy move " + std::to_string(p) + "/" +
                               std::to_string(iso->moves.size()))
                                  .c_str());
            built.moves.push_back(tx.moves[0]);
        }
        out.push_back(built);
        return 1;
    }
    Transformation t1 = transport(inv.step, chi, cur);
    out.push_back(t1);
    cur = mopic::apply(cur, t1).first;
    appended++;
    if (inv.cleanup) {
        Transformation t2 = transport(*inv.cleanup, chi, cur);
        out.push_back(t2);
        cur = mopic::apply(cur, t2).first;
        appended++;
    }
    chi = require_iso(fwd_pre, cur, "mirrored step");
    return appended;
}

Sequence mirror_time(const Sequence& s) {
    Replay rep = replay(s);
    Sequence out;
    Diagram cur;  // mirror replay state
    Relabeling chi;  // forward level (reversed walk) -> mirror level

    std::vector<Rat> times;
    times.push_back(-s.division.back());
    std::vector<std::size_t> fwd_to_mirror(rep.levels.size());
    fwd_to_mirror[s.steps.size()] = 0;

    for (std::size_t j = s.steps.size(); j-- > 0;) {
        std::size_t appended = append_mirrored_step(s.steps[j], rep.details[j].note,
                                                    rep.levels[j], out.steps, cur, chi);
        // extra levels (cleanups) land between the two original level times
        for (std::size_t k = 1; k < appended; ++k) {
            Rat lo = -s.division[j + 1], hi = -s.division[j];
            long long spread = static_cast<long long>(appended);
            times.push_back(Rat(lo.num * hi.den * spread +
                                    (hi.num * lo.den - lo.num * hi.den) * static_cast<long long>(k),
                                lo.den * hi.den * spread));
        }
        times.push_back(-s.division[j]);
        fwd_to_mirror[j] = out.steps.size();
    }
    out.division = times;
    out.mid = fwd_to_mirror[s.mid];
    return out;
}

}  // namespace mopic
