#include <mopic/oracle.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace mopic::oracle {

// --- component brute force ----------------------------------------------------

int trace_components_bruteforce(const Diagram& d, std::vector<std::vector<EdgeId>>* partition) {
    // adjacency multigraph: an edge is adjacent to the edge continuing the
    // same strand through each crossing it meets
    std::map<EdgeId, std::vector<EdgeId>> adj;
    for (const auto& [id, x] : d.crossings()) {
        int oi = over_in_slot(x), oo = over_out_slot(x);
        auto link = [&](EdgeId a, EdgeId b) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        };
        link(x.slots[0], x.slots[2]);
        link(x.slots[oi], x.slots[oo]);
    }
    // every non-loop edge is met by exactly 2 strand passages
    for (const auto& [e, ns] : adj)
        if (ns.size() != 2) throw MalformedDiagram("edge with bad incidence in oracle trace");

    std::set<EdgeId> seen;
    int count = 0;
    if (partition) partition->clear();
    for (const auto& [start, ns] : adj) {
        if (seen.count(start)) continue;
        std::vector<EdgeId> cell;
        std::vector<EdgeId> stack{start};
        while (!stack.empty()) {
            EdgeId e = stack.back();
            stack.pop_back();
            if (!seen.insert(e).second) continue;
            cell.push_back(e);
            for (EdgeId n : adj[e]) stack.push_back(n);
        }
        std::sort(cell.begin(), cell.end());
        if (partition) partition->push_back(cell);
        count++;
    }
    for (const auto& [id, l] : d.loops()) {
        if (partition) partition->push_back({l.edge});
        count++;
    }
    return count;
}

// --- cell-complex simulation -----------------------------------------------------

namespace {

struct Cells {
    std::vector<int> parent;  // union-find over level circles
    long long V = 0, E = 0, F = 0;
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
    int new_circle() {
        parent.push_back(static_cast<int>(parent.size()));
        V += 1;
        E += 1;
        return parent.back();
    }
    void annulus(int below, int above) {
        E += 1;
        F += 1;
        unite(below, above);
    }
    void cap() { F += 1; }
    void saddle(const std::vector<int>& circles) {
        E += 2;
        F += 1;
        for (std::size_t i = 1; i < circles.size(); ++i) unite(circles[0], circles[i]);
    }
};

// circles keyed by the smallest edge id of each component
std::map<EdgeId, std::vector<EdgeId>> circles_of(const Diagram& d) {
    std::vector<std::vector<EdgeId>> part;
    trace_components_bruteforce(d, &part);
    std::map<EdgeId, std::vector<EdgeId>> out;
    for (auto& cell : part) out[cell.front()] = cell;
    return out;
}

// unit actions: one band, one crossing, one hopf block, one move per slab
std::vector<Transformation> unit_actions(const Transformation& t) {
    std::vector<Transformation> out;
    if (const auto* s = std::get_if<Surgery1>(&t)) {
        for (const Band& b : s->bands) out.push_back(Surgery1{{b}});
    } else if (const auto* c = std::get_if<CrossingChange>(&t)) {
        for (CrossingId x : c->crossings) out.push_back(CrossingChange{{x}});
    } else if (const auto* h = std::get_if<HopfSplit>(&t)) {
        for (auto& b : h->blocks) out.push_back(HopfSplit{{b}});
    } else if (const auto* m = std::get_if<HopfMerge>(&t)) {
        for (auto& b : m->blocks) out.push_back(HopfMerge{{b}});
    } else if (const auto* iso = std::get_if<Isotopy>(&t)) {
        for (const Move& mv : iso->moves) out.push_back(Isotopy{{mv}});
    } else {
        out.push_back(t);
    }
    return out;
}

}  // namespace

SurfaceInvariants recompute_invariants_by_simulation(const Sequence& s) {
    if (s.division.size() != s.steps.size() + 1)
        throw InvalidSequence(0, "division length must equal the number of levels");

    Cells cells;
    Diagram cur;
    std::map<EdgeId, int> circle_cell;
    SurfaceInvariants inv;

    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        bool upper = i >= s.mid;
        auto record_dp = [&](Sign sg) {
            (sg == Sign::plus ? inv.c_plus : inv.c_minus)++;
            if (upper)
                (sg == Sign::plus ? inv.c1_plus : inv.c1_minus)++;
            else
                (sg == Sign::plus ? inv.c2_plus : inv.c2_minus)++;
        };

        for (const Transformation& unit : unit_actions(s.steps[i])) {
            auto before_circles = circles_of(cur);
            auto before_cells = circle_cell;

            // the documented relabel renaming, reconstructed from counters
            std::map<EdgeId, EdgeId> renamed;
            if (const auto* iso = std::get_if<Isotopy>(&unit)) {
                if (!iso->moves.empty())
                    if (const auto* rl = std::get_if<Relabel>(&iso->moves.front())) {
                        std::uint32_t nxt = cur.next_edge_counter();
                        for (EdgeId e : rl->edges) renamed[e] = EdgeId{nxt++};
                    }
            }

            Diagram next;
            try {
                next = mopic::apply(cur, unit).first;
            } catch (const PreconditionViolated& e) {
                throw InvalidSequence(i, e.report.joined());
            }
            auto after_circles = circles_of(next);

            std::map<EdgeId, int> after_cells;
            for (auto& [rep, cell] : after_circles) {
                (void)cell;
                after_cells[rep] = cells.new_circle();
            }

            std::map<EdgeId, EdgeId> edge_to_after_rep;
            for (auto& [rep, es] : after_circles)
                for (EdgeId e : es) edge_to_after_rep[e] = rep;

            std::set<EdgeId> matched_before, matched_after;
            for (auto& [rep, es] : before_circles) {
                for (EdgeId e : es) {
                    EdgeId probe = e;
                    auto rn = renamed.find(e);
                    if (rn != renamed.end()) probe = rn->second;
                    auto it = edge_to_after_rep.find(probe);
                    if (it != edge_to_after_rep.end()) {
                        cells.annulus(before_cells.at(rep), after_cells.at(it->second));
                        matched_before.insert(rep);
                        matched_after.insert(it->second);
                        break;
                    }
                }
            }

            auto before_rep_of = [&](EdgeId e) -> EdgeId {
                for (auto& [rep, es] : before_circles)
                    if (std::find(es.begin(), es.end(), e) != es.end()) return rep;
                throw Error("oracle: edge not found at its level");
            };

            if (std::holds_alternative<Birth>(unit)) {
                for (auto& [rep, cell] : after_cells)
                    if (!matched_after.count(rep)) cells.cap();
            } else if (std::holds_alternative<Death>(unit)) {
                for (auto& [rep, cell] : before_cells)
                    if (!matched_before.count(rep)) cells.cap();
            } else if (const auto* sg = std::get_if<Surgery1>(&unit)) {
                const Band& band = sg->bands.front();
                std::vector<int> ring;
                ring.push_back(before_cells.at(before_rep_of(band.attach1)));
                ring.push_back(before_cells.at(before_rep_of(band.attach2)));
                for (auto& [rep, cell] : after_cells)
                    if (!matched_after.count(rep)) ring.push_back(cell);
                for (EdgeId e : {band.attach1, band.attach2}) {
                    auto it = edge_to_after_rep.find(e);
                    if (it != edge_to_after_rep.end()) ring.push_back(after_cells.at(it->second));
                }
                cells.saddle(ring);
            } else if (const auto* cc = std::get_if<CrossingChange>(&unit)) {
                record_dp(-crossing_sign(cur, cc->crossings.front()));
            } else if (const auto* hs = std::get_if<HopfSplit>(&unit)) {
                record_dp(-hs->blocks.front().second);
                std::vector<int> bs, as;
                for (auto& [rep, cell] : before_cells)
                    if (!matched_before.count(rep)) bs.push_back(cell);
                for (auto& [rep, cell] : after_cells)
                    if (!matched_after.count(rep)) as.push_back(cell);
                if (bs.size() != as.size()) throw Error("oracle: hopf split pairing mismatch");
                for (std::size_t k = 0; k < bs.size(); ++k) cells.annulus(bs[k], as[k]);
            } else if (const auto* hm = std::get_if<HopfMerge>(&unit)) {
                record_dp(hm->blocks.front().sign);
                std::vector<int> bs, as;
                for (auto& [rep, cell] : before_cells)
                    if (!matched_before.count(rep)) bs.push_back(cell);
                for (auto& [rep, cell] : after_cells)
                    if (!matched_after.count(rep)) as.push_back(cell);
                if (bs.size() != as.size()) throw Error("oracle: hopf merge pairing mismatch");
                for (std::size_t k = 0; k < bs.size(); ++k) cells.annulus(bs[k], as[k]);
            }

            cur = std::move(next);
            circle_cell = std::move(after_cells);
        }
    }

    if (!cur.empty()) throw InvalidSequence(s.steps.size(), "oracle: sequence does not close up");

    inv.chi = static_cast<int>(cells.V - cells.E + cells.F);
    std::set<int> roots;
    for (std::size_t i = 0; i < cells.parent.size(); ++i)
        roots.insert(cells.find(static_cast<int>(i)));
    inv.mu = static_cast<int>(roots.size());
    if (inv.chi % 2 != 0) throw Error("oracle: odd Euler characteristic");
    inv.genus_total = inv.mu - inv.chi / 2;
    return inv;
}

// --- random generator --------------------------------------------------------------

namespace {

// splitmix64: platform-stable determinism
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ull) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d649bb133111ebull;
        return z ^ (z >> 31);
    }
    int below(int n) { return n <= 1 ? 0 : static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
    bool chance(int pct) { return below(100) < pct; }
};

std::vector<EdgeId> all_edges(const Diagram& d) {
    std::set<EdgeId> out;
    for (const auto& [id, x] : d.crossings())
        for (EdgeId e : x.slots) out.insert(e);
    for (const auto& [id, l] : d.loops()) out.insert(l.edge);
    return {out.begin(), out.end()};
}

std::vector<CrossingId> generic_crossings(const Diagram& d) {
    std::vector<CrossingId> out;
    for (const auto& [id, x] : d.crossings()) {
        std::set<EdgeId> es(x.slots.begin(), x.slots.end());
        if (es.size() == 4) out.push_back(id);
    }
    return out;
}

}  // namespace

Sequence random_sequence(std::uint64_t seed, const Limits& limits) {
    Rng rng(seed);
    Sequence s;
    Diagram d;

    int n_loops = 1 + rng.below(3);
    Birth birth;
    int grouped = rng.chance(50) ? 2 : 1;
    for (int i = 0; i < n_loops; i += grouped) {
        Birth::Group g;
        g.count = static_cast<std::uint32_t>(std::min(grouped, n_loops - i));
        birth.groups.push_back(g);
    }
    auto push = [&](const Transformation& t) {
        d = mopic::apply(d, t).first;
        s.steps.push_back(t);
    };
    push(birth);

    // Creators whose undo re-creates entities get fresh ids on the way back,
    // so material referenced by pending undos is locked away from them.
    std::set<EdgeId> locked_edges;
    std::set<BlockId> locked_blocks;
    auto edge_free = [&](EdgeId e) { return !locked_edges.count(e); };
    auto block_free = [&](BlockId b) { return !locked_blocks.count(b); };

    std::vector<Transformation> undo;
    int budget = std::max(0, (limits.max_steps - 2) / 2);
    for (int k = 0; k < budget; ++k) {
        if (static_cast<int>(d.crossings().size()) >= limits.max_crossings) break;
        int pick = rng.below(6);
        if (pick == 0) {
            std::optional<BlockId> twoloop;
            for (const auto& [b, info] : d.blocks())
                if (d.block_crossings(b).empty() && d.block_loops(b).size() == 2 && block_free(b) &&
                    edge_free(d.loop(d.block_loops(b)[0]).edge) &&
                    edge_free(d.loop(d.block_loops(b)[1]).edge))
                    twoloop = b;
            if (!twoloop) continue;
            Sign sg = rng.chance(50) ? Sign::plus : Sign::minus;
            HopfMerge m;
            m.blocks = {{*twoloop, sg}};
            ApplyDetail det = apply_detail(d, m);
            d = det.result;
            s.steps.push_back(m);
            HopfSplit split;
            split.blocks = {{*twoloop, sg}};
            undo.push_back(split);
            locked_blocks.insert(*twoloop);
            for (EdgeId e : d.block_content_edges(*twoloop)) locked_edges.insert(e);
        } else if (pick == 1) {
            std::vector<LoopId> cands;
            for (const auto& [id, l] : d.loops())
                if (edge_free(l.edge) && block_free(l.block)) cands.push_back(id);
            if (cands.empty()) continue;
            LoopId lp = cands[rng.below(static_cast<int>(cands.size()))];
            Sign sg = rng.chance(50) ? Sign::plus : Sign::minus;
            Band band;
            band.attach1 = band.attach2 = d.loop(lp).edge;
            band.core = {CoreEvent{CoreKind::twist, EdgeId{}, sg}};
            band.block = BlockId{d.next_block_counter()};
            Surgery1 t{{band}};
            ApplyDetail det = apply_detail(d, t);
            BlockId hb = det.result.block_of_edge(det.note.bands[0].dual1);
            d = det.result;
            s.steps.push_back(t);
            HopfSplit split;
            split.blocks = {{hb, sg}};
            undo.push_back(split);
            locked_blocks.insert(hb);
            for (EdgeId e : d.block_content_edges(hb)) locked_edges.insert(e);
        } else if (pick == 2) {
            // fuse two free loops; the dual band re-splits them
            std::vector<LoopId> cands;
            for (const auto& [id, l] : d.loops())
                if (edge_free(l.edge) && block_free(l.block)) cands.push_back(id);
            if (cands.size() < 2) continue;
            int a = rng.below(static_cast<int>(cands.size()));
            int b = rng.below(static_cast<int>(cands.size()));
            if (a == b) continue;
            Band band;
            band.attach1 = d.loop(cands[a]).edge;
            band.attach2 = d.loop(cands[b]).edge;
            band.block = d.loop(cands[a]).block;
            Surgery1 t{{band}};
            ApplyDetail det = apply_detail(d, t);
            Surgery1 dual;
            Band db;
            db.attach1 = det.note.bands[0].dual1;
            db.attach2 = det.note.bands[0].dual2;
            db.block = band.block;
            db.split_block = det.note.bands[0].block2_before;
            dual.bands = {db};
            d = det.result;
            s.steps.push_back(t);
            undo.push_back(dual);
            locked_edges.insert(db.attach1);
            locked_blocks.insert(band.block);
        } else if (pick == 3) {
            auto xs = generic_crossings(d);
            if (xs.empty()) continue;
            CrossingId x = xs[rng.below(static_cast<int>(xs.size()))];
            CrossingChange t;
            t.crossings = {x};
            push(t);
            undo.push_back(t);
        } else if (pick == 4) {
            auto es = all_edges(d);
            if (es.empty()) continue;
            EdgeId e = es[rng.below(static_cast<int>(es.size()))];
            Isotopy iso;
            iso.moves = {R1Plus{e, rng.chance(50) ? Sign::plus : Sign::minus}};
            ApplyDetail det = apply_detail(d, iso);
            Isotopy back;
            back.moves = {R1Minus{*det.note.moves[0].r1_created}};
            d = det.result;
            s.steps.push_back(iso);
            undo.push_back(back);
        } else {
            auto es = all_edges(d);
            if (es.size() < 2) continue;
            EdgeId e1 = es[rng.below(static_cast<int>(es.size()))];
            EdgeId e2 = es[rng.below(static_cast<int>(es.size()))];
            if (e1 == e2 || d.block_of_edge(e1) != d.block_of_edge(e2)) continue;
            Isotopy iso;
            iso.moves = {R2Plus{e1, e2, rng.chance(50), rng.chance(50) ? Sign::plus : Sign::minus}};
            ApplyDetail det = apply_detail(d, iso);
            Isotopy back;
            back.moves = {
                R2Minus{det.note.moves[0].r2_created->first, det.note.moves[0].r2_created->second}};
            d = det.result;
            s.steps.push_back(iso);
            undo.push_back(back);
        }
    }

    for (std::size_t i = undo.size(); i-- > 0;) push(undo[i]);

    Death death;
    for (const auto& [id, l] : d.loops()) death.loops.push_back(id);
    push(death);

    center_division(s, (s.steps.size() + 1) / 2);
    return s;
}

Sequence random_prenormal(std::uint64_t seed, const Limits& limits) {
    Rng rng(seed);
    Sequence s;
    Diagram d;

    int n_loops = 1 + rng.below(3);
    Birth birth;
    for (int i = 0; i < n_loops; ++i) birth.groups.push_back({1, std::nullopt});
    auto push = [&](const Transformation& t) {
        d = mopic::apply(d, t).first;
        s.steps.push_back(t);
    };
    push(birth);

    std::set<EdgeId> locked_edges;
    std::set<BlockId> locked_blocks;
    auto edge_free = [&](EdgeId e) { return !locked_edges.count(e); };
    auto block_free = [&](BlockId b) { return !locked_blocks.count(b); };

    std::vector<Transformation> undo;
    int budget = std::max(0, (limits.max_steps - 2) / 2);
    for (int k = 0; k < budget; ++k) {
        if (static_cast<int>(d.crossings().size()) >= limits.max_crossings) break;
        int pick = rng.below(5);
        if (pick == 0) {
            // single-double-point gadget: fuse two free loops, kink the
            // merged circle, slide it over its kink, change one crossing and
            // unwind. The fusion precedes the double point, so the result
            // reorders into the normal-form phases without obstruction.
            std::vector<LoopId> cands;
            for (const auto& [id, l] : d.loops())
                if (edge_free(l.edge) && block_free(l.block)) cands.push_back(id);
            if (cands.size() < 2) continue;
            int a = rng.below(static_cast<int>(cands.size()));
            int b = rng.below(static_cast<int>(cands.size()));
            if (a == b) continue;
            Band fuse;
            fuse.attach1 = d.loop(cands[a]).edge;
            fuse.attach2 = d.loop(cands[b]).edge;
            fuse.block = d.loop(cands[a]).block;
            ApplyDetail fdet = apply_detail(d, Surgery1{{fuse}});
            EdgeId merged = fdet.note.bands[0].dual1;
            d = fdet.result;
            s.steps.push_back(Surgery1{{fuse}});
            Isotopy kink;
            kink.moves = {R1Plus{merged, rng.chance(50) ? Sign::plus : Sign::minus}};
            ApplyDetail kdet = apply_detail(d, kink);
            d = kdet.result;
            s.steps.push_back(kink);
            std::set<EdgeId> kes(d.crossing(*kdet.note.moves[0].r1_created).slots.begin(),
                                 d.crossing(*kdet.note.moves[0].r1_created).slots.end());
            std::vector<EdgeId> kedges(kes.begin(), kes.end());
            // probe a slide + toggle that unwinds back to a plain loop
            bool done = false;
            for (Sign sg : {Sign::plus, Sign::minus}) {
                for (bool over : {true, false}) {
                    Isotopy slide;
                    slide.moves = {R2Plus{kedges[0], kedges[1], over, sg}};
                    ApplyDetail sdet = apply_detail(d, slide);
                    for (int which = 0; which < 2 && !done; ++which) {
                        CrossingId c = which ? sdet.note.moves[0].r2_created->second
                                             : sdet.note.moves[0].r2_created->first;
                        std::set<EdgeId> slots(sdet.result.crossing(c).slots.begin(),
                                               sdet.result.crossing(c).slots.end());
                        if (slots.size() != 4) continue;
                        // clean up only the gadget's own crossings
                        std::set<CrossingId> mine{*kdet.note.moves[0].r1_created,
                                                  sdet.note.moves[0].r2_created->first,
                                                  sdet.note.moves[0].r2_created->second};
                        Diagram probe = mopic::apply(sdet.result, CrossingChange{{c}}).first;
                        Isotopy clean;
                        std::set<CrossingId> left = mine;
                        bool stuck = false;
                        while (!left.empty() && !stuck) {
                            stuck = true;
                            for (CrossingId id : std::set<CrossingId>(left)) {
                                Isotopy r1;
                                r1.moves = {R1Minus{id}};
                                if (validate(probe, r1).ok()) {
                                    probe = mopic::apply(probe, r1).first;
                                    clean.moves.push_back(R1Minus{id});
                                    left.erase(id);
                                    stuck = false;
                                    break;
                                }
                            }
                            if (!stuck) continue;
                            for (CrossingId i1 : left) {
                                for (CrossingId i2 : left) {
                                    if (!(i1 < i2)) continue;
                                    Isotopy r2;
                                    r2.moves = {R2Minus{i1, i2}};
                                    if (validate(probe, r2).ok()) {
                                        probe = mopic::apply(probe, r2).first;
                                        clean.moves.push_back(R2Minus{i1, i2});
                                        left.erase(i1);
                                        left.erase(i2);
                                        stuck = false;
                                        break;
                                    }
                                }
                                if (!stuck) break;
                            }
                        }
                        if (stuck || !left.empty()) continue;
                        d = sdet.result;
                        s.steps.push_back(slide);
                        push(CrossingChange{{c}});
                        push(clean);
                        done = true;
                    }
                    if (done) break;
                }
                if (done) break;
            }
            if (!done) throw Error("internal: gadget unwind failed");
        } else if (pick == 1) {
            // fuse two free loops; the dual band re-splits them later
            std::vector<LoopId> cands;
            for (const auto& [id, l] : d.loops())
                if (edge_free(l.edge) && block_free(l.block)) cands.push_back(id);
            if (cands.size() < 2) continue;
            int a = rng.below(static_cast<int>(cands.size()));
            int b = rng.below(static_cast<int>(cands.size()));
            if (a == b) continue;
            Band band;
            band.attach1 = d.loop(cands[a]).edge;
            band.attach2 = d.loop(cands[b]).edge;
            band.block = d.loop(cands[a]).block;
            Surgery1 t{{band}};
            ApplyDetail det = apply_detail(d, t);
            Surgery1 dual;
            Band db;
            db.attach1 = det.note.bands[0].dual1;
            db.attach2 = det.note.bands[0].dual2;
            db.block = band.block;
            db.split_block = det.note.bands[0].block2_before;
            dual.bands = {db};
            d = det.result;
            s.steps.push_back(t);
            undo.push_back(dual);
            locked_edges.insert(db.attach1);
            locked_blocks.insert(band.block);
        } else if (pick == 2) {
            auto xs = generic_crossings(d);
            if (xs.empty()) continue;
            CrossingId x = xs[rng.below(static_cast<int>(xs.size()))];
            CrossingChange t;
            t.crossings = {x};
            push(t);
            undo.push_back(t);
        } else if (pick == 3) {
            auto es = all_edges(d);
            if (es.empty()) continue;
            EdgeId e = es[rng.below(static_cast<int>(es.size()))];
            Isotopy iso;
            iso.moves = {R1Plus{e, rng.chance(50) ? Sign::plus : Sign::minus}};
            ApplyDetail det = apply_detail(d, iso);
            Isotopy back;
            back.moves = {R1Minus{*det.note.moves[0].r1_created}};
            d = det.result;
            s.steps.push_back(iso);
            undo.push_back(back);
        } else {
            auto es = all_edges(d);
            if (es.size() < 2) continue;
            EdgeId e1 = es[rng.below(static_cast<int>(es.size()))];
            EdgeId e2 = es[rng.below(static_cast<int>(es.size()))];
            if (e1 == e2 || d.block_of_edge(e1) != d.block_of_edge(e2)) continue;
            Isotopy iso;
            iso.moves = {R2Plus{e1, e2, rng.chance(50), rng.chance(50) ? Sign::plus : Sign::minus}};
            ApplyDetail det = apply_detail(d, iso);
            Isotopy back;
            back.moves = {
                R2Minus{det.note.moves[0].r2_created->first, det.note.moves[0].r2_created->second}};
            d = det.result;
            s.steps.push_back(iso);
            undo.push_back(back);
        }
    }

    for (std::size_t i = undo.size(); i-- > 0;) push(undo[i]);

    Death death;
    for (const auto& [id, l] : d.loops()) death.loops.push_back(id);
    push(death);
    center_division(s, (s.steps.size() + 1) / 2);
    return s;
}

Diagram random_diagram(std::uint64_t seed, int max_crossings) {
    Limits lim;
    lim.max_crossings = max_crossings;
    Sequence s = random_sequence(seed, lim);
    Replay rep = replay(s);
    Rng rng(seed ^ 0xabcdef1234567890ull);
    for (int tries = 0; tries < 8; ++tries) {
        const Diagram& d = rep.levels[1 + rng.below(static_cast<int>(rep.levels.size() - 1))];
        if (!d.empty()) return d;
    }
    return rep.levels[rep.levels.size() / 2];
}

}  // namespace mopic::oracle
