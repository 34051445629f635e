#include <mopic/normalizer.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace mopic {

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

// every identifier a step mentions (for disjointness checks)
struct Refs {
    std::set<EdgeId> edges;
    std::set<CrossingId> crossings;
    std::set<LoopId> loops;
    std::set<BlockId> blocks;
    bool intersects(const Refs& o) const {
        for (EdgeId e : edges)
            if (o.edges.count(e)) return true;
        for (CrossingId c : crossings)
            if (o.crossings.count(c)) return true;
        for (LoopId l : loops)
            if (o.loops.count(l)) return true;
        for (BlockId b : blocks)
            if (o.blocks.count(b)) return true;
        return false;
    }
};

Refs refs_of(const Transformation& t) {
    Refs r;
    if (const auto* b = std::get_if<Birth>(&t)) {
        for (const auto& g : b->groups)
            if (g.block) r.blocks.insert(*g.block);
    } else if (const auto* d = std::get_if<Death>(&t)) {
        for (LoopId l : d->loops) r.loops.insert(l);
    } else if (const auto* s = std::get_if<Surgery1>(&t)) {
        for (const Band& band : s->bands) {
            r.edges.insert(band.attach1);
            r.edges.insert(band.attach2);
            for (const CoreEvent& ev : band.core)
                if (ev.kind != CoreKind::twist) r.edges.insert(ev.target);
            r.blocks.insert(band.block);
            if (band.split_block) r.blocks.insert(*band.split_block);
        }
    } else if (const auto* iso = std::get_if<Isotopy>(&t)) {
        for (const Move& mv : iso->moves) {
            if (const auto* m = std::get_if<R1Plus>(&mv)) r.edges.insert(m->target);
            else if (const auto* m1 = std::get_if<R1Minus>(&mv)) r.crossings.insert(m1->crossing);
            else if (const auto* m2 = std::get_if<R2Plus>(&mv)) {
                r.edges.insert(m2->mover);
                r.edges.insert(m2->over_of);
            } else if (const auto* m3 = std::get_if<R2Minus>(&mv)) {
                r.crossings.insert(m3->c1);
                r.crossings.insert(m3->c2);
            } else if (const auto* m4 = std::get_if<R3>(&mv)) {
                r.crossings.insert(m4->c_pq);
                r.crossings.insert(m4->c_pr);
                r.crossings.insert(m4->c_qr);
            } else if (const auto* m5 = std::get_if<Retag>(&mv)) {
                r.blocks.insert(m5->block);
            } else if (const auto* m6 = std::get_if<MoveToBlock>(&mv)) {
                for (EdgeId e : m6->members) r.edges.insert(e);
                r.blocks.insert(m6->block);
            } else if (const auto* m7 = std::get_if<Relabel>(&mv)) {
                for (EdgeId e : m7->edges) r.edges.insert(e);
                for (CrossingId c : m7->crossings) r.crossings.insert(c);
            }
        }
    } else if (const auto* c = std::get_if<CrossingChange>(&t)) {
        for (CrossingId x : c->crossings) r.crossings.insert(x);
    } else if (const auto* h = std::get_if<HopfSplit>(&t)) {
        for (const auto& [b2, sg] : h->blocks) r.blocks.insert(b2);
    } else if (const auto* m = std::get_if<HopfMerge>(&t)) {
        for (const auto& spec : m->blocks) r.blocks.insert(spec.block);
    }
    return r;
}

// content of a block at a level, as refs
Refs block_support(const Diagram& d, BlockId b) {
    Refs r;
    r.blocks.insert(b);
    for (EdgeId e : d.block_content_edges(b)) r.edges.insert(e);
    for (CrossingId c : d.block_crossings(b)) r.crossings.insert(c);
    for (LoopId l : d.block_loops(b)) r.loops.insert(l);
    return r;
}

}  // namespace

// --- mirror_extend ------------------------------------------------------------------

Sequence mirror_extend(const std::vector<Transformation>& prefix) {
    // replay the prefix
    std::vector<Diagram> levels{Diagram{}};
    std::vector<StepNote> notes;
    for (const Transformation& t : prefix) {
        ApplyDetail det = apply_detail(levels.back(), t);
        notes.push_back(det.note);
        levels.push_back(det.result);
    }

    Sequence out;
    out.steps = prefix;
    Diagram cur = levels.back();
    Relabeling chi = identity_relabeling(cur);
    for (std::size_t j = prefix.size(); j-- > 0;)
        append_mirrored_step(prefix[j], notes[j], levels[j], out.steps, cur, chi);
    if (!cur.empty()) throw Error("internal: mirror extension does not close up");
    center_division(out, prefix.size());
    return out;
}

// --- builders ------------------------------------------------------------------------

Sequence montesinos_twin() {
    Diagram d;
    std::vector<Transformation> prefix;
    Birth b;
    b.groups.push_back({2, std::nullopt});
    prefix.push_back(b);
    d = mopic::apply(d, b).first;
    BlockId blk = d.loops().begin()->second.block;
    prefix.push_back(HopfMerge{{{blk, Sign::plus}}});
    prefix.push_back(Surgery1{});
    prefix.push_back(Surgery1{});
    return mirror_extend(prefix);
}

Sequence m_trivial(int spheres, int twins) {
    if (spheres < 0 || twins < 0) throw Error("m_trivial needs non-negative counts");
    if (spheres == 0 && twins == 0) {
        Sequence s;
        center_division(s, 0);
        return s;
    }
    Diagram d;
    std::vector<Transformation> prefix;
    Birth b;
    for (int i = 0; i < spheres; ++i) b.groups.push_back({1, std::nullopt});
    for (int i = 0; i < twins; ++i) b.groups.push_back({2, std::nullopt});
    prefix.push_back(b);
    ApplyDetail det = apply_detail(d, b);
    d = det.result;
    HopfMerge merge;
    for (int i = 0; i < twins; ++i) {
        LoopId first_of_pair = det.note.born_loops[spheres + 2 * i];
        merge.blocks.push_back({d.loop(first_of_pair).block, Sign::plus});
    }
    prefix.push_back(merge);
    prefix.push_back(Surgery1{});
    return mirror_extend(prefix);
}

// --- ladder parsing (builders and Theorem C) ---------------------------------------------

namespace {

struct RcParts {
    std::vector<Birth::Group> birth_groups;
    std::vector<MergeSpec> merges;
    std::vector<Band> low_bands;          // the L -> L0 surgery
    std::vector<Band> low_bands_second;   // symmetric forms: the K -> L0 surgery
    bool two_lower_surgeries = false;
};

RcParts rc_parse(const Sequence& s) {
    Replay rep = replay(s);
    std::vector<const Transformation*> ess;
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        const Transformation& t = s.steps[i];
        bool skip = std::holds_alternative<Isotopy>(t);
        if (const auto* sg = std::get_if<Surgery1>(&t)) skip = sg->bands.empty();
        if (const auto* h = std::get_if<HopfSplit>(&t)) skip = h->blocks.empty();
        if (const auto* m = std::get_if<HopfMerge>(&t)) skip = m->blocks.empty();
        if (!skip) ess.push_back(&t);
    }
    RcParts parts;
    std::size_t i = 0;
    if (i >= ess.size() || !std::holds_alternative<Birth>(*ess[i]))
        throw NotRibbonClaspNormalForm("sequence does not start with a birth");
    parts.birth_groups = std::get<Birth>(*ess[i]).groups;
    i++;
    if (i < ess.size() && std::holds_alternative<HopfMerge>(*ess[i]))
        parts.merges = std::get<HopfMerge>(*ess[i++]).blocks;
    std::vector<const Surgery1*> surgeries;
    while (i < ess.size() && std::holds_alternative<Surgery1>(*ess[i]))
        surgeries.push_back(&std::get<Surgery1>(*ess[i++]));
    if (i < ess.size() && std::holds_alternative<HopfSplit>(*ess[i])) i++;
    if (i >= ess.size() || !std::holds_alternative<Death>(*ess[i]))
        throw NotRibbonClaspNormalForm("sequence does not end with a death");
    i++;
    if (i != ess.size()) throw NotRibbonClaspNormalForm("unexpected steps after the death");
    if (surgeries.size() > 4)
        throw NotRibbonClaspNormalForm("too many interior 1-surgeries");
    // the lower half carries the band data; uppers are re-derived as duals
    if (surgeries.size() == 4) {
        parts.low_bands = surgeries[0]->bands;
        parts.low_bands_second = surgeries[1]->bands;
        parts.two_lower_surgeries = true;
    } else if (surgeries.size() == 2) {
        parts.low_bands = surgeries[0]->bands;
    } else if (!surgeries.empty()) {
        throw NotRibbonClaspNormalForm("interior 1-surgeries do not pair up");
    }
    return parts;
}

std::vector<Transformation> rc_prefix(const RcParts& parts, bool split_mid) {
    std::vector<Transformation> prefix;
    Birth b;
    b.groups = parts.birth_groups;
    prefix.push_back(b);
    HopfMerge m;
    m.blocks = parts.merges;
    prefix.push_back(m);
    if (split_mid) {
        Surgery1 s1;
        s1.bands = parts.low_bands;
        prefix.push_back(s1);
        Surgery1 s2;
        s2.bands = parts.low_bands_second;
        prefix.push_back(s2);
    } else {
        Surgery1 s1;
        s1.bands = parts.low_bands;
        for (const Band& band : parts.low_bands_second) s1.bands.push_back(band);
        prefix.push_back(s1);
    }
    return prefix;
}

}  // namespace

Sequence attach_handles(const Sequence& s, const std::vector<HandleSpec>& hs) {
    RcParts parts = rc_parse(s);
    if (parts.two_lower_surgeries) {
        // flatten a symmetric mid into one surgery first
        for (const Band& band : parts.low_bands_second) parts.low_bands.push_back(band);
        parts.low_bands_second.clear();
        parts.two_lower_surgeries = false;
    }
    std::vector<Transformation> prefix = rc_prefix(parts, false);
    // the mid level the bands must attach to
    Diagram mid;
    for (const Transformation& t : prefix) mid = mopic::apply(mid, t).first;
    for (const HandleSpec& h : hs) {
        Surgery1 probe;
        probe.bands = std::get<Surgery1>(prefix.back()).bands;
        probe.bands.push_back(h.band);
        Diagram base;
        for (std::size_t i = 0; i + 1 < prefix.size(); ++i)
            base = mopic::apply(base, prefix[i]).first;
        Violations v = validate(base, probe);
        if (!v.ok()) throw BandInvalidAtMidLevel(v.joined());
        std::get<Surgery1>(prefix.back()).bands.push_back(h.band);
    }
    return mirror_extend(prefix);
}

Sequence finger_move(const Sequence& s, EdgeId target1, EdgeId target2) {
    if (target1 == target2) throw BandInvalidAtMidLevel("finger move needs two distinct targets");
    RcParts parts = rc_parse(s);
    if (parts.two_lower_surgeries) {
        for (const Band& band : parts.low_bands_second) parts.low_bands.push_back(band);
        parts.low_bands_second.clear();
        parts.two_lower_surgeries = false;
    }

    // old prefix, for the id correspondence after the twin is spliced in
    Birth old_b;
    old_b.groups = parts.birth_groups;
    ApplyDetail old_birth = apply_detail(Diagram{}, old_b);
    HopfMerge old_m;
    old_m.blocks = parts.merges;
    ApplyDetail old_merge = apply_detail(old_birth.result, old_m);

    // splice the twin in: two extra loops, one extra positive hopf merge
    parts.birth_groups.push_back({2, std::nullopt});
    std::vector<Transformation> prefix;
    Birth b;
    b.groups = parts.birth_groups;
    prefix.push_back(b);
    ApplyDetail birth_det = apply_detail(Diagram{}, b);
    Diagram d = birth_det.result;
    LoopId twin_first = birth_det.note.born_loops[birth_det.note.born_loops.size() - 2];
    BlockId twin_block = d.loop(twin_first).block;
    HopfMerge m;
    m.blocks = parts.merges;
    m.blocks.push_back({twin_block, Sign::plus});
    prefix.push_back(m);
    ApplyDetail merge_det = apply_detail(d, m);
    d = merge_det.result;

    // the twin shifts the merge-made template ids; rebase the old mid bands
    // through a correspondence extended band by band
    {
        Relabeling chi;
        for (std::size_t i = 0; i < old_birth.note.born_loops.size(); ++i) {
            LoopId ol = old_birth.note.born_loops[i];
            LoopId nl = birth_det.note.born_loops[i];
            chi.loops[ol] = nl;
            chi.edges[old_birth.result.loop(ol).edge] = birth_det.result.loop(nl).edge;
            chi.blocks[old_birth.result.loop(ol).block] = birth_det.result.loop(nl).block;
        }
        for (std::size_t j = 0; j < old_merge.note.hopf.size(); ++j) {
            const auto& oh = old_merge.note.hopf[j];
            const auto& nh = merge_det.note.hopf[j];
            for (std::size_t k = 0; k < oh.template_crossings.size(); ++k) {
                CrossingId oc = oh.template_crossings[k];
                CrossingId nc = nh.template_crossings[k];
                chi.crossings[oc] = nc;
                for (int slot = 0; slot < 4; ++slot)
                    chi.edges[old_merge.result.crossing(oc).slots[slot]] =
                        merge_det.result.crossing(nc).slots[slot];
            }
        }
        Diagram old_sim = old_merge.result;
        Diagram new_sim = d;
        for (Band& band : parts.low_bands) {
            Band nb = std::get<Surgery1>(transport(Surgery1{{band}}, chi, new_sim)).bands[0];
            ApplyDetail od = apply_detail(old_sim, Surgery1{{band}});
            ApplyDetail nd = apply_detail(new_sim, Surgery1{{nb}});
            const BandNote& ob = od.note.bands[0];
            const BandNote& nbn = nd.note.bands[0];
            if (ob.touched_edges.size() != nbn.touched_edges.size() ||
                ob.new_crossings.size() != nbn.new_crossings.size())
                throw Error("internal: finger move band rebase mismatch");
            for (std::size_t k = 0; k < ob.touched_edges.size(); ++k) {
                chi.edges[ob.touched_edges[k]] = nbn.touched_edges[k];
                chi.blocks[od.result.block_of_edge(ob.touched_edges[k])] =
                    nd.result.block_of_edge(nbn.touched_edges[k]);
            }
            for (std::size_t k = 0; k < ob.new_crossings.size(); ++k)
                chi.crossings[ob.new_crossings[k]] = nbn.new_crossings[k];
            old_sim = od.result;
            new_sim = nd.result;
            band = nb;
        }
        // callers name targets in the old mid level
        if (chi.edges.count(target1)) target1 = chi.edges.at(target1);
        if (chi.edges.count(target2)) target2 = chi.edges.at(target2);
    }
    // the freshly made twin template: its two components
    auto comps = trace_components(d);
    EdgeId twin_a{}, twin_b{};
    bool got_a = false;
    for (const auto& comp : comps) {
        if (d.block_of_edge(comp.edges.front()) != twin_block) continue;
        if (!got_a) {
            twin_a = comp.edges.front();
            got_a = true;
        } else {
            twin_b = comp.edges.front();
        }
    }
    // targets live at the mid level, after the existing lower bands
    Diagram mid = d;
    if (!parts.low_bands.empty()) {
        Surgery1 low;
        low.bands = parts.low_bands;
        mid = mopic::apply(mid, low).first;
    }
    if (!mid.has_edge(target1) || !mid.has_edge(target2))
        throw BandInvalidAtMidLevel("finger move targets are not edges of the mid level");
    Band h1;
    h1.attach1 = twin_a;
    h1.attach2 = target1;
    h1.block = mid.block_of_edge(target1);
    Band h2;
    h2.attach1 = twin_b;
    h2.attach2 = target2;
    h2.block = mid.block_of_edge(target2);
    Surgery1 s1;
    s1.bands = parts.low_bands;
    s1.bands.push_back(h1);
    s1.bands.push_back(h2);
    Violations v = validate(d, s1);
    if (!v.ok()) throw BandInvalidAtMidLevel(v.joined());
    prefix.push_back(s1);
    return mirror_extend(prefix);
}

// --- make_prenormal -----------------------------------------------------------------------

Sequence make_prenormal(const Sequence& s) {
    Sequence out;
    std::size_t mid = s.mid;
    std::size_t new_mid = mid;
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        const Transformation& t = s.steps[i];
        std::size_t emitted = 1;
        if (const auto* c = std::get_if<CrossingChange>(&t)) {
            if (c->crossings.size() > 1) {
                for (CrossingId x : c->crossings) out.steps.push_back(CrossingChange{{x}});
                emitted = c->crossings.size();
            } else {
                out.steps.push_back(t);
            }
        } else {
            out.steps.push_back(t);
        }
        if (i < mid) new_mid += emitted - 1;
    }
    center_division(out, new_mid);
    return out;
}

// --- expansion (Lemma 5.1) -------------------------------------------------------------------

Sequence expand_crossing_change(const Sequence& s, std::size_t step) {
    Replay rep = replay(s);
    if (step >= s.steps.size()) throw NotASimpleCrossingChange("step index out of range");
    const auto* cc = std::get_if<CrossingChange>(&s.steps[step]);
    if (!cc || cc->crossings.size() != 1)
        throw NotASimpleCrossingChange("step is not a simple crossing change");
    const Diagram& level = rep.levels[step];
    CrossingId xid = cc->crossings[0];
    const Crossing& x = level.crossing(xid);
    std::set<EdgeId> distinct(x.slots.begin(), x.slots.end());
    if (distinct.size() != 4)
        throw NotASimpleCrossingChange(
            "crossing change site is degenerate (repeated edges at the crossing)");

    Sign sgn = over_dir_sign(x.over);
    EdgeId under_out = x.slots[2];
    EdgeId over_in = x.slots[over_in_slot(x)];
    EdgeId over_out = x.slots[over_out_slot(x)];
    EdgeId under_in = x.slots[0];

    std::vector<Transformation> inserted;

    // 1. prep: slide the under-out arc over the over-out arc next to the crossing
    Isotopy prep;
    prep.moves = {R2Plus{under_out, over_out, true, sgn}};
    inserted.push_back(prep);
    ApplyDetail prep_det = apply_detail(level, prep);
    CrossingId y_near = prep_det.note.moves[0].r2_created->first;
    const Crossing& yn = prep_det.result.crossing(y_near);
    EdgeId n_mover = yn.slots[over_out_slot(yn)];   // under-out arc between Y1 and Y2
    EdgeId n_static = yn.slots[2];                  // over-out arc between Y1 and Y2

    // 2. two plain bands pinch off the Hopf link carrying the double point
    Band b1;
    b1.attach1 = under_in;
    b1.attach2 = n_mover;
    b1.block = x.block;
    Band b2;
    b2.attach1 = over_in;
    b2.attach2 = n_static;
    b2.block = x.block;
    Surgery1 surgery;
    surgery.bands = {b1, b2};
    inserted.push_back(surgery);
    ApplyDetail band_det = apply_detail(prep_det.result, surgery);

    // 3. move the split-off Hopf link into a fresh scratch block W
    MoveToBlock mv;
    mv.members = {band_det.note.bands[0].dual2, band_det.note.bands[1].dual2};
    mv.block = BlockId{band_det.result.next_block_counter()};
    mv.scratch = true;
    Isotopy move_iso;
    move_iso.moves = {mv};
    inserted.push_back(move_iso);
    ApplyDetail move_det = apply_detail(band_det.result, move_iso);
    BlockId w = move_det.result.block_of_edge(band_det.note.bands[0].dual2);
    if (is_hopf_block(move_det.result, w) != sgn)
        throw Error("internal: expansion did not produce the expected Hopf template");

    // 4. the double point happens in W
    HopfSplit split;
    split.blocks = {{w, sgn}};
    inserted.push_back(split);
    ApplyDetail split_det = apply_detail(move_det.result, split);

    // 5. the two circles die in W
    Death death;
    death.loops = {split_det.note.hopf[0].loop_a, split_det.note.hopf[0].loop_b};
    inserted.push_back(death);
    ApplyDetail death_det = apply_detail(split_det.result, death);

    // assemble: prefix + inserted + rebased suffix
    Sequence out;
    for (std::size_t i = 0; i < step; ++i) out.steps.push_back(s.steps[i]);
    for (const Transformation& t : inserted) out.steps.push_back(t);
    Diagram cur = death_det.result;
    Relabeling chi = require_iso(rep.levels[step + 1], cur, "crossing change expansion");
    for (std::size_t i = step + 1; i < s.steps.size(); ++i)
        out.steps.push_back(transport_apply(s.steps[i], rep.levels[i], chi, cur));
    std::size_t new_mid = s.mid + (s.mid > step ? 4 : 0);
    center_division(out, new_mid);
    return out;
}

// --- commuting (Lemma 5.2) ----------------------------------------------------------------------

namespace {

// swap steps i and i+1 if the result replays to an isomorphic end level;
// rebases the suffix and re-centers the division
Sequence swap_steps(const Sequence& s, const Replay& rep, std::size_t i) {
    if (i + 1 >= s.steps.size()) throw BoundaryReached("no later step to commute with");
    Sequence out;
    for (std::size_t k = 0; k < i; ++k) out.steps.push_back(s.steps[k]);
    Diagram cur = rep.levels[i];
    Transformation first = s.steps[i + 1];
    Transformation second = s.steps[i];
    cur = mopic::apply(cur, first).first;
    cur = mopic::apply(cur, second).first;
    out.steps.push_back(first);
    out.steps.push_back(second);
    Relabeling chi = require_iso(rep.levels[i + 2], cur, "commutation");
    for (std::size_t k = i + 2; k < s.steps.size(); ++k)
        out.steps.push_back(transport_apply(s.steps[k], rep.levels[k], chi, cur));
    center_division(out, s.mid);
    return out;
}

}  // namespace

Sequence commute_hopf_split(const Sequence& s, std::size_t step, bool later) {
    Replay rep = replay(s);
    if (step >= s.steps.size()) throw Error("step index out of range");
    const Transformation& t = s.steps[step];
    const auto* split = std::get_if<HopfSplit>(&t);
    const auto* merge = std::get_if<HopfMerge>(&t);
    if (later && !split) throw Error("commute later needs a hopf split step");
    if (!later && !merge) throw Error("commute earlier needs a hopf merge step");
    std::size_t n_blocks = split ? split->blocks.size() : merge->blocks.size();
    if (n_blocks != 1) throw Error("commute handles a simple hopf step (one block)");
    BlockId w = split ? split->blocks[0].first : merge->blocks[0].block;
    const Diagram& pre = rep.levels[step];
    const Diagram& post = rep.levels[step + 1];
    if (!pre.is_scratch(w))
        throw SupportOverlap("hopf step is not confined to a scratch block");

    std::size_t nb = later ? step + 1 : step - 1;
    if (later && step + 1 >= s.steps.size()) throw BoundaryReached("already at the end");
    if (!later && step == 0) throw BoundaryReached("already at the start");

    Refs support = block_support(pre, w);
    Refs support_post = block_support(post, w);
    for (EdgeId e : support_post.edges) support.edges.insert(e);
    for (LoopId l : support_post.loops) support.loops.insert(l);
    for (CrossingId c : support_post.crossings) support.crossings.insert(c);
    Refs neighbor = refs_of(s.steps[nb]);
    if (neighbor.intersects(support))
        throw SupportOverlap("neighbor step touches the scratch block");

    return swap_steps(s, rep, later ? step : step - 1);
}

// --- fuse_fission_split --------------------------------------------------------------------------

namespace {

struct UF {
    std::vector<int> p;
    explicit UF(int n) : p(n) {
        for (int i = 0; i < n; ++i) p[i] = i;
    }
    int find(int x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        p[a] = b;
        return true;
    }
};

bool try_selection(const std::vector<std::pair<int, int>>& feet, int n_comps,
                   const std::vector<std::size_t>& pick) {
    UF uf(n_comps);
    for (std::size_t i : pick)
        if (feet[i].first == feet[i].second || !uf.unite(feet[i].first, feet[i].second))
            return false;
    return true;
}

}  // namespace

std::pair<std::vector<Band>, std::vector<Band>> fuse_fission_split(
    const std::vector<Band>& bands, const Diagram& level, int target_mu) {
    auto comps = trace_components(level);
    int n = static_cast<int>(comps.size());
    if (target_mu < 1 || target_mu > n)
        throw NoFusionSubset("target component count out of range");
    int need = n - target_mu;
    std::vector<std::pair<int, int>> feet;
    for (const Band& b : bands)
        feet.push_back({static_cast<int>(component_of_edge(comps, b.attach1).v),
                        static_cast<int>(component_of_edge(comps, b.attach2).v)});

    // lexicographically smallest spanning selection
    std::vector<std::size_t> pick;
    std::function<bool(std::size_t, int)> go = [&](std::size_t from, int left) -> bool {
        if (left == 0) return try_selection(feet, n, pick);
        for (std::size_t i = from; i + left <= bands.size() + 0 && i < bands.size(); ++i) {
            pick.push_back(i);
            if (try_selection(feet, n, pick) && go(i + 1, left - 1)) return true;
            pick.pop_back();
        }
        return false;
    };
    if (!go(0, need)) throw NoFusionSubset("no fusion subset reaches the target component count");
    std::vector<Band> fusion, rest;
    std::set<std::size_t> chosen(pick.begin(), pick.end());
    for (std::size_t i = 0; i < bands.size(); ++i)
        (chosen.count(i) ? fusion : rest).push_back(bands[i]);
    return {fusion, rest};
}

// --- Theorem C -----------------------------------------------------------------------------------

Sequence symmetrize(const Sequence& s) {
    ValidationReport rc = check_ribbon_clasp_normal_form(s);
    if (!rc.pass()) throw NotRibbonClaspNormalForm("input is not in a ribbon-clasp normal form");
    RcParts parts = rc_parse(s);
    if (parts.two_lower_surgeries) {
        for (const Band& band : parts.low_bands_second) parts.low_bands.push_back(band);
        parts.low_bands_second.clear();
    }
    SurfaceInvariants inv = realize(s);

    // the level L the bands attach to
    Diagram level;
    Birth b;
    b.groups = parts.birth_groups;
    level = mopic::apply(level, b).first;
    HopfMerge m;
    m.blocks = parts.merges;
    level = mopic::apply(level, m).first;

    auto [fusion, rest] = fuse_fission_split(parts.low_bands, level, inv.mu);
    // the remainder must be of pure fission type at K
    Diagram k_level = level;
    if (!fusion.empty()) {
        Surgery1 f;
        f.bands = fusion;
        k_level = mopic::apply(k_level, f).first;
    }
    if (!rest.empty()) {
        auto kinds = classify_bands(k_level, rest);
        for (bool merge_kind : kinds)
            if (merge_kind)
                throw NoFusionSubset(
                    "remainder bands are not of pure fission type at the K level");
    }
    RcParts out;
    out.birth_groups = parts.birth_groups;
    out.merges = parts.merges;
    out.low_bands = fusion;
    out.low_bands_second = rest;
    out.two_lower_surgeries = true;
    return mirror_extend(rc_prefix(out, true));
}

Sequence desymmetrize(const Sequence& s) {
    ValidationReport sym = check_symmetric_normal_form(s);
    if (!sym.pass()) throw NotSymmetricNormalForm("input is not in a symmetric normal form");
    RcParts parts = rc_parse(s);
    return mirror_extend(rc_prefix(parts, false));
}

// --- Theorem B -----------------------------------------------------------------------------------

namespace {

struct DpLoc {
    std::size_t step;
    Sign sign;
};

std::vector<DpLoc> dp_locations(const Sequence& s, const Replay& rep) {
    std::vector<DpLoc> out;
    for (std::size_t i = 0; i < s.steps.size(); ++i)
        for (Sign sg : rep.details[i].events.double_points) out.push_back({i, sg});
    return out;
}

void check_prenormal(const Sequence& s) {
    if (s.steps.empty()) throw NotPrenormal("empty sequence");
    if (!std::holds_alternative<Birth>(s.steps.front()))
        throw NotPrenormal("first step is not a birth");
    if (!std::holds_alternative<Death>(s.steps.back()))
        throw NotPrenormal("last step is not a death");
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        const Transformation& t = s.steps[i];
        if (std::holds_alternative<Birth>(t) && i != 0)
            throw NotPrenormal("interior 0-surgery at step " + std::to_string(i));
        if (std::holds_alternative<Death>(t) && i + 1 != s.steps.size())
            throw NotPrenormal("interior 2-surgery at step " + std::to_string(i));
        if (const auto* c = std::get_if<CrossingChange>(&t))
            if (c->crossings.size() != 1)
                throw NotPrenormal("crossing change at step " + std::to_string(i) +
                                   " is not simple");
        if (std::holds_alternative<HopfSplit>(t) || std::holds_alternative<HopfMerge>(t))
            throw NotPrenormal(
                "hopf phases present; present double points as crossing changes");
    }
}

// push the step at `from` rightward with repeated swaps until the next step
// is the final death; returns the new sequence and the step's final position
std::pair<Sequence, std::size_t> push_to_end(Sequence s, std::size_t from) {
    while (true) {
        Replay rep = replay(s);
        if (from + 2 >= s.steps.size()) return {s, from};  // next step is the final death
        s = swap_steps(s, rep, from);
        from++;
    }
}

// merge the W-death at `from` into the final death
Sequence merge_trailing_death(Sequence s, std::size_t from) {
    auto& lhs = std::get<Death>(s.steps[from]);
    auto& rhs = std::get<Death>(s.steps.back());
    for (LoopId l : lhs.loops) rhs.loops.push_back(l);
    std::sort(rhs.loops.begin(), rhs.loops.end());
    s.steps.erase(s.steps.begin() + static_cast<long>(from));
    std::size_t mid = s.mid > from ? s.mid - 1 : s.mid;
    center_division(s, mid);
    return s;
}

bool is_surgery(const Transformation& t) {
    const auto* sg = std::get_if<Surgery1>(&t);
    return sg && !sg->bands.empty();
}

// fusion/fission type of a single-band surgery at its level
bool surgery_merges(const Diagram& level, const Transformation& t) {
    const auto& sg = std::get<Surgery1>(t);
    return classify_bands(level, sg.bands).front();
}

}  // namespace

void require_prenormal(const Sequence& s) { check_prenormal(s); }

Sequence normalize(const Sequence& s, const DoublePointPartition& p) {
    check_prenormal(s);
    Replay rep = replay(s);
    auto dps = dp_locations(s, rep);
    if (p.assign.size() != dps.size())
        throw PreconditionViolated(
            Violations{{"partition must assign all " + std::to_string(dps.size()) +
                        " double points"}});
    for (std::size_t i = 0; i < dps.size(); ++i)
        if (DoublePointPartition::sign_of(p.assign[i]) != dps[i].sign)
            throw PreconditionViolated(
                Violations{{"partition group sign mismatch at double point " +
                            std::to_string(i)}});

    Sequence cur = s;

    // expand one crossing change and move its split and death to the end
    auto expand_and_push = [](Sequence seq, std::size_t step_idx) {
        seq = expand_crossing_change(seq, step_idx);
        // inserted: [prep, bands, move, split, death] at step_idx..step_idx+4
        try {
            auto [pushed, dpos] = push_to_end(seq, step_idx + 4);
            seq = merge_trailing_death(pushed, dpos);
            auto [pushed2, spos] = push_to_end(seq, step_idx + 3);
            (void)spos;
            return pushed2;
        } catch (const Error& e) {
            throw ReorderObstruction(
                std::string("the Hopf splitting cannot commute to the boundary: ") + e.what());
        }
    };

    // phase 1: upper-group double points, processed from the last to the
    // first so earlier step indices stay put. In a prenormal sequence the
    // k-th crossing change step carries the k-th double point.
    std::vector<bool> upper_flags;
    for (auto g : p.assign) upper_flags.push_back(DoublePointPartition::upper(g));
    std::set<std::size_t> expanded;
    for (std::size_t scan = upper_flags.size(); scan-- > 0;) {
        if (!upper_flags[scan]) continue;
        std::size_t rank = 0;  // position among the remaining crossing changes
        for (std::size_t i = 0; i < scan; ++i)
            if (!expanded.count(i)) rank++;
        std::size_t seen = 0;
        std::size_t step_idx = cur.steps.size();
        for (std::size_t i = 0; i < cur.steps.size(); ++i) {
            if (!std::holds_alternative<CrossingChange>(cur.steps[i])) continue;
            if (seen == rank) {
                step_idx = i;
                break;
            }
            seen++;
        }
        if (step_idx == cur.steps.size()) throw Error("internal: lost a double point");
        cur = expand_and_push(cur, step_idx);
        expanded.insert(scan);
    }

    // phase 2: the rest belongs below; mirror, expand there, mirror back
    bool any_lower = false;
    for (bool u : upper_flags)
        if (!u) any_lower = true;
    if (any_lower) {
        Sequence m = mirror_time(cur);
        while (true) {
            std::size_t step_idx = m.steps.size();
            for (std::size_t i = 0; i < m.steps.size(); ++i)
                if (std::holds_alternative<CrossingChange>(m.steps[i])) {
                    step_idx = i;
                    break;
                }
            if (step_idx == m.steps.size()) break;
            std::size_t before = m.steps.size();
            m = expand_and_push(m, step_idx);
            if (m.steps.size() <= before) throw Error("internal: expansion lost steps");
        }
        cur = mirror_time(m);
    }

    // phase 3: combine adjacent hopf phases
    for (std::size_t i = 0; i + 1 < cur.steps.size();) {
        auto* m1 = std::get_if<HopfMerge>(&cur.steps[i]);
        auto* m2 = std::get_if<HopfMerge>(&cur.steps[i + 1]);
        auto* h1 = std::get_if<HopfSplit>(&cur.steps[i]);
        auto* h2 = std::get_if<HopfSplit>(&cur.steps[i + 1]);
        if (m1 && m2) {
            for (auto& b : m2->blocks) m1->blocks.push_back(b);
            cur.steps.erase(cur.steps.begin() + static_cast<long>(i + 1));
        } else if (h1 && h2) {
            for (auto& b : h2->blocks) h1->blocks.push_back(b);
            cur.steps.erase(cur.steps.begin() + static_cast<long>(i + 1));
        } else {
            ++i;
        }
    }
    center_division(cur, 0);

    // phase 4: atomize interior surgeries and order them into
    // fusion/fission/fusion/fission by checked swaps
    {
        Sequence atom;
        for (std::size_t i = 0; i < cur.steps.size(); ++i) {
            if (const auto* sg = std::get_if<Surgery1>(&cur.steps[i])) {
                if (sg->bands.size() > 1) {
                    for (const Band& b : sg->bands) atom.steps.push_back(Surgery1{{b}});
                    continue;
                }
            }
            atom.steps.push_back(cur.steps[i]);
        }
        center_division(atom, 0);
        cur = atom;
    }

    auto surgery_positions = [](const Sequence& seq) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < seq.steps.size(); ++i)
            if (is_surgery(seq.steps[i])) out.push_back(i);
        return out;
    };

    SurfaceInvariants inv = realize(s);
    Replay cr = replay(cur);
    int n_lminus = 0, n_lplus = 0;
    {
        // L- sits after the leading birth and merges; L+ before the trailing
        // splits and the death
        std::size_t i = 1;
        while (i < cur.steps.size() && std::holds_alternative<HopfMerge>(cur.steps[i])) i++;
        n_lminus = static_cast<int>(trace_components(cr.levels[i]).size());
        std::size_t j = cur.steps.size() - 1;
        while (j > 0 && std::holds_alternative<HopfSplit>(cur.steps[j - 1])) j--;
        n_lplus = static_cast<int>(trace_components(cr.levels[j]).size());
    }
    int f1 = n_lminus - inv.mu;
    int fiss1 = inv.genus_total;
    int f2 = inv.genus_total;
    int fiss2 = n_lplus - inv.mu;
    auto positions = surgery_positions(cur);
    if (f1 < 0 || fiss2 < 0 || static_cast<int>(positions.size()) != f1 + fiss1 + f2 + fiss2)
        throw ReorderObstruction("interior band counts cannot fill the four surgery phases");

    std::vector<bool> want;
    for (int i = 0; i < f1; ++i) want.push_back(true);
    for (int i = 0; i < fiss1; ++i) want.push_back(false);
    for (int i = 0; i < f2; ++i) want.push_back(true);
    for (int i = 0; i < fiss2; ++i) want.push_back(false);

    for (std::size_t slot = 0; slot < want.size(); ++slot) {
        Replay r = replay(cur);
        positions = surgery_positions(cur);
        std::size_t at = positions[slot];
        if (surgery_merges(r.levels[at], cur.steps[at]) == want[slot]) continue;
        bool placed = false;
        for (std::size_t cand = slot + 1; cand < positions.size() && !placed; ++cand) {
            std::size_t cpos = positions[cand];
            {
                Replay rc2 = replay(cur);
                if (surgery_merges(rc2.levels[cpos], cur.steps[cpos]) != want[slot]) continue;
            }
            // bubble it leftward to `at`
            Sequence attempt = cur;
            bool ok = true;
            std::size_t moving = cpos;
            while (moving > at && ok) {
                try {
                    Replay ar = replay(attempt);
                    attempt = swap_steps(attempt, ar, moving - 1);
                    moving--;
                } catch (const Error&) {
                    ok = false;
                }
            }
            if (!ok) continue;
            Replay ar = replay(attempt);
            if (surgery_merges(ar.levels[at], attempt.steps[at]) != want[slot]) continue;
            cur = attempt;
            placed = true;
        }
        if (!placed)
            throw ReorderObstruction(
                "interior 1-surgeries cannot be reordered into fusion/fission phases");
    }

    // phase 5: mid sits at the L0 boundary, after the first f1+fiss1 surgeries
    {
        positions = surgery_positions(cur);
        std::size_t mid_level;
        if (positions.empty()) {
            std::size_t first_split = cur.steps.size() - 1;
            for (std::size_t i = 0; i < cur.steps.size(); ++i)
                if (std::holds_alternative<HopfSplit>(cur.steps[i])) {
                    first_split = i;
                    break;
                }
            mid_level = first_split;
        } else if (f1 + fiss1 == 0) {
            mid_level = positions.front();
        } else {
            mid_level = positions[static_cast<std::size_t>(f1 + fiss1) - 1] + 1;
        }
        center_division(cur, mid_level);
    }

    ValidationReport final_check = check_normal_form(cur);
    if (!final_check.pass()) {
        std::string why;
        for (const auto& c : final_check.clauses)
            if (!c.pass) why += c.id + ": " + c.note + "; ";
        throw ReorderObstruction("normalized sequence fails validation: " + why);
    }
    // half counts must equal the partition cardinalities
    SurfaceInvariants out_inv = realize(cur);
    int g1p = 0, g1m = 0, g2p = 0, g2m = 0;
    for (auto g : p.assign) {
        if (g == DoublePointPartition::Group::g1_plus) g1p++;
        if (g == DoublePointPartition::Group::g1_minus) g1m++;
        if (g == DoublePointPartition::Group::g2_plus) g2p++;
        if (g == DoublePointPartition::Group::g2_minus) g2m++;
    }
    if (out_inv.c1_plus != g1p || out_inv.c1_minus != g1m || out_inv.c2_plus != g2p ||
        out_inv.c2_minus != g2m)
        throw ReorderObstruction("half counts do not match the requested partition");
    return cur;
}

}  // namespace mopic
