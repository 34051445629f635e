#include <mopic/transform.hpp>

#include <algorithm>
#include <cassert>
#include <set>
#include <type_traits>

namespace mopic {

namespace {

// ---------------------------------------------------------------------------
// Rebuild: shared machinery for band surgery and local moves. Participating
// edges are exploded into provisional segments; new crossings anchor segment
// ends; cuts and dissolved crossings join segments smoothly; finalize()
// extracts maximal chains as the new edges, reusing ids deterministically.
// ---------------------------------------------------------------------------

struct Anchor {
    enum Kind { none, old_slot, new_slot } kind = none;
    CrossingId old_c{};
    int new_c = -1;
    int slot = -1;
};

struct PSeg {
    Anchor start, end;
    int smooth_next = -1, smooth_prev = -1;
    EdgeId origin{};
    bool is_first = false;   // first segment of an original open edge
    bool loop_lead = false;  // segment leaving the first feature of a loop edge
    int chain = -1;
};

struct NewCrossing {
    Crossing data;  // slots filled during finalize
    std::array<int, 4> psegs{-1, -1, -1, -1};
    CrossingId id{};
};

class Rebuild {
public:
    explicit Rebuild(Diagram& d) : d_(d), inc_(build_incidence(d)) {}

    bool participating(EdgeId e) const { return edges_.count(e) != 0; }

    // Explode edge e into n_features+1 segments (open) or n_features segments
    // (loop, cyclically). Features are numbered 0..n-1 along the edge.
    void explode(EdgeId e, int n_features) {
        if (edges_.count(e)) throw Error("internal: edge exploded twice");
        Entry entry;
        entry.loop = loop_of_edge(e);
        int nsegs = entry.loop ? std::max(n_features, 1) : n_features + 1;
        for (int i = 0; i < nsegs; ++i) {
            PSeg s;
            s.origin = e;
            if (!entry.loop && i == 0) s.is_first = true;
            if (entry.loop && i == 0 && n_features > 0) s.loop_lead = true;
            entry.segs.push_back(add_seg(s));
        }
        if (!entry.loop) {
            segs_[entry.segs.front()].start = old_anchor(inc_.out.at(e));
            segs_[entry.segs.back()].end = old_anchor(inc_.in.at(e));
        } else if (n_features == 0) {
            // featureless loop: a single self-joined segment
            int s = entry.segs.front();
            segs_[s].smooth_next = s;
            segs_[s].smooth_prev = s;
        }
        edges_[e] = std::move(entry);
    }

    void lazy_whole(EdgeId e) {
        if (!edges_.count(e)) explode(e, 0);
    }

    // segment arriving at feature i / leaving feature i
    int seg_into(EdgeId e, int i) const {
        const Entry& en = edges_.at(e);
        if (!en.loop) return en.segs[i];
        int k = static_cast<int>(en.segs.size());
        return en.segs[(i - 1 + k) % k];
    }
    int seg_from(EdgeId e, int i) const {
        const Entry& en = edges_.at(e);
        if (!en.loop) return en.segs[i + 1];
        return en.segs[i];
    }

    int new_side_seg() {
        PSeg s;
        return add_seg(s);
    }

    // create a crossing whose slots reference provisional segments
    int add_crossing(int under_in, int under_out, int over_in, int over_out, Sign sign,
                     BlockId block) {
        NewCrossing nc;
        nc.data.block = block;
        int b_slot, d_slot;
        if (sign == Sign::plus) {
            nc.data.over = OverDir::d_to_b;
            d_slot = 3;  // over enters d
            b_slot = 1;
        } else {
            nc.data.over = OverDir::b_to_d;
            d_slot = 1;  // over enters b
            b_slot = 3;
        }
        nc.psegs[0] = under_in;
        nc.psegs[2] = under_out;
        nc.psegs[d_slot] = over_in;
        nc.psegs[b_slot] = over_out;
        int idx = static_cast<int>(new_crossings_.size());
        new_crossings_.push_back(nc);
        anchor_new(under_in, idx, 0, /*entry=*/true);
        anchor_new(under_out, idx, 2, false);
        anchor_new(over_in, idx, d_slot, true);
        anchor_new(over_out, idx, b_slot, false);
        return idx;
    }

    void join(int from_seg, int to_seg) {
        segs_[from_seg].smooth_next = to_seg;
        segs_[to_seg].smooth_prev = from_seg;
    }

    // replace an existing crossing by smooth strand continuations
    void dissolve(CrossingId c) { dissolved_.push_back(c); }

    struct Outcome {
        std::vector<CrossingId> new_crossing_ids;
        std::vector<LoopId> new_loops;
        std::map<int, EdgeId> chain_ids;      // chain index -> final edge id
        std::vector<EdgeId> fresh_edges;
    };

    EdgeId final_edge_of(int seg) const { return chain_final_.at(segs_[seg].chain); }
    // final edge holding (the first segment of) original edge e
    EdgeId final_of_original(EdgeId e) const { return final_edge_of(edges_.at(e).segs.front()); }

    // loop_block: where freshly formed free loops land
    Outcome finalize(BlockId loop_block) {
        process_dissolutions();
        Outcome out;

        // chain extraction in segment creation order
        int nchains = 0;
        std::vector<std::vector<int>> chains;
        std::vector<bool> cyclic;
        for (int i = 0; i < static_cast<int>(segs_.size()); ++i) {
            if (segs_[i].chain >= 0) continue;
            // rewind
            int s = i;
            bool cyc = false;
            while (segs_[s].smooth_prev >= 0) {
                s = segs_[s].smooth_prev;
                if (s == i) { cyc = true; break; }
            }
            std::vector<int> run;
            int cur = s;
            while (true) {
                segs_[cur].chain = nchains;
                run.push_back(cur);
                int nxt = segs_[cur].smooth_next;
                if (nxt < 0 || nxt == s) break;
                cur = nxt;
            }
            chains.push_back(std::move(run));
            cyclic.push_back(cyc || segs_[chains.back().back()].smooth_next == s);
            ++nchains;
        }

        // final ids: reuse first-segment edge ids, then loop leads, else fresh
        std::set<EdgeId> used;
        for (int c = 0; c < nchains; ++c) {
            std::optional<EdgeId> best_first, best_lead;
            for (int s : chains[c]) {
                if (segs_[s].is_first && (!best_first || segs_[s].origin < *best_first))
                    best_first = segs_[s].origin;
                if (segs_[s].loop_lead && (!best_lead || segs_[s].origin < *best_lead))
                    best_lead = segs_[s].origin;
            }
            EdgeId id;
            if (best_first && !used.count(*best_first))
                id = *best_first;
            else if (best_lead && !used.count(*best_lead))
                id = *best_lead;
            else {
                id = d_.new_edge();
                out.fresh_edges.push_back(id);
            }
            used.insert(id);
            chain_final_[c] = id;
            out.chain_ids[c] = id;
        }

        // materialize new crossings
        for (auto& nc : new_crossings_) {
            nc.id = d_.new_crossing_id();
            for (int s = 0; s < 4; ++s) nc.data.slots[s] = chain_final_.at(segs_[nc.psegs[s]].chain);
            d_.put_crossing(nc.id, nc.data);
            out.new_crossing_ids.push_back(nc.id);
        }
        // drop dissolved crossings
        for (CrossingId c : dissolved_) d_.erase_crossing(c);

        // rewrite anchors into existing crossings
        for (int c = 0; c < nchains; ++c) {
            EdgeId id = chain_final_.at(c);
            const PSeg& first = segs_[chains[c].front()];
            const PSeg& last = segs_[chains[c].back()];
            if (!cyclic[c]) {
                rewrite_anchor(first.start, id);
                rewrite_anchor(last.end, id);
            }
        }

        // consumed loops disappear; cyclic chains become free loops
        for (auto& [e, entry] : edges_)
            if (entry.loop) d_.erase_loop(*entry.loop);
        for (int c = 0; c < nchains; ++c) {
            if (!cyclic[c]) continue;
            FreeLoop l;
            l.edge = chain_final_.at(c);
            l.block = loop_block;
            LoopId id = d_.new_loop_id();
            d_.put_loop(id, l);
            out.new_loops.push_back(id);
        }
        return out;
    }

private:
    struct Entry {
        std::optional<LoopId> loop;
        std::vector<int> segs;
    };

    Diagram& d_;
    Incidence inc_;
    std::vector<PSeg> segs_;
    std::map<EdgeId, Entry> edges_;
    std::vector<NewCrossing> new_crossings_;
    std::vector<CrossingId> dissolved_;
    std::map<int, EdgeId> chain_final_;

    std::optional<LoopId> loop_of_edge(EdgeId e) const {
        for (const auto& [id, l] : d_.loops())
            if (l.edge == e) return id;
        return std::nullopt;
    }

    int add_seg(const PSeg& s) {
        segs_.push_back(s);
        return static_cast<int>(segs_.size()) - 1;
    }

    static Anchor old_anchor(const Incidence::End& e) {
        Anchor a;
        a.kind = Anchor::old_slot;
        a.old_c = e.crossing;
        a.slot = e.slot;
        return a;
    }

    void anchor_new(int seg, int nc, int slot, bool entry) {
        Anchor a;
        a.kind = Anchor::new_slot;
        a.new_c = nc;
        a.slot = slot;
        if (entry)
            segs_[seg].end = a;
        else
            segs_[seg].start = a;
    }

    void process_dissolutions() {
        for (CrossingId c : dissolved_) {
            const Crossing& x = d_.crossing(c);
            // lazily participate the four slot edges
            for (EdgeId e : x.slots) lazy_whole(e);
            int oi = over_in_slot(x), oo = over_out_slot(x);
            join(last_seg_into(c, 0, x.slots[0]), first_seg_from(c, 2, x.slots[2]));
            join(last_seg_into(c, oi, x.slots[oi]), first_seg_from(c, oo, x.slots[oo]));
        }
    }

    // segment of edge e whose end anchors at (c, slot)
    int last_seg_into(CrossingId c, int slot, EdgeId e) {
        const Entry& en = edges_.at(e);
        for (int s : en.segs) {
            const Anchor& a = segs_[s].end;
            if (a.kind == Anchor::old_slot && a.old_c == c && a.slot == slot) return s;
        }
        throw Error("internal: dissolved crossing arrival segment missing");
    }
    int first_seg_from(CrossingId c, int slot, EdgeId e) {
        const Entry& en = edges_.at(e);
        for (int s : en.segs) {
            const Anchor& a = segs_[s].start;
            if (a.kind == Anchor::old_slot && a.old_c == c && a.slot == slot) return s;
        }
        throw Error("internal: dissolved crossing departure segment missing");
    }

    void rewrite_anchor(const Anchor& a, EdgeId id) {
        if (a.kind == Anchor::none) return;
        if (a.kind == Anchor::new_slot) return;  // already materialized
        if (std::find(dissolved_.begin(), dissolved_.end(), a.old_c) != dissolved_.end()) return;
        Crossing x = d_.crossing(a.old_c);
        x.slots[a.slot] = id;
        d_.put_crossing(a.old_c, x);
    }
};

// ---------------------------------------------------------------------------

void require(bool ok, const std::string& msg) {
    if (!ok) {
        Violations v;
        v.items.push_back(msg);
        throw PreconditionViolated(std::move(v));
    }
}

Crossing toggled(const Crossing& x) {
    Crossing y;
    y.block = x.block;
    if (x.over == OverDir::d_to_b) {
        y.slots = {x.slots[3], x.slots[0], x.slots[1], x.slots[2]};
        y.over = OverDir::b_to_d;
    } else {
        y.slots = {x.slots[1], x.slots[2], x.slots[3], x.slots[0]};
        y.over = OverDir::d_to_b;
    }
    return y;
}

// existing blocks resolve to themselves; anything else becomes a fresh block
// (the parser enforces name discipline at the wire level)
BlockId resolve_block_target(Diagram& d, BlockId b, bool scratch) {
    if (d.has_block(b)) return b;
    return d.new_block(scratch);
}

// move the whole component containing rep into block b
void move_component(Diagram& d, EdgeId rep, BlockId b) {
    auto comps = trace_components(d);
    ComponentId ci = component_of_edge(comps, rep);
    const Component& comp = comps[ci.v];
    if (comp.loop) {
        FreeLoop l = d.loop(*comp.loop);
        l.block = b;
        d.put_loop(*comp.loop, l);
        return;
    }
    std::set<CrossingId> seen;
    for (const Passage& p : comp.passages) seen.insert(p.crossing);
    for (CrossingId c : seen) {
        Crossing x = d.crossing(c);
        x.block = b;
        d.put_crossing(c, x);
    }
}

// ---------------------------------------------------------------------------
// per-kind application
// ---------------------------------------------------------------------------

void do_birth(Diagram& d, const Birth& t, ApplyDetail& out) {
    for (const auto& g : t.groups) {
        require(g.count >= 1, "birth group must create at least one loop");
        BlockId b;
        if (g.block) {
            if (d.has_block(*g.block)) {
                BlockTag tag = d.block_tag(*g.block);
                require(tag == BlockTag::trivial || tag == BlockTag::scratch_empty,
                        "birth into block b" + std::to_string(g.block->v) +
                            " which holds crossings");
                b = *g.block;
            } else {
                b = resolve_block_target(d, *g.block, g.scratch);
            }
        } else {
            b = d.new_block(g.scratch);
        }
        for (std::uint32_t i = 0; i < g.count; ++i) {
            LoopId l = add_free_loop(d, b);
            out.note.born_loops.push_back(l);
            out.events.births++;
        }
    }
}

void do_death(Diagram& d, const Death& t, ApplyDetail& out) {
    std::set<LoopId> seen;
    for (LoopId l : t.loops) {
        require(seen.insert(l).second, "death lists loop l" + std::to_string(l.v) + " twice");
        require(d.has_loop(l), "death target l" + std::to_string(l.v) + " is not a free loop");
        BlockId b = d.loop(l).block;
        require(d.block_tag(b) == BlockTag::trivial,
                "death target l" + std::to_string(l.v) + " lives in a non-trivial block");
    }
    std::set<BlockId> affected;
    for (LoopId l : t.loops) {
        affected.insert(d.loop(l).block);
        out.note.killed_loops.push_back({l, d.loop(l).block});
        d.erase_loop(l);
        out.events.deaths++;
    }
    for (BlockId b : affected)
        if (d.block_loops(b).empty() && d.block_crossings(b).empty())
            out.note.emptied_blocks.push_back({b, d.is_scratch(b)});
    d.gc_blocks();
}

void do_crossing_change(Diagram& d, const CrossingChange& t, ApplyDetail& out) {
    require(!t.crossings.empty(), "crossing change lists no crossings");
    std::set<CrossingId> seen;
    for (CrossingId c : t.crossings) {
        require(seen.insert(c).second, "crossing x" + std::to_string(c.v) + " listed twice");
        require(d.has_crossing(c), "no crossing x" + std::to_string(c.v));
    }
    for (CrossingId c : t.crossings) {
        Crossing y = toggled(d.crossing(c));
        d.put_crossing(c, y);
        out.events.double_points.push_back(over_dir_sign(y.over));
    }
}

void do_hopf_split(Diagram& d, const HopfSplit& t, ApplyDetail& out) {
    for (const auto& [b, s] : t.blocks) {
        require(d.has_block(b), "no block b" + std::to_string(b.v));
        auto sign = is_hopf_block(d, b);
        require(sign.has_value(), "block b" + std::to_string(b.v) + " is not a Hopf template");
        require(*sign == s, "block b" + std::to_string(b.v) + " holds a Hopf link of the other sign");
    }
    for (const auto& [b, s] : t.blocks) {
        auto xs = d.block_crossings(b);
        auto comps = trace_components(d);
        std::vector<EdgeId> reps;
        std::set<std::uint32_t> comp_idx;
        for (EdgeId e : d.block_content_edges(b)) comp_idx.insert(component_of_edge(comps, e).v);
        for (std::uint32_t ci : comp_idx)
            reps.push_back(*std::min_element(comps[ci].edges.begin(), comps[ci].edges.end()));
        std::sort(reps.begin(), reps.end());
        // stacked presentations have an edge passing under at both crossings
        bool stacked = false;
        for (EdgeId e : d.block_content_edges(b)) {
            int unders = 0, overs = 0;
            for (CrossingId c : xs) {
                const Crossing& x = d.crossing(c);
                if (x.slots[0] == e) unders++;
                if (x.slots[2] == e) unders++;
                if (x.slots[over_in_slot(x)] == e) overs++;
                if (x.slots[over_out_slot(x)] == e) overs++;
            }
            if (unders == 2 && overs == 0) stacked = true;
        }
        for (CrossingId c : xs) d.erase_crossing(c);
        // two fresh loops in the same block
        StepNote::HopfNote hn;
        hn.template_crossings = xs;
        hn.alternating = !stacked;
        LoopId la = add_free_loop(d, b);
        LoopId lb = add_free_loop(d, b);
        hn.loop_a = la;
        hn.loop_b = lb;
        out.note.hopf.push_back(hn);
        out.links.push_back({reps[0], d.loop(la).edge});
        out.links.push_back({reps[1], d.loop(lb).edge});
        out.events.double_points.push_back(-s);
    }
    d.gc_blocks();
}

void do_hopf_merge(Diagram& d, const HopfMerge& t, ApplyDetail& out) {
    std::set<BlockId> seen;
    for (const auto& spec : t.blocks) {
        require(seen.insert(spec.block).second,
                "block b" + std::to_string(spec.block.v) + " listed twice");
        require(d.has_block(spec.block), "no block b" + std::to_string(spec.block.v));
        require(d.block_crossings(spec.block).empty() && d.block_loops(spec.block).size() == 2,
                "hopf merge needs a block holding exactly two free loops (b" +
                    std::to_string(spec.block.v) + ")");
    }
    for (const auto& spec : t.blocks) {
        BlockId b = spec.block;
        auto ls = d.block_loops(b);
        std::sort(ls.begin(), ls.end());
        EdgeId ea = d.loop(ls[0]).edge, eb = d.loop(ls[1]).edge;
        d.erase_loop(ls[0]);
        d.erase_loop(ls[1]);
        EdgeId e1 = d.new_edge(), e2 = d.new_edge(), e3 = d.new_edge(), e4 = d.new_edge();
        CrossingId c1 = d.new_crossing_id(), c2 = d.new_crossing_id();
        if (spec.alternating) {
            // component {e1,e2} over at the first crossing, under at the second
            d.put_crossing(c1, make_crossing(e3, e4, e1, e2, spec.sign, b));
            d.put_crossing(c2, make_crossing(e2, e1, e4, e3, spec.sign, b));
        } else {
            Crossing x1, x2;
            x1.slots = {e1, e2, e3, e4};
            x2.slots = {e3, e4, e1, e2};
            x1.over = x2.over = sign_over_dir(spec.sign);
            x1.block = x2.block = b;
            d.put_crossing(c1, x1);
            d.put_crossing(c2, x2);
        }
        StepNote::HopfNote hn;
        hn.loop_a = ls[0];
        hn.loop_b = ls[1];
        hn.template_crossings = {c1, c2};
        hn.alternating = spec.alternating;
        out.note.hopf.push_back(hn);
        out.links.push_back({ea, e1});  // lower loop continues as the e1 component
        out.links.push_back({eb, spec.alternating ? e3 : e2});
        out.events.double_points.push_back(spec.sign);
    }
}

void do_band(Diagram& d, const Band& band, const std::set<EdgeId>& all_attach,
             ApplyDetail& out) {
    require(d.has_edge(band.attach1), "band attach edge e" + std::to_string(band.attach1.v) +
                                          " does not exist");
    require(d.has_edge(band.attach2), "band attach edge e" + std::to_string(band.attach2.v) +
                                          " does not exist");
    for (const CoreEvent& ev : band.core) {
        if (ev.kind == CoreKind::twist) continue;
        require(d.has_edge(ev.target),
                "band core target e" + std::to_string(ev.target.v) + " does not exist");
        require(!all_attach.count(ev.target),
                "band core targets an attach edge e" + std::to_string(ev.target.v));
    }

    BlockId block1_before = d.block_of_edge(band.attach1);
    BlockId block2_before = d.block_of_edge(band.attach2);
    bool block1_scratch = d.is_scratch(block1_before);
    bool block2_scratch = d.is_scratch(block2_before);
    BlockId block = resolve_block_target(d, band.block, band.block_scratch);

    Rebuild rb(d);
    bool same_edge = band.attach1 == band.attach2;

    // feature counts: cuts on attach edges, one passage pair per cross event on targets
    std::map<EdgeId, int> target_feats;
    for (const CoreEvent& ev : band.core)
        if (ev.kind != CoreKind::twist) target_feats[ev.target] += 2;  // side A + side B crossings

    if (same_edge) {
        rb.explode(band.attach1, 2);
    } else {
        rb.explode(band.attach1, 1);
        rb.explode(band.attach2, 1);
    }
    for (auto& [e, n] : target_feats) rb.explode(e, n);

    // side A and side B provisional segments around their passages
    int n_a = 0, n_b = 0;
    for (const CoreEvent& ev : band.core) {
        n_a += ev.kind == CoreKind::twist ? 2 : 1;
        n_b += ev.kind == CoreKind::twist ? 2 : 1;
    }
    std::vector<int> a_segs, b_segs;
    for (int i = 0; i <= n_a; ++i) a_segs.push_back(rb.new_side_seg());
    for (int i = 0; i <= n_b; ++i) b_segs.push_back(rb.new_side_seg());

    // walk the core: side A forward, side B backward
    std::map<EdgeId, int> feat_cursor;  // next feature index per target edge
    int ai = 0;
    int bi = n_b;  // B consumed from the far end backwards
    BandNote note;
    for (const CoreEvent& ev : band.core) {
        if (ev.kind == CoreKind::twist) {
            // side A over at both crossings; B passes them in reverse
            int a0 = a_segs[ai], a1 = a_segs[ai + 1], a2 = a_segs[ai + 2];
            int b0 = b_segs[bi - 2], b1 = b_segs[bi - 1], b2 = b_segs[bi];
            rb.add_crossing(b1, b2, a0, a1, ev.sign, block);
            rb.add_crossing(b0, b1, a1, a2, ev.sign, block);
            note.pure = false;
            ai += 2;
            bi -= 2;
        } else {
            int& cur = feat_cursor[ev.target];
            int fa = cur++;  // side A meets the target first along the target
            int fb = cur++;
            int a_in = a_segs[ai], a_out = a_segs[ai + 1];
            int b_in = b_segs[bi - 1], b_out = b_segs[bi];
            int t_a_in = rb.seg_into(ev.target, fa), t_a_out = rb.seg_from(ev.target, fa);
            int t_b_in = rb.seg_into(ev.target, fb), t_b_out = rb.seg_from(ev.target, fb);
            if (ev.kind == CoreKind::cross_over) {
                rb.add_crossing(t_a_in, t_a_out, a_in, a_out, Sign::plus, block);
                rb.add_crossing(t_b_in, t_b_out, b_in, b_out, Sign::minus, block);
            } else {
                rb.add_crossing(a_in, a_out, t_a_in, t_a_out, Sign::plus, block);
                rb.add_crossing(b_in, b_out, t_b_in, t_b_out, Sign::minus, block);
            }
            note.pure = false;
            note.twist_only = false;
            ai += 1;
            bi -= 1;
        }
    }

    // feet: cut 0 on attach1, cut (1 or 0) on attach2
    int j1 = 0;
    int j2 = same_edge ? 1 : 0;
    rb.join(rb.seg_into(band.attach1, j1), a_segs.front());
    rb.join(a_segs.back(), rb.seg_from(band.attach2, j2));
    rb.join(rb.seg_into(band.attach2, j2), b_segs.front());
    rb.join(b_segs.back(), rb.seg_from(band.attach1, j1));

    auto outcome = rb.finalize(block);
    note.new_crossings = outcome.new_crossing_ids;
    note.dual1 = rb.final_edge_of(a_segs.front());
    note.dual2 = rb.final_edge_of(b_segs.back());
    note.block1_before = block1_before;
    note.block2_before = block2_before;
    note.block1_scratch = block1_scratch;
    note.block2_scratch = block2_scratch;
    for (auto& [c, id] : outcome.chain_ids) note.touched_edges.push_back(id);

    // saddle connectivity
    out.links.push_back({band.attach1, note.dual1});
    out.links.push_back({band.attach2, note.dual2});
    out.after_unions.push_back({note.dual1, note.dual2});

    // merge touched components into the band block
    auto comps = trace_components(d);
    std::set<std::uint32_t> touched;
    auto comp_of = [&](EdgeId e) -> int {
        for (std::size_t i = 0; i < comps.size(); ++i)
            for (EdgeId f : comps[i].edges)
                if (f == e) return static_cast<int>(i);
        return -1;
    };
    auto touch = [&](EdgeId e) {
        int c = comp_of(e);
        if (c >= 0) touched.insert(static_cast<std::uint32_t>(c));
    };
    touch(note.dual1);
    touch(note.dual2);
    for (auto& [e, n] : target_feats) touch(e);
    for (auto& [c, id] : outcome.chain_ids) touch(id);
    for (std::uint32_t ci : touched) {
        EdgeId rep = comps[ci].edges.front();
        move_component(d, rep, block);
    }

    note.merged = comp_of(note.dual1) == comp_of(note.dual2);
    require(!(note.merged && band.split_block.has_value()),
            "split block named for a band of fusion type");
    if (!note.merged && band.split_block) {
        BlockId target = *band.split_block;
        if (!d.has_block(target)) target = d.new_block(band.split_scratch);
        move_component(d, note.dual2, target);
    }
    out.note.bands.push_back(note);
    d.gc_blocks();
    out.events.bands++;
}

void do_surgery(Diagram& d, const Surgery1& t, ApplyDetail& out) {
    std::set<EdgeId> attach;
    std::multiset<EdgeId> attach_multi;
    for (const Band& b : t.bands) {
        attach.insert(b.attach1);
        attach.insert(b.attach2);
        attach_multi.insert(b.attach1);
        if (b.attach2 != b.attach1) attach_multi.insert(b.attach2);
    }
    // attach edges pairwise distinct across bands
    std::set<EdgeId> once;
    for (EdgeId e : attach_multi)
        require(once.insert(e).second,
                "bands share attach edge e" + std::to_string(e.v));
    for (const Band& b : t.bands) do_band(d, b, attach, out);
}

// --- isotopy moves -----------------------------------------------------------

void do_r1_plus(Diagram& d, const R1Plus& m, ApplyDetail& out) {
    require(d.has_edge(m.target), "r1+ target e" + std::to_string(m.target.v) + " missing");
    Rebuild rb(d);
    rb.explode(m.target, 2);
    int s0 = rb.seg_into(m.target, 0);
    int s1 = rb.seg_from(m.target, 0);  // == seg_into(target, 1)
    int s2 = rb.seg_from(m.target, 1);
    if (m.over_first)
        rb.add_crossing(s1, s2, s0, s1, m.sign, d.block_of_edge(m.target));
    else
        rb.add_crossing(s0, s1, s1, s2, m.sign, d.block_of_edge(m.target));
    auto oc = rb.finalize(d.block_of_edge(m.target));
    MoveNote note;
    note.r1_created = oc.new_crossing_ids.front();
    out.note.moves.push_back(note);
}

bool kink_edge(const Crossing& x, EdgeId* e, Sign* s, bool* over_first) {
    int exits[2] = {2, over_out_slot(x)};
    int entries[2] = {0, over_in_slot(x)};
    for (int ex : exits)
        for (int en : entries)
            if (x.slots[ex] == x.slots[en]) {
                if (e) *e = x.slots[ex];
                if (s) *s = over_dir_sign(x.over);
                if (over_first) *over_first = ex == over_out_slot(x) && en == 0;
                return true;
            }
    return false;
}

void do_r1_minus(Diagram& d, const R1Minus& m, ApplyDetail& out) {
    require(d.has_crossing(m.crossing), "r1- crossing missing");
    const Crossing x = d.crossing(m.crossing);
    EdgeId kedge{};
    Sign ksign = Sign::plus;
    bool over_first = false;
    require(kink_edge(x, &kedge, &ksign, &over_first), "r1- target is not a kink");
    Rebuild rb(d);
    rb.dissolve(m.crossing);
    rb.finalize(x.block);
    MoveNote note;
    R1Plus re;
    re.target = rb.final_of_original(kedge);
    re.sign = ksign;
    re.over_first = over_first;
    note.r1_reinsert = re;
    out.note.moves.push_back(note);
}

void do_r2_plus(Diagram& d, const R2Plus& m, ApplyDetail& out) {
    require(d.has_edge(m.mover), "r2+ mover edge missing");
    require(d.has_edge(m.over_of), "r2+ static edge missing");
    require(m.mover != m.over_of, "r2+ needs two distinct edges");
    Rebuild rb(d);
    rb.explode(m.mover, 2);
    rb.explode(m.over_of, 2);
    BlockId block = d.block_of_edge(m.mover);
    require(block == d.block_of_edge(m.over_of), "r2+ strands lie in different blocks");
    int m0 = rb.seg_into(m.mover, 0), m1 = rb.seg_from(m.mover, 0), m2 = rb.seg_from(m.mover, 1);
    int s0 = rb.seg_into(m.over_of, 0), s1 = rb.seg_from(m.over_of, 0), s2 = rb.seg_from(m.over_of, 1);
    // the mover meets Ynear then Yfar; the static strand meets them in the
    // same order (parallel) or reversed (antiparallel)
    int t_near_in = m.antiparallel ? s1 : s0;
    int t_near_out = m.antiparallel ? s2 : s1;
    int t_far_in = m.antiparallel ? s0 : s1;
    int t_far_out = m.antiparallel ? s1 : s2;
    if (m.mover_over) {
        rb.add_crossing(t_near_in, t_near_out, m0, m1, m.near_sign, block);
        rb.add_crossing(t_far_in, t_far_out, m1, m2, -m.near_sign, block);
    } else {
        rb.add_crossing(m0, m1, t_near_in, t_near_out, m.near_sign, block);
        rb.add_crossing(m1, m2, t_far_in, t_far_out, -m.near_sign, block);
    }
    auto oc = rb.finalize(block);
    MoveNote note;
    note.r2_created = {oc.new_crossing_ids[0], oc.new_crossing_ids[1]};
    out.note.moves.push_back(note);
}

void do_r2_minus(Diagram& d, const R2Minus& m, ApplyDetail& out) {
    require(m.c1 != m.c2, "r2- needs two crossings");
    require(d.has_crossing(m.c1) && d.has_crossing(m.c2), "r2- crossing missing");
    const Crossing x1 = d.crossing(m.c1);
    const Crossing x2 = d.crossing(m.c2);
    require(over_dir_sign(x1.over) != over_dir_sign(x2.over), "r2- needs opposite signs");
    // shared edges
    std::vector<EdgeId> shared;
    for (EdgeId e : x1.slots)
        for (EdgeId f : x2.slots)
            if (e == f && std::find(shared.begin(), shared.end(), e) == shared.end())
                shared.push_back(e);
    require(shared.size() >= 2, "r2- crossings do not bound a bigon");
    // need one shared edge over at both crossings and another under at both
    auto role = [&](const Crossing& x, EdgeId e) {
        // +1 over, -1 under, 0 not found
        if (x.slots[over_in_slot(x)] == e || x.slots[over_out_slot(x)] == e) return 1;
        if (x.slots[0] == e || x.slots[2] == e) return -1;
        return 0;
    };
    std::optional<EdgeId> over_shared, under_shared;
    for (EdgeId e : shared) {
        int ra = role(x1, e), rb = role(x2, e);
        if (ra == 1 && rb == 1 && !over_shared) over_shared = e;
        if (ra == -1 && rb == -1 && !under_shared) under_shared = e;
    }
    require(over_shared && under_shared && *over_shared != *under_shared,
            "r2- bigon strands are not over/under");
    // the crossing the over strand meets first, and the interleaving
    auto leaves_c1 = [&](EdgeId e) {
        return x1.slots[2] == e || x1.slots[over_out_slot(x1)] == e;
    };
    bool over_from_c1 = leaves_c1(*over_shared);
    bool under_from_c1 = leaves_c1(*under_shared);
    Sign near = over_from_c1 ? over_dir_sign(x1.over) : over_dir_sign(x2.over);
    Rebuild rb(d);
    rb.dissolve(m.c1);
    rb.dissolve(m.c2);
    rb.finalize(x1.block);
    MoveNote note;
    R2Plus re;
    re.mover = rb.final_of_original(*over_shared);
    re.over_of = rb.final_of_original(*under_shared);
    re.mover_over = true;
    re.near_sign = near;
    re.antiparallel = over_from_c1 != under_from_c1;
    note.r2_reinsert = re;
    out.note.moves.push_back(note);
}

void do_r3(Diagram& d, const R3& m, ApplyDetail& out) {
    require(d.has_crossing(m.c_pq) && d.has_crossing(m.c_pr) && d.has_crossing(m.c_qr),
            "r3 crossing missing");
    require(m.c_pq != m.c_pr && m.c_pq != m.c_qr && m.c_pr != m.c_qr, "r3 needs three crossings");
    auto shared_edge = [&](CrossingId a, CrossingId b) -> EdgeId {
        const Crossing& xa = d.crossing(a);
        const Crossing& xb = d.crossing(b);
        std::vector<EdgeId> sh;
        for (EdgeId e : xa.slots)
            for (EdgeId f : xb.slots)
                if (e == f && std::find(sh.begin(), sh.end(), e) == sh.end()) sh.push_back(e);
        require(sh.size() == 1, "r3 crossing pair does not share a unique edge");
        return sh[0];
    };
    EdgeId e_p = shared_edge(m.c_pr, m.c_pq);
    EdgeId e_q = shared_edge(m.c_pq, m.c_qr);
    EdgeId e_r = shared_edge(m.c_pr, m.c_qr);
    require(e_p != e_q && e_p != e_r && e_q != e_r, "r3 triangle edges not distinct");

    // strand passage helper: (in-edge, out-edge, over?) of the strand through `via`
    struct Pass { EdgeId in, out; bool over; };
    auto passage = [&](CrossingId c, EdgeId via) -> Pass {
        const Crossing& x = d.crossing(c);
        int oi = over_in_slot(x), oo = over_out_slot(x);
        if (x.slots[0] == via || x.slots[2] == via) return {x.slots[0], x.slots[2], false};
        require(x.slots[oi] == via || x.slots[oo] == via, "r3 strand mismatch");
        return {x.slots[oi], x.slots[oo], true};
    };
    Pass r_at_pr = passage(m.c_pr, e_r);
    Pass r_at_qr = passage(m.c_qr, e_r);
    require(r_at_pr.over == r_at_qr.over, "r3 moving strand must be over or under both crossings");
    Pass p_at_pr = passage(m.c_pr, e_p);
    Pass p_at_pq = passage(m.c_pq, e_p);
    Pass q_at_pq = passage(m.c_pq, e_q);
    Pass q_at_qr = passage(m.c_qr, e_q);
    require(p_at_pr.over != r_at_pr.over && q_at_qr.over != r_at_qr.over &&
                p_at_pq.over != q_at_pq.over,
            "r3 strand roles inconsistent");

    // orientation along p: either p_in -> c_pr -> e_p -> c_pq -> p_out (e_p out of c_pr)
    // or the reverse; handle both by checking where e_p leaves
    auto leaves = [&](CrossingId c, EdgeId e) {
        const Crossing& x = d.crossing(c);
        return x.slots[2] == e || x.slots[over_out_slot(x)] == e;
    };
    Sign s_pq = crossing_sign(d, m.c_pq), s_pr = crossing_sign(d, m.c_pr),
         s_qr = crossing_sign(d, m.c_qr);
    BlockId blk = d.crossing(m.c_pq).block;

    // rebuild the three crossings with p's and q's passage order swapped
    auto rebuild = [&](CrossingId c, Pass a, Pass b, bool a_over, Sign s) {
        // a passes a.in->a.out, b likewise; a_over tells which strand is over
        Crossing nx = a_over ? make_crossing(b.in, b.out, a.in, a.out, s, blk)
                             : make_crossing(a.in, a.out, b.in, b.out, s, blk);
        d.put_crossing(c, nx);
    };

    bool p_forward = leaves(m.c_pr, e_p);  // p meets c_pr first
    bool q_forward = leaves(m.c_pq, e_q);  // q meets c_pq first
    // new passages
    Pass p_new_pq, p_new_pr, q_new_pq, q_new_qr;
    if (p_forward) {
        // before: p_in ->[c_pr]-> e_p ->[c_pq]-> p_out; after: swap order
        p_new_pq = {p_at_pr.in, e_p, p_at_pq.over};
        p_new_pr = {e_p, p_at_pq.out, p_at_pr.over};
    } else {
        // before: p_in ->[c_pq]-> e_p ->[c_pr]-> p_out
        p_new_pr = {p_at_pq.in, e_p, p_at_pr.over};
        p_new_pq = {e_p, p_at_pr.out, p_at_pq.over};
    }
    if (q_forward) {
        q_new_qr = {q_at_pq.in, e_q, q_at_qr.over};
        q_new_pq = {e_q, q_at_qr.out, q_at_pq.over};
    } else {
        q_new_pq = {q_at_qr.in, e_q, q_at_pq.over};
        q_new_qr = {e_q, q_at_pq.out, q_at_qr.over};
    }
    rebuild(m.c_pq, p_new_pq, q_new_pq, p_at_pq.over, s_pq);
    rebuild(m.c_pr, p_new_pr, r_at_pr, r_at_pr.over ? false : true, s_pr);
    rebuild(m.c_qr, q_new_qr, r_at_qr, r_at_qr.over ? false : true, s_qr);
    MoveNote note;
    out.note.moves.push_back(note);
}

void do_retag(Diagram& d, const Retag& m, ApplyDetail& out) {
    require(d.has_block(m.block), "retag: no block b" + std::to_string(m.block.v));
    MoveNote note;
    note.retag_old = d.is_scratch(m.block);
    d.set_scratch(m.block, m.scratch);
    out.note.moves.push_back(note);
}

void do_move_to_block(Diagram& d, const MoveToBlock& m, ApplyDetail& out) {
    require(!m.members.empty(), "moveto lists no members");
    for (EdgeId e : m.members)
        require(d.has_edge(e), "moveto member e" + std::to_string(e.v) + " missing");
    BlockId b = resolve_block_target(d, m.block, m.scratch);
    MoveNote note;
    auto comps = trace_components(d);
    std::set<std::uint32_t> moved;
    for (EdgeId e : m.members) {
        ComponentId ci = component_of_edge(comps, e);
        if (!moved.insert(ci.v).second) continue;
        EdgeId rep = comps[ci.v].edges.front();
        BlockId old = d.block_of_edge(rep);
        note.moved_from.push_back({rep, old, d.is_scratch(old)});
        move_component(d, rep, b);
    }
    d.gc_blocks();
    out.note.moves.push_back(note);
}

void do_relabel(Diagram& d, const Relabel& m, ApplyDetail& out) {
    for (EdgeId e : m.edges) require(d.has_edge(e), "relabel: edge missing");
    for (CrossingId c : m.crossings) require(d.has_crossing(c), "relabel: crossing missing");
    std::map<EdgeId, EdgeId> emap;
    for (EdgeId e : m.edges) emap[e] = d.new_edge();
    for (auto& [old_id, x] : std::map<CrossingId, Crossing>(d.crossings())) {
        Crossing nx = x;
        bool dirty = false;
        for (auto& s : nx.slots) {
            auto it = emap.find(s);
            if (it != emap.end()) { s = it->second; dirty = true; }
        }
        if (dirty) d.put_crossing(old_id, nx);
    }
    for (auto& [lid, l] : std::map<LoopId, FreeLoop>(d.loops())) {
        auto it = emap.find(l.edge);
        if (it != emap.end()) {
            FreeLoop nl = l;
            nl.edge = it->second;
            d.put_loop(lid, nl);
        }
    }
    for (CrossingId c : m.crossings) {
        Crossing x = d.crossing(c);
        d.erase_crossing(c);
        d.put_crossing(d.new_crossing_id(), x);
    }
    MoveNote note;
    out.note.moves.push_back(note);
    // links for renamed edges so realize carries components across
    for (auto& [a, b] : emap) out.links.push_back({a, b});
}

void do_isotopy(Diagram& d, const Isotopy& t, ApplyDetail& out) {
    for (const Move& mv : t.moves) {
        std::visit(
            [&](const auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, R1Plus>) do_r1_plus(d, m, out);
                else if constexpr (std::is_same_v<T, R1Minus>) do_r1_minus(d, m, out);
                else if constexpr (std::is_same_v<T, R2Plus>) do_r2_plus(d, m, out);
                else if constexpr (std::is_same_v<T, R2Minus>) do_r2_minus(d, m, out);
                else if constexpr (std::is_same_v<T, R3>) do_r3(d, m, out);
                else if constexpr (std::is_same_v<T, Retag>) do_retag(d, m, out);
                else if constexpr (std::is_same_v<T, MoveToBlock>) do_move_to_block(d, m, out);
                else if constexpr (std::is_same_v<T, Relabel>) do_relabel(d, m, out);
            },
            mv);
    }
}

}  // namespace

// ---------------------------------------------------------------------------

ApplyDetail apply_detail(const Diagram& d, const Transformation& t) {
    ApplyDetail out;
    out.result = d;
    Diagram& nd = out.result;
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Birth>) do_birth(nd, k, out);
            else if constexpr (std::is_same_v<T, Death>) do_death(nd, k, out);
            else if constexpr (std::is_same_v<T, Surgery1>) do_surgery(nd, k, out);
            else if constexpr (std::is_same_v<T, Isotopy>) do_isotopy(nd, k, out);
            else if constexpr (std::is_same_v<T, CrossingChange>) do_crossing_change(nd, k, out);
            else if constexpr (std::is_same_v<T, HopfSplit>) do_hopf_split(nd, k, out);
            else if constexpr (std::is_same_v<T, HopfMerge>) do_hopf_merge(nd, k, out);
        },
        t);
    nd.validate();
    return out;
}

std::pair<Diagram, EventRecord> apply(const Diagram& d, const Transformation& t) {
    ApplyDetail detail = apply_detail(d, t);
    return {std::move(detail.result), std::move(detail.events)};
}

Violations validate(const Diagram& d, const Transformation& t) {
    try {
        apply_detail(d, t);
    } catch (const PreconditionViolated& e) {
        return e.report;
    } catch (const Error& e) {
        Violations v;
        v.items.push_back(e.what());
        return v;
    }
    return {};
}

// ---------------------------------------------------------------------------

Inverse invert(const Transformation& t, const StepNote& note) {
    Inverse out;
    if (const auto* b = std::get_if<Birth>(&t)) {
        (void)b;
        Death death;
        death.loops = note.born_loops;
        out.step = death;
        return out;
    }
    if (const auto* dd = std::get_if<Death>(&t)) {
        (void)dd;
        Birth birth;
        // group killed loops by their former block, in encounter order
        std::vector<std::pair<BlockId, std::uint32_t>> groups;
        for (const auto& [l, b] : note.killed_loops) {
            (void)l;
            if (!groups.empty() && groups.back().first == b)
                groups.back().second++;
            else
                groups.push_back({b, 1});
        }
        for (auto& [b, n] : groups) {
            Birth::Group g;
            g.count = n;
            bool emptied = false;
            for (const auto& [eb, was_scratch] : note.emptied_blocks)
                if (eb == b) {
                    emptied = true;
                    g.scratch = was_scratch;
                }
            if (!emptied) g.block = b;
            birth.groups.push_back(g);
        }
        out.step = birth;
        return out;
    }
    if (const auto* s = std::get_if<Surgery1>(&t)) {
        Surgery1 dual;
        Isotopy cleanup;
        for (std::size_t i = s->bands.size(); i-- > 0;) {
            const BandNote& bn = note.bands.at(i);
            if (!bn.pure && !bn.twist_only)
                throw UnsupportedReversal("bands with transversal core events are not reversible");
            Band b;
            b.attach1 = bn.dual1;
            b.attach2 = bn.dual2;
            // the dual restores content to the source block; undoing a fusion
            // additionally re-splits into attach2's old block
            b.block = bn.block1_before;
            b.block_scratch = bn.block1_scratch;
            if (bn.merged) {
                b.split_block = bn.block2_before;
                b.split_scratch = bn.block2_scratch;
            }
            dual.bands.push_back(b);
            for (std::size_t j = bn.new_crossings.size(); j-- > 0;) {
                R1Minus m;
                m.crossing = bn.new_crossings[j];
                cleanup.moves.push_back(m);
            }
        }
        out.step = dual;
        if (!cleanup.moves.empty()) out.cleanup = cleanup;
        return out;
    }
    if (const auto* iso = std::get_if<Isotopy>(&t)) {
        Isotopy inv;
        for (std::size_t i = iso->moves.size(); i-- > 0;) {
            const Move& m = iso->moves[i];
            const MoveNote& mn = note.moves.at(i);
            if (std::holds_alternative<R1Plus>(m)) {
                R1Minus r;
                r.crossing = *mn.r1_created;
                inv.moves.push_back(r);
            } else if (std::holds_alternative<R1Minus>(m)) {
                inv.moves.push_back(*mn.r1_reinsert);
            } else if (std::holds_alternative<R2Plus>(m)) {
                R2Minus r;
                r.c1 = mn.r2_created->first;
                r.c2 = mn.r2_created->second;
                inv.moves.push_back(r);
            } else if (std::holds_alternative<R2Minus>(m)) {
                inv.moves.push_back(*mn.r2_reinsert);
            } else if (std::holds_alternative<R3>(m)) {
                inv.moves.push_back(std::get<R3>(m));
            } else if (const auto* rt = std::get_if<Retag>(&m)) {
                Retag r;
                r.block = rt->block;
                r.scratch = *mn.retag_old;
                inv.moves.push_back(r);
            } else if (std::holds_alternative<MoveToBlock>(m)) {
                for (std::size_t j = mn.moved_from.size(); j-- > 0;) {
                    MoveToBlock r;
                    r.members = {mn.moved_from[j].rep};
                    r.block = mn.moved_from[j].block;
                    r.scratch = mn.moved_from[j].scratch;
                    inv.moves.push_back(r);
                }
            } else if (const auto* rl = std::get_if<Relabel>(&m)) {
                inv.moves.push_back(*rl);
            }
        }
        out.step = inv;
        return out;
    }
    if (const auto* c = std::get_if<CrossingChange>(&t)) {
        out.step = *c;
        return out;
    }
    if (const auto* hs = std::get_if<HopfSplit>(&t)) {
        HopfMerge hm;
        for (std::size_t i = 0; i < hs->blocks.size(); ++i) {
            bool alt = i < note.hopf.size() && note.hopf[i].alternating;
            hm.blocks.push_back({hs->blocks[i].first, hs->blocks[i].second, alt});
        }
        out.step = hm;
        return out;
    }
    if (const auto* hm = std::get_if<HopfMerge>(&t)) {
        HopfSplit hs;
        for (const auto& spec : hm->blocks) hs.blocks.push_back({spec.block, spec.sign});
        out.step = hs;
        return out;
    }
    throw Error("internal: unknown transformation kind");
}

Transformation invert_simple(const Transformation& t) {
    if (std::holds_alternative<CrossingChange>(t) || std::holds_alternative<HopfSplit>(t) ||
        std::holds_alternative<HopfMerge>(t))
        return invert(t, StepNote{}).step;
    throw UnsupportedReversal("transformation kind needs replay annotations to invert");
}

const char* kind_name(const Transformation& t) {
    if (std::holds_alternative<Birth>(t)) return "birth";
    if (std::holds_alternative<Death>(t)) return "death";
    if (std::holds_alternative<Surgery1>(t)) return "bands";
    if (std::holds_alternative<Isotopy>(t)) return "isotopy";
    if (std::holds_alternative<CrossingChange>(t)) return "xchange";
    if (std::holds_alternative<HopfSplit>(t)) return "hopfsplit";
    return "hopfmerge";
}

}  // namespace mopic
