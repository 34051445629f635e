#include <mopic/diagram.hpp>

#include <algorithm>
#include <set>

namespace mopic {

bool Diagram::has_edge(EdgeId e) const {
    for (const auto& [id, x] : crossings_)
        for (EdgeId s : x.slots)
            if (s == e) return true;
    for (const auto& [id, l] : loops_)
        if (l.edge == e) return true;
    return false;
}

bool Diagram::is_scratch(BlockId b) const {
    auto it = blocks_.find(b);
    return it != blocks_.end() && it->second.scratch;
}

const Crossing& Diagram::crossing(CrossingId c) const {
    auto it = crossings_.find(c);
    if (it == crossings_.end()) throw UnknownCrossing("no crossing x" + std::to_string(c.v));
    return it->second;
}

const FreeLoop& Diagram::loop(LoopId l) const {
    auto it = loops_.find(l);
    if (it == loops_.end()) throw MalformedDiagram("no loop l" + std::to_string(l.v));
    return it->second;
}

BlockId Diagram::new_block(bool scratch) {
    BlockId b{next_block_++};
    blocks_[b] = BlockInfo{scratch};
    return b;
}

void Diagram::set_scratch(BlockId b, bool scratch) {
    auto it = blocks_.find(b);
    if (it == blocks_.end()) throw UnknownBlock("no block b" + std::to_string(b.v));
    it->second.scratch = scratch;
}

void Diagram::ensure_block(BlockId b, bool scratch) {
    auto it = blocks_.find(b);
    if (it == blocks_.end())
        blocks_[b] = BlockInfo{scratch};
    if (b.v >= next_block_) next_block_ = b.v + 1;
}

void Diagram::gc_blocks() {
    std::set<BlockId> used;
    for (const auto& [id, x] : crossings_) used.insert(x.block);
    for (const auto& [id, l] : loops_) used.insert(l.block);
    for (auto it = blocks_.begin(); it != blocks_.end();) {
        if (!used.count(it->first))
            it = blocks_.erase(it);
        else
            ++it;
    }
}

void Diagram::bump_counters(std::uint32_t e, std::uint32_t c, std::uint32_t l, std::uint32_t b) {
    next_edge_ = std::max(next_edge_, e);
    next_crossing_ = std::max(next_crossing_, c);
    next_loop_ = std::max(next_loop_, l);
    next_block_ = std::max(next_block_, b);
}

BlockId Diagram::block_of_edge(EdgeId e) const {
    for (const auto& [id, x] : crossings_)
        for (EdgeId s : x.slots)
            if (s == e) return x.block;
    for (const auto& [id, l] : loops_)
        if (l.edge == e) return l.block;
    throw MalformedDiagram("no edge e" + std::to_string(e.v));
}

std::vector<EdgeId> Diagram::block_content_edges(BlockId b) const {
    std::set<EdgeId> out;
    for (const auto& [id, x] : crossings_)
        if (x.block == b)
            for (EdgeId s : x.slots) out.insert(s);
    for (const auto& [id, l] : loops_)
        if (l.block == b) out.insert(l.edge);
    return {out.begin(), out.end()};
}

std::vector<CrossingId> Diagram::block_crossings(BlockId b) const {
    std::vector<CrossingId> out;
    for (const auto& [id, x] : crossings_)
        if (x.block == b) out.push_back(id);
    return out;
}

std::vector<LoopId> Diagram::block_loops(BlockId b) const {
    std::vector<LoopId> out;
    for (const auto& [id, l] : loops_)
        if (l.block == b) out.push_back(id);
    return out;
}

BlockTag Diagram::block_tag(BlockId b) const {
    if (!blocks_.count(b)) throw UnknownBlock("no block b" + std::to_string(b.v));
    auto xs = block_crossings(b);
    auto ls = block_loops(b);
    if (xs.empty() && ls.empty()) return BlockTag::scratch_empty;
    if (xs.empty()) return BlockTag::trivial;
    if (is_hopf_block(*this, b)) return BlockTag::hopf;
    return BlockTag::generic;
}

void Diagram::validate() const {
    build_incidence(*this);
    // blocks closed under edge sharing: both endpoints of an edge in one block
    std::map<EdgeId, BlockId> owner;
    for (const auto& [id, x] : crossings_) {
        if (!blocks_.count(x.block))
            throw MalformedDiagram("crossing block b" + std::to_string(x.block.v) + " missing");
        for (EdgeId s : x.slots) {
            auto [it, fresh] = owner.emplace(s, x.block);
            if (!fresh && it->second != x.block)
                throw MalformedDiagram("edge e" + std::to_string(s.v) + " spans two blocks");
        }
    }
    for (const auto& [id, l] : loops_) {
        if (!blocks_.count(l.block))
            throw MalformedDiagram("loop block b" + std::to_string(l.block.v) + " missing");
        if (owner.count(l.edge))
            throw MalformedDiagram("loop edge e" + std::to_string(l.edge.v) + " also in crossings");
    }
}

// --- incidence -------------------------------------------------------------

int over_in_slot(const Crossing& x) { return x.over == OverDir::b_to_d ? 1 : 3; }
int over_out_slot(const Crossing& x) { return x.over == OverDir::b_to_d ? 3 : 1; }

bool slot_is_entry(const Crossing& x, int slot) {
    return slot == 0 || slot == over_in_slot(x);
}

int continuation_slot(int enter_slot) {
    switch (enter_slot) {
        case 0: return 2;
        case 1: return 3;
        case 3: return 1;
        default: throw MalformedDiagram("cannot continue from an exit slot");
    }
}

Incidence build_incidence(const Diagram& d) {
    Incidence inc;
    std::set<EdgeId> loop_edges;
    for (const auto& [id, l] : d.loops()) {
        if (!loop_edges.insert(l.edge).second)
            throw MalformedDiagram("duplicate loop edge e" + std::to_string(l.edge.v));
    }
    for (const auto& [id, x] : d.crossings()) {
        for (int s = 0; s < 4; ++s) {
            EdgeId e = x.slots[s];
            if (loop_edges.count(e))
                throw MalformedDiagram("loop edge e" + std::to_string(e.v) + " used in a crossing");
            auto& side = slot_is_entry(x, s) ? inc.in : inc.out;
            auto [it, fresh] = side.emplace(e, Incidence::End{id, s});
            if (!fresh)
                throw MalformedDiagram("edge e" + std::to_string(e.v) + " occurs twice as " +
                                       (slot_is_entry(x, s) ? "incoming" : "outgoing"));
        }
    }
    for (const auto& [e, end] : inc.in)
        if (!inc.out.count(e))
            throw MalformedDiagram("edge e" + std::to_string(e.v) + " has no outgoing slot");
    for (const auto& [e, end] : inc.out)
        if (!inc.in.count(e))
            throw MalformedDiagram("edge e" + std::to_string(e.v) + " has no incoming slot");
    return inc;
}

// --- tracing ---------------------------------------------------------------

std::vector<Component> trace_components(const Diagram& d) {
    Incidence inc = build_incidence(d);
    std::vector<Component> comps;
    std::set<EdgeId> seen;

    std::vector<EdgeId> all_edges;
    for (const auto& [e, end] : inc.out) all_edges.push_back(e);

    for (EdgeId start : all_edges) {
        if (seen.count(start)) continue;
        Component comp;
        EdgeId e = start;
        // walk: edge enters a crossing, continue on the strand
        while (true) {
            comp.edges.push_back(e);
            seen.insert(e);
            const auto& end = inc.in.at(e);
            const Crossing& x = d.crossing(end.crossing);
            int exit = continuation_slot(end.slot);
            comp.passages.push_back(Passage{end.crossing, end.slot, exit});
            e = x.slots[exit];
            if (e == start) break;
            if (seen.count(e))
                throw MalformedDiagram("strand walk re-entered edge e" + std::to_string(e.v));
        }
        comps.push_back(std::move(comp));
    }
    for (const auto& [id, l] : d.loops()) {
        Component comp;
        comp.loop = id;
        comp.edges.push_back(l.edge);
        comps.push_back(std::move(comp));
    }
    std::sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
        EdgeId ma = *std::min_element(a.edges.begin(), a.edges.end());
        EdgeId mb = *std::min_element(b.edges.begin(), b.edges.end());
        return ma < mb;
    });
    return comps;
}

ComponentId component_of_edge(const std::vector<Component>& comps, EdgeId e) {
    for (std::size_t i = 0; i < comps.size(); ++i)
        for (EdgeId f : comps[i].edges)
            if (f == e) return ComponentId{static_cast<std::uint32_t>(i)};
    throw MalformedDiagram("edge e" + std::to_string(e.v) + " not in any component");
}

Sign crossing_sign(const Diagram& d, CrossingId c) {
    return over_dir_sign(d.crossing(c).over);
}

int linking_number(const Diagram& d, ComponentId x, ComponentId y) {
    if (x == y) throw SameComponent("linking number needs two distinct components");
    auto comps = trace_components(d);
    if (x.v >= comps.size() || y.v >= comps.size())
        throw MalformedDiagram("component index out of range");
    std::set<EdgeId> ex(comps[x.v].edges.begin(), comps[x.v].edges.end());
    std::set<EdgeId> ey(comps[y.v].edges.begin(), comps[y.v].edges.end());
    int total = 0;
    for (const auto& [id, xr] : d.crossings()) {
        EdgeId under = xr.slots[0];
        EdgeId over = xr.slots[over_in_slot(xr)];
        bool mixed = (ex.count(under) && ey.count(over)) || (ey.count(under) && ex.count(over));
        if (mixed) total += sign_value(over_dir_sign(xr.over));
    }
    return total / 2;
}

// --- isomorphism ------------------------------------------------------------

namespace {

struct IsoSearch {
    const Diagram& a;
    const Diagram& b;
    std::vector<CrossingId> axs, bxs;
    std::vector<LoopId> als, bls;
    std::map<CrossingId, CrossingId> cmap;
    std::map<EdgeId, EdgeId> emap;
    std::map<EdgeId, EdgeId> emap_rev;
    std::map<BlockId, BlockId> bmap;
    std::map<BlockId, BlockId> bmap_rev;
    const std::function<bool(const Relabeling&)>* pred = nullptr;

    bool bind_edge(EdgeId ea, EdgeId eb) {
        auto it = emap.find(ea);
        if (it != emap.end()) return it->second == eb;
        auto rit = emap_rev.find(eb);
        if (rit != emap_rev.end()) return false;
        emap[ea] = eb;
        emap_rev[eb] = ea;
        return true;
    }

    bool bind_block(BlockId ba, BlockId bb) {
        if (a.is_scratch(ba) != b.is_scratch(bb)) return false;
        auto it = bmap.find(ba);
        if (it != bmap.end()) return it->second == bb;
        auto rit = bmap_rev.find(bb);
        if (rit != bmap_rev.end()) return false;
        bmap[ba] = bb;
        bmap_rev[bb] = ba;
        return true;
    }

    bool try_loops(const Relabeling& partial) {
        // match loops: block-consistent bijection; loops are interchangeable
        // within a block pair, so count matching suffices per block pair.
        std::map<BlockId, std::vector<LoopId>> la, lb;
        for (const auto& [id, l] : a.loops()) la[l.block].push_back(id);
        for (const auto& [id, l] : b.loops()) lb[l.block].push_back(id);
        // crossing-bound block pairs must agree on loop counts
        for (auto& [ba, bb] : bmap) {
            std::size_t ca = la.count(ba) ? la[ba].size() : 0;
            std::size_t cb = lb.count(bb) ? lb[bb].size() : 0;
            if (ca != cb) return false;
        }
        // content-free blocks must pair up by scratch bit
        int empty_a_plain = 0, empty_a_scratch = 0, empty_b_plain = 0, empty_b_scratch = 0;
        for (const auto& [id, info] : a.blocks())
            if (!la.count(id) && !bmap.count(id)) (info.scratch ? empty_a_scratch : empty_a_plain)++;
        for (const auto& [id, info] : b.blocks())
            if (!lb.count(id) && !bmap_rev.count(id)) (info.scratch ? empty_b_scratch : empty_b_plain)++;
        if (empty_a_plain != empty_b_plain || empty_a_scratch != empty_b_scratch) return false;
        std::vector<std::pair<BlockId, BlockId>> pairs;
        std::vector<BlockId> unmatched_a;
        std::set<BlockId> taken_b;
        for (auto& [ba, va] : la) {
            auto it = bmap.find(ba);
            if (it != bmap.end()) {
                pairs.push_back({ba, it->second});
                taken_b.insert(it->second);
            } else {
                unmatched_a.push_back(ba);
            }
        }
        // remaining loop-only blocks: match by (scratch bit, count)
        std::vector<BlockId> free_b;
        for (auto& [bb, vb] : lb)
            if (!taken_b.count(bb) && !bmap_rev.count(bb)) free_b.push_back(bb);
        if (unmatched_a.size() != free_b.size()) return false;
        // backtrack over matchings of loop-only blocks (few of them)
        std::function<bool(std::size_t, std::set<BlockId>&)> go =
            [&](std::size_t i, std::set<BlockId>& used) -> bool {
            if (i == unmatched_a.size()) {
                Relabeling out = partial;
                for (auto& [ba, bb] : pairs) {
                    out.blocks[ba] = bb;
                    for (std::size_t k = 0; k < la[ba].size(); ++k) {
                        out.loops[la[ba][k]] = lb[bb][k];
                        out.edges[a.loop(la[ba][k]).edge] = b.loop(lb[bb][k]).edge;
                    }
                }
                for (auto& [ba, bb] : bmap) out.blocks[ba] = bb;
                if (!pred) return true;
                return (*pred)(out);
            }
            BlockId ba = unmatched_a[i];
            for (BlockId bb : free_b) {
                if (used.count(bb)) continue;
                if (a.is_scratch(ba) != b.is_scratch(bb)) continue;
                if (la[ba].size() != lb[bb].size()) continue;
                used.insert(bb);
                pairs.push_back({ba, bb});
                if (go(i + 1, used)) return true;
                pairs.pop_back();
                used.erase(bb);
            }
            return false;
        };
        std::set<BlockId> used;
        return go(0, used);
    }

    bool extend(std::size_t i) {
        if (i == axs.size()) {
            Relabeling partial;
            partial.crossings = cmap;
            partial.edges = emap;
            return try_loops(partial);
        }
        CrossingId ca = axs[i];
        const Crossing& xa = a.crossing(ca);
        for (CrossingId cb : bxs) {
            bool taken = false;
            for (auto& [k, v] : cmap)
                if (v == cb) { taken = true; break; }
            if (taken) continue;
            const Crossing& xb = b.crossing(cb);
            if (xa.over != xb.over) continue;
            auto saved_e = emap;
            auto saved_er = emap_rev;
            auto saved_b = bmap;
            auto saved_br = bmap_rev;
            bool ok = bind_block(xa.block, xb.block);
            for (int s = 0; ok && s < 4; ++s) ok = bind_edge(xa.slots[s], xb.slots[s]);
            if (ok) {
                cmap[ca] = cb;
                if (extend(i + 1)) return true;
                cmap.erase(ca);
            }
            emap = std::move(saved_e);
            emap_rev = std::move(saved_er);
            bmap = std::move(saved_b);
            bmap_rev = std::move(saved_br);
        }
        return false;
    }
};

}  // namespace

bool find_isomorphism(const Diagram& d1, const Diagram& d2,
                      const std::function<bool(const Relabeling&)>& pred) {
    if (d1.crossings().size() != d2.crossings().size()) return false;
    if (d1.loops().size() != d2.loops().size()) return false;
    if (d1.blocks().size() != d2.blocks().size()) return false;
    IsoSearch s{d1, d2, {}, {}, {}, {}, {}, {}, {}, {}, {}, nullptr};
    for (const auto& [id, x] : d1.crossings()) s.axs.push_back(id);
    for (const auto& [id, x] : d2.crossings()) s.bxs.push_back(id);
    s.pred = &pred;
    return s.extend(0);
}

bool isomorphic(const Diagram& d1, const Diagram& d2, Relabeling* witness) {
    bool found = false;
    Relabeling w;
    find_isomorphism(d1, d2, [&](const Relabeling& r) {
        w = r;
        found = true;
        return true;
    });
    if (found && witness) *witness = w;
    return found;
}

// --- templates and helpers ---------------------------------------------------

Crossing make_crossing(EdgeId under_in, EdgeId under_out, EdgeId over_in, EdgeId over_out,
                       Sign sign, BlockId block) {
    Crossing x;
    x.block = block;
    if (sign == Sign::plus) {
        x.slots = {under_in, over_out, under_out, over_in};
        x.over = OverDir::d_to_b;
    } else {
        x.slots = {under_in, over_in, under_out, over_out};
        x.over = OverDir::b_to_d;
    }
    return x;
}

BlockId add_hopf_template(Diagram& d, Sign s) {
    BlockId b = d.new_block();
    EdgeId e1 = d.new_edge(), e2 = d.new_edge(), e3 = d.new_edge(), e4 = d.new_edge();
    Crossing x1, x2;
    x1.slots = {e1, e2, e3, e4};
    x2.slots = {e3, e4, e1, e2};
    x1.over = x2.over = sign_over_dir(s);
    x1.block = x2.block = b;
    d.put_crossing(d.new_crossing_id(), x1);
    d.put_crossing(d.new_crossing_id(), x2);
    return b;
}

BlockId add_hopf_alternating(Diagram& d, Sign s) {
    BlockId b = d.new_block();
    EdgeId a1 = d.new_edge(), a2 = d.new_edge(), b1 = d.new_edge(), b2 = d.new_edge();
    // component {a1,a2} over at the first crossing, under at the second
    d.put_crossing(d.new_crossing_id(), make_crossing(b1, b2, a1, a2, s, b));
    d.put_crossing(d.new_crossing_id(), make_crossing(a2, a1, b2, b1, s, b));
    return b;
}

BlockId add_clasp_template(Diagram& d, Sign s) {
    BlockId b = d.new_block();
    EdgeId e1 = d.new_edge(), e2 = d.new_edge(), e3 = d.new_edge(), e4 = d.new_edge();
    Crossing x1, x2;
    x1.slots = {e1, e2, e3, e4};
    x1.over = sign_over_dir(s);
    // second crossing toggled: rotate tuple, flip over direction
    if (sign_over_dir(s) == OverDir::d_to_b) {
        x2.slots = {e2, e3, e4, e1};  // rotation of (e3,e4,e1,e2) starting at old d-slot
        x2.over = OverDir::b_to_d;
    } else {
        x2.slots = {e4, e1, e2, e3};
        x2.over = OverDir::d_to_b;
    }
    x1.block = x2.block = b;
    d.put_crossing(d.new_crossing_id(), x1);
    d.put_crossing(d.new_crossing_id(), x2);
    return b;
}

LoopId add_free_loop(Diagram& d, std::optional<BlockId> block) {
    BlockId b = block ? *block : d.new_block();
    d.ensure_block(b);
    FreeLoop l;
    l.edge = d.new_edge();
    l.block = b;
    LoopId id = d.new_loop_id();
    d.put_loop(id, l);
    return id;
}

namespace {

// match content of block b against one concrete 2-crossing template shape
bool match_template(const Diagram& d, const std::vector<CrossingId>& xs, Sign s, bool alternating) {
    Diagram t;
    if (alternating)
        add_hopf_alternating(t, s);
    else
        add_hopf_template(t, s);
    // build a small diagram from the block content and compare
    Diagram frag;
    BlockId fb = frag.new_block();
    std::map<EdgeId, EdgeId> em;
    for (CrossingId c : xs) {
        Crossing x = d.crossing(c);
        for (auto& slot : x.slots) {
            auto [it, fresh] = em.emplace(slot, EdgeId{0});
            if (fresh) it->second = frag.new_edge();
            slot = it->second;
        }
        x.block = fb;
        frag.put_crossing(frag.new_crossing_id(), x);
    }
    return isomorphic(frag, t);
}

}  // namespace

std::optional<Sign> is_hopf_block(const Diagram& d, BlockId b) {
    if (!d.has_block(b)) throw UnknownBlock("no block b" + std::to_string(b.v));
    auto xs = d.block_crossings(b);
    auto ls = d.block_loops(b);
    if (!ls.empty() || xs.size() != 2) return std::nullopt;
    for (Sign s : {Sign::plus, Sign::minus}) {
        if (match_template(d, xs, s, false)) return s;
        if (match_template(d, xs, s, true)) return s;
    }
    return std::nullopt;
}

Diagram split_union(const Diagram& d1, const Diagram& d2) {
    Diagram out = d1;
    std::map<EdgeId, EdgeId> em;
    std::map<BlockId, BlockId> bm;
    auto map_edge = [&](EdgeId e) {
        auto [it, fresh] = em.emplace(e, EdgeId{0});
        if (fresh) it->second = out.new_edge();
        return it->second;
    };
    for (const auto& [id, info] : d2.blocks()) bm[id] = out.new_block(info.scratch);
    for (const auto& [id, x] : d2.crossings()) {
        Crossing nx = x;
        for (auto& s : nx.slots) s = map_edge(s);
        nx.block = bm.at(x.block);
        out.put_crossing(out.new_crossing_id(), nx);
    }
    for (const auto& [id, l] : d2.loops()) {
        FreeLoop nl;
        nl.edge = map_edge(l.edge);
        nl.block = bm.at(l.block);
        out.put_loop(out.new_loop_id(), nl);
    }
    return out;
}

std::pair<int, int> hopf_census(const Diagram& d) {
    int pos = 0, neg = 0;
    for (const auto& [id, info] : d.blocks()) {
        auto s = is_hopf_block(d, id);
        if (!s) continue;
        (*s == Sign::plus ? pos : neg)++;
    }
    return {pos, neg};
}

}  // namespace mopic
