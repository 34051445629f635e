#ifndef MOPIC_DIAGRAM_HPP
#define MOPIC_DIAGRAM_HPP

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <mopic/errors.hpp>
#include <mopic/ids.hpp>

namespace mopic {

// Slot convention: slots listed counterclockwise starting at the incoming
// under-strand, so the under-strand runs slot 0 -> slot 2 and the over-strand
// occupies slots 1/3 in the direction given by `over`.
struct Crossing {
    std::array<EdgeId, 4> slots{};
    OverDir over = OverDir::d_to_b;
    BlockId block{};
};

// A crossing-free circle; one whole component. Carries its own EdgeId so
// bands can attach to it uniformly.
struct FreeLoop {
    EdgeId edge{};
    BlockId block{};
};

// Content-derived block tag. `scratch` is a stored declaration (the W region
// of the rewrite lemmas) queried separately via Diagram::is_scratch.
enum class BlockTag : std::uint8_t { generic, trivial, hopf, scratch_empty };

struct BlockInfo {
    bool scratch = false;
};

// Where a strand passes through a crossing.
struct Passage {
    CrossingId crossing{};
    int enter_slot = 0;  // slot where the strand enters
    int exit_slot = 0;   // slot where it leaves
    bool is_over() const { return enter_slot == 1 || enter_slot == 3; }
};

// One link component: either a free loop or a cyclic edge walk.
struct Component {
    std::optional<LoopId> loop;            // set iff the component is a FreeLoop
    std::vector<EdgeId> edges;             // walk order; loop components list the loop edge
    std::vector<Passage> passages;         // passage i is entered by edges[i]
};

class Diagram {
public:
    Diagram() = default;

    const std::map<CrossingId, Crossing>& crossings() const { return crossings_; }
    const std::map<LoopId, FreeLoop>& loops() const { return loops_; }
    const std::map<BlockId, BlockInfo>& blocks() const { return blocks_; }

    bool empty() const { return crossings_.empty() && loops_.empty(); }

    bool has_edge(EdgeId e) const;
    bool has_crossing(CrossingId c) const { return crossings_.count(c) != 0; }
    bool has_loop(LoopId l) const { return loops_.count(l) != 0; }
    bool has_block(BlockId b) const { return blocks_.count(b) != 0; }
    bool is_scratch(BlockId b) const;

    const Crossing& crossing(CrossingId c) const;
    const FreeLoop& loop(LoopId l) const;

    // Identifier allocation; counters are monotone and never reused.
    EdgeId new_edge() { return EdgeId{next_edge_++}; }
    CrossingId new_crossing_id() { return CrossingId{next_crossing_++}; }
    LoopId new_loop_id() { return LoopId{next_loop_++}; }
    BlockId new_block(bool scratch = false);

    void put_crossing(CrossingId c, const Crossing& x) { crossings_[c] = x; }
    void put_loop(LoopId l, const FreeLoop& f) { loops_[l] = f; }
    void erase_crossing(CrossingId c) { crossings_.erase(c); }
    void erase_loop(LoopId l) { loops_.erase(l); }
    void set_scratch(BlockId b, bool scratch);
    void ensure_block(BlockId b, bool scratch = false);

    // Drops blocks with no content. Called by apply() after each step.
    void gc_blocks();

    // Peek at counters (serialization and deterministic naming).
    std::uint32_t next_edge_counter() const { return next_edge_; }
    std::uint32_t next_crossing_counter() const { return next_crossing_; }
    std::uint32_t next_loop_counter() const { return next_loop_; }
    std::uint32_t next_block_counter() const { return next_block_; }
    void bump_counters(std::uint32_t e, std::uint32_t c, std::uint32_t l, std::uint32_t b);

    // Block of the component containing edge e (loop edges included).
    BlockId block_of_edge(EdgeId e) const;
    std::vector<EdgeId> block_content_edges(BlockId b) const;
    std::vector<CrossingId> block_crossings(BlockId b) const;
    std::vector<LoopId> block_loops(BlockId b) const;

    // Content-derived tag; scratch bit not consulted.
    BlockTag block_tag(BlockId b) const;

    // Throws MalformedDiagram if the closed-4-valent-graph condition fails
    // or a block is not closed under edge sharing.
    void validate() const;

private:
    std::map<CrossingId, Crossing> crossings_;
    std::map<LoopId, FreeLoop> loops_;
    std::map<BlockId, BlockInfo> blocks_;
    std::uint32_t next_edge_ = 0;
    std::uint32_t next_crossing_ = 0;
    std::uint32_t next_loop_ = 0;
    std::uint32_t next_block_ = 0;
};

// --- incidence -------------------------------------------------------------

// For each edge: where it leaves a crossing and where it enters one.
// Loop edges appear in neither map.
struct Incidence {
    struct End { CrossingId crossing; int slot; };
    std::map<EdgeId, End> out;  // edge leaves this crossing slot
    std::map<EdgeId, End> in;   // edge enters this crossing slot
};

// entry slots of a crossing are {0, over-in}; exits are {2, over-out}
int over_in_slot(const Crossing& x);
int over_out_slot(const Crossing& x);
bool slot_is_entry(const Crossing& x, int slot);
int continuation_slot(int enter_slot);  // 0->2, 1->3, 3->1

Incidence build_incidence(const Diagram& d);  // throws MalformedDiagram

// --- operations ------------------------------------------------------------

// Partition of edges and loops into components. Deterministic order:
// components sorted by their smallest edge id (loops by loop edge id).
std::vector<Component> trace_components(const Diagram& d);

// Index: component of a given edge (loop edges included).
ComponentId component_of_edge(const std::vector<Component>& comps, EdgeId e);

Sign crossing_sign(const Diagram& d, CrossingId c);

int linking_number(const Diagram& d, ComponentId x, ComponentId y);

// Syntactic template match: stacked or alternating presentation of the
// sign-s Hopf link, and nothing else in the block.
std::optional<Sign> is_hopf_block(const Diagram& d, BlockId b);

// Disjoint union; identifiers of d2 are re-mapped to fresh ones.
Diagram split_union(const Diagram& d1, const Diagram& d2);

// Witness relabeling for isomorphic().
struct Relabeling {
    std::map<EdgeId, EdgeId> edges;
    std::map<CrossingId, CrossingId> crossings;
    std::map<LoopId, LoopId> loops;
    std::map<BlockId, BlockId> blocks;
};

bool isomorphic(const Diagram& d1, const Diagram& d2, Relabeling* witness = nullptr);

// Enumerate isomorphisms until pred returns true; false if none accepted.
bool find_isomorphism(const Diagram& d1, const Diagram& d2,
                      const std::function<bool(const Relabeling&)>& pred);

// --- construction helpers ---------------------------------------------------

// Crossing from strand data: under runs under_in->under_out, over over_in->over_out.
Crossing make_crossing(EdgeId under_in, EdgeId under_out, EdgeId over_in, EdgeId over_out,
                       Sign sign, BlockId block);

// Canonical sign-s Hopf template in a fresh block: crossings
// (e1,e2,e3,e4), (e3,e4,e1,e2); one component over at both crossings.
BlockId add_hopf_template(Diagram& d, Sign s);

// Alternating presentation: (g1,g2,g3,g4), (g2,g1,g4,g3); each component
// over at exactly one crossing.
BlockId add_hopf_alternating(Diagram& d, Sign s);

// The clasp-cancelled pair: canonical template with the second crossing
// toggled; one + and one - crossing, linking number 0.
BlockId add_clasp_template(Diagram& d, Sign s);

// One crossing-free loop in a fresh (or given) block; returns the loop id.
LoopId add_free_loop(Diagram& d, std::optional<BlockId> block = std::nullopt);

// Census of hopf-tagged content: (positive blocks, negative blocks).
std::pair<int, int> hopf_census(const Diagram& d);

}  // namespace mopic

#endif  // MOPIC_DIAGRAM_HPP
