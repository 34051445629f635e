#ifndef MOPIC_TRANSFORM_HPP
#define MOPIC_TRANSFORM_HPP

#include <optional>
#include <variant>
#include <vector>

#include <mopic/diagram.hpp>

namespace mopic {

// --- band cores --------------------------------------------------------------

enum class CoreKind : std::uint8_t { cross_over, cross_under, twist };

// cross_over/cross_under: the band passes over/under `target`; each such event
// inserts one crossing per band side (a cancelling +/- pair on the target).
// twist: one full twist of the band; inserts two crossings of `sign` between
// the band sides.
struct CoreEvent {
    CoreKind kind = CoreKind::twist;
    EdgeId target{};  // cross events only
    Sign sign = Sign::plus;  // twist only
};

struct Band {
    EdgeId attach1{};
    EdgeId attach2{};  // may equal attach1: two cut points on one edge
    std::vector<CoreEvent> core;
    BlockId block{};   // resulting merged block; missing ids resolve fresh
    bool block_scratch = false;  // scratch marker for a freshly made block
    // fission only: declares the split-off piece (the side-B component) to
    // live in this block; missing ids resolve to a fresh block
    std::optional<BlockId> split_block;
    bool split_scratch = false;
};

// --- transformation kinds ----------------------------------------------------

struct Birth {
    struct Group {
        std::uint32_t count = 1;
        std::optional<BlockId> block;  // absent: fresh block
        bool scratch = false;          // fresh blocks only: scratch marker
    };
    std::vector<Group> groups;
};

struct Death {
    std::vector<LoopId> loops;
};

struct Surgery1 {
    std::vector<Band> bands;  // applied in list order
};

struct R1Plus {
    EdgeId target{};
    Sign sign = Sign::plus;
    bool over_first = false;  // kink chirality: strand passes over then under
};
struct R1Minus { CrossingId crossing{}; };
struct R2Plus {
    EdgeId mover{};
    EdgeId over_of{};        // static strand
    bool mover_over = true;  // mover passes over the static strand
    Sign near_sign = Sign::plus;  // sign of the crossing nearest the mover's tail
    bool antiparallel = false;    // the static strand meets the far crossing first
};
struct R2Minus { CrossingId c1{}, c2{}; };
struct R3 { CrossingId c_pq{}, c_pr{}, c_qr{}; };
struct Retag { BlockId block{}; bool scratch = true; };
struct MoveToBlock {
    std::vector<EdgeId> members;  // whole components of these edges move
    BlockId block{};              // existing id or the next fresh id
    bool scratch = false;         // scratch bit when the block is created
};
struct Relabel { std::vector<EdgeId> edges; std::vector<CrossingId> crossings; };

using Move = std::variant<R1Plus, R1Minus, R2Plus, R2Minus, R3, Retag, MoveToBlock, Relabel>;

struct Isotopy {
    std::vector<Move> moves;
};

struct CrossingChange {
    std::vector<CrossingId> crossings;  // exactly one = simple
};

// Signs name the Hopf template handled per block: split validates the sign,
// merge creates it. Recorded double point signs follow the new-crossing rule.
struct HopfSplit { std::vector<std::pair<BlockId, Sign>> blocks; };

struct MergeSpec {
    BlockId block{};
    Sign sign = Sign::plus;
    bool alternating = false;  // which 2-crossing presentation to build
    MergeSpec() = default;
    MergeSpec(BlockId b, Sign s, bool alt = false) : block(b), sign(s), alternating(alt) {}
};
struct HopfMerge { std::vector<MergeSpec> blocks; };

using Transformation =
    std::variant<Birth, Death, Surgery1, Isotopy, CrossingChange, HopfSplit, HopfMerge>;

// --- events and apply results --------------------------------------------------

struct EventRecord {
    std::vector<Sign> double_points;
    std::uint32_t births = 0;
    std::uint32_t deaths = 0;
    std::uint32_t bands = 0;
};

// Replay annotations: everything a time-reversal needs.
struct BandNote {
    EdgeId dual1{};  // final edge holding band side A next to the attach1 cut
    EdgeId dual2{};  // final edge holding band side B next to the attach1 cut
    std::vector<CrossingId> new_crossings;  // creation order
    std::vector<EdgeId> touched_edges;      // every edge the band rebuilt
    bool pure = true;        // no core at all
    bool twist_only = true;  // core is twists only
    bool merged = false;     // fusion (component count dropped)
    BlockId block1_before{};  // attach1's block in the source diagram
    BlockId block2_before{};  // attach2's block in the source diagram
    bool block1_scratch = false;
    bool block2_scratch = false;
};

struct MoveNote {
    // inverse-move payloads, one slot per move kind
    std::optional<CrossingId> r1_created;
    std::optional<std::pair<CrossingId, CrossingId>> r2_created;
    std::optional<R1Plus> r1_reinsert;                     // how to undo an R1-
    std::optional<R2Plus> r2_reinsert;                     // how to undo an R2-
    std::optional<bool> retag_old;
    struct MovedFrom { EdgeId rep{}; BlockId block{}; bool scratch = false; };
    std::vector<MovedFrom> moved_from;  // member rep -> old block
};

struct StepNote {
    std::vector<LoopId> born_loops;
    std::vector<std::pair<LoopId, BlockId>> killed_loops;
    std::vector<std::pair<BlockId, bool>> emptied_blocks;  // fully removed (id, was scratch)
    std::vector<BandNote> bands;
    std::vector<MoveNote> moves;
    // hopf ops: per listed block, the two loops involved (created for split,
    // consumed for merge) in pairing order, plus created template crossings.
    struct HopfNote {
        LoopId loop_a{}, loop_b{};
        std::vector<CrossingId> template_crossings;
        bool alternating = false;  // which presentation was consumed or built
    };
    std::vector<HopfNote> hopf;
};

struct ApplyDetail {
    Diagram result;
    EventRecord events;
    // surface connectivity not implied by surviving edge ids
    std::vector<std::pair<EdgeId, EdgeId>> links;         // before-edge ~ after-edge
    std::vector<std::pair<EdgeId, EdgeId>> after_unions;  // after-edge ~ after-edge
    StepNote note;
};

// --- operations -----------------------------------------------------------------

// Never mutates; empty result means ok.
Violations validate(const Diagram& d, const Transformation& t);

// Requires validate() == ok; throws PreconditionViolated otherwise.
std::pair<Diagram, EventRecord> apply(const Diagram& d, const Transformation& t);
ApplyDetail apply_detail(const Diagram& d, const Transformation& t);

// Time reversal of a single step. Needs the annotation collected when the
// step was applied (Birth->Death needs the born loop ids, Surgery1 needs the
// dual feet). Twist-core bands additionally need R1 cleanup, returned as an
// optional trailing isotopy. Transversal-core bands are not reversible.
struct Inverse {
    Transformation step;
    std::optional<Transformation> cleanup;  // isotopy, when needed
};
Inverse invert(const Transformation& t, const StepNote& note);

// Convenience for annotation-free kinds (throws UnsupportedReversal if the
// kind needs its note).
Transformation invert_simple(const Transformation& t);

const char* kind_name(const Transformation& t);

}  // namespace mopic

#endif  // MOPIC_TRANSFORM_HPP
