#ifndef MOPIC_ORACLE_HPP
#define MOPIC_ORACLE_HPP

#include <cstdint>
#include <vector>

#include <mopic/calculus.hpp>

namespace mopic::oracle {

// Strand walk over an explicit adjacency multigraph (different traversal and
// data layout than diagram::trace_components); returns component count and,
// via out param, the edge partition.
int trace_components_bruteforce(const Diagram& d,
                                std::vector<std::vector<EdgeId>>* partition = nullptr);

// Builds the realizing surface as an explicit cell complex, one piece per
// unit action, and reads the invariants off the cells.
SurfaceInvariants recompute_invariants_by_simulation(const Sequence& s);

struct Limits {
    int max_steps = 10;
    int max_crossings = 12;
    int max_bands = 3;
};

// Deterministic per seed; emits valid prenormal sequences by construction
// (creator steps mirrored by their destructors).
Sequence random_sequence(std::uint64_t seed, const Limits& limits = {});

// Like random_sequence, but every double point is a simple crossing change
// (no hopf steps), the shape normalize() accepts.
Sequence random_prenormal(std::uint64_t seed, const Limits& limits = {});

// A valid diagram sampled from a random sequence replay.
Diagram random_diagram(std::uint64_t seed, int max_crossings = 12);

}  // namespace mopic::oracle

#endif  // MOPIC_ORACLE_HPP
