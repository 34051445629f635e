#ifndef MOPIC_CALCULUS_HPP
#define MOPIC_CALCULUS_HPP

#include <string>
#include <vector>

#include <mopic/transform.hpp>

namespace mopic {

// A motion picture: transformations from the empty diagram back to the empty
// diagram, a division of timestamps (one per level), and the level identified
// with R^3 x {0}.
struct Sequence {
    std::vector<Transformation> steps;
    std::vector<Rat> division;
    std::size_t mid = 0;
};

// Consecutive integer division centered so that level `mid` sits at time 0.
void center_division(Sequence& s, std::size_t mid);

struct Replay {
    std::vector<Diagram> levels;      // steps.size() + 1 diagrams
    std::vector<ApplyDetail> details;  // one per step
};

// Validates and replays; throws InvalidSequence with the failing step index.
Replay replay(const Sequence& s);

struct SurfaceInvariants {
    int mu = 0;
    int chi = 0;
    int genus_total = 0;
    int c_plus = 0, c_minus = 0;
    int c1_plus = 0, c1_minus = 0;  // upper half, t >= mid
    int c2_plus = 0, c2_minus = 0;  // lower half, t <= mid
    bool operator==(const SurfaceInvariants&) const = default;
};

SurfaceInvariants realize(const Sequence& s);
SurfaceInvariants realize(const Sequence& s, const Replay& rep);

enum class Form { normal, ribbon_clasp, symmetric };

struct ValidationReport {
    Form form = Form::normal;
    struct Clause {
        std::string id;
        bool pass = true;
        std::string note;
    };
    std::vector<Clause> clauses;
    bool pass() const {
        for (const auto& c : clauses)
            if (!c.pass) return false;
        return true;
    }
};

ValidationReport check_normal_form(const Sequence& s);
ValidationReport check_ribbon_clasp_normal_form(const Sequence& s);
ValidationReport check_symmetric_normal_form(const Sequence& s);

// Reflection across R^3 x {0}: steps reversed and inverted, division negated
// and reversed. Twist-core bands acquire R1 cleanup isotopies; transversal
// cores are rejected (UnsupportedReversal).
Sequence mirror_time(const Sequence& s);

// Rewrite a step's identifiers through a relabeling; unmapped block targets
// become fresh blocks of `target`, allocated in order of appearance.
Transformation transport(const Transformation& t, const Relabeling& r, const Diagram& target);

// Transport old_step through chi onto cur and apply it there. Multi-move
// isotopies are chained move by move against the old intermediate states
// (their targets need not exist at the step boundary). Leaves chi mapping the
// old post-state onto the new cur.
Transformation transport_apply(const Transformation& old_step, const Diagram& old_pre,
                               Relabeling& chi, Diagram& cur);

// Append the time reversal of one forward step (with its replay annotations)
// onto cur through chi (an isomorphism from the forward post-level onto cur).
// Returns the number of steps appended; chi ends mapping the forward
// pre-level onto the new cur.
std::size_t append_mirrored_step(const Transformation& fwd, const StepNote& note,
                                 const Diagram& fwd_pre, std::vector<Transformation>& out,
                                 Diagram& cur, Relabeling& chi);

Relabeling identity_relabeling(const Diagram& d);

// Band classification at application time: true = merges two components.
std::vector<bool> classify_bands(const Diagram& level, const std::vector<Band>& bands);

}  // namespace mopic

#endif  // MOPIC_CALCULUS_HPP
