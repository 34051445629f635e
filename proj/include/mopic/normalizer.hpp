#ifndef MOPIC_NORMALIZER_HPP
#define MOPIC_NORMALIZER_HPP

#include <mopic/calculus.hpp>

namespace mopic {

// Assignment of every double point to one of the four groups of the
// normalization theorem: G'± end up in the upper half, G''± in the lower.
struct DoublePointPartition {
    enum class Group : std::uint8_t { g1_plus, g1_minus, g2_plus, g2_minus };
    std::vector<Group> assign;  // indexed in global double-point order

    static bool upper(Group g) { return g == Group::g1_plus || g == Group::g1_minus; }
    static Sign sign_of(Group g) {
        return g == Group::g1_plus || g == Group::g2_plus ? Sign::plus : Sign::minus;
    }
};

struct HandleSpec {
    Band band;  // attaches at the mid-level diagram
};

// --- builders -------------------------------------------------------------------

// The nine-level symmetric sequence of the Montesinos twin: O a trivial
// 2-component link, L = K = L0 a positive Hopf link.
Sequence montesinos_twin();

// Split union of unknotted spheres and Montesinos twins on one division.
Sequence m_trivial(int spheres, int twins);

// 1-handle surgeries at the mid level; bands are applied downward and their
// duals upward, preserving the ribbon-clasp shape.
Sequence attach_handles(const Sequence& s, const std::vector<HandleSpec>& hs);

// Splice a Montesinos twin in and tie its two components to the target edges
// with two handles.
Sequence finger_move(const Sequence& s, EdgeId target1, EdgeId target2);

// --- rewrites -------------------------------------------------------------------

// Splits multi-crossing change steps into simple ones.
Sequence make_prenormal(const Sequence& s);

// Throws NotPrenormal unless the sequence has the shape normalize() accepts.
void require_prenormal(const Sequence& s);

// Lemma 5.1: replace a simple crossing change by a band surgery splitting off
// a Hopf link in a fresh scratch block, followed by the Hopf splitting and
// the death of the two circles.
Sequence expand_crossing_change(const Sequence& s, std::size_t step);

// Lemma 5.2: swap a scratch-confined Hopf split (or merge) with its neighbor.
Sequence commute_hopf_split(const Sequence& s, std::size_t step, bool later);

// Theorem B: rewrite a prenormal sequence into a normal form whose half
// counts equal the partition cardinalities.
Sequence normalize(const Sequence& s, const DoublePointPartition& p);

// Theorem C selection: a lexicographically smallest spanning fusion subset
// reaching exactly target_mu components.
std::pair<std::vector<Band>, std::vector<Band>> fuse_fission_split(
    const std::vector<Band>& bands, const Diagram& level, int target_mu);

// Theorem C: ribbon-clasp normal form -> symmetric normal form and back.
Sequence symmetrize(const Sequence& s);
Sequence desymmetrize(const Sequence& s);

// Extend a replayable prefix (from the empty diagram) by its own time
// reflection; the result is a symmetric closed sequence with mid at the
// prefix end. The workhorse behind the builders and symmetrize.
Sequence mirror_extend(const std::vector<Transformation>& prefix);

}  // namespace mopic

#endif  // MOPIC_NORMALIZER_HPP
