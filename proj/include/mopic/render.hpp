#ifndef MOPIC_RENDER_HPP
#define MOPIC_RENDER_HPP

#include <string>
#include <vector>

#include <mopic/calculus.hpp>

namespace mopic {

// One still of the motion picture: a level, or a mid-step snapshot of a
// critical event (birth, band, double point, death).
struct Frame {
    std::size_t level = 0;  // level index the frame belongs to
    Rat time;
    Diagram diagram;

    struct Annotation {
        enum class Kind { born_loop, dying_loop, band, double_point, hopf_block };
        Kind kind = Kind::double_point;
        LoopId loop{};
        EdgeId a{}, b{};  // band feet
        CrossingId crossing{};
        BlockId block{};
        Sign sign = Sign::plus;
        bool at_block = false;  // double point announced on a block
    };
    std::vector<Annotation> annotations;
};

// One frame per level plus one mid-step frame per critical event.
std::vector<Frame> frames(const Sequence& s);

// Deterministic schematic SVG: components on circles, blocks as dashed
// enclosures, one over-strand break per crossing. Not planar-faithful.
std::string to_svg(const Frame& f);

// frame_<index>_<timestamp>.svg ('/' in rationals written as 'd')
std::string frame_filename(std::size_t index, const Frame& f);

}  // namespace mopic

#endif  // MOPIC_RENDER_HPP
