#ifndef MOPIC_ERRORS_HPP
#define MOPIC_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mopic {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MalformedDiagram : Error { using Error::Error; };
struct UnknownCrossing : Error { using Error::Error; };
struct UnknownBlock : Error { using Error::Error; };
struct SameComponent : Error { using Error::Error; };

// Carried by PreconditionViolated and by parse-time semantic errors.
struct Violations {
    std::vector<std::string> items;
    bool ok() const { return items.empty(); }
    std::string joined() const {
        std::string s;
        for (const auto& i : items) { if (!s.empty()) s += "; "; s += i; }
        return s;
    }
};

struct PreconditionViolated : Error {
    Violations report;
    explicit PreconditionViolated(Violations v)
        : Error("transformation precondition violated: " + v.joined()), report(std::move(v)) {}
};

struct InvalidSequence : Error {
    std::size_t step;
    InvalidSequence(std::size_t step_index, const std::string& why)
        : Error("invalid sequence at step " + std::to_string(step_index) + ": " + why), step(step_index) {}
};

struct NotASimpleCrossingChange : Error { using Error::Error; };
struct SupportOverlap : Error { using Error::Error; };
struct BoundaryReached : Error { using Error::Error; };
struct NotPrenormal : Error { using Error::Error; };
struct ReorderObstruction : Error { using Error::Error; };
struct NoFusionSubset : Error { using Error::Error; };
struct NotRibbonClaspNormalForm : Error { using Error::Error; };
struct NotSymmetricNormalForm : Error { using Error::Error; };
struct BandInvalidAtMidLevel : Error { using Error::Error; };
struct UnsupportedReversal : Error { using Error::Error; };

}  // namespace mopic

#endif  // MOPIC_ERRORS_HPP
