#ifndef MOPIC_DSL_HPP
#define MOPIC_DSL_HPP

#include <string>

#include <mopic/calculus.hpp>

namespace mopic {

struct SourceSpan {
    int line = 1;
    int column = 1;
    int length = 0;
};

struct SyntaxError : Error {
    SourceSpan span;
    SyntaxError(SourceSpan sp, const std::string& msg)
        : Error("syntax error at " + std::to_string(sp.line) + ":" + std::to_string(sp.column) +
                ": " + msg),
          span(sp) {}
};

struct SemanticError : Error {
    SourceSpan span;
    Violations report;
    SemanticError(SourceSpan sp, Violations v)
        : Error("semantic error at " + std::to_string(sp.line) + ":" + std::to_string(sp.column) +
                ": " + v.joined()),
          span(sp),
          report(std::move(v)) {}
};

// Parses the .mp wire format; replays while parsing, so every invalid step is
// reported with its source span.
Sequence parse(const std::string& text);

// Canonical text; parse(serialize(s)) is stepwise isomorphic to s and
// serialize is a fixed point of parse∘serialize.
std::string serialize(const Sequence& s);

}  // namespace mopic

#endif  // MOPIC_DSL_HPP
