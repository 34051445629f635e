#ifndef MOPIC_IDS_HPP
#define MOPIC_IDS_HPP

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>

namespace mopic {

// Opaque identifiers, unique within one Diagram, never reused (monotone counters).
template <class Tag>
struct Id {
    std::uint32_t v = 0;
    constexpr Id() = default;
    constexpr explicit Id(std::uint32_t value) : v(value) {}
    auto operator<=>(const Id&) const = default;
};

struct EdgeIdTag {};
struct CrossingIdTag {};
struct LoopIdTag {};
struct BlockIdTag {};
struct ComponentIdTag {};

using EdgeId = Id<EdgeIdTag>;
using CrossingId = Id<CrossingIdTag>;
using LoopId = Id<LoopIdTag>;
using BlockId = Id<BlockIdTag>;
using ComponentId = Id<ComponentIdTag>;

enum class Sign : std::uint8_t { plus, minus };

constexpr Sign operator-(Sign s) { return s == Sign::plus ? Sign::minus : Sign::plus; }
constexpr int sign_value(Sign s) { return s == Sign::plus ? 1 : -1; }
constexpr char sign_char(Sign s) { return s == Sign::plus ? '+' : '-'; }

// Direction of the over-strand through the b/d slots of a crossing.
// d_to_b is the positive crossing under the chosen slot convention.
enum class OverDir : std::uint8_t { b_to_d, d_to_b };

constexpr Sign over_dir_sign(OverDir o) { return o == OverDir::d_to_b ? Sign::plus : Sign::minus; }
constexpr OverDir sign_over_dir(Sign s) { return s == Sign::plus ? OverDir::d_to_b : OverDir::b_to_d; }

// Exact rational timestamps for divisions.
struct Rat {
    long long num = 0;
    long long den = 1;

    constexpr Rat() = default;
    Rat(long long n, long long d = 1) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den < 0) { num = -num; den = -den; }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }

    friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator<(const Rat& a, const Rat& b) { return a.num * b.den < b.num * a.den; }
    friend bool operator<=(const Rat& a, const Rat& b) { return a == b || a < b; }
    friend Rat operator-(const Rat& a) { return Rat(-a.num, a.den); }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }
};

}  // namespace mopic

#endif  // MOPIC_IDS_HPP
