#ifndef BLPP_COMMON_HPP
#define BLPP_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace blpp {

// ---- error types -------------------------------------------------------

struct out_of_band_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct out_of_window_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct no_zigzag_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct enumeration_too_large_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct no_admissible_start_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct untrusted_window_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct grid_mismatch_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- minus-infinity sentinel -------------------------------------------

// Sentinel for "no value here" in initial conditions. Excluded from every
// max/plus, so it never enters float arithmetic (no NaN from inf - inf).
inline constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

inline bool is_minus_inf(double v) { return v == kMinusInf; }

// ---- hashing / counter-based RNG ---------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// u64 -> (0,1), both endpoints excluded
inline double to_unit_open(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// Stateless counter-based stream: draw k indexed by (seed, stream, counter).
// Streams are independent for distinct (stream, counter) pairs, which makes
// per-line, per-column generation order-free and reproducible.
inline std::uint64_t counter_u64(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t counter) {
    return splitmix64(hash_combine(hash_combine(seed, stream), counter));
}

// One standard Gaussian per (seed, stream, counter) via Box-Muller.
inline double counter_gaussian(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t counter) {
    const double u1 = to_unit_open(counter_u64(seed, stream, 2 * counter));
    const double u2 = to_unit_open(counter_u64(seed, stream, 2 * counter + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// ---- small numeric helpers ----------------------------------------------

inline double pow_2_3(double v) {  // v^(2/3) for v > 0
    return std::cbrt(v) * std::cbrt(v);
}

inline bool nearly_integer(double v, double tol = 1e-9) {
    return std::abs(v - std::round(v)) <= tol;
}

}  // namespace blpp

#endif
