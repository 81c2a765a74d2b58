#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace irvd {

/// Bad command line arguments, unreadable config, unresolvable paths.
/// Mapped to exit code 1 by the CLI.
class UserError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent data encountered while processing.
/// Mapped to exit code 2 by the CLI.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structural error in IR text, carries the 1-based line number.
class ParseError : public DataError {
public:
    ParseError(const std::string& msg, std::size_t line)
        : DataError(msg + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// ---------------------------------------------------------------------------
// Deterministic RNG helpers.
//
// mt19937_64 output is pinned by the standard; the std:: distributions are
// not, so every uniform draw goes through the explicit mappings below to keep
// artifacts byte-identical across standard library versions.
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

/// Uniform double in [0, 1).
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_real(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

/// Uniform integer in [0, n). Rejection sampling, unbiased.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

/// Fisher-Yates shuffle driven by uniform_index so the permutation only
/// depends on the seed.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

/// SplitMix64 step, used to derive per-stage seeds from the top-level seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a over bytes; stable content hash for config echoing.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for a named pipeline stage: one top-level knob, decorrelated streams.
inline std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) {
    return splitmix64(seed ^ fnv1a(stage));
}

// ---------------------------------------------------------------------------
// Small string helpers.
// ---------------------------------------------------------------------------

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Round-trip decimal form of a double ("%.17g").
std::string format_double(double v);

/// Hex form of a 64-bit hash, zero padded to 16 digits.
std::string hash_hex(std::uint64_t h);

/// Glob with '*' and '?' only, anchored at both ends.
bool glob_match(std::string_view pattern, std::string_view name);

}  // namespace irvd
