#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

namespace boomtrack {

// Writes `body`'s output to `path` via a temp file in the same directory,
// renamed into place on success. The temp file is removed if `body` throws,
// so a failed run leaves no partial output behind.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body);

// Fixed-point formatting used for all CSV/JSONL output so repeated runs are
// byte-identical.
std::string fmt_fixed(double v, int precision);

// Shortest exact representation of a double (round-trips bit-for-bit).
std::string fmt_exact(double v);

// Rounds to `decimals` places, half away from zero.
double quantize(double v, int decimals);

// Uniform draw in [0, 1) built from the top 53 bits of the generator output;
// identical across platforms, unlike std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng);

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + uniform01(rng) * (hi - lo);
}

// SplitMix64 finalizer, used to hash lattice coordinates into noise values.
std::uint64_t hash_mix(std::uint64_t v);

} // namespace boomtrack
