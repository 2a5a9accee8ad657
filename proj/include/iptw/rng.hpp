#pragma once

#include <cstdint>
#include <random>

namespace iptw {

using Engine = std::mt19937_64;

// SplitMix64 finalizer; full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic substream key: every parallel unit of work derives its
// own seed from (parent seed, stage tag, index), so results never
// depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t index) {
  return mix64(mix64(mix64(seed) ^ tag) ^ index);
}

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

inline Engine make_engine(std::uint64_t seed, std::uint64_t tag,
                          std::uint64_t index) {
  return Engine(derive_seed(seed, tag, index));
}

// Scalar draws below avoid std::*_distribution, whose algorithms are
// implementation-defined; these are fixed so streams are stable across
// standard libraries.

// Uniform in [0,1) with 53 random bits.
inline double u01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform in (0,1]; safe to pass to log().
inline double u01_pos(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
}

// Unbiased-to-2^-64 index draw via 128-bit multiply (Lemire reduction
// without the rejection step; bias is negligible for our m).
inline std::size_t draw_index(Engine& eng, std::size_t m) {
  const unsigned __int128 prod =
      static_cast<unsigned __int128>(eng()) * static_cast<unsigned __int128>(m);
  return static_cast<std::size_t>(prod >> 64);
}

inline bool rbernoulli(Engine& eng, double p) { return u01(eng) < p; }

double rnorm(Engine& eng);                  // inverse-CDF standard normal
double rexp(Engine& eng);                   // rate-1 exponential
double rt(Engine& eng, int df);             // Student t
long rpoisson(Engine& eng, double mean);    // sequential inversion; small means

// Stage tags for substream derivation.
namespace stream {
inline constexpr std::uint64_t pilot = 0x70696C6F74ull;        // design pilots
inline constexpr std::uint64_t bootstrap = 0x626F6F74ull;      // LSVF bootstrap slots
inline constexpr std::uint64_t ucb = 0x756362ull;              // second-level bootstrap
inline constexpr std::uint64_t power_point = 0x67726964ull;    // power grid point
inline constexpr std::uint64_t power_rep = 0x726570ull;        // Monte Carlo power replicate
inline constexpr std::uint64_t simulate = 0x73696Dull;         // standalone dataset generation
}  // namespace stream

}  // namespace iptw
