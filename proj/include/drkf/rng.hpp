#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace drkf {

// splitmix64. Used both for seed derivation and as the draw generator so
// that sequences are bit-identical across platforms and thread schedules
// (the std <random> distributions are implementation-defined).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derive an independent stream seed from a base seed and a tag tuple,
/// e.g. (purpose, k, i, j). Streams with distinct tuples are decorrelated.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = base;
  for (std::uint64_t p : parts) {
    h ^= p + 0x9E3779B97F4A7C15ULL + (h << 12) + (h >> 4);
    splitmix64_next(h);
  }
  return h;
}

/// Small deterministic generator with the handful of draws the simulator
/// needs. One instance per (purpose, time, link) tuple; never shared.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {
    next();
    next();
  }

  std::uint64_t next() { return splitmix64_next(state_); }

  /// Uniform in [0, 1), 53-bit mantissa.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via Box-Muller, one cached spare.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream purposes; keeps draws for different roles independent even when
// the same (k, i, j) indices occur.
enum class StreamTag : std::uint64_t {
  kRunSeed = 1,
  kInitialState = 2,
  kProcessNoise = 3,
  kMultiplicativeNoise = 4,
  kFading = 5,
  kMeasurementNoise = 6,
  kChannelVector = 7,
  kChannelMatrix = 8,
  kTopology = 9,
};

inline std::uint64_t tag_value(StreamTag t) {
  return static_cast<std::uint64_t>(t);
}

}  // namespace drkf
