#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace sculpt {

// Small deterministic generator (splitmix64 core). We avoid the standard
// distributions because their output is implementation-defined; every draw
// here is reproducible bit-for-bit from the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Marsaglia polar method; consumes a variable number of draws but is
  // deterministic per stream.
  double gaussian(double mean = 0.0, double stddev = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    double u, v, s;
    do {
      u = uniform(-1.0, 1.0);
      v = uniform(-1.0, 1.0);
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return mean + stddev * u * m;
  }

  // Named substream derivation: all project randomness flows from one root
  // seed through labeled substreams.
  Rng substream(std::string_view label) const {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ state_;
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return Rng(h);
  }

  Rng substream(std::uint64_t index) const {
    Rng r(state_ ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return r;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sculpt
