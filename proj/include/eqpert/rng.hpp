#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace eqpert {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One stream per replica: stream(seed, id) and stream(seed, id') are
// independent for id != id'. Sampling helpers are written out explicitly so
// that trajectories depend only on this source, not on the standard library's
// unspecified distribution algorithms.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream_id ^ 0x5851f42d4c957f2dULL))) {}

  std::uint64_t bits() { return engine_(); }

  // uniform on (0,1]; never returns 0 so log() is safe
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // uniform on [0,1)
  double uniform_co() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  bool bernoulli(double p) { return uniform_co() < p; }

  // sum of k independent Bernoulli(p); k is tiny here (occupation bound)
  int binomial(int k, double p) {
    int n = 0;
    for (int i = 0; i < k; ++i) n += bernoulli(p) ? 1 : 0;
    return n;
  }

  // polar Box-Muller with one cached value
  double gaussian() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform_co() - 1.0;
      v = 2.0 * uniform_co() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    cache_ = v * f;
    have_cache_ = true;
    return u * f;
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

 private:
  std::mt19937_64 engine_;
  double cache_ = 0.0;
  bool have_cache_ = false;
};

}  // namespace eqpert
