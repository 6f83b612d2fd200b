#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "epivar/linalg.hpp"

namespace epivar {

// Deterministic random stream. Distributions are implemented by hand so the
// output is pinned for a given seed independent of standard-library choices.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // derive an independent stream from a seed and a label
  static Rng derive(std::uint64_t seed, const std::string& label) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : label) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return Rng(seed ^ h);
  }

  double uniform() {  // in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 1e-300);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vector normal_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Vector unit_vector(int n) {
    Vector v = normal_vector(n);
    double nn = v.norm();
    while (nn < 1e-12) {
      v = normal_vector(n);
      nn = v.norm();
    }
    return v / nn;
  }

  int index(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace epivar
