#ifndef SMOOTHLAB_RNG_HPP
#define SMOOTHLAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace smoothlab {

// Deterministic random source. mt19937_64 is bit-stable everywhere; the
// distributions below are hand-mapped (std::uniform_real_distribution and
// friends are not guaranteed to produce identical streams across standard
// libraries, and byte-identical reports across runs are part of the contract).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Marsaglia polar method; deterministic given the engine stream.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  std::uint64_t integer() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace smoothlab

#endif
