#ifndef DMCOUNT_RANDOM_HPP
#define DMCOUNT_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

namespace dmcount {

// Uniform draws are derived from the raw engine output instead of
// std::uniform_real_distribution, whose value sequence is
// implementation-defined. Seeded runs therefore reproduce bit-identically
// across standard libraries.
template <typename Scalar = double>
inline Scalar uniform01(std::mt19937_64& rng) {
  return static_cast<Scalar>((rng() >> 11) * 0x1.0p-53);
}

// Uniform in [lo, hi).
template <typename Scalar>
inline Scalar uniform(std::mt19937_64& rng, Scalar lo, Scalar hi) {
  return lo + (hi - lo) * uniform01<Scalar>(rng);
}

// One standard-normal pair via Box-Muller, built on uniform01 for the same
// reproducibility reason.
template <typename Scalar = double>
inline std::pair<Scalar, Scalar> normal_pair(std::mt19937_64& rng) {
  Scalar u1 = uniform01<Scalar>(rng);
  Scalar u2 = uniform01<Scalar>(rng);
  if (u1 <= Scalar(0)) u1 = std::numeric_limits<Scalar>::min();
  const Scalar r = std::sqrt(Scalar(-2) * std::log(u1));
  const Scalar t = Scalar(2) * Scalar(M_PI) * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace dmcount

#endif  // DMCOUNT_RANDOM_HPP
