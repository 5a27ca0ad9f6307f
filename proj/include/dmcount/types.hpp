#ifndef DMCOUNT_TYPES_HPP
#define DMCOUNT_TYPES_HPP

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <string>

namespace dmcount {

// Grids are stored row-major so that flat index i == r * cols + c matches
// the on-disk layout of the density-map text format.
template <typename Scalar>
using GridArray =
    Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using FlatArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
constexpr Scalar machine_epsilon() {
  return std::numeric_limits<Scalar>::epsilon();
}

template <typename Scalar>
constexpr Scalar infinity() {
  return std::numeric_limits<Scalar>::infinity();
}

// Error taxonomy shared by all modules. Each maps to one failure mode of an
// operation contract; the CLI translates them into exit codes.
struct GridMismatch : std::invalid_argument {
  explicit GridMismatch(const std::string& what)
      : std::invalid_argument("grid mismatch: " + what) {}
};

struct MassMismatch : std::invalid_argument {
  explicit MassMismatch(const std::string& what)
      : std::invalid_argument("mass mismatch: " + what) {}
};

struct ZeroMass : std::invalid_argument {
  explicit ZeroMass(const std::string& what)
      : std::invalid_argument("zero mass: " + what) {}
};

struct EmptyAnnotation : std::invalid_argument {
  explicit EmptyAnnotation(const std::string& what)
      : std::invalid_argument("empty annotation: " + what) {}
};

struct EmptyInput : std::invalid_argument {
  explicit EmptyInput(const std::string& what)
      : std::invalid_argument("empty input: " + what) {}
};

struct TooSmall : std::invalid_argument {
  explicit TooSmall(const std::string& what)
      : std::invalid_argument("grid too small: " + what) {}
};

struct TooMany : std::invalid_argument {
  explicit TooMany(const std::string& what)
      : std::invalid_argument("too many: " + what) {}
};

struct NonFinite : std::runtime_error {
  explicit NonFinite(const std::string& what)
      : std::runtime_error("non-finite value: " + what) {}
};

}  // namespace dmcount

#endif  // DMCOUNT_TYPES_HPP
