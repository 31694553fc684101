#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace capmimo {

using cplx = std::complex<double>;

using Real3 = Eigen::Vector3d;
using Complex3 = Eigen::Vector3cd;
using ComplexMat3 = Eigen::Matrix3cd;

/// One 3x3 channel matrix per quadrature point.
using ChannelSamples = std::vector<ComplexMat3>;
/// One current-density vector per quadrature point.
using PatternField = std::vector<Complex3>;
/// One pattern field per user.
using PatternSet = std::vector<PatternField>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kJ{0.0, 1.0};

// Error hierarchy. Everything derives from std::runtime_error or
// std::invalid_argument so callers can catch broadly.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularityError : std::domain_error {
  using std::domain_error::domain_error;
};

struct DegenerateChannelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace capmimo
