#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include "capmimo/types.hpp"

namespace capmimo {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kFreeSpaceImpedance = 376.73;
/// Source/observation separations below this are rejected as singular.
inline constexpr double kSingularityRadius = 1e-9;

/// Physical constants of the propagation medium at one carrier frequency.
class WaveParams {
 public:
  explicit WaveParams(double frequency_hz, double speed = kSpeedOfLight,
                      double impedance = kFreeSpaceImpedance)
      : f_(frequency_hz), c_(speed), z0_(impedance) {
    if (!(f_ > 0.0) || !(c_ > 0.0) || !(z0_ > 0.0)) {
      throw ConfigError("WaveParams: frequency, speed and impedance must be positive");
    }
    kappa0_ = 2.0 * kPi * f_ / c_;
  }

  double frequency() const noexcept { return f_; }
  double speed() const noexcept { return c_; }
  double kappa0() const noexcept { return kappa0_; }
  double impedance() const noexcept { return z0_; }
  double wavelength() const noexcept { return c_ / f_; }

 private:
  double f_;
  double c_;
  double z0_;
  double kappa0_ = 0.0;
};

/// Planar rectangular aperture with normal along +z.
struct Aperture {
  double Lx = 0.5;
  double Ly = 0.5;
  Real3 center = Real3::Zero();

  double area() const noexcept { return Lx * Ly; }
  bool contains_xy(const Real3& p, double slack = 0.0) const noexcept {
    return std::abs(p.x() - center.x()) <= Lx / 2 + slack &&
           std::abs(p.y() - center.y()) <= Ly / 2 + slack;
  }
};

/// Sampled aperture points with quadrature weights; the discrete stand-in
/// for the surface integral over the aperture.
struct QuadratureGrid {
  std::vector<Real3> points;
  std::vector<double> weights;
  std::size_t nx = 0;
  std::size_t ny = 0;
  Aperture aperture;

  std::size_t size() const noexcept { return points.size(); }
  /// Point i relative to the aperture center.
  Real3 local(std::size_t i) const { return points[i] - aperture.center; }
};

/// Uniform midpoint rule on an nx-by-ny cell partition. Points are stored
/// row-major in y (index = iy * nx + ix).
inline QuadratureGrid build_grid(const Aperture& aperture, std::size_t nx, std::size_t ny) {
  if (nx < 1 || ny < 1) {
    throw ConfigError("build_grid: nx and ny must be at least 1");
  }
  if (!(aperture.Lx > 0.0) || !(aperture.Ly > 0.0)) {
    throw ConfigError("build_grid: aperture side lengths must be positive");
  }
  QuadratureGrid grid;
  grid.nx = nx;
  grid.ny = ny;
  grid.aperture = aperture;
  const std::size_t count = nx * ny;
  grid.points.reserve(count);
  const double dx = aperture.Lx / static_cast<double>(nx);
  const double dy = aperture.Ly / static_cast<double>(ny);
  const double w = aperture.area() / static_cast<double>(count);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double x = -aperture.Lx / 2 + (static_cast<double>(ix) + 0.5) * dx;
      const double y = -aperture.Ly / 2 + (static_cast<double>(iy) + 0.5) * dy;
      grid.points.emplace_back(aperture.center + Real3(x, y, 0.0));
    }
  }
  grid.weights.assign(count, w);
  return grid;
}

namespace detail {

template <class T>
T zero_like(const T& sample) {
  if constexpr (std::is_arithmetic_v<T>) {
    return T{0};
  } else if constexpr (std::is_same_v<T, cplx>) {
    return cplx{0.0, 0.0};
  } else {
    return T::Zero(sample.rows(), sample.cols());
  }
}

}  // namespace detail

/// Weighted sum over the grid. Works for scalars, complex numbers and
/// fixed-size Eigen vectors/matrices.
template <class T>
T integrate(const std::vector<T>& field, const QuadratureGrid& grid) {
  if (field.size() != grid.size()) {
    throw ContractViolation("integrate: field has " + std::to_string(field.size()) +
                            " samples, grid has " + std::to_string(grid.size()));
  }
  if (field.empty()) {
    throw ContractViolation("integrate: empty grid");
  }
  T acc = detail::zero_like(field.front());
  for (std::size_t i = 0; i < field.size(); ++i) {
    acc += grid.weights[i] * field[i];
  }
  return acc;
}

/// Same as integrate() but evaluates the integrand lazily: fn(i) -> value.
template <class Fn>
auto integrate_with(const QuadratureGrid& grid, Fn&& fn) {
  using T = std::decay_t<decltype(fn(std::size_t{0}))>;
  if (grid.size() == 0) {
    throw ContractViolation("integrate_with: empty grid");
  }
  T first = fn(std::size_t{0});
  T acc = grid.weights[0] * first;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    acc += grid.weights[i] * fn(i);
  }
  return acc;
}

/// Free-space dyadic Green function mapping a current at s to the field at r.
inline ComplexMat3 green_free_space(const Real3& r, const Real3& s, const WaveParams& wave) {
  const Real3 d = r - s;
  const double dist = d.norm();
  if (!(dist >= kSingularityRadius)) {
    throw SingularityError("green_free_space: observation point coincides with source");
  }
  const double k0 = wave.kappa0();
  const cplx scale = kJ * k0 * wave.impedance() / (4.0 * kPi) * std::exp(kJ * (k0 * dist)) / dist;
  const Eigen::Matrix3d projector = Eigen::Matrix3d::Identity() - d * d.transpose() / (dist * dist);
  return scale * projector.cast<cplx>();
}

/// Far-field (plane-wave) approximation of the Green function, valid when
/// |r| is much larger than |s|. The caller is responsible for that regime.
inline ComplexMat3 green_far_field(const Real3& r, const Real3& s, const WaveParams& wave) {
  const double rn = r.norm();
  if (!(rn >= kSingularityRadius)) {
    throw SingularityError("green_far_field: observation point at the origin");
  }
  const double k0 = wave.kappa0();
  const Real3 dir = r / rn;
  const Real3 kvec = k0 * dir;
  const cplx scale = kJ * k0 * wave.impedance() / (4.0 * kPi) * std::exp(kJ * (k0 * rn)) / rn *
                     std::exp(-kJ * kvec.dot(s));
  const Eigen::Matrix3d projector = Eigen::Matrix3d::Identity() - dir * dir.transpose();
  return scale * projector.cast<cplx>();
}

/// G(r_k, s_i) for every grid point.
inline ChannelSamples channel_samples(const Real3& user_pos, const QuadratureGrid& grid,
                                      const WaveParams& wave) {
  ChannelSamples out;
  out.reserve(grid.size());
  for (const auto& s : grid.points) {
    out.push_back(green_free_space(user_pos, s, wave));
  }
  return out;
}

inline std::vector<ChannelSamples> channel_samples(const std::vector<Real3>& users,
                                                   const QuadratureGrid& grid,
                                                   const WaveParams& wave) {
  std::vector<ChannelSamples> out;
  out.reserve(users.size());
  for (const auto& u : users) {
    out.push_back(channel_samples(u, grid, wave));
  }
  return out;
}

}  // namespace capmimo
