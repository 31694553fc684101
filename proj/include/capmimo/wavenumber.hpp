#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "capmimo/em_core.hpp"

namespace capmimo {

/// Retained Fourier index range per axis.
struct TruncationOrder {
  int Nx = 0;
  int Ny = 0;
  int Nz = 0;

  std::size_t count() const noexcept {
    return static_cast<std::size_t>((2 * Nx + 1) * (2 * Ny + 1) * (2 * Nz + 1));
  }
  bool covers(const TruncationOrder& o) const noexcept {
    return Nx >= o.Nx && Ny >= o.Ny && Nz >= o.Nz;
  }
  TruncationOrder scaled(int factor) const noexcept {
    return {Nx * factor, Ny * factor, Nz * factor};
  }
  friend bool operator==(const TruncationOrder&, const TruncationOrder&) = default;
};

struct WavenumberIndex {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  bool within(const TruncationOrder& o) const noexcept {
    return std::abs(nx) <= o.Nx && std::abs(ny) <= o.Ny && std::abs(nz) <= o.Nz;
  }
  friend bool operator==(const WavenumberIndex&, const WavenumberIndex&) = default;
};

/// Lexicographic enumeration: nz outermost, nx innermost.
inline std::vector<WavenumberIndex> enumerate(const TruncationOrder& order) {
  if (order.Nx < 0 || order.Ny < 0 || order.Nz < 0) {
    throw ContractViolation("enumerate: negative truncation order");
  }
  std::vector<WavenumberIndex> out;
  out.reserve(order.count());
  for (int nz = -order.Nz; nz <= order.Nz; ++nz) {
    for (int ny = -order.Ny; ny <= order.Ny; ++ny) {
      for (int nx = -order.Nx; nx <= order.Nx; ++nx) {
        out.push_back({nx, ny, nz});
      }
    }
  }
  return out;
}

/// Position of `n` inside enumerate(order).
inline std::size_t flat_index(const WavenumberIndex& n, const TruncationOrder& order) {
  if (!n.within(order)) {
    throw ContractViolation("flat_index: index outside truncation order");
  }
  const std::size_t wx = static_cast<std::size_t>(2 * order.Nx + 1);
  const std::size_t wy = static_cast<std::size_t>(2 * order.Ny + 1);
  return static_cast<std::size_t>(n.nz + order.Nz) * wx * wy +
         static_cast<std::size_t>(n.ny + order.Ny) * wx + static_cast<std::size_t>(n.nx + order.Nx);
}

/// Ceiling used for the order rule. Values at most `slack` above an integer
/// round down to it, so L/lambda = 4.003 gives 4.
inline int tolerant_ceil(double x, double slack = 1e-2) {
  const double fl = std::floor(x);
  if (x - fl <= slack) return static_cast<int>(fl);
  return static_cast<int>(std::ceil(x));
}

/// Smallest per-axis order whose top wavenumber reaches kappa0. At least 1
/// along each in-plane axis; Nz = 0 for a planar aperture (Lz = 0).
inline TruncationOrder truncation_order(const Aperture& aperture, const WaveParams& wave,
                                        double Lz = 0.0) {
  const double k0 = wave.kappa0();
  auto axis = [&](double L) { return std::max(1, tolerant_ceil(k0 * L / (2.0 * kPi))); };
  TruncationOrder o;
  o.Nx = axis(aperture.Lx);
  o.Ny = axis(aperture.Ly);
  o.Nz = Lz > 0.0 ? axis(Lz) : 0;
  return o;
}

/// Largest symmetric order for which the basis on `grid` is still a complete
/// orthonormal set (odd grid sizes only give an exact match).
inline TruncationOrder complete_order(const QuadratureGrid& grid) {
  return {static_cast<int>((grid.nx - 1) / 2), static_cast<int>((grid.ny - 1) / 2), 0};
}

/// Fourier basis function; s is in global coordinates. The z factor is 1 for
/// planar apertures.
inline cplx basis_eval(const WavenumberIndex& n, const Real3& s, const Aperture& aperture) {
  const Real3 u = s - aperture.center;
  const double phase = 2.0 * kPi *
                       (n.nx * (u.x() - aperture.Lx / 2) / aperture.Lx +
                        n.ny * (u.y() - aperture.Ly / 2) / aperture.Ly);
  return std::exp(kJ * phase) / std::sqrt(aperture.area());
}

/// Psi_n(s_i) for every grid point (rows) and index (columns).
inline Eigen::MatrixXcd basis_table(const QuadratureGrid& grid,
                                    const std::vector<WavenumberIndex>& indices) {
  Eigen::MatrixXcd table(static_cast<Eigen::Index>(grid.size()),
                         static_cast<Eigen::Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          basis_eval(indices[c], grid.points[i], grid.aperture);
    }
  }
  return table;
}

/// Omega_{k,n} for every user and retained index.
struct ChannelSpectrum {
  TruncationOrder order;
  std::vector<WavenumberIndex> indices;
  std::vector<std::vector<ComplexMat3>> omega;  // [k][n]

  std::size_t users() const noexcept { return omega.size(); }
  std::size_t terms() const noexcept { return indices.size(); }

  /// [Omega_{k,1} Omega_{k,2} ...], a 3 x 3N_F matrix.
  Eigen::MatrixXcd stacked(std::size_t k) const {
    const auto nf = static_cast<Eigen::Index>(terms());
    Eigen::MatrixXcd h(3, 3 * nf);
    for (Eigen::Index n = 0; n < nf; ++n) {
      h.block<3, 3>(0, 3 * n) = omega[k][static_cast<std::size_t>(n)];
    }
    return h;
  }

  double energy(std::size_t k) const {
    double e = 0.0;
    for (const auto& m : omega[k]) e += m.squaredNorm();
    return e;
  }

  /// Same spectrum restricted to a smaller order.
  ChannelSpectrum truncated(const TruncationOrder& sub) const {
    if (!order.covers(sub)) {
      throw ContractViolation("ChannelSpectrum::truncated: order exceeds reference");
    }
    ChannelSpectrum out;
    out.order = sub;
    out.indices = enumerate(sub);
    out.omega.resize(users());
    for (std::size_t k = 0; k < users(); ++k) {
      out.omega[k].reserve(out.indices.size());
      for (const auto& n : out.indices) out.omega[k].push_back(omega[k][flat_index(n, order)]);
    }
    return out;
  }
};

/// w_{k,n} for every user and retained index.
struct CoeffSet {
  TruncationOrder order;
  std::vector<WavenumberIndex> indices;
  std::vector<std::vector<Complex3>> w;  // [k][n]

  static CoeffSet zeros(const TruncationOrder& order, std::size_t users) {
    CoeffSet c;
    c.order = order;
    c.indices = enumerate(order);
    c.w.assign(users, std::vector<Complex3>(c.indices.size(), Complex3::Zero()));
    return c;
  }

  std::size_t users() const noexcept { return w.size(); }
  std::size_t terms() const noexcept { return indices.size(); }

  Eigen::VectorXcd stacked(std::size_t k) const {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(3 * terms()));
    for (std::size_t n = 0; n < terms(); ++n) v.segment<3>(static_cast<Eigen::Index>(3 * n)) = w[k][n];
    return v;
  }

  void set_stacked(std::size_t k, const Eigen::VectorXcd& v) {
    if (static_cast<std::size_t>(v.size()) != 3 * terms()) {
      throw ContractViolation("CoeffSet::set_stacked: length mismatch");
    }
    for (std::size_t n = 0; n < terms(); ++n) w[k][n] = v.segment<3>(static_cast<Eigen::Index>(3 * n));
  }

  /// Sum of squared coefficient norms; equals the transmit power of the
  /// synthesized patterns.
  double power() const {
    double p = 0.0;
    for (const auto& user : w)
      for (const auto& c : user) p += c.squaredNorm();
    return p;
  }
};

namespace detail {

inline void check_grid_samples(std::size_t got, const QuadratureGrid& grid, const char* who) {
  if (got != grid.size()) {
    throw ContractViolation(std::string(who) + ": expected " + std::to_string(grid.size()) +
                            " samples, got " + std::to_string(got));
  }
}

}  // namespace detail

inline ChannelSpectrum channel_spectrum(const std::vector<ChannelSamples>& channels,
                                        const QuadratureGrid& grid, const TruncationOrder& order) {
  ChannelSpectrum spec;
  spec.order = order;
  spec.indices = enumerate(order);
  const Eigen::MatrixXcd psi = basis_table(grid, spec.indices);
  const auto is = static_cast<Eigen::Index>(grid.size());
  spec.omega.resize(channels.size());
  for (std::size_t k = 0; k < channels.size(); ++k) {
    detail::check_grid_samples(channels[k].size(), grid, "channel_spectrum");
    Eigen::MatrixXcd g(9, is);
    for (Eigen::Index i = 0; i < is; ++i) {
      const auto& gi = channels[k][static_cast<std::size_t>(i)];
      g.col(i) = grid.weights[static_cast<std::size_t>(i)] *
                 Eigen::Map<const Eigen::Matrix<cplx, 9, 1>>(gi.data());
    }
    const Eigen::MatrixXcd om = g * psi;  // 9 x N_F, column-major 3x3 blocks
    spec.omega[k].resize(spec.indices.size());
    for (std::size_t n = 0; n < spec.indices.size(); ++n) {
      spec.omega[k][n] = Eigen::Map<const ComplexMat3>(om.col(static_cast<Eigen::Index>(n)).data());
    }
  }
  return spec;
}

inline CoeffSet pattern_coeffs(const PatternSet& theta, const QuadratureGrid& grid,
                               const TruncationOrder& order) {
  CoeffSet out = CoeffSet::zeros(order, theta.size());
  const Eigen::MatrixXcd psi = basis_table(grid, out.indices);
  const auto is = static_cast<Eigen::Index>(grid.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    detail::check_grid_samples(theta[k].size(), grid, "pattern_coeffs");
    Eigen::MatrixXcd t(3, is);
    for (Eigen::Index i = 0; i < is; ++i) {
      t.col(i) = grid.weights[static_cast<std::size_t>(i)] * theta[k][static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXcd w = t * psi.conjugate();
    for (std::size_t n = 0; n < out.terms(); ++n) out.w[k][n] = w.col(static_cast<Eigen::Index>(n));
  }
  return out;
}

inline PatternSet synthesize_pattern(const CoeffSet& coeffs, const QuadratureGrid& grid) {
  const Eigen::MatrixXcd psi = basis_table(grid, coeffs.indices);
  PatternSet out(coeffs.users());
  for (std::size_t k = 0; k < coeffs.users(); ++k) {
    Eigen::MatrixXcd w(3, static_cast<Eigen::Index>(coeffs.terms()));
    for (std::size_t n = 0; n < coeffs.terms(); ++n) w.col(static_cast<Eigen::Index>(n)) = coeffs.w[k][n];
    const Eigen::MatrixXcd t = w * psi.transpose();  // 3 x I_s
    out[k].resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[k][i] = t.col(static_cast<Eigen::Index>(i));
  }
  return out;
}

/// Fraction of user k's spectral energy captured by `order`, measured
/// against the (larger) order the spectrum was computed at.
inline double energy_ratio_eta(const ChannelSpectrum& reference, const TruncationOrder& order,
                               std::size_t k = 0) {
  if (!reference.order.covers(order)) {
    throw ContractViolation("energy_ratio_eta: reference order must cover the truncation order");
  }
  double inside = 0.0;
  double total = 0.0;
  for (std::size_t n = 0; n < reference.terms(); ++n) {
    const double e = reference.omega[k][n].squaredNorm();
    total += e;
    if (reference.indices[n].within(order)) inside += e;
  }
  if (!(total > 0.0)) {
    throw DegenerateChannelError("energy_ratio_eta: channel spectrum has zero energy");
  }
  return std::clamp(inside / total, 0.0, 1.0);
}

}  // namespace capmimo
