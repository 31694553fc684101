#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "capmimo/em_core.hpp"
#include "capmimo/wavenumber.hpp"

namespace capmimo {

inline constexpr double kMilliAmp2 = 1e-6;  // 1 mA^2 in A^2

/// Transmit power budget (A^2) and receiver noise power (V^2/m^2).
struct LinkBudget {
  double P_T = 100.0 * kMilliAmp2;
  double sigma2 = 5.6e-3;

  static LinkBudget from_ma2(double pt_ma2, double sigma2_v2m2) {
    LinkBudget b{pt_ma2 * kMilliAmp2, sigma2_v2m2};
    b.validate();
    return b;
  }
  double pt_ma2() const noexcept { return P_T / kMilliAmp2; }
  void validate() const {
    if (!(P_T > 0.0) || !std::isfinite(P_T)) throw ConfigError("LinkBudget: P_T must be positive");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
      throw ConfigError("LinkBudget: sigma2 must be positive");
  }
};

/// beta[k][j]: field produced at user k by user j's pattern. The diagonal
/// holds the desired fields alpha_k.
using FieldMatrix = std::vector<std::vector<Complex3>>;

inline double transmit_power(const PatternSet& theta, const QuadratureGrid& grid) {
  double p = 0.0;
  for (const auto& t : theta) {
    detail::check_grid_samples(t.size(), grid, "transmit_power");
    for (std::size_t i = 0; i < grid.size(); ++i) p += grid.weights[i] * t[i].squaredNorm();
  }
  return p;
}

inline Complex3 field_at_user(const ChannelSamples& g, const PatternField& theta,
                              const QuadratureGrid& grid) {
  detail::check_grid_samples(g.size(), grid, "field_at_user");
  detail::check_grid_samples(theta.size(), grid, "field_at_user");
  Complex3 e = Complex3::Zero();
  for (std::size_t i = 0; i < grid.size(); ++i) e += grid.weights[i] * (g[i] * theta[i]);
  return e;
}

inline FieldMatrix user_fields(const std::vector<ChannelSamples>& channels, const PatternSet& theta,
                               const QuadratureGrid& grid) {
  FieldMatrix f(channels.size(), std::vector<Complex3>(theta.size()));
  for (std::size_t k = 0; k < channels.size(); ++k)
    for (std::size_t j = 0; j < theta.size(); ++j) f[k][j] = field_at_user(channels[k], theta[j], grid);
  return f;
}

/// Interference-plus-noise covariance J_k.
inline ComplexMat3 interference_matrix(const FieldMatrix& fields, std::size_t k, double sigma2) {
  ComplexMat3 j = sigma2 * ComplexMat3::Identity();
  for (std::size_t i = 0; i < fields[k].size(); ++i) {
    if (i == k) continue;
    j += fields[k][i] * fields[k][i].adjoint();
  }
  return 0.5 * (j + j.adjoint());
}

/// log2(1 + a^H J^-1 a), the rank-one form of log2 det(I + a a^H J^-1).
inline double user_rate(const Complex3& alpha, const ComplexMat3& J) {
  const Complex3 x = J.ldlt().solve(alpha);
  const double q = std::max(0.0, alpha.dot(x).real());
  return std::log2(1.0 + q);
}

/// Determinant form, kept for cross-checking the rank-one identity.
inline double user_rate_logdet(const Complex3& alpha, const ComplexMat3& J) {
  const ComplexMat3 m = ComplexMat3::Identity() + alpha * alpha.adjoint() * J.inverse();
  return std::log2(std::abs(m.determinant()));
}

/// With interference_free set, every J_k is replaced by sigma2 * I.
inline double sum_rate(const FieldMatrix& fields, double sigma2, bool interference_free = false) {
  double r = 0.0;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const ComplexMat3 J = interference_free ? ComplexMat3(sigma2 * ComplexMat3::Identity())
                                            : interference_matrix(fields, k, sigma2);
    r += user_rate(fields[k][k], J);
  }
  return r;
}

inline double sum_rate(const PatternSet& theta, const std::vector<ChannelSamples>& channels,
                       const QuadratureGrid& grid, const LinkBudget& budget,
                       bool interference_free = false) {
  return sum_rate(user_fields(channels, theta, grid), budget.sigma2, interference_free);
}

/// Mean-square error of user k's decoded symbol under combiner psi.
inline double mse(const FieldMatrix& fields, const Complex3& psi, std::size_t k, double sigma2,
                  bool interference_free = false) {
  double e = std::norm(1.0 - psi.dot(fields[k][k]));
  if (!interference_free) {
    for (std::size_t j = 0; j < fields[k].size(); ++j) {
      if (j != k) e += std::norm(psi.dot(fields[k][j]));
    }
  }
  return e + sigma2 * psi.squaredNorm();
}

inline double mse(const PatternSet& theta, const Complex3& psi, const std::vector<ChannelSamples>& channels,
                  const QuadratureGrid& grid, double sigma2, std::size_t k) {
  std::vector<Complex3> row(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) row[j] = field_at_user(channels[k], theta[j], grid);
  FieldMatrix f(channels.size());
  f[k] = std::move(row);
  return mse(f, psi, k, sigma2);
}

/// Weighted-MSE surrogate of the sum rate.
inline double surrogate_rate(const Eigen::VectorXd& rho, const Eigen::VectorXd& E) {
  if (rho.size() != E.size()) throw ContractViolation("surrogate_rate: size mismatch");
  const double ln2 = std::log(2.0);
  double r = 0.0;
  for (Eigen::Index k = 0; k < rho.size(); ++k) {
    if (!(rho(k) > 0.0)) throw std::domain_error("surrogate_rate: rho must be positive");
    r += std::log2(rho(k)) - rho(k) * E(k) / ln2 + 1.0 / ln2;
  }
  return r;
}

/// Upper bound on the single-user SNR lost by truncating the expansion,
/// given the captured energy fraction eta and the channel energy
/// integral of ||G||_F^2.
inline double snr_loss_bound(double eta, double channel_energy, const LinkBudget& budget) {
  if (!(channel_energy > 0.0)) throw DegenerateChannelError("snr_loss_bound: zero channel energy");
  eta = std::clamp(eta, 0.0, 1.0);
  return budget.P_T / budget.sigma2 * std::sqrt(1.0 - eta) * (1.0 + std::sqrt(eta)) * channel_energy;
}

inline double channel_energy(const ChannelSamples& g, const QuadratureGrid& grid) {
  detail::check_grid_samples(g.size(), grid, "channel_energy");
  double e = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) e += grid.weights[i] * g[i].squaredNorm();
  return e;
}

inline double snr_loss_bound(const ChannelSpectrum& reference, const TruncationOrder& order,
                             const ChannelSamples& g, const QuadratureGrid& grid,
                             const LinkBudget& budget) {
  return snr_loss_bound(energy_ratio_eta(reference, order), channel_energy(g, grid), budget);
}

}  // namespace capmimo
