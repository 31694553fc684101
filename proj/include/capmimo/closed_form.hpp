#pragma once

#include <cmath>
#include <cstddef>

#include "capmimo/em_core.hpp"
#include "capmimo/hermitian_eigen.hpp"
#include "capmimo/metrics.hpp"
#include "capmimo/wavenumber.hpp"

namespace capmimo {

/// Integral of G(s) G(s)^H over the aperture, made exactly Hermitian.
inline ComplexMat3 gram_matrix(const ChannelSamples& g, const QuadratureGrid& grid) {
  detail::check_grid_samples(g.size(), grid, "gram_matrix");
  ComplexMat3 m = ComplexMat3::Zero();
  for (std::size_t i = 0; i < grid.size(); ++i) m += grid.weights[i] * (g[i] * g[i].adjoint());
  return 0.5 * (m + m.adjoint());
}

struct SingleUserOptimum {
  PatternField theta;
  Complex3 psi = Complex3::Zero();
  double lambda_max = 0.0;
  double gamma_opt = 0.0;
  std::size_t multiplicity = 1;

  double rate() const { return std::log2(1.0 + gamma_opt); }
};

/// Optimal single-user pattern: combine along the top eigenvector of the
/// Gram matrix and transmit the matched pattern at full power.
inline SingleUserOptimum single_user_optimum(const ChannelSamples& g, const QuadratureGrid& grid,
                                             const LinkBudget& budget) {
  const ComplexMat3 m = gram_matrix(g, grid);
  if (!(m.trace().real() > 0.0)) {
    throw DegenerateChannelError("single_user_optimum: zero channel");
  }
  const TopEigenpair top = top_eigenpair(m);
  SingleUserOptimum out;
  out.psi = top.vector;
  out.lambda_max = top.value;
  out.multiplicity = top.multiplicity;
  out.gamma_opt = budget.P_T / budget.sigma2 * top.value;

  out.theta.resize(grid.size());
  double norm2 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.theta[i] = g[i].adjoint() * out.psi;
    norm2 += grid.weights[i] * out.theta[i].squaredNorm();
  }
  if (!(norm2 > 0.0)) throw DegenerateChannelError("single_user_optimum: matched pattern vanishes");
  const double scale = std::sqrt(budget.P_T / norm2);
  for (auto& t : out.theta) t *= scale;
  return out;
}

/// SNR of a single user whose pattern is represented only by the retained
/// coefficients w (user 0 of both sets).
inline double truncated_snr(const CoeffSet& w, const ChannelSpectrum& omega, double sigma2) {
  if (w.order != omega.order) throw ContractViolation("truncated_snr: order mismatch");
  Complex3 e = Complex3::Zero();
  for (std::size_t n = 0; n < omega.terms(); ++n) e += omega.omega[0][n] * w.w[0][n];
  return e.squaredNorm() / sigma2;
}

}  // namespace capmimo
