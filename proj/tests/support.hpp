#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "capmimo/capmimo.hpp"

namespace testing_support {

using namespace capmimo;

inline cplx cgauss(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline Complex3 random_c3(std::mt19937_64& rng) { return {cgauss(rng), cgauss(rng), cgauss(rng)}; }

inline Eigen::MatrixXcd random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = cgauss(rng);
  return a + a.adjoint();
}

/// Random coefficients inside `order` for K users.
inline CoeffSet random_coeffs(std::mt19937_64& rng, const TruncationOrder& order, std::size_t K) {
  CoeffSet c = CoeffSet::zeros(order, K);
  for (auto& user : c.w)
    for (auto& w : user) w = random_c3(rng);
  return c;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Default geometry, coarser grid, fewer users; fast enough for unit tests.
inline Scenario small_scenario(std::size_t K = 4, std::size_t grid_n = 16) {
  Scenario sc = default_scenario();
  sc.users.resize(K);
  sc.grid_n = grid_n;
  return sc;
}

}  // namespace testing_support
