#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "capmimo/types.hpp"

namespace capmimo {

/// Eigen-decomposition of a Hermitian matrix. Values are sorted in
/// descending order; column i of `vectors` pairs with values(i).
struct HermitianEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

namespace detail {

inline double offdiag_norm2(const Eigen::MatrixXcd& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) s += std::norm(a(i, j));
    }
  }
  return s;
}

/// Rotate the phase so the first component with non-negligible magnitude is
/// real and positive.
inline void fix_phase(Eigen::Ref<Eigen::VectorXcd> v, double tiny = 1e-14) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    if (m > tiny) {
      v *= std::conj(v(i)) / m;
      v(i) = cplx(m, 0.0);
      return;
    }
  }
}

}  // namespace detail

/// Cyclic complex Jacobi. Each rotation first makes a_pq real with a diagonal
/// phase, then applies the real two-sided rotation that zeroes it.
inline HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& input, double tol = 1e-15,
                                      int max_sweeps = 100) {
  const Eigen::Index n = input.rows();
  if (n == 0 || input.cols() != n) {
    throw ContractViolation("hermitian_eigen: matrix must be square and nonempty");
  }
  if (!input.allFinite()) {
    throw NumericalError("hermitian_eigen: non-finite input", 0);
  }
  Eigen::MatrixXcd a = 0.5 * (input + input.adjoint());
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(n, n);
  const double scale2 = std::max(a.squaredNorm(), 1e-300);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (detail::offdiag_norm2(a) <= tol * tol * scale2) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = std::abs(a(p, q));
        if (apq * apq <= 1e-300 * scale2 || apq == 0.0) continue;
        const cplx phase = a(p, q) / apq;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // U restricted to (p,q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
        const cplx upp = c;
        const cplx upq = s;
        const cplx uqp = -s * std::conj(phase);
        const cplx uqq = c * std::conj(phase);
        for (Eigen::Index i = 0; i < n; ++i) {
          const cplx x = a(i, p);
          const cplx y = a(i, q);
          a(i, p) = x * upp + y * uqp;
          a(i, q) = x * upq + y * uqq;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
          const cplx x = a(p, j);
          const cplx y = a(q, j);
          a(p, j) = std::conj(upp) * x + std::conj(uqp) * y;
          a(q, j) = std::conj(upq) * x + std::conj(uqq) * y;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const cplx x = v(i, p);
          const cplx y = v(i, q);
          v(i, p) = x * upp + y * uqp;
          v(i, q) = x * upq + y * uqq;
        }
      }
    }
  }

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });
  HermitianEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(k)]).real();
    out.vectors.col(k) = v.col(idx[static_cast<std::size_t>(k)]);
    out.vectors.col(k).normalize();
    detail::fix_phase(out.vectors.col(k));
  }
  return out;
}

/// Largest eigenvalue and a unit eigenvector. When the top eigenvalue is
/// repeated (within rel_gap of its magnitude) the candidate whose component
/// magnitudes are lexicographically largest wins; its first nonzero
/// component is then made real-positive.
struct TopEigenpair {
  double value = 0.0;
  Eigen::VectorXcd vector;
  std::size_t multiplicity = 1;
};

inline TopEigenpair top_eigenpair(const Eigen::MatrixXcd& m, double rel_gap = 1e-10) {
  const HermitianEigen eig = hermitian_eigen(m);
  TopEigenpair out;
  out.value = eig.values(0);
  const double thresh = rel_gap * std::max(std::abs(out.value), 1e-300);
  Eigen::Index best = 0;
  std::size_t mult = 1;
  for (Eigen::Index k = 1; k < eig.values.size(); ++k) {
    if (out.value - eig.values(k) > thresh) break;
    ++mult;
    const auto& cand = eig.vectors.col(k);
    const auto& cur = eig.vectors.col(best);
    for (Eigen::Index i = 0; i < cand.size(); ++i) {
      const double dc = std::abs(cand(i)) - std::abs(cur(i));
      if (std::abs(dc) <= 1e-12) continue;
      if (dc > 0) best = k;
      break;
    }
  }
  out.vector = eig.vectors.col(best);
  detail::fix_phase(out.vector);
  out.multiplicity = mult;
  return out;
}

}  // namespace capmimo
