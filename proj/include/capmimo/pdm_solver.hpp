#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "capmimo/metrics.hpp"
#include "capmimo/wavenumber.hpp"

namespace capmimo {

struct SolverConfig {
  std::size_t max_iters = 500;
  double rel_tol = 1e-5;
  double zeta_tol = 1e-12;
  std::uint64_t seed = 1;
  TruncationOrder order{4, 4, 0};
  /// Drop every inter-user interference term (upper-bound relaxation).
  bool interference_free = false;

  void validate() const {
    if (max_iters < 1) throw ConfigError("SolverConfig: max_iters must be >= 1");
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("SolverConfig: rel_tol must be in (0,1)");
    if (!(zeta_tol > 0.0 && zeta_tol < 1.0)) throw ConfigError("SolverConfig: zeta_tol must be in (0,1)");
  }
};

struct TraceEntry {
  double rate = 0.0;       // bits/s/Hz
  double surrogate = 0.0;  // weighted-MSE objective
  double power = 0.0;      // A^2
};

/// Output of the generic block-coordinate loop on discrete channels
/// H_k (3 x D): precoders w_k (length D), combiners psi_k, weights rho_k.
struct BcdOutcome {
  std::vector<Eigen::VectorXcd> w;
  std::vector<Complex3> psi;
  Eigen::VectorXd rho;
  std::vector<TraceEntry> trace;
  std::size_t iterations = 0;
  double zeta = 0.0;
  bool converged = false;

  double rate() const { return trace.empty() ? 0.0 : trace.back().rate; }
};

inline FieldMatrix fields_from_coeffs(const std::vector<Eigen::MatrixXcd>& H,
                                      const std::vector<Eigen::VectorXcd>& w) {
  FieldMatrix f(H.size(), std::vector<Complex3>(w.size()));
  for (std::size_t k = 0; k < H.size(); ++k)
    for (std::size_t j = 0; j < w.size(); ++j) f[k][j] = H[k] * w[j];
  return f;
}

inline Eigen::VectorXd all_mse(const FieldMatrix& fields, const std::vector<Complex3>& psi,
                               double sigma2, bool interference_free) {
  Eigen::VectorXd e(static_cast<Eigen::Index>(fields.size()));
  for (std::size_t k = 0; k < fields.size(); ++k)
    e(static_cast<Eigen::Index>(k)) = mse(fields, psi[k], k, sigma2, interference_free);
  return e;
}

inline Eigen::VectorXd update_rho(const Eigen::VectorXd& E) {
  if ((E.array() <= 0.0).any()) throw std::domain_error("update_rho: MSE must be positive");
  return E.cwiseInverse();
}

/// MMSE combiners psi_k = A_k^-1 alpha_k.
inline std::vector<Complex3> update_psi(const FieldMatrix& fields, double sigma2,
                                        bool interference_free = false) {
  std::vector<Complex3> psi(fields.size());
  for (std::size_t k = 0; k < fields.size(); ++k) {
    ComplexMat3 a = sigma2 * ComplexMat3::Identity();
    for (std::size_t j = 0; j < fields[k].size(); ++j) {
      if (interference_free && j != k) continue;
      a += fields[k][j] * fields[k][j].adjoint();
    }
    a = 0.5 * (a + a.adjoint());
    psi[k] = a.ldlt().solve(fields[k][k]);
  }
  return psi;
}

/// Closed-form family w_k(zeta) = rho_k (sum_j rho_j h_j h_j^H + zeta I)^-1 h_k,
/// evaluated through the K x K matrix S = R^1/2 (H^H H) R^1/2 = V L V^H
/// instead of the D x D system. Zero modes of S are dropped, which gives
/// the minimum-norm solution at zeta = 0.
class PrecoderFamily {
 public:
  PrecoderFamily(const std::vector<Eigen::VectorXcd>& h, const Eigen::VectorXd& rho,
                 bool interference_free) {
    const auto K = static_cast<Eigen::Index>(h.size());
    if (K == 0 || rho.size() != K) throw ContractViolation("PrecoderFamily: size mismatch");
    const Eigen::Index D = h[0].size();
    hmat_.resize(D, K);
    for (Eigen::Index k = 0; k < K; ++k) hmat_.col(k) = h[static_cast<std::size_t>(k)];
    sqrt_rho_ = rho.cwiseSqrt();
    Eigen::MatrixXcd g = hmat_.adjoint() * hmat_;
    if (interference_free) g = Eigen::MatrixXcd(g.diagonal().asDiagonal());
    const Eigen::MatrixXcd s = sqrt_rho_.asDiagonal() * g * sqrt_rho_.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (s + s.adjoint()));
    if (eig.info() != Eigen::Success) throw NumericalError("PrecoderFamily: eigensolver failed", 0);
    lambda_ = eig.eigenvalues();
    v_ = eig.eigenvectors();
    const double lmax = lambda_.size() ? lambda_.maxCoeff() : 0.0;
    active_.assign(static_cast<std::size_t>(K), false);
    weight_.setZero(K);
    for (Eigen::Index i = 0; i < K; ++i) {
      active_[static_cast<std::size_t>(i)] = lmax > 0.0 && lambda_(i) > 1e-13 * lmax;
      weight_(i) = (v_.col(i).cwiseAbs2().array() * rho.array()).sum();
    }
  }

  bool degenerate() const {
    return std::none_of(active_.begin(), active_.end(), [](bool a) { return a; });
  }

  double power(double zeta) const {
    double p = 0.0;
    for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
      if (!active_[static_cast<std::size_t>(i)]) continue;
      const double d = lambda_(i) + zeta;
      p += lambda_(i) * weight_(i) / (d * d);
    }
    return p;
  }

  std::vector<Eigen::VectorXcd> precoders(double zeta) const {
    const auto K = lambda_.size();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(K);
    for (Eigen::Index i = 0; i < K; ++i)
      if (active_[static_cast<std::size_t>(i)]) f(i) = 1.0 / (lambda_(i) + zeta);
    const Eigen::MatrixXcd core =
        v_ * f.asDiagonal() * v_.adjoint() * sqrt_rho_.asDiagonal();
    const Eigen::MatrixXcd w = hmat_ * sqrt_rho_.asDiagonal() * core;
    std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(K));
    for (Eigen::Index k = 0; k < K; ++k) out[static_cast<std::size_t>(k)] = w.col(k);
    return out;
  }

 private:
  Eigen::MatrixXcd hmat_;
  Eigen::VectorXd sqrt_rho_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXcd v_;
  Eigen::VectorXd weight_;
  std::vector<bool> active_;
};

/// Smallest zeta >= 0 whose precoders fit the power budget. Returns the
/// feasible end of the final bisection bracket.
inline double find_zeta(const PrecoderFamily& family, double P_T, double zeta_tol) {
  if (!(P_T > 0.0)) throw ConfigError("find_zeta: P_T must be positive");
  if (family.power(0.0) <= P_T) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && family.power(hi) > P_T; ++i) {
    lo = hi;
    hi *= 2.0;
  }
  if (family.power(hi) > P_T) throw NumericalError("find_zeta: could not bracket multiplier", 0);
  for (int i = 0; i < 400; ++i) {
    if (P_T - family.power(hi) <= zeta_tol * P_T) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (family.power(mid) > P_T) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

inline double find_zeta(const std::vector<Eigen::VectorXcd>& h, const Eigen::VectorXd& rho,
                        double P_T, double zeta_tol, bool interference_free = false) {
  return find_zeta(PrecoderFamily(h, rho, interference_free), P_T, zeta_tol);
}

struct WUpdate {
  std::vector<Eigen::VectorXcd> w;
  double zeta = 0.0;
};

/// Power-constrained maximizer of the surrogate over the precoders, with
/// h_k = H_k^H psi_k.
inline WUpdate update_w(const std::vector<Eigen::MatrixXcd>& H, const std::vector<Complex3>& psi,
                        const Eigen::VectorXd& rho, double P_T, double zeta_tol,
                        bool interference_free = false) {
  std::vector<Eigen::VectorXcd> h(H.size());
  for (std::size_t k = 0; k < H.size(); ++k) h[k] = H[k].adjoint() * psi[k];
  const PrecoderFamily family(h, rho, interference_free);
  WUpdate out;
  if (family.degenerate()) {
    out.w.assign(H.size(), Eigen::VectorXcd::Zero(H.empty() ? 0 : H[0].cols()));
    return out;
  }
  out.zeta = find_zeta(family, P_T, zeta_tol);
  out.w = family.precoders(out.zeta);
  return out;
}

namespace detail {

inline cplx complex_gaussian(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline bool finite_fields(const FieldMatrix& f) {
  for (const auto& row : f)
    for (const auto& v : row)
      if (!v.allFinite()) return false;
  return true;
}

}  // namespace detail

/// Block-coordinate ascent of the weighted-MSE surrogate on discrete
/// channels. Shared by the wavenumber-domain solver and the patch-array
/// baseline.
inline BcdOutcome run_bcd(const std::vector<Eigen::MatrixXcd>& H, const LinkBudget& budget,
                          const SolverConfig& config) {
  config.validate();
  budget.validate();
  if (H.empty()) throw ContractViolation("run_bcd: need at least one user");
  const Eigen::Index D = H[0].cols();
  for (const auto& h : H)
    if (h.rows() != 3 || h.cols() != D) throw ContractViolation("run_bcd: inconsistent channel sizes");
  const std::size_t K = H.size();
  const bool ifree = config.interference_free;

  std::mt19937_64 rng(config.seed);
  BcdOutcome out;
  out.w.assign(K, Eigen::VectorXcd(D));
  for (auto& wk : out.w)
    for (Eigen::Index d = 0; d < D; ++d) wk(d) = detail::complex_gaussian(rng);
  out.psi.assign(K, Complex3::Zero());
  for (auto& p : out.psi)
    for (int c = 0; c < 3; ++c) p(c) = detail::complex_gaussian(rng);
  double p0 = 0.0;
  for (const auto& wk : out.w) p0 += wk.squaredNorm();
  const double s0 = std::sqrt(budget.P_T / p0);
  for (auto& wk : out.w) wk *= s0;

  auto total_power = [&]() {
    double p = 0.0;
    for (const auto& wk : out.w) p += wk.squaredNorm();
    return p;
  };

  FieldMatrix fields = fields_from_coeffs(H, out.w);
  Eigen::VectorXd E = all_mse(fields, out.psi, budget.sigma2, ifree);
  out.rho = update_rho(E);
  double rate = sum_rate(fields, budget.sigma2, ifree);
  out.trace.push_back({rate, surrogate_rate(out.rho, E), total_power()});

  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    out.rho = update_rho(E);
    out.psi = update_psi(fields, budget.sigma2, ifree);
    WUpdate wu = update_w(H, out.psi, out.rho, budget.P_T, config.zeta_tol, ifree);
    out.w = std::move(wu.w);
    out.zeta = wu.zeta;
    fields = fields_from_coeffs(H, out.w);
    if (!detail::finite_fields(fields)) throw NumericalError("run_bcd: non-finite field", it);
    E = all_mse(fields, out.psi, budget.sigma2, ifree);
    const double next = sum_rate(fields, budget.sigma2, ifree);
    const double sur = surrogate_rate(out.rho, E);
    if (!std::isfinite(next) || !std::isfinite(sur)) throw NumericalError("run_bcd: non-finite objective", it);
    out.trace.push_back({next, sur, total_power()});
    out.iterations = it;
    const bool done = std::abs(next - rate) / std::max(rate, 1e-12) < config.rel_tol;
    rate = next;
    if (done) {
      out.converged = true;
      break;
    }
  }
  return out;
}

struct SolveResult {
  PatternSet patterns;
  std::vector<Complex3> combiners;
  CoeffSet coeffs;
  std::vector<TraceEntry> trace;
  std::size_t iterations = 0;
  bool converged = false;
  double sum_rate = 0.0;
  double power = 0.0;
};

/// Wavenumber-domain pattern design: optimizes the retained Fourier
/// coefficients of every user's pattern and synthesizes the patterns on
/// `grid` at the end.
inline SolveResult run_pdm(const ChannelSpectrum& spectrum, const QuadratureGrid& grid,
                           const LinkBudget& budget, const SolverConfig& config) {
  if (spectrum.order != config.order) throw ContractViolation("run_pdm: spectrum order differs from config");
  std::vector<Eigen::MatrixXcd> H(spectrum.users());
  for (std::size_t k = 0; k < H.size(); ++k) H[k] = spectrum.stacked(k);
  BcdOutcome bcd = run_bcd(H, budget, config);

  SolveResult out;
  out.coeffs = CoeffSet::zeros(spectrum.order, spectrum.users());
  for (std::size_t k = 0; k < H.size(); ++k) out.coeffs.set_stacked(k, bcd.w[k]);
  out.patterns = synthesize_pattern(out.coeffs, grid);
  out.combiners = std::move(bcd.psi);
  out.trace = std::move(bcd.trace);
  out.iterations = bcd.iterations;
  out.converged = bcd.converged;
  out.sum_rate = out.trace.back().rate;
  out.power = out.coeffs.power();
  return out;
}

}  // namespace capmimo
