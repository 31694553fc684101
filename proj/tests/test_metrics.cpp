#include "catch_amalgamated.hpp"
#include "support.hpp"

using namespace capmimo;
using namespace testing_support;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Fixture {
  Scenario sc = small_scenario(4, 16);
  QuadratureGrid grid = build_grid(sc.aperture, sc.grid_n, sc.grid_n);
  std::vector<ChannelSamples> ch = channel_samples(sc.users, grid, sc.wave);
  TruncationOrder order{4, 4, 0};

  PatternSet random_patterns(std::mt19937_64& rng, double power) const {
    CoeffSet c = random_coeffs(rng, order, ch.size());
    const double s = std::sqrt(power / c.power());
    for (auto& u : c.w)
      for (auto& w : u) w *= s;
    return synthesize_pattern(c, grid);
  }
};

}  // namespace

TEST_CASE("link budget converts mA^2", "[metrics]") {
  const LinkBudget b = LinkBudget::from_ma2(100.0, 5.6e-3);
  CHECK_THAT(b.P_T, WithinRel(1e-4, 1e-15));
  CHECK_THAT(b.pt_ma2(), WithinRel(100.0, 1e-15));
  CHECK_THROWS_AS(LinkBudget::from_ma2(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(LinkBudget::from_ma2(1.0, -1.0), ConfigError);
}

TEST_CASE("transmit power and fields", "[metrics]") {
  Fixture f;
  PatternSet zero(2, PatternField(f.grid.size(), Complex3::Zero()));
  CHECK(transmit_power(zero, f.grid) == 0.0);
  CHECK(field_at_user(f.ch[0], zero[0], f.grid).norm() == 0.0);

  const Complex3 v(1.0, cplx(0, 2), -1.0);
  PatternSet flat(1, PatternField(f.grid.size(), v / std::sqrt(f.sc.aperture.area())));
  CHECK_THAT(transmit_power(flat, f.grid), WithinRel(v.squaredNorm(), 1e-13));

  std::mt19937_64 rng(4);
  const PatternSet a = f.random_patterns(rng, 1.0);
  const PatternSet b = f.random_patterns(rng, 1.0);
  const cplx ca(0.3, -1.2), cb(-2.0, 0.5);
  PatternField mix(f.grid.size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = ca * a[0][i] + cb * b[0][i];
  const Complex3 lhs = field_at_user(f.ch[1], mix, f.grid);
  const Complex3 rhs = ca * field_at_user(f.ch[1], a[0], f.grid) + cb * field_at_user(f.ch[1], b[0], f.grid);
  CHECK((lhs - rhs).norm() <= 1e-12 * lhs.norm());
}

TEST_CASE("interference covariance is Hermitian and noise-loaded", "[metrics]") {
  Fixture f;
  std::mt19937_64 rng(8);
  const PatternSet theta = f.random_patterns(rng, 1e-4);
  const FieldMatrix fields = user_fields(f.ch, theta, f.grid);
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const ComplexMat3 J = interference_matrix(fields, k, f.sc.budget.sigma2);
    CHECK((J - J.adjoint()).norm() <= 1e-14 * J.norm());
    Eigen::SelfAdjointEigenSolver<ComplexMat3> e(J - f.sc.budget.sigma2 * ComplexMat3::Identity());
    CHECK(e.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, J.norm()));
  }
  FieldMatrix single{{Complex3(1.0, 2.0, 3.0)}};
  CHECK((interference_matrix(single, 0, 0.5) - 0.5 * ComplexMat3::Identity()).norm() == 0.0);
}

TEST_CASE("rank-one determinant identity", "[metrics][property]") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 200; ++t) {
    const Complex3 a = random_c3(rng);
    ComplexMat3 B;
    for (int i = 0; i < 9; ++i) B.data()[i] = cgauss(rng);
    const ComplexMat3 J = B * B.adjoint() + 0.01 * ComplexMat3::Identity();
    CHECK_THAT(user_rate(a, J), WithinAbs(user_rate_logdet(a, J), 1e-10));
  }
}

TEST_CASE("sum rate special cases and invariances", "[metrics]") {
  Fixture f;
  PatternSet zero(f.ch.size(), PatternField(f.grid.size(), Complex3::Zero()));
  CHECK(sum_rate(zero, f.ch, f.grid, f.sc.budget) == 0.0);

  std::mt19937_64 rng(21);
  const PatternSet one = f.random_patterns(rng, 1e-4);
  const std::vector<ChannelSamples> ch1{f.ch[0]};
  const PatternSet theta1{one[0]};
  const Complex3 alpha = field_at_user(f.ch[0], one[0], f.grid);
  CHECK_THAT(sum_rate(theta1, ch1, f.grid, f.sc.budget),
             WithinRel(std::log2(1.0 + alpha.squaredNorm() / f.sc.budget.sigma2), 1e-12));

  const PatternSet theta = f.random_patterns(rng, 1e-4);
  const double base = sum_rate(theta, f.ch, f.grid, f.sc.budget);
  for (double c : {0.1, 3.0, 250.0}) {
    PatternSet scaled = theta;
    for (auto& p : scaled)
      for (auto& v : p) v *= c;
    LinkBudget b = f.sc.budget;
    b.sigma2 *= c * c;
    CHECK_THAT(sum_rate(scaled, f.ch, f.grid, b), WithinRel(base, 1e-10));
  }
  for (int t = 0; t < 20; ++t) {
    const PatternSet p = f.random_patterns(rng, 1e-3);
    CHECK(sum_rate(p, f.ch, f.grid, f.sc.budget, true) >= sum_rate(p, f.ch, f.grid, f.sc.budget));
  }
}

TEST_CASE("mse and surrogate", "[metrics]") {
  Fixture f;
  std::mt19937_64 rng(31);
  const PatternSet theta = f.random_patterns(rng, 1e-4);
  const double s2 = f.sc.budget.sigma2;
  const FieldMatrix fields = user_fields(f.ch, theta, f.grid);
  CHECK_THAT(mse(fields, Complex3::Zero(), 1, s2), WithinAbs(1.0, 1e-15));
  PatternSet zero(f.ch.size(), PatternField(f.grid.size(), Complex3::Zero()));
  const Complex3 psi = random_c3(rng);
  CHECK_THAT(mse(user_fields(f.ch, zero, f.grid), psi, 2, s2), WithinRel(1.0 + s2 * psi.squaredNorm(), 1e-14));
  CHECK_THAT(mse(theta, psi, f.ch, f.grid, s2, 2), WithinRel(mse(fields, psi, 2, s2), 1e-14));

  // the MMSE combiner beats random perturbations
  const auto opt = update_psi(fields, s2);
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const double e0 = mse(fields, opt[k], k, s2);
    CHECK(e0 >= 0.0);
    for (int t = 0; t < 1000; ++t) {
      const Complex3 d = 1e-2 * opt[k].norm() * random_c3(rng);
      CHECK(mse(fields, opt[k] + d, k, s2) >= e0);
    }
  }

  Eigen::VectorXd rho(1), E(1);
  rho << 1.0;
  E << 1.0;
  CHECK_THAT(surrogate_rate(rho, E), WithinAbs(0.0, 1e-15));
  Eigen::VectorXd E3(3);
  E3 << 0.2, 0.5, 0.9;
  const Eigen::VectorXd r3 = E3.cwiseInverse();
  CHECK_THAT(surrogate_rate(r3, E3), WithinRel(-(E3.array().log() / std::log(2.0)).sum(), 1e-14));
  Eigen::VectorXd bad(1);
  bad << 0.0;
  CHECK_THROWS_AS(surrogate_rate(bad, E), std::domain_error);
}

TEST_CASE("snr loss bound formula", "[metrics]") {
  const LinkBudget b = LinkBudget::from_ma2(100.0, 5.6e-3);
  CHECK(snr_loss_bound(1.0, 2.0, b) == 0.0);
  CHECK_THAT(snr_loss_bound(0.0, 2.0, b), WithinRel(b.P_T / b.sigma2 * 2.0, 1e-15));
  CHECK_THROWS_AS(snr_loss_bound(0.5, 0.0, b), DegenerateChannelError);
}
