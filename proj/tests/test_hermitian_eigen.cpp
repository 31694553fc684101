#include "catch_amalgamated.hpp"
#include "support.hpp"

using namespace capmimo;
using namespace testing_support;

TEST_CASE("Jacobi agrees with Eigen's self-adjoint solver", "[eigen][oracle]") {
  std::mt19937_64 rng(3);
  for (Eigen::Index n : {1, 2, 3, 5, 8}) {
    for (int t = 0; t < 50; ++t) {
      const Eigen::MatrixXcd a = random_hermitian(rng, n);
      const HermitianEigen mine = hermitian_eigen(a);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(a);
      const Eigen::VectorXd ref_desc = ref.eigenvalues().reverse();
      const double scale = a.norm();
      CHECK((mine.values - ref_desc).norm() <= 1e-12 * scale);
      for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::VectorXcd v = mine.vectors.col(k);
        CHECK(std::abs(v.norm() - 1.0) < 1e-12);
        CHECK((a * v - mine.values(k) * v).norm() <= 1e-11 * scale);
      }
      CHECK((mine.vectors.adjoint() * mine.vectors - Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-12);
    }
  }
}

TEST_CASE("top eigenpair residual and phase convention", "[eigen]") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    Eigen::MatrixXcd b(3, 3);
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) b(i, j) = cgauss(rng);
    const Eigen::MatrixXcd m = b * b.adjoint();
    const TopEigenpair top = top_eigenpair(m);
    CHECK((m * top.vector - top.value * top.vector).norm() <= 1e-10 * top.value);
    // first non-negligible component is real and positive
    for (Eigen::Index i = 0; i < 3; ++i) {
      if (std::abs(top.vector(i)) > 1e-14) {
        CHECK(top.vector(i).imag() == 0.0);
        CHECK(top.vector(i).real() > 0.0);
        break;
      }
    }
  }
}

TEST_CASE("degenerate top eigenspace is resolved deterministically", "[eigen]") {
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(3, 3) * 2.0;
  const TopEigenpair a = top_eigenpair(id);
  const TopEigenpair b = top_eigenpair(id);
  CHECK(a.multiplicity == 3);
  CHECK(a.value == 2.0);
  CHECK((a.vector - b.vector).norm() == 0.0);
  CHECK(std::abs(a.vector.norm() - 1.0) < 1e-14);

  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 5.0;
  d(2, 2) = 5.0;
  const TopEigenpair t = top_eigenpair(d);
  CHECK(t.multiplicity == 2);
  CHECK(t.value == 5.0);
  CHECK(std::abs(t.vector(0)) < 1e-14);
  // e_y and e_z tie; lexicographic order on magnitudes picks e_y
  CHECK(std::abs(t.vector(1) - cplx(1.0, 0.0)) < 1e-14);
}

TEST_CASE("invalid input is rejected", "[eigen]") {
  CHECK_THROWS_AS(hermitian_eigen(Eigen::MatrixXcd(2, 3)), ContractViolation);
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2);
  bad(0, 1) = cplx(NAN, 0.0);
  CHECK_THROWS_AS(hermitian_eigen(bad), NumericalError);
}
