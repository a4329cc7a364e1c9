#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "egvi/problems.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace egvi;

namespace {

void check_monotone(const FiniteSumOperator& op, double mu, std::uint64_t seed) {
  Rng rng(seed);
  for (int i = 0; i < 100; ++i) {
    const Vector x = rng.normal_vector(op.dim());
    const Vector y = rng.normal_vector(op.dim());
    const double inner = (op.mean(x) - op.mean(y)).dot(x - y);
    CHECK(inner >= mu * (x - y).squaredNorm() - 1e-8);
  }
}

Vector eigenvalues(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly).eigenvalues();
}

}  // namespace

TEST_CASE("quadratic game spectra lie in the requested intervals") {
  QuadraticGameSpec spec;
  spec.n = 20;
  spec.d = 5;
  spec.eig_A = {0.2, 0.9};
  spec.eig_C = {0.3, 0.7};
  const FiniteSumOperator op = make_quadratic_game(spec);
  const auto d = static_cast<Eigen::Index>(spec.d);
  for (const Matrix& M : op.affine_parts()->matrices) {
    const Vector a = eigenvalues(M.topLeftCorner(d, d));
    const Vector c = eigenvalues(M.bottomRightCorner(d, d));
    CHECK(a.minCoeff() >= 0.2 - 1e-10);
    CHECK(a.maxCoeff() <= 0.9 + 1e-10);
    CHECK(c.minCoeff() >= 0.3 - 1e-10);
    CHECK(c.maxCoeff() <= 0.7 + 1e-10);
    const Eigen::JacobiSVD<Matrix> svd(M.topRightCorner(d, d));
    CHECK(svd.singularValues().maxCoeff() <= 1.0 + 1e-10);
    CHECK((M.bottomLeftCorner(d, d) + M.topRightCorner(d, d).transpose()).norm() <= 1e-14);
  }
  CHECK(*op.info().mu == 0.2);
  CHECK((op.mean(*op.info().solution)).norm() <= 1e-8);
  check_monotone(op, 0.2, 1);
}

TEST_CASE("interpolated quadratic game zeroes every component at the solution") {
  QuadraticGameSpec spec;
  spec.n = 30;
  spec.d = 4;
  spec.interpolated = true;
  const FiniteSumOperator op = make_quadratic_game(spec);
  const Vector& xs = *op.info().solution;
  for (std::size_t i = 0; i < op.size(); ++i) CHECK(op.component(i, xs).norm() <= 1e-8);
}

TEST_CASE("bilinear game is monotone with solution at the origin") {
  const FiniteSumOperator op = make_bilinear_game(6, 1);
  CHECK(op.mean(*op.info().solution).norm() <= 1e-8);
  check_monotone(op, 0.0, 2);
}

TEST_CASE("weak Minty scalar family") {
  const FiniteSumOperator op = make_weak_minty_scalar(100, 0);
  const Matrix& M = op.affine_parts()->mean_matrix;
  const double r = std::sqrt(63.0);
  CHECK(M(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(M(1, 1) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(M(0, 1) == doctest::Approx(r).epsilon(1e-12));
  CHECK(M(1, 0) == doctest::Approx(-r).epsilon(1e-12));
  CHECK(spectral_norm(M) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(op.mean(Vector::Zero(2)).norm() == 0.0);
  const Vector x{{1.0, 0.0}};
  const Vector f = op.mean(x);
  CHECK(f.squaredNorm() == doctest::Approx(64.0).epsilon(1e-12));
  CHECK(f.dot(x) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.dot(x) >= -(*op.info().rho) * f.squaredNorm());
}

TEST_CASE("GlobalForsaken operator") {
  const FiniteSumOperator op = make_global_forsaken();
  CHECK(op.mean(Vector::Zero(2)).norm() == 0.0);
  const Vector f = op.mean(Vector::Ones(2));
  CHECK(f[0] == doctest::Approx(1.0 - 2.0 / 21.0).epsilon(1e-14));
  CHECK(f[1] == doctest::Approx(-1.0 - 2.0 / 21.0).epsilon(1e-14));
  const Vector x{{0.3, -1.2}};
  CHECK((op.mean(-x) + op.mean(x)).norm() <= 1e-15);
}

TEST_CASE("cubic min-max problem") {
  const FiniteSumOperator op = make_cubic_minmax(4, 0);
  CHECK(op.mean(Vector::Zero(8)).norm() == 0.0);
  check_monotone(op, 0.0, 3);

  const Matrix one = Matrix::Ones(1, 1);
  const FiniteSumOperator scalar = make_cubic_minmax(one, one, one);
  for (double w1 : {0.0, 0.4, 1.3})
    for (double w2 : {0.0, 0.7, 2.1}) {
      const Vector f = scalar.mean(Vector{{w1, w2}});
      CHECK(f[0] == doctest::Approx(w1 * w1 + w2).epsilon(1e-14));
      CHECK(f[1] == doctest::Approx(w2 * w2 - w1).epsilon(1e-14));
    }
}

TEST_CASE("cubic jacobian matches finite differences") {
  const FiniteSumOperator op = make_cubic_minmax(3, 2);
  const Vector x = Rng(4).normal_vector(6);
  const Matrix J = op.jacobian(x);
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < 6; ++j) {
    Vector e = Vector::Zero(6);
    e[j] = h;
    const Vector col = (op.mean(x + e) - op.mean(x - e)) / (2.0 * h);
    CHECK((col - J.col(j)).norm() <= 1e-6);
  }
}

TEST_CASE("robust least squares") {
  SUBCASE("single row has a positive semidefinite symmetric Jacobian") {
    RlsData data{Matrix::Ones(1, 1), Vector::Zero(1)};
    const FiniteSumOperator op = make_robust_least_squares(data, 2.0);
    const Matrix& J = op.affine_parts()->mean_matrix;
    // Hand derivation: F(beta, y) = (2(beta - y), 2(y - beta) + 2y).
    CHECK(J(0, 0) == doctest::Approx(2.0));
    CHECK(J(0, 1) == doctest::Approx(-2.0));
    CHECK(J(1, 0) == doctest::Approx(2.0));
    CHECK(J(1, 1) == doctest::Approx(2.0));
    CHECK(eigenvalues(J).minCoeff() >= 0.0);
  }
  SUBCASE("components sum to the gradient of the full objective") {
    const RlsData data = make_synthetic_rls(30, 4, 5);
    const double lambda = 3.0;
    const FiniteSumOperator op = make_robust_least_squares(data, lambda);
    Rng rng(6);
    for (int t = 0; t < 10; ++t) {
      const Vector x = rng.normal_vector(op.dim());
      const Vector beta = x.head(4);
      const Vector y = x.tail(30);
      Vector grad(34);
      grad.head(4) = 2.0 * data.A.transpose() * (data.A * beta - y);
      grad.tail(30) = -(-2.0 * (data.A * beta - y) - 2.0 * lambda * (y - data.y0));
      CHECK((op.mean(x) - grad).norm() <= 1e-10 * (1.0 + grad.norm()));
    }
    CHECK(op.mean(*op.info().solution).norm() <= 1e-8);
  }
}

TEST_CASE("policemen and burglar matrix game") {
  const FiniteSumOperator op = make_policeman_burglar(5, 4, 0);
  for (const Matrix& M : op.affine_parts()->matrices) {
    const Matrix A = M.topRightCorner(4, 4);
    CHECK(A.diagonal().norm() == 0.0);
    CHECK(A.minCoeff() >= 0.0);
  }
  const Matrix A = op.affine_parts()->mean_matrix.topRightCorner(4, 4);
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Vector x1 = project_simplex(rng.normal_vector(4));
    const Vector x2 = project_simplex(rng.normal_vector(4));
    CHECK(duality_gap(A, x1, x2) >= 0.0);
  }
}

TEST_CASE("sign-power and sinh operators") {
  const FiniteSumOperator sp = make_sign_power_operator();
  CHECK(sp.mean(Vector::Zero(2)).norm() == 0.0);
  const Vector u{{0.4, -1.1}};
  CHECK((sp.mean(-u) + sp.mean(u)).norm() == 0.0);
  const FiniteSumOperator sh = make_sinh_game(2);
  check_monotone(sh, 1.0, 7);
}

TEST_CASE("simplex projection") {
  const Vector a = project_simplex(Vector{{0.5, 0.5}});
  CHECK(a[0] == 0.5);
  CHECK(a[1] == 0.5);
  const Vector b = project_simplex(Vector{{-1.0, -1.0}});
  CHECK(b[0] == doctest::Approx(0.5));
  CHECK(b[1] == doctest::Approx(0.5));
  const Vector c = project_simplex(Vector{{2.0, 0.0}});
  CHECK(c[0] == 1.0);
  CHECK(c[1] == 0.0);
}

TEST_CASE("simplex projection agrees with a brute-force search") {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const Vector x = 2.0 * rng.normal_vector(2);
    const Vector p = project_simplex(x);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 100000; ++i) {
      const double s = i / 100000.0;
      best = std::min(best, (x - Vector{{s, 1.0 - s}}).squaredNorm());
    }
    CHECK((x - p).squaredNorm() <= best + 1e-9);
  }
}

TEST_CASE("duality gap") {
  const Vector half{{0.5, 0.5}};
  CHECK(duality_gap(Matrix::Zero(2, 2), half, half) == 0.0);
  CHECK(duality_gap(Matrix::Identity(2, 2), half, half) == doctest::Approx(0.0));
  CHECK(duality_gap(Matrix::Identity(2, 2), Vector{{1.0, 0.0}}, Vector{{1.0, 0.0}}) == doctest::Approx(1.0));
}

TEST_CASE("component partitions") {
  QuadraticGameSpec spec;
  spec.n = 10;
  spec.d = 2;
  const FiniteSumOperator op = make_quadratic_game(spec);
  const auto parts = partition_components(op, 3);
  REQUIRE(parts.size() == 3);
  CHECK(parts[0].size() == 3);
  CHECK(parts[2].size() == 4);
  const Vector x = Rng(2).normal_vector(4);
  Vector sum = Vector::Zero(4);
  for (const auto& p : parts) sum += static_cast<double>(p.size()) * p.mean(x);
  CHECK((sum / 10.0 - op.mean(x)).norm() <= 1e-14);
  CHECK_THROWS_AS(partition_components(op, 11), ConfigError);
}

TEST_CASE("federated quadratic game has a common root") {
  FederatedGameSpec spec;
  spec.clients = 4;
  spec.components = 5;
  spec.d = 3;
  const FederatedProblem pb = make_federated_quadratic_game(spec);
  Vector mean = Vector::Zero(pb.solution.size());
  for (const auto& c : pb.clients) mean += c.mean(pb.solution);
  CHECK(mean.norm() <= 1e-10);
  CHECK(pb.mu > 0.0);
  for (const auto& c : pb.clients) CHECK(c.mean(pb.solution).norm() > 1e-6);
}
