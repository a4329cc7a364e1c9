#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "egvi/problems.hpp"
#include "egvi/solvers_l0l1.hpp"

#include <cmath>

using namespace egvi;

TEST_CASE("nu roots") {
  // Reference roots computed independently to 40 digits.
  CHECK(solve_nu(NuEquation::A) == doctest::Approx(0.36341019228949402).epsilon(1e-11));
  CHECK(solve_nu(NuEquation::B) == doctest::Approx(0.21462179626163232).epsilon(1e-11));
  CHECK(solve_nu(NuEquation::C) == doctest::Approx(0.45060051586483307).epsilon(1e-11));
  CHECK(solve_nu(NuEquation::D) == doctest::Approx(0.56714329040978387).epsilon(1e-11));
  for (NuEquation eq : {NuEquation::A, NuEquation::B, NuEquation::C, NuEquation::D})
    CHECK(std::abs(nu_residual(eq, solve_nu(eq))) < 1e-12);
}

TEST_CASE("K constants") {
  const KConstants zero = k_constants(2.0, 0.0, 0.5);
  CHECK(zero.K1 == 0.0);
  CHECK(zero.K2 == 0.0);
  CHECK(zero.K0 == doctest::Approx(2.0 * (std::pow(2.0, 0.5) + 1.0)));
  const KConstants k = k_constants(1.0, 1.0, 0.5);
  CHECK(k.K0 == doctest::Approx(std::sqrt(2.0) + 1.0).epsilon(1e-14));
  CHECK(k.K1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(k.K2 == doctest::Approx(1.224744871391589).epsilon(1e-14));
  double prev0 = 0.0;
  double prev2 = 0.0;
  for (double L1 = 0.0; L1 < 3.0; L1 += 0.25) {
    const KConstants c = k_constants(1.0, L1, 0.3);
    CHECK(c.K0 >= prev0);
    CHECK(c.K2 >= prev2);
    prev0 = c.K0;
    prev2 = c.K2;
  }
}

TEST_CASE("adaptive step sizes") {
  L0L1Config monotone;
  monotone.regime = Regime::monotone;
  monotone.L0 = 2.0;
  monotone.L1 = 0.0;
  const double nu_c = solve_nu(NuEquation::C);
  CHECK(gamma_adaptive(monotone, 0.0).gamma == doctest::Approx(nu_c / 2.0));
  CHECK(gamma_adaptive(monotone, 100.0).gamma == doctest::Approx(nu_c / 2.0));

  L0L1Config strong;
  strong.regime = Regime::strongly_monotone;
  strong.L0 = 1.0 + 2.0 * std::sqrt(2.0);
  strong.L1 = 2.0 * std::sqrt(2.0);
  CHECK(gamma_adaptive(strong, 1.0).gamma == doctest::Approx(0.054591880589424944).epsilon(1e-11));
  CHECK(gamma_adaptive(strong, 1e-12).gamma == doctest::Approx(solve_nu(NuEquation::A) / strong.L0));

  L0L1Config weak;
  weak.regime = Regime::weak_minty;
  const StepPair w = gamma_adaptive(weak, 0.3);
  CHECK(w.omega == 0.5 * w.gamma);

  L0L1Config user;
  user.user_constants = std::make_pair(10.0, 10.0);
  CHECK(gamma_adaptive(user, 1.0).gamma == doctest::Approx(0.05));
}

TEST_CASE("adaptive step is non-increasing in the operator norm") {
  for (double alpha : {0.3, 0.5, 1.0})
    for (Regime r : {Regime::strongly_monotone, Regime::monotone, Regime::weak_minty}) {
      L0L1Config c;
      c.alpha = alpha;
      c.regime = r;
      c.L0 = 1.5;
      c.L1 = 0.7;
      double prev = std::numeric_limits<double>::infinity();
      for (double f = 0.0; f < 50.0; f += 0.5) {
        const double g = gamma_adaptive(c, f).gamma;
        CHECK(g <= prev);
        prev = g;
      }
    }
}

TEST_CASE("strongly monotone contraction on the sinh game") {
  const FiniteSumOperator op = make_sinh_game(3);
  L0L1Config c;
  c.L0 = 1.0;
  c.L1 = 1.0;
  Vector x{{0.4, -0.2, 0.1, 0.3, -0.5, 0.2}};
  const double factor = strong_contraction_factor(c, 1.0, x.norm());
  CHECK(factor < 1.0);
  Oracle oracle(op);
  for (int k = 0; k < 200; ++k) {
    const double before = x.squaredNorm();
    x = eg_l0l1_step(oracle, x, c);
    CHECK(x.squaredNorm() <= factor * before + 1e-10);
  }
}

TEST_CASE("adaptive EG on GlobalForsaken") {
  const FiniteSumOperator op = make_global_forsaken();
  L0L1Config c;
  c.regime = Regime::weak_minty;
  c.user_constants = std::make_pair(1.0, 1.0);
  RunOptions options;
  options.iterations = 2000;
  const RunResult r = run_eg_l0l1(op, Vector::Ones(2), c, options);
  CHECK(r.x.norm() < 1e-4);
  CHECK(r.trace.records.back().metrics.count("relative_error") == 1);
}

TEST_CASE("spectral norm by power iteration") {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const Matrix J = rng.normal_matrix(5, 5);
    CHECK(spectral_norm_power(J) == doctest::Approx(spectral_norm(J)).epsilon(1e-8));
  }
}

TEST_CASE("finite-difference Jacobian matches the analytic one") {
  const FiniteSumOperator op = make_global_forsaken();
  const Vector x{{0.3, -0.8}};
  CHECK((finite_difference_jacobian(op, x) - op.jacobian(x)).norm() <= 1e-6);
}

TEST_CASE("Jacobian fit on a linear game") {
  Matrix M(2, 2);
  M << 1.0, 1.0, -1.0, 1.0;
  const FiniteSumOperator op(1, 2, [M](std::size_t, const Vector& x) -> Vector { return M * x; });
  const auto grid = grid_points_2d(2.0, 20);
  const L0L1Fit fit = fit_l0l1(op, grid, 1.0);
  CHECK(fit.L1 < 1e-6);
  CHECK(fit.L0 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("Jacobian fit on the scalar cubic problem covers every sample") {
  const Matrix one = Matrix::Ones(1, 1);
  const FiniteSumOperator op = make_cubic_minmax(one, one, one);
  const auto grid = grid_points_2d(2.0, 40);
  const L0L1Fit fit = fit_l0l1(op, grid, 1.0);
  CHECK(fit.L1 > 0.0);
  CHECK(fit.max_violation <= 0.0);
  for (const Vector& x : grid)
    CHECK(spectral_norm(op.jacobian(x)) <= fit.L0 + fit.L1 * op.mean(x).norm() + 1e-6);
}

TEST_CASE("sign-power calibration target") {
  const FiniteSumOperator op = make_sign_power_operator();
  const auto grid = grid_points_2d(kSignPowerCalibrationRadius, kSignPowerCalibrationGrid);
  const L0L1Fit fit = fit_l0l1(op, grid, 1.0);
  CHECK(std::abs(fit.L0 / (1.0 + 2.0 * std::sqrt(2.0)) - 1.0) <= 0.1);
  CHECK(std::abs(fit.L1 / (2.0 * std::sqrt(2.0)) - 1.0) <= 0.1);
}

TEST_CASE("grid points") {
  const auto g = grid_points_2d(1.0, 3);
  REQUIRE(g.size() == 9);
  CHECK(g.front() == Vector{{-1.0, -1.0}});
  CHECK(g.back() == Vector{{1.0, 1.0}});
}
