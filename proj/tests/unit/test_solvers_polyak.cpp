#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "egvi/problems.hpp"
#include "egvi/solvers_polyak.hpp"

#include <cmath>

using namespace egvi;

namespace {

FiniteSumOperator scaled_rotation(double L) {
  OperatorInfo info;
  info.solution = Vector::Zero(2);
  info.lipschitz = L;
  Matrix M(2, 2);
  M << 0.0, L, -L, 0.0;
  return FiniteSumOperator::affine({{M}, {Vector::Zero(2)}, {}, {}}, info);
}

FiniteSumOperator game(bool interpolated, std::uint64_t seed) {
  QuadraticGameSpec spec;
  spec.n = 20;
  spec.d = 4;
  spec.interpolated = interpolated;
  spec.seed = seed;
  return make_quadratic_game(spec);
}

}  // namespace

TEST_CASE("Polyak update step") {
  const Vector F{{1.0, 2.0}};
  const Vector x{{3.0, 1.0}};
  const double gamma = 0.7;
  CHECK(polyak_update_step(F, x, x - gamma * F) == doctest::Approx(gamma));

  const FiniteSumOperator rot = scaled_rotation(1.0);
  const Vector x0{{1.0, 0.0}};
  const Vector x_hat = x0 - rot.mean(x0);
  CHECK(x_hat == Vector{{1.0, 1.0}});
  CHECK(rot.mean(x_hat) == Vector{{1.0, -1.0}});
  CHECK(polyak_update_step(rot.mean(x_hat), x0, x_hat) == 0.5);
  CHECK_THROWS_AS(polyak_update_step(Vector::Zero(2), x0, x_hat), ContractViolation);
}

TEST_CASE("Polyak step is bracketed under the critical condition") {
  const FiniteSumOperator op = game(false, 1);
  Rng rng(2);
  const double A = 0.5;
  for (int t = 0; t < 200; ++t) {
    const Vector x = rng.normal_vector(op.dim());
    const double gamma = 0.05 + rng.uniform();
    const Vector Fx = op.mean(x);
    const Vector x_hat = x - gamma * Fx;
    const Vector Fh = op.mean(x_hat);
    if (!critical_condition(Fx, Fh, A)) continue;
    const double omega = polyak_update_step(Fh, x, x_hat);
    CHECK(omega >= gamma / (1.0 + A) - 1e-12);
    CHECK(omega <= gamma / (1.0 - A) + 1e-12);
    CHECK(Fh.dot(Fx) >= 0.5 * (Fh.squaredNorm() + (1.0 - A * A) * Fx.squaredNorm()) - 1e-12);
  }
}

TEST_CASE("critical condition") {
  const Vector F{{1.0, -1.0}};
  CHECK(critical_condition(F, F, 0.0));
  CHECK_FALSE(critical_condition(Vector::Zero(2), F, 0.9));
  const FiniteSumOperator op = game(false, 3);
  const double L = *op.info().lipschitz;
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const Vector x = rng.normal_vector(op.dim());
    const Vector Fx = op.mean(x);
    CHECK(critical_condition(Fx, op.mean(x - (0.5 / L) * Fx), 0.5));
  }
}

TEST_CASE("while-loop budget") {
  CHECK(while_loop_budget(10.0, 1.0, 1.0, 0.5) == 4);
  CHECK(while_loop_budget(2.0, 0.25, 0.5, 0.5) == 1);
  CHECK(while_loop_budget(1.0, 0.1, 0.5, 0.5) == 0);
  std::uint64_t prev = 0;
  for (double g = 1e-3; g < 1e3; g *= 1.3) {
    const std::uint64_t b = while_loop_budget(3.0, g, 0.4, 0.7);
    CHECK(b >= prev);
    prev = b;
  }
}

TEST_CASE("line search loop counts") {
  const FiniteSumOperator op = scaled_rotation(10.0);
  Oracle oracle(op);
  auto F = [&oracle](const Vector& z) { return oracle.full(z); };
  const Vector x{{1.0, -2.0}};
  const Vector Fx = op.mean(x);
  CHECK(line_search_gamma(F, x, Fx, 0.05, 0.5, 0.5, 100).loops == 0);

  PolyakState st = polyak_init(x, 1.0);
  LineSearchGamma mode;
  mode.A = 1.0;
  mode.beta = 0.5;
  for (int k = 0; k < 200 && !st.converged; ++k) {
    polyak_eg_step(oracle, st, mode);
    CHECK(st.gamma >= std::min(0.5 * 1.0 / 10.0, 1.0));
  }
  CHECK(st.loops <= 4);
}

TEST_CASE("line search failure is reported") {
  const FiniteSumOperator op = scaled_rotation(10.0);
  auto F = [&op](const Vector& z) { return op.mean(z); };
  const Vector x{{1.0, 0.0}};
  CHECK_THROWS_AS(line_search_gamma(F, x, op.mean(x), 1e3, 0.9, 0.5, 3), LineSearchFailure);
}

TEST_CASE("Polyak EG contraction on a strongly monotone game") {
  const FiniteSumOperator op = game(false, 5);
  const double L = *op.info().lipschitz;
  const double mu = *op.info().mu;
  const Vector& xs = *op.info().solution;
  Oracle oracle(op);
  const double A = 1.0 / 3.0;
  PolyakState st = polyak_init(Rng(6).normal_vector(op.dim()), 1.0 / (3.0 * L));
  LineSearchGamma mode;
  mode.A = A;
  for (int k = 0; k < 300 && !st.converged; ++k) {
    const double before = (st.x - xs).squaredNorm();
    polyak_eg_step(oracle, st, mode);
    if (st.converged) break;
    const double after = (st.x - xs).squaredNorm();
    CHECK(after <= (1.0 - mu / (4.0 * L)) * before + 1e-10);
    CHECK(after <= (1.0 - 2.0 * (1.0 - A) * st.gamma * mu / ((1.0 + A) * (1.0 + A))) * before + 1e-10);
  }
}

TEST_CASE("Polyak EG monotone rate") {
  const FiniteSumOperator op = make_bilinear_game(5, 3);
  const double L = *op.info().lipschitz;
  const Vector& xs = *op.info().solution;
  Oracle oracle(op);
  const Vector x0 = Rng(1).normal_vector(op.dim());
  PolyakState st = polyak_init(x0, 1.0 / L);
  LineSearchGamma mode;
  mode.A = 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2000 && !st.converged; ++k) {
    polyak_eg_step(oracle, st, mode);
    best = std::min(best, op.mean(st.x_hat).squaredNorm());
    CHECK(best <= 4.0 * L * L * (x0 - xs).squaredNorm() / (k + 1.0) + 1e-12);
  }
}

TEST_CASE("converged signal at the solution") {
  const FiniteSumOperator op = game(false, 7);
  Oracle oracle(op);
  PolyakState st = polyak_init(*op.info().solution, 0.5);
  polyak_eg_step(oracle, st, FixedGamma{0.5});
  CHECK(st.converged);
  CHECK(st.k == 0);
}

TEST_CASE("stochastic Polyak with a full batch matches the deterministic step") {
  const FiniteSumOperator op = game(false, 8);
  const Vector x0 = Rng(2).normal_vector(op.dim());
  Oracle a(op);
  Oracle b(op);
  Rng rng(0);
  PolyakState sa = polyak_init(x0, 1.0);
  PolyakState sb = polyak_init(x0, 1.0);
  LineSearchGamma mode;
  for (int k = 0; k < 20; ++k) {
    polyak_eg_step(a, sa, mode);
    polyak_seg_step(b, sb, SamplingScheme::full(op.size()), mode, rng);
    CHECK((sa.x - sb.x).norm() <= 1e-14);
  }
}

TEST_CASE("stochastic Polyak contraction on an interpolated game") {
  const FiniteSumOperator op = game(true, 9);
  const double mu = *op.info().mu;
  const Vector& xs = *op.info().solution;
  const SamplingScheme scheme = SamplingScheme::uniform_single(op.size());
  const Vector x0 = Rng(3).normal_vector(op.dim());
  const double A = 0.5;
  const int seeds = 50;
  const int steps = 30;
  std::vector<double> err(steps + 1, 0.0);
  std::vector<double> factor(steps, 0.0);
  for (int s = 0; s < seeds; ++s) {
    Oracle oracle(op);
    Rng rng = Rng(static_cast<std::uint64_t>(s)).split("seg");
    PolyakState st = polyak_init(x0, 1.0);
    LineSearchGamma mode;
    mode.A = A;
    err[0] += (x0 - xs).squaredNorm() / seeds;
    for (int k = 0; k < steps; ++k) {
      polyak_seg_step(oracle, st, scheme, mode, rng);
      err[k + 1] += (st.x - xs).squaredNorm() / seeds;
      factor[k] = std::max(factor[k], 1.0 - 2.0 * (1.0 - A) * st.gamma * mu / ((1.0 + A) * (1.0 + A)));
    }
  }
  for (int k = 0; k < steps; ++k) CHECK(err[k + 1] <= 1.1 * factor[k] * err[k]);
}

TEST_CASE("decreasing Polyak schedule") {
  const FiniteSumOperator op = game(false, 10);
  const auto& lip = *op.info().component_lipschitz;
  const double L = *std::max_element(lip.begin(), lip.end());
  const SamplingScheme scheme = SamplingScheme::uniform_single(op.size());
  Oracle oracle(op);
  Rng rng(1);
  const double gamma0 = 4.0;
  PolyakState st = polyak_init(Rng(4).normal_vector(op.dim()), gamma0);
  LineSearchGamma mode;
  double prev_omega = std::numeric_limits<double>::infinity();
  double prev_scaled = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < 2000; ++k) {
    dec_polyak_seg_step(oracle, st, scheme, mode, rng);
    const double c = std::sqrt(static_cast<double>(k) + 1.0);
    CHECK(st.omega <= prev_omega);
    CHECK(st.gamma * c <= prev_scaled);
    CHECK(st.gamma <= gamma0 / c);
    CHECK(st.gamma >= mode.beta * mode.A / (L * c));
    prev_omega = st.omega;
    prev_scaled = st.gamma * c;
  }
}

TEST_CASE("run_polyak records step sizes and loops") {
  const FiniteSumOperator op = game(false, 11);
  RunOptions options;
  options.iterations = 20;
  LineSearchGamma mode;
  mode.grow = true;
  const RunResult r = run_polyak(op, Vector::Zero(op.dim()), PolyakVariant::deterministic, 1e-3, mode,
                                 SamplingScheme::full(op.size()), options);
  REQUIRE(r.trace.records.size() == 21);
  CHECK(r.trace.records[1].metrics.count("gamma") == 1);
  CHECK(r.trace.records[1].metrics.at("gamma") > 1e-3);
}
