#include "egvi/verify.hpp"

#include "egvi/fl.hpp"
#include "egvi/problems.hpp"
#include "egvi/sampling.hpp"
#include "egvi/solvers_eg.hpp"
#include "egvi/solvers_l0l1.hpp"
#include "egvi/solvers_polyak.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace egvi {

namespace {

std::string describe(std::initializer_list<std::pair<std::string_view, double>> values) {
  std::ostringstream out;
  out.precision(6);
  bool first = true;
  for (const auto& [key, value] : values) {
    if (!first) out << ' ';
    out << key << '=' << value;
    first = false;
  }
  return out.str();
}

CheckResult check(std::string suite, std::string name, bool passed, std::string detail) {
  return {std::move(suite), std::move(name), passed, std::move(detail)};
}

FiniteSumOperator strong_game() {
  QuadraticGameSpec spec;
  spec.n = 100;
  spec.d = 30;
  spec.seed = 1;
  return make_quadratic_game(spec);
}

std::vector<CheckResult> eg_contraction() {
  const FiniteSumOperator op = strong_game();
  const double L = *op.info().lipschitz;
  const double mu = *op.info().mu;
  const Vector& xs = *op.info().solution;
  const double factor = 1.0 - mu / (4.0 * L);
  Oracle oracle(op);
  Rng rng(0);
  const SamplingScheme full = SamplingScheme::full(op.size());
  Vector x = Rng(5).normal_vector(op.dim());
  double worst = -1.0;
  for (int k = 0; k < 2000; ++k) {
    const double before = (x - xs).squaredNorm();
    x = eg_step(oracle, x, 1.0 / (4.0 * L), 1.0 / (4.0 * L), full, rng).next;
    worst = std::max(worst, (x - xs).squaredNorm() - factor * before);
  }
  return {check("eg-contraction", "per-step factor 1-mu/(4L)", worst <= 1e-10,
                describe({{"worst_excess", worst}, {"L", L}, {"mu", mu}}))};
}

std::vector<CheckResult> eg_monotone_rate() {
  const FiniteSumOperator op = make_bilinear_game(10, 2);
  const double L = *op.info().lipschitz;
  const Vector& xs = *op.info().solution;
  const double step = 1.0 / (std::sqrt(2.0) * L);
  Oracle oracle(op);
  Rng rng(0);
  const SamplingScheme full = SamplingScheme::full(op.size());
  Vector x = Rng(5).normal_vector(op.dim());
  const double bound0 = 4.0 * L * L * (x - xs).squaredNorm();
  double best = op.mean(x).squaredNorm();
  double worst_ratio = best / bound0;
  for (int K = 1; K <= 5000; ++K) {
    x = eg_step(oracle, x, step, step, full, rng).next;
    best = std::min(best, op.mean(x).squaredNorm());
    worst_ratio = std::max(worst_ratio, best * (K + 1) / bound0);
  }
  return {check("eg-monotone-rate", "min squared norm <= 4L^2 R0^2/(K+1)", worst_ratio <= 1.0,
                describe({{"worst_ratio", worst_ratio}}))};
}

struct SpegSetup {
  FiniteSumOperator op;
  SamplingScheme scheme;
  ErConstants er;
  double L;
  double mu;
  Vector x0;
};

SpegSetup speg_setup(bool interpolated) {
  QuadraticGameSpec spec;
  spec.n = 100;
  spec.d = 10;
  spec.eig_A = {0.5, 1.0};
  spec.eig_C = {0.5, 1.0};
  spec.interpolated = interpolated;
  spec.seed = 3;
  FiniteSumOperator op = make_quadratic_game(spec);
  SamplingScheme scheme = SamplingScheme::uniform_single(op.size());
  const ErConstants er = er_constants(scheme, *op.info().component_lipschitz, star_sq_norms(op));
  const double L = *op.info().lipschitz;
  const double mu = *op.info().mu;
  Vector x0 = Rng(11).normal_vector(op.dim());
  return {std::move(op), std::move(scheme), er, L, mu, std::move(x0)};
}

constexpr int kSeeds = 50;

std::vector<CheckResult> speg_interpolated() {
  const SpegSetup s = speg_setup(true);
  const Vector& xs = *s.op.info().solution;
  const double omega = std::min(s.mu / (18.0 * s.er.delta), 1.0 / (4.0 * s.L));
  const double R0 = (s.x0 - xs).squaredNorm();
  const double target = 1e-8;
  const auto K = static_cast<std::uint64_t>(
      std::ceil(std::max(8.0 * s.L / s.mu, 36.0 * s.er.delta / (s.mu * s.mu)) * std::log(2.0 * R0 / target)));
  std::vector<double> avg(K + 1, 0.0);
  for (int seed = 0; seed < kSeeds; ++seed) {
    Oracle oracle(s.op);
    Rng rng = Rng(static_cast<std::uint64_t>(seed)).split("speg");
    SpegState st = speg_init(oracle, s.x0, s.scheme, rng);
    avg[0] += R0 / kSeeds;
    for (std::uint64_t k = 0; k < K; ++k) {
      speg_step(oracle, st, omega, omega, s.scheme, rng);
      avg[k + 1] += ((st.x - xs).squaredNorm() + (st.x - st.xhat_prev).squaredNorm()) / kSeeds;
    }
  }
  const double rate = 1.0 - omega * s.mu / 2.0;
  double worst = 0.0;
  std::uint64_t hit = 0;
  bool reached = false;
  for (std::uint64_t k = 0; k <= K; ++k) {
    worst = std::max(worst, avg[k] / (std::pow(rate, static_cast<double>(k)) * R0));
    if (!reached && avg[k] < target) {
      reached = true;
      hit = k;
    }
  }
  return {
      check("speg-interpolated", "averaged R^2 below 1e-8 within budget", reached,
            describe({{"first_k", static_cast<double>(hit)}, {"budget", static_cast<double>(K)},
                      {"final", avg[K]}})),
      check("speg-interpolated", "averaged contraction within 10%", worst <= 1.1,
            describe({{"worst_ratio", worst}, {"omega", omega}, {"delta", s.er.delta}})),
  };
}

std::vector<CheckResult> speg_switching() {
  const SpegSetup s = speg_setup(false);
  const double base = switching_base_step(s.mu, s.er.delta, s.L);
  RunOptions options;
  options.iterations = 1000000;
  options.oracle_budget = 100000;
  options.record_stride = options.iterations;
  double constant = 0.0;
  double switching = 0.0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    options.seed = static_cast<std::uint64_t>(seed);
    const RunResult rc = run_speg(s.op, s.x0, StepPolicy::constant(base), StepPolicy::constant(base), s.scheme, options);
    const StepPolicy sw = StepPolicy::switching(s.mu, s.er.delta, s.L);
    const RunResult rs = run_speg(s.op, s.x0, sw, sw, s.scheme, options);
    constant += rc.trace.records.back().metrics.at("relative_error") / kSeeds;
    switching += rs.trace.records.back().metrics.at("relative_error") / kSeeds;
  }
  return {check("speg-switching", "switching <= 0.5 x constant at 1e5 oracle calls", switching <= 0.5 * constant,
                describe({{"switching", switching}, {"constant", constant}, {"ratio", switching / constant}}))};
}

std::vector<CheckResult> er_constants_suite() {
  QuadraticGameSpec spec;
  spec.n = 50;
  spec.d = 10;
  spec.seed = 4;
  const FiniteSumOperator op = make_quadratic_game(spec);
  const AffineComponents& parts = *op.affine_parts();
  const Vector& xs = *op.info().solution;
  const auto& lip = *op.info().component_lipschitz;
  const std::size_t n = op.size();

  struct Case {
    std::string name;
    SamplingScheme scheme;
  };
  const std::vector<Case> cases = {
      {"tau=1", SamplingScheme::minibatch(n, 1)},
      {"tau=n/10", SamplingScheme::minibatch(n, n / 10)},
      {"tau=n/2", SamplingScheme::minibatch(n, n / 2)},
      {"uniform single", SamplingScheme::uniform_single(n)},
      {"importance single", SamplingScheme::single_element(importance_probabilities(lip))},
  };
  std::vector<CheckResult> out;
  Rng points = Rng(21).split("points");
  std::vector<Vector> xs_list;
  for (int i = 0; i < 100; ++i) xs_list.push_back(xs + points.normal_vector(op.dim()));
  for (const auto& c : cases) {
    const ErConstants er = er_constants(c.scheme, lip, star_sq_norms(op));
    Rng draws = Rng(22).split(c.name);
    double worst = 0.0;
    for (const Vector& x : xs_list) {
      const Vector diff = x - xs;
      std::vector<Vector> u(n);
      Vector mean = Vector::Zero(op.dim());
      for (std::size_t i = 0; i < n; ++i) {
        u[i] = parts.matrices[i] * diff;
        mean += u[i];
      }
      mean /= static_cast<double>(n);
      double second = 0.0;
      for (int t = 0; t < 10000; ++t) {
        const SamplingVector v = c.scheme.draw(draws);
        Vector g = Vector::Zero(op.dim());
        for (const auto& [i, w] : v.entries) g += w * u[i];
        second += (g / static_cast<double>(n) - mean).squaredNorm();
      }
      second /= 10000.0;
      worst = std::max(worst, second / (0.5 * er.delta * diff.squaredNorm()));
    }
    out.push_back(check("er-constants", c.name, worst <= 1.03,
                        describe({{"worst_ratio", worst}, {"delta", er.delta}})));
  }
  return out;
}

std::vector<CheckResult> speg_weak_minty() {
  const FiniteSumOperator op = make_weak_minty_scalar(100, 0);
  const SamplingScheme scheme = SamplingScheme::minibatch(100, 6);
  RunOptions options;
  options.iterations = 10000;
  const Vector x0{{1.0, 1.0}};
  std::vector<double> mins(options.iterations + 1, 0.0);
  for (int seed = 0; seed < kSeeds; ++seed) {
    options.seed = static_cast<std::uint64_t>(seed);
    const RunResult r = run_speg(op, x0, StepPolicy::constant(0.08), StepPolicy::constant(0.01), scheme, options);
    for (const auto& rec : r.trace.records)
      if (rec.iteration >= 1) mins[rec.iteration] += rec.metrics.at("min_sq_operator_norm_hat") / kSeeds;
  }
  const double f0 = mins[1];
  std::uint64_t hit = 0;
  for (std::uint64_t k = 1; k < mins.size() && hit == 0; ++k)
    if (mins[k] < 1e-3 * f0) hit = k;
  return {check("speg-weak-minty", "averaged min norm below 1e-3 of initial", hit > 0,
                describe({{"first_k", static_cast<double>(hit)}, {"initial", f0}, {"final", mins.back()}}))};
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
}

FiniteSumOperator scaled_monotone_operator(double L, Rng& rng) {
  const std::size_t d = 6;
  const Matrix G = rng.normal_matrix(d, d);
  const Matrix S = rng.normal_matrix(d, d);
  Matrix M = G * G.transpose() / static_cast<double>(d) + 0.1 * Matrix::Identity(d, d) + (S - S.transpose());
  M *= L / spectral_norm(M);
  const Vector b = rng.normal_vector(d);
  OperatorInfo info;
  info.solution = Vector(M.partialPivLu().solve(-b));
  info.lipschitz = L;
  info.monotone = true;
  return FiniteSumOperator::affine({{M}, {b}, {}, {}}, info);
}

std::vector<CheckResult> ls_budget() {
  Rng rng = Rng(31).split("configurations");
  int budget_failures = 0;
  int floor_failures = 0;
  std::uint64_t max_loops = 0;
  int rounding_stops = 0;
  for (int c = 0; c < 100; ++c) {
    const double L = log_uniform(rng, 0.1, 10.0);
    const double gamma0 = log_uniform(rng, 1e-3, 1e3);
    const double A = 0.1 + 0.8 * rng.uniform();
    const double beta = 0.1 + 0.8 * rng.uniform();
    const FiniteSumOperator op = scaled_monotone_operator(L, rng);
    Oracle oracle(op);
    PolyakState st = polyak_init(rng.normal_vector(op.dim()), gamma0);
    LineSearchGamma mode;
    mode.A = A;
    mode.beta = beta;
    const double floor = std::min(beta * A / L, gamma0);
    const Vector& b = op.affine_parts()->offsets.front();
    const double eps = std::numeric_limits<double>::epsilon();
    for (int k = 0; k < 1000 && !st.converged; ++k) {
      // The loop count is a statement about exact arithmetic; stop once the
      // critical-condition residual is within the rounding error of evaluating F.
      const double resolution = 4.0 * static_cast<double>(op.dim()) * eps * (L * st.x.norm() + b.norm());
      if (A * op.mean(st.x).norm() <= resolution) {
        ++rounding_stops;
        break;
      }
      polyak_eg_step(oracle, st, mode);
      if (!st.converged && st.gamma < floor) ++floor_failures;
    }
    const std::uint64_t budget = while_loop_budget(L, gamma0, A, beta);
    if (st.loops > budget) ++budget_failures;
    max_loops = std::max(max_loops, st.loops);
  }
  return {
      check("ls-budget", "cumulative loops <= floor(log(L g/A)/log(1/beta)) + 1", budget_failures == 0,
            describe({{"violations", budget_failures},
                      {"max_loops", static_cast<double>(max_loops)},
                      {"rounding_stops", rounding_stops}})),
      check("ls-budget", "gamma_k >= min(beta A/L, gamma_-1)", floor_failures == 0,
            describe({{"violations", floor_failures}})),
  };
}

std::vector<CheckResult> polyak_contraction() {
  const FiniteSumOperator op = strong_game();
  const double L = *op.info().lipschitz;
  const double mu = *op.info().mu;
  const Vector& xs = *op.info().solution;
  const double factor = 1.0 - mu / (4.0 * L);
  Oracle oracle(op);
  PolyakState st = polyak_init(Rng(5).normal_vector(op.dim()), 1.0 / (3.0 * L));
  LineSearchGamma mode;
  mode.A = 1.0 / 3.0;
  double worst = -1.0;
  int steps = 0;
  for (; steps < 2000; ++steps) {
    const double before = (st.x - xs).squaredNorm();
    polyak_eg_step(oracle, st, mode);
    if (st.converged) break;
    worst = std::max(worst, (st.x - xs).squaredNorm() - factor * before);
  }
  return {check("polyak-contraction", "per-step factor 1-mu/(4L)", worst <= 1e-10,
                describe({{"worst_excess", worst}, {"steps", steps}, {"loops", static_cast<double>(st.loops)}}))};
}

std::vector<CheckResult> dec_polyak_schedule() {
  QuadraticGameSpec spec;
  spec.n = 100;
  spec.d = 10;
  spec.seed = 5;
  const FiniteSumOperator op = make_quadratic_game(spec);
  const auto& lip = *op.info().component_lipschitz;
  const double L = *std::max_element(lip.begin(), lip.end());
  const SamplingScheme scheme = SamplingScheme::uniform_single(op.size());
  LineSearchGamma mode;
  Oracle oracle(op);
  Rng rng = Rng(0).split("dec-polyak");
  PolyakState st = polyak_init(Rng(6).normal_vector(op.dim()), 10.0);
  int omega_up = 0;
  int scaled_up = 0;
  int below_floor = 0;
  double prev_omega = st.omega_prev;
  double prev_scaled = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < 10000 && !st.converged; ++k) {
    dec_polyak_seg_step(oracle, st, scheme, mode, rng);
    if (st.converged) break;
    const double c = std::sqrt(static_cast<double>(k) + 1.0);
    const double scaled = st.gamma * c;
    if (st.omega > prev_omega) ++omega_up;
    if (scaled > prev_scaled) ++scaled_up;
    if (st.gamma < mode.beta * mode.A / (L * c)) ++below_floor;
    prev_omega = st.omega;
    prev_scaled = scaled;
  }
  return {
      check("dec-polyak-schedule", "omega non-increasing", omega_up == 0, describe({{"increases", omega_up}})),
      check("dec-polyak-schedule", "gamma sqrt(k+1) non-increasing", scaled_up == 0,
            describe({{"increases", scaled_up}})),
      check("dec-polyak-schedule", "gamma >= beta A/(L sqrt(k+1))", below_floor == 0,
            describe({{"violations", below_floor}, {"L", L}})),
  };
}

std::vector<CheckResult> nu_roots() {
  struct Root {
    NuEquation eq;
    std::string name;
    double expected;
  };
  const std::vector<Root> roots = {
      {NuEquation::A, "nu_A", 0.363}, {NuEquation::B, "nu_B", 0.21},
      {NuEquation::C, "nu_C", 0.45},  {NuEquation::D, "nu_D", 0.567},
  };
  std::vector<CheckResult> out;
  for (const auto& r : roots) {
    const double nu = solve_nu(r.eq);
    const double residual = std::abs(nu_residual(r.eq, nu));
    out.push_back(check("nu-roots", r.name, residual < 1e-12 && std::abs(nu - r.expected) <= 0.005,
                        describe({{"nu", nu}, {"residual", residual}})));
  }
  return out;
}

std::vector<CheckResult> l0l1_contraction() {
  const FiniteSumOperator op = make_sinh_game(2);
  L0L1Config config;
  config.L0 = *op.info().L0;
  config.L1 = *op.info().L1;
  config.regime = Regime::strongly_monotone;
  const double mu = *op.info().mu;
  Vector x{{0.5, -0.3, 0.2, 0.4}};
  const Vector& xs = *op.info().solution;
  const double factor = strong_contraction_factor(config, mu, (x - xs).norm());
  Oracle oracle(op);
  double worst = -1.0;
  for (int k = 0; k < 500; ++k) {
    const double before = (x - xs).squaredNorm();
    x = eg_l0l1_step(oracle, x, config);
    worst = std::max(worst, (x - xs).squaredNorm() - factor * before);
  }
  return {check("l0l1-contraction", "per-step contraction factor", worst <= 1e-8,
                describe({{"factor", factor}, {"worst_excess", worst}}))};
}

struct GammaRun {
  double final_error = 0.0;
  std::uint64_t first_hit = 0;
  int decreases = 0;
};

GammaRun adaptive_run(const FiniteSumOperator& op, const Vector& x0, double c0, double c1, Regime regime,
                      std::uint64_t iterations, double target, bool relative) {
  L0L1Config config;
  config.user_constants = std::make_pair(c0, c1);
  config.regime = regime;
  const Vector& xs = *op.info().solution;
  const double R0 = (x0 - xs).norm();
  Oracle oracle(op);
  Vector x = x0;
  GammaRun run;
  double prev = 0.0;
  for (std::uint64_t k = 0; k < iterations; ++k) {
    StepPair used;
    x = eg_l0l1_step(oracle, x, config, &used);
    if (k >= 10 && used.gamma < prev) ++run.decreases;
    prev = used.gamma;
    const double err = relative ? (x - xs).norm() / R0 : x.norm();
    run.final_error = err;
    if (err < target) {
      run.first_hit = k + 1;
      break;
    }
  }
  return run;
}

std::vector<CheckResult> l0l1_experiments() {
  const FiniteSumOperator cubic = make_cubic_minmax(10, 0);
  const GammaRun c = adaptive_run(cubic, Rng(0).split("x0").normal_vector(cubic.dim()), 10.0, 10.0,
                                  Regime::monotone, 100000, 1e-6, true);
  const FiniteSumOperator gf = make_global_forsaken();
  const GammaRun g = adaptive_run(gf, Vector::Ones(2), 1.0, 1.0, Regime::weak_minty, 10000, 1e-4, false);
  return {
      check("l0l1-experiments", "cubic relative error < 1e-6", c.first_hit > 0,
            describe({{"iterations", static_cast<double>(c.first_hit)}, {"final", c.final_error}})),
      check("l0l1-experiments", "cubic gamma non-decreasing after 10 steps", c.decreases == 0,
            describe({{"decreases", c.decreases}})),
      check("l0l1-experiments", "GlobalForsaken norm < 1e-4", g.first_hit > 0,
            describe({{"iterations", static_cast<double>(g.first_hit)}, {"final", g.final_error}})),
      check("l0l1-experiments", "GlobalForsaken gamma non-decreasing after 10 steps", g.decreases == 0,
            describe({{"decreases", g.decreases}})),
  };
}

std::vector<CheckResult> jacobian_fit() {
  const Matrix one = Matrix::Ones(1, 1);
  const FiniteSumOperator cubic = make_cubic_minmax(one, one, one);
  const std::vector<Vector> grid = grid_points_2d(2.0, 100);
  const L0L1Fit fc = fit_l0l1(cubic, grid, 1.0);

  Matrix M(2, 2);
  M << 1.0, 1.0, -1.0, 1.0;
  OperatorInfo info;
  info.solution = Vector::Zero(2);
  const FiniteSumOperator linear = FiniteSumOperator::affine({{M}, {Vector::Zero(2)}, {}, {}}, info);
  const L0L1Fit fl = fit_l0l1(linear, grid, 1.0);
  return {
      check("jacobian-fit", "cubic fit has no violations", fc.max_violation <= 1e-6,
            describe({{"L0", fc.L0}, {"L1", fc.L1}, {"max_violation", fc.max_violation}})),
      check("jacobian-fit", "linear game fit L1 ~ 0 and L0 ~ sqrt 2",
            fl.L1 < 1e-6 && std::abs(fl.L0 - std::sqrt(2.0)) <= 1e-3, describe({{"L0", fl.L0}, {"L1", fl.L1}})),
  };
}

std::vector<CheckResult> proxskip_lyapunov() {
  const FederatedProblem pb = make_federated_quadratic_game(FederatedGameSpec{});
  const NetworkConfig cfg = theoretical_params_gda(star_cocoercivity(pb), pb.mu);
  const double rate = std::min(cfg.gamma * pb.mu, cfg.p * cfg.p);
  const Vector x0 = Rng(7).normal_vector(static_cast<std::size_t>(pb.solution.size()));
  Network net(pb, x0, 1);
  double V = lyapunov_V(net, cfg);
  double worst = -1.0;
  for (int k = 0; k < 5000 && fl_relative_error(net, x0) >= 1e-6; ++k) {
    proxskip_vip_round(net, cfg, DeterministicEstimator{});
    const double next = lyapunov_V(net, cfg);
    worst = std::max(worst, next / V - (1.0 - rate));
    V = next;
  }

  FlRunOptions options;
  options.iterations = 100000;
  options.record_stride = options.iterations;
  options.target_relative_error = 1e-6;
  options.seed = 1;
  const FlRunResult ps = run_federated(pb, x0, FlAlgorithm::proxskip_vip, cfg, DeterministicEstimator{}, options);
  // Local GDA gets at least twice the ProxSkip round count; if it has not
  // reached the target by then its count is bounded below by the budget.
  const std::uint64_t H = default_sync_period(cfg.p);
  const std::uint64_t local_rounds = std::max<std::uint64_t>(2 * ps.comm_rounds, 1000);
  options.iterations = local_rounds * H;
  const FlRunResult lg = run_federated(pb, x0, FlAlgorithm::local_gda, cfg, DeterministicEstimator{}, options);
  const double local_comm = static_cast<double>(lg.comm_rounds);
  return {
      check("proxskip-lyapunov", "V contraction every round", ps.reached_target && worst <= 1e-10,
            describe({{"worst_excess", worst}, {"rate", rate}})),
      check("proxskip-lyapunov", "communications <= 0.5 x Local GDA",
            ps.reached_target && static_cast<double>(ps.comm_rounds) <= 0.5 * local_comm,
            describe({{"proxskip", static_cast<double>(ps.comm_rounds)},
                      {"local_gda", local_comm},
                      {"local_gda_reached", lg.reached_target ? 1.0 : 0.0}})),
  };
}

std::vector<CheckResult> proxskip_svrg() {
  const FederatedProblem pb = make_federated_quadratic_game(FederatedGameSpec{});
  const double ell_hat = average_star_cocoercivity(pb);
  const NetworkConfig cfg = theoretical_params_svrg(ell_hat, pb.mu);
  const double eps = 1e-6;
  const auto K = static_cast<std::uint64_t>(std::ceil(20.0 * (ell_hat / pb.mu) * std::log(1.0 / eps)));
  const Vector x0 = Rng(7).normal_vector(static_cast<std::size_t>(pb.solution.size()));
  double svrg = 0.0;
  double sgda = 0.0;
  FlRunOptions options;
  options.iterations = K;
  options.record_stride = K;
  for (int seed = 0; seed < kSeeds; ++seed) {
    options.seed = static_cast<std::uint64_t>(seed);
    const FlRunResult a = run_federated(pb, x0, FlAlgorithm::proxskip_svrg, cfg, DeterministicEstimator{}, options);
    const FlRunResult b = run_federated(pb, x0, FlAlgorithm::proxskip_vip, cfg, StochasticEstimator{1}, options);
    svrg += a.trace.records.back().metrics.at("relative_error") / kSeeds;
    sgda += b.trace.records.back().metrics.at("relative_error") / kSeeds;
  }
  return {
      check("proxskip-svrg", "averaged relative error < 1e-6 within budget", svrg < eps,
            describe({{"relative_error", svrg}, {"budget", static_cast<double>(K)}})),
      check("proxskip-svrg", "plain stochastic ProxSkip plateaus >= 10x higher", sgda >= 10.0 * svrg,
            describe({{"sgda", sgda}, {"svrg", svrg}})),
  };
}

std::vector<CheckResult> comm_frequency() {
  FederatedGameSpec spec;
  spec.clients = 2;
  spec.components = 2;
  spec.d = 1;
  const FederatedProblem pb = make_federated_quadratic_game(spec);
  NetworkConfig cfg;
  cfg.gamma = 0.1;
  cfg.p = 0.05;
  Network net(pb, Vector::Ones(static_cast<Eigen::Index>(pb.solution.size())), 3);
  const std::uint64_t N = 100000;
  for (std::uint64_t k = 0; k < N; ++k) proxskip_vip_round(net, cfg, DeterministicEstimator{});
  const double freq = static_cast<double>(net.log().rounds) / static_cast<double>(net.log().iterations);
  const double se = std::sqrt(cfg.p * (1.0 - cfg.p) / static_cast<double>(N));
  return {check("comm-frequency", "rounds/iterations within 4 standard errors of p",
                std::abs(freq - cfg.p) <= 4.0 * se, describe({{"frequency", freq}, {"standard_error", se}}))};
}

}  // namespace

const std::vector<Suite>& theory_suites() {
  static const std::vector<Suite> suites = {
      {"eg-contraction", "deterministic EG contraction on a strongly monotone game", eg_contraction},
      {"eg-monotone-rate", "EG O(1/K) operator-norm rate on a bilinear game", eg_monotone_rate},
      {"speg-interpolated", "SPEG linear convergence under interpolation", speg_interpolated},
      {"speg-switching", "SPEG switching versus constant steps", speg_switching},
      {"er-constants", "Monte-Carlo check of expected residual constants", er_constants_suite},
      {"speg-weak-minty", "SPEG on the weak Minty scalar family", speg_weak_minty},
      {"ls-budget", "Polyak EG line-search loop budget", ls_budget},
      {"polyak-contraction", "Polyak EG contraction on a strongly monotone game", polyak_contraction},
      {"dec-polyak-schedule", "decreasing Polyak SEG schedule invariants", dec_polyak_schedule},
      {"nu-roots", "step-size constants from the scalar equations", nu_roots},
      {"l0l1-contraction", "(L0, L1) EG contraction on a 1-symmetric game", l0l1_contraction},
      {"l0l1-experiments", "adaptive EG on the cubic and GlobalForsaken problems", l0l1_experiments},
      {"jacobian-fit", "(L0, L1) fit from sampled Jacobians", jacobian_fit},
      {"proxskip-lyapunov", "deterministic ProxSkip Lyapunov decrease and communications", proxskip_lyapunov},
      {"proxskip-svrg", "ProxSkip-L-SVRGDA exact convergence", proxskip_svrg},
      {"comm-frequency", "communication frequency matches p", comm_frequency},
  };
  return suites;
}

std::vector<CheckResult> verify_theory(std::string_view selector) {
  std::vector<CheckResult> out;
  bool matched = false;
  for (const Suite& s : theory_suites()) {
    if (selector != "all" && selector != s.name) continue;
    matched = true;
    auto part = s.run();
    out.insert(out.end(), part.begin(), part.end());
  }
  if (!matched) throw ConfigError("unknown suite '" + std::string(selector) + "'");
  return out;
}

std::string format_check(const CheckResult& c) {
  return std::string(c.passed ? "PASS" : "FAIL") + " " + c.suite + " " + c.name + " " + c.detail;
}

}  // namespace egvi
