#include "egvi/solvers_l0l1.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

namespace egvi {

double nu_residual(NuEquation eq, double nu) {
  switch (eq) {
    case NuEquation::A: return 1.0 - 2.0 * nu - nu * nu * std::exp(2.0 * nu);
    case NuEquation::B: return 1.0 - 4.0 * nu - 2.0 * nu * nu * std::exp(2.0 * nu);
    case NuEquation::C: return nu * std::exp(nu) - 1.0 / std::sqrt(2.0);
    case NuEquation::D: return nu * std::exp(nu) - 1.0;
  }
  throw ContractViolation("unknown nu equation");
}

double solve_nu(NuEquation eq, double tol) {
  if (!(tol > 0.0)) throw ConfigError("bisection tolerance must be positive");
  double lo = 1e-6;
  double hi = 1.0;
  double f_lo = nu_residual(eq, lo);
  const double f_hi = nu_residual(eq, hi);
  if ((f_lo > 0.0) == (f_hi > 0.0)) throw std::runtime_error("nu equation has no sign change on [1e-6, 1]");
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double f_mid = nu_residual(eq, mid);
    if (std::abs(f_mid) < tol) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

KConstants k_constants(double L0, double L1, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("K constants need alpha in (0, 1)");
  if (L0 < 0.0 || L1 < 0.0) throw ConfigError("L0 and L1 must be nonnegative");
  const double p = std::pow(2.0, alpha * alpha / (1.0 - alpha));
  KConstants k;
  k.K0 = L0 * (p + 1.0);
  k.K1 = L1 * p;
  k.K2 = std::pow(L1, 1.0 / (1.0 - alpha)) * p * std::pow(3.0, alpha) *
         std::pow(1.0 - alpha, alpha / (1.0 - alpha));
  return k;
}

namespace {

double strong_alpha_lt1_nu() { return 0.5 * (std::sqrt(5.0) - 1.0); }

double nu_for(const L0L1Config& c) {
  switch (c.regime) {
    case Regime::strongly_monotone: return solve_nu(c.strong_equation);
    case Regime::monotone: return solve_nu(NuEquation::C);
    case Regime::weak_minty: return solve_nu(NuEquation::D);
  }
  throw ContractViolation("unknown regime");
}

void validate(const L0L1Config& c) {
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (c.L0 < 0.0 || c.L1 < 0.0) throw ConfigError("L0 and L1 must be nonnegative");
}

}  // namespace

StepPair gamma_adaptive(const L0L1Config& config, double F_norm) {
  if (F_norm < 0.0) throw ContractViolation("operator norm must be nonnegative");
  validate(config);
  const double fa = std::pow(F_norm, config.alpha);
  double gamma = 0.0;
  if (config.user_constants) {
    const auto [c0, c1] = *config.user_constants;
    gamma = 1.0 / (c0 + c1 * fa);
  } else if (config.alpha == 1.0) {
    gamma = nu_for(config) / (config.L0 + config.L1 * F_norm);
  } else {
    const KConstants k = k_constants(config.L0, config.L1, config.alpha);
    const double a = config.alpha;
    if (config.regime == Regime::strongly_monotone) {
      gamma = strong_alpha_lt1_nu() /
              (2.0 * k.K0 + (2.0 * k.K1 + std::pow(2.0, 1.0 - a) * std::pow(k.K2, 1.0 - a)) * fa);
    } else {
      const double r2 = 2.0 * std::sqrt(2.0);
      gamma = 1.0 / (r2 * k.K0 +
                     (r2 * k.K1 + std::pow(2.0, 1.5 * (1.0 - a)) * std::pow(k.K2, 1.0 - a)) * fa);
    }
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ConfigError("adaptive step is not a positive finite number; check L0, L1");
  return {gamma, config.regime == Regime::weak_minty ? 0.5 * gamma : gamma};
}

double strong_contraction_factor(const L0L1Config& config, double mu, double R) {
  const double nu = solve_nu(config.strong_equation);
  return 1.0 - nu * mu / (config.L0 * (1.0 + config.L1 * std::exp(config.L1 * R) * R));
}

double weak_minty_margin(const L0L1Config& config, double rho, double R) {
  const double nu = solve_nu(NuEquation::D);
  return nu / (config.L0 * (1.0 + config.L1 * R * std::exp(config.L1 * R))) - 4.0 * rho;
}

Vector eg_l0l1_step(Oracle& oracle, const Vector& x, const L0L1Config& config, StepPair* used) {
  const Vector F_x = oracle.full(x);
  const StepPair s = gamma_adaptive(config, F_x.norm());
  const Vector x_hat = project_feasible(oracle.op(), x - s.gamma * F_x);
  if (used) *used = s;
  return project_feasible(oracle.op(), x - s.omega * oracle.full(x_hat));
}

RunResult run_eg_l0l1(const FiniteSumOperator& op, const Vector& x0, const L0L1Config& config,
                      const RunOptions& options) {
  validate(config);
  const OperatorInfo& info = op.info();
  if (config.regime == Regime::weak_minty && config.alpha == 1.0 && !config.user_constants &&
      info.rho && info.solution) {
    const double margin = weak_minty_margin(config, *info.rho, (x0 - *info.solution).norm());
    if (margin <= 0.0)
      std::clog << "warning: weak Minty parameter too large for the local guarantee (margin "
                << margin << "); running anyway\n";
  }
  Oracle oracle(op);
  RunResult res;
  res.x = project_feasible(op, x0);
  Recorder rec(op, res.x, options);
  rec.record(res.trace, 0, 0, 0, res.x);
  std::uint64_t k = 0;
  for (; k < options.iterations; ++k) {
    if (options.oracle_budget > 0 && oracle.calls() >= options.oracle_budget) break;
    StepPair s;
    Vector next = eg_l0l1_step(oracle, res.x, config, &s);
    if (diverged(next)) {
      res.trace.status = RunStatus::diverged;
      break;
    }
    res.x = std::move(next);
    if (rec.due(k + 1))
      rec.record(res.trace, k + 1, oracle.calls(), 0, res.x, {{"gamma", s.gamma}, {"omega", s.omega}});
  }
  if (res.trace.status != RunStatus::diverged) rec.finish(res.trace, k, oracle.calls(), 0, res.x);
  res.iterations = k;
  res.oracle_calls = oracle.calls();
  return res;
}

double spectral_norm_power(const Matrix& J, double tol, int max_iter) {
  if (J.size() == 0) return 0.0;
  const Matrix G = J.transpose() * J;
  Vector v = Vector::LinSpaced(G.cols(), 1.0, 2.0);
  v.normalize();
  double lambda = v.dot(G * v);
  for (int it = 0; it < max_iter; ++it) {
    Vector w = G * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    const double next = v.dot(G * v);
    const bool done = std::abs(next - lambda) <= tol * std::max(next, 1e-300);
    lambda = next;
    if (done) break;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

Matrix finite_difference_jacobian(const FiniteSumOperator& op, const Vector& x, double h) {
  const auto d = static_cast<Eigen::Index>(op.dim());
  Matrix J(d, d);
  Vector xp = x;
  Vector xm = x;
  for (Eigen::Index j = 0; j < d; ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    J.col(j) = (op.mean(xp) - op.mean(xm)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return J;
}

L0L1Fit fit_l0l1(const FiniteSumOperator& op, std::span<const Vector> points, double alpha) {
  if (points.size() < 10) throw ConfigError("fit_l0l1 needs at least 10 sample points");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  const std::size_t m = points.size();
  std::vector<double> t(m);
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Matrix J = op.has_jacobian() ? op.jacobian(points[i]) : finite_difference_jacobian(op, points[i]);
    y[i] = spectral_norm_power(J);
    t[i] = std::pow(op.mean(points[i]).norm(), alpha);
  }
  const double n = static_cast<double>(m);
  const double t_mean = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double stt = 0.0;
  double sty = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    stt += (t[i] - t_mean) * (t[i] - t_mean);
    sty += (t[i] - t_mean) * (y[i] - y_mean);
  }

  L0L1Fit fit;
  double a = y_mean;
  double b = 0.0;
  if (stt <= 1e-24 * std::max(1.0, t_mean * t_mean) * n) {
    std::clog << "warning: fit_l0l1 is degenerate (all operator norms equal); returning L1 = 0\n";
    fit.degenerate = true;
  } else {
    b = sty / stt;
    a = y_mean - b * t_mean;
  }
  fit.ls_L0 = a;
  fit.ls_L1 = b;
  if (b < 0.0) {
    b = 0.0;
    a = y_mean;
  }
  if (a < 0.0) {
    a = 0.0;
    double tt = 0.0;
    double ty = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      tt += t[i] * t[i];
      ty += t[i] * y[i];
    }
    b = tt > 0.0 ? std::max(0.0, ty / tt) : 0.0;
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, y[i] - a - b * t[i]);
  fit.lift = std::max(0.0, worst);
  fit.L0 = a + fit.lift;
  fit.L1 = b;
  fit.max_violation = worst - fit.lift;
  return fit;
}

std::vector<Vector> grid_points_2d(double radius, std::size_t per_axis) {
  if (per_axis < 2) throw ConfigError("grid needs at least 2 points per axis");
  std::vector<Vector> pts;
  pts.reserve(per_axis * per_axis);
  const Vector axis = Vector::LinSpaced(static_cast<Eigen::Index>(per_axis), -radius, radius);
  for (Eigen::Index i = 0; i < axis.size(); ++i)
    for (Eigen::Index j = 0; j < axis.size(); ++j) pts.push_back(Vector{{axis(i), axis(j)}});
  return pts;
}

}  // namespace egvi
