#include "egvi/solvers_eg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace egvi {

Vector gda_step(Oracle& oracle, const Vector& x, double step, const SamplingScheme& scheme, Rng& rng) {
  if (!(step > 0.0)) throw ContractViolation("step size must be positive");
  const Vector g = oracle.sampled(scheme.draw(rng), x);
  return project_feasible(oracle.op(), x - step * g);
}

EgPoints eg_step(Oracle& oracle, const Vector& x, double gamma, double omega,
                 const SamplingScheme& scheme, Rng& rng, bool same_sample) {
  if (!(gamma > 0.0) || !(omega > 0.0)) throw ContractViolation("step sizes must be positive");
  const SamplingVector v1 = scheme.draw(rng);
  EgPoints out;
  out.extrapolated = project_feasible(oracle.op(), x - gamma * oracle.sampled(v1, x));
  const SamplingVector v2 = same_sample ? v1 : scheme.draw(rng);
  out.next = project_feasible(oracle.op(), x - omega * oracle.sampled(v2, out.extrapolated));
  return out;
}

SpegState speg_init(Oracle& oracle, const Vector& x0, const SamplingScheme& scheme, Rng& rng) {
  SpegState s;
  s.x = x0;
  s.xhat_prev = x0;
  s.g_prev = oracle.sampled(scheme.draw(rng), x0);
  s.k = 0;
  return s;
}

void speg_step(Oracle& oracle, SpegState& state, double gamma, double omega,
               const SamplingScheme& scheme, Rng& rng) {
  if (!(gamma > 0.0) || !(omega > 0.0)) throw ContractViolation("step sizes must be positive");
  Vector xhat = project_feasible(oracle.op(), state.x - gamma * state.g_prev);
  Vector g_new = oracle.sampled(scheme.draw(rng), xhat);
  state.x = project_feasible(oracle.op(), state.x - omega * g_new);
  state.xhat_prev = std::move(xhat);
  state.g_prev = std::move(g_new);
  ++state.k;
}

double policy_constant(double mu, double delta, double L, double sigma_star_sq, double epsilon) {
  if (!(mu > 0.0) || !(L > 0.0)) throw ConfigError("constant step policy needs mu > 0 and L > 0");
  if (delta < 0.0 || sigma_star_sq < 0.0) throw ConfigError("delta and sigma*^2 must be nonnegative");
  double omega = 1.0 / (4.0 * L);
  if (delta > 0.0) omega = std::min(omega, mu / (18.0 * delta));
  if (sigma_star_sq > 0.0) {
    if (!(epsilon > 0.0)) throw ConfigError("target accuracy epsilon must be positive when sigma*^2 > 0");
    omega = std::min(omega, epsilon * mu / (48.0 * sigma_star_sq));
  }
  return omega;
}

double switching_base_step(double mu, double delta, double L) {
  return policy_constant(mu, delta, L);
}

std::uint64_t switching_index(double mu, double delta, double L) {
  const double base = switching_base_step(mu, delta, L);
  return static_cast<std::uint64_t>(std::ceil(4.0 / (mu * base)));
}

double policy_switching(std::uint64_t k, double mu, double delta, double L) {
  const double base = switching_base_step(mu, delta, L);
  if (k <= switching_index(mu, delta, L)) return base;
  const double kk = static_cast<double>(k);
  return (2.0 * kk + 1.0) / ((kk + 1.0) * (kk + 1.0)) * 2.0 / mu;
}

double policy_horizon(std::uint64_t k, std::uint64_t K, double mu, double delta, double L) {
  const double base = switching_base_step(mu, delta, L);
  if (static_cast<double>(K) <= 2.0 / (mu * base)) return base;
  const std::uint64_t k0 = (K + 1) / 2;
  if (k <= k0) return base;
  return 2.0 / (2.0 / base + 0.5 * mu * static_cast<double>(k - k0));
}

WeakMintySteps config_weak_minty(double L, double rho, double delta, double sigma_star_sq,
                                 double initial_dist_sq, std::uint64_t K,
                                 std::optional<double> gamma_override) {
  if (!(L > 0.0)) throw ConfigError("weak Minty configuration needs L > 0");
  if (rho < 0.0 || rho >= 1.0 / (2.0 * L))
    throw ConfigError("weak Minty configuration infeasible: rho must be below 1/(2L)");
  const double gamma_lo = std::max(2.0 * rho, 1.0 / (2.0 * L));
  const double gamma_hi = 1.0 / L;
  WeakMintySteps out;
  out.gamma = gamma_override.value_or(0.5 * (gamma_lo + gamma_hi));
  if (!(out.gamma > gamma_lo && out.gamma < gamma_hi))
    throw ConfigError("weak Minty extrapolation step outside its admissible interval");
  const double omega_hi = std::min(out.gamma - 2.0 * rho, 1.0 / (4.0 * L) - out.gamma / 4.0);
  out.omega = 0.9 * omega_hi;

  const double slack = 1.0 - L * out.gamma;
  const double km1 = K > 0 ? static_cast<double>(K - 1) : 0.0;
  double tau = 1.0;
  tau = std::max(tau, 32.0 * delta / (slack * L * L * L * out.omega));
  tau = std::max(tau, 48.0 * out.omega * out.gamma * delta * km1 / (slack * slack));
  if (sigma_star_sq > 0.0) {
    if (!(initial_dist_sq > 0.0)) throw ConfigError("weak Minty batch size needs ||x0 - x*||^2 > 0");
    tau = std::max(tau, 2.0 * out.omega * out.gamma * sigma_star_sq * km1 / (slack * initial_dist_sq));
  }
  out.tau = static_cast<std::size_t>(std::ceil(tau));
  return out;
}

StepPolicy StepPolicy::constant(double step) {
  if (!(step > 0.0)) throw ConfigError("constant step must be positive");
  return StepPolicy(Constant{step});
}

StepPolicy StepPolicy::switching(double mu, double delta, double L) {
  switching_base_step(mu, delta, L);
  return StepPolicy(Switching{mu, delta, L});
}

StepPolicy StepPolicy::horizon(double mu, double delta, double L, std::uint64_t K) {
  switching_base_step(mu, delta, L);
  return StepPolicy(Horizon{mu, delta, L, K});
}

StepPolicy StepPolicy::custom(std::function<double(std::uint64_t)> schedule) {
  return StepPolicy(Custom{std::move(schedule)});
}

double StepPolicy::operator()(std::uint64_t k) const {
  return std::visit(
      [k](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Constant>) return p.step;
        else if constexpr (std::is_same_v<T, Switching>) return policy_switching(k, p.mu, p.delta, p.L);
        else if constexpr (std::is_same_v<T, Horizon>) return policy_horizon(k, p.K, p.mu, p.delta, p.L);
        else return p.schedule(k);
      },
      kind_);
}

namespace {

bool budget_exhausted(const RunOptions& options, const Oracle& oracle) {
  return options.oracle_budget > 0 && oracle.calls() >= options.oracle_budget;
}

}  // namespace

RunResult run_gda(const FiniteSumOperator& op, const Vector& x0, const StepPolicy& step,
                  const SamplingScheme& scheme, const RunOptions& options) {
  Rng rng = Rng(options.seed).split("gda");
  Oracle oracle(op);
  RunResult res;
  res.x = project_feasible(op, x0);
  Recorder rec(op, res.x, options);
  rec.record(res.trace, 0, 0, 0, res.x);
  std::uint64_t k = 0;
  for (; k < options.iterations && !budget_exhausted(options, oracle); ++k) {
    const double w = step(k);
    Vector next = gda_step(oracle, res.x, w, scheme, rng);
    if (diverged(next)) {
      res.trace.status = RunStatus::diverged;
      break;
    }
    res.x = std::move(next);
    if (rec.due(k + 1)) rec.record(res.trace, k + 1, oracle.calls(), 0, res.x, {{"omega", w}});
  }
  if (res.trace.status != RunStatus::diverged) rec.finish(res.trace, k, oracle.calls(), 0, res.x);
  res.iterations = k;
  res.oracle_calls = oracle.calls();
  return res;
}

RunResult run_eg(const FiniteSumOperator& op, const Vector& x0, const StepPolicy& gamma,
                 const StepPolicy& omega, const SamplingScheme& scheme, const RunOptions& options,
                 bool same_sample) {
  Rng rng = Rng(options.seed).split("eg");
  Oracle oracle(op);
  RunResult res;
  res.x = project_feasible(op, x0);
  Recorder rec(op, res.x, options);
  rec.record(res.trace, 0, 0, 0, res.x);
  std::uint64_t k = 0;
  for (; k < options.iterations && !budget_exhausted(options, oracle); ++k) {
    const double g = gamma(k);
    const double w = omega(k);
    EgPoints pts = eg_step(oracle, res.x, g, w, scheme, rng, same_sample);
    if (diverged(pts.next)) {
      res.trace.status = RunStatus::diverged;
      break;
    }
    res.x = std::move(pts.next);
    if (rec.due(k + 1))
      rec.record(res.trace, k + 1, oracle.calls(), 0, res.x, {{"gamma", g}, {"omega", w}});
  }
  if (res.trace.status != RunStatus::diverged) rec.finish(res.trace, k, oracle.calls(), 0, res.x);
  res.iterations = k;
  res.oracle_calls = oracle.calls();
  return res;
}

RunResult run_speg(const FiniteSumOperator& op, const Vector& x0, const StepPolicy& gamma,
                   const StepPolicy& omega, const SamplingScheme& scheme, const RunOptions& options) {
  Rng rng = Rng(options.seed).split("speg");
  Oracle oracle(op);
  RunResult res;
  SpegState state = speg_init(oracle, project_feasible(op, x0), scheme, rng);
  Recorder rec(op, state.x, options);
  rec.record(res.trace, 0, oracle.calls(), 0, state.x);
  double min_hat = std::numeric_limits<double>::infinity();
  std::uint64_t k = 0;
  for (; k < options.iterations && !budget_exhausted(options, oracle); ++k) {
    const double g = gamma(k);
    const double w = omega(k);
    speg_step(oracle, state, g, w, scheme, rng);
    if (diverged(state.x)) {
      res.trace.status = RunStatus::diverged;
      break;
    }
    min_hat = std::min(min_hat, op.mean(state.xhat_prev).squaredNorm());
    if (rec.due(k + 1))
      rec.record(res.trace, k + 1, oracle.calls(), 0, state.x,
                 {{"gamma", g}, {"omega", w}, {"min_sq_operator_norm_hat", min_hat}});
  }
  if (res.trace.status != RunStatus::diverged) {
    std::map<std::string, double> extra;
    if (std::isfinite(min_hat)) extra["min_sq_operator_norm_hat"] = min_hat;
    rec.finish(res.trace, k, oracle.calls(), 0, state.x, std::move(extra));
  }
  res.x = std::move(state.x);
  res.iterations = k;
  res.oracle_calls = oracle.calls();
  return res;
}

}  // namespace egvi
