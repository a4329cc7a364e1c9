#include "egvi/solvers_polyak.hpp"

#include <algorithm>
#include <cmath>

namespace egvi {

double polyak_update_step(const Vector& F_hat, const Vector& x, const Vector& x_hat) {
  const double denom = F_hat.squaredNorm();
  if (denom == 0.0) throw ContractViolation("Polyak step undefined at a root of the operator");
  return F_hat.dot(x - x_hat) / denom;
}

bool critical_condition(const Vector& F_x, const Vector& F_hat, double A) {
  return (F_hat - F_x).norm() <= A * F_x.norm();
}

std::uint64_t while_loop_budget(double L, double gamma_start, double A, double beta) {
  if (!(L > 0.0) || !(gamma_start > 0.0) || !(A > 0.0) || !(beta > 0.0 && beta < 1.0))
    throw ConfigError("while-loop budget needs positive inputs and beta in (0, 1)");
  const double ratio = std::log(L * gamma_start / A) / std::log(1.0 / beta);
  const double v = std::floor(ratio) + 1.0;
  return v > 0.0 ? static_cast<std::uint64_t>(v) : 0;
}

LineSearchResult line_search_gamma(const std::function<Vector(const Vector&)>& F, const Vector& x,
                                   const Vector& F_x, double gamma_start, double beta, double A,
                                   std::uint64_t max_loops) {
  if (!(gamma_start > 0.0) || !(beta > 0.0 && beta < 1.0) || !(A > 0.0 && A <= 1.0))
    throw ConfigError("line search needs gamma > 0, beta in (0, 1), A in (0, 1]");
  LineSearchResult r;
  r.gamma = gamma_start;
  r.x_hat = x - r.gamma * F_x;
  r.F_hat = F(r.x_hat);
  while (!critical_condition(F_x, r.F_hat, A)) {
    if (r.loops >= max_loops)
      throw LineSearchFailure("line search exceeded its loop cap of " + std::to_string(max_loops));
    r.gamma *= beta;
    r.x_hat = x - r.gamma * F_x;
    r.F_hat = F(r.x_hat);
    ++r.loops;
  }
  return r;
}

PolyakState polyak_init(const Vector& x0, double gamma_start) {
  if (!(gamma_start > 0.0)) throw ConfigError("initial gamma must be positive");
  PolyakState s;
  s.x = x0;
  s.x_hat = x0;
  s.gamma_prev = gamma_start;
  s.gamma = gamma_start;
  return s;
}

namespace {

std::uint64_t loop_cap(const LineSearchGamma& ls, const FiniteSumOperator& op, double gamma) {
  if (ls.max_loops > 0) return ls.max_loops;
  double L = op.info().lipschitz.value_or(0.0);
  if (const auto& comp = op.info().component_lipschitz)
    for (double l : *comp) L = std::max(L, l);
  if (L > 0.0) return std::max<std::uint64_t>(1, 10 * while_loop_budget(L, gamma, ls.A, ls.beta));
  return 1000;
}

// One Polyak extragradient step on the operator F, starting from gamma_start.
void polyak_core(const FiniteSumOperator& op, PolyakState& state, const GammaMode& mode,
                 double gamma_start, const std::function<Vector(const Vector&)>& F, bool clip_omega) {
  const Vector F_x = F(state.x);
  if (F_x.norm() <= kPolyakConvergedNorm) {
    state.converged = true;
    return;
  }
  double gamma = gamma_start;
  Vector x_hat;
  Vector F_hat;
  if (const auto* ls = std::get_if<LineSearchGamma>(&mode)) {
    LineSearchResult r = line_search_gamma(F, state.x, F_x, gamma_start, ls->beta, ls->A,
                                           loop_cap(*ls, op, gamma_start));
    state.loops += r.loops;
    gamma = r.gamma;
    x_hat = std::move(r.x_hat);
    F_hat = std::move(r.F_hat);
  } else {
    x_hat = state.x - gamma * F_x;
    F_hat = F(x_hat);
  }
  if (F_hat.norm() <= kPolyakConvergedNorm) {
    state.converged = true;
    state.x_hat = std::move(x_hat);
    return;
  }
  double omega = polyak_update_step(F_hat, state.x, x_hat);
  if (clip_omega) omega = std::min(omega, state.omega_prev);
  state.x = project_feasible(op, state.x - omega * F_hat);
  state.x_hat = std::move(x_hat);
  state.gamma = gamma;
  state.omega = omega;
  state.gamma_prev = gamma;
  state.omega_prev = omega;
  ++state.k;
}

double gamma_from_mode(const GammaMode& mode, const PolyakState& state) {
  if (const auto* f = std::get_if<FixedGamma>(&mode)) return f->gamma;
  return state.gamma_prev;
}

}  // namespace

void polyak_eg_step(Oracle& oracle, PolyakState& state, const GammaMode& mode) {
  polyak_core(oracle.op(), state, mode, gamma_from_mode(mode, state),
              [&oracle](const Vector& z) { return oracle.full(z); }, false);
}

void polyak_seg_step(Oracle& oracle, PolyakState& state, const SamplingScheme& scheme,
                     const GammaMode& mode, Rng& rng) {
  const SamplingVector v = scheme.draw(rng);
  polyak_core(oracle.op(), state, mode, gamma_from_mode(mode, state),
              [&oracle, &v](const Vector& z) { return oracle.sampled(v, z); }, false);
}

void dec_polyak_seg_step(Oracle& oracle, PolyakState& state, const SamplingScheme& scheme,
                         const GammaMode& mode, Rng& rng) {
  const SamplingVector v = scheme.draw(rng);
  const double k = static_cast<double>(state.k);
  const double c_prev = state.k == 0 ? 1.0 : std::sqrt(k);
  const double c_cur = std::sqrt(k + 1.0);
  double gamma_start = (c_prev / c_cur) * state.gamma_prev;
  // Round down so the computed gamma_k c_k never exceeds gamma_{k-1} c_{k-1}.
  while (gamma_start * c_cur > state.gamma_prev * c_prev) gamma_start = std::nextafter(gamma_start, 0.0);
  if (const auto* f = std::get_if<FixedGamma>(&mode)) gamma_start = f->gamma / c_cur;
  polyak_core(oracle.op(), state, mode, gamma_start,
              [&oracle, &v](const Vector& z) { return oracle.sampled(v, z); }, true);
}

double grow_initial_gamma(Oracle& oracle, const Vector& x0, double gamma, double beta, double A) {
  const Vector F_x = oracle.full(x0);
  if (F_x.norm() <= kPolyakConvergedNorm) return gamma;
  for (int i = 0; i < 64; ++i) {
    const double trial = gamma / beta;
    if (!critical_condition(F_x, oracle.full(x0 - trial * F_x), A)) break;
    gamma = trial;
  }
  return gamma;
}

RunResult run_polyak(const FiniteSumOperator& op, const Vector& x0, PolyakVariant variant,
                     double gamma_start, const GammaMode& mode, const SamplingScheme& scheme,
                     const RunOptions& options) {
  Rng rng = Rng(options.seed).split("polyak");
  Oracle oracle(op);
  RunResult res;
  const Vector start = project_feasible(op, x0);
  if (const auto* ls = std::get_if<LineSearchGamma>(&mode); ls && ls->grow)
    gamma_start = grow_initial_gamma(oracle, start, gamma_start, ls->beta, ls->A);
  PolyakState state = polyak_init(start, gamma_start);
  Recorder rec(op, state.x, options);
  rec.record(res.trace, 0, oracle.calls(), 0, state.x);
  std::uint64_t k = 0;
  for (; k < options.iterations; ++k) {
    if (options.oracle_budget > 0 && oracle.calls() >= options.oracle_budget) break;
    switch (variant) {
      case PolyakVariant::deterministic: polyak_eg_step(oracle, state, mode); break;
      case PolyakVariant::stochastic: polyak_seg_step(oracle, state, scheme, mode, rng); break;
      case PolyakVariant::decreasing: dec_polyak_seg_step(oracle, state, scheme, mode, rng); break;
    }
    if (state.converged) {
      res.trace.status = RunStatus::converged;
      break;
    }
    if (diverged(state.x)) {
      res.trace.status = RunStatus::diverged;
      break;
    }
    if (rec.due(k + 1))
      rec.record(res.trace, k + 1, oracle.calls(), 0, state.x,
                 {{"gamma", state.gamma}, {"omega", state.omega},
                  {"line_search_loops", static_cast<double>(state.loops)}});
  }
  if (res.trace.status != RunStatus::diverged)
    rec.finish(res.trace, k, oracle.calls(), 0, state.x,
               {{"line_search_loops", static_cast<double>(state.loops)}});
  res.x = std::move(state.x);
  res.iterations = k;
  res.oracle_calls = oracle.calls();
  return res;
}

}  // namespace egvi
