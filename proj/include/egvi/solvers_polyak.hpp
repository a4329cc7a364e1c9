#pragma once

#include "egvi/core.hpp"
#include "egvi/run.hpp"
#include "egvi/sampling.hpp"

#include <functional>
#include <limits>
#include <variant>

namespace egvi {

inline constexpr double kPolyakConvergedNorm = 1e-14;

class LineSearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double polyak_update_step(const Vector& F_hat, const Vector& x, const Vector& x_hat);
bool critical_condition(const Vector& F_x, const Vector& F_hat, double A);

// floor(log(L gamma / A) / log(1/beta)) + 1, clamped at 0 when L gamma < A.
std::uint64_t while_loop_budget(double L, double gamma_start, double A, double beta);

struct LineSearchResult {
  double gamma = 0.0;
  Vector x_hat;
  Vector F_hat;
  std::uint64_t loops = 0;
};

// Shrinks gamma by beta until the critical condition holds. F evaluates the
// (possibly minibatch) operator; F_x = F(x) is supplied by the caller.
LineSearchResult line_search_gamma(const std::function<Vector(const Vector&)>& F, const Vector& x,
                                   const Vector& F_x, double gamma_start, double beta, double A,
                                   std::uint64_t max_loops);

struct FixedGamma {
  double gamma;
};
struct LineSearchGamma {
  double beta = 0.5;
  double A = 0.5;
  // Loop cap per search; 0 uses 10 x while_loop_budget when L is known, else 1000.
  std::uint64_t max_loops = 0;
  bool grow = false;
};
using GammaMode = std::variant<FixedGamma, LineSearchGamma>;

struct PolyakState {
  Vector x;
  double gamma_prev = 1.0;
  double omega_prev = std::numeric_limits<double>::infinity();
  std::uint64_t k = 0;
  std::uint64_t loops = 0;
  bool converged = false;
  // Values used in the most recent step.
  double gamma = 0.0;
  double omega = 0.0;
  Vector x_hat;
};

PolyakState polyak_init(const Vector& x0, double gamma_start);

void polyak_eg_step(Oracle& oracle, PolyakState& state, const GammaMode& mode);
void polyak_seg_step(Oracle& oracle, PolyakState& state, const SamplingScheme& scheme,
                     const GammaMode& mode, Rng& rng);
// c_k = sqrt(k + 1) with c_{-1} = 1.
void dec_polyak_seg_step(Oracle& oracle, PolyakState& state, const SamplingScheme& scheme,
                         const GammaMode& mode, Rng& rng);

// Multiplies gamma by 1/beta while the critical condition still holds at x0.
double grow_initial_gamma(Oracle& oracle, const Vector& x0, double gamma, double beta, double A);

enum class PolyakVariant { deterministic, stochastic, decreasing };

RunResult run_polyak(const FiniteSumOperator& op, const Vector& x0, PolyakVariant variant,
                     double gamma_start, const GammaMode& mode, const SamplingScheme& scheme,
                     const RunOptions& options);

}  // namespace egvi
