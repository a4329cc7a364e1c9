#pragma once

#include "egvi/core.hpp"
#include "egvi/run.hpp"
#include "egvi/sampling.hpp"

#include <functional>
#include <variant>

namespace egvi {

Vector gda_step(Oracle& oracle, const Vector& x, double step, const SamplingScheme& scheme, Rng& rng);

struct EgPoints {
  Vector extrapolated;
  Vector next;
};

EgPoints eg_step(Oracle& oracle, const Vector& x, double gamma, double omega,
                 const SamplingScheme& scheme, Rng& rng, bool same_sample = true);

struct SpegState {
  Vector x;
  Vector xhat_prev;
  Vector g_prev;
  std::uint64_t k = 0;
};

// x̂_{-1} = x_0 and one bootstrap evaluation g = F_{v_{-1}}(x_0).
SpegState speg_init(Oracle& oracle, const Vector& x0, const SamplingScheme& scheme, Rng& rng);
void speg_step(Oracle& oracle, SpegState& state, double gamma, double omega,
               const SamplingScheme& scheme, Rng& rng);

double policy_constant(double mu, double delta, double L, double sigma_star_sq = 0.0,
                       double epsilon = 0.0);
double switching_base_step(double mu, double delta, double L);
std::uint64_t switching_index(double mu, double delta, double L);
double policy_switching(std::uint64_t k, double mu, double delta, double L);
double policy_horizon(std::uint64_t k, std::uint64_t K, double mu, double delta, double L);

struct WeakMintySteps {
  double gamma = 0.0;
  double omega = 0.0;
  std::size_t tau = 1;
};
WeakMintySteps config_weak_minty(double L, double rho, double delta, double sigma_star_sq,
                                 double initial_dist_sq, std::uint64_t K,
                                 std::optional<double> gamma_override = std::nullopt);

class StepPolicy {
 public:
  struct Constant {
    double step;
  };
  struct Switching {
    double mu, delta, L;
  };
  struct Horizon {
    double mu, delta, L;
    std::uint64_t K;
  };
  struct Custom {
    std::function<double(std::uint64_t)> schedule;
  };

  static StepPolicy constant(double step);
  static StepPolicy switching(double mu, double delta, double L);
  static StepPolicy horizon(double mu, double delta, double L, std::uint64_t K);
  static StepPolicy custom(std::function<double(std::uint64_t)> schedule);

  double operator()(std::uint64_t k) const;

 private:
  explicit StepPolicy(std::variant<Constant, Switching, Horizon, Custom> v) : kind_(std::move(v)) {}
  std::variant<Constant, Switching, Horizon, Custom> kind_;
};

RunResult run_gda(const FiniteSumOperator& op, const Vector& x0, const StepPolicy& step,
                  const SamplingScheme& scheme, const RunOptions& options);
RunResult run_eg(const FiniteSumOperator& op, const Vector& x0, const StepPolicy& gamma,
                 const StepPolicy& omega, const SamplingScheme& scheme, const RunOptions& options,
                 bool same_sample = true);
// Records min_sq_operator_norm_hat = min_{j<=k} ∥F(x̂_j)∥² alongside the usual metrics.
RunResult run_speg(const FiniteSumOperator& op, const Vector& x0, const StepPolicy& gamma,
                   const StepPolicy& omega, const SamplingScheme& scheme, const RunOptions& options);

}  // namespace egvi
