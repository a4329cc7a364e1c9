#pragma once

#include "egvi/core.hpp"
#include "egvi/problems.hpp"

#include <variant>

namespace egvi {

struct ClientState {
  Vector x;
  Vector h;      // control variate
  Vector w;      // SVRG anchor
  Vector F_w;    // cached full local operator at w; empty until first needed
  Vector x_hat;  // local point before the (possibly skipped) averaging of the last round
};

struct NetworkConfig {
  double gamma = 0.0;
  double p = 1.0;  // communication probability
  double q = 1.0;  // anchor refresh probability
  double M = 0.0;  // Lyapunov weight of the SVRG variance term
};

struct CommLog {
  std::uint64_t rounds = 0;
  std::uint64_t iterations = 0;
  std::vector<std::uint64_t> round_iterations;
};

struct DeterministicEstimator {};
struct StochasticEstimator {
  std::size_t tau = 1;  // per-client minibatch size
};
using Estimator = std::variant<DeterministicEstimator, StochasticEstimator>;

// Simulated client network. Clients are visited in index order; the server
// stream draws every shared coin. The problem must outlive the network.
class Network {
 public:
  Network(const FederatedProblem& problem, const Vector& x0, std::uint64_t seed);

  const FederatedProblem& problem() const { return *problem_; }
  std::size_t size() const { return states_.size(); }
  std::vector<ClientState>& states() { return states_; }
  const std::vector<ClientState>& states() const { return states_; }
  const CommLog& log() const { return log_; }
  CommLog& log() { return log_; }
  Rng& server() { return server_; }
  Rng& client_rng(std::size_t i) { return client_rngs_[i]; }
  Oracle& oracle(std::size_t i) { return oracles_[i]; }
  std::uint64_t oracle_calls() const;

  Vector mean_x() const;
  double consensus_error() const;  // max_i ∥x_i − x̄∥

 private:
  const FederatedProblem* problem_;
  std::vector<ClientState> states_;
  std::vector<Oracle> oracles_;
  Rng server_;
  std::vector<Rng> client_rngs_;
  CommLog log_;
};

std::vector<Vector> consensus_prox(std::span<const Vector> points);

// One round with the coin given explicitly; the round driver draws it.
void proxskip_vip_apply(Network& net, const NetworkConfig& cfg, const Estimator& est, bool theta);
bool proxskip_vip_round(Network& net, const NetworkConfig& cfg, const Estimator& est);

void proxskip_svrg_apply(Network& net, const NetworkConfig& cfg, bool theta, bool zeta);
bool proxskip_l_svrgda_round(Network& net, const NetworkConfig& cfg);

// H local steps followed by exact averaging; one communication round.
void local_gda_round(Network& net, std::uint64_t H, double gamma, const Estimator& est);
void local_eg_round(Network& net, std::uint64_t H, double gamma, const Estimator& est);
std::uint64_t default_sync_period(double p);

NetworkConfig theoretical_params_gda(double ell, double mu);
NetworkConfig theoretical_params_svrg(double ell_hat, double mu);

// Star-cocoercivity of the stacked client operator: max_i 1 / λmin(sym(M̄_i^{-1})).
double star_cocoercivity(const FederatedProblem& problem);
// Smallest ℓ̂ with (1/m)Σ_j ∥F_ij(x) − F_ij(z*)∥² ≤ ℓ̂⟨H_i(x) − H_i(z*), x − z*⟩ for every client.
double average_star_cocoercivity(const FederatedProblem& problem);

std::vector<Vector> client_operators_at_solution(const FederatedProblem& problem);
double svrg_sigma_sq(const Network& net);
// Σ∥x_i − z*∥² + (γ²/p²)Σ∥h_i − H_i(z*)∥² + M γ² σ².
double lyapunov_V(const Network& net, const NetworkConfig& cfg, bool include_sigma = false);

enum class FlAlgorithm { proxskip_vip, proxskip_svrg, local_gda, local_eg };

struct FlRunOptions {
  std::uint64_t iterations = 1000;  // local iterations; local methods use whole rounds of H
  std::uint64_t record_stride = 1;
  std::uint64_t seed = 0;
  double target_relative_error = 0.0;  // > 0 stops once the averaged iterate reaches it
  std::uint64_t sync_period = 0;       // local methods; 0 uses default_sync_period(p)
};

struct FlRunResult {
  Trace trace;
  Vector x;  // averaged iterate
  std::uint64_t iterations = 0;
  std::uint64_t comm_rounds = 0;
  std::uint64_t oracle_calls = 0;
  bool reached_target = false;
};

// Relative error of the stacked iterate against the replicated solution.
double fl_relative_error(const Network& net, const Vector& x0);

FlRunResult run_federated(const FederatedProblem& problem, const Vector& x0, FlAlgorithm algorithm,
                          const NetworkConfig& cfg, const Estimator& est, const FlRunOptions& options);

}  // namespace egvi
