#include "egvi/fl.hpp"

#include "egvi/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace egvi {

Network::Network(const FederatedProblem& problem, const Vector& x0, std::uint64_t seed)
    : problem_(&problem), server_(Rng(seed).split("server")) {
  if (problem.clients.empty()) throw ConfigError("network needs at least one client");
  const Rng clients_root = Rng(seed).split("clients");
  for (std::size_t i = 0; i < problem.clients.size(); ++i) {
    if (static_cast<std::size_t>(x0.size()) != problem.clients[i].dim())
      throw ConfigError("initial point dimension does not match the clients");
    ClientState s;
    s.x = x0;
    s.h = Vector::Zero(x0.size());
    s.w = x0;
    s.x_hat = x0;
    states_.push_back(std::move(s));
    oracles_.emplace_back(problem.clients[i]);
    client_rngs_.push_back(clients_root.split(static_cast<std::uint64_t>(i)));
  }
}

std::uint64_t Network::oracle_calls() const {
  std::uint64_t c = 0;
  for (const auto& o : oracles_) c += o.calls();
  return c;
}

Vector Network::mean_x() const {
  Vector m = Vector::Zero(states_.front().x.size());
  for (const auto& s : states_) m += s.x;
  return m / static_cast<double>(states_.size());
}

double Network::consensus_error() const {
  const Vector m = mean_x();
  double e = 0.0;
  for (const auto& s : states_) e = std::max(e, (s.x - m).norm());
  return e;
}

std::vector<Vector> consensus_prox(std::span<const Vector> points) {
  if (points.empty()) throw ContractViolation("consensus_prox needs at least one point");
  Vector mean = Vector::Zero(points.front().size());
  for (const auto& p : points) {
    if (p.size() != mean.size()) throw ContractViolation("consensus_prox needs equal dimensions");
    mean += p;
  }
  mean /= static_cast<double>(points.size());
  return std::vector<Vector>(points.size(), mean);
}

namespace {

Vector estimate(Network& net, std::size_t i, const Vector& x, const Estimator& est) {
  if (std::holds_alternative<DeterministicEstimator>(est)) return net.oracle(i).full(x);
  const std::size_t m = net.problem().clients[i].size();
  const std::size_t tau = std::min(std::get<StochasticEstimator>(est).tau, m);
  const SamplingScheme scheme = SamplingScheme::minibatch(m, tau);
  return net.oracle(i).sampled(scheme.draw(net.client_rng(i)), x);
}

void validate(const NetworkConfig& cfg) {
  if (!(cfg.gamma > 0.0)) throw ConfigError("network step size must be positive");
  if (!(cfg.p > 0.0 && cfg.p <= 1.0)) throw ConfigError("communication probability must lie in (0, 1]");
  if (!(cfg.q > 0.0 && cfg.q <= 1.0)) throw ConfigError("anchor probability must lie in (0, 1]");
}

// Shared ProxSkip tail: x̂ is already stored in each client's x_hat.
void proxskip_finish(Network& net, const NetworkConfig& cfg, bool theta) {
  auto& states = net.states();
  std::vector<Vector> next;
  next.reserve(states.size());
  if (theta) {
    std::vector<Vector> shifted;
    shifted.reserve(states.size());
    for (const auto& s : states) shifted.push_back(s.x_hat - (cfg.gamma / cfg.p) * s.h);
    next = consensus_prox(shifted);
  } else {
    for (const auto& s : states) next.push_back(s.x_hat);
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    states[i].h += (cfg.p / cfg.gamma) * (next[i] - states[i].x_hat);
    states[i].x = std::move(next[i]);
  }
  CommLog& log = net.log();
  if (theta) {
    ++log.rounds;
    log.round_iterations.push_back(log.iterations);
  }
  ++log.iterations;
}

}  // namespace

void proxskip_vip_apply(Network& net, const NetworkConfig& cfg, const Estimator& est, bool theta) {
  validate(cfg);
  auto& states = net.states();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Vector g = estimate(net, i, states[i].x, est);
    states[i].x_hat = states[i].x - cfg.gamma * (g - states[i].h);
  }
  proxskip_finish(net, cfg, theta);
}

bool proxskip_vip_round(Network& net, const NetworkConfig& cfg, const Estimator& est) {
  const bool theta = net.server().bernoulli(cfg.p);
  proxskip_vip_apply(net, cfg, est, theta);
  return theta;
}

void proxskip_svrg_apply(Network& net, const NetworkConfig& cfg, bool theta, bool zeta) {
  validate(cfg);
  auto& states = net.states();
  for (std::size_t i = 0; i < states.size(); ++i) {
    ClientState& s = states[i];
    Oracle& oracle = net.oracle(i);
    if (s.F_w.size() == 0) s.F_w = oracle.full(s.w);
    const std::size_t m = net.problem().clients[i].size();
    const std::size_t j = net.client_rng(i).uniform_index(m);
    SamplingVector v;
    v.n = m;
    v.entries = {{j, static_cast<double>(m)}};
    const Vector g = oracle.sampled(v, s.x) - oracle.sampled(v, s.w) + s.F_w;
    if (zeta) {
      s.w = s.x;
      s.F_w = oracle.full(s.w);
    }
    s.x_hat = s.x - cfg.gamma * (g - s.h);
  }
  proxskip_finish(net, cfg, theta);
}

bool proxskip_l_svrgda_round(Network& net, const NetworkConfig& cfg) {
  const bool theta = net.server().bernoulli(cfg.p);
  const bool zeta = net.server().bernoulli(cfg.q);
  proxskip_svrg_apply(net, cfg, theta, zeta);
  return theta;
}

namespace {

void average_and_log(Network& net, std::uint64_t H) {
  auto& states = net.states();
  std::vector<Vector> xs;
  xs.reserve(states.size());
  for (const auto& s : states) xs.push_back(s.x);
  std::vector<Vector> avg = consensus_prox(xs);
  for (std::size_t i = 0; i < states.size(); ++i) states[i].x = std::move(avg[i]);
  CommLog& log = net.log();
  log.iterations += H;
  ++log.rounds;
  log.round_iterations.push_back(log.iterations - 1);
}

}  // namespace

void local_gda_round(Network& net, std::uint64_t H, double gamma, const Estimator& est) {
  if (H < 1) throw ConfigError("sync period must be at least 1");
  if (!(gamma > 0.0)) throw ConfigError("step size must be positive");
  auto& states = net.states();
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::uint64_t t = 0; t < H; ++t) states[i].x -= gamma * estimate(net, i, states[i].x, est);
  average_and_log(net, H);
}

void local_eg_round(Network& net, std::uint64_t H, double gamma, const Estimator& est) {
  if (H < 1) throw ConfigError("sync period must be at least 1");
  if (!(gamma > 0.0)) throw ConfigError("step size must be positive");
  auto& states = net.states();
  for (std::size_t i = 0; i < states.size(); ++i) {
    ClientState& s = states[i];
    Oracle& oracle = net.oracle(i);
    for (std::uint64_t t = 0; t < H; ++t) {
      if (std::holds_alternative<DeterministicEstimator>(est)) {
        const Vector x_hat = s.x - gamma * oracle.full(s.x);
        s.x -= gamma * oracle.full(x_hat);
      } else {
        const std::size_t m = net.problem().clients[i].size();
        const std::size_t tau = std::min(std::get<StochasticEstimator>(est).tau, m);
        const SamplingVector v = SamplingScheme::minibatch(m, tau).draw(net.client_rng(i));
        const Vector x_hat = s.x - gamma * oracle.sampled(v, s.x);
        s.x -= gamma * oracle.sampled(v, x_hat);
      }
    }
  }
  average_and_log(net, H);
}

std::uint64_t default_sync_period(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("communication probability must lie in (0, 1]");
  return static_cast<std::uint64_t>(std::ceil(1.0 / p));
}

NetworkConfig theoretical_params_gda(double ell, double mu) {
  if (!(ell > 0.0) || !(mu > 0.0)) throw ConfigError("theoretical parameters need ell > 0 and mu > 0");
  NetworkConfig c;
  c.gamma = 1.0 / (2.0 * ell);
  c.p = std::sqrt(c.gamma * mu);
  c.q = 1.0;
  return c;
}

NetworkConfig theoretical_params_svrg(double ell_hat, double mu) {
  if (!(ell_hat > 0.0) || !(mu > 0.0))
    throw ConfigError("theoretical parameters need ell_hat > 0 and mu > 0");
  NetworkConfig c;
  c.gamma = std::min(1.0 / mu, 1.0 / (6.0 * ell_hat));
  c.q = 2.0 * c.gamma * mu;
  c.M = 4.0 / c.q;
  c.p = std::sqrt(c.gamma * mu);
  return c;
}

namespace {

const AffineComponents& affine_of(const FiniteSumOperator& op) {
  const auto* ap = op.affine_parts();
  if (!ap) throw ConfigError("cocoercivity constants need affine clients");
  return *ap;
}

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

double star_cocoercivity(const FederatedProblem& problem) {
  double ell = 0.0;
  for (const auto& c : problem.clients) {
    const Matrix inv = affine_of(c).mean_matrix.inverse();
    const double lo = min_symmetric_eigenvalue(sym(inv));
    if (!(lo > 0.0)) throw ConfigError("client operator is not star-cocoercive");
    ell = std::max(ell, 1.0 / lo);
  }
  return ell;
}

double average_star_cocoercivity(const FederatedProblem& problem) {
  double ell = 0.0;
  for (const auto& c : problem.clients) {
    const AffineComponents& ap = affine_of(c);
    const Matrix S = sym(ap.mean_matrix);
    Matrix Q = Matrix::Zero(S.rows(), S.cols());
    for (const auto& Mj : ap.matrices) Q += Mj.transpose() * Mj;
    Q /= static_cast<double>(ap.matrices.size());
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw ConfigError("client operator is not strongly monotone");
    const Matrix S_inv_sqrt = es.operatorInverseSqrt();
    const Matrix G = S_inv_sqrt * Q * S_inv_sqrt;
    ell = std::max(ell, Eigen::SelfAdjointEigenSolver<Matrix>(sym(G)).eigenvalues().maxCoeff());
  }
  return ell;
}

std::vector<Vector> client_operators_at_solution(const FederatedProblem& problem) {
  std::vector<Vector> out;
  out.reserve(problem.clients.size());
  for (const auto& c : problem.clients) out.push_back(c.mean(problem.solution));
  return out;
}

double svrg_sigma_sq(const Network& net) {
  const FederatedProblem& pb = net.problem();
  double total = 0.0;
  for (std::size_t i = 0; i < pb.clients.size(); ++i) {
    const FiniteSumOperator& c = pb.clients[i];
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
      s += (c.component(j, pb.solution) - c.component(j, net.states()[i].w)).squaredNorm();
    total += s / static_cast<double>(c.size());
  }
  return total;
}

double lyapunov_V(const Network& net, const NetworkConfig& cfg, bool include_sigma) {
  const FederatedProblem& pb = net.problem();
  if (pb.solution.size() == 0) throw MetricUnavailable("Lyapunov function needs the solution");
  const std::vector<Vector> H_star = client_operators_at_solution(pb);
  double dist = 0.0;
  double ctrl = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    dist += (net.states()[i].x - pb.solution).squaredNorm();
    ctrl += (net.states()[i].h - H_star[i]).squaredNorm();
  }
  double V = dist + (cfg.gamma * cfg.gamma) / (cfg.p * cfg.p) * ctrl;
  if (include_sigma) V += cfg.M * cfg.gamma * cfg.gamma * svrg_sigma_sq(net);
  return V;
}

double fl_relative_error(const Network& net, const Vector& x0) {
  const Vector& z = net.problem().solution;
  const double denom = static_cast<double>(net.size()) * (x0 - z).squaredNorm();
  if (denom == 0.0) throw MetricUnavailable("relative error undefined when x0 equals the solution");
  double num = 0.0;
  for (const auto& s : net.states()) num += (s.x - z).squaredNorm();
  return num / denom;
}

FlRunResult run_federated(const FederatedProblem& problem, const Vector& x0, FlAlgorithm algorithm,
                          const NetworkConfig& cfg, const Estimator& est, const FlRunOptions& options) {
  validate(cfg);
  Network net(problem, x0, options.seed);
  FlRunResult res;
  const std::uint64_t stride = std::max<std::uint64_t>(1, options.record_stride);
  const bool local = algorithm == FlAlgorithm::local_gda || algorithm == FlAlgorithm::local_eg;
  const std::uint64_t H = options.sync_period > 0 ? options.sync_period : default_sync_period(cfg.p);

  auto record = [&](std::uint64_t k) {
    TraceRecord r;
    r.iteration = k;
    r.oracle_calls = net.oracle_calls();
    r.comm_rounds = net.log().rounds;
    r.seed = options.seed;
    r.metrics["relative_error"] = fl_relative_error(net, x0);
    r.metrics["consensus_error"] = net.consensus_error();
    res.trace.push(std::move(r));
  };
  record(0);
  std::uint64_t last_recorded = 0;
  std::uint64_t next_record = stride;

  while (net.log().iterations < options.iterations) {
    switch (algorithm) {
      case FlAlgorithm::proxskip_vip: proxskip_vip_round(net, cfg, est); break;
      case FlAlgorithm::proxskip_svrg: proxskip_l_svrgda_round(net, cfg); break;
      case FlAlgorithm::local_gda: local_gda_round(net, H, cfg.gamma, est); break;
      case FlAlgorithm::local_eg: local_eg_round(net, H, cfg.gamma, est); break;
    }
    const std::uint64_t k = net.log().iterations;
    bool diverged_now = false;
    for (const auto& s : net.states()) diverged_now = diverged_now || diverged(s.x);
    if (diverged_now) {
      res.trace.status = RunStatus::diverged;
      break;
    }
    const bool reached =
        options.target_relative_error > 0.0 && fl_relative_error(net, x0) <= options.target_relative_error;
    if (k >= next_record || reached) {
      record(k);
      last_recorded = k;
      while (next_record <= k) next_record += local ? std::max(stride, H) : stride;
    }
    if (reached) {
      res.reached_target = true;
      res.trace.status = RunStatus::converged;
      break;
    }
  }
  if (res.trace.status != RunStatus::diverged && last_recorded != net.log().iterations)
    record(net.log().iterations);
  res.x = net.mean_x();
  res.iterations = net.log().iterations;
  res.comm_rounds = net.log().rounds;
  res.oracle_calls = net.oracle_calls();
  return res;
}

}  // namespace egvi
