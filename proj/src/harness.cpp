#include "egvi/harness.hpp"

#include "egvi/solvers_eg.hpp"
#include "egvi/solvers_l0l1.hpp"
#include "egvi/solvers_polyak.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <set>
#include <thread>

namespace egvi {

const std::vector<RegistryEntry>& problem_registry() {
  static const std::vector<RegistryEntry> r = {
      {"quadratic_game", "finite-sum strongly monotone quadratic game (n, d, eig ranges, interpolated)"},
      {"bilinear_game", "monotone bilinear game with singular values in [0.1, 1] (d)"},
      {"weak_minty_scalar", "scalar weak Minty family with L = 8, rho = 1/32 (n)"},
      {"global_forsaken", "two-dimensional weak Minty GlobalForsaken game"},
      {"cubic_minmax", "monotone cubic min-max game with random PD matrices (d)"},
      {"robust_least_squares", "robust least squares saddle problem (data or rows/cols, lambda)"},
      {"policeman_burglar", "policemen and burglar matrix game on simplices (n, d)"},
      {"sign_power", "two-dimensional sign-power (L0, L1) test operator (exponent)"},
      {"sinh_game", "strongly monotone 1-symmetric game F(x) = sinh(x) (d)"},
      {"federated_quadratic_game", "heterogeneous quadratic game split over clients (clients, components, d)"},
  };
  return r;
}

const std::vector<RegistryEntry>& algorithm_registry() {
  static const std::vector<RegistryEntry> r = {
      {"gda", "stochastic gradient descent ascent"},
      {"eg", "same-sample stochastic extragradient"},
      {"speg", "stochastic past extragradient (single call)"},
      {"polyak_eg", "extragradient with Polyak update step"},
      {"polyak_seg", "stochastic Polyak extragradient (same sample)"},
      {"dec_polyak_seg", "stochastic Polyak extragradient with decreasing schedule"},
      {"eg_l0l1", "extragradient with (L0, L1)-adaptive step sizes"},
      {"proxskip", "ProxSkip-(S)GDA over the client network"},
      {"proxskip_svrg", "ProxSkip-L-SVRGDA over the client network"},
      {"local_gda", "Local (S)GDA with averaging every sync_period steps"},
      {"local_eg", "Local (S)EG with averaging every sync_period steps"},
  };
  return r;
}

const std::vector<RegistryEntry>& policy_registry() {
  static const std::vector<RegistryEntry> r = {
      {"constant", "fixed gamma and omega (omega defaults to gamma)"},
      {"theory", "theoretical constant step for the algorithm family"},
      {"switching", "constant then O(1/k) steps after the switching index"},
      {"horizon", "constant then decreasing steps using the iteration horizon"},
      {"weak_minty", "extrapolation and update steps for weak Minty problems"},
      {"adaptive", "(L0, L1)-adaptive steps; c0 and c1 switch to the user form"},
  };
  return r;
}

namespace {

bool known(const std::vector<RegistryEntry>& reg, const std::string& id) {
  return std::any_of(reg.begin(), reg.end(), [&](const RegistryEntry& e) { return e.id == id; });
}

bool is_federated(const std::string& algorithm) {
  return algorithm == "proxskip" || algorithm == "proxskip_svrg" || algorithm == "local_gda" ||
         algorithm == "local_eg";
}

class SectionReader {
 public:
  explicit SectionReader(const ConfigSection& s) : s_(s) {}

  [[noreturn]] void fail(std::string_view key, const std::string& msg) const {
    throw ConfigError(s_.name + "." + std::string(key) + ": " + msg);
  }

  const ConfigValue::Scalar* scalar(std::string_view key) {
    used_.insert(std::string(key));
    const ConfigValue* v = s_.find(key);
    if (!v) return nullptr;
    if (v->is_array()) fail(key, "expected a single value, found an array");
    return &std::get<ConfigValue::Scalar>(v->data);
  }

  void read(std::string_view key, std::string& out) {
    if (const auto* s = scalar(key)) {
      if (const auto* str = std::get_if<std::string>(s)) out = *str;
      else fail(key, "expected a string");
    }
  }

  void read(std::string_view key, bool& out) {
    if (const auto* s = scalar(key)) {
      if (const auto* b = std::get_if<bool>(s)) out = *b;
      else fail(key, "expected true or false");
    }
  }

  double number(std::string_view key, const ConfigValue::Scalar& s) const {
    if (const auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&s)) return *d;
    fail(key, "expected a number");
  }

  void read(std::string_view key, double& out) {
    if (const auto* s = scalar(key)) out = number(key, *s);
  }

  void read(std::string_view key, std::optional<double>& out) {
    if (const auto* s = scalar(key)) out = number(key, *s);
  }

  template <typename T>
    requires std::is_unsigned_v<T>
  void read(std::string_view key, T& out) {
    if (const auto* s = scalar(key)) {
      const auto* i = std::get_if<std::int64_t>(s);
      if (!i) fail(key, "expected an integer");
      if (*i < 0) fail(key, "must be nonnegative");
      out = static_cast<T>(*i);
    }
  }

  const std::vector<ConfigValue::Scalar>* array(std::string_view key) {
    used_.insert(std::string(key));
    const ConfigValue* v = s_.find(key);
    if (!v) return nullptr;
    if (!v->is_array()) fail(key, "expected an array");
    return &std::get<std::vector<ConfigValue::Scalar>>(v->data);
  }

  void read(std::string_view key, Interval& out) {
    if (const auto* a = array(key)) {
      if (a->size() != 2) fail(key, "expected [lo, hi]");
      out = {number(key, (*a)[0]), number(key, (*a)[1])};
      if (!(out.lo <= out.hi)) fail(key, "interval needs lo <= hi");
    }
  }

  void read(std::string_view key, std::vector<std::uint64_t>& out) {
    if (const auto* a = array(key)) {
      out.clear();
      for (const auto& s : *a) {
        const auto* i = std::get_if<std::int64_t>(&s);
        if (!i || *i < 0) fail(key, "expected nonnegative integers");
        out.push_back(static_cast<std::uint64_t>(*i));
      }
    }
  }

  void read(std::string_view key, std::vector<std::string>& out) {
    if (const auto* a = array(key)) {
      out.clear();
      for (const auto& s : *a) {
        const auto* str = std::get_if<std::string>(&s);
        if (!str) fail(key, "expected strings");
        out.push_back(*str);
      }
    }
  }

  void read(std::string_view key, std::optional<std::vector<double>>& out) {
    if (const auto* a = array(key)) {
      std::vector<double> v;
      for (const auto& s : *a) v.push_back(number(key, s));
      out = std::move(v);
    }
  }

  void reject_unknown() const {
    for (const auto& [k, v] : s_.entries)
      if (!used_.count(k)) fail(k, "unknown key");
  }

 private:
  const ConfigSection& s_;
  std::set<std::string> used_;
};

}  // namespace

ExperimentConfig experiment_from_section(const ConfigSection& section) {
  ExperimentConfig c;
  c.name = section.name;
  SectionReader r(section);
  r.read("problem", c.problem);
  r.read("n", c.n);
  r.read("d", c.d);
  r.read("problem_seed", c.problem_seed);
  r.read("interpolated", c.interpolated);
  r.read("eig_A", c.eig_A);
  r.read("eig_B", c.eig_B);
  r.read("eig_C", c.eig_C);
  r.read("lambda", c.lambda);
  r.read("data", c.data);
  r.read("rows", c.rows);
  r.read("cols", c.cols);
  r.read("exponent", c.exponent);
  r.read("clients", c.clients);
  r.read("components", c.components);
  r.read("algorithm", c.algorithm);
  r.read("policy", c.policy);
  r.read("gamma", c.gamma);
  r.read("omega", c.omega);
  r.read("epsilon", c.epsilon);
  r.read("scheme", c.scheme);
  r.read("tau", c.tau);
  r.read("line_search", c.line_search);
  r.read("A", c.A);
  r.read("beta", c.beta);
  r.read("grow", c.grow);
  r.read("regime", c.regime);
  r.read("alpha", c.alpha);
  r.read("L0", c.L0);
  r.read("L1", c.L1);
  r.read("c0", c.c0);
  r.read("c1", c.c1);
  r.read("p", c.p);
  r.read("q", c.q);
  r.read("sync_period", c.sync_period);
  r.read("estimator", c.estimator);
  r.read("target", c.target);
  r.read("iterations", c.iterations);
  r.read("oracle_budget", c.oracle_budget);
  r.read("record_stride", c.record_stride);
  r.read("seeds", c.seeds);
  r.read("metrics", c.metrics);
  r.read("x0", c.x0);
  r.reject_unknown();

  if (!known(problem_registry(), c.problem)) r.fail("problem", "unknown problem '" + c.problem + "'");
  if (!known(algorithm_registry(), c.algorithm)) r.fail("algorithm", "unknown algorithm '" + c.algorithm + "'");
  if (!known(policy_registry(), c.policy)) r.fail("policy", "unknown policy '" + c.policy + "'");
  static const std::set<std::string> schemes = {"full", "minibatch", "uniform", "importance"};
  if (!schemes.count(c.scheme)) r.fail("scheme", "unknown scheme '" + c.scheme + "'");
  static const std::set<std::string> regimes = {"strongly_monotone", "monotone", "weak_minty"};
  if (!regimes.count(c.regime)) r.fail("regime", "unknown regime '" + c.regime + "'");
  if (c.estimator != "deterministic" && c.estimator != "stochastic")
    r.fail("estimator", "expected \"deterministic\" or \"stochastic\"");
  if (c.seeds.empty()) r.fail("seeds", "at least one seed is required");
  if (c.record_stride == 0) r.fail("record_stride", "must be positive");
  if (c.c0.has_value() != c.c1.has_value()) r.fail("c0", "c0 and c1 must be given together");
  if (c.problem == "federated_quadratic_game" && !is_federated(c.algorithm))
    r.fail("algorithm", "federated problems need a federated algorithm");
  return c;
}

std::vector<ExperimentConfig> experiments_from_document(const ConfigDocument& doc) {
  std::vector<ExperimentConfig> out;
  for (const auto& s : doc.sections) out.push_back(experiment_from_section(s));
  return out;
}

FiniteSumOperator build_problem(const ExperimentConfig& c) {
  if (c.problem == "quadratic_game") {
    QuadraticGameSpec s;
    s.n = c.n;
    s.d = c.d;
    s.eig_A = c.eig_A;
    s.eig_B = c.eig_B;
    s.eig_C = c.eig_C;
    s.interpolated = c.interpolated;
    s.seed = c.problem_seed;
    return make_quadratic_game(s);
  }
  if (c.problem == "bilinear_game") return make_bilinear_game(c.d, c.problem_seed);
  if (c.problem == "weak_minty_scalar") return make_weak_minty_scalar(c.n, c.problem_seed);
  if (c.problem == "global_forsaken") return make_global_forsaken();
  if (c.problem == "cubic_minmax") return make_cubic_minmax(c.d, c.problem_seed);
  if (c.problem == "robust_least_squares") {
    const RlsData data = c.data.empty() ? make_synthetic_rls(c.rows, c.cols, c.problem_seed) : load_rls_csv(c.data);
    return make_robust_least_squares(data, c.lambda);
  }
  if (c.problem == "policeman_burglar") return make_policeman_burglar(c.n, c.d, c.problem_seed);
  if (c.problem == "sign_power") return make_sign_power_operator(c.exponent);
  if (c.problem == "sinh_game") return make_sinh_game(c.d);
  throw ConfigError(c.name + ".problem: '" + c.problem + "' is not a centralized problem");
}

FederatedProblem build_federated_problem(const ExperimentConfig& c) {
  if (c.problem == "federated_quadratic_game") {
    FederatedGameSpec s;
    s.clients = c.clients;
    s.components = c.components;
    s.d = c.d;
    s.eig_A = c.eig_A;
    s.eig_B = c.eig_B;
    s.eig_C = c.eig_C;
    s.seed = c.problem_seed;
    return make_federated_quadratic_game(s);
  }
  const FiniteSumOperator op = build_problem(c);
  if (!op.affine_parts()) throw ConfigError(c.name + ".problem: federated runs need an affine problem");
  return make_federated_problem(partition_components(op, c.clients));
}

SamplingScheme build_scheme(const ExperimentConfig& c, const FiniteSumOperator& op) {
  const std::size_t n = op.size();
  if (c.scheme == "full") return SamplingScheme::full(n);
  if (c.scheme == "minibatch") {
    if (c.tau < 1 || c.tau > n) throw ConfigError(c.name + ".tau: must lie in [1, n]");
    return SamplingScheme::minibatch(n, c.tau);
  }
  if (c.scheme == "uniform") return SamplingScheme::uniform_single(n);
  const auto& lip = op.info().component_lipschitz;
  if (!lip) throw ConfigError(c.name + ".scheme: importance sampling needs component Lipschitz constants");
  return SamplingScheme::single_element(importance_probabilities(*lip));
}

Vector initial_point(const ExperimentConfig& c, const FiniteSumOperator& op) {
  if (c.x0) {
    if (c.x0->size() != op.dim())
      throw ConfigError(c.name + ".x0: expected " + std::to_string(op.dim()) + " entries");
    return Eigen::Map<const Vector>(c.x0->data(), static_cast<Eigen::Index>(c.x0->size()));
  }
  if (c.problem == "global_forsaken") return Vector::Ones(2);
  Rng rng = Rng(c.problem_seed).split("x0");
  return project_feasible(op, rng.normal_vector(op.dim()));
}

ErConstants experiment_er_constants(const ExperimentConfig& c) {
  const FiniteSumOperator op = build_problem(c);
  const SamplingScheme scheme = build_scheme(c, op);
  const auto& lip = op.info().component_lipschitz;
  if (!lip) throw ConfigError(c.name + ".problem: no component Lipschitz constants available");
  if (!op.info().solution) throw ConfigError(c.name + ".problem: solution unknown, sigma*^2 unavailable");
  return er_constants(scheme, *lip, star_sq_norms(op));
}

namespace {

struct TheoryInputs {
  double mu;
  double L;
  ErConstants er;
};

TheoryInputs theory_inputs(const ExperimentConfig& c, const FiniteSumOperator& op) {
  const OperatorInfo& info = op.info();
  if (!info.mu || !(*info.mu > 0.0)) throw ConfigError(c.name + ".policy: theory steps need mu > 0");
  if (!info.lipschitz) throw ConfigError(c.name + ".policy: theory steps need a Lipschitz constant");
  return {*info.mu, *info.lipschitz, experiment_er_constants(c)};
}

std::pair<StepPolicy, StepPolicy> eg_policies(const ExperimentConfig& c, const FiniteSumOperator& op) {
  if (c.policy == "constant") {
    if (!c.gamma) throw ConfigError(c.name + ".gamma: required by the constant policy");
    return {StepPolicy::constant(*c.gamma), StepPolicy::constant(c.omega.value_or(*c.gamma))};
  }
  if (c.policy == "weak_minty") {
    const OperatorInfo& info = op.info();
    if (!info.lipschitz || !info.rho) throw ConfigError(c.name + ".policy: weak Minty steps need L and rho");
    const ErConstants er = experiment_er_constants(c);
    const Vector x0 = initial_point(c, op);
    const WeakMintySteps s = config_weak_minty(*info.lipschitz, *info.rho, er.delta, er.sigma_star_sq,
                                               (x0 - *info.solution).squaredNorm(), c.iterations, c.gamma);
    return {StepPolicy::constant(s.gamma), StepPolicy::constant(s.omega)};
  }
  const TheoryInputs t = theory_inputs(c, op);
  if (c.policy == "theory") {
    const double w = policy_constant(t.mu, t.er.delta, t.L, t.er.sigma_star_sq, c.epsilon);
    return {StepPolicy::constant(w), StepPolicy::constant(w)};
  }
  if (c.policy == "switching") {
    const StepPolicy s = StepPolicy::switching(t.mu, t.er.delta, t.L);
    return {s, s};
  }
  if (c.policy == "horizon") {
    const StepPolicy s = StepPolicy::horizon(t.mu, t.er.delta, t.L, c.iterations);
    return {s, s};
  }
  throw ConfigError(c.name + ".policy: '" + c.policy + "' does not apply to " + c.algorithm);
}

L0L1Config l0l1_config(const ExperimentConfig& c) {
  L0L1Config cfg;
  cfg.alpha = c.alpha;
  cfg.L0 = c.L0;
  cfg.L1 = c.L1;
  cfg.regime = c.regime == "strongly_monotone" ? Regime::strongly_monotone
               : c.regime == "weak_minty"      ? Regime::weak_minty
                                               : Regime::monotone;
  if (c.c0) cfg.user_constants = std::make_pair(*c.c0, *c.c1);
  return cfg;
}

RunResult run_centralized(const ExperimentConfig& c, std::uint64_t seed) {
  const FiniteSumOperator op = build_problem(c);
  const SamplingScheme scheme = build_scheme(c, op);
  const Vector x0 = initial_point(c, op);
  RunOptions o;
  o.iterations = c.iterations;
  o.oracle_budget = c.oracle_budget;
  o.record_stride = c.record_stride;
  o.seed = seed;
  if (c.algorithm == "gda") return run_gda(op, x0, eg_policies(c, op).second, scheme, o);
  if (c.algorithm == "eg") {
    auto [g, w] = eg_policies(c, op);
    return run_eg(op, x0, g, w, scheme, o);
  }
  if (c.algorithm == "speg") {
    auto [g, w] = eg_policies(c, op);
    return run_speg(op, x0, g, w, scheme, o);
  }
  if (c.algorithm == "eg_l0l1") return run_eg_l0l1(op, x0, l0l1_config(c), o);

  const double gamma0 = c.gamma.value_or(1.0);
  GammaMode mode = FixedGamma{gamma0};
  if (c.line_search) {
    LineSearchGamma ls;
    ls.A = c.A;
    ls.beta = c.beta;
    ls.grow = c.grow;
    mode = ls;
  }
  const PolyakVariant v = c.algorithm == "polyak_eg"    ? PolyakVariant::deterministic
                          : c.algorithm == "polyak_seg" ? PolyakVariant::stochastic
                                                        : PolyakVariant::decreasing;
  return run_polyak(op, x0, v, gamma0, mode, scheme, o);
}

FlRunResult run_fl(const ExperimentConfig& c, std::uint64_t seed) {
  const FederatedProblem pb = build_federated_problem(c);
  NetworkConfig cfg;
  if (c.policy == "theory") {
    cfg = c.algorithm == "proxskip_svrg" ? theoretical_params_svrg(average_star_cocoercivity(pb), pb.mu)
                                         : theoretical_params_gda(star_cocoercivity(pb), pb.mu);
  } else if (c.policy == "constant") {
    if (!c.gamma || !c.p) throw ConfigError(c.name + ".gamma: constant network policy needs gamma and p");
  } else {
    throw ConfigError(c.name + ".policy: federated algorithms accept \"theory\" or \"constant\"");
  }
  if (c.gamma) cfg.gamma = *c.gamma;
  if (c.p) cfg.p = *c.p;
  if (c.q) cfg.q = *c.q;
  Estimator est = DeterministicEstimator{};
  if (c.estimator == "stochastic") est = StochasticEstimator{c.tau};
  FlRunOptions o;
  o.iterations = c.iterations;
  o.record_stride = c.record_stride;
  o.seed = seed;
  o.target_relative_error = c.target;
  o.sync_period = c.sync_period;
  const FlAlgorithm alg = c.algorithm == "proxskip"        ? FlAlgorithm::proxskip_vip
                          : c.algorithm == "proxskip_svrg" ? FlAlgorithm::proxskip_svrg
                          : c.algorithm == "local_gda"     ? FlAlgorithm::local_gda
                                                           : FlAlgorithm::local_eg;
  const Vector x0 = c.x0 ? Vector(Eigen::Map<const Vector>(c.x0->data(), static_cast<Eigen::Index>(c.x0->size())))
                         : Rng(c.problem_seed).split("x0").normal_vector(static_cast<std::size_t>(pb.solution.size()));
  return run_federated(pb, x0, alg, cfg, est, o);
}

void append_rows(std::vector<MetricRow>& rows, const ExperimentConfig& c, std::uint64_t seed, const Trace& trace) {
  const std::set<std::string> wanted(c.metrics.begin(), c.metrics.end());
  for (const auto& rec : trace.records)
    for (const auto& [metric, value] : rec.metrics)
      if (wanted.empty() || wanted.count(metric))
        rows.push_back({c.name, seed, rec.iteration, rec.oracle_calls, rec.comm_rounds, metric, value});
  if (!trace.records.empty()) {
    const TraceRecord& last = trace.records.back();
    rows.push_back({c.name, seed, last.iteration, last.oracle_calls, last.comm_rounds, "status",
                    static_cast<double>(static_cast<int>(trace.status))});
  }
}

bool row_less(const MetricRow& a, const MetricRow& b) {
  return std::tie(a.seed, a.iteration, a.metric) < std::tie(b.seed, b.iteration, b.metric);
}

}  // namespace

std::vector<MetricRow> run_experiment_seed(const ExperimentConfig& c, std::uint64_t seed) {
  std::vector<MetricRow> rows;
  if (is_federated(c.algorithm)) append_rows(rows, c, seed, run_fl(c, seed).trace);
  else append_rows(rows, c, seed, run_centralized(c, seed).trace);
  std::stable_sort(rows.begin(), rows.end(), row_less);
  return rows;
}

std::vector<MetricRow> run_experiment(const ExperimentConfig& c) {
  std::vector<MetricRow> rows;
  std::vector<std::uint64_t> seeds = c.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  for (std::uint64_t s : seeds) {
    auto part = run_experiment_seed(c, s);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

std::vector<MetricRow> run_experiments(const std::vector<ExperimentConfig>& configs, unsigned jobs) {
  struct Task {
    std::size_t experiment;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::vector<std::uint64_t> seeds = configs[i].seeds;
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    for (std::uint64_t s : seeds) tasks.push_back({i, s});
  }
  std::vector<std::vector<MetricRow>> results(tasks.size());
  jobs = std::max(1u, jobs);
  std::size_t next = 0;
  while (next < tasks.size()) {
    std::vector<std::future<void>> batch;
    for (unsigned j = 0; j < jobs && next < tasks.size(); ++j, ++next) {
      const std::size_t t = next;
      batch.push_back(std::async(std::launch::async, [&, t] {
        results[t] = run_experiment_seed(configs[tasks[t].experiment], tasks[t].seed);
      }));
    }
    for (auto& f : batch) f.get();
  }
  std::vector<MetricRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

void write_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows)
    out << r.experiment << ',' << r.seed << ',' << r.iteration << ',' << r.oracle_calls << ','
        << r.comm_rounds << ',' << r.metric << ',' << format_double(r.value) << '\n';
}

}  // namespace egvi
