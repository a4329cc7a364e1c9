#pragma once

#include "egvi/config.hpp"
#include "egvi/fl.hpp"
#include "egvi/problems.hpp"
#include "egvi/sampling.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace egvi {

struct ExperimentConfig {
  std::string name;

  std::string problem = "quadratic_game";
  std::size_t n = 100;
  std::size_t d = 30;
  std::uint64_t problem_seed = 0;
  bool interpolated = false;
  Interval eig_A{0.1, 1.0};
  Interval eig_B{0.0, 1.0};
  Interval eig_C{0.1, 1.0};
  double lambda = 2.0;
  std::string data;  // robust least squares CSV; synthetic data when empty
  std::size_t rows = 200;
  std::size_t cols = 10;
  double exponent = kSignPowerDefaultExponent;
  std::size_t clients = 20;
  std::size_t components = 100;

  std::string algorithm = "speg";
  std::string policy = "constant";
  std::optional<double> gamma;
  std::optional<double> omega;
  double epsilon = 0.0;

  std::string scheme = "full";
  std::size_t tau = 1;

  bool line_search = true;
  double A = 0.5;
  double beta = 0.5;
  bool grow = false;

  std::string regime = "monotone";
  double alpha = 1.0;
  double L0 = 1.0;
  double L1 = 0.0;
  std::optional<double> c0;
  std::optional<double> c1;

  std::optional<double> p;
  std::optional<double> q;
  std::uint64_t sync_period = 0;
  std::string estimator = "deterministic";
  double target = 0.0;

  std::uint64_t iterations = 1000;
  std::uint64_t oracle_budget = 0;
  std::uint64_t record_stride = 1;
  std::vector<std::uint64_t> seeds{0};
  std::vector<std::string> metrics;  // empty records every metric
  std::optional<std::vector<double>> x0;
};

// Field errors are reported as ConfigError("<section>.<key>: ...").
ExperimentConfig experiment_from_section(const ConfigSection& section);
std::vector<ExperimentConfig> experiments_from_document(const ConfigDocument& doc);

struct MetricRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t comm_rounds = 0;
  std::string metric;
  double value = 0.0;
};

inline constexpr std::string_view kCsvHeader = "experiment,seed,iteration,oracle_calls,comm_rounds,metric,value";

std::vector<MetricRow> run_experiment(const ExperimentConfig& config);
std::vector<MetricRow> run_experiment_seed(const ExperimentConfig& config, std::uint64_t seed);
// Runs every (experiment, seed) pair on up to `jobs` threads; rows come back
// in config order, then by seed, iteration and metric.
std::vector<MetricRow> run_experiments(const std::vector<ExperimentConfig>& configs, unsigned jobs = 1);
void write_csv(std::ostream& out, const std::vector<MetricRow>& rows);

FiniteSumOperator build_problem(const ExperimentConfig& config);
FederatedProblem build_federated_problem(const ExperimentConfig& config);
SamplingScheme build_scheme(const ExperimentConfig& config, const FiniteSumOperator& op);
Vector initial_point(const ExperimentConfig& config, const FiniteSumOperator& op);
ErConstants experiment_er_constants(const ExperimentConfig& config);

struct RegistryEntry {
  std::string id;
  std::string description;
};
const std::vector<RegistryEntry>& problem_registry();
const std::vector<RegistryEntry>& algorithm_registry();
const std::vector<RegistryEntry>& policy_registry();

}  // namespace egvi
