#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace egvi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MetricUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Components of an affine operator F_i(x) = M_i x + b_i. Kept alongside the
// callable so that exact spectral quantities can be computed for test problems.
struct AffineComponents {
  std::vector<Matrix> matrices;
  std::vector<Vector> offsets;
  Matrix mean_matrix;
  Vector mean_offset;
};

struct OperatorInfo {
  std::optional<Vector> solution;
  std::optional<std::vector<double>> component_lipschitz;
  std::optional<double> lipschitz;
  std::optional<double> mu;
  std::optional<double> rho;
  std::optional<double> alpha;
  std::optional<double> L0;
  std::optional<double> L1;
  bool monotone = false;
  bool strongly_monotone = false;
  // Iterates are projected blockwise onto probability simplices of these sizes.
  std::vector<std::size_t> simplex_blocks;
};

class FiniteSumOperator {
 public:
  using ComponentFn = std::function<Vector(std::size_t, const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;

  FiniteSumOperator(std::size_t n, std::size_t dim, ComponentFn component,
                    OperatorInfo info = {});

  static FiniteSumOperator affine(AffineComponents parts, OperatorInfo info = {});

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  const OperatorInfo& info() const { return info_; }
  OperatorInfo& info() { return info_; }

  Vector component(std::size_t i, const Vector& x) const;
  // Mean of all components without oracle accounting.
  Vector mean(const Vector& x) const;

  void set_jacobian(JacobianFn fn) { jacobian_ = std::move(fn); }
  bool has_jacobian() const { return static_cast<bool>(jacobian_); }
  Matrix jacobian(const Vector& x) const;

  const AffineComponents* affine_parts() const { return affine_.get(); }

 private:
  std::size_t n_;
  std::size_t dim_;
  ComponentFn component_;
  JacobianFn jacobian_;
  OperatorInfo info_;
  std::shared_ptr<const AffineComponents> affine_;
};

// Sparse sampling vector v with entries (index, weight); absent indices are 0.
struct SamplingVector {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, double>> entries;

  static SamplingVector ones(std::size_t n);
  Vector dense() const;
};

// Evaluation handle that counts component evaluations.
class Oracle {
 public:
  explicit Oracle(const FiniteSumOperator& op) : op_(&op) {}

  const FiniteSumOperator& op() const { return *op_; }
  std::uint64_t calls() const { return calls_; }
  void add_calls(std::uint64_t c) { calls_ += c; }

  Vector full(const Vector& x);
  Vector sampled(const SamplingVector& v, const Vector& x);
  Vector sampled(const Vector& v, const Vector& x);

 private:
  const FiniteSumOperator* op_;
  std::uint64_t calls_ = 0;
};

Vector eval_full(const FiniteSumOperator& op, const Vector& x, std::uint64_t& oracle_calls);
Vector eval_sampled(const FiniteSumOperator& op, const Vector& v, const Vector& x,
                    std::uint64_t& oracle_calls);

double metric_relative_error(const Vector& x, const Vector& x0, const Vector& solution);

// True when x contains NaN/Inf or has norm above the divergence threshold.
bool diverged(const Vector& x);
inline constexpr double kDivergenceNorm = 1e12;

enum class RunStatus { completed, converged, diverged };
std::string_view to_string(RunStatus s);

struct TraceRecord {
  std::uint64_t iteration = 0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t comm_rounds = 0;
  std::map<std::string, double> metrics;
  std::uint64_t seed = 0;
};

struct Trace {
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::completed;

  void push(TraceRecord r);
};

// Seeded mt19937_64 stream with deterministic, label-keyed child streams.
// Uniform and normal draws are implemented on raw 64-bit words so that the
// sequence does not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng split(std::string_view label) const;
  Rng split(std::uint64_t index) const;

  std::uint64_t next_u64();
  double uniform();                           // [0, 1)
  std::size_t uniform_index(std::size_t n);   // {0, ..., n-1}
  double normal();
  bool bernoulli(double p);
  Vector normal_vector(std::size_t d);
  Matrix normal_matrix(std::size_t rows, std::size_t cols);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_label(std::string_view label);

}  // namespace egvi
