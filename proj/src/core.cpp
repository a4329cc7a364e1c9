#include "egvi/core.hpp"

#include <cmath>

namespace egvi {

FiniteSumOperator::FiniteSumOperator(std::size_t n, std::size_t dim, ComponentFn component,
                                     OperatorInfo info)
    : n_(n), dim_(dim), component_(std::move(component)), info_(std::move(info)) {
  if (n_ == 0) throw ContractViolation("finite-sum operator needs at least one component");
}

FiniteSumOperator FiniteSumOperator::affine(AffineComponents parts, OperatorInfo info) {
  const std::size_t n = parts.matrices.size();
  if (n == 0 || parts.offsets.size() != n)
    throw ContractViolation("affine operator: matrices and offsets must be non-empty and paired");
  const auto dim = static_cast<std::size_t>(parts.matrices.front().rows());
  parts.mean_matrix = Matrix::Zero(dim, dim);
  parts.mean_offset = Vector::Zero(dim);
  for (std::size_t i = 0; i < n; ++i) {
    parts.mean_matrix += parts.matrices[i];
    parts.mean_offset += parts.offsets[i];
  }
  parts.mean_matrix /= static_cast<double>(n);
  parts.mean_offset /= static_cast<double>(n);

  auto shared = std::make_shared<const AffineComponents>(std::move(parts));
  FiniteSumOperator op(
      n, dim,
      [shared](std::size_t i, const Vector& x) -> Vector {
        return shared->matrices[i] * x + shared->offsets[i];
      },
      std::move(info));
  op.affine_ = shared;
  op.jacobian_ = [shared](const Vector&) -> Matrix { return shared->mean_matrix; };
  return op;
}

Vector FiniteSumOperator::component(std::size_t i, const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_)
    throw ContractViolation("operator evaluated at a point of the wrong dimension");
  if (i >= n_) throw ContractViolation("component index out of range");
  return component_(i, x);
}

Vector FiniteSumOperator::mean(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_)
    throw ContractViolation("operator evaluated at a point of the wrong dimension");
  if (affine_) return affine_->mean_matrix * x + affine_->mean_offset;
  Vector acc = Vector::Zero(dim_);
  for (std::size_t i = 0; i < n_; ++i) acc += component_(i, x);
  return acc / static_cast<double>(n_);
}

Matrix FiniteSumOperator::jacobian(const Vector& x) const {
  if (!jacobian_) throw MetricUnavailable("operator has no analytic Jacobian");
  return jacobian_(x);
}

SamplingVector SamplingVector::ones(std::size_t n) {
  SamplingVector v{n, {}};
  v.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) v.entries.emplace_back(i, 1.0);
  return v;
}

Vector SamplingVector::dense() const {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
  for (const auto& [i, w] : entries) v[static_cast<Eigen::Index>(i)] += w;
  return v;
}

Vector Oracle::full(const Vector& x) {
  calls_ += op_->size();
  return op_->mean(x);
}

Vector Oracle::sampled(const SamplingVector& v, const Vector& x) {
  if (v.n != op_->size()) throw ContractViolation("sampling vector length differs from n");
  Vector acc = Vector::Zero(static_cast<Eigen::Index>(op_->dim()));
  for (const auto& [i, w] : v.entries) {
    if (w == 0.0) continue;
    acc += w * op_->component(i, x);
    ++calls_;
  }
  return acc / static_cast<double>(op_->size());
}

Vector Oracle::sampled(const Vector& v, const Vector& x) {
  if (static_cast<std::size_t>(v.size()) != op_->size())
    throw ContractViolation("sampling vector length differs from n");
  Vector acc = Vector::Zero(static_cast<Eigen::Index>(op_->dim()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    acc += v[i] * op_->component(static_cast<std::size_t>(i), x);
    ++calls_;
  }
  return acc / static_cast<double>(op_->size());
}

Vector eval_full(const FiniteSumOperator& op, const Vector& x, std::uint64_t& oracle_calls) {
  Oracle o(op);
  Vector r = o.full(x);
  oracle_calls += o.calls();
  return r;
}

Vector eval_sampled(const FiniteSumOperator& op, const Vector& v, const Vector& x,
                    std::uint64_t& oracle_calls) {
  Oracle o(op);
  Vector r = o.sampled(v, x);
  oracle_calls += o.calls();
  return r;
}

double metric_relative_error(const Vector& x, const Vector& x0, const Vector& solution) {
  const double denom = (x0 - solution).squaredNorm();
  if (denom == 0.0) throw MetricUnavailable("relative error undefined when x0 equals x*");
  return (x - solution).squaredNorm() / denom;
}

bool diverged(const Vector& x) { return !x.allFinite() || x.norm() > kDivergenceNorm; }

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::converged: return "converged";
    case RunStatus::diverged: return "diverged";
  }
  return "unknown";
}

void Trace::push(TraceRecord r) {
  if (!records.empty()) {
    const auto& last = records.back();
    if (r.oracle_calls < last.oracle_calls || r.comm_rounds < last.comm_rounds)
      throw ContractViolation("trace counters must be non-decreasing");
  }
  for (const auto& [name, value] : r.metrics)
    if (!std::isfinite(value)) throw ContractViolation("non-finite metric '" + name + "'");
  records.push_back(std::move(r));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(std::string_view label) const { return Rng(splitmix64(seed_ ^ hash_label(label))); }

Rng Rng::split(std::uint64_t index) const {
  return Rng(splitmix64(seed_ + 0x632BE59BD9B4E019ULL * (index + 1)));
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw ContractViolation("uniform_index over an empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

double Rng::normal() {
  if (spare_normal_) {
    const double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  return u * f;
}

bool Rng::bernoulli(double p) { return uniform() < p; }

Vector Rng::normal_vector(std::size_t d) {
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal();
  return v;
}

Matrix Rng::normal_matrix(std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal();
  return m;
}

}  // namespace egvi
