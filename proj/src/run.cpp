#include "egvi/run.hpp"

#include "egvi/problems.hpp"

namespace egvi {

Recorder::Recorder(const FiniteSumOperator& op, Vector x0, const RunOptions& options)
    : op_(&op), x0_(std::move(x0)), options_(options) {
  if (options_.record_stride == 0) options_.record_stride = 1;
  const auto& sol = op.info().solution;
  relative_ = sol && (x0_ - *sol).squaredNorm() > 0.0;
}

bool Recorder::due(std::uint64_t k) const { return k % options_.record_stride == 0; }

void Recorder::record(Trace& trace, std::uint64_t k, std::uint64_t oracle_calls,
                      std::uint64_t comm_rounds, const Vector& x,
                      std::map<std::string, double> extra) const {
  TraceRecord r;
  r.iteration = k;
  r.oracle_calls = oracle_calls;
  r.comm_rounds = comm_rounds;
  r.seed = options_.seed;
  r.metrics = std::move(extra);
  if (relative_) r.metrics["relative_error"] = metric_relative_error(x, x0_, *op_->info().solution);
  if (options_.record_operator_norm) r.metrics["sq_operator_norm"] = op_->mean(x).squaredNorm();
  const auto& blocks = op_->info().simplex_blocks;
  if (blocks.size() == 2 && op_->affine_parts()) {
    const auto d1 = static_cast<Eigen::Index>(blocks[0]);
    const auto d2 = static_cast<Eigen::Index>(blocks[1]);
    const Matrix A = op_->affine_parts()->mean_matrix.topRightCorner(d1, d2);
    r.metrics["duality_gap"] = duality_gap(A, x.head(d1), x.tail(d2));
  }
  trace.push(std::move(r));
}

void Recorder::finish(Trace& trace, std::uint64_t k, std::uint64_t oracle_calls,
                      std::uint64_t comm_rounds, const Vector& x,
                      std::map<std::string, double> extra) const {
  if (!trace.records.empty() && trace.records.back().iteration == k) return;
  record(trace, k, oracle_calls, comm_rounds, x, std::move(extra));
}

Vector project_feasible(const FiniteSumOperator& op, const Vector& x) {
  const auto& blocks = op.info().simplex_blocks;
  if (blocks.empty()) return x;
  return project_blocks(x, blocks);
}

}  // namespace egvi
