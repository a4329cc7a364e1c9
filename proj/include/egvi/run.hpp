#pragma once

#include "egvi/core.hpp"

#include <map>
#include <string>

namespace egvi {

struct RunOptions {
  std::uint64_t iterations = 1000;
  std::uint64_t oracle_budget = 0;  // 0 disables the budget
  std::uint64_t record_stride = 1;
  std::uint64_t seed = 0;
  bool record_operator_norm = true;
};

struct RunResult {
  Trace trace;
  Vector x;
  std::uint64_t iterations = 0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t comm_rounds = 0;
};

// Writes trace rows at the configured stride. Metric evaluations are not
// charged to the oracle counter.
class Recorder {
 public:
  Recorder(const FiniteSumOperator& op, Vector x0, const RunOptions& options);

  bool due(std::uint64_t k) const;
  void record(Trace& trace, std::uint64_t k, std::uint64_t oracle_calls, std::uint64_t comm_rounds,
              const Vector& x, std::map<std::string, double> extra = {}) const;
  // Records the final state unless it was already recorded.
  void finish(Trace& trace, std::uint64_t k, std::uint64_t oracle_calls, std::uint64_t comm_rounds,
              const Vector& x, std::map<std::string, double> extra = {}) const;

 private:
  const FiniteSumOperator* op_;
  Vector x0_;
  RunOptions options_;
  bool relative_ = false;
};

// Projects onto the problem's feasible set (simplex blocks), identity otherwise.
Vector project_feasible(const FiniteSumOperator& op, const Vector& x);

}  // namespace egvi
