#pragma once

#include "egvi/core.hpp"

#include <span>
#include <vector>

namespace egvi {

class SamplingScheme {
 public:
  enum class Kind { full, tau_minibatch, single_element };

  static SamplingScheme full(std::size_t n);
  static SamplingScheme minibatch(std::size_t n, std::size_t tau);
  static SamplingScheme single_element(std::vector<double> probs);
  static SamplingScheme uniform_single(std::size_t n);

  Kind kind() const { return kind_; }
  std::size_t n() const { return n_; }
  std::size_t tau() const { return tau_; }
  const std::vector<double>& probs() const { return probs_; }
  bool deterministic() const { return kind_ == Kind::full; }
  // Number of nonzero entries of every draw (1 for single-element).
  std::size_t batch_size() const;

  SamplingVector draw(Rng& rng) const;

  struct Outcome {
    SamplingVector v;
    double probability;
  };
  // Every outcome with its probability; subsets are enumerated, so keep n small.
  std::vector<Outcome> support() const;

 private:
  Kind kind_ = Kind::full;
  std::size_t n_ = 1;
  std::size_t tau_ = 1;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

struct ErConstants {
  double delta = 0.0;
  double sigma_star_sq = 0.0;
};

ErConstants er_constants_minibatch(std::span<const double> lipschitz,
                                   std::span<const double> star_sq_norms, std::size_t tau);
ErConstants er_constants_single_element(std::span<const double> lipschitz,
                                        std::span<const double> star_sq_norms,
                                        std::span<const double> probs);
ErConstants er_constants(const SamplingScheme& scheme, std::span<const double> lipschitz,
                         std::span<const double> star_sq_norms);

std::vector<double> importance_probabilities(std::span<const double> lipschitz);

// Squared component norms ∥F_i(x*)∥² for an operator with a known solution.
std::vector<double> star_sq_norms(const FiniteSumOperator& op);

}  // namespace egvi
