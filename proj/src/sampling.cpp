#include "egvi/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace egvi {

SamplingScheme SamplingScheme::full(std::size_t n) {
  if (n == 0) throw ConfigError("sampling scheme over zero components");
  SamplingScheme s;
  s.kind_ = Kind::full;
  s.n_ = n;
  s.tau_ = n;
  return s;
}

SamplingScheme SamplingScheme::minibatch(std::size_t n, std::size_t tau) {
  if (tau < 1 || tau > n) throw ConfigError("minibatch size must lie in [1, n]");
  if (tau == n) return full(n);
  SamplingScheme s;
  s.kind_ = Kind::tau_minibatch;
  s.n_ = n;
  s.tau_ = tau;
  return s;
}

SamplingScheme SamplingScheme::single_element(std::vector<double> probs) {
  if (probs.empty()) throw ConfigError("single-element sampling needs probabilities");
  double total = 0.0;
  for (double p : probs) {
    if (!(p > 0.0)) throw ConfigError("single-element probabilities must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("single-element probabilities must sum to 1");
  SamplingScheme s;
  s.kind_ = Kind::single_element;
  s.n_ = probs.size();
  s.tau_ = 1;
  s.cumulative_.resize(probs.size());
  std::partial_sum(probs.begin(), probs.end(), s.cumulative_.begin());
  s.probs_ = std::move(probs);
  return s;
}

SamplingScheme SamplingScheme::uniform_single(std::size_t n) {
  return single_element(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

std::size_t SamplingScheme::batch_size() const {
  switch (kind_) {
    case Kind::full: return n_;
    case Kind::tau_minibatch: return tau_;
    case Kind::single_element: return 1;
  }
  return n_;
}

SamplingVector SamplingScheme::draw(Rng& rng) const {
  switch (kind_) {
    case Kind::full: return SamplingVector::ones(n_);
    case Kind::tau_minibatch: {
      std::vector<std::size_t> idx(n_);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t i = 0; i < tau_; ++i) {
        const std::size_t j = i + rng.uniform_index(n_ - i);
        std::swap(idx[i], idx[j]);
      }
      std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(tau_));
      SamplingVector v{n_, {}};
      const double w = static_cast<double>(n_) / static_cast<double>(tau_);
      for (std::size_t i = 0; i < tau_; ++i) v.entries.emplace_back(idx[i], w);
      return v;
    }
    case Kind::single_element: {
      const double u = rng.uniform() * cumulative_.back();
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      std::size_t j = static_cast<std::size_t>(it - cumulative_.begin());
      if (j >= n_) j = n_ - 1;
      return SamplingVector{n_, {{j, 1.0 / probs_[j]}}};
    }
  }
  return SamplingVector::ones(n_);
}

std::vector<SamplingScheme::Outcome> SamplingScheme::support() const {
  std::vector<Outcome> out;
  switch (kind_) {
    case Kind::full: out.push_back({SamplingVector::ones(n_), 1.0}); break;
    case Kind::single_element:
      for (std::size_t j = 0; j < n_; ++j) out.push_back({SamplingVector{n_, {{j, 1.0 / probs_[j]}}}, probs_[j]});
      break;
    case Kind::tau_minibatch: {
      if (n_ > 24) throw ContractViolation("subset enumeration limited to n <= 24");
      std::vector<bool> mask(n_, false);
      std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(tau_), true);
      std::vector<SamplingVector> subsets;
      const double w = static_cast<double>(n_) / static_cast<double>(tau_);
      do {
        SamplingVector v{n_, {}};
        for (std::size_t i = 0; i < n_; ++i)
          if (mask[i]) v.entries.emplace_back(i, w);
        subsets.push_back(std::move(v));
      } while (std::prev_permutation(mask.begin(), mask.end()));
      const double p = 1.0 / static_cast<double>(subsets.size());
      for (auto& v : subsets) out.push_back({std::move(v), p});
      break;
    }
  }
  return out;
}

ErConstants er_constants_minibatch(std::span<const double> lipschitz,
                                   std::span<const double> star_sq_norms, std::size_t tau) {
  const std::size_t n = lipschitz.size();
  if (star_sq_norms.size() != n) throw ContractViolation("constant lists differ in length");
  if (n == 1) {
    std::clog << "warning: expected-residual constants degenerate for n = 1\n";
    return {};
  }
  if (tau < 1 || tau > n) throw ConfigError("minibatch size must lie in [1, n]");
  const double nd = static_cast<double>(n);
  const double td = static_cast<double>(tau);
  const double factor = (nd - td) / (nd - 1.0);
  double sum_l2 = 0.0;
  double sum_star = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_l2 += lipschitz[i] * lipschitz[i];
    sum_star += star_sq_norms[i];
  }
  return {2.0 / (nd * td) * factor * sum_l2, 1.0 / (nd * td) * factor * sum_star};
}

ErConstants er_constants_single_element(std::span<const double> lipschitz,
                                        std::span<const double> star_sq_norms,
                                        std::span<const double> probs) {
  const std::size_t n = lipschitz.size();
  if (star_sq_norms.size() != n || probs.size() != n)
    throw ContractViolation("constant lists differ in length");
  double sum_l = 0.0;
  double sum_star = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // A never-sampled component contributes nothing only if it is identically zero near x*.
    if (probs[i] == 0.0 && lipschitz[i] == 0.0 && star_sq_norms[i] == 0.0) continue;
    if (!(probs[i] > 0.0)) throw ConfigError("single-element probability must be positive");
    sum_l += lipschitz[i] * lipschitz[i] / probs[i];
    sum_star += star_sq_norms[i] / probs[i];
  }
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  return {2.0 / n2 * sum_l, sum_star / n2};
}

ErConstants er_constants(const SamplingScheme& scheme, std::span<const double> lipschitz,
                         std::span<const double> star_sq_norms) {
  switch (scheme.kind()) {
    case SamplingScheme::Kind::full: return {};
    case SamplingScheme::Kind::tau_minibatch:
      return er_constants_minibatch(lipschitz, star_sq_norms, scheme.tau());
    case SamplingScheme::Kind::single_element:
      return er_constants_single_element(lipschitz, star_sq_norms, scheme.probs());
  }
  return {};
}

std::vector<double> importance_probabilities(std::span<const double> lipschitz) {
  double total = 0.0;
  for (double l : lipschitz) {
    if (l < 0.0) throw ConfigError("Lipschitz constants must be nonnegative");
    total += l;
  }
  if (total <= 0.0) throw ConfigError("importance sampling needs a positive Lipschitz constant");
  std::vector<double> p(lipschitz.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = lipschitz[i] / total;
  return p;
}

std::vector<double> star_sq_norms(const FiniteSumOperator& op) {
  const auto& sol = op.info().solution;
  if (!sol) throw MetricUnavailable("operator has no known solution");
  std::vector<double> out(op.size());
  for (std::size_t i = 0; i < op.size(); ++i) out[i] = op.component(i, *sol).squaredNorm();
  return out;
}

}  // namespace egvi
