#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "egvi/problems.hpp"
#include "egvi/sampling.hpp"

#include <cmath>

using namespace egvi;

namespace {

Vector expected_weights(const SamplingScheme& scheme) {
  Vector mean = Vector::Zero(static_cast<Eigen::Index>(scheme.n()));
  for (const auto& o : scheme.support()) mean += o.probability * o.v.dense();
  return mean;
}

}  // namespace

TEST_CASE("full scheme draws all ones") {
  const SamplingScheme s = SamplingScheme::full(4);
  Rng rng(0);
  CHECK(s.deterministic());
  CHECK(s.draw(rng).dense() == Vector::Ones(4));
}

TEST_CASE("every scheme is unbiased by enumeration") {
  for (std::size_t n = 1; n <= 6; ++n) {
    CHECK((expected_weights(SamplingScheme::full(n)) - Vector::Ones(static_cast<Eigen::Index>(n))).norm() <= 1e-12);
    for (std::size_t tau = 1; tau <= n; ++tau) {
      const Vector m = expected_weights(SamplingScheme::minibatch(n, tau));
      CHECK((m - Vector::Ones(static_cast<Eigen::Index>(n))).norm() <= 1e-12);
    }
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>(i + 1);
    double total = 0.0;
    for (double v : p) total += v;
    for (double& v : p) v /= total;
    const Vector m = expected_weights(SamplingScheme::single_element(p));
    CHECK((m - Vector::Ones(static_cast<Eigen::Index>(n))).norm() <= 1e-12);
  }
}

TEST_CASE("unbiasedness of the sampled operator on a quadratic game") {
  QuadraticGameSpec spec;
  spec.n = 5;
  spec.d = 2;
  const FiniteSumOperator op = make_quadratic_game(spec);
  const Vector x = Rng(1).normal_vector(op.dim());
  for (const SamplingScheme& s : {SamplingScheme::minibatch(5, 2), SamplingScheme::uniform_single(5)}) {
    Oracle oracle(op);
    Vector mean = Vector::Zero(op.dim());
    for (const auto& o : s.support()) mean += o.probability * oracle.sampled(o.v, x);
    CHECK((mean - op.mean(x)).norm() <= 1e-12);
  }
}

TEST_CASE("single-element outcomes") {
  const SamplingScheme s = SamplingScheme::single_element({0.9, 0.1});
  const auto support = s.support();
  REQUIRE(support.size() == 2);
  CHECK(support[0].v.dense()[0] == doctest::Approx(1.0 / 0.9));
  CHECK(support[0].v.dense()[1] == 0.0);
  CHECK(support[1].v.dense()[1] == doctest::Approx(10.0));
  Rng rng(4);
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += s.draw(rng).entries.front().first == 0;
  CHECK(std::abs(first / 10000.0 - 0.9) < 0.02);
}

TEST_CASE("minibatch draws distinct indices") {
  const SamplingScheme s = SamplingScheme::minibatch(10, 4);
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const SamplingVector v = s.draw(rng);
    REQUIRE(v.entries.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) CHECK(v.entries[i - 1].first < v.entries[i].first);
    for (const auto& [i, w] : v.entries) CHECK(w == 2.5);
  }
  CHECK_THROWS_AS(SamplingScheme::minibatch(3, 4), ConfigError);
}

TEST_CASE("minibatch expected-residual constants") {
  const std::vector<double> L{1.0, 1.0};
  const std::vector<double> star{1.0, 1.0};
  const ErConstants er = er_constants_minibatch(L, star, 1);
  CHECK(er.delta == doctest::Approx(2.0));
  CHECK(er.sigma_star_sq == doctest::Approx(1.0));
  const ErConstants none = er_constants_minibatch(L, star, 2);
  CHECK(none.delta == 0.0);
  CHECK(none.sigma_star_sq == 0.0);
  const std::vector<double> L3{3.0, 3.0};
  CHECK(er_constants_minibatch(L3, star, 1).delta == doctest::Approx(9.0 * er.delta));
}

TEST_CASE("minibatch constant bounds the enumerated residual on a two-component operator") {
  // Orthogonal components have unit Lipschitz constants.
  Rng rng(0);
  std::vector<Matrix> M;
  for (int i = 0; i < 2; ++i) M.push_back(Eigen::HouseholderQR<Matrix>(rng.normal_matrix(3, 3)).householderQ());
  const FiniteSumOperator op = FiniteSumOperator::affine({M, {Vector::Zero(3), Vector::Zero(3)}, {}, {}});
  const SamplingScheme s = SamplingScheme::minibatch(2, 1);
  const std::vector<double> L{1.0, 1.0};
  const std::vector<double> star{0.0, 0.0};
  const double delta = er_constants(s, L, star).delta;
  for (int t = 0; t < 20; ++t) {
    const Vector x = rng.normal_vector(3);
    Oracle oracle(op);
    double second = 0.0;
    for (const auto& o : s.support()) second += o.probability * (oracle.sampled(o.v, x) - op.mean(x)).squaredNorm();
    CHECK(second <= 0.5 * delta * x.squaredNorm() + 1e-12);
  }
}

TEST_CASE("single-element expected-residual constants") {
  const std::vector<double> L{0.5, 1.0, 2.0, 3.0};
  const std::vector<double> star{1.0, 0.0, 2.0, 0.5};
  const SamplingScheme uniform = SamplingScheme::uniform_single(4);
  const ErConstants us = er_constants(uniform, L, star);
  double sum_l2 = 0.0;
  for (double l : L) sum_l2 += l * l;
  CHECK(us.delta == doctest::Approx(2.0 / 4.0 * sum_l2));
  const std::vector<double> zero(4, 0.0);
  CHECK(er_constants(uniform, L, zero).sigma_star_sq == 0.0);
  const ErConstants is = er_constants_single_element(L, star, importance_probabilities(L));
  CHECK(is.delta <= us.delta);
}

TEST_CASE("importance sampling on a single active component") {
  std::vector<double> L(10, 0.0);
  L.back() = 1.0;
  const std::vector<double> star(10, 0.0);
  std::vector<double> uniform(10, 0.1);
  const double us = er_constants_single_element(L, star, uniform).delta;
  const double is = er_constants_single_element(L, star, importance_probabilities(L)).delta;
  CHECK(us == doctest::Approx(0.2));
  CHECK(is / us == doctest::Approx(0.1));
}

TEST_CASE("importance probabilities") {
  const std::vector<double> L{1.0, 3.0};
  const auto p = importance_probabilities(L);
  CHECK(p[0] == 0.25);
  CHECK(p[1] == 0.75);
  const std::vector<double> equal{2.0, 2.0, 2.0};
  const auto q = importance_probabilities(equal);
  const std::vector<double> star(3, 1.0);
  const std::vector<double> u(3, 1.0 / 3.0);
  CHECK(er_constants_single_element(equal, star, q).delta ==
        doctest::Approx(er_constants_single_element(equal, star, u).delta));
}

TEST_CASE("star norms of an interpolated game vanish") {
  QuadraticGameSpec spec;
  spec.n = 8;
  spec.d = 2;
  spec.interpolated = true;
  const FiniteSumOperator op = make_quadratic_game(spec);
  for (double v : star_sq_norms(op)) CHECK(v <= 1e-16);
}
