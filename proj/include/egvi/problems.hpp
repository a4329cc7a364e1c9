#pragma once

#include "egvi/core.hpp"

#include <filesystem>
#include <optional>

namespace egvi {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct QuadraticGameSpec {
  std::size_t n = 100;
  std::size_t d = 30;
  Interval eig_A{0.1, 1.0};
  Interval eig_B{0.0, 1.0};
  Interval eig_C{0.1, 1.0};
  bool interpolated = false;
  std::uint64_t seed = 0;
};

// Symmetric matrix Q diag(eigs) Q^T with Q Haar-distributed.
Matrix random_orthogonal(std::size_t d, Rng& rng);
Matrix random_symmetric(std::size_t d, Interval eigs, Rng& rng);
Matrix random_with_singular_values(std::size_t d, Interval svals, Rng& rng);

double spectral_norm(const Matrix& m);
double min_symmetric_eigenvalue(const Matrix& m);

FiniteSumOperator make_quadratic_game(const QuadraticGameSpec& spec);

FiniteSumOperator make_bilinear_game(std::size_t d, std::uint64_t seed);

FiniteSumOperator make_weak_minty_scalar(std::size_t n, std::uint64_t seed);

FiniteSumOperator make_global_forsaken();

struct CubicSpec {
  std::size_t d = 1;
  Interval eig_A{0.5, 1.0};
  Interval eig_B{0.5, 1.0};
  Interval eig_C{0.5, 1.0};
  std::uint64_t seed = 0;
};
FiniteSumOperator make_cubic_minmax(const CubicSpec& spec);
FiniteSumOperator make_cubic_minmax(std::size_t d, std::uint64_t seed);
// Explicit matrices; used for the scalar A = B = C = 1 reduction.
FiniteSumOperator make_cubic_minmax(const Matrix& A, const Matrix& B, const Matrix& C);

struct RlsData {
  Matrix A;
  Vector y0;
};
RlsData make_synthetic_rls(std::size_t rows, std::size_t cols, std::uint64_t seed);
RlsData load_rls_csv(const std::filesystem::path& path);
// One component per data row; the component mean is the full saddle operator.
FiniteSumOperator make_robust_least_squares(const RlsData& data, double lambda);

FiniteSumOperator make_policeman_burglar(std::size_t n, std::size_t d, std::uint64_t seed);

// Exponent calibrated so that fit_l0l1 with alpha = 1 over the 60 x 60 grid on
// [-1.6, 1.6]^2 returns constants within 10% of (1 + 2 sqrt 2, 2 sqrt 2).
inline constexpr double kSignPowerDefaultExponent = 4.6;
inline constexpr double kSignPowerCalibrationRadius = 1.6;
inline constexpr std::size_t kSignPowerCalibrationGrid = 60;
FiniteSumOperator make_sign_power_operator(double q = kSignPowerDefaultExponent);

// Saddle operator of sum cosh(w1) - sum cosh(w2), i.e. F(x) = sinh(x) entrywise.
// Strongly monotone with mu = 1 and 1-symmetric with L0 = L1 = 1.
FiniteSumOperator make_sinh_game(std::size_t d);

Vector project_simplex(const Vector& x);
Vector project_blocks(const Vector& x, std::span<const std::size_t> blocks);
double duality_gap(const Matrix& A, const Vector& x1, const Vector& x2);

// Disjoint contiguous component groups, one operator per group. The last
// group takes the remainder when n is not divisible by the group count.
std::vector<FiniteSumOperator> partition_components(const FiniteSumOperator& op,
                                                    std::size_t groups);

struct FederatedProblem {
  std::vector<FiniteSumOperator> clients;
  Vector solution;  // common root of the mean client operator
  double mu = 0.0;  // strong monotonicity of every client operator
};

struct FederatedGameSpec {
  std::size_t clients = 20;
  std::size_t components = 100;
  std::size_t d = 20;
  Interval eig_A{0.01, 1.0};
  Interval eig_B{0.0, 1.0};
  Interval eig_C{0.01, 1.0};
  std::uint64_t seed = 0;
};
FederatedProblem make_federated_quadratic_game(const FederatedGameSpec& spec);
// Affine clients with exact solution of the averaged system.
FederatedProblem make_federated_problem(std::vector<FiniteSumOperator> clients);

}  // namespace egvi
