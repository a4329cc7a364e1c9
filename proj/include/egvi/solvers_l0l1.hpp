#pragma once

#include "egvi/core.hpp"
#include "egvi/run.hpp"

#include <optional>
#include <span>

namespace egvi {

enum class NuEquation {
  A,  // 1 - 2v - v^2 e^{2v} = 0
  B,  // 1 - 4v - 2 v^2 e^{2v} = 0
  C,  // v e^v = 1/sqrt(2)
  D,  // v e^v = 1
};

double nu_residual(NuEquation eq, double nu);
double solve_nu(NuEquation eq, double tol = 1e-12);

struct KConstants {
  double K0 = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
};
KConstants k_constants(double L0, double L1, double alpha);

enum class Regime { strongly_monotone, monotone, weak_minty };

struct L0L1Config {
  double alpha = 1.0;
  double L0 = 1.0;
  double L1 = 0.0;
  Regime regime = Regime::strongly_monotone;
  // Strongly monotone alpha = 1 uses equation A by default; equation B gives a
  // smaller, more conservative constant.
  NuEquation strong_equation = NuEquation::A;
  // Experimental override gamma = 1 / (c0 + c1 ∥F∥^alpha).
  std::optional<std::pair<double, double>> user_constants;
};

struct StepPair {
  double gamma = 0.0;
  double omega = 0.0;
};

StepPair gamma_adaptive(const L0L1Config& config, double F_norm);

// Contraction factor 1 - nu mu / (L0 (1 + L1 e^{L1 R} R)) for the strongly
// monotone alpha = 1 step, with R = ∥x0 - x*∥.
double strong_contraction_factor(const L0L1Config& config, double mu, double R);

// nu / (L0 (1 + L1 R e^{L1 R})) - 4 rho; positive means the weak Minty run is covered.
double weak_minty_margin(const L0L1Config& config, double rho, double R);

Vector eg_l0l1_step(Oracle& oracle, const Vector& x, const L0L1Config& config, StepPair* used = nullptr);

RunResult run_eg_l0l1(const FiniteSumOperator& op, const Vector& x0, const L0L1Config& config,
                      const RunOptions& options);

struct L0L1Fit {
  double L0 = 0.0;
  double L1 = 0.0;
  double max_violation = 0.0;  // of the returned constants; <= 0 up to rounding
  double ls_L0 = 0.0;          // raw least-squares coefficients
  double ls_L1 = 0.0;
  double lift = 0.0;           // amount added to L0 to cover every sample
  bool degenerate = false;
};

double spectral_norm_power(const Matrix& J, double tol = 1e-10, int max_iter = 10000);
Matrix finite_difference_jacobian(const FiniteSumOperator& op, const Vector& x, double h = 1e-6);

// Least-squares affine fit of ∥J(x)∥ against ∥F(x)∥^alpha, coefficients
// clipped at zero, then L0 raised by the largest positive residual so the
// bound covers every sample point.
L0L1Fit fit_l0l1(const FiniteSumOperator& op, std::span<const Vector> points, double alpha);

std::vector<Vector> grid_points_2d(double radius, std::size_t per_axis);

}  // namespace egvi
