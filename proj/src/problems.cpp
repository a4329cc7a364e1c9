#include "egvi/problems.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace egvi {

namespace {

Vector uniform_in(Interval iv, std::size_t d, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = iv.lo + (iv.hi - iv.lo) * rng.uniform();
  return v;
}

void check_interval(Interval iv, const char* name) {
  if (iv.lo < 0.0 || iv.hi < iv.lo)
    throw ConfigError(std::string("invalid eigenvalue interval for ") + name);
}

Matrix saddle_block(const Matrix& A, const Matrix& B, const Matrix& C) {
  const Eigen::Index d1 = A.rows();
  const Eigen::Index d2 = C.rows();
  Matrix M(d1 + d2, d1 + d2);
  M.topLeftCorner(d1, d1) = A;
  M.topRightCorner(d1, d2) = B;
  M.bottomLeftCorner(d2, d1) = -B.transpose();
  M.bottomRightCorner(d2, d2) = C;
  return M;
}

}  // namespace

Matrix random_orthogonal(std::size_t d, Rng& rng) {
  const Matrix g = rng.normal_matrix(d, d);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

Matrix random_symmetric(std::size_t d, Interval eigs, Rng& rng) {
  const Matrix q = random_orthogonal(d, rng);
  const Vector lambda = uniform_in(eigs, d, rng);
  Matrix m = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

Matrix random_with_singular_values(std::size_t d, Interval svals, Rng& rng) {
  const Matrix u = random_orthogonal(d, rng);
  const Matrix v = random_orthogonal(d, rng);
  const Vector s = uniform_in(svals, d, rng);
  return u * s.asDiagonal() * v.transpose();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_symmetric_eigenvalue(const Matrix& m) {
  const Matrix s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

FiniteSumOperator make_quadratic_game(const QuadraticGameSpec& spec) {
  if (spec.n < 1 || spec.d < 1) throw ConfigError("quadratic game needs n >= 1 and d >= 1");
  check_interval(spec.eig_A, "A");
  check_interval(spec.eig_B, "B");
  check_interval(spec.eig_C, "C");
  Rng rng(spec.seed);
  Rng mat_rng = rng.split("matrices");
  Rng vec_rng = rng.split("offsets");
  const auto d = static_cast<Eigen::Index>(spec.d);

  std::optional<Vector> solution;
  if (spec.interpolated) solution = rng.split("solution").normal_vector(2 * spec.d);

  AffineComponents parts;
  std::vector<double> lipschitz;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const Matrix A = random_symmetric(spec.d, spec.eig_A, mat_rng);
    const Matrix B = random_with_singular_values(spec.d, spec.eig_B, mat_rng);
    const Matrix C = random_symmetric(spec.d, spec.eig_C, mat_rng);
    Matrix M = saddle_block(A, B, C);
    Vector b(2 * d);
    if (solution) {
      b = -(M * *solution);
    } else {
      b.head(d) = vec_rng.normal_vector(spec.d);
      b.tail(d) = vec_rng.normal_vector(spec.d);
    }
    lipschitz.push_back(spectral_norm(M));
    parts.matrices.push_back(std::move(M));
    parts.offsets.push_back(std::move(b));
  }

  OperatorInfo info;
  info.component_lipschitz = lipschitz;
  info.mu = std::min(spec.eig_A.lo, spec.eig_C.lo);
  info.monotone = true;
  info.strongly_monotone = *info.mu > 0.0;
  FiniteSumOperator op = FiniteSumOperator::affine(std::move(parts), std::move(info));
  const AffineComponents& ap = *op.affine_parts();
  op.info().lipschitz = spectral_norm(ap.mean_matrix);
  if (solution) {
    op.info().solution = std::move(solution);
  } else if (*op.info().mu > 0.0) {
    op.info().solution = Vector(ap.mean_matrix.partialPivLu().solve(-ap.mean_offset));
  }
  return op;
}

FiniteSumOperator make_bilinear_game(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix B = random_with_singular_values(d, {0.1, 1.0}, rng);
  const Matrix zero = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  AffineComponents parts;
  parts.matrices.push_back(saddle_block(zero, B, zero));
  parts.offsets.push_back(Vector::Zero(static_cast<Eigen::Index>(2 * d)));
  OperatorInfo info;
  info.solution = Vector::Zero(static_cast<Eigen::Index>(2 * d));
  info.lipschitz = spectral_norm(B);
  info.component_lipschitz = std::vector<double>{*info.lipschitz};
  info.mu = 0.0;
  info.monotone = true;
  return FiniteSumOperator::affine(std::move(parts), std::move(info));
}

FiniteSumOperator make_weak_minty_scalar(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("weak Minty family needs n >= 2");
  Rng rng(seed);
  Vector xi = rng.normal_vector(n);
  Vector zeta = rng.normal_vector(n);
  xi.array() += std::sqrt(63.0) - xi.mean();
  zeta.array() += -1.0 - zeta.mean();

  AffineComponents parts;
  std::vector<double> lipschitz;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    Matrix M(2, 2);
    M << zeta[k], xi[k], -xi[k], zeta[k];
    parts.matrices.push_back(M);
    parts.offsets.push_back(Vector::Zero(2));
    lipschitz.push_back(std::hypot(zeta[k], xi[k]));
  }
  OperatorInfo info;
  info.solution = Vector::Zero(2);
  info.lipschitz = 8.0;
  info.rho = 1.0 / 32.0;
  info.component_lipschitz = lipschitz;
  return FiniteSumOperator::affine(std::move(parts), std::move(info));
}

FiniteSumOperator make_global_forsaken() {
  auto dpsi = [](double w) { return (4.0 / 7.0) * std::pow(w, 5) - (4.0 / 3.0) * std::pow(w, 3) + (2.0 / 3.0) * w; };
  auto ddpsi = [](double w) { return (20.0 / 7.0) * std::pow(w, 4) - 4.0 * w * w + 2.0 / 3.0; };
  OperatorInfo info;
  info.solution = Vector::Zero(2);
  info.rho = 0.119732;
  FiniteSumOperator op(
      1, 2,
      [dpsi](std::size_t, const Vector& x) -> Vector {
        Vector f(2);
        f << x[1] + dpsi(x[0]), -x[0] + dpsi(x[1]);
        return f;
      },
      std::move(info));
  op.set_jacobian([ddpsi](const Vector& x) -> Matrix {
    Matrix j(2, 2);
    j << ddpsi(x[0]), 1.0, -1.0, ddpsi(x[1]);
    return j;
  });
  return op;
}

FiniteSumOperator make_cubic_minmax(const Matrix& A, const Matrix& B, const Matrix& C) {
  const Eigen::Index d1 = A.rows();
  const Eigen::Index d2 = C.rows();
  auto grow = [](const Matrix& S, const Eigen::Ref<const Vector>& w) -> Vector {
    const Vector sw = S * w;
    return std::sqrt(std::max(0.0, w.dot(sw))) * sw;
  };
  auto grow_jac = [](const Matrix& S, const Eigen::Ref<const Vector>& w) -> Matrix {
    const Vector sw = S * w;
    const double q = std::sqrt(std::max(0.0, w.dot(sw)));
    if (q == 0.0) return Matrix::Zero(S.rows(), S.cols());
    return q * S + (sw * sw.transpose()) / q;
  };
  OperatorInfo info;
  info.solution = Vector::Zero(d1 + d2);
  info.monotone = true;
  FiniteSumOperator op(
      1, static_cast<std::size_t>(d1 + d2),
      [A, B, C, d1, d2, grow](std::size_t, const Vector& x) -> Vector {
        Vector f(d1 + d2);
        f.head(d1) = grow(A, x.head(d1)) + B * x.tail(d2);
        f.tail(d2) = grow(C, x.tail(d2)) - B.transpose() * x.head(d1);
        return f;
      },
      std::move(info));
  op.set_jacobian([A, B, C, d1, d2, grow_jac](const Vector& x) -> Matrix {
    return saddle_block(grow_jac(A, x.head(d1)), B, grow_jac(C, x.tail(d2)));
  });
  return op;
}

FiniteSumOperator make_cubic_minmax(const CubicSpec& spec) {
  if (spec.d < 1) throw ConfigError("cubic problem needs d >= 1");
  Rng rng(spec.seed);
  const Matrix A = random_symmetric(spec.d, spec.eig_A, rng);
  const Matrix B = random_symmetric(spec.d, spec.eig_B, rng);
  const Matrix C = random_symmetric(spec.d, spec.eig_C, rng);
  return make_cubic_minmax(A, B, C);
}

FiniteSumOperator make_cubic_minmax(std::size_t d, std::uint64_t seed) {
  CubicSpec spec;
  spec.d = d;
  spec.seed = seed;
  return make_cubic_minmax(spec);
}

RlsData make_synthetic_rls(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  RlsData data;
  data.A = rng.normal_matrix(rows, cols);
  // Variances 0.1 and 0.01.
  const Vector beta0 = std::sqrt(0.1) * rng.normal_vector(cols);
  const Vector eps = std::sqrt(0.01) * rng.normal_vector(rows);
  data.y0 = data.A * beta0 + eps;
  return data;
}

RlsData load_rls_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("data file is empty: " + path.string());
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos || !std::isfinite(v))
          throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ConfigError("non-numeric value on line " + std::to_string(line_no) + " of " + path.string());
      }
    }
    if (row.size() < 2) throw ConfigError("data rows need at least one feature and a target");
    if (width == 0) width = row.size();
    if (row.size() != width) throw ConfigError("ragged row on line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("data file has no rows: " + path.string());
  RlsData data;
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto s = static_cast<Eigen::Index>(width - 1);
  data.A.resize(r, s);
  data.y0.resize(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) data.A(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    data.y0[i] = rows[static_cast<std::size_t>(i)].back();
  }
  return data;
}

FiniteSumOperator make_robust_least_squares(const RlsData& data, double lambda) {
  if (!(lambda > 1.0)) throw ConfigError("robust least squares needs lambda > 1 for strong monotonicity");
  const Eigen::Index r = data.A.rows();
  const Eigen::Index s = data.A.cols();
  if (data.y0.size() != r || r == 0) throw ConfigError("robust least squares: data shape mismatch");
  const double scale = static_cast<double>(r);

  // Row k contributes f_k = (a_k^T beta - y_k)^2 - lambda (y_k - y0_k)^2 to the
  // summed objective; the component is scaled by r so that the mean of the
  // components is the saddle operator of the full objective.
  AffineComponents parts;
  std::vector<double> lipschitz;
  for (Eigen::Index k = 0; k < r; ++k) {
    const Vector a = data.A.row(k).transpose();
    Matrix M = Matrix::Zero(s + r, s + r);
    M.topLeftCorner(s, s) = 2.0 * a * a.transpose();
    M.block(0, s + k, s, 1) = -2.0 * a;
    M.block(s + k, 0, 1, s) = 2.0 * a.transpose();
    M(s + k, s + k) = 2.0 * (lambda - 1.0);
    Vector b = Vector::Zero(s + r);
    b[s + k] = -2.0 * lambda * data.y0[k];
    M *= scale;
    b *= scale;
    lipschitz.push_back(spectral_norm(M));
    parts.matrices.push_back(std::move(M));
    parts.offsets.push_back(std::move(b));
  }
  const Matrix ata = data.A.transpose() * data.A;
  const double lam_min = s > 0 ? Eigen::SelfAdjointEigenSolver<Matrix>(ata, Eigen::EigenvaluesOnly).eigenvalues()(0) : 0.0;

  OperatorInfo info;
  info.mu = std::min(2.0 * lam_min, 2.0 * (lambda - 1.0));
  info.component_lipschitz = lipschitz;
  info.monotone = true;
  info.strongly_monotone = *info.mu > 0.0;
  FiniteSumOperator op = FiniteSumOperator::affine(std::move(parts), std::move(info));
  const AffineComponents& ap = *op.affine_parts();
  op.info().lipschitz = spectral_norm(ap.mean_matrix);
  op.info().solution = Vector(ap.mean_matrix.partialPivLu().solve(-ap.mean_offset));
  return op;
}

FiniteSumOperator make_policeman_burglar(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ConfigError("matrix game needs n >= 1 and d >= 1");
  Rng rng(seed);
  const auto dd = static_cast<Eigen::Index>(d);
  AffineComponents parts;
  std::vector<double> lipschitz;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix A(dd, dd);
    for (Eigen::Index r = 0; r < dd; ++r) {
      const double w = std::abs(rng.normal());
      for (Eigen::Index c = 0; c < dd; ++c)
        A(r, c) = w * (1.0 - std::exp(-0.8 * std::abs(static_cast<double>(r - c))));
    }
    const Matrix zero = Matrix::Zero(dd, dd);
    Matrix M = saddle_block(zero, A, zero);
    lipschitz.push_back(spectral_norm(A));
    parts.matrices.push_back(std::move(M));
    parts.offsets.push_back(Vector::Zero(2 * dd));
  }
  OperatorInfo info;
  info.component_lipschitz = lipschitz;
  info.monotone = true;
  info.simplex_blocks = {d, d};
  FiniteSumOperator op = FiniteSumOperator::affine(std::move(parts), std::move(info));
  op.info().lipschitz = spectral_norm(op.affine_parts()->mean_matrix);
  return op;
}

FiniteSumOperator make_sign_power_operator(double q) {
  if (!(q > 1.0)) throw ConfigError("sign-power exponent must exceed 1");
  auto sp = [q](double u) { return std::copysign(std::pow(std::abs(u), q), u); };
  OperatorInfo info;
  info.solution = Vector::Zero(2);
  info.monotone = true;
  FiniteSumOperator op(
      1, 2,
      [sp](std::size_t, const Vector& x) -> Vector {
        Vector f(2);
        f << sp(x[0]) + x[1], sp(x[1]) - x[0];
        return f;
      },
      std::move(info));
  op.set_jacobian([q](const Vector& x) -> Matrix {
    Matrix j(2, 2);
    j << q * std::pow(std::abs(x[0]), q - 1.0), 1.0, -1.0, q * std::pow(std::abs(x[1]), q - 1.0);
    return j;
  });
  return op;
}

FiniteSumOperator make_sinh_game(std::size_t d) {
  const auto dim = static_cast<Eigen::Index>(2 * d);
  OperatorInfo info;
  info.solution = Vector::Zero(dim);
  info.mu = 1.0;
  info.alpha = 1.0;
  info.L0 = 1.0;
  info.L1 = 1.0;
  info.monotone = true;
  info.strongly_monotone = true;
  FiniteSumOperator op(
      1, 2 * d,
      [](std::size_t, const Vector& x) -> Vector { return x.array().sinh().matrix(); },
      std::move(info));
  op.set_jacobian([](const Vector& x) -> Matrix { return x.array().cosh().matrix().asDiagonal(); });
  return op;
}

Vector project_simplex(const Vector& x) {
  const Eigen::Index n = x.size();
  if (n == 0) return x;
  std::vector<double> u(x.data(), x.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumulative += u[static_cast<std::size_t>(j)];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
  }
  return (x.array() - theta).max(0.0).matrix();
}

Vector project_blocks(const Vector& x, std::span<const std::size_t> blocks) {
  Vector out = x;
  Eigen::Index offset = 0;
  for (std::size_t b : blocks) {
    const auto len = static_cast<Eigen::Index>(b);
    out.segment(offset, len) = project_simplex(x.segment(offset, len));
    offset += len;
  }
  if (offset != x.size()) throw ContractViolation("simplex blocks do not cover the point");
  return out;
}

double duality_gap(const Matrix& A, const Vector& x1, const Vector& x2) {
  constexpr double tol = 1e-9;
  auto feasible = [](const Vector& v) { return (v.array() >= -tol).all() && std::abs(v.sum() - 1.0) <= tol; };
  if (A.rows() != x1.size() || A.cols() != x2.size())
    throw ContractViolation("duality gap: dimension mismatch");
  if (!feasible(x1) || !feasible(x2)) throw ContractViolation("duality gap needs points on the simplex");
  return (x1.transpose() * A).maxCoeff() - (A * x2).minCoeff();
}

std::vector<FiniteSumOperator> partition_components(const FiniteSumOperator& op, std::size_t groups) {
  if (groups < 1 || groups > op.size()) throw ConfigError("group count must lie in [1, n]");
  const std::size_t base = op.size() / groups;
  std::vector<FiniteSumOperator> out;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t begin = g * base;
    const std::size_t end = (g + 1 == groups) ? op.size() : begin + base;
    OperatorInfo info;
    info.monotone = op.info().monotone;
    if (const auto* ap = op.affine_parts()) {
      AffineComponents parts;
      std::vector<double> lips;
      for (std::size_t i = begin; i < end; ++i) {
        parts.matrices.push_back(ap->matrices[i]);
        parts.offsets.push_back(ap->offsets[i]);
        if (op.info().component_lipschitz) lips.push_back((*op.info().component_lipschitz)[i]);
      }
      if (!lips.empty()) info.component_lipschitz = lips;
      FiniteSumOperator sub = FiniteSumOperator::affine(std::move(parts), std::move(info));
      const double mu = min_symmetric_eigenvalue(sub.affine_parts()->mean_matrix);
      sub.info().mu = mu;
      sub.info().strongly_monotone = mu > 0.0;
      sub.info().lipschitz = spectral_norm(sub.affine_parts()->mean_matrix);
      out.push_back(std::move(sub));
    } else {
      FiniteSumOperator parent = op;
      out.emplace_back(end - begin, op.dim(),
                       [parent, begin](std::size_t i, const Vector& x) { return parent.component(begin + i, x); },
                       std::move(info));
    }
  }
  return out;
}

FederatedProblem make_federated_problem(std::vector<FiniteSumOperator> clients) {
  if (clients.empty()) throw ConfigError("federated problem needs at least one client");
  const auto dim = static_cast<Eigen::Index>(clients.front().dim());
  Matrix M = Matrix::Zero(dim, dim);
  Vector b = Vector::Zero(dim);
  double mu = std::numeric_limits<double>::infinity();
  for (const auto& c : clients) {
    const auto* ap = c.affine_parts();
    if (!ap) throw ConfigError("federated problem constructor needs affine clients");
    if (static_cast<Eigen::Index>(c.dim()) != dim) throw ConfigError("client dimensions differ");
    M += ap->mean_matrix;
    b += ap->mean_offset;
    mu = std::min(mu, min_symmetric_eigenvalue(ap->mean_matrix));
  }
  FederatedProblem fp;
  fp.solution = M.partialPivLu().solve(-b);
  fp.mu = mu;
  fp.clients = std::move(clients);
  return fp;
}

FederatedProblem make_federated_quadratic_game(const FederatedGameSpec& spec) {
  if (spec.clients < 1) throw ConfigError("federated game needs at least one client");
  Rng rng(spec.seed);
  std::vector<FiniteSumOperator> clients;
  for (std::size_t i = 0; i < spec.clients; ++i) {
    QuadraticGameSpec qs;
    qs.n = spec.components;
    qs.d = spec.d;
    qs.eig_A = spec.eig_A;
    qs.eig_B = spec.eig_B;
    qs.eig_C = spec.eig_C;
    qs.seed = rng.split(static_cast<std::uint64_t>(i)).next_u64();
    clients.push_back(make_quadratic_game(qs));
  }
  return make_federated_problem(std::move(clients));
}

}  // namespace egvi
