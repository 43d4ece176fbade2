#include "okl/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace okl {

Matrix fit_independent(const Matrix& k, const Matrix& y, const Mask& w, double lambda) {
  if (k.rows() != k.cols() || k.rows() != y.rows())
    throw DimensionMismatch("fit_independent: K and Y shapes are inconsistent");
  if (w.rows() != y.rows() || w.cols() != y.cols())
    throw DimensionMismatch("fit_independent: mask shape must match Y");
  if (!(lambda > 0.0)) throw Error("fit_independent: lambda must be positive");

  Matrix c = Matrix::Zero(y.rows(), y.cols());
  for (Index j = 0; j < y.cols(); ++j) {
    const auto& rows = w.rows_of_task(j);
    if (rows.empty()) continue;  // no observations: zero column, zero predictions
    const Index n = static_cast<Index>(rows.size());
    Matrix kobs(n, n);
    Vector yobs(n);
    for (Index a = 0; a < n; ++a) {
      yobs(a) = y(rows[static_cast<size_t>(a)], j);
      for (Index b = 0; b < n; ++b) kobs(a, b) = k(rows[static_cast<size_t>(a)], rows[static_cast<size_t>(b)]);
    }
    kobs.diagonal().array() += lambda;
    const Vector cobs = Eigen::LLT<Matrix>(kobs).solve(yobs);
    for (Index a = 0; a < n; ++a) c(rows[static_cast<size_t>(a)], j) = cobs(a);
  }
  return c;
}

Vector fit_pooled(const Matrix& k, const Matrix& y, const Mask& w, double lambda) {
  if (k.rows() != k.cols() || k.rows() != y.rows())
    throw DimensionMismatch("fit_pooled: K and Y shapes are inconsistent");
  if (w.rows() != y.rows() || w.cols() != y.cols())
    throw DimensionMismatch("fit_pooled: mask shape must match Y");
  if (!(lambda > 0.0)) throw Error("fit_pooled: lambda must be positive");

  const Index l = y.rows();
  Vector multiplicity = Vector::Zero(l);
  Vector rowsum = Vector::Zero(l);
  for (Index j = 0; j < y.cols(); ++j)
    for (Index i : w.rows_of_task(j)) {
      multiplicity(i) += 1.0;
      rowsum(i) += y(i, j);
    }

  // diag(n) K + lambda*I is non-symmetric; it is the duplicated-row ridge
  // system folded onto the distinct inputs, invertible for lambda > 0.
  Matrix system = multiplicity.asDiagonal() * k;
  system.diagonal().array() += lambda;
  return Eigen::PartialPivLU<Matrix>(system).solve(rowsum);
}

OklModel fit_rmf(const Matrix& y, const Mask& w, double lambda, Index p, uint64_t seed,
                 const StopRule& stop, const SolverOptions& opts) {
  const Index l = y.rows();
  Problem problem = Problem::from_factor(Matrix::Identity(l, l), 0.0, y, w, p, lambda);

  std::mt19937_64 rng(seed);
  FactorPair init{Matrix::Zero(l, p), random_full_rank(y.cols(), p, rng)};
  auto [factors, report] = block_descent(problem, std::move(init), stop, opts);

  std::vector<InputPoint> inputs;
  inputs.reserve(static_cast<size_t>(l));
  for (Index i = 0; i < l; ++i) inputs.emplace_back(static_cast<double>(i));

  OklModel model;
  model.factors = std::move(factors);
  model.lambda = lambda;
  model.p = p;
  model.jitter = 0.0;
  model.kernel.variant = KernelVariant::kronecker_delta;
  model.train_inputs = std::move(inputs);
  model.seed = seed;
  model.kind = ModelKind::rmf;
  return model;
}

OklModel independent_model(Matrix c, double lambda, KernelSpec kernel,
                           std::vector<InputPoint> inputs) {
  OklModel model;
  const Index m = c.cols();
  model.factors.A = std::move(c);
  model.factors.B = Matrix::Identity(m, m);
  model.lambda = lambda;
  model.p = m;
  model.kernel = std::move(kernel);
  model.train_inputs = std::move(inputs);
  model.kind = ModelKind::independent;
  return model;
}

OklModel pooled_model(Vector c, Index tasks, double lambda, KernelSpec kernel,
                      std::vector<InputPoint> inputs) {
  OklModel model;
  model.factors.A = c;
  model.factors.B = Matrix::Ones(tasks, 1);
  model.lambda = lambda;
  model.p = 1;
  model.kernel = std::move(kernel);
  model.train_inputs = std::move(inputs);
  model.kind = ModelKind::pooled;
  return model;
}

}  // namespace okl
