#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "okl/baselines.hpp"
#include "support/test_utils.hpp"

using namespace okl;
using okl::testing::random_mask;
using okl::testing::random_matrix;
using okl::testing::random_spd;

TEST_CASE("independent ridge on a single observation") {
  Matrix k(1, 1), y(1, 1);
  k << 1;
  y << 1;
  const Matrix c = fit_independent(k, y, Mask::all(1, 1), 1.0);
  CHECK(c(0, 0) == doctest::Approx(0.5));
  CHECK((k * c)(0, 0) == doctest::Approx(0.5));  // prediction at the input
}

TEST_CASE("independent fit leaves unobserved tasks at zero") {
  std::mt19937_64 rng(401);
  const Matrix k = random_spd(5, rng);
  const Matrix y = random_matrix(5, 3, rng);
  Matrix w = Matrix::Ones(5, 3);
  w.col(2).setZero();
  const Matrix c = fit_independent(k, y, Mask::from_dense(w), 0.5);
  CHECK(c.col(2).norm() == 0.0);
  CHECK(c.col(0).norm() > 0.0);
}

TEST_CASE("independent columns satisfy the observed-subset ridge systems") {
  std::mt19937_64 rng(409);
  const Matrix k = random_spd(6, rng);
  const Matrix y = random_matrix(6, 4, rng);
  const Mask w = random_mask(6, 4, rng, 0.6);
  const double lambda = 0.3;
  const Matrix c = fit_independent(k, y, w, lambda);
  for (Index j = 0; j < 4; ++j) {
    for (Index i = 0; i < 6; ++i)
      if (!w.contains(i, j)) CHECK(c(i, j) == 0.0);
    for (Index i : w.rows_of_task(j)) {
      double lhs = lambda * c(i, j);
      for (Index r : w.rows_of_task(j)) lhs += k(i, r) * c(r, j);
      CHECK(lhs == doctest::Approx(y(i, j)).epsilon(1e-8));
    }
  }
}

TEST_CASE("independent fit matches the joint solver with B frozen at the identity") {
  std::mt19937_64 rng(419);
  for (int trial = 0; trial < 5; ++trial) {
    const Index l = 7, m = 4;
    const Matrix k = random_spd(l, rng);
    const Matrix y = random_matrix(l, m, rng);
    const Mask w = random_mask(l, m, rng, 0.7);
    const double lambda = 0.4;

    const Matrix c = fit_independent(k, y, w, lambda);

    // one A update with B = I and p = m is exactly the independent fit
    const Problem problem = Problem::from_kernel_matrix(k, y, w, m, lambda);
    SolverOptions opts;
    opts.tol = 1e-12;
    const Matrix a = solve_A_cholesky(problem, Matrix::Identity(m, m), nullptr, opts).A;
    CHECK((problem.k_apply(a) - problem.k_apply(c)).norm() <=
          1e-6 * (1.0 + problem.k_apply(c).norm()));
  }
}

TEST_CASE("pooled fit approaches the mean of coincident observations as lambda vanishes") {
  // two tasks observe the same single input with values 1 and 3
  Matrix k(1, 1);
  k << 1;
  Matrix y(1, 2);
  y << 1, 3;
  const Vector c = fit_pooled(k, y, Mask::all(1, 2), 1e-8);
  CHECK((k * c)(0) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("pooled on a single task equals the independent fit") {
  std::mt19937_64 rng(431);
  const Matrix k = random_spd(5, rng);
  const Matrix y = random_matrix(5, 1, rng);
  const Mask w = random_mask(5, 1, rng, 0.8);
  const double lambda = 0.7;
  const Vector pooled = fit_pooled(k, y, w, lambda);
  const Matrix indep = fit_independent(k, y, w, lambda);
  CHECK((k * pooled - k * indep.col(0)).norm() <= 1e-9 * (1.0 + (k * indep).norm()));
}

TEST_CASE("pooled equals independent when every task carries identical data") {
  std::mt19937_64 rng(433);
  const Matrix k = random_spd(6, rng);
  const Matrix y_col = random_matrix(6, 1, rng);
  Matrix y(6, 4);
  for (Index j = 0; j < 4; ++j) y.col(j) = y_col;
  const Mask w = Mask::all(6, 4);
  const double lambda = 0.5;

  // duplicated tasks multiply both the gram row weight and the rhs by m, so
  // the pooled fit at lambda equals each single-task fit at lambda / m
  const Vector pooled = fit_pooled(k, y, w, lambda);
  const Matrix indep = fit_independent(k, y_col, Mask::all(6, 1), lambda / 4.0);
  CHECK((k * pooled - k * indep.col(0)).norm() <= 1e-8 * (1.0 + (k * pooled).norm()));
}

TEST_CASE("pooled fit equals the explicit row-duplicated ridge") {
  std::mt19937_64 rng(439);
  for (int trial = 0; trial < 5; ++trial) {
    const Index l = 5, m = 3;
    const Matrix k = random_spd(l, rng);
    const Matrix y = random_matrix(l, m, rng);
    const Mask w = random_mask(l, m, rng, 0.6);
    const double lambda = 0.45;

    const Vector c = fit_pooled(k, y, w, lambda);

    // oracle: duplicate each observed (i, j) into its own row and solve the
    // dense (K_pool + lambda I) alpha = y_pool kernel ridge system
    const auto entries = w.entries();
    const Index n = static_cast<Index>(entries.size());
    Matrix kpool(n, n);
    Vector ypool(n);
    for (Index a = 0; a < n; ++a) {
      ypool(a) = y(entries[static_cast<size_t>(a)].first, entries[static_cast<size_t>(a)].second);
      for (Index b = 0; b < n; ++b)
        kpool(a, b) = k(entries[static_cast<size_t>(a)].first, entries[static_cast<size_t>(b)].first);
    }
    kpool.diagonal().array() += lambda;
    const Vector alpha = Eigen::LLT<Matrix>(kpool).solve(ypool);
    Vector c_dup = Vector::Zero(l);
    for (Index a = 0; a < n; ++a) c_dup(entries[static_cast<size_t>(a)].first) += alpha(a);

    CHECK((k * c - k * c_dup).norm() <= 1e-8 * (1.0 + (k * c_dup).norm()));
  }
}

TEST_CASE("pooled predictions are identical for every task") {
  std::mt19937_64 rng(443);
  const Matrix k = random_spd(5, rng);
  const Matrix y = random_matrix(5, 3, rng);
  const Vector c = fit_pooled(k, y, Mask::all(5, 3), 0.2);
  KernelSpec kernel;
  kernel.variant = KernelVariant::exp_covariance;
  std::vector<InputPoint> inputs = {0.0, 0.2, 0.4, 0.6, 0.8};
  const OklModel model = pooled_model(c, 3, 0.2, kernel, inputs);
  const Matrix pred = predict_matrix(model, inputs);
  for (Index j = 1; j < 3; ++j) CHECK((pred.col(j) - pred.col(0)).norm() == 0.0);
}

TEST_CASE("rmf with tiny regularization reconstructs a fully observed matrix") {
  std::mt19937_64 rng(449);
  const Index l = 6, m = 4;
  const Matrix y = random_matrix(l, m, rng);
  SolverOptions opts;
  opts.tol = 1e-12;
  const OklModel model = fit_rmf(y, Mask::all(l, m), 1e-7, std::min(l, m), 3, {300, 1e-12}, opts);
  const Matrix reconstruction = model.factors.A * model.factors.B.transpose();
  CHECK((reconstruction - y).norm() <= 1e-3 * y.norm());
}

TEST_CASE("rmf objective is the plain factorization objective") {
  std::mt19937_64 rng(457);
  const Index l = 5, m = 4, p = 2;
  const Matrix y = random_matrix(l, m, rng);
  const Mask w = random_mask(l, m, rng, 0.7);
  const double lambda = 0.6;
  const Problem problem = Problem::from_factor(Matrix::Identity(l, l), 0.0, y, w, p, lambda);
  const FactorPair f{random_matrix(l, p, rng), random_matrix(m, p, rng)};
  const double direct = w.hadamard(w.hadamard(y) - f.A * f.B.transpose()).squaredNorm() /
                            (2.0 * lambda) +
                        0.5 * f.A.squaredNorm() + 0.5 * f.B.squaredNorm();
  CHECK(objective(problem, f) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("rmf reconstruction beats the next-lower-rank truncated SVD") {
  std::mt19937_64 rng(461);
  const Index l = 8, m = 6, p = 3;
  // low-rank plus noise so the rank-p approximation is meaningfully better
  const Matrix y =
      random_matrix(l, p, rng) * random_matrix(p, m, rng) + 0.05 * random_matrix(l, m, rng);
  SolverOptions opts;
  opts.tol = 1e-12;
  const OklModel model = fit_rmf(y, Mask::all(l, m), 1e-6, p, 11, {300, 1e-12}, opts);
  const double err = (model.factors.A * model.factors.B.transpose() - y).norm();

  Eigen::JacobiSVD<Matrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sv = svd.singularValues();
  for (Index i = p - 1; i < sv.size(); ++i) sv(i) = 0.0;  // keep p-1 components
  const double svd_err =
      (svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose() - y).norm();
  CHECK(err <= svd_err);
}

TEST_CASE("baseline model wrappers predict through K A B^T") {
  std::mt19937_64 rng(463);
  std::vector<InputPoint> inputs = {0.0, 0.3, 0.9, 1.4};
  KernelSpec kernel;
  kernel.variant = KernelVariant::linear_spline;
  const Matrix k = gram_matrix(kernel, inputs);
  const Matrix y = random_matrix(4, 3, rng);
  const Mask w = random_mask(4, 3, rng, 0.8);

  const Matrix c = fit_independent(k, y, w, 0.5);
  const OklModel indep = independent_model(c, 0.5, kernel, inputs);
  CHECK((predict_matrix(indep, inputs) - k * c).norm() <= 1e-12);
  CHECK(indep.factors.B.isIdentity(0.0));

  const Vector cp = fit_pooled(k, y, w, 0.5);
  const OklModel pooled = pooled_model(cp, 3, 0.5, kernel, inputs);
  const Matrix pred = predict_matrix(pooled, inputs);
  CHECK((pred.col(0) - k * cp).norm() <= 1e-12);
}
