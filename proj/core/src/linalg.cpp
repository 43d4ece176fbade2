#include "okl/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace okl {

namespace {

void check_symmetric(const Matrix& k, const char* where) {
  if (k.rows() != k.cols()) throw NotSymmetric(std::string(where) + ": matrix is not square");
  const double scale = k.cwiseAbs().maxCoeff();
  const double tol = 1e-10 * scale;
  for (Index j = 0; j < k.cols(); ++j)
    for (Index i = j + 1; i < k.rows(); ++i)
      if (std::abs(k(i, j) - k(j, i)) > tol)
        throw NotSymmetric(std::string(where) + ": asymmetry exceeds tolerance");
}

}  // namespace

Matrix cholesky_psd(const Matrix& k, double jitter) {
  check_symmetric(k, "cholesky_psd");
  Matrix shifted = k;
  shifted.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw IndefiniteEvenWithJitter("cholesky_psd: non-positive pivot with jitter " + std::to_string(jitter));
  return llt.matrixL();
}

JitteredCholesky cholesky_auto_jitter(const Matrix& k) {
  check_symmetric(k, "cholesky_auto_jitter");
  double scale = k.diagonal().mean();
  if (!(scale > 0.0)) scale = 1.0;

  double jitter = 1e-10 * scale;
  const double max_jitter = 1e-4 * scale;
  while (true) {
    try {
      return {cholesky_psd(k, jitter), jitter};
    } catch (const IndefiniteEvenWithJitter&) {
      if (jitter >= max_jitter) throw;
      jitter = std::min(2.0 * jitter, max_jitter);
    }
  }
}

IterativeResult cg_solve(const LinearOperator& op, const Vector& rhs, double tol, int max_iter,
                         const Vector* x0) {
  if (rhs.size() != op.dim) throw DimensionMismatch("cg_solve: rhs length does not match operator");
  const double rhs_norm = rhs.norm();
  IterativeResult out;
  if (rhs_norm == 0.0) {
    out.x = Vector::Zero(op.dim);
    out.converged = true;
    return out;
  }

  Vector x = (x0 != nullptr) ? *x0 : Vector::Zero(op.dim);
  Vector r = rhs - op.apply(x);
  Vector p = r;
  double rr = r.squaredNorm();
  if (!std::isfinite(rr)) throw NonFiniteEncountered("cg_solve: non-finite initial residual");
  double res = std::sqrt(rr) / rhs_norm;
  int it = 0;
  while (res > tol && it < max_iter) {
    Vector q = op.apply(p);
    const double pq = p.dot(q);
    const double alpha = rr / pq;
    if (!std::isfinite(alpha)) throw NonFiniteEncountered("cg_solve: non-finite step");
    x += alpha * p;
    r -= alpha * q;
    const double rr_new = r.squaredNorm();
    if (!std::isfinite(rr_new)) throw NonFiniteEncountered("cg_solve: non-finite residual");
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    res = std::sqrt(rr) / rhs_norm;
    ++it;
  }
  out.x = std::move(x);
  out.iterations = it;
  out.relative_residual = res;
  out.converged = res <= tol;
  return out;
}

IterativeResult gmres_solve(const LinearOperator& op, const Vector& rhs, double tol, int restart,
                            int max_iter, const Vector* x0) {
  if (rhs.size() != op.dim) throw DimensionMismatch("gmres_solve: rhs length does not match operator");
  const Index n = op.dim;
  const double rhs_norm = rhs.norm();
  IterativeResult out;
  if (rhs_norm == 0.0) {
    out.x = Vector::Zero(n);
    out.converged = true;
    return out;
  }

  Vector x = (x0 != nullptr) ? *x0 : Vector::Zero(n);
  int total_iters = 0;
  double res = 0.0;
  double prev_cycle_res = std::numeric_limits<double>::infinity();

  Matrix v(n, restart + 1);
  Matrix h = Matrix::Zero(restart + 1, restart);
  Vector cs(restart), sn(restart), g(restart + 1);

  while (true) {
    Vector r = rhs - op.apply(x);
    double beta = r.norm();
    if (!std::isfinite(beta)) throw NonFiniteEncountered("gmres_solve: non-finite residual");
    res = beta / rhs_norm;
    if (res <= tol || total_iters >= max_iter) break;

    v.col(0) = r / beta;
    g.setZero();
    g(0) = beta;
    h.setZero();

    int k = 0;
    bool breakdown = false;
    for (; k < restart && total_iters < max_iter; ++k, ++total_iters) {
      // Arnoldi with modified Gram-Schmidt.
      Vector w = op.apply(v.col(k));
      for (int i = 0; i <= k; ++i) {
        h(i, k) = w.dot(v.col(i));
        w -= h(i, k) * v.col(i);
      }
      h(k + 1, k) = w.norm();
      if (!std::isfinite(h(k + 1, k))) throw NonFiniteEncountered("gmres_solve: non-finite Arnoldi entry");
      if (h(k + 1, k) > 0.0) {
        v.col(k + 1) = w / h(k + 1, k);
      } else {
        breakdown = true;  // exact solution in the current Krylov space
      }

      // Apply accumulated Givens rotations to the new column, then zero the
      // subdiagonal with a fresh rotation.
      for (int i = 0; i < k; ++i) {
        const double t = cs(i) * h(i, k) + sn(i) * h(i + 1, k);
        h(i + 1, k) = -sn(i) * h(i, k) + cs(i) * h(i + 1, k);
        h(i, k) = t;
      }
      const double denom = std::hypot(h(k, k), h(k + 1, k));
      cs(k) = (denom == 0.0) ? 1.0 : h(k, k) / denom;
      sn(k) = (denom == 0.0) ? 0.0 : h(k + 1, k) / denom;
      h(k, k) = denom;
      h(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);

      res = std::abs(g(k + 1)) / rhs_norm;
      if (res <= tol || breakdown) {
        ++k;
        ++total_iters;
        break;
      }
    }

    // Back-substitution on the k x k triangular system, update x.
    Vector y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g(i);
      for (int j = i + 1; j < k; ++j) s -= h(i, j) * y(j);
      y(i) = s / h(i, i);
    }
    x += v.leftCols(k) * y;

    const double cycle_res = (rhs - op.apply(x)).norm() / rhs_norm;
    if (cycle_res > tol && total_iters < max_iter && prev_cycle_res - cycle_res < 1e-14)
      throw StagnationDetected("gmres_solve: residual stalled over a restart cycle");
    prev_cycle_res = cycle_res;
  }

  out.x = std::move(x);
  out.iterations = total_iters;
  out.relative_residual = res;
  out.converged = res <= tol;
  return out;
}

Matrix sqrt_psd(const Matrix& m) {
  check_symmetric(m, "sqrt_psd");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector ev = es.eigenvalues();
  for (Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Vector masked_product_apply(const Matrix& f, const Matrix& b, const Mask& w, double lambda,
                            const Vector& a_f) {
  const Index l = f.rows();
  const Index m = b.rows();
  const Index p = b.cols();
  if (f.cols() != l || w.rows() != l || w.cols() != m)
    throw DimensionMismatch("masked_product_apply: inconsistent F/B/W shapes");
  if (a_f.size() != l * p) throw DimensionMismatch("masked_product_apply: vector length != l*p");

  const Matrix af = unvec(a_f, l, p);
  const Matrix masked = w.hadamard((f * af) * b.transpose());
  Vector out = vec(f.transpose() * (masked * b));
  out += lambda * a_f;
  return out;
}

int default_max_iter(Index dim) {
  const int cap = static_cast<int>(std::ceil(10.0 * std::sqrt(static_cast<double>(dim))));
  return std::min(cap, 2000);
}

}  // namespace okl
