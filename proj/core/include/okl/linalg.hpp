#pragma once

#include <functional>

#include "okl/types.hpp"

namespace okl {

/// Matrix-free linear map on length-dim vectors. When symmetric_pd is set the
/// map is assumed symmetric positive definite (CG relies on it).
struct LinearOperator {
  Index dim = 0;
  bool symmetric_pd = false;
  std::function<Vector(const Vector&)> apply;
};

struct IterativeResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Lower-triangular F with K + jitter*I = F F^T. Throws NotSymmetric if K is
/// asymmetric beyond 1e-10 * max|K_ij|, IndefiniteEvenWithJitter if a pivot
/// fails after the jitter was added.
Matrix cholesky_psd(const Matrix& k, double jitter);

struct JitteredCholesky {
  Matrix F;
  double jitter = 0.0;
};

/// cholesky_psd with jitter escalation: starts at 1e-10 * mean(diag(K)) and
/// doubles until the factorization succeeds, up to 1e-4 * mean(diag(K)).
/// Spline-type kernel matrices are often numerically semi-definite, so some
/// jitter is usually needed.
JitteredCholesky cholesky_auto_jitter(const Matrix& k);

/// Conjugate gradient for symmetric positive definite operators.
/// Stops when ||op(x) - rhs|| <= tol * ||rhs|| or after max_iter iterations
/// (reported via converged, not fatal). x0, when given, seeds the iteration.
IterativeResult cg_solve(const LinearOperator& op, const Vector& rhs, double tol, int max_iter,
                         const Vector* x0 = nullptr);

/// Restarted GMRES for general (possibly non-symmetric) operators.
/// Throws StagnationDetected when a full restart cycle reduces the relative
/// residual by less than 1e-14 without reaching tol.
IterativeResult gmres_solve(const LinearOperator& op, const Vector& rhs, double tol, int restart,
                            int max_iter, const Vector* x0 = nullptr);

/// Symmetric PSD square root via eigendecomposition; eigenvalues below zero
/// are clipped. Used as a test oracle, not on the solve path.
Matrix sqrt_psd(const Matrix& m);

/// Application of the symmetric operator (B^T x F^T) W_D (B x F) + lambda*I
/// to a vectorized l x p matrix, computed matrix-free:
/// reshape a_f, form W .* (F * A_F * B^T), return vec(F^T * M * B) + lambda*a_f.
Vector masked_product_apply(const Matrix& f, const Matrix& b, const Mask& w, double lambda,
                            const Vector& a_f);

/// Default iteration cap used by the solvers: 10 * sqrt(dim), clamped to 2000.
int default_max_iter(Index dim);

/// vec / unvec in column-stacking order.
inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}
inline Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw DimensionMismatch("unvec: vector length does not match shape");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace okl
