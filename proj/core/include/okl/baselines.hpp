#pragma once

#include "okl/solver.hpp"

namespace okl {

/// Single-task kernel ridge per column: coefficient matrix C (l x m) where
/// column j solves (K_obs + lambda*I) c = y_obs on the rows observed for
/// task j and is zero elsewhere. Equivalent to the joint problem with the
/// task-similarity matrix clamped to the identity.
Matrix fit_independent(const Matrix& k, const Matrix& y, const Mask& w, double lambda);

/// Pooled kernel ridge: one coefficient vector c (length l) fitted to all
/// observed pairs, where input x_i carries multiplicity equal to its observed
/// task count. Solved as (diag(n) K + lambda*I) c = Y e, which is the
/// row-duplicated ridge system reduced to the distinct inputs.
Vector fit_pooled(const Matrix& k, const Matrix& y, const Mask& w, double lambda);

/// Regularized matrix factorization: the K = I special case of the joint
/// problem (Kronecker delta input kernel). All solver invariants apply.
OklModel fit_rmf(const Matrix& y, const Mask& w, double lambda, Index p, uint64_t seed = 1,
                 const StopRule& stop = {}, const SolverOptions& opts = {});

/// Wrap baseline coefficients as models so prediction, persistence and
/// evaluation are uniform across methods: independent is (A = C, B = I),
/// pooled is (A = c, B = ones), so predictions are K_new * A * B^T.
OklModel independent_model(Matrix c, double lambda, KernelSpec kernel,
                           std::vector<InputPoint> inputs);
OklModel pooled_model(Vector c, Index tasks, double lambda, KernelSpec kernel,
                      std::vector<InputPoint> inputs);

}  // namespace okl
