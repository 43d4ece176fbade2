#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "okl/kernels.hpp"
#include "okl/linalg.hpp"
#include "okl/types.hpp"

namespace okl {

/// How the A sub-problem is solved. All three variants satisfy the same
/// optimality condition; cholesky is the default (generally fastest).
enum class AVariant { cholesky, gmres, cvar };

const char* a_variant_name(AVariant v);
AVariant a_variant_from_name(const std::string& name);

struct SolverOptions {
  AVariant variant = AVariant::cholesky;
  double tol = 1e-8;     // relative residual target for the inner solvers
  int max_iter = 0;      // 0 = 10*sqrt(dim) capped at 2000
  int gmres_restart = 50;
};

struct StopRule {
  int max_outer = 50;
  double rel_obj_tol = 1e-6;
};

/// One instance of the factorized problem
///   min  ||Y - K A B^T||_W^2 / (2 lambda) + <A, K A>_F / 2 + ||B||_F^2 / 2
/// with K represented by its jittered Cholesky factor, K = F F^T.
struct Problem {
  Matrix F;            // l x l lower triangular
  double jitter = 0.0;
  Matrix Y;            // l x m, zeros at unobserved entries
  Mask W;
  Index p = 1;
  double lambda = 1.0;

  Index l() const { return F.rows(); }
  Index m() const { return Y.cols(); }

  /// K applied on the left through the factor: F * (F^T * X).
  Matrix k_apply(const Matrix& x) const { return F * (F.transpose() * x); }

  static Problem from_kernel_matrix(const Matrix& k, Matrix y, Mask w, Index p, double lambda);
  static Problem from_factor(Matrix f, double jitter, Matrix y, Mask w, Index p, double lambda);
};

double objective(const Problem& problem, const FactorPair& factors);
Matrix grad_A(const Problem& problem, const FactorPair& factors);
Matrix grad_B(const Problem& problem, const FactorPair& factors);

struct ASolveResult {
  Matrix A;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Change of variable A_F = F^T A; CG on the symmetric PD operator
/// (B^T x F^T) W_D (B x F) + lambda*I, then a triangular solve recovers A.
ASolveResult solve_A_cholesky(const Problem& problem, const Matrix& b, const Matrix* a_init = nullptr,
                              const SolverOptions& opts = {});

/// Direct GMRES on the (generally non-symmetric) operator
/// (B^T x I) W_D (B x K) + lambda*I.
ASolveResult solve_A_gmres(const Problem& problem, const Matrix& b, const Matrix* a_init = nullptr,
                           const SolverOptions& opts = {});

/// Representation A = C B with C supported on the observation pattern; CG on
/// the reduced coordinates of W_D ((B B^T) x K) W_D + lambda*I. The returned
/// c holds the observed-position values in Mask::entries() order.
struct CvarResult {
  Matrix A;
  Vector c;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};
CvarResult solve_A_cvar(const Problem& problem, const Matrix& b, const Vector* c_init = nullptr,
                        const SolverOptions& opts = {});

/// Closed-form row-wise ridge update: with E = K A,
/// b_j = (E^T diag(w^j) E + lambda*I)^{-1} E^T diag(w^j) y^j.
Matrix solve_B(const Problem& problem, const Matrix& a);

struct DescentReport {
  double initial_objective = 0.0;
  std::vector<double> objective_after_A;   // one entry per outer iteration
  std::vector<double> objective_after_B;
  std::vector<int> a_iterations;           // inner CG/GMRES iteration counts
  std::vector<Index> rank_B;               // numerical rank after each B update
  double final_grad_A_norm = 0.0;
  double final_grad_B_norm = 0.0;
  int outer_iterations = 0;
  bool converged = false;
};

/// Alternate exact minimization over A and B until the relative objective
/// decrease falls below stop.rel_obj_tol or stop.max_outer is reached.
std::pair<FactorPair, DescentReport> block_descent(const Problem& problem, FactorPair init,
                                                   const StopRule& stop,
                                                   const SolverOptions& opts = {});

enum class ModelKind { okl, independent, pooled, rmf };
const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

/// Fitted artifact: everything needed to predict and to recover (C, L).
struct OklModel {
  FactorPair factors;
  double lambda = 0.0;
  Index p = 0;
  double jitter = 0.0;
  KernelSpec kernel;
  std::vector<InputPoint> train_inputs;
  uint64_t seed = 0;
  ModelKind kind = ModelKind::okl;
};

/// Kernel-level description of a training problem; holds the assembled and
/// factorized Gram matrix so a whole lambda path shares one factorization.
struct ProblemTemplate {
  Matrix F;
  double jitter = 0.0;
  Matrix Y;
  Mask W;
  Index p = 1;
  KernelSpec kernel;
  std::vector<InputPoint> inputs;

  static ProblemTemplate make(const KernelSpec& kernel, std::vector<InputPoint> inputs, Matrix y,
                              Mask w, Index p);
  Problem instance(double lambda) const;
};

struct PathConfig {
  StopRule cold{50, 1e-6};
  StopRule warm{5, 1e-6};
  SolverOptions solver{};
  double reinit_threshold_scale = 1e-6;  // threshold = scale * sqrt(m*p)
  uint64_t seed = 1;
};

struct PathEntry {
  double lambda = 0.0;
  OklModel model;
  DescentReport report;
  bool reinitialized = false;  // B was re-drawn before this fit
};

/// Warm-start regularization path over a strictly decreasing lambda grid.
/// The fit at lambda_k starts from the factors of lambda_{k-1}; B is re-drawn
/// to a full-rank matrix whenever its Frobenius norm collapses.
std::vector<PathEntry> reg_path(const ProblemTemplate& tmpl, const std::vector<double>& lambda_grid,
                                const PathConfig& config);

/// Decreasing log-spaced grid from ||Y||_F^2 / l down the given number of decades.
std::vector<double> default_lambda_grid(const Matrix& y, int count = 30, double decades = 5.0);

/// i.i.d. uniform [0,1] entries; full rank with probability one.
Matrix random_full_rank(Index rows, Index cols, std::mt19937_64& rng);

/// (C, L) of the kernel-expansion form: L = B B^T, C = A B^+.
std::pair<Matrix, Matrix> recover_CL(const OklModel& model);
std::pair<Matrix, Matrix> recover_CL(const FactorPair& factors);

Vector predict(const OklModel& model, const InputPoint& x_new);
Matrix predict_matrix(const OklModel& model, const std::vector<InputPoint>& inputs);

/// Count of singular values above rel_tol * sigma_max.
Index numerical_rank(const Matrix& m, double rel_tol = 1e-8);

}  // namespace okl
