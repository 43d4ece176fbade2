#include "okl/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace okl {

namespace {

void check_factors(const Problem& problem, const FactorPair& factors, const char* where) {
  if (factors.A.rows() != problem.l() || factors.A.cols() != problem.p ||
      factors.B.rows() != problem.m() || factors.B.cols() != problem.p)
    throw DimensionMismatch(std::string(where) + ": factor shapes do not match problem");
}

int resolve_max_iter(const SolverOptions& opts, Index dim) {
  return opts.max_iter > 0 ? opts.max_iter : default_max_iter(dim);
}

/// Masked residual values r_e = (K A B^T - Y)(i,j) on the observed pattern,
/// in Mask::entries() order. E = K A must be precomputed.
Vector masked_residual(const Problem& problem, const Matrix& e, const Matrix& b) {
  Vector r(problem.W.count());
  Index k = 0;
  for (Index j = 0; j < problem.W.cols(); ++j)
    for (Index i : problem.W.rows_of_task(j))
      r(k++) = e.row(i).dot(b.row(j)) - problem.Y(i, j);
  return r;
}

}  // namespace

const char* a_variant_name(AVariant v) {
  switch (v) {
    case AVariant::cholesky: return "cholesky";
    case AVariant::gmres: return "gmres";
    case AVariant::cvar: return "cvar";
  }
  return "unknown";
}

AVariant a_variant_from_name(const std::string& name) {
  if (name == "cholesky") return AVariant::cholesky;
  if (name == "gmres") return AVariant::gmres;
  if (name == "cvar") return AVariant::cvar;
  throw IncompatibleInput("unknown A-subproblem variant: " + name);
}

Problem Problem::from_kernel_matrix(const Matrix& k, Matrix y, Mask w, Index p, double lambda) {
  auto chol = cholesky_auto_jitter(k);
  return from_factor(std::move(chol.F), chol.jitter, std::move(y), std::move(w), p, lambda);
}

Problem Problem::from_factor(Matrix f, double jitter, Matrix y, Mask w, Index p, double lambda) {
  if (f.rows() != f.cols()) throw DimensionMismatch("Problem: F must be square");
  if (y.rows() != f.rows()) throw DimensionMismatch("Problem: Y row count must match F");
  if (w.rows() != y.rows() || w.cols() != y.cols())
    throw DimensionMismatch("Problem: mask shape must match Y");
  if (p < 1 || p > y.cols()) throw DimensionMismatch("Problem: rank bound p must satisfy 1 <= p <= m");
  if (!(lambda > 0.0)) throw DimensionMismatch("Problem: lambda must be positive");

  Problem out;
  out.F = std::move(f);
  out.jitter = jitter;
  out.Y = w.hadamard(y);  // enforce Y = W .* Y
  out.W = std::move(w);
  out.p = p;
  out.lambda = lambda;
  return out;
}

double objective(const Problem& problem, const FactorPair& factors) {
  check_factors(problem, factors, "objective");
  const Matrix e = problem.k_apply(factors.A);
  const Vector r = masked_residual(problem, e, factors.B);
  const double fit = r.squaredNorm() / (2.0 * problem.lambda);
  const double reg_a = 0.5 * (factors.A.array() * e.array()).sum();
  const double reg_b = 0.5 * factors.B.squaredNorm();
  return fit + reg_a + reg_b;
}

Matrix grad_A(const Problem& problem, const FactorPair& factors) {
  check_factors(problem, factors, "grad_A");
  const Matrix e = problem.k_apply(factors.A);
  const Vector r = masked_residual(problem, e, factors.B);
  Matrix rb = Matrix::Zero(problem.l(), problem.p);
  Index k = 0;
  for (Index j = 0; j < problem.W.cols(); ++j)
    for (Index i : problem.W.rows_of_task(j)) rb.row(i) += r(k++) * factors.B.row(j);
  return problem.k_apply(rb / problem.lambda + factors.A);
}

Matrix grad_B(const Problem& problem, const FactorPair& factors) {
  check_factors(problem, factors, "grad_B");
  const Matrix e = problem.k_apply(factors.A);
  const Vector r = masked_residual(problem, e, factors.B);
  Matrix rte = Matrix::Zero(problem.m(), problem.p);
  Index k = 0;
  for (Index j = 0; j < problem.W.cols(); ++j)
    for (Index i : problem.W.rows_of_task(j)) rte.row(j) += r(k++) * e.row(i);
  return rte / problem.lambda + factors.B;
}

ASolveResult solve_A_cholesky(const Problem& problem, const Matrix& b, const Matrix* a_init,
                              const SolverOptions& opts) {
  const Index l = problem.l();
  const Index p = problem.p;
  if (b.rows() != problem.m() || b.cols() != p)
    throw DimensionMismatch("solve_A_cholesky: B shape does not match problem");

  LinearOperator op;
  op.dim = l * p;
  op.symmetric_pd = true;
  op.apply = [&](const Vector& v) { return masked_product_apply(problem.F, b, problem.W, problem.lambda, v); };

  const Vector rhs = vec(problem.F.transpose() * (problem.Y * b));
  Vector x0;
  const Vector* x0_ptr = nullptr;
  if (a_init != nullptr) {
    x0 = vec(problem.F.transpose() * (*a_init));
    x0_ptr = &x0;
  }
  auto res = cg_solve(op, rhs, opts.tol, resolve_max_iter(opts, op.dim), x0_ptr);

  const Matrix af = unvec(res.x, l, p);
  ASolveResult out;
  out.A = problem.F.transpose().triangularView<Eigen::Upper>().solve(af);
  out.iterations = res.iterations;
  out.relative_residual = res.relative_residual;
  out.converged = res.converged;
  return out;
}

ASolveResult solve_A_gmres(const Problem& problem, const Matrix& b, const Matrix* a_init,
                           const SolverOptions& opts) {
  const Index l = problem.l();
  const Index p = problem.p;
  if (b.rows() != problem.m() || b.cols() != p)
    throw DimensionMismatch("solve_A_gmres: B shape does not match problem");

  LinearOperator op;
  op.dim = l * p;
  op.apply = [&](const Vector& v) {
    const Matrix a = unvec(v, l, p);
    const Matrix masked = problem.W.hadamard(problem.k_apply(a) * b.transpose());
    Vector out = vec(masked * b);
    out += problem.lambda * v;
    return out;
  };

  const Vector rhs = vec(problem.Y * b);
  Vector x0;
  const Vector* x0_ptr = nullptr;
  if (a_init != nullptr) {
    x0 = vec(*a_init);
    x0_ptr = &x0;
  }
  auto res = gmres_solve(op, rhs, opts.tol, opts.gmres_restart, resolve_max_iter(opts, op.dim), x0_ptr);

  ASolveResult out;
  out.A = unvec(res.x, l, p);
  out.iterations = res.iterations;
  out.relative_residual = res.relative_residual;
  out.converged = res.converged;
  return out;
}

CvarResult solve_A_cvar(const Problem& problem, const Matrix& b, const Vector* c_init,
                        const SolverOptions& opts) {
  const Index l = problem.l();
  const Index p = problem.p;
  if (b.rows() != problem.m() || b.cols() != p)
    throw DimensionMismatch("solve_A_cvar: B shape does not match problem");
  const Index nnz = problem.W.count();
  const auto entries = problem.W.entries();

  // Reduced coordinates: CG runs on the observed positions only, so C keeps
  // the sparsity pattern of W throughout. For pattern-supported C,
  //   apply(c) = restrict(K (C B) B^T) + lambda c
  // and no l x m intermediate is ever formed.
  LinearOperator op;
  op.dim = nnz;
  op.symmetric_pd = true;
  op.apply = [&](const Vector& c) {
    Matrix cb = Matrix::Zero(l, p);
    for (Index k = 0; k < nnz; ++k) cb.row(entries[static_cast<size_t>(k)].first) += c(k) * b.row(entries[static_cast<size_t>(k)].second);
    const Matrix kcb = problem.k_apply(cb);
    Vector out(nnz);
    for (Index k = 0; k < nnz; ++k)
      out(k) = kcb.row(entries[static_cast<size_t>(k)].first).dot(b.row(entries[static_cast<size_t>(k)].second)) + problem.lambda * c(k);
    return out;
  };

  Vector rhs(nnz);
  for (Index k = 0; k < nnz; ++k)
    rhs(k) = problem.Y(entries[static_cast<size_t>(k)].first, entries[static_cast<size_t>(k)].second);

  if (c_init != nullptr && c_init->size() != nnz)
    throw DimensionMismatch("solve_A_cvar: c_init length does not match observation count");
  auto res = cg_solve(op, rhs, opts.tol, resolve_max_iter(opts, op.dim), c_init);

  CvarResult out;
  out.A = Matrix::Zero(l, p);
  for (Index k = 0; k < nnz; ++k) out.A.row(entries[static_cast<size_t>(k)].first) += res.x(k) * b.row(entries[static_cast<size_t>(k)].second);
  out.c = std::move(res.x);
  out.iterations = res.iterations;
  out.relative_residual = res.relative_residual;
  out.converged = res.converged;
  return out;
}

Matrix solve_B(const Problem& problem, const Matrix& a) {
  const Index p = problem.p;
  if (a.rows() != problem.l() || a.cols() != p)
    throw DimensionMismatch("solve_B: A shape does not match problem");

  const Matrix e = problem.k_apply(a);
  Matrix b(problem.m(), p);
  const Matrix reg = problem.lambda * Matrix::Identity(p, p);
  for (Index j = 0; j < problem.m(); ++j) {
    const auto& rows = problem.W.rows_of_task(j);
    if (rows.empty()) {
      b.row(j).setZero();  // no observations: the lambda*I system has rhs 0
      continue;
    }
    Matrix eobs(static_cast<Index>(rows.size()), p);
    Vector yobs(static_cast<Index>(rows.size()));
    for (size_t k = 0; k < rows.size(); ++k) {
      eobs.row(static_cast<Index>(k)) = e.row(rows[k]);
      yobs(static_cast<Index>(k)) = problem.Y(rows[k], j);
    }
    const Matrix g = eobs.transpose() * eobs + reg;
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success)
      throw SingularRowSystem("solve_B: row system not positive definite (lambda too small?)");
    b.row(j) = llt.solve(eobs.transpose() * yobs).transpose();
  }
  return b;
}

std::pair<FactorPair, DescentReport> block_descent(const Problem& problem, FactorPair init,
                                                   const StopRule& stop, const SolverOptions& opts) {
  check_factors(problem, init, "block_descent");
  DescentReport report;
  FactorPair factors = std::move(init);
  report.initial_objective = objective(problem, factors);
  double prev = report.initial_objective;

  Vector c_state;  // carried across outer iterations for the cvar variant
  if (opts.variant == AVariant::cvar) c_state = Vector::Zero(problem.W.count());

  for (int outer = 0; outer < stop.max_outer; ++outer) {
    switch (opts.variant) {
      case AVariant::cholesky: {
        auto r = solve_A_cholesky(problem, factors.B, &factors.A, opts);
        factors.A = std::move(r.A);
        report.a_iterations.push_back(r.iterations);
        break;
      }
      case AVariant::gmres: {
        auto r = solve_A_gmres(problem, factors.B, &factors.A, opts);
        factors.A = std::move(r.A);
        report.a_iterations.push_back(r.iterations);
        break;
      }
      case AVariant::cvar: {
        auto r = solve_A_cvar(problem, factors.B, &c_state, opts);
        factors.A = std::move(r.A);
        c_state = std::move(r.c);
        report.a_iterations.push_back(r.iterations);
        break;
      }
    }
    report.objective_after_A.push_back(objective(problem, factors));

    factors.B = solve_B(problem, factors.A);
    const double obj = objective(problem, factors);
    report.objective_after_B.push_back(obj);
    report.rank_B.push_back(numerical_rank(factors.B));
    report.outer_iterations = outer + 1;

    if (prev - obj < stop.rel_obj_tol * std::max(prev, 1e-300)) {
      report.converged = true;
      break;
    }
    prev = obj;
  }

  report.final_grad_A_norm = grad_A(problem, factors).norm();
  report.final_grad_B_norm = grad_B(problem, factors).norm();
  return {std::move(factors), std::move(report)};
}

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::okl: return "okl";
    case ModelKind::independent: return "independent";
    case ModelKind::pooled: return "pooled";
    case ModelKind::rmf: return "rmf";
  }
  return "unknown";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "okl") return ModelKind::okl;
  if (name == "independent") return ModelKind::independent;
  if (name == "pooled") return ModelKind::pooled;
  if (name == "rmf") return ModelKind::rmf;
  throw ModelFormatError("unknown model kind: " + name);
}

ProblemTemplate ProblemTemplate::make(const KernelSpec& kernel, std::vector<InputPoint> inputs,
                                      Matrix y, Mask w, Index p) {
  if (static_cast<Index>(inputs.size()) != y.rows())
    throw DimensionMismatch("ProblemTemplate: input count must match Y rows");
  auto chol = cholesky_auto_jitter(gram_matrix(kernel, inputs));
  ProblemTemplate out;
  out.F = std::move(chol.F);
  out.jitter = chol.jitter;
  out.W = std::move(w);
  out.Y = out.W.hadamard(y);
  out.p = p;
  out.kernel = kernel;
  out.inputs = std::move(inputs);
  return out;
}

Problem ProblemTemplate::instance(double lambda) const {
  return Problem::from_factor(F, jitter, Y, W, p, lambda);
}

std::vector<PathEntry> reg_path(const ProblemTemplate& tmpl, const std::vector<double>& lambda_grid,
                                const PathConfig& config) {
  if (lambda_grid.empty()) throw EmptyPath("reg_path: empty lambda grid");
  for (size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0)) throw GridNotDescending("reg_path: lambda values must be positive");
    if (i > 0 && !(lambda_grid[i] < lambda_grid[i - 1]))
      throw GridNotDescending("reg_path: lambda grid must be strictly decreasing");
  }

  Problem problem = tmpl.instance(lambda_grid.front());
  const Index m = problem.m();
  const Index p = problem.p;
  const double reinit_threshold = config.reinit_threshold_scale * std::sqrt(static_cast<double>(m * p));

  std::mt19937_64 rng(config.seed);
  FactorPair factors{Matrix::Zero(problem.l(), p), random_full_rank(m, p, rng)};

  std::vector<PathEntry> out;
  out.reserve(lambda_grid.size());
  for (size_t i = 0; i < lambda_grid.size(); ++i) {
    problem.lambda = lambda_grid[i];
    bool reinit = false;
    if (i > 0 && factors.B.norm() < reinit_threshold) {
      factors.B = random_full_rank(m, p, rng);
      factors.A.setZero();
      reinit = true;
    }
    const StopRule& stop = (i == 0) ? config.cold : config.warm;
    auto [fitted, report] = block_descent(problem, factors, stop, config.solver);
    factors = fitted;

    PathEntry entry;
    entry.lambda = lambda_grid[i];
    entry.model = OklModel{factors, lambda_grid[i], p,      tmpl.jitter,
                           tmpl.kernel,              tmpl.inputs, config.seed, ModelKind::okl};
    entry.report = std::move(report);
    entry.reinitialized = reinit;
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<double> default_lambda_grid(const Matrix& y, int count, double decades) {
  const double lambda_max = y.squaredNorm() / static_cast<double>(y.rows());
  std::vector<double> grid(static_cast<size_t>(count));
  if (count == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  for (int k = 0; k < count; ++k)
    grid[static_cast<size_t>(k)] = lambda_max * std::pow(10.0, -decades * k / (count - 1));
  return grid;
}

Matrix random_full_rank(Index rows, Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = unit(rng);
  return out;
}

std::pair<Matrix, Matrix> recover_CL(const FactorPair& factors) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(factors.B);
  const Matrix b_pinv = cod.pseudoInverse();  // p x m
  return {factors.A * b_pinv, factors.B * factors.B.transpose()};
}

std::pair<Matrix, Matrix> recover_CL(const OklModel& model) { return recover_CL(model.factors); }

Vector predict(const OklModel& model, const InputPoint& x_new) {
  const Index l = static_cast<Index>(model.train_inputs.size());
  Vector kx(l);
  for (Index i = 0; i < l; ++i)
    kx(i) = eval_kernel(model.kernel, x_new, model.train_inputs[static_cast<size_t>(i)]);
  return model.factors.B * (model.factors.A.transpose() * kx);
}

Matrix predict_matrix(const OklModel& model, const std::vector<InputPoint>& inputs) {
  const Matrix kx = cross_gram_matrix(model.kernel, inputs, model.train_inputs);
  return kx * model.factors.A * model.factors.B.transpose();
}

Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++rank;
  return rank;
}

}  // namespace okl
