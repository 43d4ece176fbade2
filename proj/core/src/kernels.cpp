#include "okl/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "okl/errors.hpp"

namespace okl {

namespace {

double require_time(const InputPoint& x, const char* variant) {
  const double* t = std::get_if<double>(&x);
  if (t == nullptr)
    throw IncompatibleInput(std::string(variant) + ": expected a scalar time input");
  if (*t < 0.0) throw NegativeTime(std::string(variant) + ": time must be nonnegative");
  return *t;
}

double require_scalar(const InputPoint& x, const char* variant) {
  const double* v = std::get_if<double>(&x);
  if (v == nullptr)
    throw IncompatibleInput(std::string(variant) + ": expected a scalar input");
  return *v;
}

const ItemPoint& require_item(const InputPoint& x, const char* variant) {
  const ItemPoint* it = std::get_if<ItemPoint>(&x);
  if (it == nullptr)
    throw IncompatibleInput(std::string(variant) + ": expected an (id, genres) input");
  return *it;
}

// Cubic spline kernel on [0, inf): x1*x2*min/2 - min^3/3.
double cubic_spline(double x1, double x2) {
  const double mn = std::min(x1, x2);
  return x1 * x2 * mn / 2.0 - mn * mn * mn / 3.0;
}

double normalized_hamming(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  if (a.size() != b.size())
    throw IncompatibleInput("id_plus_genre: genre vectors have different lengths");
  if (a.empty()) return 0.0;
  size_t diff = 0;
  for (size_t i = 0; i < a.size(); ++i) diff += (a[i] != b[i]) ? 1 : 0;
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

}  // namespace

const char* kernel_variant_name(KernelVariant v) {
  switch (v) {
    case KernelVariant::kronecker_delta: return "kronecker_delta";
    case KernelVariant::linear_spline: return "linear_spline";
    case KernelVariant::pkpd_composite: return "pkpd_composite";
    case KernelVariant::exp_covariance: return "exp_covariance";
    case KernelVariant::id_plus_genre: return "id_plus_genre";
  }
  return "unknown";
}

KernelVariant kernel_variant_from_name(const std::string& name) {
  if (name == "kronecker_delta") return KernelVariant::kronecker_delta;
  if (name == "linear_spline") return KernelVariant::linear_spline;
  if (name == "pkpd_composite") return KernelVariant::pkpd_composite;
  if (name == "exp_covariance") return KernelVariant::exp_covariance;
  if (name == "id_plus_genre") return KernelVariant::id_plus_genre;
  throw IncompatibleInput("unknown kernel variant: " + name);
}

double eval_kernel(const KernelSpec& spec, const InputPoint& x1, const InputPoint& x2) {
  switch (spec.variant) {
    case KernelVariant::kronecker_delta: {
      // On item inputs the id decides identity; on scalars, exact equality.
      if (std::holds_alternative<ItemPoint>(x1) || std::holds_alternative<ItemPoint>(x2))
        return require_item(x1, "kronecker_delta").id == require_item(x2, "kronecker_delta").id ? 1.0 : 0.0;
      return require_scalar(x1, "kronecker_delta") == require_scalar(x2, "kronecker_delta") ? 1.0 : 0.0;
    }
    case KernelVariant::linear_spline: {
      const double t1 = require_time(x1, "linear_spline");
      const double t2 = require_time(x2, "linear_spline");
      return 1.0 + std::min(t1, t2);
    }
    case KernelVariant::pkpd_composite: {
      const double t1 = require_time(x1, "pkpd_composite");
      const double t2 = require_time(x2, "pkpd_composite");
      // h(t) = 1/(1+t) maps [0,inf) into (0,1]; the t1*t2 factor enforces a
      // zero initial condition.
      const double h1 = 1.0 / (1.0 + t1);
      const double h2 = 1.0 / (1.0 + t2);
      return t1 * t2 * cubic_spline(h1, h2);
    }
    case KernelVariant::exp_covariance: {
      if (!(spec.decay > 0.0)) throw IncompatibleInput("exp_covariance: decay must be positive");
      const double a = require_scalar(x1, "exp_covariance");
      const double b = require_scalar(x2, "exp_covariance");
      return std::exp(-spec.decay * std::abs(a - b));
    }
    case KernelVariant::id_plus_genre: {
      const ItemPoint& a = require_item(x1, "id_plus_genre");
      const ItemPoint& b = require_item(x2, "id_plus_genre");
      const double delta = (a.id == b.id) ? 1.0 : 0.0;
      return delta + std::exp(-normalized_hamming(a.genres, b.genres));
    }
  }
  throw IncompatibleInput("eval_kernel: unknown kernel variant");
}

Matrix gram_matrix(const KernelSpec& spec, const std::vector<InputPoint>& inputs) {
  if (inputs.empty()) throw IncompatibleInput("gram_matrix: empty input list");
  const Index n = static_cast<Index>(inputs.size());
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      const double v = eval_kernel(spec, inputs[static_cast<size_t>(i)], inputs[static_cast<size_t>(j)]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Matrix cross_gram_matrix(const KernelSpec& spec, const std::vector<InputPoint>& rows,
                         const std::vector<InputPoint>& cols) {
  Matrix k(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (Index i = 0; i < k.rows(); ++i)
    for (Index j = 0; j < k.cols(); ++j)
      k(i, j) = eval_kernel(spec, rows[static_cast<size_t>(i)], cols[static_cast<size_t>(j)]);
  return k;
}

}  // namespace okl
