#include "okl/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace okl {

namespace {

void check_shapes(const Matrix& pred, const Matrix& y, const Mask& w, const char* where) {
  if (pred.rows() != y.rows() || pred.cols() != y.cols())
    throw DimensionMismatch(std::string(where) + ": prediction shape does not match data");
  if (w.rows() != y.rows() || w.cols() != y.cols())
    throw DimensionMismatch(std::string(where) + ": mask shape does not match data");
  if (w.count() == 0) throw EmptyMask(std::string(where) + ": no observed entries");
}

}  // namespace

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::rmse: return "rmse";
    case Metric::mae: return "mae";
    case Metric::nmae: return "nmae";
  }
  return "unknown";
}

Metric metric_from_name(const std::string& name) {
  if (name == "rmse") return Metric::rmse;
  if (name == "mae") return Metric::mae;
  if (name == "nmae") return Metric::nmae;
  throw Error("unknown metric: " + name);
}

double masked_rmse(const Matrix& pred, const Matrix& y, const Mask& w) {
  check_shapes(pred, y, w, "masked_rmse");
  double sum = 0.0;
  for (Index j = 0; j < w.cols(); ++j)
    for (Index i : w.rows_of_task(j)) {
      const double d = pred(i, j) - y(i, j);
      sum += d * d;
    }
  return std::sqrt(sum / static_cast<double>(w.count()));
}

double masked_mae(const Matrix& pred, const Matrix& y, const Mask& w) {
  check_shapes(pred, y, w, "masked_mae");
  double sum = 0.0;
  for (Index j = 0; j < w.cols(); ++j)
    for (Index i : w.rows_of_task(j)) sum += std::abs(pred(i, j) - y(i, j));
  return sum / static_cast<double>(w.count());
}

double masked_nmae(const Matrix& pred, const Matrix& y, const Mask& w, double r_min, double r_max) {
  if (!(r_max > r_min)) throw Error("masked_nmae: rating range must be nonempty");
  return masked_mae(pred, y, w) / (r_max - r_min);
}

double mse_vs_truth(const Matrix& pred, const Matrix& ground_truth, const Mask& eval_mask) {
  if (ground_truth.size() == 0) throw MissingGroundTruth("mse_vs_truth: no ground truth available");
  check_shapes(pred, ground_truth, eval_mask, "mse_vs_truth");
  double sum = 0.0;
  for (Index j = 0; j < eval_mask.cols(); ++j)
    for (Index i : eval_mask.rows_of_task(j)) {
      const double d = pred(i, j) - ground_truth(i, j);
      sum += d * d;
    }
  return sum / static_cast<double>(eval_mask.count());
}

MetricReport evaluate(const Matrix& pred, const Dataset& data, double r_min, double r_max) {
  MetricReport out;
  out.rmse = masked_rmse(pred, data.Y, data.W);
  out.mae = masked_mae(pred, data.Y, data.W);
  out.nmae = out.mae / (r_max - r_min);
  if (data.ground_truth.has_value())
    out.mse_truth = mse_vs_truth(pred, *data.ground_truth, Mask::all(data.l(), data.m()));
  return out;
}

size_t select_lambda_index(const std::vector<double>& metric_values) {
  if (metric_values.empty()) throw EmptyPath("select_lambda: empty path");
  size_t best = 0;
  for (size_t k = 1; k < metric_values.size(); ++k)
    if (metric_values[k] < metric_values[best]) best = k;
  return best;
}

LambdaChoice select_lambda(const std::vector<PathEntry>& path, const Dataset& validation,
                           Metric metric, double r_min, double r_max) {
  if (path.empty()) throw EmptyPath("select_lambda: empty path");
  std::vector<double> values;
  values.reserve(path.size());
  for (const auto& entry : path) {
    const Matrix pred = predict_matrix(entry.model, validation.inputs);
    switch (metric) {
      case Metric::rmse: values.push_back(masked_rmse(pred, validation.Y, validation.W)); break;
      case Metric::mae: values.push_back(masked_mae(pred, validation.Y, validation.W)); break;
      case Metric::nmae:
        values.push_back(masked_nmae(pred, validation.Y, validation.W, r_min, r_max));
        break;
    }
  }
  const size_t best = select_lambda_index(values);
  return {best, path[best].lambda, values[best]};
}

Matrix clip_predictions(Matrix pred, double r_min, double r_max) {
  return pred.cwiseMax(r_min).cwiseMin(r_max);
}

}  // namespace okl
