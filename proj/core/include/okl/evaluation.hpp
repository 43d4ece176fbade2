#pragma once

#include <optional>
#include <string>
#include <vector>

#include "okl/data.hpp"
#include "okl/solver.hpp"

namespace okl {

enum class Metric { rmse, mae, nmae };
const char* metric_name(Metric m);
Metric metric_from_name(const std::string& name);

struct MetricReport {
  double rmse = 0.0;
  double mae = 0.0;
  double nmae = 0.0;
  std::optional<double> mse_truth;
};

/// Errors are accumulated over observed entries only.
double masked_rmse(const Matrix& pred, const Matrix& y, const Mask& w);
double masked_mae(const Matrix& pred, const Matrix& y, const Mask& w);
/// nmae = mae / (r_max - r_min); 0.25 * mae for ratings in [1, 5].
double masked_nmae(const Matrix& pred, const Matrix& y, const Mask& w, double r_min, double r_max);

/// Mean squared difference against a noiseless reference over eval_mask.
double mse_vs_truth(const Matrix& pred, const Matrix& ground_truth, const Mask& eval_mask);

MetricReport evaluate(const Matrix& pred, const Dataset& data, double r_min = 1.0,
                      double r_max = 5.0);

/// Index of the grid entry minimizing the metric values; ties break toward
/// the earlier entry, i.e. toward larger lambda on a descending grid.
size_t select_lambda_index(const std::vector<double>& metric_values);

struct LambdaChoice {
  size_t index = 0;
  double lambda = 0.0;
  double value = 0.0;
};

/// Validation-error minimizer over a fitted path. The validation set must
/// share the training inputs.
LambdaChoice select_lambda(const std::vector<PathEntry>& path, const Dataset& validation,
                           Metric metric, double r_min = 1.0, double r_max = 5.0);

/// Clamp predictions into [r_min, r_max] (optional for rating data).
Matrix clip_predictions(Matrix pred, double r_min, double r_max);

}  // namespace okl
