#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "okl/kernels.hpp"
#include "okl/types.hpp"

namespace okl {

/// Multi-task dataset: shared inputs, an l x m output matrix with zeros at
/// unobserved entries, and the observation mask. ground_truth carries the
/// noiseless signals for synthetic data.
struct Dataset {
  std::vector<InputPoint> inputs;
  Matrix Y;
  Mask W;
  std::vector<std::string> task_names;
  std::optional<Matrix> ground_truth;

  Index l() const { return Y.rows(); }
  Index m() const { return Y.cols(); }
};

/// Plain-text triplet records `row,col,value` (comma or tab separated,
/// optional single header line, 0-based indices). Dimensions are inferred as
/// max index + 1 unless overridden; inputs default to the scalar row index.
Dataset load_triplets(const std::string& path, Index rows_override = 0, Index cols_override = 0);
void save_triplets(const Dataset& dataset, const std::string& path);

/// Dense numeric table, one matrix row per line, comma separated, with a
/// header row. Used for ground-truth matrices and prediction dumps.
void save_dense_csv(const Matrix& m, const std::string& path);
Matrix load_dense_csv(const std::string& path);

enum class MovieLensFormat { ml100k, ml1m };

/// Ratings + item metadata. Inputs are movies (id + binary genre vector),
/// tasks are users, Y[movie, user] = rating.
Dataset load_movielens(const std::string& ratings_path, const std::string& items_path,
                       MovieLensFormat format);

/// Ratings only, reusing the item list (and hence row indexing and task
/// dimension) of an already-loaded dataset; used to align test ratings with
/// a trained model.
Dataset load_movielens_ratings(const std::string& ratings_path, MovieLensFormat format,
                               const std::vector<InputPoint>& items, Index tasks);

struct SplitFractions {
  double train = 1.0;
  double validation = 0.0;
  double test = 0.0;
};

enum class SplitMode { per_task_random, global_random };

struct SplitResult {
  Dataset train;
  Dataset validation;
  Dataset test;
  std::vector<Index> small_tasks;  // tasks with < 3 observations, kept whole in train
};

/// Partition the observed entries into train/validation/test. per_task_random
/// stratifies within each task; deterministic for a fixed seed.
SplitResult split(const Dataset& dataset, SplitFractions fractions, SplitMode mode, uint64_t seed);

/// Synthetic multi-signal generator: n_latent zero-mean Gaussian processes on
/// [-1,1] with covariance exp(-decay*|x1-x2|) are mixed by uniform [0,1]
/// coefficients into m signals, sampled at n_sampled points drawn without
/// replacement from a uniform grid, and corrupted by per-task Gaussian noise
/// whose std matches the task's empirical signal std divided by snr.
struct SynthConfig {
  Index n_latent = 50;
  Index m = 200;
  Index grid_size = 200;
  Index n_sampled = 100;
  double decay = 10.0;
  double snr = 1.0;  // infinity disables noise
  double train_fraction = 0.7;
  uint64_t seed = 1;
};

struct SynthResult {
  Dataset train;       // per-task train_fraction of the sampled points
  Dataset validation;  // the held-out remainder, for tuning lambda
};

SynthResult synth_gp_generate(const SynthConfig& config);

}  // namespace okl
