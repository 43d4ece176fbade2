#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "okl/errors.hpp"

namespace okl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Binary observation mask for an l x m output matrix. Stores the set of
/// observed (row, task) positions; acts on matrices as the Hadamard product
/// with the 0/1 matrix W, i.e. as diag(vec(W)) on vectorized matrices.
class Mask {
public:
  Mask() = default;

  /// Empty mask (nothing observed) of the given shape.
  Mask(Index rows, Index cols) : rows_(rows), cols_(cols), rows_of_task_(static_cast<size_t>(cols)) {}

  /// Mask marking every entry as observed.
  static Mask all(Index rows, Index cols) {
    Mask w(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      w.rows_of_task_[static_cast<size_t>(j)].resize(static_cast<size_t>(rows));
      for (Index i = 0; i < rows; ++i) w.rows_of_task_[static_cast<size_t>(j)][static_cast<size_t>(i)] = i;
    }
    w.count_ = rows * cols;
    return w;
  }

  /// Mask from a dense 0/1 matrix (any nonzero entry counts as observed).
  static Mask from_dense(const Matrix& w) {
    Mask out(w.rows(), w.cols());
    for (Index j = 0; j < w.cols(); ++j)
      for (Index i = 0; i < w.rows(); ++i)
        if (w(i, j) != 0.0) out.add(i, j);
    return out;
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index count() const { return count_; }

  /// Mark (i, j) observed. Rows must be added in increasing order per task
  /// or sorted afterwards; loaders always insert in scan order.
  void add(Index i, Index j) {
    rows_of_task_[static_cast<size_t>(j)].push_back(i);
    ++count_;
  }

  const std::vector<Index>& rows_of_task(Index j) const { return rows_of_task_[static_cast<size_t>(j)]; }

  bool contains(Index i, Index j) const {
    const auto& r = rows_of_task_[static_cast<size_t>(j)];
    for (Index k : r)
      if (k == i) return true;
    return false;
  }

  /// W .* M (zero everywhere except observed positions).
  Matrix hadamard(const Matrix& m) const {
    if (m.rows() != rows_ || m.cols() != cols_)
      throw DimensionMismatch("Mask::hadamard: matrix shape does not match mask shape");
    Matrix out = Matrix::Zero(rows_, cols_);
    for (Index j = 0; j < cols_; ++j)
      for (Index i : rows_of_task_[static_cast<size_t>(j)]) out(i, j) = m(i, j);
    return out;
  }

  /// Dense 0/1 representation (small problems and tests).
  Matrix to_dense() const {
    Matrix w = Matrix::Zero(rows_, cols_);
    for (Index j = 0; j < cols_; ++j)
      for (Index i : rows_of_task_[static_cast<size_t>(j)]) w(i, j) = 1.0;
    return w;
  }

  /// Observed positions in (row, task) pairs, task-major order.
  std::vector<std::pair<Index, Index>> entries() const {
    std::vector<std::pair<Index, Index>> out;
    out.reserve(static_cast<size_t>(count_));
    for (Index j = 0; j < cols_; ++j)
      for (Index i : rows_of_task_[static_cast<size_t>(j)]) out.emplace_back(i, j);
    return out;
  }

private:
  Index rows_ = 0;
  Index cols_ = 0;
  Index count_ = 0;
  std::vector<std::vector<Index>> rows_of_task_;
};

/// The thin factors of the low-rank model: A (l x p) holds the kernel
/// expansion coefficients, B (m x p) the task factor with L = B B^T.
struct FactorPair {
  Matrix A;
  Matrix B;
};

}  // namespace okl
