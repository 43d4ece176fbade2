#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "okl/types.hpp"

namespace okl {

/// Rated-item input: an integer id plus a binary attribute vector (movie
/// genres for the collaborative filtering data).
struct ItemPoint {
  int64_t id = 0;
  std::vector<uint8_t> genres;

  bool operator==(const ItemPoint& other) const = default;
};

/// Shared input space point: a real scalar (time/position tasks) or an item.
using InputPoint = std::variant<double, ItemPoint>;

enum class KernelVariant {
  kronecker_delta,   // 1 if the points coincide, 0 otherwise
  linear_spline,     // 1 + min(t1, t2), piece-wise linear profiles
  pkpd_composite,    // t1*t2*W(h(t1),h(t2)) with the cubic spline kernel W
  exp_covariance,    // exp(-decay * |x1 - x2|)
  id_plus_genre,     // delta on ids + exp(-normalized Hamming on genres)
};

/// Declarative input-kernel description. The metadata table (item id ->
/// genre vector) is only needed when inputs arrive as bare ids.
struct KernelSpec {
  KernelVariant variant = KernelVariant::kronecker_delta;
  double decay = 10.0;  // exp_covariance only, must be > 0
  std::optional<std::map<int64_t, std::vector<uint8_t>>> metadata;
};

const char* kernel_variant_name(KernelVariant v);
KernelVariant kernel_variant_from_name(const std::string& name);

double eval_kernel(const KernelSpec& spec, const InputPoint& x1, const InputPoint& x2);

/// Gram matrix K_ij = K(x_i, x_j); symmetric PSD up to roundoff.
Matrix gram_matrix(const KernelSpec& spec, const std::vector<InputPoint>& inputs);

/// Cross-Gram k(x_i, z_j) between two input lists (prediction path).
Matrix cross_gram_matrix(const KernelSpec& spec, const std::vector<InputPoint>& rows,
                         const std::vector<InputPoint>& cols);

}  // namespace okl
