#pragma once

#include <cstdint>

#include "rwi/network.hpp"

namespace rwi {

/// Columns are examples. Targets are one-hot class columns (cross-entropy)
/// or reconstruction columns (MSE). norm_mean/norm_std record the
/// standardization applied to the inputs (population std, clamped to 1 for
/// constant dimensions) so the same transform can be applied to other splits.
struct Dataset {
  Matrix inputs;   // dims x examples
  Matrix targets;  // classes x examples or dims x examples
  Vector norm_mean;
  Vector norm_std;
  Objective objective = Objective::CrossEntropy;

  long examples() const { return inputs.cols(); }
  int dims() const { return static_cast<int>(inputs.rows()); }
  bool normalized() const { return norm_mean.size() > 0; }
};

/// Standardize each input dimension to zero mean, unit (population) variance.
/// Constant dimensions map to 0 with the stored std clamped to 1. Requires
/// >= 2 examples.
Dataset normalize(const Dataset& d);

/// Apply previously fitted statistics to another split.
Matrix apply_normalization(const Matrix& inputs, const Vector& mean, const Vector& std);

/// Balanced Gaussian class clusters: class means are drawn on a sphere of
/// radius `separation`, examples are mean + unit Gaussian noise. separation 0
/// makes the classes indistinguishable.
Dataset synthetic_classification(long n_examples, int dims, int classes, double separation,
                                 std::uint64_t seed);

/// Reconstruction variant: targets become the (normalized) inputs, objective MSE.
Dataset as_autoencoder(const Dataset& d);

/// Keep only the first `count` examples.
Dataset take_prefix(const Dataset& d, long count);

long classification_errors(const NetworkParams& params, const Dataset& d);

}  // namespace rwi
