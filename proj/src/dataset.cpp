#include "rwi/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace rwi {

Dataset normalize(const Dataset& d) {
  if (d.examples() < 2) throw std::invalid_argument("normalize: need >= 2 examples");
  Dataset out = d;
  const double m = static_cast<double>(d.examples());
  out.norm_mean = d.inputs.rowwise().mean();
  Vector var = (d.inputs.colwise() - out.norm_mean).array().square().rowwise().sum() / m;
  out.norm_std = var.cwiseSqrt();
  for (Eigen::Index i = 0; i < out.norm_std.size(); ++i)
    if (out.norm_std(i) < 1e-12) out.norm_std(i) = 1.0;  // constant dimension -> all zeros
  out.inputs = apply_normalization(d.inputs, out.norm_mean, out.norm_std);
  if (d.objective == Objective::MeanSquaredError && d.targets.rows() == d.inputs.rows() &&
      d.targets == d.inputs) {
    out.targets = out.inputs;  // reconstruction targets follow their inputs
  }
  return out;
}

Matrix apply_normalization(const Matrix& inputs, const Vector& mean, const Vector& std) {
  if (inputs.rows() != mean.size() || inputs.rows() != std.size())
    throw std::invalid_argument("apply_normalization: dimension mismatch");
  return ((inputs.colwise() - mean).array().colwise() / std.array()).matrix();
}

Dataset synthetic_classification(long n_examples, int dims, int classes, double separation,
                                 std::uint64_t seed) {
  if (classes < 2) throw std::invalid_argument("synthetic_classification: classes must be >= 2");
  if (n_examples < 1 || dims < 1)
    throw std::invalid_argument("synthetic_classification: examples and dims must be >= 1");
  if (separation < 0.0) throw std::invalid_argument("synthetic_classification: separation < 0");

  Rng rng(seed);
  Rng mean_rng = rng.split(0);
  Matrix class_means(dims, classes);
  for (int c = 0; c < classes; ++c) {
    Vector dir = gaussian_vector(dims, 1.0, mean_rng);
    const double norm = dir.norm();
    class_means.col(c) = norm > 0.0 ? Vector((separation / norm) * dir) : Vector::Zero(dims);
  }

  Dataset d;
  d.objective = Objective::CrossEntropy;
  d.inputs.resize(dims, n_examples);
  d.targets = Matrix::Zero(classes, n_examples);
  Rng noise_rng = rng.split(1);
  for (long i = 0; i < n_examples; ++i) {
    const int c = static_cast<int>(i % classes);  // balanced round-robin
    d.inputs.col(i) = class_means.col(c) + gaussian_vector(dims, 1.0, noise_rng);
    d.targets(c, i) = 1.0;
  }
  return d;
}

Dataset as_autoencoder(const Dataset& d) {
  Dataset out = d;
  out.targets = d.inputs;
  out.objective = Objective::MeanSquaredError;
  return out;
}

Dataset take_prefix(const Dataset& d, long count) {
  if (count < 1 || count > d.examples())
    throw std::invalid_argument("take_prefix: count out of range");
  Dataset out = d;
  out.inputs = d.inputs.leftCols(count);
  out.targets = d.targets.leftCols(count);
  return out;
}

long classification_errors(const NetworkParams& params, const Dataset& d) {
  const ForwardTrace t = forward(params, d.inputs);
  const Matrix& out = t.output();
  long errors = 0;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    Eigen::Index predicted, actual;
    out.col(j).maxCoeff(&predicted);
    d.targets.col(j).maxCoeff(&actual);
    if (predicted != actual) ++errors;
  }
  return errors;
}

}  // namespace rwi
