#pragma once

#include <Eigen/Dense>

#include "rwi/rng.hpp"

namespace rwi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Matrix with i.i.d. zero-mean Gaussian entries of the given variance.
/// Entries are drawn in column-major order from the stream.
Matrix gaussian_matrix(int rows, int cols, double variance, Rng& rng);

/// Vector of i.i.d. zero-mean Gaussian entries of the given variance.
Vector gaussian_vector(int size, double variance, Rng& rng);

/// m * v with an explicit dimension check (std::invalid_argument on mismatch).
Vector matvec(const Matrix& m, const Vector& v);

bool all_finite(const Matrix& m);

/// Streaming mean/variance accumulator (Welford), mergeable in a fixed order.
struct RunningMoments {
  long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const RunningMoments& other);
  double variance() const;       // sample variance (n-1)
  double std_error() const;      // SE of the mean
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of y against x.
LineFit fit_line(const Vector& x, const Vector& y);

}  // namespace rwi
