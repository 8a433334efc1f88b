#include "rwi/numeric.hpp"

#include <cmath>
#include <stdexcept>

namespace rwi {

Matrix gaussian_matrix(int rows, int cols, double variance, Rng& rng) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("gaussian_matrix: dimensions must be >= 1");
  if (!(variance > 0.0)) throw std::invalid_argument("gaussian_matrix: variance must be > 0");
  const double sd = std::sqrt(variance);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = sd * rng.gaussian();
  return m;
}

Vector gaussian_vector(int size, double variance, Rng& rng) {
  if (size < 1) throw std::invalid_argument("gaussian_vector: size must be >= 1");
  if (!(variance > 0.0)) throw std::invalid_argument("gaussian_vector: variance must be > 0");
  const double sd = std::sqrt(variance);
  Vector v(size);
  for (int i = 0; i < size; ++i) v(i) = sd * rng.gaussian();
  return v;
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) throw std::invalid_argument("matvec: dimension mismatch");
  return m * v;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

void RunningMoments::add(double x) {
  ++count;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void RunningMoments::merge(const RunningMoments& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count);
  const double nb = static_cast<double>(other.count);
  const double delta = other.mean - mean;
  const double total = na + nb;
  mean += delta * nb / total;
  m2 += other.m2 + delta * delta * na * nb / total;
  count += other.count;
}

double RunningMoments::variance() const {
  return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
}

double RunningMoments::std_error() const {
  return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
}

LineFit fit_line(const Vector& x, const Vector& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need two equal-length series of size >= 2");
  const double xm = x.mean();
  const double ym = y.mean();
  const Vector xc = x.array() - xm;
  const Vector yc = y.array() - ym;
  const double sxx = xc.squaredNorm();
  if (sxx == 0.0) throw std::invalid_argument("fit_line: x has no variation");
  LineFit fit;
  fit.slope = xc.dot(yc) / sxx;
  fit.intercept = ym - fit.slope * xm;
  const double syy = yc.squaredNorm();
  if (syy == 0.0) {
    fit.r_squared = 1.0;  // constant y, exactly fit by slope 0
  } else {
    const Vector resid = yc - fit.slope * xc;
    fit.r_squared = 1.0 - resid.squaredNorm() / syy;
  }
  return fit;
}

}  // namespace rwi
