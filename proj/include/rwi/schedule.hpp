#pragma once

#include <vector>

namespace rwi {

/// Depth-dependent exponential learning-rate schedule.
///
/// With decay tau = (d_max - 1) / (ln lambda_out - ln lambda_in) and scale
/// alpha = exp(ln lambda_in + d_max / tau), the rate ladder is
/// gamma_k = alpha * exp(-(d_max - k + 1) / tau) and a depth-D network takes
/// rates lambda_{D-j} = gamma_{d_max - j}: the output layer always gets
/// lambda_out, and layer 1 gets lambda_in exactly when D = d_max (more when
/// shallower and lambda_in < lambda_out). Equal endpoint rates degenerate to
/// a constant schedule (tau = +inf).
struct LrSchedule {
  int d_max = 0;
  double lambda_in = 0.0;
  double lambda_out = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  std::vector<double> rates;  // rates[d-1] is lambda_d for layers d = 1..D

  int depth() const { return static_cast<int>(rates.size()); }
};

LrSchedule build_schedule(int depth, int d_max, double lambda_in, double lambda_out);

}  // namespace rwi
