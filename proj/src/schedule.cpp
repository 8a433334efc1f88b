#include "rwi/schedule.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rwi {

LrSchedule build_schedule(int depth, int d_max, double lambda_in, double lambda_out) {
  if (depth < 1) throw std::invalid_argument("build_schedule: depth must be >= 1");
  if (depth > d_max) throw std::invalid_argument("build_schedule: depth exceeds d_max");
  if (!(lambda_in > 0.0) || !(lambda_out > 0.0))
    throw std::invalid_argument("build_schedule: rates must be > 0");

  LrSchedule s;
  s.d_max = d_max;
  s.lambda_in = lambda_in;
  s.lambda_out = lambda_out;
  s.rates.resize(depth);

  if (lambda_in == lambda_out) {
    s.tau = std::numeric_limits<double>::infinity();
    s.alpha = lambda_out;
    for (double& r : s.rates) r = lambda_out;
    return s;
  }
  if (d_max < 2)
    throw std::invalid_argument("build_schedule: unequal rates need d_max >= 2");

  s.tau = static_cast<double>(d_max - 1) / (std::log(lambda_out) - std::log(lambda_in));
  s.alpha = std::exp(std::log(lambda_in) + static_cast<double>(d_max) / s.tau);
  auto gamma = [&](int k) {
    return s.alpha * std::exp(-static_cast<double>(d_max - k + 1) / s.tau);
  };
  // lambda_{D-j} = gamma_{d_max - j}
  for (int j = 0; j < depth; ++j) s.rates[depth - j - 1] = gamma(d_max - j);
  return s;
}

}  // namespace rwi
