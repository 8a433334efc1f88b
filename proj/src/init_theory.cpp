#include "rwi/init_theory.hpp"

#include <cmath>
#include <stdexcept>

namespace rwi {

namespace {

void require_width(int n) {
  if (n < 1) throw std::invalid_argument("layer width must be >= 1");
}

// Trigamma via the standard recurrence + asymptotic series.
double trigamma(double x) {
  double acc = 0.0;
  while (x < 6.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return acc + inv * (1.0 + 0.5 * inv + inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 / 42.0)));
}

}  // namespace

double ln_z_mean_linear(int n) {
  require_width(n);
  return -1.0 / static_cast<double>(n);
}

double ln_z_var_linear(int n) {
  require_width(n);
  return 1.0 / (2.0 * static_cast<double>(n));
}

double ln_z_var_linear_measured(int n) {
  require_width(n);
  return trigamma(0.5 * static_cast<double>(n));
}

double ln_z_mean_relu(int n) {
  require_width(n);
  const double m = static_cast<double>(std::max(n, 6));
  return -std::log(2.0) - 2.4 / (m - 2.4);
}

double ln_z_var_relu(int n) {
  require_width(n);
  const double m = static_cast<double>(std::max(n, 6));
  return 5.0 / (m - 4.0);
}

GainRecommendation g_linear(int n) {
  require_width(n);
  return {std::exp(1.0 / (2.0 * static_cast<double>(n))), n, Nonlinearity::Linear, false};
}

GainRecommendation g_relu(int n) {
  require_width(n);
  const double m = static_cast<double>(std::max(n, 6));
  return {std::sqrt(2.0) * std::exp(1.2 / (m - 2.4)), n, Nonlinearity::Relu, false};
}

LnZStats closed_form_ln_z_stats(Nonlinearity nl, int n) {
  LnZStats s;
  s.n = n;
  s.nonlinearity = nl;
  switch (nl) {
    case Nonlinearity::Linear:
      s.mean = ln_z_mean_linear(n);
      s.variance = ln_z_var_linear(n);
      return s;
    case Nonlinearity::Relu:
      s.mean = ln_z_mean_relu(n);
      s.variance = ln_z_var_relu(n);
      return s;
    case Nonlinearity::Tanh:
      throw std::invalid_argument("closed_form_ln_z_stats: tanh has no closed form");
  }
  throw std::logic_error("closed_form_ln_z_stats: bad nonlinearity");
}

namespace {

double sample_ln_z_tanh(int n, Rng& rng, double gain) {
  // One backward step through one forward-propagated layer: a = g W h0 with
  // h0 Gaussian unit variance, then z = |f'(a) .* (W^T u)|^2 for a random
  // unit vector u.
  Matrix w = gaussian_matrix(n, n, 1.0 / n, rng);
  Vector h0 = gaussian_vector(n, 1.0, rng);
  Vector a = gain * (w * h0);
  Vector factors = act_derivative(ActKind::Tanh, a);
  Vector u = gaussian_vector(n, 1.0, rng);
  u /= u.norm();
  const Vector step = factors.cwiseProduct(w.transpose() * u);
  return std::log(step.squaredNorm());
}

}  // namespace

double sample_ln_z(Nonlinearity nl, int n, Rng& rng, double gain) {
  require_width(n);
  switch (nl) {
    case Nonlinearity::Linear:
      return std::log(sample_chi_square(n, rng) / static_cast<double>(n));
    case Nonlinearity::Relu: {
      int m = 0;
      do {
        m = sample_binomial(n, 0.5, rng);
      } while (m == 0);
      return std::log(sample_chi_square(m, rng) / static_cast<double>(n));
    }
    case Nonlinearity::Tanh:
      return sample_ln_z_tanh(n, rng, gain);
  }
  throw std::logic_error("sample_ln_z: bad nonlinearity");
}

LnZStats estimate_ln_z_stats(Nonlinearity nl, int n, long samples, Rng& rng, double gain) {
  if (samples < 2) throw std::invalid_argument("estimate_ln_z_stats: need >= 2 samples");
  RunningMoments mom;
  for (long i = 0; i < samples; ++i) mom.add(sample_ln_z(nl, n, rng, gain));
  LnZStats s;
  s.n = n;
  s.nonlinearity = nl;
  s.monte_carlo = true;
  s.samples = samples;
  s.mean = mom.mean;
  s.variance = mom.variance();
  s.mean_se = mom.std_error();
  // Normal-theory standard error of the sample variance.
  s.var_se = s.variance * std::sqrt(2.0 / static_cast<double>(samples - 1));
  return s;
}

LogRatioStats mean_log_ratio(Nonlinearity nl, int n, int depth, double gain, int trials,
                             const Rng& root) {
  require_width(n);
  if (depth < 1) throw std::invalid_argument("mean_log_ratio: depth must be >= 1");
  if (trials < 1) throw std::invalid_argument("mean_log_ratio: trials must be >= 1");

  const std::vector<int> widths(static_cast<std::size_t>(depth) + 1, n);
  RunningMoments mom;
  long discarded = 0;
  for (int t = 0; t < trials; ++t) {
    Rng trial = root.split(static_cast<std::uint64_t>(t));
    NetworkParams params =
        init_network(widths, gain, nl, to_act(nl), trial.split(0).seed());
    Rng vectors = trial.split(1);
    const WalkSample sample = backprop_log_norm_walk(params, vectors);
    if (sample.dead) {
      ++discarded;
      continue;
    }
    mom.add(0.5 * sample.ln_z_path.back());  // ln of the norm ratio, not squared
  }
  LogRatioStats stats;
  stats.trials_used = mom.count;
  stats.discarded = discarded;
  if (mom.count > 0) {
    stats.mean = mom.mean;
    stats.se = mom.std_error();
  }
  return stats;
}

OptimalGSearch estimate_optimal_g(Nonlinearity nl, int n, int depth, int trials, const Rng& root,
                                  const GSearchOptions& options) {
  OptimalGSearch result;
  result.best.n = n;
  result.best.nonlinearity = nl;
  result.best.empirical = true;

  auto evaluate = [&](double g) {
    const LogRatioStats s = mean_log_ratio(nl, n, depth, g, trials, root);
    result.discarded_trials += s.discarded;
    result.evaluations.push_back({g, s.mean, s.se});
    return s.mean;
  };

  // Scan the grid in order; the mean log-ratio is increasing in g, so the
  // first sign change brackets the crossing.
  double lo = options.g_lo;
  double f_lo = evaluate(lo);
  if (f_lo >= 0.0) {
    result.best.g = lo;
    return result;
  }
  double hi = lo;
  double f_hi = f_lo;
  bool bracketed = false;
  for (double g = lo + options.g_step; g <= options.g_hi + 1e-12; g += options.g_step) {
    hi = g;
    f_hi = evaluate(g);
    if (f_hi >= 0.0) {
      bracketed = true;
      break;
    }
    lo = g;
    f_lo = f_hi;
  }
  if (!bracketed) {
    result.best.g = hi;  // never crossed within the grid
    return result;
  }

  while (hi - lo > options.tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = evaluate(mid);
    if (f_mid >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  result.crossing_found = true;
  result.best.g = 0.5 * (lo + hi);
  return result;
}

}  // namespace rwi
