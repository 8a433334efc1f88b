#pragma once

#include <cstdint>
#include <vector>

#include "rwi/network.hpp"

namespace rwi {

/// Per-step statistics of ln z, the squared-norm amplification of one
/// backward step through a width-n layer.
struct LnZStats {
  double mean = 0.0;
  double variance = 0.0;
  int n = 0;
  Nonlinearity nonlinearity = Nonlinearity::Linear;
  bool monte_carlo = false;
  long samples = 0;        // monte-carlo only
  double mean_se = 0.0;    // monte-carlo only
  double var_se = 0.0;     // monte-carlo only
};

struct GainRecommendation {
  double g = 0.0;
  int n = 0;
  Nonlinearity nonlinearity = Nonlinearity::Linear;
  bool empirical = false;  // false: closed form, true: empirical search
};

/// Leading-order mean of ln z for a linear layer: -1/n.
double ln_z_mean_linear(int n);

/// Stated per-step walk variance for a linear layer: 1/(2n). Note the
/// Monte-Carlo per-step variance measures ~2/n (trigamma(n/2)); summary
/// outputs report both. See ln_z_var_linear_measured.
double ln_z_var_linear(int n);

/// The variance the sampler actually exhibits, trigamma(n/2), for side-by-side
/// reporting against ln_z_var_linear.
double ln_z_var_linear_measured(int n);

/// Fitted mean of ln z for a relu layer: -ln 2 - 2.4/(max(n,6) - 2.4).
double ln_z_mean_relu(int n);

/// Fitted variance of ln z for a relu layer: 5/(max(n,6) - 4).
double ln_z_var_relu(int n);

/// Optimal gain for linear layers: exp(1/(2n)).
GainRecommendation g_linear(int n);

/// Optimal gain for relu layers: sqrt(2) * exp(1.2/(max(n,6) - 2.4)).
GainRecommendation g_relu(int n);

LnZStats closed_form_ln_z_stats(Nonlinearity nl, int n);

/// One draw of ln z.
///   linear: ln(chi2_n / n)
///   relu:   M ~ Binomial(n, 1/2) conditioned on M > 0, then ln(chi2_M / n)
///   tanh:   one backward step through a forward-propagated tanh layer at the
///           given gain (no closed form; the draw is gain-dependent, unlike
///           linear/relu which ignore `gain`)
double sample_ln_z(Nonlinearity nl, int n, Rng& rng, double gain = 1.0);

LnZStats estimate_ln_z_stats(Nonlinearity nl, int n, long samples, Rng& rng, double gain = 1.0);

/// Mean over trials of ln(|delta_0| / |delta_D|) from full back-propagation
/// of Gaussian unit-variance delta_D through fresh depth-layer networks of
/// square width n at the given gain (Gaussian h_0 forward-propagated first).
/// Trial streams derive from root.split(trial), so the draws are common
/// random numbers across gains. Dead relu trials are discarded and counted.
struct LogRatioStats {
  double mean = 0.0;
  double se = 0.0;
  long trials_used = 0;
  long discarded = 0;
};

LogRatioStats mean_log_ratio(Nonlinearity nl, int n, int depth, double gain, int trials,
                             const Rng& root);

struct GSearchOptions {
  double g_lo = 1.0;
  double g_hi = 2.0;
  double g_step = 0.05;
  double tolerance = 1e-3;  // final bracket width
};

struct GridEvaluation {
  double g;
  double mean;
  double se;
};

struct OptimalGSearch {
  GainRecommendation best;
  long discarded_trials = 0;
  bool crossing_found = false;
  std::vector<GridEvaluation> evaluations;
};

/// Grid scan (early-stopped at the first sign change of the mean log-ratio,
/// which is increasing in g) followed by bisection. Common random numbers
/// across gains make the objective deterministic for a given root stream.
OptimalGSearch estimate_optimal_g(Nonlinearity nl, int n, int depth, int trials, const Rng& root,
                                  const GSearchOptions& options = {});

}  // namespace rwi
