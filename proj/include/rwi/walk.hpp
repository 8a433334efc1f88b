#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rwi/init_theory.hpp"

namespace rwi {

/// Abstract mode draws each step ln(g^2) + ln z from the per-step
/// distribution (linear/relu only); network mode back-propagates through a
/// fresh random network per sample.
enum class WalkMode { Abstract, Network };

const char* to_string(WalkMode m);
WalkMode walk_mode_from_string(const std::string& s);

struct WalkConfig {
  int n = 100;
  int depth = 500;
  double gain = 1.0;
  Nonlinearity nonlinearity = Nonlinearity::Linear;
  long samples = 500;
  std::uint64_t seed = 0;
  WalkMode mode = WalkMode::Abstract;
  long store_cap = 1L << 22;  // full trajectories kept while samples*(depth+1) fits
};

/// Ensemble of ln Z trajectories: ln Z at column k is the accumulated
/// log-squared-norm ratio after k backward steps (column 0 is identically 0).
/// `values` holds the full samples x (depth+1) matrix when within the storage
/// cap; mean/var per layer are always present (sample statistics).
struct WalkTrace {
  long samples = 0;
  int depth = 0;
  Matrix values;  // 0x0 when streaming
  Vector mean;
  Vector var;
  long resampled_dead = 0;

  bool stored() const { return values.size() > 0; }
  /// Standard error of the per-layer mean.
  Vector mean_se() const;
  static WalkTrace from_values(const Matrix& values);
};

WalkTrace simulate_walk(const WalkConfig& cfg);

/// Least-squares slope of per-layer variance against layer index.
double variance_slope(const WalkTrace& trace);

struct GridStat {
  double g;
  double mean;  // mean ln(|delta_0| / |delta_D|)
  double se;
};

/// Network-mode mean log-ratio at each gain of an increasing grid, with
/// common random numbers across the grid.
std::vector<GridStat> mean_log_ratio_vs_g(int n, int depth, const std::vector<double>& g_grid,
                                          Nonlinearity nl, int samples, std::uint64_t seed);

/// CSV export: layer, mean_lnZ, var_lnZ, plus per-sample columns when the
/// trace is stored and samples <= 100.
void write_trace_csv(const WalkTrace& trace, std::ostream& os);

}  // namespace rwi
