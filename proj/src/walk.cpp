#include "rwi/walk.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace rwi {

const char* to_string(WalkMode m) { return m == WalkMode::Abstract ? "abstract" : "network"; }

WalkMode walk_mode_from_string(const std::string& s) {
  if (s == "abstract") return WalkMode::Abstract;
  if (s == "network") return WalkMode::Network;
  throw std::invalid_argument("unknown walk mode: " + s);
}

Vector WalkTrace::mean_se() const {
  if (samples < 2) return Vector::Zero(mean.size());
  return (var / static_cast<double>(samples)).cwiseSqrt();
}

WalkTrace WalkTrace::from_values(const Matrix& values) {
  WalkTrace t;
  t.samples = values.rows();
  t.depth = static_cast<int>(values.cols()) - 1;
  t.values = values;
  t.mean = values.colwise().mean();
  t.var = Vector::Zero(values.cols());
  if (values.rows() > 1) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double m = t.mean(c);
      t.var(c) = (values.col(c).array() - m).square().sum() / static_cast<double>(values.rows() - 1);
    }
  }
  return t;
}

namespace {

void validate(const WalkConfig& cfg) {
  if (cfg.n < 1 || cfg.depth < 1 || cfg.samples < 1)
    throw std::invalid_argument("simulate_walk: n, depth, samples must be >= 1");
  if (!(cfg.gain > 0.0)) throw std::invalid_argument("simulate_walk: gain must be > 0");
  if (cfg.mode == WalkMode::Abstract && cfg.nonlinearity == Nonlinearity::Tanh)
    throw std::invalid_argument("simulate_walk: abstract mode requires a closed-form step (linear/relu)");
}

std::vector<double> network_walk_path(const WalkConfig& cfg, const Rng& sample_rng,
                                      long& resampled_dead) {
  const std::vector<int> widths(static_cast<std::size_t>(cfg.depth) + 1, cfg.n);
  for (std::uint64_t attempt = 0;; ++attempt) {
    if (attempt == 1000)
      throw std::runtime_error("simulate_walk: 1000 consecutive dead relu walks; width too small");
    Rng attempt_rng = sample_rng.split(attempt);
    NetworkParams params = init_network(widths, cfg.gain, cfg.nonlinearity,
                                        to_act(cfg.nonlinearity), attempt_rng.split(0).seed());
    Rng vectors = attempt_rng.split(1);
    WalkSample sample = backprop_log_norm_walk(params, vectors);
    if (!sample.dead) return std::move(sample.ln_z_path);
    ++resampled_dead;
  }
}

}  // namespace

WalkTrace simulate_walk(const WalkConfig& cfg) {
  validate(cfg);
  const int cols = cfg.depth + 1;
  const bool store = cfg.samples * static_cast<long>(cols) <= cfg.store_cap;

  WalkTrace trace;
  trace.samples = cfg.samples;
  trace.depth = cfg.depth;
  if (store) trace.values.resize(cfg.samples, cols);

  std::vector<RunningMoments> moments(cols);
  const Rng root(cfg.seed);
  const double gain_step = std::log(cfg.gain * cfg.gain);

  std::vector<double> path(cols);
  for (long s = 0; s < cfg.samples; ++s) {
    Rng sample_rng = root.split(static_cast<std::uint64_t>(s));
    if (cfg.mode == WalkMode::Abstract) {
      path[0] = 0.0;
      double acc = 0.0;
      for (int d = 1; d < cols; ++d) {
        acc += gain_step + sample_ln_z(cfg.nonlinearity, cfg.n, sample_rng);
        path[d] = acc;
      }
    } else {
      path = network_walk_path(cfg, sample_rng, trace.resampled_dead);
    }
    for (int d = 0; d < cols; ++d) moments[d].add(path[d]);
    if (store)
      for (int d = 0; d < cols; ++d) trace.values(s, d) = path[d];
  }

  trace.mean.resize(cols);
  trace.var.resize(cols);
  for (int d = 0; d < cols; ++d) {
    trace.mean(d) = moments[d].mean;
    trace.var(d) = moments[d].variance();
  }
  return trace;
}

double variance_slope(const WalkTrace& trace) {
  if (trace.depth < 2) throw std::invalid_argument("variance_slope: need at least 2 layers");
  Vector x(trace.depth + 1);
  for (int d = 0; d <= trace.depth; ++d) x(d) = d;
  return fit_line(x, trace.var).slope;
}

std::vector<GridStat> mean_log_ratio_vs_g(int n, int depth, const std::vector<double>& g_grid,
                                          Nonlinearity nl, int samples, std::uint64_t seed) {
  if (g_grid.empty()) throw std::invalid_argument("mean_log_ratio_vs_g: empty grid");
  for (std::size_t i = 1; i < g_grid.size(); ++i)
    if (g_grid[i] <= g_grid[i - 1])
      throw std::invalid_argument("mean_log_ratio_vs_g: grid must be strictly increasing");

  const Rng root(seed);
  std::vector<GridStat> out;
  out.reserve(g_grid.size());
  for (double g : g_grid) {
    const LogRatioStats s = mean_log_ratio(nl, n, depth, g, samples, root);
    out.push_back({g, s.mean, s.se});
  }
  return out;
}

void write_trace_csv(const WalkTrace& trace, std::ostream& os) {
  os << std::setprecision(17);
  const bool per_sample = trace.stored() && trace.samples <= 100;
  const bool var_defined = trace.samples >= 2;
  os << "layer,mean_lnZ,var_lnZ";
  if (per_sample)
    for (long s = 0; s < trace.samples; ++s) os << ",sample_" << s;
  os << "\n";
  for (int d = 0; d <= trace.depth; ++d) {
    os << d << "," << trace.mean(d) << ",";
    if (var_defined)
      os << trace.var(d);
    else
      os << "nan";
    if (per_sample)
      for (long s = 0; s < trace.samples; ++s) os << "," << trace.values(s, d);
    os << "\n";
  }
}

}  // namespace rwi
