#include "rwi/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "rwi/init_theory.hpp"
#include "rwi/version.hpp"

namespace rwi {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Failure reasons land in CSV cells; keep them single-column.
std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s.empty() ? "-" : s;
}

void put_opt(json& j, const char* key, const std::optional<double>& v) {
  if (v)
    j[key] = *v;
  else
    j[key] = nullptr;
}

std::optional<double> get_opt(const json& j, const char* key, std::optional<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

static void to_json(json& j, const DatasetSpec& s) {
  j = json{{"source", s.source},   {"examples", s.examples},
           {"dims", s.dims},       {"classes", s.classes},
           {"separation", s.separation}, {"seed", s.seed},
           {"images_path", s.images_path}, {"labels_path", s.labels_path},
           {"take", s.take},       {"autoencoder", s.autoencoder}};
}

static void from_json(const json& j, DatasetSpec& s) {
  s.source = field(j, "source", s.source);
  s.examples = field(j, "examples", s.examples);
  s.dims = field(j, "dims", s.dims);
  s.classes = field(j, "classes", s.classes);
  s.separation = field(j, "separation", s.separation);
  s.seed = field(j, "seed", s.seed);
  s.images_path = field(j, "images_path", s.images_path);
  s.labels_path = field(j, "labels_path", s.labels_path);
  s.take = field(j, "take", s.take);
  s.autoencoder = field(j, "autoencoder", s.autoencoder);
}

static void to_json(json& j, const WalkSpec& s) {
  j = json{{"n", s.n},           {"depth", s.depth},   {"g", s.g},
           {"g_auto", s.g_auto}, {"nonlinearity", s.nonlinearity},
           {"samples", s.samples}, {"mode", s.mode},   {"store_cap", s.store_cap}};
}

static void from_json(const json& j, WalkSpec& s) {
  s.n = field(j, "n", s.n);
  s.depth = field(j, "depth", s.depth);
  s.g = field(j, "g", s.g);
  s.g_auto = field(j, "g_auto", s.g_auto);
  s.nonlinearity = field(j, "nonlinearity", s.nonlinearity);
  s.samples = field(j, "samples", s.samples);
  s.mode = field(j, "mode", s.mode);
  s.store_cap = field(j, "store_cap", s.store_cap);
}

static void to_json(json& j, const TrainSpec& s) {
  j = json{{"widths", s.widths},
           {"p_lim", s.p_lim},
           {"depth", s.depth},
           {"family", s.family},
           {"nonlinearity", s.nonlinearity},
           {"g", s.g},
           {"g_auto", s.g_auto},
           {"lambda_in", s.lambda_in},
           {"lambda_out", s.lambda_out},
           {"d_max", s.d_max},
           {"minibatch", s.minibatch},
           {"epochs", s.epochs},
           {"epoch_decay", s.epoch_decay},
           {"probe_size", s.probe_size},
           {"bias_rate_multiplier", s.bias_rate_multiplier}};
  put_opt(j, "g_first", s.g_first);
  put_opt(j, "g_last", s.g_last);
  put_opt(j, "clip_threshold", s.clip_threshold);
}

static void from_json(const json& j, TrainSpec& s) {
  s.widths = field(j, "widths", s.widths);
  s.p_lim = field(j, "p_lim", s.p_lim);
  s.depth = field(j, "depth", s.depth);
  s.family = field(j, "family", s.family);
  s.nonlinearity = field(j, "nonlinearity", s.nonlinearity);
  s.g = field(j, "g", s.g);
  s.g_auto = field(j, "g_auto", s.g_auto);
  s.g_first = get_opt(j, "g_first", s.g_first);
  s.g_last = get_opt(j, "g_last", s.g_last);
  s.lambda_in = field(j, "lambda_in", s.lambda_in);
  s.lambda_out = field(j, "lambda_out", s.lambda_out);
  s.d_max = field(j, "d_max", s.d_max);
  s.minibatch = field(j, "minibatch", s.minibatch);
  s.epochs = field(j, "epochs", s.epochs);
  s.epoch_decay = field(j, "epoch_decay", s.epoch_decay);
  s.clip_threshold = get_opt(j, "clip_threshold", s.clip_threshold);
  s.probe_size = field(j, "probe_size", s.probe_size);
  s.bias_rate_multiplier = field(j, "bias_rate_multiplier", s.bias_rate_multiplier);
}

static void to_json(json& j, const GSweepSpec& s) {
  j = json{{"g_grid", s.g_grid}, {"depths", s.depths}, {"lambda_values", s.lambda_values}};
}

static void from_json(const json& j, GSweepSpec& s) {
  s.g_grid = field(j, "g_grid", s.g_grid);
  s.depths = field(j, "depths", s.depths);
  s.lambda_values = field(j, "lambda_values", s.lambda_values);
}

static void to_json(json& j, const DepthSweepSpec& s) {
  j = json{{"depths", s.depths}, {"lambda_values", s.lambda_values}, {"g_list", s.g_list}};
}

static void from_json(const json& j, DepthSweepSpec& s) {
  s.depths = field(j, "depths", s.depths);
  s.lambda_values = field(j, "lambda_values", s.lambda_values);
  s.g_list = field(j, "g_list", s.g_list);
}

void to_json(json& j, const ExperimentConfig& cfg) {
  j = json{{"schema_version", cfg.schema_version},
           {"kind", cfg.kind},
           {"seed", cfg.seed},
           {"output_dir", cfg.output_dir},
           {"workers", cfg.workers},
           {"dataset", cfg.dataset},
           {"walk", cfg.walk},
           {"train", cfg.train},
           {"g_sweep", cfg.g_sweep},
           {"depth_sweep", cfg.depth_sweep}};
}

void from_json(const json& j, ExperimentConfig& cfg) {
  cfg.schema_version = field(j, "schema_version", cfg.schema_version);
  if (cfg.schema_version != 1)
    throw std::invalid_argument("unsupported config schema_version " +
                                std::to_string(cfg.schema_version));
  cfg.kind = field(j, "kind", cfg.kind);
  cfg.seed = field(j, "seed", cfg.seed);
  cfg.output_dir = field(j, "output_dir", cfg.output_dir);
  cfg.workers = field(j, "workers", cfg.workers);
  if (j.contains("dataset")) j.at("dataset").get_to(cfg.dataset);
  if (j.contains("walk")) j.at("walk").get_to(cfg.walk);
  if (j.contains("train")) j.at("train").get_to(cfg.train);
  if (j.contains("g_sweep")) j.at("g_sweep").get_to(cfg.g_sweep);
  if (j.contains("depth_sweep")) j.at("depth_sweep").get_to(cfg.depth_sweep);
}

ExperimentConfig parse_config(const std::string& json_text) {
  return json::parse(json_text).get<ExperimentConfig>();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
  return json(cfg).dump(2) + "\n";
}

namespace {

double auto_gain(const std::string& nonlinearity, int n) {
  const Nonlinearity nl = nonlinearity_from_string(nonlinearity);
  switch (nl) {
    case Nonlinearity::Linear: return g_linear(n).g;
    case Nonlinearity::Relu: return g_relu(n).g;
    case Nonlinearity::Tanh: return 1.2;  // middle of the serviceable range
  }
  return 1.0;
}

int dataset_targets_rows(const DatasetSpec& spec) {
  return spec.autoencoder ? spec.dims : spec.classes;
}

std::vector<int> widths_for_depth(const TrainSpec& train, const DatasetSpec& data, int depth) {
  if (!train.widths.empty()) {
    if (static_cast<int>(train.widths.size()) != depth + 1)
      throw std::invalid_argument("explicit widths do not match requested depth");
    return train.widths;
  }
  if (train.p_lim < 1)
    throw std::invalid_argument("train spec needs explicit widths or a parameter budget");
  return size_layers(train.p_lim, depth, data.dims, dataset_targets_rows(data),
                     layer_family_from_string(train.family))
      .widths;
}

}  // namespace

ExperimentConfig resolve_config(const ExperimentConfig& cfg) {
  ExperimentConfig r = cfg;
  if (r.kind != "walk" && r.kind != "g_sweep" && r.kind != "depth_sweep" && r.kind != "train_once")
    throw std::invalid_argument("unknown experiment kind: " + r.kind);
  if (r.workers < 1) r.workers = 1;

  if (r.walk.g_auto) {
    r.walk.g = auto_gain(r.walk.nonlinearity, r.walk.n);
    r.walk.g_auto = false;
  }

  if (r.kind == "train_once") {
    if (r.train.depth == 0 && !r.train.widths.empty())
      r.train.depth = static_cast<int>(r.train.widths.size()) - 1;
    if (r.train.d_max == 0) r.train.d_max = r.train.depth;
    r.train.widths = widths_for_depth(r.train, r.dataset, r.train.depth);
  } else if (r.kind == "g_sweep") {
    if (r.g_sweep.g_grid.empty() || r.g_sweep.depths.empty() || r.g_sweep.lambda_values.empty())
      throw std::invalid_argument("g_sweep needs g_grid, depths and lambda_values");
    if (r.train.d_max == 0)
      r.train.d_max = *std::max_element(r.g_sweep.depths.begin(), r.g_sweep.depths.end());
  } else if (r.kind == "depth_sweep") {
    if (r.depth_sweep.lambda_values.empty())
      r.depth_sweep.lambda_values = {1e-4, 1e-3, 1e-2, 1e-1};  // log-spaced default grid
    if (r.depth_sweep.depths.empty() || r.depth_sweep.g_list.empty())
      throw std::invalid_argument("depth_sweep needs depths and g_list");
    if (r.train.d_max == 0)
      r.train.d_max = *std::max_element(r.depth_sweep.depths.begin(), r.depth_sweep.depths.end());
  }

  if (r.train.g_auto && !r.train.widths.empty()) {
    r.train.g = auto_gain(r.train.nonlinearity, r.train.widths[r.train.widths.size() / 2]);
    r.train.g_auto = false;
  }
  return r;
}

Dataset build_dataset(const DatasetSpec& spec) {
  Dataset raw;
  if (spec.source == "synthetic") {
    raw = synthetic_classification(spec.examples, spec.dims, spec.classes, spec.separation,
                                   spec.seed);
  } else if (spec.source == "idx") {
    raw = load_idx_dataset(spec.images_path, spec.labels_path, spec.classes);
  } else {
    throw std::invalid_argument("unknown dataset source: " + spec.source);
  }
  if (spec.take > 0 && spec.take < raw.examples()) raw = take_prefix(raw, spec.take);
  Dataset normalized = normalize(raw);
  if (spec.autoencoder) normalized = as_autoencoder(normalized);
  return normalized;
}

namespace {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os << content;
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_manifest(const fs::path& dir, const ExperimentConfig& resolved) {
  json j{{"artifact_version", kArtifactVersion},
         {"schema_version", resolved.schema_version},
         {"config", resolved}};
  write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

void parallel_cells(int total, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || total <= 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int n_threads = std::min(workers, total);
  pool.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct CellResult {
  std::string status = "ok";  // ok | diverged | error
  std::string reason;
  long min_error_count = -1;
  double min_error_frac = kNaN;
  double min_objective = kNaN;
  double final_objective = kNaN;
  int best_epoch = -1;
  TrainHistory history;
};

/// One training run; every sweep cell and train_once go through here so a
/// single-cell sweep reproduces train_once exactly.
CellResult run_cell(const Dataset& data, const ExperimentConfig& cfg, double g, int depth,
                    double lambda_in, double lambda_out, std::uint64_t cell_seed,
                    bool keep_history) {
  CellResult result;
  try {
    const TrainSpec& ts = cfg.train;
    const std::vector<int> widths = widths_for_depth(ts, cfg.dataset, depth);
    if (widths.front() != data.dims() || widths.back() != data.targets.rows())
      throw std::invalid_argument("network endpoints do not match dataset dimensions");

    NetworkInit init;
    init.widths = widths;
    init.gain = g;
    init.gain_first = ts.g_first;
    init.gain_last = ts.g_last;
    init.hidden = nonlinearity_from_string(ts.nonlinearity);
    const bool mse = data.objective == Objective::MeanSquaredError;
    init.output = mse ? ActKind::Linear : ActKind::Softmax;
    if (cfg.dataset.autoencoder && layer_family_from_string(ts.family) == LayerFamily::Autoencoder)
      init.linear_hidden_layers = {depth / 2};  // the code layer

    Rng cell_rng(cell_seed);
    NetworkParams params = init_network(init, cell_rng.split(0).seed());

    TrainConfig tc;
    tc.minibatch = ts.minibatch;
    tc.epochs = ts.epochs;
    tc.epoch_decay = ts.epoch_decay;
    tc.clip_threshold = ts.clip_threshold;
    tc.objective = data.objective;
    tc.seed = cell_rng.split(1).seed();
    tc.probe_size = ts.probe_size;
    tc.bias_rate_multiplier = ts.bias_rate_multiplier;

    const LrSchedule schedule = build_schedule(depth, ts.d_max, lambda_in, lambda_out);
    TrainHistory history = train(params, data, schedule, tc);

    result.final_objective = history.final().objective;
    result.min_objective = history.epochs.front().objective;
    for (const auto& e : history.epochs) {
      if (e.objective < result.min_objective) result.min_objective = e.objective;
      if (e.error_count >= 0 &&
          (result.min_error_count < 0 || e.error_count < result.min_error_count)) {
        result.min_error_count = e.error_count;
        result.best_epoch = e.epoch;
      }
    }
    if (result.min_error_count >= 0)
      result.min_error_frac =
          static_cast<double>(result.min_error_count) / static_cast<double>(data.examples());
    if (keep_history) result.history = std::move(history);
  } catch (const DivergenceError& e) {
    result.status = "diverged";
    result.reason = e.what();
  } catch (const std::exception& e) {
    result.status = "error";
    result.reason = e.what();
  }
  return result;
}

std::string history_csv(const TrainHistory& history) {
  std::ostringstream os;
  os << "epoch,objective,train_error_count,probe_mean_ratio\n";
  for (const auto& e : history.epochs)
    os << e.epoch << "," << num(e.objective) << "," << e.error_count << ","
       << num(e.probe_ratio) << "\n";
  return os.str();
}

}  // namespace

RunOutcome run_walk_experiment(const ExperimentConfig& raw) {
  const ExperimentConfig cfg = resolve_config(raw);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_manifest(dir, cfg);

  WalkConfig wc;
  wc.n = cfg.walk.n;
  wc.depth = cfg.walk.depth;
  wc.gain = cfg.walk.g;
  wc.nonlinearity = nonlinearity_from_string(cfg.walk.nonlinearity);
  wc.samples = cfg.walk.samples;
  wc.seed = cfg.seed;
  wc.mode = walk_mode_from_string(cfg.walk.mode);
  wc.store_cap = cfg.walk.store_cap;
  const WalkTrace trace = simulate_walk(wc);

  std::ostringstream trace_os;
  write_trace_csv(trace, trace_os);
  write_file_atomic(dir / "trace.csv", trace_os.str());

  const bool closed_form = wc.nonlinearity != Nonlinearity::Tanh;
  const double step_mean = closed_form ? closed_form_ln_z_stats(wc.nonlinearity, wc.n).mean : kNaN;
  const double step_var_paper =
      closed_form ? closed_form_ln_z_stats(wc.nonlinearity, wc.n).variance : kNaN;
  double step_var_measured = kNaN;
  if (wc.nonlinearity == Nonlinearity::Linear) {
    step_var_measured = ln_z_var_linear_measured(wc.n);
  } else if (wc.nonlinearity == Nonlinearity::Relu) {
    Rng mc(Rng(cfg.seed).split(0x5afe).seed());
    step_var_measured = estimate_ln_z_stats(wc.nonlinearity, wc.n, 100000, mc).variance;
  }
  const double predicted_final_mean =
      closed_form ? wc.depth * (2.0 * std::log(wc.gain) + step_mean) : kNaN;
  const double predicted_g = closed_form
                                 ? (wc.nonlinearity == Nonlinearity::Linear ? g_linear(wc.n).g
                                                                            : g_relu(wc.n).g)
                                 : kNaN;
  const bool has_var = trace.samples >= 2;
  const double slope = wc.depth >= 2 && has_var ? variance_slope(trace) : kNaN;

  std::ostringstream os;
  os << "metric,measured,predicted\n";
  os << "g," << num(wc.gain) << "," << num(predicted_g) << "\n";
  os << "final_mean_lnZ," << num(trace.mean(wc.depth)) << "," << num(predicted_final_mean) << "\n";
  os << "final_mean_lnZ_se," << num(has_var ? trace.mean_se()(wc.depth) : kNaN) << ",nan\n";
  os << "final_var_lnZ," << num(has_var ? trace.var(wc.depth) : kNaN) << ","
     << num(wc.depth * step_var_paper) << "\n";
  os << "variance_slope," << num(slope) << "," << num(step_var_paper) << "\n";
  os << "variance_slope_mc_predicted," << num(slope) << "," << num(step_var_measured) << "\n";
  os << "samples," << trace.samples << ",nan\n";
  os << "resampled_dead," << trace.resampled_dead << ",nan\n";
  write_file_atomic(dir / "summary.csv", os.str());

  RunOutcome outcome;
  outcome.cells_total = 1;
  outcome.files = {"manifest.json", "trace.csv", "summary.csv"};
  return outcome;
}

RunOutcome run_train_once(const ExperimentConfig& raw) {
  const ExperimentConfig cfg = resolve_config(raw);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_manifest(dir, cfg);

  const Dataset data = build_dataset(cfg.dataset);
  const Rng root(cfg.seed);
  const CellResult cell = run_cell(data, cfg, cfg.train.g, cfg.train.depth, cfg.train.lambda_in,
                                   cfg.train.lambda_out, root.split(0).seed(), true);

  RunOutcome outcome;
  outcome.cells_total = 1;
  outcome.files = {"manifest.json", "summary.csv"};
  if (cell.status == "ok") {
    write_file_atomic(dir / "history.csv", history_csv(cell.history));
    outcome.files.push_back("history.csv");
  } else {
    outcome.cells_failed = 1;
  }

  std::ostringstream os;
  os << "metric,value\n";
  os << "status," << cell.status << "\n";
  os << "reason," << csv_safe(cell.reason) << "\n";
  os << "final_objective," << num(cell.final_objective) << "\n";
  os << "min_objective," << num(cell.min_objective) << "\n";
  os << "min_error_count," << cell.min_error_count << "\n";
  os << "min_error_frac," << num(cell.min_error_frac) << "\n";
  os << "best_epoch," << cell.best_epoch << "\n";
  if (cell.status == "ok") {
    os << "initial_probe_ratio," << num(cell.history.initial().probe_ratio) << "\n";
    os << "final_probe_ratio," << num(cell.history.final().probe_ratio) << "\n";
  }
  write_file_atomic(dir / "summary.csv", os.str());
  return outcome;
}

namespace {

struct SweepCell {
  double g;
  int depth;
  double lambda_in;
  double lambda_out;
};

std::string cells_csv(const std::vector<SweepCell>& cells, const std::vector<CellResult>& results,
                      const Rng& root) {
  std::ostringstream os;
  os << "cell,g,depth,lambda_in,lambda_out,seed,status,min_error_count,min_error_frac,"
        "min_objective,final_objective,best_epoch,reason\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto& r = results[i];
    os << i << "," << num(c.g) << "," << c.depth << "," << num(c.lambda_in) << ","
       << num(c.lambda_out) << "," << root.split(i).seed() << "," << r.status << ","
       << r.min_error_count << "," << num(r.min_error_frac) << "," << num(r.min_objective) << ","
       << num(r.final_objective) << "," << r.best_epoch << ","
       << csv_safe(r.reason) << "\n";
  }
  return os.str();
}

// Lower is better; classification ranks by error fraction, MSE by objective.
double rank_key(const CellResult& r) {
  if (r.status != "ok") return std::numeric_limits<double>::infinity();
  return r.min_error_count >= 0 ? r.min_error_frac : r.min_objective;
}

}  // namespace

RunOutcome run_g_sweep(const ExperimentConfig& raw) {
  const ExperimentConfig cfg = resolve_config(raw);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_manifest(dir, cfg);

  const Dataset data = build_dataset(cfg.dataset);
  const auto& sweep = cfg.g_sweep;

  std::vector<SweepCell> cells;
  for (double g : sweep.g_grid)
    for (int depth : sweep.depths)
      for (double lin : sweep.lambda_values)
        for (double lout : sweep.lambda_values) cells.push_back({g, depth, lin, lout});

  const Rng root(cfg.seed);
  std::vector<CellResult> results(cells.size());
  parallel_cells(static_cast<int>(cells.size()), cfg.workers, [&](int i) {
    const auto& c = cells[i];
    results[i] = run_cell(data, cfg, c.g, c.depth, c.lambda_in, c.lambda_out,
                          root.split(static_cast<std::uint64_t>(i)).seed(), false);
  });

  write_file_atomic(dir / "cells.csv", cells_csv(cells, results, root));

  // Per (g, depth): the best cell over the lambda grid.
  std::ostringstream os;
  os << "g,depth,min_error_count,min_error_frac,min_objective,best_lambda_in,best_lambda_out,"
        "failed_cells\n";
  for (double g : sweep.g_grid)
    for (int depth : sweep.depths) {
      double best = std::numeric_limits<double>::infinity();
      const CellResult* best_result = nullptr;
      const SweepCell* best_cell = nullptr;
      int failed = 0;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].g != g || cells[i].depth != depth) continue;
        if (results[i].status != "ok") {
          ++failed;
          continue;
        }
        if (rank_key(results[i]) < best) {
          best = rank_key(results[i]);
          best_result = &results[i];
          best_cell = &cells[i];
        }
      }
      os << num(g) << "," << depth << ",";
      if (best_result) {
        os << best_result->min_error_count << "," << num(best_result->min_error_frac) << ","
           << num(best_result->min_objective) << "," << num(best_cell->lambda_in) << ","
           << num(best_cell->lambda_out);
      } else {
        os << "-1,nan,nan,nan,nan";
      }
      os << "," << failed << "\n";
    }
  write_file_atomic(dir / "summary.csv", os.str());

  RunOutcome outcome;
  outcome.cells_total = static_cast<int>(cells.size());
  for (const auto& r : results)
    if (r.status != "ok") ++outcome.cells_failed;
  outcome.files = {"manifest.json", "cells.csv", "summary.csv"};
  return outcome;
}

RunOutcome run_depth_sweep(const ExperimentConfig& raw) {
  const ExperimentConfig cfg = resolve_config(raw);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_manifest(dir, cfg);

  const Dataset data = build_dataset(cfg.dataset);
  const auto& sweep = cfg.depth_sweep;

  std::vector<SweepCell> cells;
  for (int depth : sweep.depths)
    for (double lin : sweep.lambda_values)
      for (double lout : sweep.lambda_values)
        for (double g : sweep.g_list) cells.push_back({g, depth, lin, lout});

  const Rng root(cfg.seed);
  std::vector<CellResult> results(cells.size());
  parallel_cells(static_cast<int>(cells.size()), cfg.workers, [&](int i) {
    const auto& c = cells[i];
    results[i] = run_cell(data, cfg, c.g, c.depth, c.lambda_in, c.lambda_out,
                          root.split(static_cast<std::uint64_t>(i)).seed(), false);
  });

  write_file_atomic(dir / "cells.csv", cells_csv(cells, results, root));

  // Per (depth, lambda_in, lambda_out): error averaged over the g list.
  std::ostringstream table;
  table << "depth,lambda_in,lambda_out,mean_min_error_frac,mean_min_objective,failed_cells\n";
  for (int depth : sweep.depths)
    for (double lin : sweep.lambda_values)
      for (double lout : sweep.lambda_values) {
        double err_sum = 0.0, obj_sum = 0.0;
        int ok = 0, failed = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
          const auto& c = cells[i];
          if (c.depth != depth || c.lambda_in != lin || c.lambda_out != lout) continue;
          if (results[i].status != "ok") {
            ++failed;
            continue;
          }
          ++ok;
          if (results[i].min_error_count >= 0) err_sum += results[i].min_error_frac;
          obj_sum += results[i].min_objective;
        }
        table << depth << "," << num(lin) << "," << num(lout) << ","
              << num(ok > 0 ? err_sum / ok : kNaN) << "," << num(ok > 0 ? obj_sum / ok : kNaN)
              << "," << failed << "\n";
      }
  write_file_atomic(dir / "table.csv", table.str());

  std::ostringstream os;
  os << "depth,min_error_count,min_error_frac,min_objective,best_lambda_in,best_lambda_out,"
        "best_g,failed_cells\n";
  for (int depth : sweep.depths) {
    double best = std::numeric_limits<double>::infinity();
    const CellResult* best_result = nullptr;
    const SweepCell* best_cell = nullptr;
    int failed = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].depth != depth) continue;
      if (results[i].status != "ok") {
        ++failed;
        continue;
      }
      if (rank_key(results[i]) < best) {
        best = rank_key(results[i]);
        best_result = &results[i];
        best_cell = &cells[i];
      }
    }
    os << depth << ",";
    if (best_result) {
      os << best_result->min_error_count << "," << num(best_result->min_error_frac) << ","
         << num(best_result->min_objective) << "," << num(best_cell->lambda_in) << ","
         << num(best_cell->lambda_out) << "," << num(best_cell->g);
    } else {
      os << "-1,nan,nan,nan,nan,nan";
    }
    os << "," << failed << "\n";
  }
  write_file_atomic(dir / "summary.csv", os.str());

  RunOutcome outcome;
  outcome.cells_total = static_cast<int>(cells.size());
  for (const auto& r : results)
    if (r.status != "ok") ++outcome.cells_failed;
  outcome.files = {"manifest.json", "cells.csv", "table.csv", "summary.csv"};
  return outcome;
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind == "walk") return run_walk_experiment(cfg);
  if (cfg.kind == "train_once") return run_train_once(cfg);
  if (cfg.kind == "g_sweep") return run_g_sweep(cfg);
  if (cfg.kind == "depth_sweep") return run_depth_sweep(cfg);
  throw std::invalid_argument("unknown experiment kind: " + cfg.kind);
}

ExperimentConfig config_from_manifest(const std::string& manifest_path) {
  std::ifstream is(manifest_path);
  if (!is) throw std::runtime_error("cannot open manifest " + manifest_path);
  json j;
  is >> j;
  if (!j.contains("config")) throw std::runtime_error("manifest has no config object");
  return j.at("config").get<ExperimentConfig>();
}

}  // namespace rwi
