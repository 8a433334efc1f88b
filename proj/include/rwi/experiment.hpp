#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "rwi/idx.hpp"
#include "rwi/sizing.hpp"
#include "rwi/trainer.hpp"
#include "rwi/walk.hpp"

namespace rwi {

struct DatasetSpec {
  std::string source = "synthetic";  // synthetic | idx
  long examples = 1000;
  int dims = 784;
  int classes = 10;
  double separation = 3.0;
  std::uint64_t seed = 1;
  std::string images_path;  // idx source
  std::string labels_path;
  long take = 0;  // keep only the first N examples (0 = all)
  bool autoencoder = false;
};

struct WalkSpec {
  int n = 100;
  int depth = 500;
  double g = 0.0;      // ignored while g_auto
  bool g_auto = true;  // resolve from the closed form (linear/relu) or 1.2 (tanh)
  std::string nonlinearity = "linear";
  long samples = 500;
  std::string mode = "abstract";
  long store_cap = 1L << 22;
};

struct TrainSpec {
  std::vector<int> widths;  // empty: derive from the parameter budget below
  long p_lim = 0;
  int depth = 0;
  std::string family = "constant";
  std::string nonlinearity = "tanh";
  double g = 1.2;
  bool g_auto = false;
  std::optional<double> g_first;
  std::optional<double> g_last;
  double lambda_in = 0.01;
  double lambda_out = 0.01;
  int d_max = 0;  // 0: resolved to the deepest network in the experiment
  int minibatch = 100;
  int epochs = 100;
  double epoch_decay = 0.995;
  std::optional<double> clip_threshold = 100.0;
  int probe_size = 100;
  double bias_rate_multiplier = 1.0;
};

struct GSweepSpec {
  std::vector<double> g_grid;
  std::vector<int> depths;
  std::vector<double> lambda_values;  // cross product gives (lambda_in, lambda_out)
};

struct DepthSweepSpec {
  std::vector<int> depths;
  std::vector<double> lambda_values;
  std::vector<double> g_list;  // errors averaged over these gains
};

struct ExperimentConfig {
  int schema_version = 1;
  std::string kind = "walk";  // walk | g_sweep | depth_sweep | train_once
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int workers = 1;
  DatasetSpec dataset;
  WalkSpec walk;
  TrainSpec train;
  GSweepSpec g_sweep;
  DepthSweepSpec depth_sweep;
};

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_text(const ExperimentConfig& cfg);

/// Fill every derivable field (auto gains, budget-derived widths, d_max) so
/// the manifest pins the run completely. Idempotent.
ExperimentConfig resolve_config(const ExperimentConfig& cfg);

/// Build, reduce and normalize the dataset a config describes.
Dataset build_dataset(const DatasetSpec& spec);

struct RunOutcome {
  int cells_total = 0;
  int cells_failed = 0;
  std::vector<std::string> files;  // paths written, relative to output_dir
};

RunOutcome run_walk_experiment(const ExperimentConfig& cfg);
RunOutcome run_train_once(const ExperimentConfig& cfg);
RunOutcome run_g_sweep(const ExperimentConfig& cfg);
RunOutcome run_depth_sweep(const ExperimentConfig& cfg);

/// Dispatch on cfg.kind.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// The manifest embeds {artifact_version, schema_version, config: <resolved>}
/// and is written first; any run can be regenerated byte-identically from it.
ExperimentConfig config_from_manifest(const std::string& manifest_path);

}  // namespace rwi
