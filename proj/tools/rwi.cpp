#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "rwi/experiment.hpp"
#include "rwi/init_theory.hpp"
#include "rwi/version.hpp"

namespace {

struct WalkCliOverrides {
  int n = 0;
  int depth = 0;
  double g = 0.0;
  std::string nonlinearity;
  long samples = 0;
  std::string mode;
};

void apply_walk_overrides(rwi::ExperimentConfig& cfg, const WalkCliOverrides& over) {
  if (over.n > 0) cfg.walk.n = over.n;
  if (over.depth > 0) cfg.walk.depth = over.depth;
  if (over.g > 0.0) {
    cfg.walk.g = over.g;
    cfg.walk.g_auto = false;
  }
  if (!over.nonlinearity.empty()) cfg.walk.nonlinearity = over.nonlinearity;
  if (over.samples > 0) cfg.walk.samples = over.samples;
  if (!over.mode.empty()) cfg.walk.mode = over.mode;
}

struct GradCheckOptions {
  std::vector<int> widths = {5, 4, 3};
  std::string nonlinearity;  // empty: all three
  std::string objective;     // empty: both
  int seeds = 5;
  double tolerance = 1e-6;
};

bool run_gradient_check_cli(const GradCheckOptions& opts) {
  using namespace rwi;
  std::vector<Nonlinearity> nls;
  if (opts.nonlinearity.empty())
    nls = {Nonlinearity::Linear, Nonlinearity::Relu, Nonlinearity::Tanh};
  else
    nls = {nonlinearity_from_string(opts.nonlinearity)};
  std::vector<Objective> objectives;
  if (opts.objective.empty())
    objectives = {Objective::CrossEntropy, Objective::MeanSquaredError};
  else
    objectives = {objective_from_string(opts.objective)};

  bool ok = true;
  for (Nonlinearity nl : nls)
    for (Objective obj : objectives) {
      double worst = 0.0;
      for (int s = 0; s < opts.seeds; ++s) {
        Rng rng(9000 + static_cast<std::uint64_t>(s));
        const ActKind output =
            obj == Objective::CrossEntropy ? ActKind::Softmax : ActKind::Linear;
        NetworkParams params =
            init_network(opts.widths, 1.1, nl, output, rng.split(0).seed());
        Rng data_rng = rng.split(1);
        const Matrix input = gaussian_matrix(params.input_dim(), 3, 1.0, data_rng);
        Matrix targets;
        if (obj == Objective::CrossEntropy) {
          targets = Matrix::Zero(params.output_dim(), 3);
          for (int j = 0; j < 3; ++j)
            targets(static_cast<int>(data_rng.next_u64() %
                                     static_cast<std::uint64_t>(params.output_dim())),
                    j) = 1.0;
        } else {
          targets = gaussian_matrix(params.output_dim(), 3, 1.0, data_rng);
        }
        worst = std::max(worst, gradient_check(params, input, targets, obj));
      }
      const bool pass = worst < opts.tolerance;
      ok = ok && pass;
      std::printf("%-4s %-14s max_rel_error=%.3e  %s\n", to_string(nl), to_string(obj), worst,
                  pass ? "ok" : "FAIL");
    }
  return ok;
}

// Exit codes: 0 all cells completed, 2 some cells failed (reasons recorded in
// the output CSVs), 1 hard error.
constexpr int kExitOk = 0;
constexpr int kExitHardError = 1;
constexpr int kExitCellsFailed = 2;

struct CommonOpts {
  std::string config_path;
  std::string output_dir;
  std::string manifest_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_path, "JSON experiment config");
  cmd->add_option("--from-manifest", opts.manifest_path,
                  "re-run the exact configuration recorded in a manifest.json");
  cmd->add_option("-o,--out", opts.output_dir, "output directory (overrides config)");
  cmd->add_option("-s,--seed", opts.seed, "seed override")->each([&](const std::string&) {
    opts.seed_set = true;
  });
  cmd->add_option("-w,--workers", opts.workers, "parallel sweep workers (overrides config)");
}

rwi::ExperimentConfig assemble(const CommonOpts& opts, const std::string& kind) {
  rwi::ExperimentConfig cfg;
  if (!opts.manifest_path.empty()) {
    cfg = rwi::config_from_manifest(opts.manifest_path);
  } else if (!opts.config_path.empty()) {
    cfg = rwi::load_config(opts.config_path);
  }
  cfg.kind = kind;
  if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
  if (opts.seed_set) cfg.seed = opts.seed;
  if (opts.workers > 0) cfg.workers = opts.workers;
  return cfg;
}

int finish(const rwi::RunOutcome& outcome, const std::string& out_dir) {
  std::printf("%d/%d cells completed", outcome.cells_total - outcome.cells_failed,
              outcome.cells_total);
  std::printf("; wrote");
  for (const auto& f : outcome.files) std::printf(" %s/%s", out_dir.c_str(), f.c_str());
  std::printf("\n");
  return outcome.cells_failed > 0 ? kExitCellsFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-walk-initialization experiment runner"};
  app.set_version_flag("--version", rwi::kArtifactVersion);
  app.require_subcommand(1);

  CommonOpts walk_opts, gsweep_opts, dsweep_opts, train_opts;
  auto* walk = app.add_subcommand("walk", "simulate gradient-norm random walks");
  add_common(walk, walk_opts);
  WalkCliOverrides walk_over;
  walk->add_option("-n,--width", walk_over.n, "layer width");
  walk->add_option("-d,--depth", walk_over.depth, "network depth");
  walk->add_option("-g,--gain", walk_over.g, "gain (omit for the closed-form optimum)");
  walk->add_option("--nonlinearity", walk_over.nonlinearity, "linear|relu|tanh");
  walk->add_option("--samples", walk_over.samples, "trajectories");
  walk->add_option("--mode", walk_over.mode, "abstract|network");

  auto* gsweep = app.add_subcommand("g-sweep", "training error across a gain grid");
  add_common(gsweep, gsweep_opts);
  auto* dsweep = app.add_subcommand("depth-sweep", "training error across depths");
  add_common(dsweep, dsweep_opts);
  auto* train = app.add_subcommand("train-once", "single training run");
  add_common(train, train_opts);

  auto* gradcheck = app.add_subcommand("gradient-check",
                                       "finite-difference validation of the backward pass");
  GradCheckOptions gc;
  gradcheck->add_option("--widths", gc.widths, "layer widths (default 5 4 3)");
  gradcheck->add_option("--nonlinearity", gc.nonlinearity, "linear|relu|tanh (default: all)");
  gradcheck->add_option("--objective", gc.objective, "cross_entropy|mse (default: both)");
  gradcheck->add_option("--seeds", gc.seeds, "number of random seeds (default 5)");
  gradcheck->add_option("--tolerance", gc.tolerance, "max relative error (default 1e-6)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*walk) {
      auto cfg = assemble(walk_opts, "walk");
      apply_walk_overrides(cfg, walk_over);
      return finish(rwi::run_walk_experiment(cfg), cfg.output_dir);
    }
    if (*gsweep) {
      auto cfg = assemble(gsweep_opts, "g_sweep");
      return finish(rwi::run_g_sweep(cfg), cfg.output_dir);
    }
    if (*dsweep) {
      auto cfg = assemble(dsweep_opts, "depth_sweep");
      return finish(rwi::run_depth_sweep(cfg), cfg.output_dir);
    }
    if (*train) {
      auto cfg = assemble(train_opts, "train_once");
      return finish(rwi::run_train_once(cfg), cfg.output_dir);
    }
    if (*gradcheck) return run_gradient_check_cli(gc) ? kExitOk : kExitCellsFailed;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitHardError;
  }
  return kExitHardError;
}
