// Acceptance suite: runs numbered end-to-end checks and prints one PASS/FAIL
// line per check. Usage: acceptance [numbers...] (no arguments runs all).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rwi/experiment.hpp"
#include "rwi/init_theory.hpp"

using namespace rwi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool condition, const std::string& label) {
    pass = pass && condition;
    if (!detail.empty()) detail += "; ";
    detail += label + (condition ? " ok" : " FAILED");
  }
  void note(const std::string& text) {
    if (!detail.empty()) detail += "; ";
    detail += text;
  }
};

std::string fmt(double v, int digits = 5) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

// --- 1. linear optimal gain keeps the 500-layer walk unbiased ---
Outcome criterion_linear_gain() {
  Outcome o;
  const double g = g_linear(100).g;
  o.require(std::abs(g - std::exp(1.0 / 200.0)) < 1e-14, "g_linear(100)=exp(1/200)");
  o.require(std::abs(g - 1.005) < 2e-5, "g~1.005");

  WalkConfig cfg;
  cfg.n = 100;
  cfg.depth = 500;
  cfg.gain = g;
  cfg.nonlinearity = Nonlinearity::Linear;
  cfg.samples = 500;
  cfg.seed = 20260810;
  const WalkTrace t = simulate_walk(cfg);
  const double mean = t.mean(cfg.depth);
  const double se = t.mean_se()(cfg.depth);
  o.require(std::abs(mean) < 3.0 * se, "final mean lnZ within 3 SE of 0");
  o.note("mean=" + fmt(mean) + " se=" + fmt(se));
  return o;
}

// --- 2. unit gain vanishes at the predicted rate ---
Outcome criterion_unit_gain_vanishing() {
  Outcome o;
  WalkConfig cfg;
  cfg.n = 100;
  cfg.depth = 500;
  cfg.gain = 1.0;
  cfg.nonlinearity = Nonlinearity::Linear;
  cfg.samples = 500;
  cfg.seed = 20260811;
  const WalkTrace t = simulate_walk(cfg);
  const double mean = t.mean(cfg.depth);
  const double se = t.mean_se()(cfg.depth);
  o.require(std::abs(mean - (-5.0)) < 3.0 * se, "final mean lnZ within 3 SE of -D/N=-5");
  o.note("mean=" + fmt(mean) + " se=" + fmt(se));
  return o;
}

// --- 3. variance grows linearly and scales as 1/N ---
Outcome criterion_variance_growth() {
  Outcome o;
  WalkConfig cfg;
  cfg.depth = 500;
  cfg.gain = 1.0;
  cfg.nonlinearity = Nonlinearity::Linear;
  cfg.samples = 3000;
  cfg.seed = 20260812;

  cfg.n = 100;
  const WalkTrace t100 = simulate_walk(cfg);
  Vector x(cfg.depth + 1);
  for (int d = 0; d <= cfg.depth; ++d) x(d) = d;
  const LineFit fit = fit_line(x, t100.var);
  o.require(fit.r_squared > 0.99, "per-layer variance linear in depth (R^2>0.99)");

  cfg.n = 200;
  cfg.seed = 20260813;
  const WalkTrace t200 = simulate_walk(cfg);
  const double slope100 = fit.slope;
  const double slope200 = variance_slope(t200);
  o.require(std::abs(slope200 - 0.5 * slope100) <= 0.2 * 0.5 * slope100,
            "slope halves (within 20%) when N doubles");
  o.note("R2=" + fmt(fit.r_squared) + " slope(N=100)=" + fmt(slope100) +
         " vs stated 1/(2N)=" + fmt(ln_z_var_linear(100)) +
         " vs measured-step trigamma(N/2)=" + fmt(ln_z_var_linear_measured(100)) +
         "; slope(N=200)=" + fmt(slope200));
  return o;
}

// --- 4. relu fitted expressions vs Monte-Carlo moments ---
Outcome criterion_relu_fits() {
  Outcome o;
  const Rng root(20260814);
  for (int n : {6, 20, 100, 500}) {
    Rng rng = root.split(n);
    const LnZStats s = estimate_ln_z_stats(Nonlinearity::Relu, n, 200000, rng);
    const double fit_mean = ln_z_mean_relu(n);
    const double fit_var = ln_z_var_relu(n);
    const double mean_rel = std::abs(s.mean - fit_mean) / std::abs(fit_mean);
    const double var_rel = std::abs(s.variance - fit_var) / fit_var;
    o.require(mean_rel < 0.05, "N=" + std::to_string(n) + " mean within 5%");
    o.require(var_rel < 0.10, "N=" + std::to_string(n) + " var within 10%");
    o.note("N=" + std::to_string(n) + ": mc_mean=" + fmt(s.mean) + " fit=" + fmt(fit_mean) +
           " (" + fmt(100 * mean_rel, 3) + "%), mc_var=" + fmt(s.variance) + " fit=" +
           fmt(fit_var) + " (" + fmt(100 * var_rel, 3) + "%)");
  }
  const double tail = g_relu(1000000000).g;
  o.require(std::abs(tail - std::sqrt(2.0)) < 1e-8, "g_relu limit sqrt(2)");
  return o;
}

// --- 5. empirical optimal gains at N=100, D=200 ---
Outcome criterion_empirical_gain() {
  Outcome o;
  const Rng root(20260815);

  const OptimalGSearch lin =
      estimate_optimal_g(Nonlinearity::Linear, 100, 200, 200, root.split(1));
  o.require(std::abs(lin.best.g - std::exp(1.0 / 200.0)) <= 0.01, "linear within 0.01");
  o.note("linear g=" + fmt(lin.best.g) + " target=" + fmt(std::exp(1.0 / 200.0)));

  const OptimalGSearch rel = estimate_optimal_g(Nonlinearity::Relu, 100, 200, 200, root.split(2));
  o.require(std::abs(rel.best.g - g_relu(100).g) <= 0.03, "relu within 0.03");
  o.note("relu g=" + fmt(rel.best.g) + " target=" + fmt(g_relu(100).g));

  const OptimalGSearch tnh = estimate_optimal_g(Nonlinearity::Tanh, 100, 200, 200, root.split(3));
  o.require(tnh.best.g >= 1.1 && tnh.best.g <= 1.3, "tanh inside [1.1, 1.3]");
  o.note("tanh g=" + fmt(tnh.best.g));
  return o;
}

// --- 6. analytic gradients vs finite differences ---
Outcome criterion_gradient_correctness() {
  Outcome o;
  double worst = 0.0;
  for (Nonlinearity nl : {Nonlinearity::Linear, Nonlinearity::Relu, Nonlinearity::Tanh}) {
    for (Objective obj : {Objective::CrossEntropy, Objective::MeanSquaredError}) {
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ActKind out = obj == Objective::CrossEntropy ? ActKind::Softmax : ActKind::Linear;
        NetworkParams p = init_network({5, 4, 3}, 1.15, nl, out, 3300 + seed);
        Rng rng(4400 + seed);
        Matrix input = gaussian_matrix(5, 3, 1.0, rng);
        if (nl == Nonlinearity::Relu) {
          for (int guard = 0; guard < 100; ++guard) {
            const ForwardTrace t = forward(p, input);
            double closest = 1e300;
            for (int d = 1; d < p.depth(); ++d)
              closest = std::min(closest, t.a[d].array().abs().minCoeff());
            if (closest > 1e-3) break;
            input = gaussian_matrix(5, 3, 1.0, rng);
          }
        }
        Matrix targets;
        if (obj == Objective::CrossEntropy) {
          targets = Matrix::Zero(3, 3);
          for (int j = 0; j < 3; ++j)
            targets(static_cast<int>(rng.next_u64() % 3), j) = 1.0;
        } else {
          targets = gaussian_matrix(3, 3, 1.0, rng);
        }
        worst = std::max(worst, gradient_check(p, input, targets, obj));
      }
    }
  }
  o.require(worst < 1e-6, "max relative error < 1e-6 over 120 checks");
  o.note("worst=" + fmt(worst, 3));
  return o;
}

// --- 7. the gradient-ratio product identity, exactly ---
Outcome criterion_telescoping() {
  Outcome o;
  Rng seeder(20260817);
  double worst = 0.0;
  int dead_paths = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Nonlinearity nl = rep % 3 == 0   ? Nonlinearity::Linear
                            : rep % 3 == 1 ? Nonlinearity::Relu
                                           : Nonlinearity::Tanh;
    std::vector<int> widths{static_cast<int>(3 + seeder.next_u64() % 8)};
    const int depth = 2 + static_cast<int>(seeder.next_u64() % 7);
    for (int d = 0; d < depth; ++d) widths.push_back(3 + static_cast<int>(seeder.next_u64() % 8));
    NetworkParams p =
        init_network(widths, 0.8 + 0.1 * (rep % 7), nl, to_act(nl), seeder.next_u64());
    Rng rng(seeder.next_u64());
    const Matrix input = gaussian_matrix(widths.front(), 1, 1.0, rng);
    const Matrix dout = gaussian_matrix(widths.back(), 1, 1.0, rng);
    const BackwardTrace bt = backward(p, forward(p, input), dout, true);
    const double ratio = bt.deltas[0].squaredNorm() / bt.deltas.back().squaredNorm();
    double product = 1.0;
    for (int d = 0; d < p.depth(); ++d) product *= p.gains[d] * p.gains[d] * bt.z[d];
    if (ratio == 0.0) {
      ++dead_paths;
      if (product != 0.0) worst = 1.0;
      continue;
    }
    worst = std::max(worst, std::abs(product - ratio) / ratio);
  }
  o.require(worst < 1e-8, "|delta0|^2/|deltaD|^2 = prod g^2 z within 1e-8 on 100 networks");
  o.note("worst_rel=" + fmt(worst, 3) + " dead_relu_paths=" + std::to_string(dead_paths));
  return o;
}

// --- 8. schedule endpoint identities ---
Outcome criterion_schedule_identities() {
  Outcome o;
  Rng rng(20260818);
  double worst_out = 0.0, worst_in = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int d_max = 2 + static_cast<int>(rng.next_u64() % 400);
    const int depth = 1 + static_cast<int>(rng.next_u64() % d_max);
    const double lin = std::exp(-9.0 + 8.0 * rng.uniform());
    const double lout = std::exp(-9.0 + 8.0 * rng.uniform());
    const LrSchedule s = build_schedule(depth, d_max, lin, lout);
    worst_out = std::max(worst_out, std::abs(s.rates.back() - lout) / lout);
    if (depth == d_max) worst_in = std::max(worst_in, std::abs(s.rates.front() - lin) / lin);
  }
  o.require(worst_out < 1e-12, "lambda_D = lambda_out to 1e-12 relative");
  o.require(worst_in < 1e-12, "lambda_1 = lambda_in when D = D_max");
  const LrSchedule flat = build_schedule(7, 64, 0.03, 0.03);
  bool constant = true;
  for (double r : flat.rates) constant = constant && r == 0.03;
  o.require(constant, "equal rates degenerate to a constant schedule");
  o.note("worst_out=" + fmt(worst_out, 3) + " worst_in=" + fmt(worst_in, 3));
  return o;
}

// --- 9. parameter-budget layer sizing ---
Outcome criterion_layer_sizing() {
  Outcome o;
  const SizingPlan deep = size_layers(4000000, 512, 784, 10, LayerFamily::Constant);
  o.require(deep.widths[1] == 88, "D=512 at 4e6 gives N=88");

  const SizingPlan ae = size_layers(16000000, 4, 784, 784, LayerFamily::Autoencoder);
  o.require(ae.widths == std::vector<int>{784, 9816, 30, 9816, 784},
            "autoencoder at 16e6 gives [9816 30 9816 784]");

  const SizingPlan shallow = size_layers(4000000, 4, 784, 10, LayerFamily::Constant);
  const int n4 = shallow.widths[1];
  o.require(n4 == 1228 || n4 == 1229, "D=4 at 4e6 within one of the published width");
  o.note("convention: weights+biases, smallest width meeting the budget; D=4 gives N=" +
         std::to_string(n4) + " (published 1228 totals " +
         std::to_string(parameter_count({784, 1228, 1228, 1228, 10})) +
         " < 4e6, so the convention forces 1229; D=512 and autoencoder match exactly)");
  return o;
}

// --- 10. desk-scale training with and without the gain correction ---
Outcome criterion_desk_scale_training() {
  Outcome o;
  const int depth = 32, width = 90;
  std::vector<int> widths{784};
  for (int i = 0; i < depth - 1; ++i) widths.push_back(width);
  widths.push_back(10);

  // Stand-in for the 1000-example image set, routed through the IDX container.
  const fs::path dir = fs::temp_directory_path() / "rwi_acceptance" / "desk_scale";
  fs::create_directories(dir);
  {
    const Dataset raw = synthetic_classification(1000, 784, 10, 2.5, 424242);
    IdxTensor images;
    images.type_code = kIdxF64;
    images.dims = {1000, 784};
    images.data.resize(1000 * 784);
    for (int e = 0; e < 1000; ++e)
      for (int i = 0; i < 784; ++i) images.data[e * 784 + i] = raw.inputs(i, e);
    IdxTensor labels;
    labels.type_code = kIdxU8;
    labels.dims = {1000};
    labels.data.resize(1000);
    for (int e = 0; e < 1000; ++e) {
      Eigen::Index cls;
      raw.targets.col(e).maxCoeff(&cls);
      labels.data[e] = static_cast<double>(cls) / 255.0;
    }
    write_idx_file(images, dir / "images.idx");
    write_idx_file(labels, dir / "labels.idx");
  }
  const Dataset data = normalize(load_idx_dataset(dir / "images.idx", dir / "labels.idx", 10));

  // Tuned rate pair for this architecture (pinned from calibration runs).
  const double lambda_in = 0.02, lambda_out = 0.08;
  const LrSchedule schedule = build_schedule(depth, depth, lambda_in, lambda_out);
  TrainConfig tc;
  tc.minibatch = 100;
  tc.epochs = 100;
  tc.objective = Objective::CrossEntropy;
  tc.seed = 777;

  NetworkParams rwi_net = init_network(widths, 1.2, Nonlinearity::Tanh, ActKind::Softmax, 909);
  const TrainHistory rwi_hist = train(rwi_net, data, schedule, tc);
  const long best = rwi_hist.best_error_count();
  o.require(best >= 0 && best < 50, "g=1.2 reaches <5% training error within 100 epochs");
  o.note("g=1.2 best_error=" + std::to_string(best) + "/1000");

  NetworkParams flat_net = init_network(widths, 1.0, Nonlinearity::Tanh, ActKind::Softmax, 909);
  const TrainHistory flat_hist = train(flat_net, data, schedule, tc);

  // Epoch-0 gradient ratio factor, averaged over fresh initializations to
  // suppress single-network walk noise.
  auto mean_log_probe_ratio = [&](double gain) {
    const Matrix probe_in = data.inputs.leftCols(100);
    const Matrix probe_tg = data.targets.leftCols(100);
    double acc = 0.0;
    const int reps = 8;
    for (int r = 0; r < reps; ++r) {
      const NetworkParams p =
          init_network(widths, gain, Nonlinearity::Tanh, ActKind::Softmax, 5000 + r);
      const ForwardTrace t = forward(p, probe_in);
      const Matrix dout = output_delta(p, t, probe_tg, Objective::CrossEntropy);
      const BackwardTrace bt = backward(p, t, dout, false);
      acc += bt.per_column_log_ratio().mean();
    }
    return acc / reps;
  };
  const double lr_rwi = mean_log_probe_ratio(1.2);
  const double lr_flat = mean_log_probe_ratio(1.0);
  const double factor = std::exp(lr_rwi - lr_flat);
  const double predicted = std::exp(static_cast<double>(depth) / (2.0 * width));
  o.require(lr_flat < lr_rwi, "g=1.0 epoch-0 gradient ratio is smaller");
  o.require(factor >= 0.5 * predicted && factor <= 2.0 * predicted,
            "ratio factor within 2x of exp(D/(2N))");
  o.note("factor=" + fmt(factor) + " exp(D/(2N))=" + fmt(predicted) + " ln_ratio(g=1.2)=" +
         fmt(lr_rwi) + " ln_ratio(g=1.0)=" + fmt(lr_flat));

  // Early descent: mean objective over epochs 1..10.
  double early_rwi = 0.0, early_flat = 0.0;
  for (int e = 1; e <= 10; ++e) {
    early_rwi += rwi_hist.epochs[e].objective;
    early_flat += flat_hist.epochs[e].objective;
  }
  o.require(early_rwi < early_flat, "g=1.2 descends faster over the first 10 epochs");
  o.note("early mean objective: g=1.2 " + fmt(early_rwi / 10) + " vs g=1.0 " +
         fmt(early_flat / 10) + "; g=1.0 best_error=" + std::to_string(flat_hist.best_error_count()) +
         "/1000");
  return o;
}

// --- 11. IDX encode/parse round trip and header shapes ---
Outcome criterion_idx_round_trip() {
  Outcome o;
  Rng rng(20260821);
  bool exact = true;
  for (int rep = 0; rep < 30; ++rep) {
    IdxTensor t;
    const int rank = 1 + static_cast<int>(rng.next_u64() % 3);
    long total = 1;
    for (int r = 0; r < rank; ++r) {
      t.dims.push_back(1 + static_cast<std::uint32_t>(rng.next_u64() % 8));
      total *= t.dims.back();
    }
    t.type_code = rep % 2 == 0 ? kIdxU8 : kIdxF64;
    for (long i = 0; i < total; ++i)
      t.data.push_back(t.type_code == kIdxU8
                           ? static_cast<double>(rng.next_u64() % 256) / 255.0
                           : rng.gaussian());
    const IdxTensor back = parse_idx(encode_idx(t));
    exact = exact && back.data == t.data && back.dims == t.dims && back.type_code == t.type_code;
  }
  o.require(exact, "random tensors round-trip bit-exactly");

  IdxTensor images;
  images.type_code = kIdxU8;
  images.dims = {60000, 28, 28};
  images.data.assign(60000L * 28 * 28, 0.0);
  const auto bytes = encode_idx(images);
  o.require(bytes[0] == 0 && bytes[1] == 0 && bytes[2] == 0x08 && bytes[3] == 3,
            "image magic 0x00000803");
  const IdxTensor parsed = parse_idx(bytes);
  o.require(parsed.dims == std::vector<std::uint32_t>{60000, 28, 28},
            "train image dims decode to (60000, 28, 28)");

  IdxTensor labels;
  labels.type_code = kIdxU8;
  labels.dims = {60000};
  labels.data.assign(60000, 0.0);
  const auto lbytes = encode_idx(labels);
  o.require(lbytes[2] == 0x08 && lbytes[3] == 1, "label magic 0x00000801");
  return o;
}

// --- 12. byte-identical regeneration from manifests ---
Outcome criterion_manifest_determinism() {
  Outcome o;
  const fs::path base = fs::temp_directory_path() / "rwi_acceptance";
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };

  ExperimentConfig walk;
  walk.kind = "walk";
  walk.seed = 606;
  walk.output_dir = (base / "det_walk_a").string();
  walk.walk.n = 40;
  walk.walk.depth = 60;
  walk.walk.samples = 80;
  walk.walk.nonlinearity = "relu";
  walk.walk.mode = "network";
  fs::remove_all(base / "det_walk_a");
  fs::remove_all(base / "det_walk_b");
  run_walk_experiment(walk);
  ExperimentConfig replay = config_from_manifest((base / "det_walk_a" / "manifest.json").string());
  replay.output_dir = (base / "det_walk_b").string();
  run_walk_experiment(replay);
  o.require(slurp(base / "det_walk_a" / "trace.csv") == slurp(base / "det_walk_b" / "trace.csv"),
            "walk trace.csv byte-identical");
  o.require(
      slurp(base / "det_walk_a" / "summary.csv") == slurp(base / "det_walk_b" / "summary.csv"),
      "walk summary.csv byte-identical");

  ExperimentConfig tr;
  tr.kind = "train_once";
  tr.seed = 607;
  tr.output_dir = (base / "det_train_a").string();
  tr.dataset.examples = 80;
  tr.dataset.dims = 10;
  tr.dataset.classes = 3;
  tr.dataset.seed = 9;
  tr.train.widths = {10, 12, 3};
  tr.train.depth = 2;
  tr.train.epochs = 6;
  tr.train.minibatch = 20;
  tr.train.lambda_in = 0.05;
  tr.train.lambda_out = 0.05;
  fs::remove_all(base / "det_train_a");
  fs::remove_all(base / "det_train_b");
  run_train_once(tr);
  ExperimentConfig replay2 =
      config_from_manifest((base / "det_train_a" / "manifest.json").string());
  replay2.output_dir = (base / "det_train_b").string();
  run_train_once(replay2);
  o.require(
      slurp(base / "det_train_a" / "history.csv") == slurp(base / "det_train_b" / "history.csv"),
      "training history.csv byte-identical");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double runtime_budget_s;  // 0 = no stated budget
  std::function<Outcome()> fn;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "linear-gain-unbiased-walk", 60, criterion_linear_gain},
      {2, "unit-gain-vanishing", 0, criterion_unit_gain_vanishing},
      {3, "variance-growth", 0, criterion_variance_growth},
      {4, "relu-fit-agreement", 120, criterion_relu_fits},
      {5, "empirical-optimal-gain", 300, criterion_empirical_gain},
      {6, "gradient-correctness", 0, criterion_gradient_correctness},
      {7, "telescoping-identity", 0, criterion_telescoping},
      {8, "schedule-endpoints", 0, criterion_schedule_identities},
      {9, "layer-sizing-budgets", 0, criterion_layer_sizing},
      {10, "desk-scale-training", 600, criterion_desk_scale_training},
      {11, "idx-round-trip", 0, criterion_idx_round_trip},
      {12, "manifest-determinism", 0, criterion_manifest_determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria()) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.runtime_budget_s > 0 && elapsed > c.runtime_budget_s) {
      o.pass = false;
      o.note("runtime budget exceeded");
    }
    std::printf("%s  %02d %-28s (%.1fs)  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, elapsed,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures;
}
