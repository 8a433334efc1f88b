#include "rwi/trainer.hpp"

#include <cmath>
#include <numeric>

namespace rwi {

long TrainHistory::best_error_count() const {
  long best = -1;
  for (const auto& e : epochs)
    if (e.error_count >= 0 && (best < 0 || e.error_count < best)) best = e.error_count;
  return best;
}

DivergenceError::DivergenceError(int epoch, long batch_start, double value)
    : std::runtime_error("training diverged: non-finite objective " + std::to_string(value) +
                         " at epoch " + std::to_string(epoch) + ", batch offset " +
                         std::to_string(batch_start)),
      epoch_(epoch) {}

double clip_gradient(std::vector<Matrix>& weight_grads, std::vector<Vector>& bias_grads,
                     double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("clip_gradient: threshold must be > 0");
  double sq = 0.0;
  for (const auto& g : weight_grads) sq += g.squaredNorm();
  for (const auto& g : bias_grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm <= threshold) return 1.0;
  const double scale = threshold / norm;
  for (auto& g : weight_grads) g *= scale;
  for (auto& g : bias_grads) g *= scale;
  return scale;
}

namespace {

EpochStats evaluate_epoch(int epoch, const NetworkParams& params, const Dataset& data,
                          const TrainConfig& cfg) {
  EpochStats stats;
  stats.epoch = epoch;
  const ForwardTrace t = forward(params, data.inputs);
  stats.objective = objective_value(params, t, data.targets, cfg.objective);
  if (cfg.objective == Objective::CrossEntropy) {
    long errors = 0;
    for (Eigen::Index j = 0; j < data.targets.cols(); ++j) {
      Eigen::Index predicted, actual;
      t.output().col(j).maxCoeff(&predicted);
      data.targets.col(j).maxCoeff(&actual);
      if (predicted != actual) ++errors;
    }
    stats.error_count = errors;
  }

  const long probe = std::max<long>(1, std::min<long>(cfg.probe_size, data.examples()));
  const Matrix probe_in = data.inputs.leftCols(probe);
  const Matrix probe_tg = data.targets.leftCols(probe);
  const ForwardTrace pt = forward(params, probe_in);
  const Matrix dout = output_delta(params, pt, probe_tg, cfg.objective);
  const BackwardTrace bt = backward(params, pt, dout, false);
  const Vector ratios = bt.per_column_log_ratio();
  stats.probe_ratio = ratios.array().exp().mean();
  return stats;
}

std::vector<long> shuffled_indices(long n, Rng& rng) {
  std::vector<long> idx(n);
  std::iota(idx.begin(), idx.end(), 0L);
  for (long i = n - 1; i > 0; --i) {
    const long j = static_cast<long>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

}  // namespace

TrainHistory train(NetworkParams& params, const Dataset& data, const LrSchedule& schedule,
                   const TrainConfig& cfg) {
  if (cfg.minibatch < 1) throw std::invalid_argument("train: minibatch must be >= 1");
  if (!(cfg.epoch_decay > 0.0) || cfg.epoch_decay > 1.0)
    throw std::invalid_argument("train: epoch_decay must be in (0, 1]");
  if (schedule.depth() != params.depth())
    throw std::invalid_argument("train: schedule depth does not match network depth");
  if (data.inputs.rows() != params.input_dim() || data.targets.rows() != params.output_dim())
    throw std::invalid_argument("train: dataset shapes do not match network");
  if (!data.normalized()) throw std::invalid_argument("train: dataset must be normalized");

  const Rng root(cfg.seed);
  TrainHistory history;
  history.epochs.push_back(evaluate_epoch(0, params, data, cfg));

  double decay_factor = 1.0;
  const long n = data.examples();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng = root.split(static_cast<std::uint64_t>(epoch));
    const std::vector<long> order = shuffled_indices(n, shuffle_rng);

    for (long start = 0; start < n; start += cfg.minibatch) {
      const long count = std::min<long>(cfg.minibatch, n - start);
      Matrix batch_in(data.dims(), count);
      Matrix batch_tg(data.targets.rows(), count);
      for (long k = 0; k < count; ++k) {
        batch_in.col(k) = data.inputs.col(order[start + k]);
        batch_tg.col(k) = data.targets.col(order[start + k]);
      }

      const ForwardTrace t = forward(params, batch_in);
      const double loss = objective_value(params, t, batch_tg, cfg.objective);
      if (!std::isfinite(loss)) throw DivergenceError(epoch, start, loss);

      const Matrix dout = output_delta(params, t, batch_tg, cfg.objective);
      BackwardTrace bt = backward(params, t, dout, false);
      if (cfg.clip_threshold) clip_gradient(bt.weight_grads, bt.bias_grads, *cfg.clip_threshold);

      for (int d = 0; d < params.depth(); ++d) {
        const double rate = schedule.rates[d] * decay_factor;
        params.weights[d].noalias() -= rate * bt.weight_grads[d];
        params.biases[d] -= (rate * cfg.bias_rate_multiplier) * bt.bias_grads[d];
      }
    }

    decay_factor *= cfg.epoch_decay;
    history.epochs.push_back(evaluate_epoch(epoch, params, data, cfg));
    if (!std::isfinite(history.epochs.back().objective))
      throw DivergenceError(epoch, -1, history.epochs.back().objective);
  }
  return history;
}

}  // namespace rwi
