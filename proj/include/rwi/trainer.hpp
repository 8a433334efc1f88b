#pragma once

#include <optional>
#include <stdexcept>

#include "rwi/dataset.hpp"
#include "rwi/schedule.hpp"

namespace rwi {

struct TrainConfig {
  int minibatch = 100;
  int epochs = 100;
  double epoch_decay = 0.995;                  // applied to all rates at each epoch end
  std::optional<double> clip_threshold = 100.0;  // global L2 norm bound; nullopt disables
  Objective objective = Objective::CrossEntropy;
  std::uint64_t seed = 0;
  int probe_size = 100;            // examples used for the gradient-ratio probe
  double bias_rate_multiplier = 1.0;
};

/// Epoch 0 is the pre-training state; epoch e >= 1 is measured after the
/// e-th pass. probe_ratio is the mean per-example |delta_0| / |delta_D| on
/// the probe batch; error_count is -1 for non-classification objectives.
struct EpochStats {
  int epoch = 0;
  double objective = 0.0;
  long error_count = -1;
  double probe_ratio = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;

  const EpochStats& initial() const { return epochs.front(); }
  const EpochStats& final() const { return epochs.back(); }
  long best_error_count() const;
};

/// Raised when the objective stops being finite; carries where it happened so
/// divergence is distinguishable from implementation faults.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int epoch, long batch_start, double value);
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Rescale all gradients to the threshold when the global L2 norm exceeds it.
/// Returns the applied scale (1 when untouched).
double clip_gradient(std::vector<Matrix>& weight_grads, std::vector<Vector>& bias_grads,
                     double threshold);

/// Minibatch SGD with per-layer rates. The dataset must be normalized.
/// Layer d's weights and biases move by -lambda_d * decay^epoch * gradient
/// (gradient = mean over the minibatch, globally clipped first); examples are
/// reshuffled every epoch from the run seed. Mutates params in place.
TrainHistory train(NetworkParams& params, const Dataset& data, const LrSchedule& schedule,
                   const TrainConfig& cfg);

}  // namespace rwi
