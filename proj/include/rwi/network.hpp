#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rwi/numeric.hpp"

namespace rwi {

/// Hidden-layer nonlinearity. All satisfy the unit-slope normalization on the
/// active branch; the relu derivative at the kink (a = 0) is fixed to 0.
enum class Nonlinearity { Linear, Relu, Tanh };

/// Per-layer activation, including the softmax output option.
enum class ActKind { Linear, Relu, Tanh, Softmax };

ActKind to_act(Nonlinearity nl);

const char* to_string(Nonlinearity nl);
Nonlinearity nonlinearity_from_string(const std::string& s);
const char* to_string(ActKind k);
ActKind act_from_string(const std::string& s);

/// f applied elementwise (softmax is columnwise, numerically shifted).
Matrix apply_act(ActKind kind, const Matrix& a);

/// f' applied elementwise. Not defined for softmax (objective-fused instead).
Matrix act_derivative(ActKind kind, const Matrix& a);

enum class Objective { CrossEntropy, MeanSquaredError };
const char* to_string(Objective o);
Objective objective_from_string(const std::string& s);

/// Feedforward network h_d = f(g_d W_d h_{d-1} + b_d), d = 1..D.
///
/// weights[d] maps layer d to layer d+1 (shape widths[d+1] x widths[d]);
/// gains/biases/acts are indexed the same way, entry d belonging to layer d+1.
struct NetworkParams {
  std::vector<int> widths;      // h_0 .. h_D
  std::vector<Matrix> weights;  // D matrices
  std::vector<Vector> biases;   // D vectors
  std::vector<double> gains;    // D scale factors
  std::vector<ActKind> acts;    // D activations
  std::uint64_t init_seed = 0;

  int depth() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  long parameter_count() const;
};

struct NetworkInit {
  std::vector<int> widths;
  double gain = 1.0;
  Nonlinearity hidden = Nonlinearity::Tanh;
  ActKind output = ActKind::Softmax;
  std::optional<double> gain_first;           // g_1 override
  std::optional<double> gain_last;            // g_D override
  std::vector<int> linear_hidden_layers;      // 1-based layer indices forced linear
};

/// Weight entries ~ Gaussian(0, 1/fan_in), biases zero, per-layer gains
/// (gain_first, gain, ..., gain, gain_last).
NetworkParams init_network(const NetworkInit& init, std::uint64_t seed);
NetworkParams init_network(const std::vector<int>& widths, double gain, Nonlinearity hidden,
                           ActKind output, std::uint64_t seed);

/// Activations and pre-activations for a batch (one example per column).
/// a[d]/h[d] for layer d; a[0] is unused, h[0] is the input.
struct ForwardTrace {
  std::vector<Matrix> a;
  std::vector<Matrix> h;
  const Matrix& output() const { return h.back(); }
};

ForwardTrace forward(const NetworkParams& params, const Matrix& input);

/// Pre-activation gradients and parameter gradients for a batch.
///
/// deltas[d] = dE/da_d for d >= 1; deltas[0] = dE/dh_0 (the input has no
/// pre-activation, so the last backward step carries no derivative factor).
/// z[d-1] is the squared-norm amplification of layer d's backward step,
/// computed on the normalized delta so the telescoping identity
/// |delta_0|^2 / |delta_D|^2 = prod_d gains[d]^2 z[d] is an independent
/// arithmetic route, not a rearrangement.
struct BackwardTrace {
  std::vector<Matrix> deltas;
  std::vector<double> z;              // empty when not recorded
  std::vector<Matrix> weight_grads;
  std::vector<Vector> bias_grads;

  double log_norm_ratio() const;      // ln(|delta_0| / |delta_D|), Frobenius
  Vector per_column_log_ratio() const;
};

BackwardTrace backward(const NetworkParams& params, const ForwardTrace& trace,
                       const Matrix& delta_out, bool record_z = true);

/// Objective value averaged over the batch. CrossEntropy requires a softmax
/// output layer and one-hot targets; MeanSquaredError is 0.5|h - y|^2.
double objective_value(const NetworkParams& params, const ForwardTrace& trace,
                       const Matrix& targets, Objective objective);

/// dE/da_D for the mean-over-batch objective (softmax+cross-entropy and
/// output+MSE are fused for stability).
Matrix output_delta(const NetworkParams& params, const ForwardTrace& trace,
                    const Matrix& targets, Objective objective);

/// Max relative error between analytic gradients and central finite
/// differences over every weight and bias (step 1e-5; the denominator is
/// max(|analytic| + |numeric|, 1e-2) so roundoff in near-zero entries does
/// not mask real disagreements). Intended for networks of up to ~1e3
/// parameters.
double gradient_check(NetworkParams& params, const Matrix& input, const Matrix& targets,
                      Objective objective, double step = 1e-5);

/// One random-vector gradient-norm walk through a freshly initialized
/// network: forward a Gaussian input, back-propagate a Gaussian unit-variance
/// delta_D, and record ln(|delta_{D-k}|^2 / |delta_D|^2) for k = 0..D.
/// Propagation is done in log space (per-step renormalization) so arbitrary
/// gains cannot overflow; requires zero biases. `dead` marks a walk
/// annihilated by an all-inactive relu layer.
struct WalkSample {
  std::vector<double> ln_z_path;  // size D+1, ln_z_path[0] == 0
  bool dead = false;
};

WalkSample backprop_log_norm_walk(const NetworkParams& params, Rng& rng);

/// Portable binary save/load with shape headers and seed metadata.
void save_network(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_network(const std::filesystem::path& path);

}  // namespace rwi
