#include "rwi/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rwi {

ActKind to_act(Nonlinearity nl) {
  switch (nl) {
    case Nonlinearity::Linear: return ActKind::Linear;
    case Nonlinearity::Relu: return ActKind::Relu;
    case Nonlinearity::Tanh: return ActKind::Tanh;
  }
  throw std::logic_error("to_act: bad nonlinearity");
}

const char* to_string(Nonlinearity nl) {
  switch (nl) {
    case Nonlinearity::Linear: return "linear";
    case Nonlinearity::Relu: return "relu";
    case Nonlinearity::Tanh: return "tanh";
  }
  return "?";
}

Nonlinearity nonlinearity_from_string(const std::string& s) {
  if (s == "linear") return Nonlinearity::Linear;
  if (s == "relu") return Nonlinearity::Relu;
  if (s == "tanh") return Nonlinearity::Tanh;
  throw std::invalid_argument("unknown nonlinearity: " + s);
}

const char* to_string(ActKind k) {
  switch (k) {
    case ActKind::Linear: return "linear";
    case ActKind::Relu: return "relu";
    case ActKind::Tanh: return "tanh";
    case ActKind::Softmax: return "softmax";
  }
  return "?";
}

ActKind act_from_string(const std::string& s) {
  if (s == "linear") return ActKind::Linear;
  if (s == "relu") return ActKind::Relu;
  if (s == "tanh") return ActKind::Tanh;
  if (s == "softmax") return ActKind::Softmax;
  throw std::invalid_argument("unknown activation: " + s);
}

const char* to_string(Objective o) {
  return o == Objective::CrossEntropy ? "cross_entropy" : "mse";
}

Objective objective_from_string(const std::string& s) {
  if (s == "cross_entropy") return Objective::CrossEntropy;
  if (s == "mse") return Objective::MeanSquaredError;
  throw std::invalid_argument("unknown objective: " + s);
}

Matrix apply_act(ActKind kind, const Matrix& a) {
  switch (kind) {
    case ActKind::Linear: return a;
    case ActKind::Relu: return a.cwiseMax(0.0);
    case ActKind::Tanh: return a.array().tanh().matrix();
    case ActKind::Softmax: {
      Matrix out(a.rows(), a.cols());
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const Eigen::ArrayXd shifted = a.col(j).array() - a.col(j).maxCoeff();
        const Eigen::ArrayXd e = shifted.exp();
        out.col(j) = (e / e.sum()).matrix();
      }
      return out;
    }
  }
  throw std::logic_error("apply_act: bad kind");
}

Matrix act_derivative(ActKind kind, const Matrix& a) {
  switch (kind) {
    case ActKind::Linear: return Matrix::Ones(a.rows(), a.cols());
    case ActKind::Relu: return (a.array() > 0.0).cast<double>().matrix();
    case ActKind::Tanh: {
      const Eigen::ArrayXXd t = a.array().tanh();
      return (1.0 - t * t).matrix();
    }
    case ActKind::Softmax: break;
  }
  throw std::invalid_argument("act_derivative: softmax has no elementwise derivative");
}

long NetworkParams::parameter_count() const {
  long total = 0;
  for (const auto& w : weights) total += w.size();
  for (const auto& b : biases) total += b.size();
  return total;
}

NetworkParams init_network(const NetworkInit& init, std::uint64_t seed) {
  const auto& widths = init.widths;
  if (widths.size() < 2) throw std::invalid_argument("init_network: need at least two layer widths");
  for (int w : widths)
    if (w < 1) throw std::invalid_argument("init_network: layer widths must be >= 1");
  if (!(init.gain > 0.0)) throw std::invalid_argument("init_network: gain must be > 0");

  const int depth = static_cast<int>(widths.size()) - 1;
  NetworkParams p;
  p.widths = widths;
  p.init_seed = seed;
  p.weights.reserve(depth);
  p.biases.reserve(depth);
  p.gains.assign(depth, init.gain);
  if (init.gain_first) p.gains.front() = *init.gain_first;
  if (init.gain_last) p.gains.back() = *init.gain_last;
  p.acts.assign(depth, to_act(init.hidden));
  p.acts.back() = init.output;
  for (int layer : init.linear_hidden_layers) {
    if (layer < 1 || layer >= depth)
      throw std::invalid_argument("init_network: linear layer override out of range");
    p.acts[layer - 1] = ActKind::Linear;
  }
  for (int d = 0; d + 1 < depth; ++d)
    if (p.acts[d] == ActKind::Softmax)
      throw std::invalid_argument("init_network: softmax is only valid at the output layer");

  Rng rng(seed);
  for (int d = 0; d < depth; ++d) {
    p.weights.push_back(gaussian_matrix(widths[d + 1], widths[d], 1.0 / widths[d], rng));
    p.biases.push_back(Vector::Zero(widths[d + 1]));
  }
  return p;
}

NetworkParams init_network(const std::vector<int>& widths, double gain, Nonlinearity hidden,
                           ActKind output, std::uint64_t seed) {
  NetworkInit init;
  init.widths = widths;
  init.gain = gain;
  init.hidden = hidden;
  init.output = output;
  return init_network(init, seed);
}

ForwardTrace forward(const NetworkParams& params, const Matrix& input) {
  if (input.rows() != params.input_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  const int depth = params.depth();
  ForwardTrace t;
  t.a.resize(depth + 1);
  t.h.resize(depth + 1);
  t.h[0] = input;
  for (int d = 1; d <= depth; ++d) {
    t.a[d] = params.gains[d - 1] * (params.weights[d - 1] * t.h[d - 1]);
    t.a[d].colwise() += params.biases[d - 1];
    t.h[d] = apply_act(params.acts[d - 1], t.a[d]);
  }
  return t;
}

BackwardTrace backward(const NetworkParams& params, const ForwardTrace& trace,
                       const Matrix& delta_out, bool record_z) {
  const int depth = params.depth();
  if (delta_out.rows() != params.output_dim() || delta_out.cols() != trace.h[0].cols())
    throw std::invalid_argument("backward: delta_out shape mismatch");

  BackwardTrace bt;
  bt.deltas.resize(depth + 1);
  bt.weight_grads.resize(depth);
  bt.bias_grads.resize(depth);
  if (record_z) bt.z.assign(depth, 0.0);

  bt.deltas[depth] = delta_out;
  for (int d = depth; d >= 1; --d) {
    const Matrix& delta = bt.deltas[d];
    bt.weight_grads[d - 1] = params.gains[d - 1] * (delta * trace.h[d - 1].transpose());
    bt.bias_grads[d - 1] = delta.rowwise().sum();

    Matrix back = params.weights[d - 1].transpose() * delta;
    if (d >= 2) back = act_derivative(params.acts[d - 2], trace.a[d - 1]).cwiseProduct(back);
    bt.deltas[d - 1] = params.gains[d - 1] * back;

    if (record_z) {
      // Independent arithmetic route: apply the backward matrix to the
      // normalized delta rather than rescaling the step above.
      const double norm = delta.norm();
      if (norm > 0.0) {
        Matrix unit_back = params.weights[d - 1].transpose() * (delta / norm);
        if (d >= 2)
          unit_back = act_derivative(params.acts[d - 2], trace.a[d - 1]).cwiseProduct(unit_back);
        bt.z[d - 1] = unit_back.squaredNorm();
      }
    }
  }
  return bt;
}

double BackwardTrace::log_norm_ratio() const {
  return std::log(deltas.front().norm()) - std::log(deltas.back().norm());
}

Vector BackwardTrace::per_column_log_ratio() const {
  const Eigen::Index cols = deltas.front().cols();
  Vector out(cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    out(j) = std::log(deltas.front().col(j).norm()) - std::log(deltas.back().col(j).norm());
  return out;
}

double objective_value(const NetworkParams& params, const ForwardTrace& trace,
                       const Matrix& targets, Objective objective) {
  const Matrix& out = trace.output();
  if (targets.rows() != out.rows() || targets.cols() != out.cols())
    throw std::invalid_argument("objective_value: target shape mismatch");
  const double batch = static_cast<double>(out.cols());
  if (objective == Objective::CrossEntropy) {
    if (params.acts.back() != ActKind::Softmax)
      throw std::invalid_argument("cross-entropy requires a softmax output layer");
    const Matrix& a = trace.a.back();
    double total = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double mx = a.col(j).maxCoeff();
      const double lse = mx + std::log((a.col(j).array() - mx).exp().sum());
      total += lse - a.col(j).dot(targets.col(j));
    }
    return total / batch;
  }
  return 0.5 * (out - targets).squaredNorm() / batch;
}

Matrix output_delta(const NetworkParams& params, const ForwardTrace& trace,
                    const Matrix& targets, Objective objective) {
  const Matrix& out = trace.output();
  if (targets.rows() != out.rows() || targets.cols() != out.cols())
    throw std::invalid_argument("output_delta: target shape mismatch");
  const double batch = static_cast<double>(out.cols());
  if (objective == Objective::CrossEntropy) {
    if (params.acts.back() != ActKind::Softmax)
      throw std::invalid_argument("cross-entropy requires a softmax output layer");
    return (out - targets) / batch;
  }
  if (params.acts.back() == ActKind::Softmax)
    throw std::invalid_argument("MSE with a softmax output layer is not supported");
  Matrix d = (out - targets) / batch;
  if (params.acts.back() != ActKind::Linear)
    d = act_derivative(params.acts.back(), trace.a.back()).cwiseProduct(d);
  return d;
}

namespace {

double objective_at(const NetworkParams& params, const Matrix& input, const Matrix& targets,
                    Objective objective) {
  const ForwardTrace t = forward(params, input);
  return objective_value(params, t, targets, objective);
}

}  // namespace

double gradient_check(NetworkParams& params, const Matrix& input, const Matrix& targets,
                      Objective objective, double step) {
  const ForwardTrace t = forward(params, input);
  const Matrix dout = output_delta(params, t, targets, objective);
  const BackwardTrace bt = backward(params, t, dout, false);

  double worst = 0.0;
  auto check_entry = [&](double& theta, double analytic) {
    const double saved = theta;
    theta = saved + step;
    const double plus = objective_at(params, input, targets, objective);
    theta = saved - step;
    const double minus = objective_at(params, input, targets, objective);
    theta = saved;
    const double numeric = (plus - minus) / (2.0 * step);
    const double denom = std::max(std::abs(analytic) + std::abs(numeric), 1e-2);
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };

  for (int d = 0; d < params.depth(); ++d) {
    Matrix& w = params.weights[d];
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) check_entry(w(i, j), bt.weight_grads[d](i, j));
    Vector& b = params.biases[d];
    for (Eigen::Index i = 0; i < b.size(); ++i) check_entry(b(i), bt.bias_grads[d](i));
  }
  return worst;
}

WalkSample backprop_log_norm_walk(const NetworkParams& params, Rng& rng) {
  const int depth = params.depth();
  for (const auto& b : params.biases)
    if (b.norm() != 0.0)
      throw std::invalid_argument("backprop_log_norm_walk: requires zero biases");

  Vector h = gaussian_vector(params.input_dim(), 1.0, rng);
  std::vector<Vector> factors(depth);  // f'(a_d) for d = 1..depth-1
  for (int d = 1; d < depth; ++d) {
    const ActKind kind = params.acts[d - 1];
    Vector a = params.gains[d - 1] * (params.weights[d - 1] * h);
    factors[d] = act_derivative(kind, a);
    h = apply_act(kind, a);
    if (kind == ActKind::Linear || kind == ActKind::Relu) {
      // Scale-invariant with zero biases; renormalize so large gains cannot overflow.
      const double norm = h.norm();
      if (norm > 0.0) h /= norm;
    }
  }

  WalkSample sample;
  sample.ln_z_path.assign(depth + 1, 0.0);
  Vector delta = gaussian_vector(params.output_dim(), 1.0, rng);
  double ln_acc = 0.0;
  for (int d = depth; d >= 1; --d) {
    const double norm = delta.norm();
    if (norm == 0.0) {
      sample.dead = true;
      return sample;
    }
    Vector v = params.gains[d - 1] * (params.weights[d - 1].transpose() * (delta / norm));
    if (d >= 2) v = factors[d - 1].cwiseProduct(v);
    const double step_sq = v.squaredNorm();
    if (step_sq == 0.0) {
      sample.dead = true;
      return sample;
    }
    ln_acc += std::log(step_sq);
    sample.ln_z_path[depth - d + 1] = ln_acc;
    delta = std::move(v);
  }
  return sample;
}

// File layout (little-endian):
//   u32 magic "RWNP", u32 format version, u64 init seed,
//   u32 layer count, u32 widths[layer count],
//   then per weight layer: u8 activation, f64 gain,
//   f64 weights (row-major), f64 biases.
namespace {

constexpr std::uint32_t kMagic = 0x504e5752;  // "RWNP" little-endian
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw std::runtime_error("load_network: truncated file");
  return value;
}

}  // namespace

void save_network(const NetworkParams& params, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_network: cannot open " + path.string());
  put<std::uint32_t>(os, kMagic);
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint64_t>(os, params.init_seed);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.widths.size()));
  for (int w : params.widths) put<std::uint32_t>(os, static_cast<std::uint32_t>(w));
  for (int d = 0; d < params.depth(); ++d) {
    put<std::uint8_t>(os, static_cast<std::uint8_t>(params.acts[d]));
    put<double>(os, params.gains[d]);
    const Matrix& w = params.weights[d];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) put<double>(os, w(i, j));
    const Vector& b = params.biases[d];
    for (Eigen::Index i = 0; i < b.size(); ++i) put<double>(os, b(i));
  }
  if (!os) throw std::runtime_error("save_network: write failed for " + path.string());
}

NetworkParams load_network(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_network: cannot open " + path.string());
  if (get<std::uint32_t>(is) != kMagic) throw std::runtime_error("load_network: bad magic");
  if (get<std::uint32_t>(is) != kFormatVersion)
    throw std::runtime_error("load_network: unsupported format version");
  NetworkParams p;
  p.init_seed = get<std::uint64_t>(is);
  const auto n_widths = get<std::uint32_t>(is);
  if (n_widths < 2) throw std::runtime_error("load_network: invalid layer count");
  p.widths.resize(n_widths);
  for (auto& w : p.widths) w = static_cast<int>(get<std::uint32_t>(is));
  const int depth = static_cast<int>(n_widths) - 1;
  p.acts.resize(depth);
  p.gains.resize(depth);
  p.weights.resize(depth);
  p.biases.resize(depth);
  for (int d = 0; d < depth; ++d) {
    p.acts[d] = static_cast<ActKind>(get<std::uint8_t>(is));
    p.gains[d] = get<double>(is);
    Matrix w(p.widths[d + 1], p.widths[d]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = get<double>(is);
    p.weights[d] = std::move(w);
    Vector b(p.widths[d + 1]);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = get<double>(is);
    p.biases[d] = std::move(b);
  }
  return p;
}

}  // namespace rwi
