#include "rwi/sizing.hpp"

#include <stdexcept>

namespace rwi {

const char* to_string(LayerFamily f) {
  return f == LayerFamily::Constant ? "constant" : "autoencoder";
}

LayerFamily layer_family_from_string(const std::string& s) {
  if (s == "constant") return LayerFamily::Constant;
  if (s == "autoencoder") return LayerFamily::Autoencoder;
  throw std::invalid_argument("unknown layer family: " + s);
}

long parameter_count(const std::vector<int>& widths) {
  long total = 0;
  for (std::size_t d = 0; d + 1 < widths.size(); ++d)
    total += static_cast<long>(widths[d + 1]) * widths[d] + widths[d + 1];
  return total;
}

namespace {

std::vector<int> constant_widths(int n, int depth, int in, int out) {
  std::vector<int> w(static_cast<std::size_t>(depth) + 1, n);
  w.front() = in;
  w.back() = out;
  return w;
}

std::vector<int> taper_widths(int step, int depth, int in, int out) {
  const int per_side = depth / 2 - 1;
  std::vector<int> w;
  w.reserve(static_cast<std::size_t>(depth) + 1);
  w.push_back(in);
  for (int k = per_side; k >= 1; --k) w.push_back(kCodeLayerWidth + k * step);
  w.push_back(kCodeLayerWidth);
  for (int k = 1; k <= per_side; ++k) w.push_back(kCodeLayerWidth + k * step);
  w.push_back(out);
  return w;
}

// Smallest x >= 1 with count(x) >= p_lim, count nondecreasing in x.
template <typename CountFn>
int smallest_meeting(long p_lim, CountFn count) {
  if (count(1) >= p_lim) return 1;
  int lo = 1, hi = 2;
  while (count(hi) < p_lim) {
    lo = hi;
    if (hi > (1 << 28)) throw std::invalid_argument("size_layers: budget out of range");
    hi *= 2;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (count(mid) >= p_lim ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

SizingPlan size_layers(long p_lim, int depth, int input_dim, int output_dim, LayerFamily family) {
  if (p_lim < 1) throw std::invalid_argument("size_layers: p_lim must be >= 1");
  if (depth < 1) throw std::invalid_argument("size_layers: depth must be >= 1");
  if (input_dim < 1 || output_dim < 1)
    throw std::invalid_argument("size_layers: dimensions must be >= 1");

  SizingPlan plan;
  plan.p_lim = p_lim;
  plan.depth = depth;
  plan.input_dim = input_dim;
  plan.output_dim = output_dim;

  if (family == LayerFamily::Constant) {
    if (depth == 1) {
      plan.widths = {input_dim, output_dim};
      plan.realized_params = parameter_count(plan.widths);
      if (plan.realized_params < p_lim)
        throw std::invalid_argument("size_layers: depth-1 network has no free width to meet budget");
      return plan;
    }
    const int n = smallest_meeting(
        p_lim, [&](int x) { return parameter_count(constant_widths(x, depth, input_dim, output_dim)); });
    plan.widths = constant_widths(n, depth, input_dim, output_dim);
  } else {
    if (depth < 4 || depth % 2 != 0)
      throw std::invalid_argument("size_layers: autoencoder family needs even depth >= 4");
    const int c = smallest_meeting(
        p_lim, [&](int x) { return parameter_count(taper_widths(x, depth, input_dim, output_dim)); });
    plan.widths = taper_widths(c, depth, input_dim, output_dim);
  }
  plan.realized_params = parameter_count(plan.widths);
  return plan;
}

}  // namespace rwi
