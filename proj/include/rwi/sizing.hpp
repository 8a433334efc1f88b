#pragma once

#include <string>
#include <vector>

namespace rwi {

enum class LayerFamily { Constant, Autoencoder };

const char* to_string(LayerFamily f);
LayerFamily layer_family_from_string(const std::string& s);

/// Result of distributing a parameter budget over a fixed depth.
///
/// Parameter counting convention: every weight matrix (at its true input and
/// output dimensions) plus every bias vector. The realized count is the
/// smallest achievable total >= p_lim within the family:
///   constant:    [in, N, ..., N, out], smallest integer N
///   autoencoder: symmetric arithmetic taper to a 30-unit code layer,
///                [in, 30+K*c, ..., 30+c, 30, 30+c, ..., 30+K*c, out]
///                with K = depth/2 - 1 per side, smallest integer step c
struct SizingPlan {
  long p_lim = 0;
  int depth = 0;
  int input_dim = 0;
  int output_dim = 0;
  std::vector<int> widths;  // h_0 .. h_D, including input and output
  long realized_params = 0;
};

constexpr int kCodeLayerWidth = 30;

long parameter_count(const std::vector<int>& widths);

SizingPlan size_layers(long p_lim, int depth, int input_dim, int output_dim, LayerFamily family);

}  // namespace rwi
