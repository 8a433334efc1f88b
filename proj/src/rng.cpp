#include "rwi/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rwi {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

Rng Rng::split(std::uint64_t label) const {
  std::uint64_t x = seed_ ^ (0x9e3779b97f4a7c15ULL * (label + 1));
  std::uint64_t child = splitmix64(x);
  x = child;
  child = splitmix64(x);
  return Rng(child);
}

namespace detail {

double chi_square_sum_of_squares(int dof, Rng& rng) {
  double acc = 0.0;
  for (int i = 0; i < dof; ++i) {
    const double g = rng.gaussian();
    acc += g * g;
  }
  return acc;
}

double chi_square_gamma(int dof, Rng& rng) {
  // Marsaglia-Tsang for Gamma(alpha, 1) with alpha = dof/2 >= 1; chi2 = 2 * Gamma.
  const double alpha = 0.5 * static_cast<double>(dof);
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return 2.0 * d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return 2.0 * d * v;
  }
}

}  // namespace detail

double sample_chi_square(int dof, Rng& rng) {
  if (dof < 1) throw std::invalid_argument("sample_chi_square: dof must be >= 1");
  if (dof <= 32) return detail::chi_square_sum_of_squares(dof, rng);
  return detail::chi_square_gamma(dof, rng);
}

int sample_binomial(int n, double p, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_binomial: n must be >= 1");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("sample_binomial: p must be in [0, 1]");
  int count = 0;
  for (int i = 0; i < n; ++i)
    if (rng.uniform() < p) ++count;
  return count;
}

}  // namespace rwi
