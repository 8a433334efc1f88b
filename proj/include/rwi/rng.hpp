#pragma once

#include <array>
#include <cstdint>

namespace rwi {

/// Seeded, splittable random stream.
///
/// Core generator is xoshiro256++ with the state expanded from the seed via
/// splitmix64, so a stream is a pure function of its 64-bit seed on every
/// platform. Gaussian draws use the Marsaglia polar method (the spare value
/// is cached in the stream). split(label) derives an independent child
/// stream as a pure function of (seed, label), regardless of how much of the
/// parent stream has been consumed.
///
/// A stream has a single owner; parallel work takes split children rather
/// than sharing one stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53 random bits.
  double uniform();

  /// Standard normal draw (polar method).
  double gaussian();

  /// Independent child stream for the given label.
  Rng split(std::uint64_t label) const;

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// One chi-square draw with `dof` degrees of freedom. Small dof sums squared
/// normals; large dof uses Marsaglia-Tsang gamma sampling (statistically
/// equivalent, tested). Throws std::invalid_argument for dof = 0.
double sample_chi_square(int dof, Rng& rng);

/// Exposed for the small/large path equivalence tests.
namespace detail {
double chi_square_sum_of_squares(int dof, Rng& rng);
double chi_square_gamma(int dof, Rng& rng);
}  // namespace detail

/// One binomial(n, p) draw by counting n Bernoulli successes.
int sample_binomial(int n, double p, Rng& rng);

}  // namespace rwi
