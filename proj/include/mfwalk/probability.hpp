#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mfw {

/// Finite-support probability measure on the nonnegative integers.
///
/// `mass()[x]` is the probability of `x` for `0 <= x <= support_bound()`,
/// and `tail_bound()` is the mass carried beyond the support (zero for
/// exact finite measures, a certified remainder for truncated laws).
/// Construction checks that masses are nonnegative and that
/// sum(mass) + tail_bound lies within kMassTolerance of one.
class ProbabilityVector {
 public:
  static constexpr double kMassTolerance = 1e-12;

  ProbabilityVector();
  ProbabilityVector(std::vector<double> mass, double tail_bound);

  static ProbabilityVector point_mass(std::int64_t x);
  /// Normalizes nonnegative weights; the tail bound is taken as zero.
  static ProbabilityVector from_weights(std::vector<double> weights);

  std::int64_t support_bound() const { return static_cast<std::int64_t>(mass_.size()) - 1; }
  double tail_bound() const { return tail_; }
  std::span<const double> mass() const { return mass_; }

  /// P({x}); zero outside the stored support.
  double at(std::int64_t x) const;
  /// P([0, x]).
  double cdf(std::int64_t x) const;
  /// P([0, x)) with the convention P([0, 0)) = 0.
  double below(std::int64_t x) const;
  double total() const;
  double mean() const;

 private:
  std::vector<double> mass_;
  double tail_ = 0.0;
};

/// Total-variation distance between the stored parts of two measures.
double tv_distance(const ProbabilityVector& a, const ProbabilityVector& b);
double tv_distance(std::span<const double> a, std::span<const double> b);

/// Smallest m with mu[0, m] >= 1/2. Returns support_bound() + 1 if the
/// stored mass never reaches one half.
std::int64_t median(const ProbabilityVector& mu);

/// Stochastic order a <= b: a[0, x] >= b[0, x] - tol for every x.
bool stochastically_le(const ProbabilityVector& a, const ProbabilityVector& b,
                       double tol = 1e-12);

/// sum_{x>=1} mu[0, x-1] mu(x): probability that an independent pair
/// drawn from mu is strictly ordered, counted once.
double ordered_pair_mass(const ProbabilityVector& mu);

}  // namespace mfw
