#include "mfwalk/probability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mfwalk/errors.hpp"

namespace mfw {

ProbabilityVector::ProbabilityVector() : mass_{1.0}, tail_(0.0) {}

ProbabilityVector::ProbabilityVector(std::vector<double> mass, double tail_bound)
    : mass_(std::move(mass)), tail_(tail_bound) {
  if (mass_.empty()) throw InvalidInput("probability vector needs at least one entry");
  if (!(tail_ >= 0.0) || !std::isfinite(tail_)) {
    throw InvalidInput("tail bound must be a finite nonnegative number");
  }
  for (double m : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw InvalidInput("probability masses must be finite and nonnegative");
    }
  }
  const double sum = total() + tail_;
  if (std::abs(sum - 1.0) > kMassTolerance) {
    throw InvalidInput("probability vector mass plus tail is " + std::to_string(sum) +
                       ", expected 1");
  }
}

ProbabilityVector ProbabilityVector::point_mass(std::int64_t x) {
  if (x < 0) throw InvalidInput("point mass location must be nonnegative");
  std::vector<double> m(static_cast<std::size_t>(x) + 1, 0.0);
  m.back() = 1.0;
  return ProbabilityVector(std::move(m), 0.0);
}

ProbabilityVector ProbabilityVector::from_weights(std::vector<double> weights) {
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("weights must be nonnegative");
    s += w;
  }
  if (!(s > 0.0)) throw InvalidInput("weights sum to zero");
  for (double& w : weights) w /= s;
  // trailing zeros carry no information
  while (weights.size() > 1 && weights.back() == 0.0) weights.pop_back();
  return ProbabilityVector(std::move(weights), 0.0);
}

double ProbabilityVector::at(std::int64_t x) const {
  if (x < 0 || x > support_bound()) return 0.0;
  return mass_[static_cast<std::size_t>(x)];
}

double ProbabilityVector::cdf(std::int64_t x) const {
  if (x < 0) return 0.0;
  const auto end = static_cast<std::size_t>(std::min<std::int64_t>(x, support_bound()) + 1);
  return std::accumulate(mass_.begin(), mass_.begin() + static_cast<std::ptrdiff_t>(end), 0.0);
}

double ProbabilityVector::below(std::int64_t x) const { return cdf(x - 1); }

double ProbabilityVector::total() const {
  return std::accumulate(mass_.begin(), mass_.end(), 0.0);
}

double ProbabilityVector::mean() const {
  double m = 0.0;
  for (std::size_t x = 0; x < mass_.size(); ++x) m += static_cast<double>(x) * mass_[x];
  return m;
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ai = i < a.size() ? a[i] : 0.0;
    const double bi = i < b.size() ? b[i] : 0.0;
    s += std::abs(ai - bi);
  }
  return 0.5 * s;
}

double tv_distance(const ProbabilityVector& a, const ProbabilityVector& b) {
  return tv_distance(a.mass(), b.mass());
}

std::int64_t median(const ProbabilityVector& mu) {
  double c = 0.0;
  const auto m = mu.mass();
  for (std::size_t x = 0; x < m.size(); ++x) {
    c += m[x];
    if (c >= 0.5) return static_cast<std::int64_t>(x);
  }
  return mu.support_bound() + 1;
}

bool stochastically_le(const ProbabilityVector& a, const ProbabilityVector& b, double tol) {
  const auto ma = a.mass();
  const auto mb = b.mass();
  const std::size_t n = std::max(ma.size(), mb.size());
  double ca = 0.0;
  double cb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ca += i < ma.size() ? ma[i] : 0.0;
    cb += i < mb.size() ? mb[i] : 0.0;
    if (ca < cb - tol) return false;
  }
  return true;
}

double ordered_pair_mass(const ProbabilityVector& mu) {
  const auto m = mu.mass();
  double cum = 0.0;
  double s = 0.0;
  for (std::size_t x = 0; x < m.size(); ++x) {
    s += cum * m[x];
    cum += m[x];
  }
  return s;
}

}  // namespace mfw
