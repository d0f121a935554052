#include "mfwalk/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "mfwalk/errors.hpp"
#include "mfwalk/gap_jackson.hpp"

namespace mfw {

std::vector<double> master_rhs(std::span<const double> mass, double delta, double lambda) {
  const std::size_t n = mass.size();
  std::vector<double> out(n, 0.0);
  const double up = 1.0 + delta;
  double below = 0.0;  // mu[0, x)
  for (std::size_t x = 0; x < n; ++x) {
    const double m = mass[x];
    const double below_next = below + m;
    double r = -up * m;
    if (x > 0) r += up * mass[x - 1] - (1.0 + lambda * below) * m;
    if (x + 1 < n) r += (1.0 + lambda * below_next) * mass[x + 1];
    out[x] = r;
    below = below_next;
  }
  return out;
}

double stationarity_residual(const ProbabilityVector& mu, double delta, double lambda) {
  const auto rhs = master_rhs(mu.mass(), delta, lambda);
  double r = (1.0 + delta) * mu.mass().back();  // inflow into the first unstored cell
  for (double v : rhs) r = std::max(r, std::abs(v));
  return r;
}

namespace {

// Adds a*x to y over the first x.size() entries.
void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

// State layout: cells [0, L] followed by the escaped mass.
std::vector<double> full_rhs(const std::vector<double>& y, double delta, double lambda) {
  const std::span<const double> cells(y.data(), y.size() - 1);
  auto out = master_rhs(cells, delta, lambda);
  out.push_back((1.0 + delta) * cells.back());
  return out;
}

std::vector<double> rk4(const std::vector<double>& y, double h, double delta, double lambda) {
  const auto k1 = full_rhs(y, delta, lambda);
  auto tmp = y;
  axpy(0.5 * h, k1, tmp);
  const auto k2 = full_rhs(tmp, delta, lambda);
  tmp = y;
  axpy(0.5 * h, k2, tmp);
  const auto k3 = full_rhs(tmp, delta, lambda);
  tmp = y;
  axpy(h, k3, tmp);
  const auto k4 = full_rhs(tmp, delta, lambda);
  auto out = y;
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

void check_rates(double delta, double lambda) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidInput("delta must be >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be >= 0");
}

}  // namespace

EvolveResult evolve_law_detailed(const ProbabilityVector& mu0, double delta, double lambda,
                                 double horizon, double tolerance, const EvolveOptions& options) {
  check_rates(delta, lambda);
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InvalidInput("horizon must be finite and nonnegative");
  }
  if (!(tolerance > 0.0)) throw InvalidInput("tolerance must be positive");
  EvolveResult result;
  result.law = mu0;
  result.escaped_mass = mu0.tail_bound();
  if (horizon == 0.0) return result;

  const double h_max = 0.5 / (2.0 + delta + lambda);
  // keeping the edge cell below this level bounds the escaped mass by
  // about tolerance / 1000 over the whole run
  const double edge_level = tolerance * 1e-3 / std::max(1.0, horizon * (1.0 + delta));

  std::vector<double> y(mu0.mass().begin(), mu0.mass().end());
  y.resize(y.size() + 16, 0.0);
  y.push_back(mu0.tail_bound());

  auto extend_if_needed = [&] {
    const std::size_t cells = y.size() - 1;
    const std::size_t probe = std::min<std::size_t>(4, cells);
    double edge = 0.0;
    for (std::size_t i = cells - probe; i < cells; ++i) edge = std::max(edge, std::abs(y[i]));
    if (edge <= edge_level) return;
    const std::size_t grow = std::max<std::size_t>(16, cells / 2);
    if (static_cast<std::int64_t>(cells + grow) > options.hard_cap) {
      throw TruncationOverflow("law support would exceed " + std::to_string(options.hard_cap) +
                               " cells; mass is escaping to infinity");
    }
    const double escaped = y.back();
    y.back() = 0.0;
    y.resize(cells + grow, 0.0);
    y.push_back(escaped);
  };

  double t = 0.0;
  double h = h_max;
  while (t < horizon) {
    extend_if_needed();
    const double step = std::min(h, horizon - t);
    const auto full = rk4(y, step, delta, lambda);
    const auto half = rk4(rk4(y, 0.5 * step, delta, lambda), 0.5 * step, delta, lambda);
    double err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) err = std::max(err, std::abs(full[i] - half[i]));
    err /= 15.0;
    const double allowed = options.step_tolerance * step;
    if (err > allowed && step > 1e-12) {
      ++result.rejected_steps;
      h = step * std::max(0.2, 0.9 * std::pow(allowed / err, 0.2));
      continue;
    }
    // Richardson extrapolation of the two estimates
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = half[i] + (half[i] - full[i]) / 15.0;
    t += step;
    ++result.steps;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) result.min_entry = std::min(result.min_entry, y[i]);
    const double grow = err > 0.0 ? 0.9 * std::pow(allowed / err, 0.2) : 2.0;
    h = std::min(h_max, step * std::clamp(grow, 0.2, 2.0));
    if (step < h_max && t < horizon) h = std::max(h, std::min(h_max, step));
  }

  std::vector<double> cells(y.begin(), y.end() - 1);
  for (double& c : cells) c = std::max(c, 0.0);
  while (cells.size() > 1 && cells.back() == 0.0) cells.pop_back();
  double escaped = std::max(0.0, y.back());
  double sum = 0.0;
  for (double c : cells) sum += c;
  // absorb the clipped round-off so the law stays a probability vector
  if (std::abs(sum + escaped - 1.0) > 0.5 * ProbabilityVector::kMassTolerance) {
    for (double& c : cells) c /= (sum + escaped);
    escaped /= (sum + escaped);
  }
  result.escaped_mass = escaped;
  result.law = ProbabilityVector(std::move(cells), escaped);
  return result;
}

ProbabilityVector evolve_law(const ProbabilityVector& mu0, double delta, double lambda,
                             double horizon, double tolerance, const EvolveOptions& options) {
  return evolve_law_detailed(mu0, delta, lambda, horizon, tolerance, options).law;
}

namespace {

// Birth-death law from log step ratios log(pi(x+1)/pi(x)); the ratio is
// constant from `flat_from` on, with value exp(flat_log_ratio) < 1.
ProbabilityVector birth_death_law(const std::function<double(std::int64_t)>& log_ratio,
                                  std::int64_t flat_from, double flat_log_ratio,
                                  double tolerance, std::int64_t hard_cap) {
  const double r = std::exp(flat_log_ratio);
  const double log_tail_factor = flat_log_ratio - std::log1p(-r);  // r / (1 - r)
  std::vector<double> logw{0.0};
  double top = 0.0;
  double scaled_sum = 1.0;  // sum exp(logw - top)
  for (std::int64_t x = 0;; ++x) {
    if (x >= flat_from) {
      const double log_tail = logw.back() + log_tail_factor - top;
      if (log_tail <= std::log(tolerance) + std::log(scaled_sum)) break;
    }
    if (static_cast<std::int64_t>(logw.size()) >= hard_cap) {
      throw TruncationOverflow("stationary law needs more than " + std::to_string(hard_cap) +
                               " cells");
    }
    const double next = logw.back() + (x >= flat_from ? flat_log_ratio : log_ratio(x));
    logw.push_back(next);
    if (next > top) {
      scaled_sum *= std::exp(top - next);
      top = next;
    }
    scaled_sum += std::exp(next - top);
  }
  std::vector<double> mass(logw.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) sum += mass[i] = std::exp(logw[i] - top);
  const double tail = std::exp(logw.back() - top + log_tail_factor);
  const double z = sum + tail;
  for (double& m : mass) m /= z;
  return ProbabilityVector(std::move(mass), tail / z);
}

}  // namespace

ProbabilityVector bd_stationary(const ProbabilityVector& mu, double delta, double lambda,
                                double tolerance, std::int64_t hard_cap) {
  check_rates(delta, lambda);
  if (!(lambda > delta)) {
    throw NonErgodicParameter("birth-death chain needs lambda > delta to be positive recurrent");
  }
  if (!(tolerance > 0.0)) throw InvalidInput("tolerance must be positive");
  const auto mass = mu.mass();
  std::vector<double> below(mass.size() + 1, 0.0);  // below[h] = mu[0, h)
  for (std::size_t h = 0; h < mass.size(); ++h) below[h + 1] = below[h] + mass[h];
  const double stored = below.back();
  const double log_up = std::log1p(delta);
  const double flat = log_up - std::log1p(lambda * stored);
  if (!(flat < 0.0)) {
    throw NonErgodicParameter("stored mass too small for a positive recurrent chain");
  }
  const auto flat_from = static_cast<std::int64_t>(mass.size());
  return birth_death_law(
      [&](std::int64_t x) {
        return log_up - std::log1p(lambda * below[static_cast<std::size_t>(x) + 1]);
      },
      flat_from, flat, tolerance, hard_cap);
}

ProbabilityVector dominating_pi_m(std::int64_t m, double delta, double lambda, double tolerance) {
  check_rates(delta, lambda);
  if (m < 0) throw InvalidInput("m must be nonnegative");
  if (!(lambda > 2.0 * delta)) {
    throw NonErgodicParameter("dominating chain is not normalizable unless lambda > 2 delta");
  }
  const double log_up = std::log1p(delta);
  return birth_death_law([&](std::int64_t) { return log_up; }, m,
                         log_up - std::log1p(0.5 * lambda), tolerance, 1'000'000'000);
}

std::int64_t find_m_star(double delta, double lambda) {
  check_rates(delta, lambda);
  if (delta == 0.0) {
    if (!(lambda > 0.0)) throw NonErgodicParameter("find_m_star needs lambda > 0 at delta = 0");
    for (std::int64_t m = 0;; ++m) {
      if (median(dominating_pi_m(m, delta, lambda)) <= m) return m;
    }
  }
  if (!(lambda > 4.0 * delta)) {
    throw NonErgodicParameter("median condition is unsatisfiable unless lambda > 4 delta");
  }
  const double lhs = (0.5 * lambda - 2.0 * delta) / (0.5 * lambda - delta);
  const auto holds = [&](std::int64_t m) {
    return lhs > std::pow(1.0 + delta, -static_cast<double>(m + 1));
  };
  const double q = (0.5 * lambda - delta) / (0.5 * lambda - 2.0 * delta);
  auto m = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(std::log(q) / std::log1p(delta))));
  while (m > 0 && holds(m - 1)) --m;
  while (!holds(m)) ++m;
  if (median(dominating_pi_m(m, delta, lambda)) > m) {
    throw InternalError("median post-check failed for m* = " + std::to_string(m));
  }
  return m;
}

Regime nonlinear_regime(double delta, double lambda) {
  if (lambda > 4.0 * delta) return Regime::ProvenExistence;
  if (lambda > 2.0 * delta) return Regime::Open;
  return Regime::ProvenNonexistence;
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::ProvenExistence:
      return "proven-existence";
    case Regime::Open:
      return "outside-proven-regime";
    case Regime::ProvenNonexistence:
      return "proven-nonexistence";
  }
  return "outside-proven-regime";
}

namespace {

ProbabilityVector mix(const ProbabilityVector& a, const ProbabilityVector& b, double w) {
  const auto am = a.mass();
  const auto bm = b.mass();
  std::vector<double> out(std::max(am.size(), bm.size()), 0.0);
  for (std::size_t i = 0; i < am.size(); ++i) out[i] += (1.0 - w) * am[i];
  for (std::size_t i = 0; i < bm.size(); ++i) out[i] += w * bm[i];
  return ProbabilityVector(std::move(out), (1.0 - w) * a.tail_bound() + w * b.tail_bound());
}

}  // namespace

FixedPointReport gamma_fixed_point(double delta, double lambda, const ProbabilityVector& mu0,
                                   const FixedPointOptions& options) {
  check_rates(delta, lambda);
  if (!(lambda > delta)) {
    throw NonErgodicParameter("Gamma is undefined unless lambda > delta");
  }
  if (options.max_iterations < 0) throw InvalidInput("max_iterations must be nonnegative");
  FixedPointReport report;
  report.regime = nonlinear_regime(delta, lambda);
  report.measure = mu0;
  report.median_history.push_back(median(mu0));

  double previous_tv = std::numeric_limits<double>::infinity();
  std::int64_t rising = 0;
  for (std::int64_t k = 0; k < options.max_iterations; ++k) {
    const auto image =
        bd_stationary(report.measure, delta, lambda, options.law_tolerance, options.hard_cap);
    const double tv = tv_distance(image, report.measure);
    report.measure = report.damped ? mix(report.measure, image, options.mixing) : image;
    report.iterations = k + 1;
    report.final_step_tv = tv;
    report.median_history.push_back(median(report.measure));
    if (tv <= options.tolerance) break;
    rising = tv > previous_tv ? rising + 1 : 0;
    if (!report.damped && options.oscillation_window > 0 && rising >= options.oscillation_window) {
      report.damped = true;
    }
    previous_tv = tv;
  }
  report.converged = report.iterations > 0 && report.final_step_tv <= options.tolerance;
  report.stationarity_residual = stationarity_residual(report.measure, delta, lambda);
  report.ordered_pair_mass = ordered_pair_mass(report.measure);
  report.mean_identity_residual = std::abs(delta - lambda * report.ordered_pair_mass);
  report.reflected_identity_residual =
      std::abs(delta + report.measure.at(0) - lambda * report.ordered_pair_mass);
  return report;
}

ExistenceBounds existence_bounds(double delta) {
  check_rates(delta, 0.0);
  return {2.0 * delta, 4.0 * delta, conjectured_critical_limit(delta)};
}

}  // namespace mfw
