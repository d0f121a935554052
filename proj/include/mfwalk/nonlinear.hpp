#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfwalk/probability.hpp"

namespace mfw {

// Law of the nonlinear (mean-field) walk: up at rate 1 + delta, down at
// rate 1 + lambda mu_t[0, x) away from 0, where mu_t is its own law.

/// Right-hand side of the master equation on cells [0, L]:
///   (1+delta) mu(x-1) - (1+delta) mu(x) - 1(x>0) (1 + lambda mu[0,x)) mu(x)
///   + (1 + lambda mu[0,x+1)) mu(x+1).
/// Mass moving up out of cell L leaves the system.
std::vector<double> master_rhs(std::span<const double> mass, double delta, double lambda);

/// max_x |master_rhs(mu)(x)|; zero exactly at stationary laws.
double stationarity_residual(const ProbabilityVector& mu, double delta, double lambda);

struct EvolveOptions {
  /// Richardson local error allowed per unit time.
  double step_tolerance = 1e-9;
  std::int64_t hard_cap = 1'000'000;
};

struct EvolveResult {
  ProbabilityVector law;
  std::int64_t steps = 0;
  std::int64_t rejected_steps = 0;
  /// Mass that left the truncation; also stored as law.tail_bound().
  double escaped_mass = 0.0;
  /// Most negative entry seen in an accepted step (0 when none).
  double min_entry = 0.0;
};

/// Integrates the master equation from mu0 to `horizon` with an explicit
/// RK4 step, step doubling for error control and step size at most
/// 0.5 / (2 + delta + lambda). The support is extended whenever the last
/// cells hold non-negligible mass, so that the escaped mass stays below
/// `tolerance`. Throws TruncationOverflow past options.hard_cap cells.
EvolveResult evolve_law_detailed(const ProbabilityVector& mu0, double delta, double lambda,
                                 double horizon, double tolerance = 1e-12,
                                 const EvolveOptions& options = {});

ProbabilityVector evolve_law(const ProbabilityVector& mu0, double delta, double lambda,
                             double horizon, double tolerance = 1e-12,
                             const EvolveOptions& options = {});

/// Stationary law of the birth-death chain with up-rate 1 + delta and
/// down-rate 1 + lambda mu[0, x) at x >= 1, from detailed balance:
///   pi(x + 1) / pi(x) = (1 + delta) / (1 + lambda mu[0, x + 1)).
/// Past the support of mu the ratio is constant, so the remainder is an
/// exact geometric tail; the support is cut once that tail is below
/// `tolerance`, and tail_bound() holds it.
/// Throws NonErgodicParameter when lambda <= delta.
ProbabilityVector bd_stationary(const ProbabilityVector& mu, double delta, double lambda,
                                double tolerance = 1e-15, std::int64_t hard_cap = 1'000'000);

/// Stationary law of the chain with extra down-rate lambda / 2 above m:
/// proportional to (1+delta)^x up to m, then geometric with ratio
/// (1+delta) / (1+lambda/2). Throws NonErgodicParameter when lambda <= 2 delta.
ProbabilityVector dominating_pi_m(std::int64_t m, double delta, double lambda,
                                  double tolerance = 1e-15);

/// Smallest m with med(dominating_pi_m(m)) <= m.
///
/// For delta > 0 this is the smallest m with
///   (lambda/2 - 2 delta) / (lambda/2 - delta) > (1 + delta)^-(m+1),
/// which needs lambda > 4 delta; at delta = 0 the inequality is never
/// strict and the median is searched directly.
std::int64_t find_m_star(double delta, double lambda);

enum class Regime {
  ProvenExistence,     // lambda > 4 delta
  Open,                // 2 delta < lambda <= 4 delta
  ProvenNonexistence,  // lambda <= 2 delta
};
Regime nonlinear_regime(double delta, double lambda);
const char* to_string(Regime r);

struct FixedPointOptions {
  std::int64_t max_iterations = 1000;
  double tolerance = 1e-10;
  /// Tail tolerance used for each bd_stationary evaluation.
  double law_tolerance = 1e-15;
  std::int64_t hard_cap = 1'000'000;
  /// Switch to mu <- (mu + Gamma(mu)) / 2 once step TVs stop decreasing
  /// for this many consecutive iterations.
  std::int64_t oscillation_window = 5;
  double mixing = 0.5;
};

struct FixedPointReport {
  ProbabilityVector measure;
  std::int64_t iterations = 0;
  double final_step_tv = 0.0;
  bool converged = false;
  bool damped = false;
  Regime regime = Regime::ProvenExistence;
  double stationarity_residual = 0.0;
  /// sum_{x>=1} mu[0, x-1] mu(x).
  double ordered_pair_mass = 0.0;
  /// |delta - lambda * ordered_pair_mass|.
  double mean_identity_residual = 0.0;
  /// |delta + mu(0) - lambda * ordered_pair_mass|: the drift of the
  /// identity under L^mu including the suppressed down-jump at 0.
  double reflected_identity_residual = 0.0;
  /// Median of every iterate, starting with mu0.
  std::vector<std::int64_t> median_history;
};

/// Iterates mu <- Gamma(mu) = bd_stationary(mu) from mu0 until the TV step
/// is at most options.tolerance or max_iterations is reached.
/// Throws NonErgodicParameter when lambda <= delta; TruncationOverflow
/// propagates from bd_stationary.
FixedPointReport gamma_fixed_point(double delta, double lambda, const ProbabilityVector& mu0,
                                   const FixedPointOptions& options = {});

struct ExistenceBounds {
  double no_stationary_below = 0.0;  // 2 delta
  double stationary_above = 0.0;     // 4 delta
  double conjectured = 0.0;          // limit root of the Jackson conjecture
};
ExistenceBounds existence_bounds(double delta);

}  // namespace mfw
