#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mfwalk/errors.hpp"
#include "mfwalk/model.hpp"
#include "mfwalk/probability.hpp"
#include "mfwalk/rng.hpp"

namespace mfw {

/// Particle configuration with the bookkeeping needed to draw events in
/// expected O(1) time per event.
///
/// Occupancy counts give the number of ordered pairs (i, k) with
/// x_k < x_i as (N^2 - sum_v occ(v)^2) / 2, which bounds the interaction
/// rate by lambda / N per pair. Events are drawn by competing clocks over
/// that bound: the acting particle of an intrinsic down-jump, and the
/// acting pair of an interaction, are found by rejection, and pairs with
/// phi < 1 are thinned. Rejection costs are bounded in expectation by
/// 1 / (1 + delta) and lambda / (1 + delta) draws per event.
class ParticleSystem {
 public:
  struct Event {
    double dwell = 0.0;
    std::size_t particle = 0;
    Position target = 0;
  };

  ParticleSystem(ModelSpec model, ParticleState state);

  const ParticleState& state() const { return state_; }
  const ModelSpec& model() const { return model_; }
  Position min_position() const { return occupancy_.begin()->first; }
  std::int64_t at_origin() const;
  /// Ordered pairs (i, k) with x_k < x_i.
  std::int64_t lower_pairs() const;
  /// Rate of the dominating clock; exact total rate when phi == 1.
  double clock_rate() const;

  /// Draws the next effective event without applying it. The dwell
  /// includes any thinned (null) clock rings.
  Event sample(Rng& rng) const;
  void apply(const Event& e);

 private:
  void move(std::size_t i, Position to);

  ModelSpec model_;
  ParticleState state_;
  std::map<Position, std::int64_t> occupancy_;
  std::int64_t sum_sq_ = 0;
};

struct StepResult {
  ParticleState next;
  double dwell = 0.0;
};

/// One jump of the continuous-time chain: dwell ~ Exp(total rate) and the
/// target drawn proportionally to the transition rates.
StepResult step(const ParticleState& state, const ModelSpec& model, Rng& rng);

struct TrajectoryPoint {
  double time = 0.0;
  ParticleState state;
};

struct Trajectory {
  std::vector<TrajectoryPoint> events;
  double horizon = 0.0;
};

/// Raised when a run exceeds its event budget; carries what was simulated.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

struct SimulationOptions {
  std::int64_t max_events = 100'000'000;
  /// When > 0, record the state on the grid j * horizon / snapshots
  /// instead of at every event.
  std::int64_t snapshots = 0;
};

Trajectory simulate(const ParticleState& init, const ModelSpec& model, double horizon,
                    std::uint64_t seed, const SimulationOptions& options = {});

/// Runs the chain to `horizon`, reporting each holding interval
/// [t, t + dwell) of `state`. Returns the number of jumps.
using HoldingObserver = std::function<void(double t, double dwell, const ParticleState& state)>;
std::int64_t run_until(ParticleSystem& system, double horizon, Rng& rng,
                       std::int64_t max_events, const HoldingObserver& observer);

struct RecurrenceThresholds {
  double slope = 0.01;
  double t_statistic = 5.0;
  std::int64_t returns = 50;
  double burn_in_fraction = 0.1;
  std::int64_t grid_points = 2000;
};

enum class Verdict { ErgodicLooking, TransientLooking, Inconclusive };
std::string to_string(Verdict v);

struct RecurrenceDiagnosis {
  Verdict verdict = Verdict::Inconclusive;
  double min_position_slope = 0.0;
  double slope_t_statistic = 0.0;
  std::int64_t returns_to_origin = 0;
  /// Time-averaged single-particle marginal after burn-in.
  ProbabilityVector occupation;
  std::int64_t events = 0;
};

/// Empirical ergodic/transient classifier from one long run.
///
/// Transient-looking when the least-squares slope of min_i x_i(t) after
/// burn-in exceeds `slope` with t-statistic above `t_statistic`;
/// ergodic-looking when the minimum returns to 0 at least `returns` times
/// after burn-in; inconclusive otherwise.
RecurrenceDiagnosis recurrence_probe(const ModelSpec& model, const ParticleState& init,
                                     double horizon, const RecurrenceThresholds& thresholds,
                                     std::uint64_t seed,
                                     std::int64_t max_events = 100'000'000);

struct ChaosPoint {
  std::int64_t n = 0;
  double tv = 0.0;
  /// Plug-in standard error of the pooled one-particle marginal.
  double standard_error = 0.0;
};

/// Distance between the one-particle marginal at `horizon` of the
/// N-particle SmallJump system started i.i.d. from mu0 (pooled over
/// particles and replicates) and the nonlinear law mu_horizon.
std::vector<ChaosPoint> chaos_distance(double delta, double lambda,
                                       const std::vector<std::int64_t>& n_list,
                                       const ProbabilityVector& mu0, double horizon,
                                       std::int64_t replicates, std::uint64_t seed,
                                       std::int64_t max_events = 100'000'000);

/// Draws N i.i.d. positions from the stored part of mu.
ParticleState sample_iid(const ProbabilityVector& mu, std::int64_t n, Rng& rng);

struct CouplingReport {
  std::int64_t events = 0;
  bool order_held = true;
  double first_violation_time = -1.0;
};

/// Drives a SmallJump system X and a second model Y from the same state
/// with shared clocks: per-particle up (1 + delta) and down (1) clocks and
/// per-ordered-pair clocks (lambda / N) with a uniform mark u; the pair
/// (i, k) moves X_i down by one when X_k < X_i and moves Y_i down by
/// psi(Y_i, Y_k) when Y_k < Y_i and u < phi(Y_i, Y_k). Checks Y <= X
/// componentwise after every event.
CouplingReport coupled_domination(const ParticleState& init, const ModelSpec& dominated,
                                  double horizon, std::uint64_t seed,
                                  std::int64_t max_events = 100'000'000);

}  // namespace mfw
