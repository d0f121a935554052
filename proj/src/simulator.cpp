#include "mfwalk/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfwalk/nonlinear.hpp"

namespace mfw {

ParticleSystem::ParticleSystem(ModelSpec model, ParticleState state)
    : model_(std::move(model)), state_(std::move(state)) {
  model_.validate();
  model_.check_state(state_);
  for (Position x : state_.positions) ++occupancy_[x];
  for (const auto& [site, count] : occupancy_) sum_sq_ += count * count;
}

std::int64_t ParticleSystem::at_origin() const {
  const auto it = occupancy_.find(0);
  return it == occupancy_.end() ? 0 : it->second;
}

std::int64_t ParticleSystem::lower_pairs() const {
  const std::int64_t n = model_.n_particles;
  return (n * n - sum_sq_) / 2;
}

double ParticleSystem::clock_rate() const {
  const auto n = static_cast<double>(model_.n_particles);
  return n * (1.0 + model_.delta) + (n - static_cast<double>(at_origin())) +
         model_.lambda / n * static_cast<double>(lower_pairs());
}

ParticleSystem::Event ParticleSystem::sample(Rng& rng) const {
  const auto n = static_cast<std::uint64_t>(model_.n_particles);
  const double up = static_cast<double>(n) * (1.0 + model_.delta);
  const double down = static_cast<double>(n) - static_cast<double>(at_origin());
  const double rate = clock_rate();
  const bool thinned = !model_.kernel.always_activates();
  const auto& x = state_.positions;

  Event e;
  for (;;) {
    e.dwell += rng.exponential(rate);
    const double u = rng.uniform() * rate;
    if (u < up) {
      e.particle = rng.index(n);
      e.target = x[e.particle] + 1;
      return e;
    }
    if (u < up + down) {
      do {
        e.particle = rng.index(n);
      } while (x[e.particle] == 0);
      e.target = x[e.particle] - 1;
      return e;
    }
    if (lower_pairs() == 0) throw InternalError("interaction clock fired with no ordered pair");
    std::size_t i = 0;
    std::size_t k = 0;
    do {
      i = rng.index(n);
      k = rng.index(n);
    } while (!(x[k] < x[i]));
    if (thinned && !(rng.uniform() < model_.kernel.phi(x[i], x[k]))) continue;
    e.particle = i;
    e.target = x[i] - model_.kernel.psi(x[i], x[k]);
    return e;
  }
}

void ParticleSystem::move(std::size_t i, Position to) {
  const Position from = state_[i];
  auto it = occupancy_.find(from);
  sum_sq_ -= 2 * it->second - 1;
  if (--it->second == 0) occupancy_.erase(it);
  auto& c = occupancy_[to];
  sum_sq_ += 2 * c + 1;
  ++c;
  state_[i] = to;
}

void ParticleSystem::apply(const Event& e) {
  if (e.target < 0) throw InternalError("event would leave the nonnegative orthant");
  move(e.particle, e.target);
}

StepResult step(const ParticleState& state, const ModelSpec& model, Rng& rng) {
  ParticleSystem sys(model, state);
  const auto e = sys.sample(rng);
  if (!(e.dwell > 0.0)) throw InternalError("nonpositive dwell time");
  sys.apply(e);
  return {sys.state(), e.dwell};
}

std::int64_t run_until(ParticleSystem& system, double horizon, Rng& rng, std::int64_t max_events,
                       const HoldingObserver& observer) {
  double t = 0.0;
  std::int64_t events = 0;
  while (t < horizon) {
    const auto e = system.sample(rng);
    if (t + e.dwell >= horizon) {
      if (observer) observer(t, horizon - t, system.state());
      break;
    }
    if (observer) observer(t, e.dwell, system.state());
    if (events >= max_events) {
      throw BudgetExceeded("event budget of " + std::to_string(max_events) + " exceeded at t = " +
                               std::to_string(t),
                           Trajectory{});
    }
    t += e.dwell;
    system.apply(e);
    ++events;
  }
  return events;
}

Trajectory simulate(const ParticleState& init, const ModelSpec& model, double horizon,
                    std::uint64_t seed, const SimulationOptions& options) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InvalidInput("horizon must be finite and nonnegative");
  }
  ParticleSystem sys(model, init);
  Rng rng(seed);
  Trajectory traj;
  traj.horizon = horizon;
  traj.events.push_back({0.0, init});

  HoldingObserver observer;
  if (options.snapshots > 0) {
    const double dt = horizon / static_cast<double>(options.snapshots);
    observer = [&, next = std::int64_t{1}](double t, double dwell, const ParticleState& s) mutable {
      const double end = t + dwell;
      while (next <= options.snapshots &&
             (static_cast<double>(next) * dt < end || end >= horizon)) {
        traj.events.push_back({static_cast<double>(next) * dt, s});
        ++next;
      }
    };
  } else {
    observer = [&](double t, double, const ParticleState& s) {
      if (t > 0.0) traj.events.push_back({t, s});
    };
  }
  try {
    run_until(sys, horizon, rng, options.max_events, observer);
  } catch (const BudgetExceeded& e) {
    throw BudgetExceeded(e.what(), traj);
  }
  if (options.snapshots > 0) {
    while (static_cast<std::int64_t>(traj.events.size()) <= options.snapshots) {
      traj.events.push_back({horizon, sys.state()});
    }
  }
  return traj;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::ErgodicLooking:
      return "ergodic-looking";
    case Verdict::TransientLooking:
      return "transient-looking";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

RecurrenceDiagnosis recurrence_probe(const ModelSpec& model, const ParticleState& init,
                                     double horizon, const RecurrenceThresholds& thresholds,
                                     std::uint64_t seed, std::int64_t max_events) {
  if (!(horizon > 0.0)) throw InvalidInput("recurrence probe needs a positive horizon");
  if (thresholds.grid_points < 3) throw InvalidInput("need at least 3 grid points");
  ParticleSystem sys(model, init);
  Rng rng(seed);

  const double burn = thresholds.burn_in_fraction * horizon;
  const auto grid_n = thresholds.grid_points;
  const double grid_dt = (horizon - burn) / static_cast<double>(grid_n);
  std::vector<double> grid_t;
  std::vector<double> grid_min;
  grid_t.reserve(static_cast<std::size_t>(grid_n));
  grid_min.reserve(static_cast<std::size_t>(grid_n));

  std::vector<double> occupation;
  std::int64_t returns = 0;
  Position prev_min = -1;

  const auto events = run_until(
      sys, horizon, rng, max_events, [&](double t, double dwell, const ParticleState& s) {
        const Position m = *std::min_element(s.positions.begin(), s.positions.end());
        if (t >= burn && prev_min > 0 && m == 0) ++returns;
        prev_min = m;
        const double end = t + dwell;
        while (static_cast<std::int64_t>(grid_t.size()) < grid_n) {
          const double g = burn + static_cast<double>(grid_t.size()) * grid_dt;
          if (g >= end) break;
          grid_t.push_back(g);
          grid_min.push_back(static_cast<double>(m));
        }
        const double overlap = end - std::max(t, burn);
        if (overlap > 0.0) {
          for (Position x : s.positions) {
            if (static_cast<std::size_t>(x) >= occupation.size()) {
              occupation.resize(static_cast<std::size_t>(x) + 1, 0.0);
            }
            occupation[static_cast<std::size_t>(x)] += overlap;
          }
        }
      });

  RecurrenceDiagnosis d;
  d.events = events;
  d.returns_to_origin = returns;
  d.occupation = ProbabilityVector::from_weights(std::move(occupation));

  // ordinary least squares of the minimum against time
  const auto m = static_cast<double>(grid_t.size());
  double tbar = 0.0;
  double ybar = 0.0;
  for (std::size_t i = 0; i < grid_t.size(); ++i) {
    tbar += grid_t[i];
    ybar += grid_min[i];
  }
  tbar /= m;
  ybar /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < grid_t.size(); ++i) {
    sxx += (grid_t[i] - tbar) * (grid_t[i] - tbar);
    sxy += (grid_t[i] - tbar) * (grid_min[i] - ybar);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  double sse = 0.0;
  for (std::size_t i = 0; i < grid_t.size(); ++i) {
    const double r = grid_min[i] - ybar - slope * (grid_t[i] - tbar);
    sse += r * r;
  }
  const double se = sxx > 0.0 && m > 2.0 ? std::sqrt(sse / (m - 2.0) / sxx) : 0.0;
  d.min_position_slope = slope;
  if (se > 0.0) {
    d.slope_t_statistic = slope / se;
  } else {
    d.slope_t_statistic = slope > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }

  if (d.min_position_slope > thresholds.slope && d.slope_t_statistic > thresholds.t_statistic) {
    d.verdict = Verdict::TransientLooking;
  } else if (d.returns_to_origin >= thresholds.returns) {
    d.verdict = Verdict::ErgodicLooking;
  } else {
    d.verdict = Verdict::Inconclusive;
  }
  return d;
}

ParticleState sample_iid(const ProbabilityVector& mu, std::int64_t n, Rng& rng) {
  const auto mass = mu.mass();
  std::vector<double> cdf(mass.size());
  double c = 0.0;
  for (std::size_t x = 0; x < mass.size(); ++x) cdf[x] = (c += mass[x]);
  ParticleState s;
  s.positions.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * c;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto x = std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1);
    s.positions.push_back(x);
  }
  return s;
}

std::vector<ChaosPoint> chaos_distance(double delta, double lambda,
                                       const std::vector<std::int64_t>& n_list,
                                       const ProbabilityVector& mu0, double horizon,
                                       std::int64_t replicates, std::uint64_t seed,
                                       std::int64_t max_events) {
  if (replicates < 1) throw InvalidInput("need at least one replicate");
  if (!(horizon >= 0.0)) throw InvalidInput("horizon must be nonnegative");
  const ProbabilityVector target = evolve_law(mu0, delta, lambda, horizon);

  std::vector<ChaosPoint> out;
  for (std::int64_t n : n_list) {
    if (n < 2) throw InvalidInput("chaos harness needs N >= 2");
    const ModelSpec model = ModelSpec::small_jump(n, delta, lambda);
    // per-replicate empirical frequencies, stored sparsely by site
    std::vector<std::vector<double>> freq;
    freq.reserve(static_cast<std::size_t>(replicates));
    std::size_t width = 0;
    for (std::int64_t r = 0; r < replicates; ++r) {
      Rng rng = Rng::stream(seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)});
      ParticleSystem sys(model, sample_iid(mu0, n, rng));
      if (horizon > 0.0) run_until(sys, horizon, rng, max_events, nullptr);
      std::vector<double> f;
      for (Position x : sys.state().positions) {
        if (static_cast<std::size_t>(x) >= f.size()) f.resize(static_cast<std::size_t>(x) + 1, 0.0);
        f[static_cast<std::size_t>(x)] += 1.0 / static_cast<double>(n);
      }
      width = std::max(width, f.size());
      freq.push_back(std::move(f));
    }
    std::vector<double> pooled(width, 0.0);
    std::vector<double> sq(width, 0.0);
    for (const auto& f : freq) {
      for (std::size_t x = 0; x < f.size(); ++x) {
        pooled[x] += f[x];
        sq[x] += f[x] * f[x];
      }
    }
    const auto reps = static_cast<double>(replicates);
    double se = 0.0;
    for (std::size_t x = 0; x < width; ++x) {
      pooled[x] /= reps;
      if (replicates > 1) {
        const double var = std::max(0.0, (sq[x] / reps - pooled[x] * pooled[x]) * reps / (reps - 1.0));
        se += std::sqrt(var / reps);
      }
    }
    out.push_back({n, tv_distance(std::span<const double>(pooled), target.mass()), 0.5 * se});
  }
  return out;
}

CouplingReport coupled_domination(const ParticleState& init, const ModelSpec& dominated,
                                  double horizon, std::uint64_t seed, std::int64_t max_events) {
  dominated.validate();
  dominated.check_state(init);
  const auto n = static_cast<std::uint64_t>(dominated.n_particles);
  const double nd = static_cast<double>(n);
  const double up = nd * (1.0 + dominated.delta);
  const double down = nd;
  const double pairs = dominated.lambda * nd;  // N^2 clocks at rate lambda / N
  const double rate = up + down + pairs;

  std::vector<Position> x = init.positions;  // SmallJump
  std::vector<Position> y = init.positions;  // dominated model
  Rng rng(seed);
  CouplingReport report;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(rate);
    if (t >= horizon) break;
    if (report.events >= max_events) {
      throw BudgetExceeded("coupling event budget exceeded", Trajectory{});
    }
    ++report.events;
    const double u = rng.uniform() * rate;
    if (u < up) {
      const auto i = rng.index(n);
      ++x[i];
      ++y[i];
    } else if (u < up + down) {
      const auto i = rng.index(n);
      if (x[i] > 0) --x[i];
      if (y[i] > 0) --y[i];
    } else {
      const auto i = rng.index(n);
      const auto k = rng.index(n);
      const double mark = rng.uniform();
      if (x[k] < x[i]) --x[i];
      if (y[k] < y[i] && mark < dominated.kernel.phi(y[i], y[k])) {
        y[i] -= dominated.kernel.psi(y[i], y[k]);
      }
    }
    if (report.order_held) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[j] > x[j]) {
          report.order_held = false;
          report.first_violation_time = t;
          break;
        }
      }
    }
  }
  return report;
}

}  // namespace mfw
