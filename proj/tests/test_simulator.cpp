#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "mfwalk/gap_jackson.hpp"
#include "mfwalk/nonlinear.hpp"
#include "mfwalk/simulator.hpp"

using namespace mfw;
using Catch::Approx;

namespace {

KernelTable half_activation_table(Position x_max) {
  KernelTable t;
  t.x_max = x_max;
  const auto w = static_cast<std::size_t>(x_max + 1);
  t.phi.assign(w * w, 0.5);
  t.psi.assign(w * w, 1);
  for (Position x = 0; x <= x_max; ++x) {
    for (Position y = 0; y <= x_max; ++y) {
      t.psi[static_cast<std::size_t>(x) * w + static_cast<std::size_t>(y)] =
          std::max<Position>(1, std::abs(x - y));
    }
  }
  return t;
}

// Empirical law of the next event against the rates of jump_rates.
void check_sampler_against_rates(const ModelSpec& model, const ParticleState& state,
                                 std::uint64_t seed) {
  std::map<std::vector<Position>, double> expected;
  double total = 0.0;
  for (const auto& t : jump_rates(state, model)) {
    expected[t.target.positions] += t.rate;
    total += t.rate;
  }
  ParticleSystem sys(model, state);
  Rng rng(seed);
  const int draws = 400000;
  std::map<std::vector<Position>, double> seen;
  double dwell = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto e = sys.sample(rng);
    auto next = state;
    next[e.particle] = e.target;
    seen[next.positions] += 1.0;
    dwell += e.dwell;
  }
  CHECK(dwell / draws == Approx(1.0 / total).epsilon(0.01));
  for (const auto& [target, rate] : expected) {
    const double p = rate / total;
    const double se = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(seen[target] / draws - p) < 5 * se + 1e-12);
  }
  double seen_total = 0.0;
  for (const auto& [target, count] : seen) {
    CHECK(expected.count(target) == 1);
    seen_total += count;
  }
  CHECK(seen_total == draws);
}

}  // namespace

TEST_CASE("event sampler matches the generator", "[simulator][sampler]") {
  check_sampler_against_rates(ModelSpec::small_jump(4, 0.3, 2.5), ParticleState{{0, 3, 3, 5}}, 1);
  check_sampler_against_rates(ModelSpec::jump_to_lower(4, 0.0, 4.0), ParticleState{{0, 3, 3, 5}}, 2);
  check_sampler_against_rates(ModelSpec::small_jump(3, 0.0, 1.0), ParticleState{{0, 0, 0}}, 3);

  ModelSpec thinned{5, 0.2, 3.0, Kernel::tabulated(half_activation_table(20))};
  check_sampler_against_rates(thinned, ParticleState{{1, 4, 4, 7, 0}}, 4);
}

TEST_CASE("step from the corner state", "[simulator][step]") {
  const auto model = ModelSpec::small_jump(2, 0.0, 2.0);
  Rng rng(9);
  const int draws = 100000;
  double dwell = 0.0;
  int first = 0;
  for (int i = 0; i < draws; ++i) {
    const auto r = step(ParticleState{{0, 0}}, model, rng);
    dwell += r.dwell;
    if (r.next.positions == std::vector<Position>{1, 0}) ++first;
    else REQUIRE(r.next.positions == std::vector<Position>{0, 1});
  }
  CHECK(dwell / draws == Approx(0.5).epsilon(0.02));
  CHECK(first / double(draws) == Approx(0.5).margin(0.01));
}

TEST_CASE("step from (0,1) normalizes the rates", "[simulator][step]") {
  const auto model = ModelSpec::small_jump(2, 0.0, 2.0);
  Rng rng(10);
  std::map<std::vector<Position>, int> counts;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) ++counts[step(ParticleState{{0, 1}}, model, rng).next.positions];
  CHECK(counts[{0, 0}] / double(draws) == Approx(0.5).margin(0.006));
  CHECK(counts[{1, 1}] / double(draws) == Approx(0.25).margin(0.006));
  CHECK(counts[{0, 2}] / double(draws) == Approx(0.25).margin(0.006));
}

TEST_CASE("step is deterministic given the stream", "[simulator][step]") {
  const auto model = ModelSpec::jump_to_lower(3, 0.5, 3.0);
  auto run = [&] {
    Rng rng(42);
    ParticleState s{{0, 2, 5}};
    std::vector<std::pair<ParticleState, double>> path;
    for (int i = 0; i < 10; ++i) {
      auto r = step(s, model, rng);
      s = r.next;
      path.emplace_back(s, r.dwell);
    }
    return path;
  };
  CHECK(run() == run());
}

TEST_CASE("trajectories are reproducible and well formed", "[simulator][simulate]") {
  const auto model = ModelSpec::jump_to_lower(4, 0.2, 2.0);
  const ParticleState init{{0, 0, 2, 3}};
  const auto a = simulate(init, model, 30.0, 77);
  const auto b = simulate(init, model, 30.0, 77);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].time == b.events[i].time);
    CHECK(a.events[i].state == b.events[i].state);
  }
  REQUIRE(a.events.front().time == 0.0);
  CHECK(a.events.front().state == init);
  for (std::size_t i = 1; i < a.events.size(); ++i) {
    CHECK(a.events[i].time > a.events[i - 1].time);
    CHECK(a.events[i].time <= 30.0);
    const auto& from = a.events[i - 1].state;
    bool reachable = false;
    for (const auto& t : jump_rates(from, model)) reachable = reachable || t.target == a.events[i].state;
    CHECK(reachable);
  }
}

TEST_CASE("zero horizon keeps only the initial state", "[simulator][simulate]") {
  const auto traj = simulate(ParticleState{{1, 2}}, ModelSpec::small_jump(2, 0, 1), 0.0, 1);
  REQUIRE(traj.events.size() == 1);
  CHECK(traj.events[0].state.positions == std::vector<Position>{1, 2});
}

TEST_CASE("snapshots land on the time grid", "[simulator][simulate]") {
  SimulationOptions opts;
  opts.snapshots = 10;
  const auto traj = simulate(ParticleState{{0, 0, 0}}, ModelSpec::small_jump(3, 0, 1), 5.0, 3, opts);
  REQUIRE(traj.events.size() == 11);
  for (std::size_t j = 0; j < traj.events.size(); ++j) CHECK(traj.events[j].time == Approx(0.5 * j));
}

TEST_CASE("event budget carries the partial trajectory", "[simulator][simulate]") {
  SimulationOptions opts;
  opts.max_events = 50;
  try {
    simulate(ParticleState{{0, 0}}, ModelSpec::small_jump(2, 0, 1), 1e9, 5, opts);
    FAIL("no budget error");
  } catch (const BudgetExceeded& e) {
    CHECK(e.partial().events.size() >= 2);
    CHECK(e.partial().events.size() <= 51);
  }
}

TEST_CASE("single reflected walk drifts at rate delta", "[simulator][simulate]") {
  const double horizon = 20000.0;
  const auto traj = simulate(ParticleState{{0}}, ModelSpec::small_jump(1, 0.5, 7.0), horizon, 12,
                             {.max_events = 100'000'000, .snapshots = 1});
  const double slope = static_cast<double>(traj.events.back().state[0]) / horizon;
  CHECK(slope == Approx(0.5).epsilon(0.1));
}

TEST_CASE("two-particle minimum follows the exact gap law", "[simulator][simulate]") {
  const double delta = 0.0;
  const double lambda = 2.0;
  const auto law = pi2(delta, lambda);
  std::vector<double> exact(40, 0.0);
  for (std::int64_t x = 0; x < 40; ++x) {
    for (std::int64_t y = 0; y < 200; ++y) exact[static_cast<std::size_t>(x)] += law.value(x, y);
  }
  ParticleSystem sys(ModelSpec::small_jump(2, delta, lambda), ParticleState{{0, 0}});
  Rng rng(31);
  std::vector<double> occ(40, 0.0);
  run_until(sys, 1e5, rng, 100'000'000, [&](double, double dwell, const ParticleState& s) {
    const auto m = std::min(s[0], s[1]);
    if (m < 40) occ[static_cast<std::size_t>(m)] += dwell / 1e5;
  });
  CHECK(tv_distance(std::span<const double>(occ), std::span<const double>(exact)) < 0.02);
  CHECK(occ[0] > 0.4);
}

TEST_CASE("recurrence probe classifies known regimes", "[simulator][probe]") {
  const RecurrenceThresholds th;
  const auto transient = recurrence_probe(ModelSpec::small_jump(2, 1.0, 0.5), ParticleState{{0, 0}}, 2e4, th, 1);
  CHECK(transient.verdict == Verdict::TransientLooking);
  CHECK(transient.min_position_slope > th.slope);

  const auto ergodic = recurrence_probe(ModelSpec::small_jump(2, 0.0, 1.0), ParticleState{{0, 0}}, 2e4, th, 2);
  CHECK(ergodic.verdict == Verdict::ErgodicLooking);
  CHECK(ergodic.returns_to_origin >= th.returns);
  CHECK(ergodic.occupation.total() + ergodic.occupation.tail_bound() == Approx(1.0));

  const auto strong = recurrence_probe(ModelSpec::small_jump(2, 1.0, 21.0), ParticleState{{0, 0}}, 2e4, th, 3);
  CHECK(strong.verdict == Verdict::ErgodicLooking);
}

TEST_CASE("chaos distance at time zero is sampling error", "[simulator][chaos]") {
  const auto mu0 = ProbabilityVector({0.2, 0.2, 0.2, 0.2, 0.2}, 0.0);
  const auto pts = chaos_distance(0.0, 2.0, {2}, mu0, 0.0, 4000, 8);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].tv < 4 * pts[0].standard_error + 1e-3);

  const auto more = chaos_distance(0.0, 2.0, {2}, mu0, 0.0, 8000, 8);
  CHECK(more[0].standard_error / pts[0].standard_error == Approx(1.0 / std::sqrt(2.0)).epsilon(0.1));
}

TEST_CASE("small jumps dominate jump-to-lower pathwise", "[simulator][coupling]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto report = coupled_domination(ParticleState{{0, 3, 3, 7, 1}},
                                           ModelSpec::jump_to_lower(5, 0.4, 3.0), 50.0, seed);
    CHECK(report.order_held);
    CHECK(report.events > 0);
  }
}
