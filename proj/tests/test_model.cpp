#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "mfwalk/config.hpp"
#include "mfwalk/errors.hpp"
#include "mfwalk/model.hpp"
#include "mfwalk/probability.hpp"
#include "mfwalk/rng.hpp"

using namespace mfw;
using Catch::Approx;

namespace {

ParticleState random_state(std::mt19937_64& gen, std::int64_t n, Position hi) {
  std::uniform_int_distribution<Position> pos(0, hi);
  ParticleState s;
  for (std::int64_t i = 0; i < n; ++i) s.positions.push_back(pos(gen));
  return s;
}

// target -> summed rate, so aggregated and per-pair listings compare equal
std::map<std::vector<Position>, double> by_target(const std::vector<Transition>& ts) {
  std::map<std::vector<Position>, double> out;
  for (const auto& t : ts) out[t.target.positions] += t.rate;
  return out;
}

}  // namespace

TEST_CASE("small-jump rates at the reflecting corner", "[model][jump_rates]") {
  const auto model = ModelSpec::small_jump(2, 0.0, 2.0);
  const auto ts = jump_rates(ParticleState{{0, 0}}, model);
  REQUIRE(ts.size() == 2);
  for (const auto& t : ts) {
    CHECK(t.label.kind == TransitionLabel::Kind::Up);
    CHECK(t.rate == 1.0);
  }
}

TEST_CASE("small-jump rates with one lower particle", "[model][jump_rates]") {
  const auto model = ModelSpec::small_jump(2, 0.0, 2.0);
  const auto rates = by_target(jump_rates(ParticleState{{0, 1}}, model));
  REQUIRE(rates.size() == 3);
  CHECK(rates.at({0, 0}) == Approx(1.0 + 2.0 * 0.5));
  CHECK(rates.at({0, 2}) == Approx(1.0));
  CHECK(rates.at({1, 1}) == Approx(1.0));
}

TEST_CASE("jump-to-lower rates", "[model][jump_rates]") {
  const auto model = ModelSpec::jump_to_lower(2, 0.0, 2.0);
  const auto ts = jump_rates(ParticleState{{0, 3}}, model);
  bool saw_interaction = false;
  for (const auto& t : ts) {
    if (t.label.kind == TransitionLabel::Kind::InteractionDown) {
      saw_interaction = true;
      CHECK(t.target.positions == std::vector<Position>{0, 0});
      CHECK(t.rate == Approx(1.0));
      CHECK(t.label.partner == std::optional<std::size_t>{0});
    }
  }
  CHECK(saw_interaction);
  const auto rates = by_target(ts);
  CHECK(rates.at({0, 2}) == Approx(1.0));
  CHECK(rates.at({0, 4}) == Approx(1.0));
  CHECK(rates.at({1, 3}) == Approx(1.0));
}

TEST_CASE("jump_rates rejects a state of the wrong dimension", "[model][jump_rates]") {
  CHECK_THROWS_AS(jump_rates(ParticleState{{0, 1, 2}}, ModelSpec::small_jump(2, 0, 1)), InvalidInput);
  CHECK_THROWS_AS(jump_rates(ParticleState{{0, -1}}, ModelSpec::small_jump(2, 0, 1)), InvalidInput);
}

TEST_CASE("generator invariants on random states", "[model][property]") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::int64_t n = 1 + trial % 6;
    const double delta = 0.1 * (trial % 7);
    const double lambda = 0.5 * (trial % 9);
    const auto state = random_state(gen, n, 6);
    for (const auto& model : {ModelSpec::small_jump(n, delta, lambda),
                              ModelSpec::jump_to_lower(n, delta, lambda)}) {
      const auto ts = jump_rates(state, model);
      double total = 0.0;
      for (const auto& t : ts) {
        CHECK(t.rate > 0.0);
        std::size_t changed = 0;
        for (std::size_t i = 0; i < state.size(); ++i) {
          CHECK(t.target[i] >= 0);
          if (t.target[i] != state[i]) ++changed;
        }
        CHECK(changed == 1);
        total += t.rate;
      }
      CHECK(total >= n * (1.0 + delta) - 1e-12);
      CHECK(total <= n * (2.0 + delta + lambda) + 1e-12);
      CHECK(total == Approx(total_rate(state, model)));
    }

    // interaction down-rate equals lambda N K_N(x), K_N computed by counting
    const auto model = ModelSpec::small_jump(n, delta, lambda);
    double interaction = 0.0;
    for (const auto& t : jump_rates(state, model)) {
      if (t.label.kind == TransitionLabel::Kind::InteractionDown) interaction += t.rate;
    }
    double k_n = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
      for (std::size_t k = 0; k < state.size(); ++k) k_n += state[k] < state[i] ? 1.0 : 0.0;
    }
    k_n /= static_cast<double>(n * n);
    CHECK(interaction == Approx(lambda * n * k_n).margin(1e-12));
    CHECK(lower_fraction_mean(state) == Approx(k_n).margin(1e-15));
  }
}

TEST_CASE("relabelling particles permutes the transitions", "[model][property]") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto state = random_state(gen, 4, 5);
    std::vector<std::size_t> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), gen);
    ParticleState permuted = state;
    for (std::size_t i = 0; i < 4; ++i) permuted[i] = state[perm[i]];
    const auto model = ModelSpec::jump_to_lower(4, 0.3, 1.7);
    auto lhs = by_target(jump_rates(permuted, model));
    std::map<std::vector<Position>, double> rhs;
    for (const auto& [target, rate] : by_target(jump_rates(state, model))) {
      std::vector<Position> p(4);
      for (std::size_t i = 0; i < 4; ++i) p[i] = target[perm[i]];
      rhs[p] += rate;
    }
    REQUIRE(lhs.size() == rhs.size());
    for (const auto& [target, rate] : lhs) CHECK(rate == Approx(rhs.at(target)));
  }
}

TEST_CASE("empirical measure counts occupancies", "[model][empirical]") {
  const auto mu = empirical_measure(ParticleState{{0, 0, 3}});
  CHECK(mu.at(0) == Approx(2.0 / 3.0));
  CHECK(mu.at(3) == Approx(1.0 / 3.0));
  CHECK(mu.at(1) == 0.0);
  CHECK(mu.tail_bound() == 0.0);
  CHECK(empirical_measure(ParticleState{{5}}).at(5) == 1.0);
  CHECK(empirical_measure(ParticleState{{1, 1, 1, 1}}).at(1) == 1.0);
}

TEST_CASE("domination between kernels", "[model][dominates]") {
  const auto sj = ModelSpec::small_jump(3, 0.5, 2.0);
  const auto jl = ModelSpec::jump_to_lower(3, 0.5, 2.0);
  CHECK(dominates(sj, jl));
  CHECK(dominates(sj, sj));
  CHECK_FALSE(dominates(jl, sj));
  CHECK_THROWS_AS(dominates(sj, ModelSpec::jump_to_lower(3, 0.5, 2.5)), InvalidInput);
}

TEST_CASE("tabulated kernels are validated", "[model][kernel]") {
  KernelTable t;
  t.x_max = 2;
  t.phi.assign(9, 1.0);
  t.psi.assign(9, 1);
  const auto k = Kernel::tabulated(t);
  CHECK(k.always_activates());
  CHECK(k.phi(2, 1) == 1.0);
  CHECK_THROWS_AS(k.phi(3, 0), InvalidInput);

  auto bad = t;
  bad.phi[1 * 3 + 0] = 1.5;
  CHECK_THROWS_AS(Kernel::tabulated(bad), InvalidInput);
  bad = t;
  bad.psi[2 * 3 + 1] = 3;  // psi(2, 1) > max(2, 1)
  CHECK_THROWS_AS(Kernel::tabulated(bad), InvalidInput);
  bad = t;
  bad.phi[0 * 3 + 1] = 0.5;  // phi(0, 1) != phi(1, 0)
  CHECK_THROWS_AS(Kernel::tabulated(bad), InvalidInput);
}

TEST_CASE("model parameters are validated", "[model]") {
  CHECK_THROWS_AS(ModelSpec::small_jump(0, 0, 1).validate(), InvalidInput);
  CHECK_THROWS_AS(ModelSpec::small_jump(2, -0.1, 1).validate(), InvalidInput);
  CHECK_THROWS_AS(ModelSpec::small_jump(2, 0, -1).validate(), InvalidInput);
}

TEST_CASE("probability vectors enforce normalization", "[probability]") {
  CHECK_NOTHROW(ProbabilityVector({0.5, 0.5}, 0.0));
  CHECK_NOTHROW(ProbabilityVector({0.5, 0.4}, 0.1));
  CHECK_THROWS_AS(ProbabilityVector({0.5, 0.4}, 0.0), InvalidInput);
  CHECK_THROWS_AS(ProbabilityVector({1.1, -0.1}, 0.0), InvalidInput);
}

TEST_CASE("median uses the smallest half-mass point", "[probability][median]") {
  CHECK(median(ProbabilityVector::point_mass(7)) == 7);
  CHECK(median(ProbabilityVector({0.5, 0.5}, 0.0)) == 0);
  std::vector<double> geo;
  for (int x = 0; x < 60; ++x) geo.push_back(std::ldexp(1.0, -(x + 1)));
  CHECK(median(ProbabilityVector(geo, std::ldexp(1.0, -60))) == 0);
}

TEST_CASE("ordered pair mass stays below one half", "[probability][property]") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> len(1, 40);
  std::exponential_distribution<double> w(1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> weights(static_cast<std::size_t>(len(gen)));
    for (auto& v : weights) v = w(gen);
    const auto mu = ProbabilityVector::from_weights(weights);
    // P(X < Y) for independent X, Y ~ mu equals (1 - sum mu(x)^2) / 2
    double sq = 0.0;
    for (double m : mu.mass()) sq += m * m;
    const double s = ordered_pair_mass(mu);
    CHECK(s == Approx((1.0 - sq) / 2.0).margin(1e-13));
    CHECK(s < 0.5);
  }
}

TEST_CASE("stochastic order on CDFs", "[probability]") {
  const auto a = ProbabilityVector({0.6, 0.4}, 0.0);
  const auto b = ProbabilityVector({0.2, 0.3, 0.5}, 0.0);
  CHECK(stochastically_le(a, b));
  CHECK_FALSE(stochastically_le(b, a));
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(a, b) == Approx(0.5));
}

TEST_CASE("rng streams are reproducible and distinct", "[rng]") {
  auto a = Rng::stream(42, {1, 2});
  auto b = Rng::stream(42, {1, 2});
  auto c = Rng::stream(42, {2, 1});
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs = differs || x != c.next();
  }
  CHECK(differs);

  Rng r(5);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += r.exponential(2.0);
  }
  CHECK(sum / n == Approx(0.5).epsilon(0.01));
  for (int i = 0; i < 1000; ++i) CHECK(r.index(7) < 7);
}

TEST_CASE("key-value configs and grids", "[config]") {
  const auto cfg = KeyValueConfig::parse(
      "# model\nn = 3\ndelta = 0.5\nlambda = 1:2:0.5\nkernel = jump_to_lower\n");
  CHECK(cfg.get_int("n") == 3);
  const auto grid = cfg.get_grid("lambda");
  REQUIRE(grid.size() == 3);
  CHECK(grid[2] == Approx(2.0));
  CHECK(parse_grid("0.1,0.2") == std::vector<double>{0.1, 0.2});
  CHECK(parse_int_list("10,50,250") == std::vector<std::int64_t>{10, 50, 250});
  CHECK_THROWS_AS(parse_double("abc"), InvalidInput);
  CHECK_THROWS_AS(cfg.get("missing"), InvalidInput);

  const auto model = model_from_config(KeyValueConfig::parse("n=3\ndelta=0.5\nlambda=1\nkernel=jump_to_lower"));
  CHECK(model.kernel.kind() == KernelKind::JumpToLower);
  CHECK(parse_state("0,1,2", 3).positions == std::vector<Position>{0, 1, 2});
  CHECK_THROWS_AS(parse_state("0,1", 3), InvalidInput);
}
