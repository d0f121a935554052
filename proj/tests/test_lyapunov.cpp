#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>

#include "mfwalk/errors.hpp"
#include "mfwalk/lyapunov.hpp"

using namespace mfw;
using Catch::Approx;

namespace {

ParticleState random_state(std::mt19937_64& gen, std::int64_t n, Position hi) {
  std::uniform_int_distribution<Position> pos(0, hi);
  ParticleState s;
  for (std::int64_t i = 0; i < n; ++i) s.positions.push_back(pos(gen));
  return s;
}

double plain_V(const ParticleState& s, double alpha, double beta) {
  const auto n = static_cast<double>(s.size());
  double psi = 0.0;
  std::map<Position, int> occ;
  for (auto x : s.positions) {
    psi += std::exp(alpha * x) / n;
    ++occ[x];
  }
  int pile = 0;
  for (const auto& [v, c] : occ) pile = std::max(pile, c);
  return psi * std::exp(beta / n * pile);
}

std::vector<std::pair<Position, std::int64_t>> sites_of(const ParticleState& s) {
  std::map<Position, std::int64_t> occ;
  for (auto x : s.positions) ++occ[x];
  return {occ.begin(), occ.end()};
}

}  // namespace

TEST_CASE("Lyapunov function values", "[lyapunov][V]") {
  CHECK(eval_V(ParticleState{{0, 0, 0}}, 0.3, 0.7) == Approx(std::exp(0.7)));
  CHECK(eval_V(ParticleState{{0, 1}}, 1.0, 1.0) == Approx((1 + std::exp(1.0)) / 2 * std::exp(0.5)));
  CHECK(eval_V(ParticleState{{4, 0, 2}}, 0.2, 0.5) == Approx(eval_V(ParticleState{{0, 2, 4}}, 0.2, 0.5)));
  CHECK(log_V(ParticleState{{2000, 0}}, 1.0, 1.0) == Approx(2000 + std::log(0.5) + 0.5).epsilon(1e-12));
  CHECK(std::isinf(eval_V(ParticleState{{2000, 0}}, 1.0, 1.0)));
  CHECK_THROWS_AS(eval_V(ParticleState{{0}}, 0.0, 1.0), InvalidInput);
}

TEST_CASE("drift of V three ways", "[lyapunov][drift][property]") {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::int64_t n = 1 + trial % 6;
    const double delta = 0.25 * (trial % 5);
    const double lambda = 0.5 + 0.75 * (trial % 7);
    const double alpha = 0.05 + 0.1 * (trial % 4);
    const double beta = 0.3 * alpha;
    const auto model = ModelSpec::small_jump(n, delta, lambda);
    const auto s = random_state(gen, n, 8);
    const double v = plain_V(s, alpha, beta);
    double direct = 0.0;
    for (const auto& t : jump_rates(s, model)) direct += t.rate * (plain_V(t.target, alpha, beta) - v);

    const auto d = drift_V(s, model, alpha, beta);
    const double scale = std::max(1.0, std::abs(direct));
    CHECK(d.value == Approx(v).epsilon(1e-13));
    CHECK(std::abs(d.drift - direct) <= 1e-10 * scale);
    CHECK(std::abs(d.drift_decomposed - d.drift) <= 1e-10 * scale);
    CHECK(std::abs(d.psi_l_phi + d.phi_l_psi + d.carre_du_champ - d.drift) <= 1e-10 * scale);
    CHECK(d.relative_drift == Approx(direct / v).margin(1e-12));
    CHECK(relative_drift_sites(sites_of(s), delta, lambda, alpha, beta) == Approx(direct / v).margin(1e-12));
    CHECK(std::abs(d.carre_du_champ) <= carre_du_champ_bound(s, model, alpha, beta) * (1 + 1e-12));
    CHECK(d.pile_height == pile_height(s));
  }
}

TEST_CASE("drift is negative on a tall pile", "[lyapunov][drift]") {
  const auto d = drift_V(ParticleState{{10, 10, 10, 10}}, ModelSpec::small_jump(4, 0.0, 2.0), 0.01, 0.005);
  CHECK(d.region == DriftRegion::TallPile);
  CHECK(d.drift < 0.0);
  CHECK(drift_region(ParticleState{{0, 1, 2}}) == DriftRegion::InteriorLike);
  CHECK(drift_region(ParticleState{{0, 0, 1, 2}}) == DriftRegion::Complement);
  CHECK_THROWS_AS(drift_V(ParticleState{{0, 1}}, ModelSpec::jump_to_lower(2, 0, 1), 0.1, 0.1), InvalidInput);
}

TEST_CASE("lower fraction dominates the pile bound", "[lyapunov][property]") {
  for (std::int64_t n = 1; n <= 6; ++n) {
    for (const auto& s : enumerate_multisets(n, 4)) {
      const double eta = static_cast<double>(pile_height(s)) / static_cast<double>(n);
      CHECK(lower_fraction_mean(s) >= eta * (1 - eta) - 1e-15);
    }
  }
}

TEST_CASE("FKG-type lower bound", "[lyapunov][property]") {
  std::mt19937_64 gen(43);
  for (int trial = 0; trial < 500; ++trial) {
    const std::int64_t n = 2 + trial % 7;
    const double alpha = 0.05 + 0.05 * (trial % 10);
    const auto s = random_state(gen, n, 10);
    const auto mu = empirical_measure(s);
    double lhs = 0.0, psi = 0.0;
    for (auto x : s.positions) {
      lhs += std::exp(alpha * x) * mu.below(x) / static_cast<double>(n);
      psi += std::exp(alpha * x) / static_cast<double>(n);
    }
    CHECK(lhs >= psi * lower_fraction_mean(s) * (1 - 1e-12));
  }
}

TEST_CASE("multiset enumeration", "[lyapunov][enumerate]") {
  // C(r + n, n) nondecreasing tuples
  CHECK(enumerate_multisets(3, 4).size() == 35);
  CHECK(enumerate_multisets(1, 9).size() == 10);
  const auto all = enumerate_multisets(4, 3);
  CHECK(all.size() == 35);
  for (const auto& s : all) CHECK(std::is_sorted(s.positions.begin(), s.positions.end()));
  CHECK_THROWS_AS(enumerate_multisets(5, 30, 1000), InvalidInput);
}

TEST_CASE("ratio window", "[lyapunov][ergodic]") {
  const auto [lo, hi] = ergodic_c_window(0.1, 2.0);
  CHECK(lo == Approx(0.1 / 1.1));
  CHECK(hi == Approx(std::min((2.0 - 0.4) / 2.0, (0.5 - 0.1) / (2.1 + 0.5))));
  const auto [lo0, hi0] = ergodic_c_window(0.0, 1.0);
  CHECK(lo0 == 0.0);
  CHECK(hi0 > 0.0);
  const auto [lo1, hi1] = ergodic_c_window(1.0, 1.0);
  CHECK(lo1 > hi1);
}

TEST_CASE("ergodic certificates on finite boxes", "[lyapunov][ergodic]") {
  ErgodicSearchOptions opts;
  opts.box_radius = 20;
  const auto zero = ergodic_certificate_search(3, 0.0, 1.0, opts);
  CHECK(zero.holds);
  CHECK(zero.gamma > 0.0);
  CHECK(zero.finite_box);
  CHECK(zero.worst_residual < 0.0);
  CHECK(zero.c > 0.0);
  CHECK(zero.beta == Approx(zero.c * zero.alpha));

  const auto moderate = ergodic_certificate_search(3, 0.1, 2.0, opts);
  CHECK(moderate.holds);
  CHECK(moderate.gamma > 0.0);

  // the gamma of a certificate bounds LV/V on the box minus the exceptional set
  for (const auto& s : enumerate_multisets(3, opts.box_radius)) {
    Position top = 0;
    for (auto x : s.positions) top = std::max(top, x);
    if (top <= moderate.exceptional_radius) continue;
    CHECK(relative_drift_sites(sites_of(s), 0.1, 2.0, moderate.alpha, moderate.beta) <= -moderate.gamma + 1e-12);
  }

  ErgodicSearchOptions grid = opts;
  grid.c_grid = {0.25, 0.5, 0.75};
  const auto strong_drift = ergodic_certificate_search(3, 1.0, 1.0, grid);
  CHECK_FALSE(strong_drift.holds);
  CHECK(strong_drift.worst_residual > 0.0);

  CHECK_THROWS_AS(ergodic_certificate_search(3, 1.0, 1.0, opts), NoCandidate);
}

TEST_CASE("transience certificate regions", "[lyapunov][transience]") {
  const auto cert = transience_certificate(4, 1.0, 3.0, 0.2);
  REQUIRE(cert.region_values.size() == 4);
  CHECK(cert.region_values[0] == Approx(4 * 1.0 + 0.2 * 1.0 - 3.0 * 3 / 2));
  for (int k = 2; k <= 4; ++k) {
    CHECK(cert.region_values[static_cast<std::size_t>(k - 1)] ==
          Approx(4 * 1.0 - k * 0.2 - 3.0 * 3 / 2 + 3.0 * k * (k - 1) / 8.0));
  }

  const auto eps = epsilon_search(2, 1.0, 5.9);
  REQUIRE(eps.has_value());
  CHECK(transience_certificate(2, 1.0, 5.9, *eps).holds);
  CHECK_FALSE(epsilon_search(2, 1.0, 6.1).has_value());
  const double window = 3 * 6.1 / 8;
  for (int i = 0; i <= 1000; ++i) CHECK_FALSE(transience_certificate(2, 1.0, 6.1, window * i / 1000).holds);

  // below the continuum bound the interior inequality alone suffices
  const auto plain = transience_certificate(5, 1.0, 0.95 * 2 * 1.0 * 5 / 4.0, 0.0);
  CHECK(plain.holds);

  CHECK_THROWS_AS(transience_certificate(2, 1.0, 4.0, 2.0), InvalidInput);
  CHECK_THROWS_AS(transience_certificate(2, 1.0, 4.0, -0.1), InvalidInput);
}

TEST_CASE("transience below the epsilon bound", "[lyapunov][transience][property]") {
  for (std::int64_t n : {2, 3, 4, 6, 10, 25}) {
    for (double delta : {0.05, 0.2, 1.0, 3.0}) {
      const double bound = (1 + epsilon_N(n, delta)) * 2 * delta;
      for (double f : {0.1, 0.5, 0.9, 0.99, 0.999}) {
        const auto eps = epsilon_search(n, delta, f * bound);
        REQUIRE(eps.has_value());
        CHECK(transience_certificate(n, delta, f * bound, *eps).holds);
      }
    }
  }
}

TEST_CASE("epsilon_N closed form", "[lyapunov][epsilon]") {
  CHECK(epsilon_N(2, 1.0) == Approx(2.0));
  CHECK((1 + epsilon_N(2, 1.0)) * 2 == Approx(6.0));
  for (double delta : {0.1, 0.5, 1.0, 2.0}) {
    CHECK(epsilon_N(2, delta) == Approx(delta + 1).margin(1e-12));
    CHECK(std::abs((1 + epsilon_N(2, delta)) * 2 * delta - (2 * delta * delta + 4 * delta)) <= 1e-12);
  }
  double prev = epsilon_N(10, 1.0);
  for (std::int64_t n : {100, 1000, 10000}) {
    const double e = epsilon_N(n, 1.0);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(prev < 1e-3);
}
