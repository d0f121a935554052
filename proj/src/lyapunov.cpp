#include "mfwalk/lyapunov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "mfwalk/errors.hpp"

namespace mfw {

namespace {

void check_exponents(double alpha, double beta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidInput("alpha must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidInput("beta must be positive");
}

// (1/N) sum_i e^{alpha (x_i - top)}
double scaled_psi(const ParticleState& s, double alpha, Position top) {
  double sum = 0.0;
  for (Position x : s.positions) sum += std::exp(alpha * static_cast<double>(x - top));
  return sum / static_cast<double>(s.size());
}

Position max_position(const ParticleState& s) {
  return *std::max_element(s.positions.begin(), s.positions.end());
}

}  // namespace

double log_V(const ParticleState& state, double alpha, double beta) {
  check_exponents(alpha, beta);
  if (state.size() == 0) throw InvalidInput("state must have at least one particle");
  const Position top = max_position(state);
  const auto n = static_cast<double>(state.size());
  return alpha * static_cast<double>(top) + std::log(scaled_psi(state, alpha, top)) +
         beta / n * static_cast<double>(pile_height(state));
}

double eval_V(const ParticleState& state, double alpha, double beta) {
  return std::exp(log_V(state, alpha, beta));
}

const char* to_string(DriftRegion r) {
  switch (r) {
    case DriftRegion::InteriorLike:
      return "interior-like";
    case DriftRegion::TallPile:
      return "tall-pile";
    case DriftRegion::Complement:
      return "tall-pile-complement";
  }
  return "tall-pile-complement";
}

DriftRegion drift_region(const ParticleState& state) {
  const auto h = pile_height(state);
  if (2 * h > static_cast<std::int64_t>(state.size())) return DriftRegion::TallPile;
  if (h == 1) return DriftRegion::InteriorLike;
  return DriftRegion::Complement;
}

DriftEvaluation drift_V(const ParticleState& state, const ModelSpec& model, double alpha,
                        double beta) {
  check_exponents(alpha, beta);
  if (model.kernel.kind() != KernelKind::SmallJump) {
    throw InvalidInput("drift of V is only defined for the small-jump kernel");
  }
  model.check_state(state);
  const auto n = static_cast<double>(model.n_particles);
  const Position top = max_position(state);
  const double psi = scaled_psi(state, alpha, top);
  const auto eta = pile_height(state);
  const double phi = std::exp(beta / n * static_cast<double>(eta));

  DriftEvaluation d;
  d.state = state;
  d.pile_height = eta;
  d.region = drift_region(state);
  d.log_value = alpha * static_cast<double>(top) + std::log(psi) + beta / n * static_cast<double>(eta);
  d.value = std::exp(d.log_value);

  double drift = 0.0;
  double l_psi = 0.0;
  double l_phi = 0.0;
  double gamma = 0.0;
  for (const auto& t : jump_rates(state, model)) {
    const std::size_t i = t.label.particle;
    const double d_psi = (std::exp(alpha * static_cast<double>(t.target[i] - top)) -
                          std::exp(alpha * static_cast<double>(state[i] - top))) /
                         n;
    const double d_phi =
        std::exp(beta / n * static_cast<double>(pile_height(t.target))) - phi;
    drift += t.rate * ((psi + d_psi) * (phi + d_phi) - psi * phi);
    l_psi += t.rate * d_psi;
    l_phi += t.rate * d_phi;
    gamma += t.rate * d_psi * d_phi;
  }
  const double scale = std::exp(alpha * static_cast<double>(top));
  d.relative_drift = drift / (psi * phi);
  d.drift = drift * scale;
  d.psi_l_phi = psi * l_phi * scale;
  d.phi_l_psi = phi * l_psi * scale;
  d.carre_du_champ = gamma * scale;
  d.drift_decomposed = (psi * l_phi + phi * l_psi + gamma) * scale;
  return d;
}

double carre_du_champ_bound(const ParticleState& state, const ModelSpec& model, double alpha,
                            double beta) {
  const auto n = static_cast<double>(model.n_particles);
  return n * (2.0 + model.lambda + model.delta) * std::expm1(alpha) * std::expm1(beta / n) *
         eval_V(state, alpha, beta);
}

double relative_drift_sites(const std::vector<std::pair<Position, std::int64_t>>& sites,
                            double delta, double lambda, double alpha, double beta) {
  const std::size_t m = sites.size();
  std::int64_t total = 0;
  // three largest counts with their site indices
  std::array<std::pair<std::int64_t, std::size_t>, 3> top{};
  top.fill({0, m});
  for (std::size_t j = 0; j < m; ++j) {
    total += sites[j].second;
    std::pair<std::int64_t, std::size_t> cand{sites[j].second, j};
    for (auto& slot : top) {
      if (cand.first > slot.first) std::swap(cand, slot);
    }
  }
  const auto n = static_cast<double>(total);
  const std::int64_t eta = top[0].first;
  const Position high = sites.back().first;
  double psi = 0.0;
  for (const auto& [v, c] : sites) psi += static_cast<double>(c) * std::exp(alpha * static_cast<double>(v - high));
  psi /= n;

  const auto others_max = [&](std::size_t a, std::size_t b) {
    for (const auto& slot : top) {
      if (slot.second != a && slot.second != b) return slot.first;
    }
    return std::int64_t{0};
  };
  const auto term = [&](std::size_t j, std::size_t to, std::int64_t to_count, Position step) {
    const Position v = sites[j].first;
    const std::int64_t c = sites[j].second;
    const std::int64_t new_eta = std::max({others_max(j, to), c - 1, to_count + 1});
    const double a = (std::exp(alpha * static_cast<double>(v + step - high)) -
                      std::exp(alpha * static_cast<double>(v - high))) /
                     (n * psi);
    const double b = std::expm1(beta / n * static_cast<double>(new_eta - eta));
    return a + b + a * b;
  };

  double r = 0.0;
  std::int64_t below = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto [v, c] = sites[j];
    const auto cd = static_cast<double>(c);
    {
      const bool next = j + 1 < m && sites[j + 1].first == v + 1;
      r += cd * (1.0 + delta) * term(j, next ? j + 1 : m, next ? sites[j + 1].second : 0, 1);
    }
    if (v > 0) {
      const bool prev = j > 0 && sites[j - 1].first == v - 1;
      const double rate = cd * (1.0 + lambda * static_cast<double>(below) / n);
      r += rate * term(j, prev ? j - 1 : m, prev ? sites[j - 1].second : 0, -1);
    }
    below += c;
  }
  return r;
}

std::vector<ParticleState> enumerate_multisets(std::int64_t n, std::int64_t radius,
                                               std::int64_t limit) {
  if (n < 1) throw InvalidInput("need at least one particle");
  if (radius < 0) throw InvalidInput("box radius must be nonnegative");
  // C(radius + n, n)
  double count = 1.0;
  for (std::int64_t k = 1; k <= n; ++k) {
    count = count * static_cast<double>(radius + k) / static_cast<double>(k);
  }
  if (count > static_cast<double>(limit)) {
    throw InvalidInput("box holds " + std::to_string(count) + " configurations, more than " +
                       std::to_string(limit) + "; reduce the box radius");
  }
  std::vector<ParticleState> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<Position> x(static_cast<std::size_t>(n), 0);
  for (;;) {
    out.push_back(ParticleState{x});
    // next nondecreasing sequence in lexicographic order
    auto i = static_cast<std::ptrdiff_t>(n) - 1;
    while (i >= 0 && x[static_cast<std::size_t>(i)] == radius) --i;
    if (i < 0) break;
    const Position v = x[static_cast<std::size_t>(i)] + 1;
    for (auto k = static_cast<std::size_t>(i); k < x.size(); ++k) x[k] = v;
  }
  return out;
}

const char* to_string(CertificateKind k) {
  return k == CertificateKind::ErgodicDrift ? "ergodic" : "transient";
}

std::pair<double, double> ergodic_c_window(double delta, double lambda) {
  const double lo = delta / (1.0 + delta);
  if (!(lambda > 0.0)) return {lo, -std::numeric_limits<double>::infinity()};
  const double hi = std::min((lambda - 4.0 * delta) / lambda,
                             (0.25 * lambda - delta) / (2.0 + delta + 0.25 * lambda));
  return {lo, hi};
}

Certificate ergodic_certificate_search(std::int64_t n, double delta, double lambda,
                                       const ErgodicSearchOptions& options) {
  const ModelSpec model = ModelSpec::small_jump(n, delta, lambda);
  model.validate();
  if (!(lambda > 0.0)) throw InvalidInput("ergodic certificate search needs lambda > 0");
  const std::int64_t box = options.box_radius;
  const std::int64_t exc = options.exceptional_radius < 0 ? box / 2 : options.exceptional_radius;
  if (exc >= box) throw InvalidInput("exceptional radius must be smaller than the box radius");

  std::vector<double> alphas = options.alpha_grid;
  if (alphas.empty()) {
    for (int k = 3; k <= 14; ++k) alphas.push_back(std::ldexp(1.0, -k));
  }
  std::vector<double> cs = options.c_grid;
  if (cs.empty()) {
    const auto [lo, hi] = ergodic_c_window(delta, lambda);
    if (!(lo <= hi)) {
      throw NoCandidate("C window is empty: lambda must be at least 12 delta + 8 delta^2");
    }
    for (int k = 1; k <= 64; ++k) cs.push_back(lo + (hi - lo) * k / 65.0);
  }
  for (double a : alphas) {
    if (!(a > 0.0)) throw InvalidInput("alpha grid entries must be positive");
  }
  for (double c : cs) {
    if (!(c > 0.0)) throw InvalidInput("C grid entries must be positive");
  }

  using Sites = std::vector<std::pair<Position, std::int64_t>>;
  std::vector<Sites> inner;
  std::vector<ParticleState> inner_states;
  std::vector<Sites> outer;
  for (const auto& s : enumerate_multisets(n, box, options.state_limit)) {
    Sites sites;
    for (Position x : s.positions) {
      if (!sites.empty() && sites.back().first == x) {
        ++sites.back().second;
      } else {
        sites.emplace_back(x, 1);
      }
    }
    if (s.positions.back() <= exc) {
      inner.push_back(std::move(sites));
      inner_states.push_back(s);
    } else {
      outer.push_back(std::move(sites));
    }
  }

  struct Candidate {
    double alpha, c, gamma, h;
  };
  std::vector<std::pair<double, double>> grid;
  for (double a : alphas) {
    for (double c : cs) grid.emplace_back(a, c);
  }
  auto evaluate = [&](std::pair<double, double> ac) {
    const auto [alpha, c] = ac;
    const double beta = c * alpha;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& s : outer) {
      worst = std::max(worst, relative_drift_sites(s, delta, lambda, alpha, beta));
    }
    const double gamma = -worst;
    double h = 0.0;
    for (std::size_t k = 0; k < inner.size(); ++k) {
      const double r = relative_drift_sites(inner[k], delta, lambda, alpha, beta);
      h = std::max(h, (r + gamma) * eval_V(inner_states[k], alpha, beta));
    }
    return Candidate{alpha, c, gamma, h};
  };

  std::vector<Candidate> results(grid.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(grid.size(), std::thread::hardware_concurrency()));
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t k = w; k < grid.size(); k += workers) results[k] = evaluate(grid[k]);
    }));
  }
  for (auto& j : jobs) j.get();

  const auto best = std::max_element(results.begin(), results.end(),
                                     [](const Candidate& a, const Candidate& b) {
                                       return a.gamma < b.gamma;
                                     });
  Certificate cert;
  cert.kind = CertificateKind::ErgodicDrift;
  cert.n = n;
  cert.delta = delta;
  cert.lambda = lambda;
  cert.alpha = best->alpha;
  cert.c = best->c;
  cert.beta = best->c * best->alpha;
  cert.gamma = best->gamma;
  cert.h = best->h;
  cert.box_radius = box;
  cert.exceptional_radius = exc;
  cert.states_checked = static_cast<std::int64_t>(inner.size() + outer.size());
  cert.candidates = static_cast<std::int64_t>(grid.size());
  cert.worst_residual = -best->gamma;
  cert.holds = best->gamma > 0.0;
  cert.finite_box = true;
  return cert;
}

Certificate transience_certificate(std::int64_t n, double delta, double lambda, double epsilon) {
  ModelSpec::small_jump(n, delta, lambda).validate();
  if (n < 2) throw InvalidInput("transience certificate needs N >= 2");
  const auto nn = static_cast<double>(n);
  const double window = 3.0 * lambda / (4.0 * nn);
  if (!(epsilon >= 0.0 && epsilon <= window)) {
    throw InvalidInput("epsilon must lie in [0, 3 lambda / (4N)] = [0, " + std::to_string(window) +
                       "]");
  }
  Certificate cert;
  cert.kind = CertificateKind::TransienceDrift;
  cert.n = n;
  cert.delta = delta;
  cert.lambda = lambda;
  cert.epsilon = epsilon;
  const double base = nn * delta - lambda * (nn - 1.0) / 2.0;
  cert.region_values.push_back(base + epsilon * delta);
  for (std::int64_t k = 2; k <= n; ++k) {
    const auto kk = static_cast<double>(k);
    cert.region_values.push_back(base - kk * epsilon + lambda * kk * (kk - 1.0) / (2.0 * nn));
  }
  cert.worst_residual = *std::min_element(cert.region_values.begin(), cert.region_values.end());
  cert.holds = cert.worst_residual > 0.0;
  return cert;
}

double epsilon_N(std::int64_t n, double delta) {
  if (n < 2) throw InvalidInput("epsilon_N needs N >= 2");
  if (!(delta >= 0.0)) throw InvalidInput("delta must be >= 0");
  const auto nn = static_cast<double>(n);
  return nn * nn * (delta + 2.0) / (nn * (nn - 1.0) * (delta + 2.0) - 2.0 * delta) - 1.0;
}

std::optional<double> epsilon_search(std::int64_t n, double delta, double lambda) {
  if (n < 2) throw InvalidInput("epsilon search needs N >= 2");
  if (!(delta >= 0.0) || !(lambda >= 0.0)) throw InvalidInput("delta and lambda must be >= 0");
  const auto nn = static_cast<double>(n);
  const double base = nn * delta - lambda * (nn - 1.0) / 2.0;
  // strict bounds lo < eps < hi from the linear region inequalities
  double lo = -std::numeric_limits<double>::infinity();
  if (delta > 0.0) {
    lo = -base / delta;
  } else if (!(base > 0.0)) {
    return std::nullopt;
  }
  double hi = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 2; k <= n; ++k) {
    const auto kk = static_cast<double>(k);
    hi = std::min(hi, (base + lambda * kk * (kk - 1.0) / (2.0 * nn)) / kk);
  }
  const double window = 3.0 * lambda / (4.0 * nn);
  if (lo < 0.0 && hi > 0.0) return 0.0;
  const double a = std::max(lo, 0.0);
  const double b = std::min(hi, window);
  if (!(a < b)) return std::nullopt;
  // at the closed window edge the strict upper bound is attained
  const double eps = 0.5 * (a + b);
  if (!transience_certificate(n, delta, lambda, eps).holds) return std::nullopt;
  return eps;
}

}  // namespace mfw
