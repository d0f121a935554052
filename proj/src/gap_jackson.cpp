#include "mfwalk/gap_jackson.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "mfwalk/errors.hpp"
#include "mfwalk/rng.hpp"

namespace mfw {

GapState to_gaps(const ParticleState& state) {
  std::vector<Position> x = state.positions;
  std::sort(x.begin(), x.end());
  GapState g;
  g.gaps.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g.gaps[i] = i == 0 ? x[0] : x[i] - x[i - 1];
  return g;
}

ParticleState from_gaps(const GapState& g) {
  ParticleState s;
  s.positions.resize(g.size());
  Position acc = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] < 0) throw InvalidInput("gaps must be nonnegative");
    acc += g[i];
    s.positions[i] = acc;
  }
  return s;
}

std::vector<GapTransition> gap_rates_2(const GapState& g, double delta, double lambda) {
  if (g.size() != 2) throw InvalidInput("gap_rates_2 needs exactly two gaps");
  const Position x = g[0];
  const Position y = g[1];
  if (x < 0 || y < 0) throw InvalidInput("gaps must be nonnegative");
  std::vector<GapTransition> out;
  auto add = [&](Position dx, Position dy, double rate) {
    out.push_back({GapState{{x + dx, y + dy}}, rate});
  };
  if (y > 0) {
    add(1, -1, 1.0 + delta);           // lower particle up
    add(0, -1, 1.0 + 0.5 * lambda);    // upper particle down
    if (x > 0) add(-1, 1, 1.0);        // lower particle down
    add(0, 1, 1.0 + delta);            // upper particle up
  } else {
    if (x > 0) add(-1, 1, 2.0);        // either particle of the pile down
    add(0, 1, 2.0 + 2.0 * delta);      // either particle of the pile up
  }
  return out;
}

double GridLaw::at(std::int64_t x, std::int64_t y) const {
  if (x < 0 || y < 0 || x >= nx || y >= ny) return 0.0;
  return mass[static_cast<std::size_t>(x * ny + y)];
}

double GridLaw::total() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

double tv_distance(const GridLaw& a, const GridLaw& b) {
  const auto nx = std::max(a.nx, b.nx);
  const auto ny = std::max(a.ny, b.ny);
  double s = a.tail + b.tail;
  for (std::int64_t x = 0; x < nx; ++x) {
    for (std::int64_t y = 0; y < ny; ++y) s += std::abs(a.at(x, y) - b.at(x, y));
  }
  return 0.5 * s;
}

double Pi2Law::value(std::int64_t x, std::int64_t y) const {
  if (x < 0 || y < 0) return 0.0;
  const double v = c * std::pow(a, static_cast<double>(x)) * std::pow(b, static_cast<double>(y));
  return y == 0 ? 0.5 * v : v;
}

Pi2Law pi2(double delta, double lambda, double tolerance) {
  if (!(delta >= 0.0) || !(lambda >= 0.0)) throw InvalidInput("delta and lambda must be >= 0");
  if (!(tolerance > 0.0)) throw InvalidInput("tolerance must be positive");
  if (!(lambda > 2.0 * delta * delta + 4.0 * delta)) {
    throw NonErgodicParameter("the N = 2 gap process is ergodic only for lambda > 2 delta^2 + 4 delta");
  }
  Pi2Law law;
  law.delta = delta;
  law.lambda = lambda;
  law.a = (1.0 + delta) * (1.0 + delta) / (1.0 + 0.5 * lambda);
  law.b = (1.0 + delta) / (1.0 + 0.5 * lambda);

  // unnormalized mass: sum_x a^x * (sum_y b^y - 1/2)
  const double row = 1.0 / (1.0 - law.b) - 0.5;
  const double z = row / (1.0 - law.a);
  // mass beyond x >= nx is a^nx of the total; beyond y >= ny it is
  // b^ny / (1 - b) / row of it
  const auto nx = static_cast<std::int64_t>(
      std::ceil(std::log(0.5 * tolerance) / std::log(law.a))) + 1;
  const auto ny = static_cast<std::int64_t>(
      std::ceil(std::log(0.5 * tolerance * row * (1.0 - law.b)) / std::log(law.b))) + 1;
  law.grid.nx = std::max<std::int64_t>(nx, 1);
  law.grid.ny = std::max<std::int64_t>(ny, 1);
  law.grid.mass.assign(static_cast<std::size_t>(law.grid.nx * law.grid.ny), 0.0);

  law.c = 1.0;
  for (std::int64_t x = 0; x < law.grid.nx; ++x) {
    for (std::int64_t y = 0; y < law.grid.ny; ++y) {
      law.grid.mass[static_cast<std::size_t>(x * law.grid.ny + y)] = law.value(x, y);
    }
  }
  const double ax = std::pow(law.a, static_cast<double>(law.grid.nx));
  const double by = std::pow(law.b, static_cast<double>(law.grid.ny));
  const double outside = (ax * row + (1.0 - ax) * by / (1.0 - law.b)) / (1.0 - law.a);
  law.c = 1.0 / z;
  for (double& m : law.grid.mass) m *= law.c;
  law.grid.tail = outside * law.c;
  return law;
}

double pi2_stationarity_residual(const Pi2Law& law) {
  double worst = 0.0;
  const std::pair<Position, Position> sources[] = {{-1, 1}, {0, 1}, {1, -1}, {0, -1}};
  for (std::int64_t x = 0; x < law.grid.nx; ++x) {
    for (std::int64_t y = 0; y < law.grid.ny; ++y) {
      double out = 0.0;
      for (const auto& t : gap_rates_2(GapState{{x, y}}, law.delta, law.lambda)) out += t.rate;
      double flow = -law.value(x, y) * out;
      for (const auto& [dx, dy] : sources) {
        const Position sx = x + dx;
        const Position sy = y + dy;
        if (sx < 0 || sy < 0) continue;
        for (const auto& t : gap_rates_2(GapState{{sx, sy}}, law.delta, law.lambda)) {
          if (t.target.gaps[0] == x && t.target.gaps[1] == y) flow += law.value(sx, sy) * t.rate;
        }
      }
      worst = std::max(worst, std::abs(flow));
    }
  }
  return worst;
}

Pi2ConstantDiagnostic pi2_constant_diagnostic(double delta, double lambda) {
  Pi2ConstantDiagnostic d;
  d.numeric = pi2(delta, lambda).c;
  const double h = 0.5 * lambda;
  const double num = 2.0 * (h - delta) * (h - 2.0 * delta - delta * delta);
  d.reading_two_delta = num / ((h + 2.0 * delta) * (h + 1.0));
  d.reading_delta_squared = num / ((h + delta * delta) * (h + 1.0));
  d.reading_delta_plus_two = num / ((h + delta + 2.0) * (h + 1.0));
  return d;
}

G2Occupation simulate_gaps_2(double delta, double lambda, const GapState& init,
                             std::int64_t events, std::uint64_t seed) {
  if (init.size() != 2) throw InvalidInput("the gap simulator needs two gaps");
  if (events < 0) throw InvalidInput("event count must be nonnegative");
  Rng rng(seed);
  std::map<std::pair<Position, Position>, double> occupation;
  GapState g = init;
  G2Occupation result;
  Position max_x = 0;
  Position max_y = 0;
  for (std::int64_t e = 0; e < events; ++e) {
    const auto moves = gap_rates_2(g, delta, lambda);
    double total = 0.0;
    for (const auto& m : moves) total += m.rate;
    const double dwell = rng.exponential(total);
    occupation[{g[0], g[1]}] += dwell;
    result.time += dwell;
    max_x = std::max(max_x, g[0]);
    max_y = std::max(max_y, g[1]);
    double u = rng.uniform() * total;
    std::size_t pick = 0;
    while (pick + 1 < moves.size() && u >= moves[pick].rate) u -= moves[pick++].rate;
    g = moves[pick].target;
  }
  result.events = events;
  result.law.nx = max_x + 1;
  result.law.ny = max_y + 1;
  result.law.mass.assign(static_cast<std::size_t>(result.law.nx * result.law.ny), 0.0);
  for (const auto& [xy, t] : occupation) {
    result.law.mass[static_cast<std::size_t>(xy.first * result.law.ny + xy.second)] =
        result.time > 0.0 ? t / result.time : 0.0;
  }
  return result;
}

void JacksonSpec::validate() const {
  const std::size_t n = arrivals.size();
  if (n == 0) throw InvalidInput("Jackson network needs at least one node");
  if (services.size() != n || routing.size() != n) {
    throw InvalidInput("arrivals, services and routing must cover the same nodes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(arrivals[i] >= 0.0) || !(services[i] >= 0.0)) {
      throw InvalidInput("arrival and service rates must be nonnegative");
    }
    if (routing[i].size() != n + 1) throw InvalidInput("routing rows need an exit column");
    double s = 0.0;
    for (double p : routing[i]) {
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("routing probabilities must lie in [0, 1]");
      s += p;
    }
    if (services[i] > 0.0 && std::abs(s - 1.0) > 1e-12) {
      throw InvalidInput("routing row of node " + std::to_string(i + 1) + " sums to " +
                         std::to_string(s));
    }
  }
}

JacksonSpec jackson_spec_for_gaps(std::int64_t n, double delta, double lambda) {
  if (n < 2) throw InvalidInput("the gap network needs N >= 2");
  if (!(delta >= 0.0) || !(lambda >= 0.0)) throw InvalidInput("delta and lambda must be >= 0");
  const auto size = static_cast<std::size_t>(n);
  const auto nn = static_cast<double>(n);
  JacksonSpec spec;
  spec.arrivals.assign(size, 0.0);
  spec.services.assign(size, 0.0);
  spec.routing.assign(size, std::vector<double>(size + 1, 0.0));
  spec.arrivals[size - 1] = 1.0 + delta;
  spec.services[0] = 1.0;
  spec.routing[0][2] = 1.0;
  for (std::size_t j = 2; j <= size; ++j) {
    const double pull = 1.0 + lambda * static_cast<double>(j - 1) / nn;
    const double mu = 1.0 + delta + pull;
    spec.services[j - 1] = mu;
    spec.routing[j - 1][j - 1] = (1.0 + delta) / mu;
    if (j < size) {
      spec.routing[j - 1][j + 1] = pull / mu;
    } else {
      spec.routing[j - 1][0] = pull / mu;
    }
  }
  return spec;
}

std::vector<GapTransition> jackson_rates(const JacksonSpec& spec, const GapState& z) {
  const std::size_t n = spec.nodes();
  if (z.size() != n) throw InvalidInput("queue state has the wrong number of nodes");
  std::vector<GapTransition> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.arrivals[i] > 0.0) {
      GapState t = z;
      ++t.gaps[i];
      out.push_back({std::move(t), spec.arrivals[i]});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i] == 0 || spec.services[i] == 0.0) continue;
    for (std::size_t j = 0; j <= n; ++j) {
      const double rate = spec.services[i] * spec.routing[i][j];
      if (rate == 0.0) continue;
      GapState t = z;
      --t.gaps[i];
      if (j > 0) ++t.gaps[j - 1];
      out.push_back({std::move(t), rate});
    }
  }
  return out;
}

namespace {

std::map<std::vector<Position>, double> jump_distribution(const std::vector<GapTransition>& moves) {
  double total = 0.0;
  for (const auto& m : moves) total += m.rate;
  std::map<std::vector<Position>, double> p;
  for (const auto& m : moves) p[m.target.gaps] += m.rate / total;
  return p;
}

}  // namespace

double embedded_chain_difference_2(double delta, double lambda, std::int64_t window) {
  const auto spec = jackson_spec_for_gaps(2, delta, lambda);
  double worst = 0.0;
  for (Position x = 0; x < window; ++x) {
    for (Position y = 0; y < window; ++y) {
      const GapState g{{x, y}};
      auto pg = jump_distribution(gap_rates_2(g, delta, lambda));
      auto pz = jump_distribution(jackson_rates(spec, g));
      for (const auto& [target, p] : pg) worst = std::max(worst, std::abs(p - pz[target]));
      for (const auto& [target, p] : pz) worst = std::max(worst, std::abs(p - pg[target]));
    }
  }
  return worst;
}

std::vector<double> traffic_solve(const JacksonSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.nodes());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd arrivals(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    arrivals(i) = spec.arrivals[si];
    if (spec.services[si] == 0.0) continue;
    for (Eigen::Index j = 0; j < n; ++j) p(i, j) = spec.routing[si][static_cast<std::size_t>(j) + 1];
  }
  const double radius = p.eigenvalues().cwiseAbs().maxCoeff();
  if (!(radius < 1.0 - 1e-12)) {
    throw NoUniqueSolution("routing matrix has spectral radius " + std::to_string(radius) +
                           "; the network is not open");
  }
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - p.transpose();
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw NoUniqueSolution("traffic equations are singular");
  Eigen::VectorXd nu = lu.solve(arrivals);
  // one step of iterative refinement
  nu += lu.solve(arrivals - system * nu);
  return {nu.data(), nu.data() + n};
}

double traffic_residual(const JacksonSpec& spec, const std::vector<double>& nu) {
  const std::size_t n = spec.nodes();
  if (nu.size() != n) throw InvalidInput("traffic vector has the wrong length");
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double r = nu[j] - spec.arrivals[j];
    for (std::size_t i = 0; i < n; ++i) {
      if (spec.services[i] > 0.0) r -= nu[i] * spec.routing[i][j + 1];
    }
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

JacksonVerdict jackson_analysis(const JacksonSpec& spec) {
  JacksonVerdict v;
  v.nu = traffic_solve(spec);
  v.margin = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (std::size_t i = 0; i < spec.nodes(); ++i) {
    if (spec.services[i] > 0.0) {
      v.margin = std::min(v.margin, spec.services[i] - v.nu[i]);
      ok = ok && v.nu[i] < spec.services[i];
    } else if (v.nu[i] > 0.0) {
      v.margin = std::min(v.margin, -v.nu[i]);
      ok = false;
    }
  }
  v.ergodic = ok;
  v.near_critical = std::abs(v.margin) <= 1e-12;
  return v;
}

bool jackson_ergodic(const JacksonSpec& spec) { return jackson_analysis(spec).ergodic; }

namespace {

// Root of an increasing f with f(0+) < 0, bracketed from [1e-12, hi] with
// hi doubled until f(hi) > 0 and bisected to full double precision.
double increasing_root(const std::function<double(double)>& f) {
  double lo = 1e-12;
  if (f(lo) >= 0.0) return lo;
  double hi = 1.0;
  while (f(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw InternalError("root bracket diverged");
  }
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double conjectured_critical_N(std::int64_t n, double delta) {
  if (n < 2) throw InvalidInput("conjectured critical value needs N >= 2");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidInput("delta must be >= 0");
  if (delta == 0.0) return 0.0;
  const auto nn = static_cast<double>(n);
  const double target = nn * std::log1p(delta);
  return increasing_root([&](double lambda) {
    double s = 0.0;
    for (std::int64_t k = 1; k < n; ++k) s += std::log1p(lambda * static_cast<double>(k) / nn);
    return s - target;
  });
}

double conjectured_critical_limit(double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidInput("delta must be >= 0");
  if (delta == 0.0) return 0.0;
  const double target = std::log1p(delta);
  return increasing_root([&](double lambda) {
    return ((1.0 + lambda) * std::log1p(lambda) - lambda) / lambda - target;
  });
}

double continuum_critical(std::int64_t n, double delta) {
  if (n < 2) throw InvalidInput("continuum critical value needs N >= 2");
  if (!(delta >= 0.0)) throw InvalidInput("delta must be >= 0");
  const auto nn = static_cast<double>(n);
  return 2.0 * delta * nn / (nn - 1.0);
}

ContinuumGapParams continuum_gap_params(std::int64_t n, double delta, double lambda) {
  if (n < 2) throw InvalidInput("continuum gap parameters need N >= 2");
  if (!(delta >= 0.0)) throw InvalidInput("delta must be >= 0");
  if (!(lambda > 0.0)) throw InvalidInput("continuum gap parameters need lambda > 0");
  const auto nn = static_cast<double>(n);
  const double shift = (lambda * (2.0 - nn) + 2.0 * delta * nn) / lambda;
  ContinuumGapParams p;
  p.all_positive = true;
  for (std::int64_t i = 1; i <= n; ++i) {
    const auto ii = static_cast<double>(i);
    const double a = lambda / (2.0 * nn) * (nn + 1.0 - ii) * (ii - shift);
    p.a.push_back(a);
    p.all_positive = p.all_positive && a > 0.0;
  }
  return p;
}

}  // namespace mfw
