#include "mfwalk/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mfwalk/errors.hpp"

namespace mfw {

namespace {

std::size_t table_index(const KernelTable& t, Position x, Position y) {
  if (x < 0 || y < 0 || x > t.x_max || y > t.x_max) {
    throw InvalidInput("kernel lookup (" + std::to_string(x) + ", " + std::to_string(y) +
                       ") outside tabulated window [0, " + std::to_string(t.x_max) + "]");
  }
  return static_cast<std::size_t>(x * (t.x_max + 1) + y);
}

void validate_table(const KernelTable& t) {
  const auto side = static_cast<std::size_t>(t.x_max + 1);
  if (t.x_max < 0 || t.phi.size() != side * side || t.psi.size() != side * side) {
    throw InvalidInput("kernel table has inconsistent dimensions");
  }
  for (Position x = 0; x <= t.x_max; ++x) {
    for (Position y = 0; y <= t.x_max; ++y) {
      if (x == y) continue;
      const double p = t.phi_at(x, y);
      const Position s = t.psi_at(x, y);
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("phi must lie in [0, 1]");
      if (p != t.phi_at(y, x)) throw InvalidInput("phi must be symmetric");
      if (s != t.psi_at(y, x)) throw InvalidInput("psi must be symmetric");
      if (s < 1 || s > std::max(x, y)) throw InvalidInput("psi must satisfy 1 <= psi <= max(x, y)");
    }
  }
}

}  // namespace

double KernelTable::phi_at(Position x, Position y) const { return phi[table_index(*this, x, y)]; }
Position KernelTable::psi_at(Position x, Position y) const { return psi[table_index(*this, x, y)]; }

Kernel Kernel::small_jump() { return Kernel{}; }

Kernel Kernel::jump_to_lower() {
  Kernel k;
  k.kind_ = KernelKind::JumpToLower;
  return k;
}

Kernel Kernel::tabulated(KernelTable table) {
  validate_table(table);
  Kernel k;
  k.kind_ = KernelKind::Tabulated;
  k.table_ = std::make_shared<const KernelTable>(std::move(table));
  return k;
}

Kernel Kernel::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open kernel table " + path);
  std::map<std::pair<Position, Position>, std::pair<double, Position>> rows;
  Position x_max = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Position x = 0;
    Position y = 0;
    double phi = 0.0;
    double psi = 0.0;
    if (!(ls >> x >> y >> phi >> psi)) {
      if (lineno == 1) continue;  // header
      throw InvalidInput("malformed kernel row " + std::to_string(lineno) + " in " + path);
    }
    if (psi != std::floor(psi)) throw InvalidInput("psi must be an integer");
    if (x < 0 || y < 0) throw InvalidInput("kernel coordinates must be nonnegative");
    rows[{x, y}] = {phi, static_cast<Position>(psi)};
    x_max = std::max({x_max, x, y});
  }
  KernelTable t;
  t.x_max = x_max;
  const auto side = static_cast<std::size_t>(x_max + 1);
  t.phi.assign(side * side, 1.0);
  t.psi.assign(side * side, 1);
  for (Position x = 0; x <= x_max; ++x) {
    for (Position y = 0; y <= x_max; ++y) {
      auto it = rows.find({x, y});
      if (it == rows.end()) it = rows.find({y, x});
      if (it == rows.end()) {
        if (x == y) continue;
        throw InvalidInput("kernel table " + path + " misses entry (" + std::to_string(x) +
                           ", " + std::to_string(y) + ")");
      }
      const auto idx = static_cast<std::size_t>(x) * side + static_cast<std::size_t>(y);
      t.phi[idx] = it->second.first;
      t.psi[idx] = it->second.second;
    }
  }
  return tabulated(std::move(t));
}

double Kernel::phi(Position x, Position y) const {
  if (kind_ == KernelKind::Tabulated) return table_->phi_at(x, y);
  return 1.0;
}

Position Kernel::psi(Position x, Position y) const {
  switch (kind_) {
    case KernelKind::SmallJump:
      return 1;
    case KernelKind::JumpToLower:
      return x > y ? x - y : y - x;
    case KernelKind::Tabulated:
      return table_->psi_at(x, y);
  }
  return 1;
}

bool Kernel::always_activates() const {
  if (kind_ != KernelKind::Tabulated) return true;
  for (Position x = 0; x <= table_->x_max; ++x) {
    for (Position y = 0; y <= table_->x_max; ++y) {
      if (x != y && table_->phi_at(x, y) != 1.0) return false;
    }
  }
  return true;
}

std::string Kernel::name() const {
  switch (kind_) {
    case KernelKind::SmallJump:
      return "small_jump";
    case KernelKind::JumpToLower:
      return "jump_to_lower";
    case KernelKind::Tabulated:
      return "tabulated";
  }
  return "unknown";
}

bool Kernel::operator==(const Kernel& other) const {
  if (kind_ != other.kind_) return false;
  if (kind_ != KernelKind::Tabulated) return true;
  return table_ == other.table_ ||
         (table_->x_max == other.table_->x_max && table_->phi == other.table_->phi &&
          table_->psi == other.table_->psi);
}

ModelSpec ModelSpec::small_jump(std::int64_t n, double delta, double lambda) {
  ModelSpec m{n, delta, lambda, Kernel::small_jump()};
  m.validate();
  return m;
}

ModelSpec ModelSpec::jump_to_lower(std::int64_t n, double delta, double lambda) {
  ModelSpec m{n, delta, lambda, Kernel::jump_to_lower()};
  m.validate();
  return m;
}

void ModelSpec::validate() const {
  if (n_particles < 1) throw InvalidInput("model needs at least one particle");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidInput("delta must be >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be >= 0");
}

void ModelSpec::check_state(const ParticleState& state) const {
  if (static_cast<std::int64_t>(state.size()) != n_particles) {
    throw InvalidInput("state has " + std::to_string(state.size()) + " coordinates, model has N = " +
                       std::to_string(n_particles));
  }
  for (Position x : state.positions) {
    if (x < 0) throw InvalidInput("particle positions must be nonnegative");
  }
}

std::vector<Transition> jump_rates(const ParticleState& state, const ModelSpec& model) {
  model.check_state(state);
  const std::size_t n = state.size();
  const double pair_rate = model.lambda / static_cast<double>(n);
  const bool aggregate = model.kernel.kind() == KernelKind::SmallJump;
  using Kind = TransitionLabel::Kind;

  std::vector<Transition> out;
  out.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Position xi = state[i];
    {
      Transition t{state, 1.0 + model.delta, {Kind::Up, i, std::nullopt}};
      t.target[i] += 1;
      out.push_back(std::move(t));
    }
    if (xi > 0) {
      Transition t{state, 1.0, {Kind::IntrinsicDown, i, std::nullopt}};
      t.target[i] -= 1;
      out.push_back(std::move(t));
    }
    if (model.lambda <= 0.0) continue;
    if (aggregate) {
      std::size_t lower = 0;
      for (std::size_t k = 0; k < n; ++k) lower += state[k] < xi ? 1 : 0;
      if (lower > 0) {
        Transition t{state, pair_rate * static_cast<double>(lower),
                     {Kind::InteractionDown, i, std::nullopt}};
        t.target[i] -= 1;
        out.push_back(std::move(t));
      }
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const Position xk = state[k];
      if (xk >= xi) continue;
      const double phi = model.kernel.phi(xi, xk);
      if (phi <= 0.0) continue;
      Transition t{state, pair_rate * phi, {Kind::InteractionDown, i, k}};
      t.target[i] -= model.kernel.psi(xi, xk);
      if (t.target[i] < 0) throw InternalError("kernel jump below zero");
      out.push_back(std::move(t));
    }
  }
  return out;
}

double total_rate(const ParticleState& state, const ModelSpec& model) {
  double r = 0.0;
  for (const auto& t : jump_rates(state, model)) r += t.rate;
  return r;
}

ProbabilityVector empirical_measure(const ParticleState& state) {
  if (state.size() == 0) throw InvalidInput("empirical measure of an empty state");
  const Position top = *std::max_element(state.positions.begin(), state.positions.end());
  if (top < 0) throw InvalidInput("particle positions must be nonnegative");
  std::vector<double> mass(static_cast<std::size_t>(top) + 1, 0.0);
  const double w = 1.0 / static_cast<double>(state.size());
  for (Position x : state.positions) {
    if (x < 0) throw InvalidInput("particle positions must be nonnegative");
    mass[static_cast<std::size_t>(x)] += w;
  }
  return ProbabilityVector(std::move(mass), 0.0);
}

bool dominates(const ModelSpec& a, const ModelSpec& b) {
  a.validate();
  b.validate();
  if (a.n_particles != b.n_particles || a.delta != b.delta || a.lambda != b.lambda) {
    throw InvalidInput("dominates() needs models with equal (N, delta, lambda)");
  }
  if (a.kernel == b.kernel) return true;
  return a.kernel.kind() == KernelKind::SmallJump && b.kernel.always_activates();
}

std::int64_t pile_height(const ParticleState& state) {
  std::vector<Position> s = state.positions;
  std::sort(s.begin(), s.end());
  std::int64_t best = 0;
  std::int64_t run = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    run = (i > 0 && s[i] == s[i - 1]) ? run + 1 : 1;
    best = std::max(best, run);
  }
  return best;
}

double lower_fraction_mean(const ParticleState& state) {
  const std::size_t n = state.size();
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) pairs += state[k] < state[i] ? 1 : 0;
  }
  return static_cast<double>(pairs) / static_cast<double>(n * n);
}

}  // namespace mfw
