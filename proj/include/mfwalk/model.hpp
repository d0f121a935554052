#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfwalk/probability.hpp"

namespace mfw {

using Position = std::int64_t;

/// Point of N^N in particle coordinates (x_1, ..., x_N).
struct ParticleState {
  std::vector<Position> positions;

  std::size_t size() const { return positions.size(); }
  Position operator[](std::size_t i) const { return positions[i]; }
  Position& operator[](std::size_t i) { return positions[i]; }
  bool operator==(const ParticleState&) const = default;
};

enum class KernelKind { SmallJump, JumpToLower, Tabulated };

/// Dense (phi, psi) tables on [0, x_max]^2.
struct KernelTable {
  Position x_max = 0;
  std::vector<double> phi;        // row-major, (x_max + 1)^2
  std::vector<Position> psi;

  double phi_at(Position x, Position y) const;
  Position psi_at(Position x, Position y) const;
};

/// Interaction kernel: pair activation weight phi and jump amplitude psi.
///
/// SmallJump is phi = psi = 1, JumpToLower is phi = 1, psi(x, y) = |x - y|.
/// Tabulated kernels are validated on construction (phi in [0, 1], psi
/// integer in [1, max(x, y)], both symmetric off the diagonal) and refuse
/// lookups outside their table.
class Kernel {
 public:
  static Kernel small_jump();
  static Kernel jump_to_lower();
  static Kernel tabulated(KernelTable table);
  /// Reads rows `x,y,phi,psi` (optional header); a missing mirror entry is
  /// filled from its symmetric partner.
  static Kernel from_csv(const std::string& path);

  KernelKind kind() const { return kind_; }
  const KernelTable* table() const { return table_.get(); }

  double phi(Position x, Position y) const;
  Position psi(Position x, Position y) const;
  /// True when phi == 1 on every off-diagonal pair.
  bool always_activates() const;
  std::string name() const;

  bool operator==(const Kernel& other) const;

 private:
  KernelKind kind_ = KernelKind::SmallJump;
  std::shared_ptr<const KernelTable> table_;
};

/// (N, delta, lambda, kernel) defining an N-particle generator.
struct ModelSpec {
  std::int64_t n_particles = 1;
  double delta = 0.0;
  double lambda = 0.0;
  Kernel kernel = Kernel::small_jump();

  static ModelSpec small_jump(std::int64_t n, double delta, double lambda);
  static ModelSpec jump_to_lower(std::int64_t n, double delta, double lambda);

  /// Throws InvalidInput unless N >= 1, delta >= 0, lambda >= 0.
  void validate() const;
  void check_state(const ParticleState& state) const;
};

struct TransitionLabel {
  enum class Kind { Up, IntrinsicDown, InteractionDown };
  Kind kind = Kind::Up;
  std::size_t particle = 0;
  /// Partner k for per-pair interaction jumps; empty when the SmallJump
  /// interaction rates of a particle are aggregated.
  std::optional<std::size_t> partner;

  bool operator==(const TransitionLabel&) const = default;
};

struct Transition {
  ParticleState target;
  double rate = 0.0;
  TransitionLabel label;
};

/// Every transition of the generator out of `state`.
///
/// Up-jumps at rate 1 + delta, intrinsic down-jumps at rate 1 away from 0,
/// and for each ordered pair (i, k) with x_k < x_i a jump of x_i by
/// -psi(x_i, x_k) at rate lambda phi(x_i, x_k) / N. SmallJump interaction
/// jumps of one particle share a target and are merged into one entry.
std::vector<Transition> jump_rates(const ParticleState& state, const ModelSpec& model);

/// Sum of the rates returned by jump_rates.
double total_rate(const ParticleState& state, const ModelSpec& model);

ProbabilityVector empirical_measure(const ParticleState& state);

/// Whether `a` stochastically dominates `b` componentwise under the
/// monotone coupling of simulator.hpp. Requires equal (N, delta, lambda).
///
/// True when `a` is SmallJump and `b` activates every ordered pair with
/// weight one (phi == 1), or when both kernels coincide.
bool dominates(const ModelSpec& a, const ModelSpec& b);

/// Largest number of particles sharing a site.
std::int64_t pile_height(const ParticleState& state);

/// K_N(x) = (1/N) sum_i mu_N[0, x_i).
double lower_fraction_mean(const ParticleState& state);

}  // namespace mfw
