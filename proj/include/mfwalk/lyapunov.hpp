#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfwalk/model.hpp"

namespace mfw {

// V(x) = psi(x) phi(x) with psi = (1/N) sum_i e^{alpha x_i} and
// phi = e^{(beta/N) pile_height(x)}.

/// Throws InvalidInput unless alpha, beta > 0. Returns +inf when V
/// overflows a double; log_V is always finite.
double eval_V(const ParticleState& state, double alpha, double beta);
double log_V(const ParticleState& state, double alpha, double beta);

enum class DriftRegion {
  InteriorLike,  // all particles on distinct sites
  TallPile,      // pile_height > N / 2
  Complement,    // neither
};
const char* to_string(DriftRegion r);
DriftRegion drift_region(const ParticleState& state);

struct DriftEvaluation {
  ParticleState state;
  double value = 0.0;
  double log_value = 0.0;
  /// sum over transitions of rate * (V(target) - V(state)).
  double drift = 0.0;
  /// psi L phi + phi L psi + Gamma(psi, phi), evaluated term by term.
  double drift_decomposed = 0.0;
  double psi_l_phi = 0.0;
  double phi_l_psi = 0.0;
  double carre_du_champ = 0.0;
  /// drift / V, computed without forming V.
  double relative_drift = 0.0;
  DriftRegion region = DriftRegion::InteriorLike;
  std::int64_t pile_height = 0;
};

/// Drift of V under the SmallJump generator. All quantities are computed
/// relative to e^{alpha max_i x_i} and rescaled, so large states give
/// infinities rather than NaNs. Throws InvalidInput for other kernels.
DriftEvaluation drift_V(const ParticleState& state, const ModelSpec& model, double alpha,
                        double beta);

/// N (2 + lambda + delta) (e^alpha - 1) (e^{beta/N} - 1) V(x).
double carre_du_champ_bound(const ParticleState& state, const ModelSpec& model, double alpha,
                            double beta);

/// LV / V for the SmallJump model at the configuration with the given
/// occupied sites and counts (sites strictly increasing). Allocation-free
/// path used by the certificate search.
double relative_drift_sites(const std::vector<std::pair<Position, std::int64_t>>& sites,
                            double delta, double lambda, double alpha, double beta);

/// Every nondecreasing (x_1, ..., x_N) with entries in [0, radius].
/// Throws InvalidInput when there are more than `limit` of them.
std::vector<ParticleState> enumerate_multisets(std::int64_t n, std::int64_t radius,
                                               std::int64_t limit = 20'000'000);

enum class CertificateKind { ErgodicDrift, TransienceDrift };
const char* to_string(CertificateKind k);

struct Certificate {
  CertificateKind kind = CertificateKind::ErgodicDrift;
  std::int64_t n = 0;
  double delta = 0.0;
  double lambda = 0.0;
  // ergodic drift: L V <= -gamma V + H on the box, H attained on the
  // exceptional set {max_i x_i <= exceptional_radius}
  double alpha = 0.0;
  double beta = 0.0;
  double c = 0.0;
  double gamma = 0.0;
  double h = 0.0;
  std::int64_t box_radius = 0;
  std::int64_t exceptional_radius = 0;
  std::int64_t states_checked = 0;
  std::int64_t candidates = 0;
  // transience drift
  double epsilon = 0.0;
  /// Interior / W(N,1) value, then the k = 2..N wedge values.
  std::vector<double> region_values;
  /// Ergodic: max of LV/V off the exceptional set (must be < 0).
  /// Transience: min of the region values (must be > 0).
  double worst_residual = 0.0;
  bool holds = false;
  /// True for the ergodic certificate: it checks a finite box only.
  bool finite_box = false;
};

/// Feasible window for C = beta / alpha:
/// [delta/(1+delta), min((lambda - 4 delta)/lambda, (lambda/4 - delta)/(2 + delta + lambda/4))].
/// Empty (lo > hi) unless lambda >= 12 delta + 8 delta^2.
std::pair<double, double> ergodic_c_window(double delta, double lambda);

struct ErgodicSearchOptions {
  std::int64_t box_radius = 30;
  /// Negative: box_radius / 2.
  std::int64_t exceptional_radius = -1;
  /// Empty: 2^-k for k = 3..14.
  std::vector<double> alpha_grid;
  /// Empty: 64 interior points of ergodic_c_window (throws NoCandidate
  /// when the window is empty). A user grid is used as given.
  std::vector<double> c_grid;
  std::int64_t state_limit = 20'000'000;
};

/// Searches (alpha, beta = C alpha) for the largest gamma with
/// LV <= -gamma V off the exceptional set of the box. The certificate is
/// a finite-box check, not a proof.
Certificate ergodic_certificate_search(std::int64_t n, double delta, double lambda,
                                       const ErgodicSearchOptions& options = {});

/// Evaluates the wedge drifts of f_eps; holds iff all are positive, which
/// proves transience. Throws InvalidInput unless 0 <= epsilon <= 3 lambda / (4N).
Certificate transience_certificate(std::int64_t n, double delta, double lambda, double epsilon);

/// N^2 (delta + 2) / (N (N - 1)(delta + 2) - 2 delta) - 1.
double epsilon_N(std::int64_t n, double delta);

/// A feasible epsilon in [0, 3 lambda / (4N)] for transience_certificate:
/// 0 when that works, otherwise the midpoint of the feasible interval;
/// empty when there is none.
std::optional<double> epsilon_search(std::int64_t n, double delta, double lambda);

}  // namespace mfw
