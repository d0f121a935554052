#pragma once

#include <cstdint>
#include <vector>

#include "mfwalk/model.hpp"

namespace mfw {

/// Order-statistics coordinates: g_1 is the lowest position and g_i the
/// i-th gap X_(i) - X_(i-1).
struct GapState {
  std::vector<Position> gaps;

  std::size_t size() const { return gaps.size(); }
  Position operator[](std::size_t i) const { return gaps[i]; }
  bool operator==(const GapState&) const = default;
};

GapState to_gaps(const ParticleState& state);
/// Sorted particle configuration with the given gaps.
ParticleState from_gaps(const GapState& g);

struct GapTransition {
  GapState target;
  double rate = 0.0;
};

/// Jump rates of the N = 2 gap process, boundary cases included.
/// Throws InvalidInput unless g has two entries.
std::vector<GapTransition> gap_rates_2(const GapState& g, double delta, double lambda);

/// Law on a rectangle [0, nx) x [0, ny) of N^2 plus the mass outside it.
struct GridLaw {
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  std::vector<double> mass;  // mass[x * ny + y]
  double tail = 0.0;

  double at(std::int64_t x, std::int64_t y) const;
  double total() const;
};

/// Total variation between two grid laws; mass outside either window counts
/// as disjoint.
double tv_distance(const GridLaw& a, const GridLaw& b);

/// Stationary law of the N = 2 gap process.
///
/// pi(x, y) = C a^x b^y with a = (1+delta)^2 / (1+lambda/2) and
/// b = (1+delta) / (1+lambda/2), halved on the row y = 0. C is fixed by
/// normalization; the window is chosen so that the mass outside it is at
/// most `tolerance`.
struct Pi2Law {
  double delta = 0.0;
  double lambda = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  GridLaw grid;

  /// Closed-form value at any (x, y), inside the window or not.
  double value(std::int64_t x, std::int64_t y) const;
};

/// Throws NonErgodicParameter unless lambda > 2 delta^2 + 4 delta.
Pi2Law pi2(double delta, double lambda, double tolerance = 1e-12);

/// max over the window of |sum_in pi rate - pi(x, y) out_rate(x, y)|, with
/// every pi value taken from the closed form.
double pi2_stationarity_residual(const Pi2Law& law);

/// The normalizing constant against closed forms with the denominator
/// factor (lambda/2 + d) read as d = 2 delta, d = delta^2 and d = delta + 2.
struct Pi2ConstantDiagnostic {
  double numeric = 0.0;
  double reading_two_delta = 0.0;
  double reading_delta_squared = 0.0;
  double reading_delta_plus_two = 0.0;
};
Pi2ConstantDiagnostic pi2_constant_diagnostic(double delta, double lambda);

struct G2Occupation {
  GridLaw law;  // time-weighted occupation, normalized
  std::int64_t events = 0;
  double time = 0.0;
};

/// Simulates the N = 2 gap process for `events` jumps and returns its
/// time-weighted occupation measure on a window large enough for the path.
G2Occupation simulate_gaps_2(double delta, double lambda, const GapState& init,
                             std::int64_t events, std::uint64_t seed);

/// Open Jackson network on nodes 1..N (stored 0-based).
/// routing[i][0] is the exit probability of node i + 1 and routing[i][j]
/// the probability of moving to node j.
struct JacksonSpec {
  std::vector<double> arrivals;
  std::vector<double> services;
  std::vector<std::vector<double>> routing;

  std::size_t nodes() const { return arrivals.size(); }
  /// Throws InvalidInput on shape errors, entries outside [0, 1] or rows of
  /// served nodes not summing to one.
  void validate() const;
};

/// Network whose queue lengths follow the gaps: arrivals 1 + delta at node
/// N, service 2 + delta + lambda (j - 1) / N at nodes j >= 2, routing
/// j -> j + 1 with probability (1 + lambda (j - 1) / N) / mu_j, j -> j - 1
/// with (1 + delta) / mu_j, exit from node N; node 1 serves at rate 1 and
/// always routes to node 2.
JacksonSpec jackson_spec_for_gaps(std::int64_t n, double delta, double lambda);

/// Jumps of the network from queue state z: arrivals, exits and routings,
/// with services suppressed at empty nodes.
std::vector<GapTransition> jackson_rates(const JacksonSpec& spec, const GapState& z);

/// Largest difference between the embedded jump distributions of the
/// N = 2 gap process and its Jackson network over [0, window)^2.
double embedded_chain_difference_2(double delta, double lambda, std::int64_t window);

/// Solves nu_j = lambda_j + sum_i nu_i p_{i,j}.
/// Throws NoUniqueSolution when the routing matrix has spectral radius
/// >= 1 (closed network) or the system is singular.
std::vector<double> traffic_solve(const JacksonSpec& spec);

/// max_j |nu_j - lambda_j - sum_i nu_i p_{i,j}|.
double traffic_residual(const JacksonSpec& spec, const std::vector<double>& nu);

struct JacksonVerdict {
  std::vector<double> nu;
  bool ergodic = false;
  /// min over served nodes of mu_i - nu_i.
  double margin = 0.0;
  /// |margin| <= 1e-12: the decision sits at machine precision.
  bool near_critical = false;
};
JacksonVerdict jackson_analysis(const JacksonSpec& spec);

/// nu_i < mu_i at every node with mu_i > 0 (and nu_i = 0 where mu_i = 0).
bool jackson_ergodic(const JacksonSpec& spec);

/// Root in lambda of N log(1 + delta) = sum_{k=1}^{N-1} log(1 + lambda k / N).
double conjectured_critical_N(std::int64_t n, double delta);

/// Root in lambda of (1 + 1/lambda) log(1 + lambda) - 1 = log(1 + delta).
double conjectured_critical_limit(double delta);

/// 2 delta N / (N - 1).
double continuum_critical(std::int64_t n, double delta);

struct ContinuumGapParams {
  /// a_i = (lambda / 2N) (N + 1 - i) (i - (lambda (2 - N) + 2 delta N) / lambda).
  std::vector<double> a;
  bool all_positive = false;
};
ContinuumGapParams continuum_gap_params(std::int64_t n, double delta, double lambda);

}  // namespace mfw
