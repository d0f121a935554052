// Command-line front end for the mfwalk library.
//
// Exit codes: 0 success, 1 invalid input or usage error, 2 event budget
// exceeded or truncation overflow.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mfwalk/config.hpp"
#include "mfwalk/csv.hpp"
#include "mfwalk/errors.hpp"
#include "mfwalk/gap_jackson.hpp"
#include "mfwalk/lyapunov.hpp"
#include "mfwalk/nonlinear.hpp"
#include "mfwalk/simulator.hpp"
#include "mfwalk/sweep.hpp"

namespace {

using mfw::format_double;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitBudget = 2;

struct SimulateArgs {
  std::string config;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::int64_t snapshots = 0;
  std::int64_t max_events = 100'000'000;
  std::string init;
  bool probe = false;
  std::string out = "-";
};

struct FixedPointArgs {
  double delta = 0.0;
  double lambda = 0.0;
  double tol = 1e-10;
  std::int64_t max_iter = 1000;
  std::string out = "-";
};

struct CriticalArgs {
  std::int64_t n = 2;
  double delta = 0.0;
  std::string mode = "conjectured";
};

struct Pi2Args {
  double delta = 0.0;
  double lambda = 0.0;
  double tol = 1e-12;
  std::string out = "-";
};

struct CertifyArgs {
  std::string kind = "ergodic";
  std::int64_t n = 2;
  double delta = 0.0;
  double lambda = 0.0;
  std::int64_t box = 30;
  std::int64_t exceptional = -1;
  std::optional<double> epsilon;
  std::string out = "-";
};

struct SweepArgs {
  std::string config;
  std::string out;
  std::int64_t workers = 0;
};

struct ChaosArgs {
  double delta = 0.0;
  double lambda = 2.0;
  std::string n_list = "10,50,250";
  double horizon = 5.0;
  std::int64_t replicates = 200;
  std::uint64_t seed = 0;
  std::string mu0 = "1,1,1,1,1";
  std::int64_t max_events = 100'000'000;
  std::string out = "-";
};

void run_simulate(const SimulateArgs& a) {
  const auto cfg = mfw::KeyValueConfig::load(a.config);
  const auto base = std::filesystem::path(a.config).parent_path().string();
  const auto model = mfw::model_from_config(cfg, base);
  const auto init =
      a.init.empty()
          ? mfw::ParticleState{std::vector<mfw::Position>(static_cast<std::size_t>(model.n_particles), 0)}
          : mfw::parse_state(a.init, model.n_particles);

  if (a.probe) {
    const auto d = mfw::recurrence_probe(model, init, a.horizon, {}, a.seed, a.max_events);
    mfw::CsvWriter out(a.out, "diagnosis");
    out.meta("kernel", model.kernel.name());
    out.meta("horizon", a.horizon);
    out.meta("seed", std::to_string(a.seed));
    out.header({"n", "delta", "lambda", "verdict", "slope", "returns"});
    out.row({std::to_string(model.n_particles), format_double(model.delta),
             format_double(model.lambda), mfw::to_string(d.verdict),
             format_double(d.min_position_slope), std::to_string(d.returns_to_origin)});
    out.flush();
    return;
  }

  mfw::SimulationOptions opts;
  opts.max_events = a.max_events;
  opts.snapshots = a.snapshots;
  const auto traj = mfw::simulate(init, model, a.horizon, a.seed, opts);
  mfw::CsvWriter out(a.out, "trajectory");
  out.meta("kernel", model.kernel.name());
  out.meta("n", static_cast<double>(model.n_particles));
  out.meta("delta", model.delta);
  out.meta("lambda", model.lambda);
  out.meta("horizon", a.horizon);
  out.meta("seed", std::to_string(a.seed));
  std::vector<std::string> header{"time"};
  for (std::int64_t i = 1; i <= model.n_particles; ++i) header.push_back("x" + std::to_string(i));
  out.header(header);
  for (const auto& p : traj.events) {
    std::vector<std::string> row{format_double(p.time)};
    for (auto x : p.state.positions) row.push_back(std::to_string(x));
    out.row(row);
  }
  out.flush();
}

void run_fixedpoint(const FixedPointArgs& a) {
  mfw::FixedPointOptions opts;
  opts.tolerance = a.tol;
  opts.max_iterations = a.max_iter;
  const auto r =
      mfw::gamma_fixed_point(a.delta, a.lambda, mfw::ProbabilityVector::point_mass(0), opts);
  mfw::CsvWriter out(a.out, "fixedpoint");
  out.meta("delta", a.delta);
  out.meta("lambda", a.lambda);
  out.meta("regime", mfw::to_string(r.regime));
  out.meta("converged", r.converged ? "true" : "false");
  out.meta("damped", r.damped ? "true" : "false");
  out.meta("iterations", static_cast<double>(r.iterations));
  out.meta("final_step_tv", r.final_step_tv);
  out.meta("stationarity_residual", r.stationarity_residual);
  out.meta("ordered_pair_mass", r.ordered_pair_mass);
  out.meta("mean_identity_residual", r.mean_identity_residual);
  out.meta("reflected_identity_residual", r.reflected_identity_residual);
  out.meta("tail_bound", r.measure.tail_bound());
  out.header({"x", "mass"});
  const auto mass = r.measure.mass();
  for (std::size_t x = 0; x < mass.size(); ++x) out.row({std::to_string(x), format_double(mass[x])});
  out.flush();
}

void run_critical(const CriticalArgs& a) {
  mfw::CsvWriter out(std::cout, "critical");
  if (a.mode == "conjectured") {
    out.header({"n", "delta", "conjectured_critical"});
    out.row({std::to_string(a.n), format_double(a.delta),
             format_double(mfw::conjectured_critical_N(a.n, a.delta))});
  } else if (a.mode == "continuum") {
    out.header({"n", "delta", "continuum_critical"});
    out.row({std::to_string(a.n), format_double(a.delta),
             format_double(mfw::continuum_critical(a.n, a.delta))});
  } else if (a.mode == "limit") {
    out.header({"delta", "conjectured_limit"});
    out.row({format_double(a.delta), format_double(mfw::conjectured_critical_limit(a.delta))});
  } else {
    const auto b = mfw::existence_bounds(a.delta);
    out.header({"delta", "no_stationary_below", "stationary_above", "conjectured_limit"});
    out.row({format_double(a.delta), format_double(b.no_stationary_below),
             format_double(b.stationary_above), format_double(b.conjectured)});
  }
}

void run_pi2(const Pi2Args& a) {
  const auto law = mfw::pi2(a.delta, a.lambda, a.tol);
  mfw::CsvWriter out(a.out, "pi2");
  out.meta("delta", a.delta);
  out.meta("lambda", a.lambda);
  out.meta("c", law.c);
  out.meta("tail_bound", law.grid.tail);
  out.meta("stationarity_residual", mfw::pi2_stationarity_residual(law));
  out.header({"x", "y", "mass"});
  for (std::int64_t x = 0; x < law.grid.nx; ++x) {
    for (std::int64_t y = 0; y < law.grid.ny; ++y) {
      out.row({std::to_string(x), std::to_string(y), format_double(law.grid.at(x, y))});
    }
  }
  out.flush();
}

void run_certify(const CertifyArgs& a) {
  mfw::CsvWriter out(a.out, "certificate");
  if (a.kind == "ergodic") {
    mfw::ErgodicSearchOptions opts;
    opts.box_radius = a.box;
    opts.exceptional_radius = a.exceptional;
    const auto c = mfw::ergodic_certificate_search(a.n, a.delta, a.lambda, opts);
    out.meta("scope", "finite-box check, not a proof");
    out.header({"kind", "n", "delta", "lambda", "alpha", "beta", "c", "gamma", "h", "box",
                "exceptional", "states", "worst_residual", "holds"});
    out.row({"ergodic", std::to_string(c.n), format_double(c.delta), format_double(c.lambda),
             format_double(c.alpha), format_double(c.beta), format_double(c.c),
             format_double(c.gamma), format_double(c.h), std::to_string(c.box_radius),
             std::to_string(c.exceptional_radius), std::to_string(c.states_checked),
             format_double(c.worst_residual), c.holds ? "true" : "false"});
  } else {
    const auto eps = a.epsilon ? a.epsilon : mfw::epsilon_search(a.n, a.delta, a.lambda);
    const auto c = mfw::transience_certificate(a.n, a.delta, a.lambda, eps.value_or(0.0));
    out.meta("epsilon_source", a.epsilon ? "user" : (eps ? "search" : "none-feasible"));
    out.header({"kind", "n", "delta", "lambda", "epsilon", "epsilon_n", "worst_residual",
                "holds"});
    out.row({"transient", std::to_string(c.n), format_double(c.delta), format_double(c.lambda),
             format_double(c.epsilon), format_double(mfw::epsilon_N(a.n, a.delta)),
             format_double(c.worst_residual), c.holds ? "true" : "false"});
  }
  out.flush();
}

void run_sweep(const SweepArgs& a) {
  auto cfg = mfw::SweepConfig::from_config(mfw::KeyValueConfig::load(a.config));
  if (!a.out.empty()) cfg.output = a.out;
  if (cfg.output.empty()) cfg.output = "-";
  cfg.workers = a.workers;
  mfw::run_sweep(cfg);
}

void run_chaos(const ChaosArgs& a) {
  std::vector<double> weights;
  for (double w : mfw::parse_grid(a.mu0)) weights.push_back(w);
  const auto mu0 = mfw::ProbabilityVector::from_weights(weights);
  const auto points = mfw::chaos_distance(a.delta, a.lambda, mfw::parse_int_list(a.n_list), mu0,
                                          a.horizon, a.replicates, a.seed, a.max_events);
  mfw::CsvWriter out(a.out, "chaos");
  out.meta("delta", a.delta);
  out.meta("lambda", a.lambda);
  out.meta("horizon", a.horizon);
  out.meta("replicates", static_cast<double>(a.replicates));
  out.meta("seed", std::to_string(a.seed));
  out.header({"n", "tv", "standard_error"});
  for (const auto& p : points) {
    out.row({std::to_string(p.n), format_double(p.tv), format_double(p.standard_error)});
  }
  out.flush();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field interacting random walks: simulation and exact numerics", "mfwalk"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate the N-particle system");
  s->add_option("--config", sim.config, "Model key=value file")->required()->check(CLI::ExistingFile);
  s->add_option("--horizon", sim.horizon, "Time horizon")->required();
  s->add_option("--seed", sim.seed, "Random seed");
  s->add_option("--snapshots", sim.snapshots, "Record the state on this many grid times");
  s->add_option("--max-events", sim.max_events, "Event budget");
  s->add_option("--init", sim.init, "Initial positions x1,x2,... (default all 0)");
  s->add_flag("--probe", sim.probe, "Print a recurrence diagnosis instead of the trajectory");
  s->add_option("--out", sim.out, "Output CSV ('-' for stdout)");

  FixedPointArgs fp;
  auto* f = app.add_subcommand("fixedpoint", "Stationary law of the nonlinear process");
  f->add_option("--delta", fp.delta)->required();
  f->add_option("--lambda", fp.lambda)->required();
  f->add_option("--tol", fp.tol, "Total-variation step tolerance");
  f->add_option("--max-iter", fp.max_iter, "Iteration cap");
  f->add_option("--out", fp.out);

  CriticalArgs cr;
  auto* c = app.add_subcommand("critical", "Critical interaction strengths");
  c->add_option("--n", cr.n, "Number of particles");
  c->add_option("--delta", cr.delta)->required();
  c->add_option("--mode", cr.mode)
      ->check(CLI::IsMember({"conjectured", "continuum", "limit", "bounds"}));

  Pi2Args p2;
  auto* p = app.add_subcommand("pi2", "Exact stationary law of the two-particle gap process");
  p->add_option("--delta", p2.delta)->required();
  p->add_option("--lambda", p2.lambda)->required();
  p->add_option("--tol", p2.tol, "Mass allowed outside the window");
  p->add_option("--out", p2.out);

  CertifyArgs ce;
  auto* e = app.add_subcommand("certify", "Drift certificates");
  e->add_option("--kind", ce.kind)->check(CLI::IsMember({"ergodic", "transient"}));
  e->add_option("--n", ce.n)->required();
  e->add_option("--delta", ce.delta)->required();
  e->add_option("--lambda", ce.lambda)->required();
  e->add_option("--box", ce.box, "Box radius for the ergodic check");
  e->add_option("--exceptional", ce.exceptional, "Exceptional-set radius (default box/2)");
  e->add_option("--epsilon", ce.epsilon, "Transience weight (default: searched)");
  e->add_option("--out", ce.out);

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Phase-diagram sweep");
  w->add_option("--config", sw.config, "Sweep key=value file")->required()->check(CLI::ExistingFile);
  w->add_option("--out", sw.out, "Output CSV (overrides the config)");
  w->add_option("--workers", sw.workers, "Worker threads (default MFW_WORKERS or all cores)");

  ChaosArgs ch;
  auto* h = app.add_subcommand("chaos", "Propagation-of-chaos distances");
  h->add_option("--delta", ch.delta);
  h->add_option("--lambda", ch.lambda);
  h->add_option("--n-list", ch.n_list, "Comma-separated particle counts");
  h->add_option("--horizon", ch.horizon);
  h->add_option("--replicates", ch.replicates);
  h->add_option("--seed", ch.seed);
  h->add_option("--mu0", ch.mu0, "Initial law as weights on 0,1,2,...");
  h->add_option("--max-events", ch.max_events);
  h->add_option("--out", ch.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: " << ex.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    if (*s) run_simulate(sim);
    if (*f) run_fixedpoint(fp);
    if (*c) run_critical(cr);
    if (*p) run_pi2(p2);
    if (*e) run_certify(ce);
    if (*w) run_sweep(sw);
    if (*h) run_chaos(ch);
  } catch (const mfw::BudgetExceeded& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitBudget;
  } catch (const mfw::TruncationOverflow& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitBudget;
  } catch (const mfw::Error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}
