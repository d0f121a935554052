#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfwalk/gap_jackson.hpp"
#include "mfwalk/lyapunov.hpp"
#include "mfwalk/nonlinear.hpp"
#include "mfwalk/simulator.hpp"

namespace py = pybind11;
using namespace mfw;

namespace {

ProbabilityVector to_law(const std::vector<double>& mass, double tail) {
  return ProbabilityVector(mass, tail);
}

py::dict cert_dict(const Certificate& c) {
  py::dict d;
  d["kind"] = to_string(c.kind);
  d["n"] = c.n;
  d["delta"] = c.delta;
  d["lambda"] = c.lambda;
  d["alpha"] = c.alpha;
  d["beta"] = c.beta;
  d["c"] = c.c;
  d["gamma"] = c.gamma;
  d["h"] = c.h;
  d["box_radius"] = c.box_radius;
  d["epsilon"] = c.epsilon;
  d["region_values"] = c.region_values;
  d["worst_residual"] = c.worst_residual;
  d["holds"] = c.holds;
  d["finite_box"] = c.finite_box;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mean-field interacting random walks: simulation and exact numerics";
  m.attr("__version__") = "0.1.0";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", error.ptr());
  py::register_exception<NonErgodicParameter>(m, "NonErgodicParameter", error.ptr());
  py::register_exception<TruncationOverflow>(m, "TruncationOverflow", error.ptr());
  py::register_exception<NoUniqueSolution>(m, "NoUniqueSolution", error.ptr());
  py::register_exception<NoCandidate>(m, "NoCandidate", error.ptr());

  py::class_<ProbabilityVector>(m, "ProbabilityVector")
      .def(py::init(&to_law), py::arg("mass"), py::arg("tail_bound") = 0.0)
      .def_static("point_mass", &ProbabilityVector::point_mass)
      .def_static("from_weights", &ProbabilityVector::from_weights)
      .def_property_readonly("mass", [](const ProbabilityVector& p) {
        return std::vector<double>(p.mass().begin(), p.mass().end());
      })
      .def_property_readonly("tail_bound", &ProbabilityVector::tail_bound)
      .def_property_readonly("support_bound", &ProbabilityVector::support_bound)
      .def("cdf", &ProbabilityVector::cdf)
      .def("mean", &ProbabilityVector::mean)
      .def("total", &ProbabilityVector::total);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def_static("small_jump", &ModelSpec::small_jump, py::arg("n"), py::arg("delta"),
                  py::arg("lambda_"))
      .def_static("jump_to_lower", &ModelSpec::jump_to_lower, py::arg("n"), py::arg("delta"),
                  py::arg("lambda_"))
      .def_readonly("n_particles", &ModelSpec::n_particles)
      .def_readonly("delta", &ModelSpec::delta)
      .def_readonly("lambda_", &ModelSpec::lambda)
      .def_property_readonly("kernel", [](const ModelSpec& s) { return s.kernel.name(); });

  m.def("jump_rates", [](const std::vector<Position>& x, const ModelSpec& model) {
    py::list out;
    for (const auto& t : jump_rates(ParticleState{x}, model)) {
      out.append(py::make_tuple(t.target.positions, t.rate));
    }
    return out;
  });
  m.def("empirical_measure",
        [](const std::vector<Position>& x) { return empirical_measure(ParticleState{x}); });
  m.def("dominates", &dominates);
  m.def("median", &median);
  m.def("tv_distance",
        py::overload_cast<const ProbabilityVector&, const ProbabilityVector&>(&tv_distance));

  m.def(
      "simulate",
      [](const std::vector<Position>& init, const ModelSpec& model, double horizon,
         std::uint64_t seed, std::int64_t snapshots) {
        SimulationOptions opts;
        opts.snapshots = snapshots;
        const auto traj = simulate(ParticleState{init}, model, horizon, seed, opts);
        std::vector<double> times;
        std::vector<std::vector<Position>> states;
        for (const auto& p : traj.events) {
          times.push_back(p.time);
          states.push_back(p.state.positions);
        }
        return py::make_tuple(times, states);
      },
      py::arg("init"), py::arg("model"), py::arg("horizon"), py::arg("seed") = 0,
      py::arg("snapshots") = 0);
  m.def(
      "recurrence_probe",
      [](const ModelSpec& model, const std::vector<Position>& init, double horizon,
         std::uint64_t seed) {
        const auto d = recurrence_probe(model, ParticleState{init}, horizon, {}, seed);
        py::dict out;
        out["verdict"] = to_string(d.verdict);
        out["slope"] = d.min_position_slope;
        out["t_statistic"] = d.slope_t_statistic;
        out["returns"] = d.returns_to_origin;
        out["occupation"] = d.occupation;
        return out;
      },
      py::arg("model"), py::arg("init"), py::arg("horizon"), py::arg("seed") = 0);
  m.def(
      "chaos_distance",
      [](double delta, double lambda, const std::vector<std::int64_t>& ns,
         const ProbabilityVector& mu0, double horizon, std::int64_t replicates,
         std::uint64_t seed) {
        py::list out;
        for (const auto& p : chaos_distance(delta, lambda, ns, mu0, horizon, replicates, seed)) {
          out.append(py::make_tuple(p.n, p.tv, p.standard_error));
        }
        return out;
      },
      py::arg("delta"), py::arg("lambda_"), py::arg("n_list"), py::arg("mu0"),
      py::arg("horizon"), py::arg("replicates"), py::arg("seed") = 0);

  py::class_<EvolveOptions>(m, "EvolveOptions")
      .def(py::init<>())
      .def_readwrite("step_tolerance", &EvolveOptions::step_tolerance)
      .def_readwrite("hard_cap", &EvolveOptions::hard_cap);
  m.def("evolve_law", &evolve_law, py::arg("mu0"), py::arg("delta"), py::arg("lambda_"),
        py::arg("horizon"), py::arg("tolerance") = 1e-12, py::arg("options") = EvolveOptions{});
  m.def("bd_stationary", &bd_stationary, py::arg("mu"), py::arg("delta"), py::arg("lambda_"),
        py::arg("tolerance") = 1e-15, py::arg("hard_cap") = 1'000'000);
  m.def("dominating_pi_m", &dominating_pi_m, py::arg("m"), py::arg("delta"), py::arg("lambda_"),
        py::arg("tolerance") = 1e-15);
  m.def("find_m_star", &find_m_star);
  m.def("stationarity_residual", &stationarity_residual);
  m.def(
      "gamma_fixed_point",
      [](double delta, double lambda, std::int64_t max_iter, double tol) {
        FixedPointOptions opts;
        opts.max_iterations = max_iter;
        opts.tolerance = tol;
        const auto r = gamma_fixed_point(delta, lambda, ProbabilityVector::point_mass(0), opts);
        py::dict out;
        out["measure"] = r.measure;
        out["iterations"] = r.iterations;
        out["final_step_tv"] = r.final_step_tv;
        out["converged"] = r.converged;
        out["regime"] = to_string(r.regime);
        out["stationarity_residual"] = r.stationarity_residual;
        out["ordered_pair_mass"] = r.ordered_pair_mass;
        out["mean_identity_residual"] = r.mean_identity_residual;
        out["reflected_identity_residual"] = r.reflected_identity_residual;
        out["median_history"] = r.median_history;
        return out;
      },
      py::arg("delta"), py::arg("lambda_"), py::arg("max_iter") = 1000, py::arg("tol") = 1e-10);
  m.def("existence_bounds", [](double delta) {
    const auto b = existence_bounds(delta);
    return py::make_tuple(b.no_stationary_below, b.stationary_above, b.conjectured);
  });

  m.def("to_gaps", [](const std::vector<Position>& x) { return to_gaps(ParticleState{x}).gaps; });
  m.def("from_gaps",
        [](const std::vector<Position>& g) { return from_gaps(GapState{g}).positions; });
  m.def("gap_rates_2", [](const std::vector<Position>& g, double delta, double lambda) {
    py::list out;
    for (const auto& t : gap_rates_2(GapState{g}, delta, lambda)) {
      out.append(py::make_tuple(t.target.gaps, t.rate));
    }
    return out;
  });
  m.def(
      "pi2",
      [](double delta, double lambda, double tol) {
        const auto law = pi2(delta, lambda, tol);
        std::vector<std::vector<double>> grid(static_cast<std::size_t>(law.grid.nx));
        for (std::int64_t x = 0; x < law.grid.nx; ++x) {
          auto& row = grid[static_cast<std::size_t>(x)];
          for (std::int64_t y = 0; y < law.grid.ny; ++y) row.push_back(law.grid.at(x, y));
        }
        py::dict out;
        out["mass"] = grid;
        out["tail_bound"] = law.grid.tail;
        out["c"] = law.c;
        out["stationarity_residual"] = pi2_stationarity_residual(law);
        return out;
      },
      py::arg("delta"), py::arg("lambda_"), py::arg("tolerance") = 1e-12);

  py::class_<JacksonSpec>(m, "JacksonSpec")
      .def(py::init<>())
      .def_readwrite("arrivals", &JacksonSpec::arrivals)
      .def_readwrite("services", &JacksonSpec::services)
      .def_readwrite("routing", &JacksonSpec::routing);
  m.def("jackson_spec_for_gaps", &jackson_spec_for_gaps);
  m.def("traffic_solve", &traffic_solve);
  m.def("traffic_residual", &traffic_residual);
  m.def("jackson_ergodic", &jackson_ergodic);
  m.def("conjectured_critical_N", &conjectured_critical_N);
  m.def("conjectured_critical_limit", &conjectured_critical_limit);
  m.def("continuum_critical", &continuum_critical);
  m.def("continuum_gap_params", [](std::int64_t n, double delta, double lambda) {
    return continuum_gap_params(n, delta, lambda).a;
  });

  m.def("eval_V", [](const std::vector<Position>& x, double alpha, double beta) {
    return eval_V(ParticleState{x}, alpha, beta);
  });
  m.def("drift_V", [](const std::vector<Position>& x, const ModelSpec& model, double alpha,
                      double beta) {
    const auto d = drift_V(ParticleState{x}, model, alpha, beta);
    py::dict out;
    out["value"] = d.value;
    out["drift"] = d.drift;
    out["drift_decomposed"] = d.drift_decomposed;
    out["carre_du_champ"] = d.carre_du_champ;
    out["region"] = to_string(d.region);
    out["pile_height"] = d.pile_height;
    return out;
  });
  m.def(
      "ergodic_certificate_search",
      [](std::int64_t n, double delta, double lambda, std::int64_t box) {
        ErgodicSearchOptions opts;
        opts.box_radius = box;
        return cert_dict(ergodic_certificate_search(n, delta, lambda, opts));
      },
      py::arg("n"), py::arg("delta"), py::arg("lambda_"), py::arg("box_radius") = 30);
  m.def("transience_certificate", [](std::int64_t n, double delta, double lambda, double eps) {
    return cert_dict(transience_certificate(n, delta, lambda, eps));
  });
  m.def("epsilon_N", &epsilon_N);
  m.def("epsilon_search", &epsilon_search);
}
