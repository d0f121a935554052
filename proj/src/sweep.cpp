#include "mfwalk/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <thread>

#include "mfwalk/csv.hpp"
#include "mfwalk/errors.hpp"
#include "mfwalk/gap_jackson.hpp"
#include "mfwalk/lyapunov.hpp"
#include "mfwalk/rng.hpp"

namespace mfw {

SweepConfig SweepConfig::from_config(const KeyValueConfig& cfg) {
  SweepConfig c;
  for (double n : cfg.get_grid("n")) {
    if (n != std::floor(n)) throw InvalidInput("n values must be integers");
    c.n_list.push_back(static_cast<std::int64_t>(n));
  }
  c.delta_grid = cfg.get_grid("delta");
  c.lambda_grid = cfg.get_grid("lambda");
  c.horizon = cfg.get_double("horizon", c.horizon);
  c.replicates = cfg.get_int("replicates", c.replicates);
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  c.thresholds.slope = cfg.get_double("slope_threshold", c.thresholds.slope);
  c.thresholds.t_statistic = cfg.get_double("t_threshold", c.thresholds.t_statistic);
  c.thresholds.returns = cfg.get_int("return_threshold", c.thresholds.returns);
  c.thresholds.burn_in_fraction = cfg.get_double("burn_in", c.thresholds.burn_in_fraction);
  c.thresholds.grid_points = cfg.get_int("grid_points", c.thresholds.grid_points);
  c.max_events = cfg.get_int("max_events", c.max_events);
  c.output = cfg.find("output").value_or("");
  c.validate();
  return c;
}

void SweepConfig::validate() const {
  if (n_list.empty() || delta_grid.empty() || lambda_grid.empty()) {
    throw InvalidInput("sweep grids n, delta and lambda must be nonempty");
  }
  for (auto n : n_list) {
    if (n < 2) throw InvalidInput("sweep needs N >= 2");
  }
  for (double d : delta_grid) {
    if (!(d >= 0.0)) throw InvalidInput("delta values must be >= 0");
  }
  for (double l : lambda_grid) {
    if (!(l >= 0.0)) throw InvalidInput("lambda values must be >= 0");
  }
  if (!(horizon > 0.0)) throw InvalidInput("sweep horizon must be positive");
  if (replicates < 1) throw InvalidInput("sweep needs at least one replicate");
  if (max_events < 1) throw InvalidInput("max_events must be positive");
  if (!(thresholds.burn_in_fraction >= 0.0 && thresholds.burn_in_fraction < 1.0)) {
    throw InvalidInput("burn_in must lie in [0, 1)");
  }
}

std::int64_t default_workers() {
  if (const char* env = std::getenv("MFW_WORKERS")) {
    try {
      const auto w = parse_int(env);
      if (w >= 1) return w;
    } catch (const Error&) {
    }
  }
  return std::max<std::int64_t>(1, std::thread::hardware_concurrency());
}

namespace {

SweepRow run_point(const SweepConfig& c, std::int64_t n, std::size_t di, std::size_t li) {
  SweepRow row;
  row.n = n;
  row.delta = c.delta_grid[di];
  row.lambda = c.lambda_grid[li];
  row.bound_transient_below = (1.0 + epsilon_N(n, row.delta)) * 2.0 * row.delta;
  row.bound_ergodic_above = 12.0 * row.delta + 8.0 * row.delta * row.delta;
  row.conjectured_critical = conjectured_critical_N(n, row.delta);
  row.continuum_critical = continuum_critical(n, row.delta);

  const ModelSpec model = ModelSpec::small_jump(n, row.delta, row.lambda);
  const ParticleState init{std::vector<Position>(static_cast<std::size_t>(n), 0)};
  std::int64_t votes[3] = {0, 0, 0};
  try {
    for (std::int64_t r = 0; r < c.replicates; ++r) {
      const auto key = stream_key(c.seed, {static_cast<std::uint64_t>(n), di, li,
                                           static_cast<std::uint64_t>(r)});
      const auto d = recurrence_probe(model, init, c.horizon, c.thresholds, key, c.max_events);
      ++votes[static_cast<int>(d.verdict)];
      row.slope += d.min_position_slope;
      row.returns += static_cast<double>(d.returns_to_origin);
    }
  } catch (const Error& e) {
    row.error = e.what();
    row.slope = 0.0;
    row.returns = 0.0;
    row.verdict = Verdict::Inconclusive;
    return row;
  }
  const auto reps = static_cast<double>(c.replicates);
  row.slope /= reps;
  row.returns /= reps;
  const auto e = votes[static_cast<int>(Verdict::ErgodicLooking)];
  const auto t = votes[static_cast<int>(Verdict::TransientLooking)];
  const auto i = votes[static_cast<int>(Verdict::Inconclusive)];
  if (e > t && e > i) {
    row.verdict = Verdict::ErgodicLooking;
  } else if (t > e && t > i) {
    row.verdict = Verdict::TransientLooking;
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  config.validate();
  std::unique_ptr<CsvWriter> probe;
  if (!config.output.empty() && config.output != "-") {
    // fail before simulating if the output cannot be created
    probe = std::make_unique<CsvWriter>(config.output, "sweep");
  }

  struct Task {
    std::int64_t n;
    std::size_t di, li;
  };
  std::vector<Task> tasks;
  std::vector<std::int64_t> ns = config.n_list;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<std::size_t> dorder(config.delta_grid.size());
  std::vector<std::size_t> lorder(config.lambda_grid.size());
  for (std::size_t k = 0; k < dorder.size(); ++k) dorder[k] = k;
  for (std::size_t k = 0; k < lorder.size(); ++k) lorder[k] = k;
  std::stable_sort(dorder.begin(), dorder.end(), [&](auto a, auto b) {
    return config.delta_grid[a] < config.delta_grid[b];
  });
  std::stable_sort(lorder.begin(), lorder.end(), [&](auto a, auto b) {
    return config.lambda_grid[a] < config.lambda_grid[b];
  });
  for (auto n : ns) {
    for (auto di : dorder) {
      for (auto li : lorder) tasks.push_back({n, di, li});
    }
  }

  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto workers = static_cast<std::size_t>(
      std::min<std::int64_t>(config.workers > 0 ? config.workers : default_workers(),
                             static_cast<std::int64_t>(tasks.size())));
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < tasks.size(); k = next++) {
        try {
          rows[k] = run_point(config, tasks[k].n, tasks[k].di, tasks[k].li);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  probe.reset();
  if (!config.output.empty()) write_sweep_csv(rows, config, config.output);
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const SweepConfig& config,
                     const std::string& path) {
  CsvWriter out(path, "sweep");
  out.meta("horizon", config.horizon);
  out.meta("replicates", static_cast<double>(config.replicates));
  out.meta("seed", std::to_string(config.seed));
  out.header({"n", "delta", "lambda", "verdict", "slope", "returns", "bound_transient_below",
              "bound_ergodic_above", "conjectured_critical", "continuum_critical", "error"});
  for (const auto& r : rows) {
    out.row({std::to_string(r.n), format_double(r.delta), format_double(r.lambda),
             to_string(r.verdict), format_double(r.slope), format_double(r.returns),
             format_double(r.bound_transient_below), format_double(r.bound_ergodic_above),
             format_double(r.conjectured_critical), format_double(r.continuum_critical),
             r.error});
  }
  out.flush();
}

}  // namespace mfw
