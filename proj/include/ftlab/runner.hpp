#pragma once

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ftlab/anyon_mc.hpp"
#include "ftlab/config.hpp"
#include "ftlab/dynamics.hpp"
#include "ftlab/lattice.hpp"
#include "ftlab/planner.hpp"
#include "ftlab/quantum_double.hpp"
#include "ftlab/report.hpp"

namespace ftlab {

using Json = nlohmann::json;

// ---- config schemas ----

struct FieldDef {
  enum class Type { String, U64, Long, Int, Double, Bool, LongList, DoubleList };
  std::string name;
  Type type;
  bool required;
};

inline const std::map<std::string, std::vector<FieldDef>>& experiment_schemas() {
  using T = FieldDef::Type;
  static const std::map<std::string, std::vector<FieldDef>> schemas = {
      {"exact-delta",
       {{"k", T::Int, false},
        {"gamma", T::Double, true},
        {"gamma_s", T::Double, false},
        {"dt_list", T::DoubleList, true},
        {"t_final", T::Double, true},
        {"dt_int", T::Double, false}}},
      {"mc-sweep",
       {{"k_list", T::LongList, true},
        {"p_create", T::Double, true},
        {"p_hop", T::Double, true},
        {"bias_q", T::Double, false},
        {"bias_radius", T::Int, false},
        {"t_max", T::Long, true},
        {"n_trials", T::Long, true}}},
      {"s3-braiding",
       {{"grid_l", T::Int, true},
        {"p_pair", T::Double, true},
        {"radius", T::Int, true},
        {"n_trials", T::Long, true},
        {"w_transposition", T::Double, false},
        {"log_events", T::Bool, false}}},
      {"trotter-plan",
       {{"h_norm", T::Double, true},
        {"t_total", T::Double, true},
        {"eps_gate", T::Double, true},
        {"gates_per_step", T::Int, true},
        {"c_strobe", T::Double, true},
        {"dt_list", T::DoubleList, false}}},
  };
  return schemas;
}

namespace detail {

inline void check_field_type(const Config& cfg, const FieldDef& f,
                             std::vector<std::string>& diags) {
  try {
    switch (f.type) {
      case FieldDef::Type::String: cfg.get_string(f.name); break;
      case FieldDef::Type::U64: cfg.get_u64(f.name); break;
      case FieldDef::Type::Long: cfg.get_long(f.name); break;
      case FieldDef::Type::Int: cfg.get_int(f.name); break;
      case FieldDef::Type::Double: cfg.get_double(f.name); break;
      case FieldDef::Type::Bool: cfg.get_bool(f.name); break;
      case FieldDef::Type::LongList: cfg.get_long_list(f.name); break;
      case FieldDef::Type::DoubleList: cfg.get_double_list(f.name); break;
    }
  } catch (const ConfigError& e) {
    diags.push_back(e.what());
  }
}

inline void require_prob(const Config& cfg, const std::string& key, double v,
                         std::vector<std::string>& diags) {
  if (v < 0.0 || v > 1.0)
    diags.push_back(cfg.source_name() + ":" + std::to_string(cfg.line_of(key)) + ": '" +
                    key + "' must lie in [0, 1]");
}

}  // namespace detail

// Full validation without executing any engine: schema, types, then the
// target module's preconditions. Empty result means the config is runnable.
inline std::vector<std::string> validate_config(const Config& cfg) {
  std::vector<std::string> diags;
  if (!cfg.has("experiment")) {
    diags.push_back(cfg.missing_message("experiment"));
    return diags;
  }
  const std::string kind = cfg.get_string("experiment");
  const auto& schemas = experiment_schemas();
  auto it = schemas.find(kind);
  if (it == schemas.end()) {
    diags.push_back(cfg.source_name() + ":" + std::to_string(cfg.line_of("experiment")) +
                    ": unknown experiment '" + kind + "'");
    return diags;
  }

  if (!cfg.has("seed")) diags.push_back(cfg.missing_message("seed"));
  else detail::check_field_type(cfg, {"seed", FieldDef::Type::U64, true}, diags);
  if (cfg.has("workers")) detail::check_field_type(cfg, {"workers", FieldDef::Type::Int, false}, diags);
  if (cfg.has("out")) detail::check_field_type(cfg, {"out", FieldDef::Type::String, false}, diags);

  std::vector<std::string> known = {"experiment", "seed", "workers", "out"};
  for (const FieldDef& f : it->second) {
    known.push_back(f.name);
    if (f.required && !cfg.has(f.name)) {
      diags.push_back(cfg.missing_message(f.name));
      continue;
    }
    if (cfg.has(f.name)) detail::check_field_type(cfg, f, diags);
  }
  // Unknown fields are reported but do not block the range checks below.
  const bool fields_usable = diags.empty();
  for (const std::string& k : cfg.keys())
    if (std::find(known.begin(), known.end(), k) == known.end())
      diags.push_back(cfg.source_name() + ":" + std::to_string(cfg.line_of(k)) +
                      ": unknown field '" + k + "' for experiment '" + kind + "'");
  if (!fields_usable) return diags;

  // Module preconditions.
  try {
    if (kind == "exact-delta") {
      const int k = cfg.get_or<int>("k", 2);
      if (k < 2 || 2 * k * k > 12)
        diags.push_back(cfg.source_name() + ": exact engine needs k = 2 (2k^2 <= 12 qubits)");
      if (cfg.get_double("gamma") < 0)
        diags.push_back(cfg.source_name() + ": gamma must be nonnegative");
      for (double dt : cfg.get_double_list("dt_list"))
        if (dt <= 0) diags.push_back(cfg.source_name() + ": dt_list entries must be positive");
      if (cfg.get_double("t_final") < 1.0)
        diags.push_back(cfg.source_name() + ": t_final must be at least 1");
      if (cfg.get_or<double>("dt_int", 0.005) <= 0)
        diags.push_back(cfg.source_name() + ": dt_int must be positive");
    } else if (kind == "mc-sweep") {
      for (long k : cfg.get_long_list("k_list"))
        if (k < 2) diags.push_back(cfg.source_name() + ": k_list entries must be >= 2");
      detail::require_prob(cfg, "p_create", cfg.get_double("p_create"), diags);
      detail::require_prob(cfg, "p_hop", cfg.get_double("p_hop"), diags);
      if (cfg.has("bias_q")) detail::require_prob(cfg, "bias_q", cfg.get_double("bias_q"), diags);
      if (cfg.get_or<int>("bias_radius", 1) < 1)
        diags.push_back(cfg.source_name() + ": bias_radius must be >= 1");
      if (cfg.get_long("t_max") < 0)
        diags.push_back(cfg.source_name() + ": t_max must be nonnegative");
      if (cfg.get_long("n_trials") < 1)
        diags.push_back(cfg.source_name() + ": n_trials must be >= 1");
    } else if (kind == "s3-braiding") {
      if (cfg.get_int("grid_l") < 8)
        diags.push_back(cfg.source_name() + ": grid_l must be >= 8");
      detail::require_prob(cfg, "p_pair", cfg.get_double("p_pair"), diags);
      if (cfg.get_int("radius") < 1)
        diags.push_back(cfg.source_name() + ": radius must be >= 1");
      if (cfg.get_long("n_trials") < 1)
        diags.push_back(cfg.source_name() + ": n_trials must be >= 1");
      if (cfg.has("w_transposition"))
        detail::require_prob(cfg, "w_transposition", cfg.get_double("w_transposition"), diags);
    } else if (kind == "trotter-plan") {
      ErrorBudget b{cfg.get_double("h_norm"), cfg.get_double("t_total"),
                    cfg.get_double("eps_gate"), cfg.get_int("gates_per_step"),
                    cfg.get_double("c_strobe")};
      b.validate();
      if (cfg.has("dt_list"))
        for (double dt : cfg.get_double_list("dt_list"))
          if (dt <= 0) diags.push_back(cfg.source_name() + ": dt_list entries must be positive");
    }
  } catch (const std::exception& e) {
    diags.push_back(cfg.source_name() + ": " + e.what());
  }
  return diags;
}

// ---- deterministic parallel tally ----

// Splits [0, n) into contiguous blocks, one worker per block; per-trial
// results are integers, so the totals are independent of the worker count.
inline std::pair<long, long> parallel_tally(
    long n, int workers, const std::function<std::pair<long, long>(long)>& trial) {
  workers = static_cast<int>(std::max<long>(1, std::min<long>(workers, n)));
  std::vector<std::pair<long, long>> partial(workers, {0, 0});
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  const long block = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        const long lo = w * block, hi = std::min(n, lo + block);
        long a = 0, b = 0;
        for (long i = lo; i < hi; ++i) {
          const auto [da, db] = trial(i);
          a += da;
          b += db;
        }
        partial[w] = {a, b};
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  long a = 0, b = 0;
  for (const auto& [pa, pb] : partial) {
    a += pa;
    b += pb;
  }
  return {a, b};
}

inline RateEstimate mc_rate_parallel(const ToricLattice& lat, const MCParams& params,
                                     long n_trials, int workers) {
  const auto [failures, time_sum] = parallel_tally(
      n_trials, workers, [&](long i) -> std::pair<long, long> {
        const TrialOutcome out =
            run_trial(lat, params, params.seed + static_cast<uint64_t>(i));
        return {out.failed ? 1 : 0, out.failed ? out.failure_time : 0};
      });
  RateEstimate r;
  r.n_trials = n_trials;
  r.failures = failures;
  const WilsonInterval w = wilson_interval(failures, n_trials);
  r.estimate = w.center;
  r.ci_low = w.low;
  r.ci_high = w.high;
  if (failures > 0)
    r.mean_failure_time = static_cast<double>(time_sum) / static_cast<double>(failures);
  return r;
}

inline RateEstimate braiding_arm_parallel(const BraidingMemoryParams& p, bool sweep_enabled,
                                          int workers) {
  const auto [failures, unused] = parallel_tally(
      p.n_trials, workers, [&](long i) -> std::pair<long, long> {
        return {braiding_memory_trial(p, sweep_enabled, p.seed + static_cast<uint64_t>(i))
                    ? 1
                    : 0,
                0};
      });
  (void)unused;
  RateEstimate r;
  r.n_trials = p.n_trials;
  r.failures = failures;
  const WilsonInterval w = wilson_interval(failures, p.n_trials);
  r.estimate = w.center;
  r.ci_low = w.low;
  r.ci_high = w.high;
  return r;
}

// ---- quantum-double event logs (line-delimited records) ----

inline std::string event_to_json_line(const QDEvent& ev) {
  Json j;
  switch (ev.kind) {
    case QDEvent::Kind::Create:
      j = {{"t", "create"}, {"a", ev.a},   {"b", ev.b},   {"g", ev.flux},
           {"ax", ev.ax},   {"ay", ev.ay}, {"bx", ev.bx}, {"by", ev.by},
           {"stray", ev.stray}};
      break;
    case QDEvent::Kind::Move:
      j = {{"t", "move"}, {"id", ev.a}, {"dx", ev.ax}, {"dy", ev.ay}};
      break;
    case QDEvent::Kind::Braid:
      j = {{"t", "braid"}, {"mover", ev.a}, {"around", ev.b}};
      break;
    case QDEvent::Kind::Fuse:
      j = {{"t", "fuse"},
           {"a", ev.a},
           {"b", ev.b},
           {"residual", ev.residual_id},
           {"wrong_pair", ev.wrong_pair}};
      break;
  }
  return j.dump();
}

inline std::string events_to_log(int grid_l, const std::vector<QDEvent>& events) {
  std::string out = Json{{"t", "init"}, {"grid", grid_l}}.dump() + "\n";
  for (const auto& ev : events) out += event_to_json_line(ev) + "\n";
  return out;
}

struct ParsedLog {
  int grid_l = 0;
  std::vector<QDEvent> events;
};

inline ParsedLog parse_event_log(std::istream& in, const std::string& name) {
  ParsedLog log;
  std::string line;
  int lineno = 0;
  bool saw_init = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const std::exception& e) {
      throw ConfigError(name + ":" + std::to_string(lineno) + ": malformed record: " + e.what());
    }
    const std::string kind = j.value("t", "");
    try {
      if (kind == "init") {
        log.grid_l = j.at("grid").get<int>();
        saw_init = true;
      } else if (kind == "create") {
        QDEvent ev;
        ev.kind = QDEvent::Kind::Create;
        ev.a = j.at("a").get<int>();
        ev.b = j.at("b").get<int>();
        ev.flux = j.at("g").get<uint8_t>();
        ev.ax = j.at("ax").get<int>();
        ev.ay = j.at("ay").get<int>();
        ev.bx = j.at("bx").get<int>();
        ev.by = j.at("by").get<int>();
        ev.stray = j.at("stray").get<bool>();
        log.events.push_back(ev);
      } else if (kind == "move") {
        QDEvent ev;
        ev.kind = QDEvent::Kind::Move;
        ev.a = j.at("id").get<int>();
        ev.ax = j.at("dx").get<int>();
        ev.ay = j.at("dy").get<int>();
        log.events.push_back(ev);
      } else if (kind == "braid") {
        QDEvent ev;
        ev.kind = QDEvent::Kind::Braid;
        ev.a = j.at("mover").get<int>();
        ev.b = j.at("around").get<int>();
        log.events.push_back(ev);
      } else if (kind == "fuse") {
        QDEvent ev;
        ev.kind = QDEvent::Kind::Fuse;
        ev.a = j.at("a").get<int>();
        ev.b = j.at("b").get<int>();
        log.events.push_back(ev);
      } else {
        throw ConfigError(name + ":" + std::to_string(lineno) + ": unknown record type '" +
                          kind + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(name + ":" + std::to_string(lineno) + ": bad record field: " + e.what());
    }
  }
  if (!saw_init) throw ConfigError(name + ": log carries no init record");
  return log;
}

inline std::string replay_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open event log");
  const ParsedLog log = parse_event_log(in, path);
  const DoubleState st = DoubleState::replay(log.grid_l, log.events);
  return st.serialize();
}

// ---- experiment drivers ----

struct RunResult {
  Json report;
  std::string table_csv;
  std::map<std::string, std::string> extra_files;  // event logs etc.
};

namespace detail {

inline std::string effective_canonical(const Config& cfg, uint64_t seed) {
  std::string out;
  std::istringstream in(cfg.canonical());
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("seed=", 0) == 0) line = "seed=" + std::to_string(seed);
    out += line + "\n";
  }
  return out;
}

inline Trajectory exact_reference_trajectory(const ExactEvolver& evolver, const Vector& psi0,
                                             const std::vector<double>& times,
                                             const std::vector<Observable>& obs) {
  Trajectory traj;
  for (const auto& o : obs) traj.labels.push_back(o.label);
  for (double t : times) {
    const Vector psi = evolver.evolve_pure(psi0, t);
    traj.times.push_back(t);
    std::vector<double> row;
    for (const auto& o : obs) row.push_back(o.expectation(psi));
    traj.values.push_back(std::move(row));
  }
  return traj;
}

inline long stride_for(double dt, double span) {
  const long stride = std::lround(span / dt);
  if (stride < 1 || std::abs(static_cast<double>(stride) * dt - span) > 1e-9)
    throw ConfigError("dt = " + fmt17(dt) + " does not divide the sampling interval");
  return stride;
}

}  // namespace detail

inline RunResult run_exact_delta(const Config& cfg, uint64_t seed, int workers) {
  (void)seed;  // the exact engine is deterministic; seed kept for traceability
  const int k = cfg.get_or<int>("k", 2);
  const double gamma = cfg.get_double("gamma");
  const double gamma_s = cfg.get_or<double>("gamma_s", gamma / 4.0);
  std::vector<double> dt_list = cfg.get_double_list("dt_list");
  std::sort(dt_list.rbegin(), dt_list.rend());
  const double t_final = cfg.get_double("t_final");
  const double dt_int = cfg.get_or<double>("dt_int", 0.005);

  const ToricLattice lat(k);
  const auto terms = toric_hamiltonian_terms(lat);
  const auto obs = logical_observables(lat);
  const Vector psi0 = toric_ground_state(lat);
  const Matrix rho0 = psi0 * psi0.adjoint();

  std::vector<double> sample_times;
  for (double t = 1.0; t <= t_final + 1e-9; t += 1.0) sample_times.push_back(t);

  const ExactEvolver evolver(build_toric_hamiltonian(lat));
  const Trajectory ideal_sys =
      detail::exact_reference_trajectory(evolver, psi0, sample_times, obs);

  const NoiseModel noise = NoiseModel::single_edge_paulis(lat, gamma);
  const PauliSum h = toric_hamiltonian(lat);
  const Trajectory noisy_sys =
      lindblad_evolve(rho0, h, noise, dt_int, sample_times, obs);

  struct DtRun {
    double dt;
    Trajectory noisy_sim;
    Trajectory ideal_sim;
  };
  std::vector<DtRun> runs(dt_list.size());
  {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(dt_list.size());
    const int lanes = std::max(1, std::min<int>(workers, static_cast<int>(dt_list.size())));
    std::atomic<size_t> cursor{0};
    for (int w = 0; w < lanes; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const size_t i = cursor.fetch_add(1);
          if (i >= dt_list.size()) return;
          try {
            const double dt = dt_list[i];
            const long stride = detail::stride_for(dt, 1.0);
            TrotterPlan plan;
            plan.dt = dt;
            plan.n_steps = stride * static_cast<long>(sample_times.size());
            plan.sample_stride = stride;
            plan.gate_noise = GateNoise{gamma_s, true, true};
            runs[i].dt = dt;
            runs[i].noisy_sim = trotter_channel(rho0, terms, plan, obs);
            TrotterPlan pure_plan = plan;
            pure_plan.gate_noise = GateNoise{0.0, true, true};
            runs[i].ideal_sim = trotter_channel_pure(psi0, terms, pure_plan, obs);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  auto delta_at = [&](const Trajectory& traj, double t) {
    return accuracy_delta(traj, ideal_sys, t);
  };

  // Stroboscopic constant fitted on the coarsest step, then the bound is
  // checked across every (dt, t) pair.
  double c_fit = 0.0;
  for (double t : sample_times) {
    const double ds = delta_at(noisy_sys, t);
    const double dsim = delta_at(runs[0].noisy_sim, t);
    c_fit = std::max(c_fit, std::max(0.0, dsim - 2.0 * ds) / (t * runs[0].dt));
  }

  CsvTable table({"dt", "t", "label", "ideal_system", "noisy_system", "ideal_sim",
                  "noisy_sim", "delta_system", "delta_sim", "bound_rhs", "bound_ok"});
  Json records = Json::array();
  bool bound_holds = true;
  for (const DtRun& run : runs) {
    for (double t : sample_times) {
      const double ds = delta_at(noisy_sys, t);
      const double dsim = delta_at(run.noisy_sim, t);
      const double rhs = 2.0 * ds + c_fit * t * run.dt;
      const bool ok = dsim <= rhs + 1e-12;
      bound_holds = bound_holds && ok;
      const int ti_sys = ideal_sys.time_index(t);
      const int ti_sim = run.noisy_sim.time_index(t);
      const int ti_pure = run.ideal_sim.time_index(t);
      const int ti_noisy = noisy_sys.time_index(t);
      for (size_t j = 0; j < obs.size(); ++j) {
        table.add_row({fmt17(run.dt), fmt17(t), obs[j].label,
                       fmt17(ideal_sys.values[ti_sys][j]), fmt17(noisy_sys.values[ti_noisy][j]),
                       fmt17(run.ideal_sim.values[ti_pure][j]),
                       fmt17(run.noisy_sim.values[ti_sim][j]), fmt17(ds), fmt17(dsim),
                       fmt17(rhs), ok ? "1" : "0"});
      }
      records.push_back(Json{{"dt", run.dt},
                             {"t", t},
                             {"delta_system", ds},
                             {"delta_sim", dsim},
                             {"bound_rhs", rhs},
                             {"bound_ok", ok}});
    }
  }

  RunResult res;
  res.table_csv = table.render();
  res.report["records"] = records;
  res.report["notes"] = {
      {"c_fit", c_fit},
      {"fit_dt", runs[0].dt},
      {"gamma", gamma},
      {"gamma_s", gamma_s},
      {"bound_holds", bound_holds},
      {"normalization",
       "error generators normalized to unit operator norm; strengths live in gamma"}};
  return res;
}

inline RunResult run_mc_sweep(const Config& cfg, uint64_t seed, int workers) {
  const std::vector<long> k_list = cfg.get_long_list("k_list");
  MCParams params;
  params.p_create = cfg.get_double("p_create");
  params.p_hop = cfg.get_double("p_hop");
  params.bias_q = cfg.get_or<double>("bias_q", 0.0);
  params.bias_radius = cfg.get_or<int>("bias_radius", 1);
  params.t_max = cfg.get_long("t_max");
  params.seed = seed;
  const long n_trials = cfg.get_long("n_trials");

  CsvTable table({"k", "params_fingerprint", "n_trials", "failures", "estimate", "ci_low",
                  "ci_high", "mean_failure_time"});
  Json records = Json::array();
  for (long k : k_list) {
    const ToricLattice lat(static_cast<int>(k));
    std::string param_id = "k=" + std::to_string(k) + ";p_create=" + fmt17(params.p_create) +
                           ";p_hop=" + fmt17(params.p_hop) + ";bias_q=" + fmt17(params.bias_q) +
                           ";bias_radius=" + std::to_string(params.bias_radius) +
                           ";t_max=" + std::to_string(params.t_max) +
                           ";seed=" + std::to_string(params.seed);
    const std::string fp = hex64(fnv1a64(param_id));
    const RateEstimate r = mc_rate_parallel(lat, params, n_trials, workers);
    table.add_row({std::to_string(k), fp, std::to_string(r.n_trials),
                   std::to_string(r.failures), fmt17(r.estimate), fmt17(r.ci_low),
                   fmt17(r.ci_high), fmt17(r.mean_failure_time)});
    records.push_back(Json{{"k", k},
                           {"params_fingerprint", fp},
                           {"n_trials", r.n_trials},
                           {"failures", r.failures},
                           {"estimate", r.estimate},
                           {"ci_low", r.ci_low},
                           {"ci_high", r.ci_high}});
  }
  RunResult res;
  res.table_csv = table.render();
  res.report["records"] = records;
  return res;
}

inline RunResult run_s3_braiding(const Config& cfg, uint64_t seed, int workers) {
  BraidingMemoryParams p;
  p.grid_l = cfg.get_int("grid_l");
  p.p_pair = cfg.get_double("p_pair");
  p.radius = cfg.get_int("radius");
  p.n_trials = cfg.get_long("n_trials");
  p.seed = seed;
  p.w_transposition = cfg.get_or<double>("w_transposition", 0.5);
  const bool log_events = cfg.get_or<bool>("log_events", false);

  CsvTable table({"arm", "grid_l", "p_pair", "radius", "n_trials", "failures", "estimate",
                  "ci_low", "ci_high"});
  Json records = Json::array();
  RunResult res;
  for (const bool swept : {false, true}) {
    const RateEstimate r = braiding_arm_parallel(p, swept, workers);
    const std::string arm = swept ? "swept" : "unswept";
    table.add_row({arm, std::to_string(p.grid_l), fmt17(p.p_pair),
                   std::to_string(swept ? p.radius : 0), std::to_string(r.n_trials),
                   std::to_string(r.failures), fmt17(r.estimate), fmt17(r.ci_low),
                   fmt17(r.ci_high)});
    records.push_back(Json{{"arm", arm},
                           {"n_trials", r.n_trials},
                           {"failures", r.failures},
                           {"estimate", r.estimate},
                           {"ci_low", r.ci_low},
                           {"ci_high", r.ci_high}});
    if (log_events) {
      DoubleState trial_state(p.grid_l, 0);
      braiding_memory_trial(p, swept, p.seed, &trial_state);
      res.extra_files["events_" + arm + ".jsonl"] =
          events_to_log(p.grid_l, trial_state.log());
      res.extra_files["final_state_" + arm + ".txt"] = trial_state.serialize();
    }
  }
  res.table_csv = table.render();
  res.report["records"] = records;
  return res;
}

inline RunResult run_trotter_plan(const Config& cfg, uint64_t seed, int workers) {
  (void)seed;
  (void)workers;
  ErrorBudget b;
  b.h_norm = cfg.get_double("h_norm");
  b.t_total = cfg.get_double("t_total");
  b.eps_gate = cfg.get_double("eps_gate");
  b.gates_per_step = cfg.get_int("gates_per_step");
  b.c_strobe = cfg.get_double("c_strobe");
  const OptimalStep opt = optimal_dt(b);

  std::vector<double> dts;
  if (cfg.has("dt_list")) {
    dts = cfg.get_double_list("dt_list");
  } else {
    for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) dts.push_back(opt.dt_star * f);
  }
  CsvTable table({"dt", "strobe_error", "noise_error", "total_error", "is_optimal"});
  Json records = Json::array();
  auto add = [&](double dt, bool is_opt) {
    table.add_row({fmt17(dt), fmt17(stroboscopic_error(b, dt)), fmt17(noise_error(b, dt)),
                   fmt17(total_error(b, dt)), is_opt ? "1" : "0"});
    records.push_back(Json{{"dt", dt}, {"total_error", total_error(b, dt)}, {"optimal", is_opt}});
  };
  for (double dt : dts) add(dt, false);
  add(opt.dt_star, true);

  RunResult res;
  res.table_csv = table.render();
  res.report["records"] = records;
  res.report["notes"] = {
      {"dt_star", opt.dt_star},
      {"error_at_minimum", opt.error_at_minimum},
      {"model", "operator-norm h_norm with linear-in-dt stroboscopic term; "
                "constants fitted, not asserted"}};
  return res;
}

// Runs a validated config and writes report.json, table.csv and any extra
// files into out_dir. Throws ConfigError with the full diagnostics when the
// config does not validate.
inline std::filesystem::path run_experiment(const Config& cfg, const std::string& out_dir,
                                            std::optional<uint64_t> seed_override = {},
                                            std::optional<int> workers_override = {}) {
  const std::vector<std::string> diags = validate_config(cfg);
  if (!diags.empty()) {
    std::string msg;
    for (const auto& d : diags) msg += d + "\n";
    throw ConfigError(msg);
  }
  const std::string kind = cfg.get_string("experiment");
  const uint64_t seed = seed_override.value_or(cfg.get_u64("seed"));
  const int workers = workers_override.value_or(cfg.get_or<int>("workers", 1));

  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  if (kind == "exact-delta") res = run_exact_delta(cfg, seed, workers);
  else if (kind == "mc-sweep") res = run_mc_sweep(cfg, seed, workers);
  else if (kind == "s3-braiding") res = run_s3_braiding(cfg, seed, workers);
  else res = run_trotter_plan(cfg, seed, workers);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  res.report["artifact_version"] = kArtifactVersion;
  res.report["experiment"] = kind;
  res.report["fingerprint"] = hex64(fnv1a64(detail::effective_canonical(cfg, seed)));
  res.report["seed"] = seed;
  Json cfg_echo;
  for (const std::string& key : cfg.keys()) cfg_echo[key] = cfg.get_string(key);
  cfg_echo["seed"] = std::to_string(seed);
  res.report["config"] = cfg_echo;
  res.report["wallclock_seconds"] = wall;  // excluded from the determinism contract

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  try {
    write_file_atomic(dir / "table.csv", res.table_csv);
    write_file_atomic(dir / "report.json", res.report.dump(2) + "\n");
    for (const auto& [name, content] : res.extra_files)
      write_file_atomic(dir / name, content);
  } catch (...) {
    for (const auto& entry : std::filesystem::directory_iterator(dir))
      if (entry.path().extension() == ".tmp") std::filesystem::remove(entry.path());
    throw;
  }
  return dir;
}

}  // namespace ftlab
