#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hartree/acceptance.hpp"
#include "hartree/checkpoint.hpp"
#include "hartree/diagnostics.hpp"
#include "hartree/errors.hpp"
#include "hartree/evolution.hpp"
#include "hartree/experiments.hpp"
#include "hartree/functionals.hpp"
#include "hartree/ground_state.hpp"
#include "hartree/potential.hpp"
#include "hartree/symmetries.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hartree;

namespace {

enum ExitCode { kOk = 0, kCheckFailed = 1, kUsage = 2, kInternal = 3 };

// Every accepted key with its default. Anything else in a config file is an error.
json defaults() {
  return {
      {"grid", {{"n", 4096}, {"r_max", 32.0}}},
      {"ground_state", {{"tol", 1e-10}, {"max_iter", 2000}, {"identity_tol", 1e-3}}},
      {"evolve",
       {{"init", "gaussian"},
        {"amplitude", 1.0},
        {"sigma", 1.0},
        {"blowup_time", 2.0},
        {"dt0", 1e-3},
        {"t_end", 1.0},
        {"cfl_safety", 0.01},
        {"coupling", 1.0},
        {"write_checkpoints", true},
        {"monitors",
         {{"monitor_stride", 10},
          {"checkpoint_stride", 50},
          {"blowup_gradient_factor", 10.0},
          {"spectral_tail_threshold", 0.01},
          {"dt_floor", 1e-8},
          {"mass_drift_limit", 1e-4},
          {"window_radius0", 1.0},
          {"window_alpha", 0.3}}}}},
      {"gn_check", {{"samples", 1000}, {"seed", 7}, {"inject_ground_state", false}}},
      {"concentration", {{"alpha", 0.3}, {"min_ratio", 0.95}}},
      {"transform", {{"kind", "scaling"}, {"input", ""}, {"output", "transformed.chk"}, {"lambda", 1.0}, {"t", 0.0}, {"T", 1.0}}},
      {"sweep", json::array()},
  };
}

void check_keys(const json &cfg, const json &schema, const std::string &where) {
  if (!cfg.is_object()) throw ConfigError((where.empty() ? std::string("config") : where) + " must be an object");
  for (const auto &[key, value] : cfg.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!schema.contains(key)) throw ConfigError("unknown key '" + path + "'");
    const json &s = schema.at(key);
    if (s.is_object()) {
      check_keys(value, s, path);
    } else if (s.is_array()) {
      if (!value.is_array()) throw ConfigError("'" + path + "' must be an array");
      json entry_schema = schema;
      entry_schema.erase(key);
      for (const auto &entry : value) check_keys(entry, entry_schema, path + "[]");
    } else if (s.is_number_integer() && !value.is_number_integer()) {
      throw ConfigError("'" + path + "' must be an integer");
    } else if (s.is_number() && !value.is_number()) {
      throw ConfigError("'" + path + "' must be a number");
    } else if (s.is_string() && !value.is_string()) {
      throw ConfigError("'" + path + "' must be a string");
    } else if (s.is_boolean() && !value.is_boolean()) {
      throw ConfigError("'" + path + "' must be true or false");
    }
  }
}

json load_config(const std::string &path, const json &overrides) {
  json cfg = defaults();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    json file;
    try {
      file = json::parse(in);
    } catch (const json::parse_error &e) {
      throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    check_keys(file, defaults(), "");
    cfg.merge_patch(file);
  }
  check_keys(overrides, defaults(), "");
  cfg.merge_patch(overrides);
  return cfg;
}

long get_int(const json &cfg, const char *pointer, long min) {
  const long v = cfg.at(json::json_pointer(pointer)).get<long>();
  if (v < min) throw ConfigError(std::string(pointer) + " must be at least " + std::to_string(min));
  return v;
}

double get_positive(const json &cfg, const char *pointer) {
  const double v = cfg.at(json::json_pointer(pointer)).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(pointer) + " must be positive");
  return v;
}

GridPtr grid_from(const json &cfg) {
  return make_grid(static_cast<std::size_t>(get_int(cfg, "/grid/n", 8)), get_positive(cfg, "/grid/r_max"));
}

GroundState ground_state_from(const json &cfg, const GridPtr &grid) {
  return solve_ground_state(grid, get_positive(cfg, "/ground_state/tol"),
                            static_cast<int>(get_int(cfg, "/ground_state/max_iter", 1)));
}

EvolutionConfig evolution_config(const json &cfg) {
  const json &e = cfg.at("evolve");
  const json &m = e.at("monitors");
  EvolutionConfig c;
  c.dt0 = e.at("dt0").get<double>();
  c.t_end = e.at("t_end").get<double>();
  c.cfl_safety = e.at("cfl_safety").get<double>();
  c.coupling = e.at("coupling").get<double>();
  c.monitor_stride = m.at("monitor_stride").get<int>();
  c.checkpoint_stride = m.at("checkpoint_stride").get<int>();
  c.blowup_gradient_factor = m.at("blowup_gradient_factor").get<double>();
  c.spectral_tail_threshold = m.at("spectral_tail_threshold").get<double>();
  c.dt_floor = m.at("dt_floor").get<double>();
  c.mass_drift_limit = m.at("mass_drift_limit").get<double>();
  c.window_radius0 = m.at("window_radius0").get<double>();
  c.window_alpha = m.at("window_alpha").get<double>();
  c.validate();
  return c;
}

void write_json(const fs::path &path, const json &j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

double rel_l2(const RadialField &a, const RadialField &b) { return mass(a - b) / mass(b); }

// Initial data for evolve and concentration, with the ground state when the
// preset or the later diagnostics need it.
struct Initial {
  RadialField u0;
  std::string label;
  std::optional<GaussianParams> gauss;
  std::optional<double> pcs_blowup_time;
};

Initial initial_data(const json &cfg, std::optional<GroundState> &gs) {
  const json &e = cfg.at("evolve");
  const std::string init = e.at("init").get<std::string>();
  const double amp = e.at("amplitude").get<double>();
  if (!std::isfinite(amp) || amp == 0.0) throw ConfigError("evolve.amplitude must be finite and nonzero");
  if (init == "gaussian") {
    const GaussianParams p{amp, get_positive(cfg, "/evolve/sigma")};
    return {gaussian(grid_from(cfg), p.amplitude, p.sigma), init, p, std::nullopt};
  }
  if (init == "ground_state_scaled" || init == "pcs_blowup") {
    if (!gs) gs = ground_state_from(cfg, grid_from(cfg));
    if (init == "ground_state_scaled") return {amp * gs->q, init, std::nullopt, std::nullopt};
    if (amp != 1.0) throw ConfigError("evolve.amplitude must be 1 for the pcs_blowup preset");
    const double tb = get_positive(cfg, "/evolve/blowup_time");
    return {pcs_blowup_data(*gs, tb), init, std::nullopt, tb};
  }
  if (!fs::exists(init)) throw IoError("evolve.init: no preset or checkpoint named '" + init + "'");
  Checkpoint c = read_checkpoint(init);
  return {std::move(c.field), "checkpoint:" + init, std::nullopt, std::nullopt};
}

struct RunOutcome {
  int code = kOk;
  json summary;
};

json concentration_block(const Trajectory &tr, const GroundState &gs, const json &cfg, const fs::path &out, bool &ok) {
  const double alpha = cfg.at("concentration").at("alpha").get<double>();
  const double need = cfg.at("concentration").at("min_ratio").get<double>();
  const double ref = gs.mass * gs.mass;
  const ConcentrationReport rep = concentration_scan(tr, ref, alpha);
  std::ofstream csv(out / "concentration.csv");
  write_concentration_csv(csv, rep);
  json j = rep.to_json();
  ok = rep.liminf_estimate >= need * ref;
  j["min_ratio"] = need;
  j["passed"] = ok;
  return j;
}

RunOutcome run_evolve_one(const json &cfg, const fs::path &out) {
  fs::create_directories(out);
  std::optional<GroundState> gs;
  const Initial init = initial_data(cfg, gs);
  const EvolutionConfig ecfg = evolution_config(cfg);
  const Trajectory tr = evolve(init.u0, ecfg);

  {
    std::ofstream csv(out / "trajectory.csv");
    write_trajectory_csv(csv, tr);
  }
  if (cfg.at("evolve").at("write_checkpoints").get<bool>()) {
    fs::create_directories(out / "checkpoints");
    for (std::size_t i = 0; i < tr.checkpoints.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "ckpt_%05zu.chk", i);
      write_checkpoint(out / "checkpoints" / name, tr.checkpoints[i].second, tr.checkpoints[i].first,
                       {{"init", init.label}});
    }
  }

  json rep = blowup_report(tr);
  rep["init"] = init.label;
  rep["config"] = cfg.at("evolve");
  rep["grid"] = cfg.at("grid");
  const RadialField &last = tr.checkpoints.back().second;
  if (init.gauss) {
    rep["free_reference_error"] = rel_l2(last, free_reference(init.u0.grid_ptr(), *init.gauss, tr.checkpoints.back().first));
    rep["initial_lv4"] = lv4(init.u0);
  }
  if (init.pcs_blowup_time) {
    // Agreement with the explicit solution while it is still resolved.
    const double k0 = tr.samples.front().kinetic;
    double worst = 0.0, until = 0.0;
    for (const auto &[t, u] : tr.checkpoints) {
      if (t >= *init.pcs_blowup_time || kinetic(u) > 25.0 * k0) continue;
      worst = std::max(worst, rel_l2(u, pcs_blowup_exact(*gs, *init.pcs_blowup_time, t)));
      until = std::max(until, t);
    }
    rep["pcs_tracking"] = {{"blowup_time", *init.pcs_blowup_time}, {"max_error_until_25x_kinetic", worst}, {"tracked_until", until}};
  }
  if (tr.termination == Termination::blowup_detected && std::isfinite(tr.t_est)) {
    if (!gs) gs = solve_ground_state(init.u0.grid_ptr(), get_positive(cfg, "/ground_state/tol"),
                                     static_cast<int>(get_int(cfg, "/ground_state/max_iter", 1)));
    bool ok = false;
    rep["concentration"] = concentration_block(tr, *gs, cfg, out, ok);
  }
  write_json(out / "blowup_report.json", rep);

  RunOutcome o;
  o.code = (tr.termination == Termination::completed || tr.termination == Termination::blowup_detected) ? kOk : kCheckFailed;
  o.summary = {{"out", out.string()},        {"termination", to_string(tr.termination)}, {"t_final", tr.t_final},
               {"t_est", rep["t_est"]},      {"gradient_growth", rep["gradient_growth"]}, {"mass_drift", rep["mass_drift"]},
               {"steps", tr.steps}};
  if (rep.contains("free_reference_error")) o.summary["free_reference_error"] = rep["free_reference_error"];
  if (rep.contains("concentration")) o.summary["concentration_liminf_ratio"] = rep["concentration"]["liminf_ratio"];
  return o;
}

std::string error_type(const std::exception &e) {
  if (dynamic_cast<const IterationLimitError *>(&e)) return "iteration_limit";
  if (dynamic_cast<const ConfigError *>(&e)) return "config";
  if (dynamic_cast<const IoError *>(&e)) return "io";
  if (dynamic_cast<const WrongRegimeError *>(&e)) return "wrong_regime";
  if (dynamic_cast<const BracketError *>(&e)) return "bracket";
  if (dynamic_cast<const TrivialLimitError *>(&e)) return "trivial_limit";
  if (dynamic_cast<const StepSizeError *>(&e)) return "step_size";
  if (dynamic_cast<const OracleFailure *>(&e)) return "oracle_failure";
  if (dynamic_cast<const PreconditionError *>(&e)) return "precondition";
  if (dynamic_cast<const Error *>(&e)) return "numerical";
  return "internal";
}

int exit_code_for(const std::string &type) {
  if (type == "config" || type == "io" || type == "precondition") return kUsage;
  if (type == "internal") return kInternal;
  return kCheckFailed;
}

json error_json(const std::exception &e) {
  json j = {{"type", error_type(e)}, {"message", e.what()}};
  if (const auto *it = dynamic_cast<const IterationLimitError *>(&e)) j["report"] = it->report();
  return {{"error", j}};
}

// Runs the evolve block, or every sweep entry merged over it, with up to
// `jobs` entries in flight. Each entry writes to its own directory.
int run_evolve(const json &cfg, const fs::path &out, int jobs) {
  const json &sweep = cfg.at("sweep");
  if (sweep.empty()) {
    const RunOutcome o = run_evolve_one(cfg, out);
    std::cout << o.summary.dump() << '\n';
    return o.code;
  }
  std::vector<int> codes(sweep.size(), kOk);
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&]() {
    for (std::size_t i = next++; i < sweep.size(); i = next++) {
      json entry = cfg;
      entry.erase("sweep");
      entry.merge_patch(sweep[i]);
      char name[32];
      std::snprintf(name, sizeof name, "sweep_%03zu", i);
      json line;
      try {
        const RunOutcome o = run_evolve_one(entry, out / name);
        codes[i] = o.code;
        line = o.summary;
      } catch (const std::exception &e) {
        line = error_json(e);
        line["out"] = (out / name).string();
        codes[i] = exit_code_for(error_type(e));
      }
      std::lock_guard<std::mutex> lock(io);
      std::cout << line.dump() << '\n';
    }
  };
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), sweep.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();
  return *std::max_element(codes.begin(), codes.end());
}

int run_ground_state(const json &cfg, const fs::path &out) {
  const double tol = get_positive(cfg, "/ground_state/tol");
  const double id_tol = get_positive(cfg, "/ground_state/identity_tol");
  const GroundState gs = ground_state_from(cfg, grid_from(cfg));
  write_checkpoint(out / "ground_state.chk", gs.q, 0.0, {{"kind", "ground_state"}});
  json rep = gs.report();
  rep["tol"] = tol;
  rep["identity_tol"] = id_tol;
  rep["iterations"] = gs.iterations;
  const bool ok = gs.pde_residual < tol && gs.pohozaev_grad_defect < id_tol && gs.pohozaev_lv_defect < id_tol &&
                  gs.energy_defect < id_tol;
  rep["passed"] = ok;
  write_json(out / "ground_state.json", rep);
  std::cout << rep.dump() << '\n';
  return ok ? kOk : kCheckFailed;
}

int run_gn_check(const json &cfg, const fs::path &out) {
  const auto samples = static_cast<std::size_t>(get_int(cfg, "/gn_check/samples", 1));
  const auto seed = static_cast<std::uint64_t>(get_int(cfg, "/gn_check/seed", 0));
  const GroundState gs = ground_state_from(cfg, grid_from(cfg));
  const GnCheckResult res = gn_check(gs, samples, seed, cfg.at("gn_check").at("inject_ground_state").get<bool>());
  json rep = {{"samples", res.ratios.size()},
              {"seed", seed},
              {"sharp_J", gs.sharp_J},
              {"min_J", res.min_ratio * gs.sharp_J},
              {"median_J", res.median_ratio * gs.sharp_J},
              {"min_ratio", res.min_ratio},
              {"median_ratio", res.median_ratio},
              {"resampled", res.resampled},
              {"near_extremal", res.near_extremal},
              {"histogram", {{"ratio_edges", res.histogram_edges}, {"counts", res.histogram_counts}}},
              {"passed", res.passed}};
  write_json(out / "gn_check.json", rep);
  json brief = rep;
  brief.erase("histogram");
  std::cout << brief.dump() << '\n';
  return res.passed ? kOk : kCheckFailed;
}

// Rebuilds a trajectory from an evolve output directory: samples from the
// CSV, termination and t_est from its footer, fields from the checkpoints.
Trajectory load_run(const fs::path &dir) {
  std::ifstream csv(dir / "trajectory.csv");
  if (!csv) throw IoError("no trajectory.csv in " + dir.string());
  Trajectory tr;
  std::string line;
  std::getline(csv, line);
  json footer;
  while (std::getline(csv, line)) {
    if (line.rfind("# ", 0) == 0) {
      footer = json::parse(line.substr(2));
      continue;
    }
    std::stringstream ls(line);
    TrajectorySample s;
    double *fields[] = {&s.t, &s.mass, &s.energy, &s.kinetic, &s.lv4, &s.variance, &s.grad_norm, &s.l3_accum, &s.concentration_mass};
    for (double *f : fields) {
      std::string cell;
      if (!std::getline(ls, cell, ',')) throw IoError("short row in trajectory.csv");
      *f = std::stod(cell);
    }
    tr.samples.push_back(s);
  }
  if (footer.is_null()) throw IoError("trajectory.csv has no status footer");
  const std::string term = footer.at("termination").get<std::string>();
  for (auto t : {Termination::completed, Termination::blowup_detected, Termination::resolution_failure, Termination::error}) {
    if (to_string(t) == term) tr.termination = t;
  }
  tr.t_final = footer.at("t_final").get<double>();
  if (footer.at("t_est").is_number()) tr.t_est = footer.at("t_est").get<double>();
  std::vector<fs::path> files;
  if (fs::exists(dir / "checkpoints")) {
    for (const auto &e : fs::directory_iterator(dir / "checkpoints")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto &f : files) {
    Checkpoint c = read_checkpoint(f);
    tr.checkpoints.emplace_back(c.time, std::move(c.field));
  }
  if (tr.checkpoints.empty()) throw IoError("no checkpoints under " + (dir / "checkpoints").string());
  return tr;
}

int run_concentration(const json &cfg, const fs::path &out, const std::string &from) {
  fs::create_directories(out);
  Trajectory tr;
  if (from.empty()) {
    std::optional<GroundState> gs;
    tr = evolve(initial_data(cfg, gs).u0, evolution_config(cfg));
  } else {
    tr = load_run(from);
  }
  const GroundState gs = ground_state_from(cfg, tr.checkpoints.front().second.grid_ptr());
  bool ok = false;
  json rep = concentration_block(tr, gs, cfg, out, ok);
  write_json(out / "concentration.json", rep);
  std::cout << rep.dump() << '\n';
  return ok ? kOk : kCheckFailed;
}

int run_transform(const json &cfg, const fs::path &out) {
  const json &t = cfg.at("transform");
  const std::string input = t.at("input").get<std::string>();
  if (input.empty()) throw ConfigError("transform.input is required");
  const Checkpoint c = read_checkpoint(input);
  const std::string kind = t.at("kind").get<std::string>();
  json rep = {{"kind", kind}, {"input", input}};
  RadialField field(c.field.grid_ptr());
  double time = c.time;
  bool warning = false;
  std::map<std::string, std::string> meta = c.meta;
  meta["transform"] = kind;
  if (kind == "scaling") {
    const double lam = get_positive(cfg, "/transform/lambda");
    auto r = apply_scaling(c.field, lam);
    field = std::move(r.field);
    warning = r.aliasing_warning;
    rep["lambda"] = lam;
    rep["aliasing_warning"] = warning;
  } else if (kind == "pcs") {
    const double t0 = t.at("t").get<double>(), T = t.at("T").get<double>();
    if (t0 == T) throw ConfigError("transform: t must differ from T");
    auto r = apply_pcs(c.field, t0, T);
    field = std::move(r.field);
    time = r.new_time;
    warning = r.truncation_warning;
    rep["t"] = t0;
    rep["T"] = T;
    rep["new_time"] = r.new_time;
    rep["truncation_warning"] = warning;
  } else {
    throw ConfigError("transform.kind must be 'scaling' or 'pcs'");
  }
  const fs::path target = out / t.at("output").get<std::string>();
  write_checkpoint(target, field, time, meta);
  rep["output"] = target.string();
  rep["mass_in"] = mass(c.field);
  rep["mass_out"] = mass(field);
  write_json(out / "transform.json", rep);
  std::cout << rep.dump() << '\n';
  return kOk;
}

int run_acceptance_cmd(const json &cfg, const fs::path &out, const std::vector<int> &only, std::size_t fine_n) {
  AcceptanceOptions opt;
  opt.n = static_cast<std::size_t>(get_int(cfg, "/grid/n", 8));
  opt.r_max = get_positive(cfg, "/grid/r_max");
  opt.seed = static_cast<std::uint64_t>(get_int(cfg, "/gn_check/seed", 0));
  opt.fine_n = fine_n;
  opt.only = only;
  json all = json::array();
  bool ok = true;
  run_acceptance(opt, [&](const CriterionResult &r) {
    std::cout << format_result(r) << std::endl;
    all.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"summary", r.summary}, {"details", r.details}});
    ok = ok && r.passed;
  });
  write_json(out / "acceptance.json", {{"criteria", all}, {"passed", ok}});
  return ok ? kOk : kCheckFailed;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Numerical lab for the focusing mass-critical Hartree equation in four dimensions"};
  app.require_subcommand(1);

  std::string config_path, out_flag, from_dir;
  int jobs = 1;
  std::vector<int> only;
  std::size_t fine_n = 8192;
  json overrides = json::object();

  auto set = [&overrides](const std::string &pointer) {
    return [&overrides, pointer](const auto &v) { overrides[json::json_pointer(pointer)] = v; };
  };
  auto common = [&](CLI::App *sub) {
    sub->add_option("-c,--config", config_path, "JSON config file");
    sub->add_option("-o,--out", out_flag, "Artifact directory (default: $HARTREE_LAB_OUT or .)");
    sub->add_option_function<long>("--n", set("/grid/n"), "Grid nodes");
    sub->add_option_function<double>("--r-max", set("/grid/r_max"), "Truncation radius");
    sub->add_option_function<double>("--tol", set("/ground_state/tol"), "Ground-state residual tolerance");
    sub->add_option_function<long>("--max-iter", set("/ground_state/max_iter"), "Ground-state iteration cap");
  };
  auto evolve_flags = [&](CLI::App *sub) {
    sub->add_option_function<std::string>("--init", set("/evolve/init"),
                                           "gaussian, ground_state_scaled, pcs_blowup or a checkpoint path");
    sub->add_option_function<double>("--amplitude", set("/evolve/amplitude"), "Amplitude of the preset");
    sub->add_option_function<double>("--sigma", set("/evolve/sigma"), "Gaussian width");
    sub->add_option_function<double>("--blowup-time", set("/evolve/blowup_time"), "Blow-up time of the pcs preset");
    sub->add_option_function<double>("--dt0", set("/evolve/dt0"), "Base time step");
    sub->add_option_function<double>("--t-end", set("/evolve/t_end"), "Final time");
    sub->add_option_function<double>("--cfl", set("/evolve/cfl_safety"), "Step-size safety factor");
    sub->add_option_function<double>("--coupling", set("/evolve/coupling"), "Strength of the Hartree term");
    sub->add_option_function<bool>("--write-checkpoints", set("/evolve/write_checkpoints"), "Store field checkpoints");
    sub->add_option_function<double>("--alpha", set("/concentration/alpha"), "Window exponent");
  };

  auto *gs_cmd = app.add_subcommand("ground-state", "Compute Q and its identity report");
  common(gs_cmd);
  gs_cmd->add_option_function<double>("--identity-tol", set("/ground_state/identity_tol"), "Tolerance for the identity defects");

  auto *ev_cmd = app.add_subcommand("evolve", "Evolve a preset or a checkpoint");
  common(ev_cmd);
  evolve_flags(ev_cmd);
  ev_cmd->add_option("-j,--jobs", jobs, "Sweep entries run concurrently")->check(CLI::PositiveNumber);

  auto *gn_cmd = app.add_subcommand("gn-check", "Randomised check of the sharp GN inequality");
  common(gn_cmd);
  gn_cmd->add_option_function<long>("--samples", set("/gn_check/samples"), "Number of random fields");
  gn_cmd->add_option_function<long>("--seed", set("/gn_check/seed"), "RNG seed");
  gn_cmd->add_flag_function("--inject-ground-state", [&](std::int64_t) { overrides["gn_check"]["inject_ground_state"] = true; },
                            "Use Q as sample 0");

  auto *conc_cmd = app.add_subcommand("concentration", "Mass-concentration scan of a blow-up run");
  common(conc_cmd);
  evolve_flags(conc_cmd);
  conc_cmd->add_option("--from", from_dir, "Read an existing evolve output directory instead of running");

  auto *tr_cmd = app.add_subcommand("transform", "Apply scaling or the pseudo-conformal map to a checkpoint");
  common(tr_cmd);
  tr_cmd->add_option_function<std::string>("--kind", set("/transform/kind"), "scaling or pcs");
  tr_cmd->add_option_function<std::string>("--input", set("/transform/input"), "Input checkpoint");
  tr_cmd->add_option_function<std::string>("--output", set("/transform/output"), "Output checkpoint name");
  tr_cmd->add_option_function<double>("--lambda", set("/transform/lambda"), "Scaling factor");
  tr_cmd->add_option_function<double>("--t", set("/transform/t"), "Time of the input snapshot");
  tr_cmd->add_option_function<double>("--T", set("/transform/T"), "Pole of the pseudo-conformal map");

  auto *acc_cmd = app.add_subcommand("acceptance", "Run the acceptance suite");
  common(acc_cmd);
  acc_cmd->add_option_function<long>("--seed", set("/gn_check/seed"), "RNG seed");
  acc_cmd->add_option("--only", only, "Criterion ids to run");
  acc_cmd->add_option("--fine-n", fine_n, "Resolution of the convergence rerun");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsage;
  }

  fs::path out = ".";
  if (!out_flag.empty()) {
    out = out_flag;
  } else if (const char *env = std::getenv("HARTREE_LAB_OUT"); env && *env) {
    out = env;
  }

  try {
    fs::create_directories(out);
    const json cfg = load_config(config_path, overrides);
    if (gs_cmd->parsed()) return run_ground_state(cfg, out);
    if (ev_cmd->parsed()) return run_evolve(cfg, out, jobs);
    if (gn_cmd->parsed()) return run_gn_check(cfg, out);
    if (conc_cmd->parsed()) return run_concentration(cfg, out, from_dir);
    if (tr_cmd->parsed()) return run_transform(cfg, out);
    if (acc_cmd->parsed()) return run_acceptance_cmd(cfg, out, only, fine_n);
  } catch (const std::exception &e) {
    const json err = error_json(e);
    std::cerr << err.dump() << '\n';
    std::error_code ec;
    if (fs::is_directory(out, ec)) {
      std::ofstream f(out / "error.json");
      f << err.dump(2) << '\n';
    }
    return exit_code_for(error_type(e));
  }
  return kInternal;
}
