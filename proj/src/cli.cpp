#include "fwa/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fwa/dual.hpp"
#include "fwa/error.hpp"
#include "fwa/report_io.hpp"
#include "fwa/scenario_io.hpp"
#include "fwa/sim.hpp"
#include "fwa/traffic.hpp"

namespace fwa {

namespace {

struct TrafficSettings {
  double packet_bits = 12000.0;
  double jitter_sigma = 0.1;
};

struct Setup {
  Scenario scenario;
  SimulationConfig config;
  TrafficSettings traffic;
  bool allocation_log = false;
  bool sync_log = false;
  std::string trace_fingerprint;
  std::optional<DemandSeries> demand;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

double to_number(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size()) throw ValidationError("override '" + key + "': not a number: '" + value + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw ValidationError("override '" + key + "': expected true/false");
}

// Returns false when the key belongs to the scenario.
bool apply_run_override(Setup& s, const std::string& key, const std::string& value) {
  auto& c = s.config;
  if (key == "sim.iab_mode") {
    if (value == "adaptive") c.iab_mode = IabMode::Adaptive;
    else if (value == "fixed") c.iab_mode = IabMode::Fixed;
    else if (value == "disabled") c.iab_mode = IabMode::Disabled;
    else throw ValidationError("override 'sim.iab_mode': expected adaptive, fixed or disabled");
  } else if (key == "sim.bucket_fraction") {
    c.bucket_fraction = to_number(key, value);
  } else if (key == "sim.band_dwell_s") {
    c.band_dwell_s = to_number(key, value);
  } else if (key == "sim.infeasible_fraction") {
    c.infeasible_fraction = to_number(key, value);
  } else if (key == "sim.monitoring_energy_per_bit_j") {
    c.monitoring_energy_per_bit_j = to_number(key, value);
  } else if (key == "sim.record_ticks") {
    c.record_ticks = to_bool(key, value);
  } else if (key == "sim.allocation_log") {
    s.allocation_log = to_bool(key, value);
  } else if (key == "sim.sync_log") {
    s.sync_log = to_bool(key, value);
  } else if (key == "baseline2.wake_utilization") {
    c.baseline2.wake_utilization = to_number(key, value);
  } else if (key == "baseline2.sleep_utilization") {
    c.baseline2.sleep_utilization = to_number(key, value);
  } else if (key == "baseline2.dwell_s") {
    c.baseline2.dwell_s = to_number(key, value);
  } else if (key == "solver.schedule") {
    if (value == "polyak") c.solver.schedule = StepSchedule::Polyak;
    else if (value == "diminishing") c.solver.schedule = StepSchedule::Diminishing;
    else throw ValidationError("override 'solver.schedule': expected polyak or diminishing");
  } else if (key == "solver.alpha0") {
    c.solver.alpha0 = to_number(key, value);
  } else if (key == "solver.max_iters") {
    c.solver.max_iters = static_cast<int>(to_number(key, value));
  } else if (key == "solver.max_stall") {
    c.solver.max_stall = static_cast<int>(to_number(key, value));
  } else if (key == "solver.tol_gap") {
    c.solver.tol_gap = to_number(key, value);
  } else if (key == "solver.m_enum") {
    c.solver.m_enum = static_cast<std::size_t>(to_number(key, value));
  } else if (key == "traffic.packet_bits") {
    s.traffic.packet_bits = to_number(key, value);
    if (!(s.traffic.packet_bits > 0.0)) throw ValidationError("traffic.packet_bits must be positive");
  } else if (key == "traffic.jitter_sigma") {
    s.traffic.jitter_sigma = to_number(key, value);
    if (s.traffic.jitter_sigma < 0.0) throw ValidationError("traffic.jitter_sigma must be nonnegative");
  } else {
    return false;
  }
  return true;
}

std::filesystem::path resolve_trace_path(const std::string& trace) {
  if (trace == "bundled") return data_dir() / "traces" / "bundled_week.csv";
  std::filesystem::path p(trace);
  if (!std::filesystem::exists(p)) throw ValidationError("trace file '" + trace + "' not found (use 'bundled' for the shipped trace)");
  return p;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DemandSeries load_demand(const Scenario& scenario, const std::string& trace, std::uint64_t seed,
                         const TrafficSettings& traffic, std::string& fingerprint) {
  const auto path = resolve_trace_path(trace);
  const std::string text = read_file(path);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  fingerprint = buf;
  std::istringstream in(text);
  CountTrace counts = parse_trace(in, path.string());
  if (counts.resolution_s > 1) counts = augment(counts, seed, {traffic.jitter_sigma, 1});
  return to_demand(counts, traffic.packet_bits, site_mapping(scenario));
}

std::string describe_config(const Setup& s) {
  const auto& c = s.config;
  std::ostringstream out;
  out.precision(17);
  out << serialize_scenario(s.scenario) << "\n[run]\npolicy=" << to_string(c.policy) << "\nhorizon=" << c.horizon
      << "\ndt_s=" << c.dt_s << "\niab_mode=" << to_string(c.effective_iab_mode()) << "\nbucket_fraction=" << c.bucket_fraction
      << "\nband_dwell_s=" << c.band_dwell_s << "\ninfeasible_fraction=" << c.infeasible_fraction
      << "\nmonitoring=" << c.monitoring_energy_per_bit_j.value_or(-1.0) << "\nbaseline2=" << c.baseline2.wake_utilization
      << ',' << c.baseline2.sleep_utilization << ',' << c.baseline2.dwell_s << "\nsolver="
      << (c.solver.schedule == StepSchedule::Polyak ? "polyak" : "diminishing") << ',' << c.solver.alpha0 << ','
      << c.solver.max_iters << ',' << c.solver.max_stall << ',' << c.solver.tol_gap << ',' << c.solver.m_enum
      << "\ntraffic=" << s.traffic.packet_bits << ',' << s.traffic.jitter_sigma << "\ntrace=" << s.trace_fingerprint << '\n';
  return out.str();
}

std::filesystem::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FWA_OUT_DIR"); env && *env) return env;
  return "fwa_out";
}

struct Flags {
  std::string scenario;
  std::string trace = "bundled";
  std::string policy = "proposed";
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::string> sets;
  std::size_t horizon = 0;
  double ticks_per_second = 1.0;
  std::optional<double> demand;
};

void add_common(CLI::App* cmd, Flags& f, bool with_policy) {
  cmd->add_option("--scenario", f.scenario, "Scenario file or bundled name (e.g. rural_montreal)")->required();
  cmd->add_option("--trace", f.trace, "Count trace CSV, or 'bundled'")->capture_default_str();
  if (with_policy) cmd->add_option("--policy", f.policy, "proposed | baseline1 | baseline2")->capture_default_str();
  cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--out", f.out, "Output directory (default $FWA_OUT_DIR or ./fwa_out)");
  cmd->add_option("--set", f.sets, "Override key=value (repeatable)")->take_all();
  cmd->add_option("--horizon", f.horizon, "Ticks to simulate (0 = whole trace)")->capture_default_str();
  cmd->add_option("--ticks-per-second", f.ticks_per_second, "Ticks per simulated second")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

std::vector<std::pair<std::string, std::string>> echo_settings(const CLI::App* cmd) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("verb", cmd->get_name());
  for (const CLI::Option* opt : cmd->get_options()) {
    if (opt->count() == 0 || opt->get_name() == "--help" || opt->get_name() == "--out") continue;
    for (const auto& v : opt->results()) out.emplace_back(opt->get_name(), v);
  }
  return out;
}

Setup prepare(const Flags& f, bool need_demand) {
  Setup s;
  s.scenario = load_scenario(resolve_scenario_path(f.scenario));
  const auto policy = parse_policy(f.policy);
  if (!policy) throw UsageError("unknown policy '" + f.policy + "' (proposed, baseline1, baseline2)");
  s.config.policy = *policy;
  s.config.seed = f.seed;
  s.config.horizon = f.horizon;
  s.config.dt_s = 1.0 / f.ticks_per_second;
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (!apply_run_override(s, key, value)) apply_scenario_override(s.scenario, key, value);
  }
  if (need_demand) s.demand = load_demand(s.scenario, f.trace, f.seed, s.traffic, s.trace_fingerprint);
  return s;
}

std::string prefix_for(Policy p, std::uint64_t seed) {
  return std::string(to_string(p)) + "_seed" + std::to_string(seed) + "_";
}

void print_run(std::ostream& out, const RunReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: node energy %.6f MJ, microwave %.6f MJ, IAB %.6f MJ, satisfaction %.5f (%.5f grace-excluded)\n",
                std::string(to_string(r.policy)).c_str(), r.headline_energy_j / 1e6, r.microwave_energy_j / 1e6,
                r.iab_energy_j / 1e6, r.satisfaction_raw, r.satisfaction_grace);
  out << buf;
  if (r.infeasible) out << "warning: demand exceeded all-on capacity on " << r.infeasible_ticks << " ticks\n";
}

int do_simulate(const Flags& f, const CLI::App* cmd, std::ostream& out) {
  Setup s = prepare(f, true);
  std::ostringstream alloc_log;
  std::ostringstream sync_log;
  if (s.allocation_log) s.config.allocation_log = &alloc_log;
  if (s.sync_log) s.config.sync_log = &sync_log;
  const auto report = run(s.scenario, *s.demand, s.config);
  const auto prov = make_provenance(describe_config(s), f.seed, echo_settings(cmd));
  const auto dir = output_dir(f.out);
  const auto prefix = prefix_for(s.config.policy, f.seed);
  if (report.has_ticks()) {
    write_file_atomic(dir / (prefix + "metrics.csv"), [&](std::ostream& o) { write_metrics_csv(o, report, prov); });
  }
  write_file_atomic(dir / (prefix + "transitions.log"), [&](std::ostream& o) { write_transitions(o, report, prov); });
  write_file_atomic(dir / (prefix + "summary.json"), [&](std::ostream& o) { write_summary_json(o, report, prov); });
  if (s.allocation_log) {
    write_file_atomic(dir / (prefix + "allocations.log"), [&](std::ostream& o) {
      write_header(o, prov);
      o << alloc_log.str();
    });
  }
  if (s.sync_log) {
    write_file_atomic(dir / (prefix + "sync.log"), [&](std::ostream& o) {
      write_header(o, prov);
      o << sync_log.str();
    });
  }
  print_run(out, report);
  out << "wrote " << (dir / prefix).string() << "*\n";
  return kExitOk;
}

int do_compare(const Flags& f, const CLI::App* cmd, std::ostream& out) {
  Setup s = prepare(f, true);
  s.config.record_ticks = false;
  const auto reports = run_all(s.scenario, *s.demand, s.config);
  const auto table = compare(reports);
  const auto prov = make_provenance(describe_config(s), f.seed, echo_settings(cmd));
  const auto dir = output_dir(f.out);
  for (const auto& r : reports) {
    write_file_atomic(dir / (prefix_for(r.policy, f.seed) + "summary.json"),
                      [&](std::ostream& o) { write_summary_json(o, r, prov); });
  }
  write_file_atomic(dir / "comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, table, prov); });
  write_file_atomic(dir / "comparison.json", [&](std::ostream& o) { write_comparison_json(o, table, prov); });
  out << format_comparison(table);
  out << "wrote " << (dir / "comparison.csv").string() << '\n';
  return kExitOk;
}

int do_optimize(const Flags& f, const CLI::App* cmd, std::ostream& out) {
  Setup s = prepare(f, !f.demand.has_value());
  const double demand = f.demand ? *f.demand : s.demand->peak();
  if (demand < 0.0) throw ValidationError("--demand must be nonnegative");
  const auto& head = s.scenario.nodes[s.scenario.head_node_index()];
  const double xi = s.config.monitoring_energy_per_bit_j.value_or(s.scenario.controller.monitoring_energy_per_bit_j);
  auto inst = DualInstance::from_node(head, demand, MonitoringCost::for_radios(head.radios.size(), xi));
  inst.dt_s = s.config.dt_s;
  const auto sol = solve_dual(inst, {}, s.config.solver);
  const auto prov = make_provenance(describe_config(s) + "demand=" + std::to_string(demand), f.seed, echo_settings(cmd));
  const auto path = output_dir(f.out) / "solver_report.json";
  write_file_atomic(path, [&](std::ostream& o) { write_solver_report_json(o, inst, sol, prov); });
  out << "node " << head.id << ", demand " << demand << " bit/s:";
  for (std::size_t m = 0; m < head.radios.size(); ++m) {
    out << ' ' << head.radios[m].id << '=' << (sol.policy.size() > m && sol.policy[m] ? "Serving" : "DeepSleep");
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "\nprimal %.6f W, dual %.6f W, gap %.3g, %d iterations%s%s\n", sol.primal_value, sol.dual_value,
                sol.gap, sol.iterations, sol.converged ? ", converged" : "", sol.warning ? ", WARNING" : "");
  out << buf << "wrote " << path.string() << '\n';
  return kExitOk;
}

int do_validate(const Flags& f, std::ostream& out) {
  Setup s = prepare(f, true);
  const auto& sc = s.scenario;
  std::size_t radios = 0;
  double all_on = std::numeric_limits<double>::infinity();
  for (const auto& n : sc.nodes) {
    radios += n.radios.size();
    double c = 0.0;
    for (const auto& r : n.radios) c += r.capacity_bps;
    all_on = std::min(all_on, c);
  }
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "scenario '%s': %zu nodes, %zu radios, %zu DUs, %zu terminals; all-on capacity %.6g bit/s\n"
                "trace: %zu ticks at %.3g s, %zu terminals, peak demand %.6g bit/s\n",
                sc.name.c_str(), sc.nodes.size(), radios, sc.dus.size(), sc.terminals.size(), all_on, s.demand->ticks(),
                s.demand->resolution_s(), s.demand->terminals(), s.demand->peak());
  out << buf;
  if (s.demand->peak() > all_on) out << "warning: peak demand exceeds all-on capacity\n";
  out << "ok\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-aware FWA backhaul simulator", "fwa"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(code_version()));
  Flags f;
  std::string report_dir;

  auto* simulate = app.add_subcommand("simulate", "Run one policy and write per-tick metrics, transitions and a summary");
  add_common(simulate, f, true);
  auto* compare_cmd = app.add_subcommand("compare", "Run all three policies and write a comparison table");
  add_common(compare_cmd, f, false);
  auto* optimize = app.add_subcommand("optimize", "Solve the dual problem for the head node and write a solver report");
  add_common(optimize, f, false);
  optimize->add_option("--demand", f.demand, "Demand in bit/s (default: trace peak)");
  auto* validate = app.add_subcommand("validate", "Lint a scenario and trace");
  add_common(validate, f, false);
  auto* report = app.add_subcommand("report", "Summarize prior run outputs");
  report->add_option("--out", report_dir, "Directory holding *summary.json files (default $FWA_OUT_DIR or ./fwa_out)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return do_simulate(f, simulate, out);
    if (compare_cmd->parsed()) return do_compare(f, compare_cmd, out);
    if (optimize->parsed()) return do_optimize(f, optimize, out);
    if (validate->parsed()) return do_validate(f, out);
    if (report->parsed()) {
      out << summarize_outputs(output_dir(report_dir));
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const LookupError& e) {
    err << "lookup error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace fwa
