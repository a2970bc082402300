// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fwa/cli.hpp"
#include "fwa/dual.hpp"
#include "fwa/fsm.hpp"
#include "fwa/iab.hpp"
#include "fwa/phy.hpp"
#include "fwa/scenario_io.hpp"
#include "fwa/sim.hpp"
#include "fwa/tables.hpp"
#include "fwa/traffic.hpp"

namespace fs = std::filesystem;
using namespace fwa;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
  std::printf("criterion %2d %-36s %s  %s\n", id, title.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

template <typename F>
void criterion(int id, const std::string& title, F&& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  report(id, title, o);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

Scenario bundled_scenario() { return load_scenario(resolve_scenario_path("rural_montreal")); }
CountTrace bundled_trace() { return load_trace(data_dir() / "traces" / "bundled_week.csv"); }

// Windows [first, first + count) of a trace.
CountTrace slice(const CountTrace& t, std::size_t first, std::size_t count) {
  CountTrace out;
  out.resolution_s = t.resolution_s;
  out.start = t.start + static_cast<std::int64_t>(first) * t.resolution_s;
  for (const auto& s : t.sites) {
    out.sites.push_back({s.site_id, {s.counts.begin() + static_cast<std::ptrdiff_t>(first),
                                     s.counts.begin() + static_cast<std::ptrdiff_t>(first + count)}});
  }
  return out;
}

double head_capacity(const Scenario& sc) {
  double c = 0.0;
  for (const auto& r : sc.nodes[sc.head_node_index()].radios) c += r.capacity_bps;
  return c;
}

Outcome numerology_anchor() {
  const int rbs = fr2_numerology().lookup(3, 400);
  bool has_273 = false;
  for (const auto* t : {&fr1_numerology(), &fr2_numerology()}) {
    for (const auto& e : t->entries()) has_273 |= e.rbs == 273;
  }
  return {rbs == 264 && has_273, "(3,400MHz)->" + std::to_string(rbs) + " RBs, 273-entry " + (has_273 ? "present" : "missing")};
}

Outcome formula_fixtures() {
  const CarrierParams mm{1, 4, 8, 1.0, 948.0 / 1024.0, 0.18, 3};
  const CarrierParams mid{1, 4, 8, 1.0, 948.0 / 1024.0, 0.14, 1};
  const double dmax = max_du_rate_mbps(mm, 264);
  const int rbs = rbs_required(100.0, mid);
  const int budget = update_rb_budget(0.6, 0.8, 264);
  const bool ok = std::abs(dmax - 8619.4) <= 8619.4 * 1e-3 && rbs == 12 && budget == 184;
  return {ok, fmt("D_Max=%.2f Mbps", dmax) + " rbs=" + std::to_string(rbs) + " budget=" + std::to_string(budget)};
}

Outcome baseline1_closed_form(const Scenario& sc, const DemandSeries& demand) {
  SimulationConfig cfg;
  cfg.policy = Policy::Baseline1;
  cfg.iab_mode = IabMode::Disabled;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = run(sc, demand, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = rep.horizon == 604800 && rep.headline_energy_j == 96.768e6 && secs < 60.0;
  return {ok, fmt("E=%.6f MJ", rep.headline_energy_j / 1e6) + " ticks=" + std::to_string(rep.horizon) +
                  fmt(" in %.1f s", secs)};
}

struct WeekRuns {
  std::map<std::uint64_t, std::vector<RunReport>> by_seed;
  double peak_bps = 0.0;
};

WeekRuns week_runs(const Scenario& sc, const CountTrace& trace) {
  WeekRuns out;
  for (auto seed : kSeeds) {
    const auto demand = to_demand(augment(trace, seed), 12000.0, site_mapping(sc));
    out.peak_bps = std::max(out.peak_bps, demand.peak());
    SimulationConfig cfg;
    cfg.seed = seed;
    cfg.iab_mode = IabMode::Disabled;
    cfg.monitoring_energy_per_bit_j = 0.0;
    cfg.record_ticks = false;
    out.by_seed[seed] = run_all(sc, demand, cfg);
  }
  return out;
}

const RunReport& pick(const std::vector<RunReport>& runs, Policy p) {
  for (const auto& r : runs) {
    if (r.policy == p) return r;
  }
  throw std::runtime_error("missing policy run");
}

Outcome energy_ordering(const WeekRuns& w) {
  bool ok = true;
  std::string detail;
  for (const auto& [seed, runs] : w.by_seed) {
    const double p = pick(runs, Policy::Proposed).headline_energy_j;
    const double b2 = pick(runs, Policy::Baseline2).headline_energy_j;
    const double b1 = pick(runs, Policy::Baseline1).headline_energy_j;
    ok &= p <= b2 && b2 <= b1 && p <= 0.9 * b1;
    detail += "seed" + std::to_string(seed) + fmt(" P=%.2f", p / 1e6) + fmt(" B2=%.2f", b2 / 1e6) +
              fmt(" B1=%.2f MJ", b1 / 1e6) + fmt(" (-%.1f%%); ", 100.0 * (1.0 - p / b1));
  }
  return {ok, detail};
}

Outcome satisfaction_check(const WeekRuns& w, double capacity) {
  bool ok = w.peak_bps <= capacity;
  std::string detail = fmt("peak %.3f Gbps", w.peak_bps / 1e9) + fmt(" <= %.3f; ", capacity / 1e9);
  for (const auto& [seed, runs] : w.by_seed) {
    const auto& p = pick(runs, Policy::Proposed);
    const auto& b1 = pick(runs, Policy::Baseline1);
    ok &= p.satisfaction_grace >= 0.99 && b1.satisfaction_raw == 1.0;
    detail += "seed" + std::to_string(seed) + fmt(" P=%.5f", p.satisfaction_grace) + fmt(" B1=%.3f; ", b1.satisfaction_raw);
  }
  return {ok, detail};
}

DualInstance random_instance(std::mt19937_64& rng, bool light = false) {
  std::uniform_int_distribution<int> radios(1, 3);
  std::uniform_real_distribution<double> cap(0.1e9, 5e9);
  std::uniform_real_distribution<double> serving(40.0, 120.0);
  std::uniform_real_distribution<double> sleep(1.0, 10.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  DualInstance inst;
  double total = 0.0;
  double smallest = 1e300;
  const int m = radios(rng);
  for (int i = 0; i < m; ++i) {
    DualRadio r;
    r.capacity_bps = cap(rng);
    r.serving_w = serving(rng);
    r.sleep_w = sleep(rng);
    total += r.capacity_bps;
    smallest = std::min(smallest, r.capacity_bps);
    inst.radios.push_back(r);
  }
  inst.demand_bps = frac(rng) * (light ? smallest : total);
  return inst;
}

Outcome weak_duality() {
  std::mt19937_64 rng(2024);
  int n = 0, converged = 0, kkt_ok = 0;
  bool ok = true;
  for (; n < 40; ++n) {
    const auto inst = random_instance(rng, n % 2 == 0);
    const auto sol = solve_dual(inst);
    ok &= std::isfinite(sol.dual_value) && sol.dual_value <= sol.primal_value + 1e-9 * std::max(1.0, sol.primal_value);
    if (sol.converged) {
      ++converged;
      const bool k = sol.kkt.max_slack() <= 1e-6 && sol.kkt.stationarity_residual <= 1e-6 && sol.kkt.primal_feasibility &&
                     sol.kkt.dual_feasibility;
      kkt_ok += k;
      ok &= k;
    }
  }
  ok &= converged > 0;
  return {ok, std::to_string(n) + " instances, g<=A in all; KKT ok on " + std::to_string(kkt_ok) + "/" +
                  std::to_string(converged) + " converged"};
}

Outcome brute_force_equivalence() {
  std::mt19937_64 rng(77);
  int match = 0;
  const int cases = 50;
  for (int i = 0; i < cases; ++i) {
    const auto inst = random_instance(rng);
    const auto sol = solve_dual(inst);
    const auto brute = brute_force_serving_set(inst);
    match += brute && sol.feasible && sol.policy == *brute;
  }
  return {match == cases, std::to_string(match) + "/" + std::to_string(cases) + " match"};
}

MicrowaveNode fuzz_node(const std::string& id) {
  MicrowaveNode n;
  n.id = id;
  for (auto [rid, cap] : {std::pair{"r7", 0.6e9}, std::pair{"r42", 2.2e9}}) {
    RadioUnit r;
    r.id = rid;
    r.capacity_bps = cap;
    n.radios.push_back(r);
  }
  n.thresholds.completely_off_period_s = 3600.0;
  return n;
}

Outcome fsm_suite() {
  std::size_t one_hot = 0, whitelist = 0, floor = 0, timers = 0, retire = 0, sync = 0;
  std::size_t timer_checks = 0, retire_checks = 0, sync_checks = 0;
  for (double p_fail : {0.0, 0.1}) {
    ControllerSettings settings;
    settings.p_fail_startup = p_fail;
    settings.p_fail_wakeup = p_fail;
    NodeController head(fuzz_node("a"), settings, 11);
    NodeController tail(fuzz_node("b"), settings, 12);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> level(0.0, 3.0e9);
    std::bernoulli_distribution jump(0.003);
    double demand = 0.0;
    std::vector<std::uint64_t> entered(2, 0);
    std::vector<std::uint64_t> slept(2, 0);
    std::uint64_t static_since = 0;
    StateVector last_head = head.state_vector();
    SyncMessage msg = head.message(0);
    const std::uint64_t settle = 70 + 2;
    for (std::uint64_t t = 1; t <= 100000; ++t) {
      if (jump(rng)) demand = level(rng);
      const auto r = head.step(demand, 1.0);
      const auto f = tail.follow(msg, 1.0);
      msg = head.message(t);
      for (const auto* res : {&r, &f}) {
        for (std::size_t m = 0; m < res->states.size(); ++m) {
          int sum = 0;
          for (auto k : kAllRadioStates) sum += res->states.x(m, k);
          one_hot += sum != 1;
        }
        floor += res->states.count_on() == 0;
        for (const auto& tr : res->fired) whitelist += !is_whitelisted(tr.from, tr.action, tr.to);
      }
      for (const auto& tr : r.fired) {
        const auto m = tr.radio;
        if (tr.action == ActionKind::GoStartup || tr.action == ActionKind::GoWakeUp) entered[m] = t;
        if (tr.to == RadioState::DeepSleep) slept[m] = t;
        if (tr.action == ActionKind::StartupComplete || tr.action == ActionKind::WakeUpComplete) {
          const auto need = tr.action == ActionKind::StartupComplete ? 60u : 10u;
          ++timer_checks;
          timers += t - entered[m] != need;
        }
        if (tr.action == ActionKind::GoCompletelyOff) {
          ++retire_checks;
          retire += t - slept[m] != 3600u;
        }
      }
      for (std::size_t m = 0; m < r.states.size(); ++m) {
        if (r.states[m] == RadioState::DeepSleep && t - slept[m] > 3600u) ++retire;
      }
      if (r.states != last_head) {
        last_head = r.states;
        static_since = t;
      }
      if (p_fail == 0.0 && t - static_since >= settle) {
        ++sync_checks;
        for (std::size_t m = 0; m < r.states.size(); ++m) sync += is_on(r.states[m]) != is_on(f.states[m]);
      }
    }
  }
  const bool ok = one_hot + whitelist + floor + timers + retire + sync == 0 && timer_checks > 0 && retire_checks > 0 &&
                  sync_checks > 0;
  std::ostringstream d;
  d << "2x1e5 ticks; violations one-hot=" << one_hot << " whitelist=" << whitelist << " floor=" << floor
    << " timer=" << timers << "/" << timer_checks << " retire=" << retire << "/" << retire_checks
    << " sync=" << sync << "/" << sync_checks;
  return {ok, d.str()};
}

struct IabRuns {
  std::vector<RunReport> adaptive;
  std::vector<RunReport> fixed;
};

IabRuns iab_runs(const Scenario& sc, const CountTrace& trace) {
  // 6 h of weekday daytime traffic (10:00-16:00).
  const auto window = slice(trace, 40, 24);
  IabRuns out;
  for (auto seed : kSeeds) {
    const auto demand = to_demand(augment(window, seed), 12000.0, site_mapping(sc));
    SimulationConfig cfg;
    cfg.seed = seed;
    cfg.record_ticks = false;
    cfg.iab_mode = IabMode::Adaptive;
    out.adaptive.push_back(run(sc, demand, cfg));
    cfg.iab_mode = IabMode::Fixed;
    out.fixed.push_back(run(sc, demand, cfg));
  }
  return out;
}

Outcome staircase() {
  const auto table = mcs_table();
  const CarrierParams p{1, 4, 8, 1.0, 948.0 / 1024.0, 0.14, 1};
  const double g = 1e-10, n = 1e-12;
  const int rbs = 20, mcs = 12;
  const double demand = 0.5 * mcs_rate_bps(table[mcs], p, rbs);
  double power = power_for_snr(table[mcs].snr_threshold * db_to_linear(15.0), g, n);
  bool ok = true;
  int steps = 0;
  for (double excess_db = 15.0; excess_db > 0.0; excess_db -= 1.0) {
    power = power_for_snr(table[mcs].snr_threshold * db_to_linear(excess_db), g, n);
    const auto a = adapt_link(table, mcs, power, g, n, demand, rbs, p);
    ok &= a.applied == AdaptCase::LowerPower && a.power_w < power && a.mcs_index == mcs;
    const auto hold = adapt_link(table, a.mcs_index, a.power_w, g, n, demand, rbs, p);
    ok &= hold.applied == AdaptCase::Hold && hold.power_w == a.power_w;
    ++steps;
  }
  const auto up = adapt_link(table, mcs, power_for_snr(table[mcs].snr_threshold, g, n), g, n,
                             mcs_rate_bps(table[mcs + 2], p, rbs), rbs, p);
  ok &= up.applied == AdaptCase::RaiseMcs && up.mcs_index > mcs && up.power_w > power_for_snr(table[mcs].snr_threshold, g, n);
  return {ok, std::to_string(steps) + " staircase steps"};
}

Outcome rb_and_power(const IabRuns& runs) {
  std::size_t rb = 0, cap = 0, ticks = 0;
  for (const auto* set : {&runs.adaptive, &runs.fixed}) {
    for (const auto& r : *set) {
      rb += r.violations.rb_budget;
      cap += r.violations.power_cap;
      ticks += r.horizon * r.dus.size();
    }
  }
  const auto stair = staircase();
  return {rb == 0 && cap == 0 && stair.pass,
          std::to_string(ticks) + " DU-ticks; rb violations=" + std::to_string(rb) + " cap violations=" +
              std::to_string(cap) + "; " + stair.detail};
}

Outcome adaptive_vs_fixed(const IabRuns& runs) {
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < runs.adaptive.size(); ++i) {
    const auto& a = runs.adaptive[i];
    const auto& f = runs.fixed[i];
    std::size_t ua = 0, uf = 0;
    double offered_a = 0.0, offered_f = 0.0;
    for (const auto& d : a.dus) {
      ua += d.unserved_terminal_ticks;
      offered_a += d.offered_bits;
    }
    for (const auto& d : f.dus) {
      uf += d.unserved_terminal_ticks;
      offered_f += d.offered_bits;
    }
    ok &= a.iab_energy_j <= f.iab_energy_j && ua <= uf && offered_a == offered_f;
    detail += "seed" + std::to_string(a.seed) + fmt(" adaptive=%.1f J", a.iab_energy_j) + fmt(" fixed=%.1f J", f.iab_energy_j) +
              " unserved " + std::to_string(ua) + "/" + std::to_string(uf) + "; ";
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "fwa_acceptance_determinism";
  fs::remove_all(base);
  std::vector<fs::path> dirs{base / "a", base / "b"};
  for (const auto& dir : dirs) {
    std::ostringstream out, err;
    const int code = run_cli({"simulate", "--scenario", "rural_montreal", "--trace", "bundled", "--policy", "proposed",
                              "--seed", "7", "--horizon", "1800", "--out", dir.string(), "--set",
                              "sim.allocation_log=true", "--set", "sim.sync_log=true"},
                             out, err);
    if (code != 0) return {false, "simulate exited " + std::to_string(code) + ": " + err.str()};
  }
  std::size_t files = 0, same = 0;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    ++files;
    same += slurp(e.path()) == slurp(dirs[1] / e.path().filename());
  }
  fs::remove_all(base);
  return {files >= 5 && same == files, std::to_string(same) + "/" + std::to_string(files) + " files byte-identical"};
}

}  // namespace

int main() {
  const auto sc = bundled_scenario();
  const auto trace = bundled_trace();
  const auto capacity = head_capacity(sc);

  criterion(1, "numerology anchor", numerology_anchor);
  criterion(2, "formula fixtures", formula_fixtures);
  criterion(3, "baseline 1 closed form", [&] {
    return baseline1_closed_form(sc, to_demand(trace, 12000.0, site_mapping(sc)));
  });

  WeekRuns week;
  std::string week_error;
  try {
    week = week_runs(sc, trace);
  } catch (const std::exception& e) {
    week_error = e.what();
  }
  criterion(4, "energy ordering", [&]() -> Outcome {
    if (!week_error.empty()) return {false, week_error};
    return energy_ordering(week);
  });
  criterion(5, "demand satisfaction", [&]() -> Outcome {
    if (!week_error.empty()) return {false, week_error};
    return satisfaction_check(week, capacity);
  });
  criterion(6, "weak duality audit", weak_duality);
  criterion(7, "brute-force oracle equivalence", brute_force_equivalence);
  criterion(8, "fsm invariant suite", fsm_suite);

  IabRuns iab;
  std::string iab_error;
  try {
    iab = iab_runs(sc, trace);
  } catch (const std::exception& e) {
    iab_error = e.what();
  }
  criterion(9, "rb conservation and power caps", [&]() -> Outcome {
    if (!iab_error.empty()) return {false, iab_error};
    return rb_and_power(iab);
  });
  criterion(10, "adaptive vs fixed iab", [&]() -> Outcome {
    if (!iab_error.empty()) return {false, iab_error};
    return adaptive_vs_fixed(iab);
  });
  criterion(11, "determinism", determinism);

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
