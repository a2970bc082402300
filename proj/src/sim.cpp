#include "fwa/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <utility>

#include "fwa/error.hpp"

namespace fwa {

namespace {

using RS = RadioState;
using AK = ActionKind;

double state_power(const MicrowaveNode& node) {
  double w = 0.0;
  for (const auto& r : node.radios) w += r.power[r.state];
  return w;
}

double serving_capacity(const MicrowaveNode& node) {
  double c = 0.0;
  for (const auto& r : node.radios) {
    if (r.state == RS::Serving) c += r.capacity_bps;
  }
  return c;
}

double moisture_power(const MicrowaveNode& node, double moisture_s_per_day) {
  double w = 0.0;
  for (const auto& r : node.radios) {
    if (r.state == RS::DeepSleep) w += r.power[RS::Startup] * moisture_s_per_day / kSecondsPerDay;
  }
  return w;
}

// Baseline 2: only DeepSleep, CompletelyOff and Serving, with direct wakes.
class Baseline2Controller {
 public:
  Baseline2Controller(MicrowaveNode node, Baseline2Settings settings)
      : node_(std::move(node)), settings_(settings), since_change_(node_.radios.size(), std::numeric_limits<double>::infinity()) {
    for (auto& r : node_.radios) {
      if (r.state == RS::Startup || r.state == RS::WakeUp) r.state = RS::Serving;
    }
  }

  const MicrowaveNode& node() const noexcept { return node_; }

  std::vector<FiredTransition> step(double demand_bps, double dt) {
    std::vector<FiredTransition> fired;
    for (auto& s : since_change_) s += dt;
    for (auto& r : node_.radios) r.time_in_state_s += dt;

    for (std::size_t m = 0; m < node_.radios.size(); ++m) {
      auto& r = node_.radios[m];
      if (r.state == RS::DeepSleep && r.time_in_state_s >= node_.thresholds.completely_off_period_s) {
        change(m, AK::GoCompletelyOff, RS::CompletelyOff, fired);
      }
    }

    const double serving = serving_capacity(node_);
    const double util = serving > 0.0 ? demand_bps / serving : std::numeric_limits<double>::infinity();
    std::size_t n_serving = 0;
    for (const auto& r : node_.radios) n_serving += r.state == RS::Serving;

    if (util >= settings_.wake_utilization) {
      low_for_s_ = 0.0;
      std::size_t best = std::string::npos;
      for (std::size_t m = 0; m < node_.radios.size(); ++m) {
        const auto& r = node_.radios[m];
        if (r.state == RS::Serving || !dwell_ok(m)) continue;
        if (best == std::string::npos || r.capacity_bps > node_.radios[best].capacity_bps) best = m;
      }
      if (best != std::string::npos) {
        const auto action = node_.radios[best].state == RS::DeepSleep ? AK::GoWakeUp : AK::GoStartup;
        change(best, action, RS::Serving, fired);
        triggered_ = true;
      }
    } else if (util < settings_.sleep_utilization) {
      low_for_s_ += dt;
      if (low_for_s_ >= settings_.dwell_s && n_serving >= 2) {
        std::size_t best = std::string::npos;
        for (std::size_t m = 0; m < node_.radios.size(); ++m) {
          const auto& r = node_.radios[m];
          if (r.state != RS::Serving || !dwell_ok(m)) continue;
          if (best == std::string::npos || r.capacity_bps < node_.radios[best].capacity_bps) best = m;
        }
        if (best != std::string::npos) {
          change(best, AK::GoDeepSleep, RS::DeepSleep, fired);
          low_for_s_ = 0.0;
        }
      }
    } else {
      low_for_s_ = 0.0;
    }
    return fired;
  }

  bool take_triggered() noexcept { return std::exchange(triggered_, false); }

  // Seconds since the radio's previous change, before the change at this tick.
  const std::vector<double>& last_gaps() const noexcept { return gaps_; }

 private:
  bool dwell_ok(std::size_t m) const noexcept { return since_change_[m] >= settings_.dwell_s; }

  void change(std::size_t m, AK action, RS to, std::vector<FiredTransition>& fired) {
    auto& r = node_.radios[m];
    fired.push_back({m, r.state, action, to});
    gaps_.push_back(since_change_[m]);
    r.state = to;
    r.time_in_state_s = 0.0;
    since_change_[m] = 0.0;
  }

  MicrowaveNode node_;
  Baseline2Settings settings_;
  std::vector<double> since_change_;
  std::vector<double> gaps_;
  double low_for_s_ = 0.0;
  bool triggered_ = false;
};

struct DuRuntime {
  std::size_t index = 0;
  std::unique_ptr<DuAllocator> allocator;
  // Demand sources per terminal: CPE indices into the demand series.
  std::vector<std::vector<std::size_t>> sources;
  BandState band = BandState::BothAvailable;
  std::mt19937_64 rng;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<DuRuntime> build_dus(const Scenario& sc, const DemandSeries& demand, const SimulationConfig& cfg,
                                 IabMode mode) {
  std::vector<DuRuntime> out;
  if (mode == IabMode::Disabled) return out;
  std::map<std::string, std::string> parent_of;
  for (const auto& t : sc.terminals) {
    if (t.kind == TerminalKind::IabMt) parent_of[t.serves_du] = t.parent_du;
  }
  auto in_subtree = [&](std::string du, const std::string& root) {
    while (true) {
      if (du == root) return true;
      auto it = parent_of.find(du);
      if (it == parent_of.end()) return false;
      du = it->second;
    }
  };
  for (std::size_t i = 0; i < sc.dus.size(); ++i) {
    const auto& du = sc.dus[i];
    DuRuntime rt;
    rt.index = i;
    std::vector<TerminalLink> links;
    for (const auto& t : sc.terminals) {
      if (t.parent_du != du.id) continue;
      links.push_back(make_link(t, du));
      std::vector<std::size_t> src;
      if (t.kind == TerminalKind::Cpe) {
        src.push_back(demand.terminal_index(t.id));
      } else {
        for (const auto& c : sc.terminals) {
          if (c.kind == TerminalKind::Cpe && in_subtree(c.parent_du, t.serves_du)) src.push_back(demand.terminal_index(c.id));
        }
      }
      rt.sources.push_back(std::move(src));
    }
    rt.band = du.availability.state;
    rt.rng.seed(derive_seed(cfg.seed, i, 0xB4D));
    rt.allocator = std::make_unique<DuAllocator>(du, sc.carrier, std::move(links), mode);
    out.push_back(std::move(rt));
  }
  return out;
}

void advance_band(DuRuntime& rt, double phi, double dt, double dwell_s) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double draw = u(rt.rng);
  if (rt.band == BandState::BothAvailable) {
    if (draw < (1.0 - phi) * dt / dwell_s) rt.band = BandState::MidOnly;
  } else if (draw < phi * dt / dwell_s) {
    rt.band = BandState::BothAvailable;
  }
}

void validate_config(const SimulationConfig& cfg) {
  if (!(cfg.dt_s > 0.0)) throw ValidationError("dt must be positive");
  if (!(cfg.bucket_fraction > 0.0 && cfg.bucket_fraction <= 1.0)) throw ValidationError("bucket fraction must lie in (0,1]");
  if (!(cfg.band_dwell_s > 0.0)) throw ValidationError("band dwell must be positive");
  if (cfg.infeasible_fraction < 0.0 || cfg.infeasible_fraction > 1.0) throw ValidationError("infeasible fraction must lie in [0,1]");
  if (cfg.monitoring_energy_per_bit_j && *cfg.monitoring_energy_per_bit_j < 0.0) throw ValidationError("monitoring energy must be nonnegative");
  const auto& b2 = cfg.baseline2;
  if (!(b2.dwell_s >= 0.0 && b2.sleep_utilization > 0.0 && b2.sleep_utilization < b2.wake_utilization)) {
    throw ValidationError("baseline 2 thresholds must satisfy 0 < sleep < wake, dwell >= 0");
  }
}

}  // namespace

std::string_view to_string(Policy p) noexcept {
  switch (p) {
    case Policy::Proposed: return "proposed";
    case Policy::Baseline1: return "baseline1";
    case Policy::Baseline2: return "baseline2";
  }
  return "?";
}

std::optional<Policy> parse_policy(std::string_view text) noexcept {
  for (auto p : kAllPolicies) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

IabMode SimulationConfig::effective_iab_mode() const noexcept {
  if (iab_mode) return *iab_mode;
  return policy == Policy::Proposed ? IabMode::Adaptive : IabMode::Fixed;
}

std::vector<SiteMapping> site_mapping(const Scenario& scenario) {
  std::vector<SiteMapping> out;
  for (const auto& t : scenario.terminals) {
    if (t.kind == TerminalKind::Cpe) out.push_back({t.id, t.site_id, t.share});
  }
  return out;
}

MetricsRecord RunReport::record(std::size_t tick) const {
  if (tick >= demand_bps.size()) throw LookupError("tick " + std::to_string(tick) + " not recorded");
  MetricsRecord r;
  r.tick = tick;
  r.demand_bps = demand_bps[tick];
  r.delivered_bps = delivered_bps[tick];
  for (const auto& col : node_power_w) r.node_power_w.push_back(col[tick]);
  for (const auto& col : node_delivered_bps) r.node_delivered_bps.push_back(col[tick]);
  for (const auto& col : du_power_w) r.du_power_w.push_back(col[tick]);
  if (!std::isnan(energy_efficiency[tick])) r.energy_efficiency = energy_efficiency[tick];
  r.satisfied = satisfied[tick] != 0;
  r.in_grace = in_grace[tick] != 0;
  return r;
}

RunReport run(const Scenario& sc, const DemandSeries& demand, const SimulationConfig& cfg) {
  validate_config(cfg);
  const double demand_span_s = static_cast<double>(demand.ticks()) * demand.resolution_s();
  const std::size_t horizon = cfg.horizon ? cfg.horizon : static_cast<std::size_t>(std::floor(demand_span_s / cfg.dt_s));
  if (horizon == 0) throw ValidationError("horizon must be >= 1 tick");
  if (static_cast<double>(horizon) * cfg.dt_s > demand_span_s + 1e-9) {
    throw ValidationError("demand series covers " + std::to_string(demand_span_s) + " s, shorter than the horizon");
  }
  if (demand.terminals() == 0) throw ValidationError("demand series has no terminals");

  const auto order = sc.chain_order();
  const IabMode iab_mode = cfg.effective_iab_mode();
  const double xi = cfg.monitoring_energy_per_bit_j.value_or(sc.controller.monitoring_energy_per_bit_j);
  const double moisture_s = sc.controller.moisture_seconds_per_day;

  RunReport rep;
  rep.policy = cfg.policy;
  rep.iab_mode = iab_mode;
  rep.seed = cfg.seed;
  rep.horizon = horizon;
  rep.dt_s = cfg.dt_s;
  for (std::size_t i : order) rep.node_ids.push_back(sc.nodes[i].id);
  const std::size_t n_nodes = order.size();

  std::vector<NodeController> proposed;
  std::vector<Baseline2Controller> base2;
  std::vector<MicrowaveNode> static_nodes;
  std::vector<MonitoringCost> monitoring;
  for (std::size_t k = 0; k < n_nodes; ++k) {
    const auto& node = sc.nodes[order[k]];
    NodeTotals tot;
    tot.node_id = node.id;
    if (cfg.policy == Policy::Proposed) {
      proposed.emplace_back(node, sc.controller, derive_seed(cfg.seed, k, 0xF5));
      monitoring.push_back(MonitoringCost::for_radios(node.radios.size(), xi));
    } else if (cfg.policy == Policy::Baseline2) {
      base2.emplace_back(node, cfg.baseline2);
    } else {
      MicrowaveNode on = node;
      for (auto& r : on.radios) r.state = RS::Serving;
      static_nodes.push_back(std::move(on));
    }
    rep.nodes.push_back(std::move(tot));
  }
  auto node_at = [&](std::size_t k) -> const MicrowaveNode& {
    if (cfg.policy == Policy::Proposed) return proposed[k].node();
    if (cfg.policy == Policy::Baseline2) return base2[k].node();
    return static_nodes[k];
  };
  for (std::size_t k = 0; k < n_nodes; ++k) {
    for (const auto& r : node_at(k).radios) rep.nodes[k].initial_states.push_back(r.state);
  }

  double all_on_capacity = std::numeric_limits<double>::infinity();
  double grace_ticks_per_trigger = 0.0;
  for (std::size_t k = 0; k < n_nodes; ++k) {
    double c = 0.0;
    for (const auto& r : node_at(k).radios) {
      c += r.capacity_bps;
      grace_ticks_per_trigger = std::max({grace_ticks_per_trigger, r.startup_duration_s, r.wakeup_duration_s});
    }
    all_on_capacity = std::min(all_on_capacity, c);
  }
  const auto grace_len = static_cast<std::size_t>(std::ceil(grace_ticks_per_trigger / cfg.dt_s - 1e-9));

  auto dus = build_dus(sc, demand, cfg, iab_mode);
  for (const auto& rt : dus) {
    rep.du_ids.push_back(sc.dus[rt.index].id);
    rep.dus.push_back({sc.dus[rt.index].id});
  }

  if (cfg.record_ticks) {
    rep.demand_bps.reserve(horizon);
    rep.delivered_bps.reserve(horizon);
    rep.node_power_w.assign(n_nodes, {});
    rep.node_delivered_bps.assign(n_nodes, {});
    for (std::size_t k = 0; k < n_nodes; ++k) {
      rep.node_power_w[k].reserve(horizon);
      rep.node_delivered_bps[k].reserve(horizon);
    }
    rep.du_power_w.assign(dus.size(), {});
    for (auto& col : rep.du_power_w) col.reserve(horizon);
    rep.energy_efficiency.reserve(horizon);
    rep.satisfied.reserve(horizon);
    rep.in_grace.reserve(horizon);
  }

  // Dual targets memoized per demand bucket.
  std::map<std::int64_t, ServingSet> targets;
  double bucket_width = 0.0;
  if (cfg.policy == Policy::Proposed) {
    double c = 0.0;
    for (const auto& r : proposed.front().node().radios) c += r.capacity_bps;
    bucket_width = cfg.bucket_fraction * c;
  }

  std::vector<SyncMessage> last_msg;
  if (cfg.policy == Policy::Proposed) {
    for (std::size_t k = 0; k < n_nodes; ++k) last_msg.push_back(proposed[k].message(0));
  }

  std::size_t grace_until = 0;
  double ee_sum = 0.0;
  std::size_t ee_count = 0;
  std::vector<double> du_demand;

  for (std::size_t t = 0; t < horizon; ++t) {
    const auto di = std::min(demand.ticks() - 1,
                             static_cast<std::size_t>(std::floor(static_cast<double>(t) * cfg.dt_s / demand.resolution_s() + 1e-9)));
    const double D = demand.aggregate(di);
    bool triggered = false;

    std::vector<double> node_power(n_nodes, 0.0);
    if (cfg.policy == Policy::Proposed) {
      const auto bucket = static_cast<std::int64_t>(std::ceil(D / bucket_width - 1e-12));
      auto it = targets.find(bucket);
      ++rep.dual.lookups;
      if (it == targets.end()) {
        const double solve_demand = static_cast<double>(bucket) * bucket_width;
        auto inst = DualInstance::from_node(proposed.front().node(), solve_demand, monitoring.front());
        inst.dt_s = cfg.dt_s;
        auto sol = solve_dual(inst, {}, cfg.solver);
        ++rep.dual.solves;
        if (sol.warning) ++rep.dual.warnings;
        ServingSet target = sol.feasible ? sol.policy : ServingSet(inst.radios.size(), true);
        it = targets.emplace(bucket, std::move(target)).first;
      }
      std::vector<SyncMessage> next_msg(n_nodes);
      for (std::size_t k = 0; k < n_nodes; ++k) {
        auto& ctl = proposed[k];
        const StepResult res = k == 0 ? ctl.step(D, cfg.dt_s, &it->second) : ctl.follow(last_msg[k - 1], cfg.dt_s);
        triggered = triggered || res.triggered;
        for (const auto& f : res.fired) {
          if (!is_whitelisted(f.from, f.action, f.to)) ++rep.violations.whitelist;
          rep.transitions.push_back({t, ctl.node().id, ctl.node().radios[f.radio].id, f.from, f.action, f.to});
          ++rep.nodes[k].transitions;
        }
        if (res.states.count_on() == 0) ++rep.violations.on_floor;
        next_msg[k] = ctl.message(t);
        if (cfg.sync_log) *cfg.sync_log << next_msg[k].to_line() << '\n';
      }
      last_msg = std::move(next_msg);
    } else if (cfg.policy == Policy::Baseline2) {
      for (std::size_t k = 0; k < n_nodes; ++k) {
        auto& ctl = base2[k];
        const std::size_t gaps_before = ctl.last_gaps().size();
        const auto fired = ctl.step(D, cfg.dt_s);
        triggered = ctl.take_triggered() || triggered;
        for (std::size_t g = gaps_before; g < ctl.last_gaps().size(); ++g) {
          const double gap = ctl.last_gaps()[g];
          if (std::isfinite(gap) && gap < cfg.baseline2.dwell_s && fired[g - gaps_before].action != AK::GoCompletelyOff) {
            ++rep.violations.dwell;
          }
        }
        for (const auto& f : fired) {
          rep.transitions.push_back({t, ctl.node().id, ctl.node().radios[f.radio].id, f.from, f.action, f.to});
          ++rep.nodes[k].transitions;
        }
        std::size_t on = 0;
        for (const auto& r : ctl.node().radios) on += is_on(r.state);
        if (on == 0) ++rep.violations.on_floor;
      }
    }

    if (triggered) grace_until = std::max(grace_until, t + grace_len);
    const bool in_grace = t < grace_until;

    double delivered = D;
    for (std::size_t k = 0; k < n_nodes; ++k) {
      const auto& node = node_at(k);
      const double state_w = state_power(node);
      const double moist_w = cfg.policy == Policy::Baseline1 ? 0.0 : moisture_power(node, moisture_s);
      const double mon_w = cfg.policy == Policy::Proposed ? monitoring[k].energy_j() / cfg.dt_s : 0.0;
      node_power[k] = state_w + moist_w + mon_w;
      auto& tot = rep.nodes[k];
      tot.state_energy_j += state_w * cfg.dt_s;
      tot.moisture_energy_j += moist_w * cfg.dt_s;
      tot.monitoring_energy_j += mon_w * cfg.dt_s;
      const double cap = serving_capacity(node);
      delivered = std::min(delivered, cap);
      if (cfg.record_ticks) {
        rep.node_power_w[k].push_back(node_power[k]);
        rep.node_delivered_bps[k].push_back(std::min(D, cap));
      }
    }

    double du_total_w = 0.0;
    for (std::size_t j = 0; j < dus.size(); ++j) {
      auto& rt = dus[j];
      const auto& du = sc.dus[rt.index];
      advance_band(rt, du.availability.phi, cfg.dt_s, cfg.band_dwell_s);
      du_demand.assign(rt.sources.size(), 0.0);
      for (std::size_t v = 0; v < rt.sources.size(); ++v) {
        for (std::size_t c : rt.sources[v]) du_demand[v] += demand.terminal(c, di);
      }
      const auto dec = rt.allocator->step(du_demand, rt.band);
      if (cfg.allocation_log) write_allocation_log(*cfg.allocation_log, t, dec);
      if (dec.rbs_used > dec.config.rb_budget) ++rep.violations.rb_budget;
      if (dec.total_power_w > du.power_cap_w * (1.0 + 1e-12)) ++rep.violations.power_cap;
      auto& tot = rep.dus[j];
      tot.energy_j += dec.total_power_w * cfg.dt_s;
      tot.offered_bits += dec.offered_bps * cfg.dt_s;
      tot.served_bits += dec.served_bps * cfg.dt_s;
      tot.unserved_terminal_ticks += dec.unserved;
      tot.mid_only_ticks += rt.band == BandState::MidOnly;
      if (iab_mode == IabMode::Adaptive && rt.allocator->last_dmcp().warning) ++tot.dmcp_warnings;
      du_total_w += dec.total_power_w;
      if (cfg.record_ticks) rep.du_power_w[j].push_back(dec.total_power_w);
    }

    const double total_w = std::accumulate(node_power.begin(), node_power.end(), 0.0) + du_total_w;
    const bool ok = delivered >= D;
    if (D > all_on_capacity) ++rep.infeasible_ticks;
    rep.satisfied_ticks += ok;
    if (in_grace) {
      ++rep.grace_ticks;
    } else {
      rep.satisfied_outside_grace += ok;
    }
    rep.delivered_bits += delivered * cfg.dt_s;
    double ee = std::numeric_limits<double>::quiet_NaN();
    if (total_w > 0.0) {
      ee = delivered / total_w;
      ee_sum += ee;
      ++ee_count;
    }
    if (cfg.record_ticks) {
      rep.demand_bps.push_back(D);
      rep.delivered_bps.push_back(delivered);
      rep.energy_efficiency.push_back(ee);
      rep.satisfied.push_back(ok);
      rep.in_grace.push_back(in_grace);
    }
  }

  for (std::size_t k = 0; k < n_nodes; ++k) {
    auto& tot = rep.nodes[k];
    tot.energy_j = tot.state_energy_j + tot.moisture_energy_j + tot.monitoring_energy_j;
    for (const auto& r : node_at(k).radios) tot.final_states.push_back(r.state);
    rep.microwave_energy_j += tot.energy_j;
  }
  rep.headline_energy_j = rep.nodes.front().energy_j;
  for (const auto& d : rep.dus) rep.iab_energy_j += d.energy_j;
  rep.total_energy_j = rep.microwave_energy_j + rep.iab_energy_j;
  rep.mean_energy_efficiency = ee_count ? ee_sum / static_cast<double>(ee_count) : 0.0;
  rep.satisfaction_raw = static_cast<double>(rep.satisfied_ticks) / static_cast<double>(horizon);
  const std::size_t outside = horizon - rep.grace_ticks;
  rep.satisfaction_grace = outside ? static_cast<double>(rep.satisfied_outside_grace) / static_cast<double>(outside) : 1.0;
  rep.infeasible = static_cast<double>(rep.infeasible_ticks) > cfg.infeasible_fraction * static_cast<double>(horizon);
  return rep;
}

std::vector<RunReport> run_all(const Scenario& scenario, const DemandSeries& demand, const SimulationConfig& config) {
  std::vector<std::future<RunReport>> futures;
  for (auto p : kAllPolicies) {
    SimulationConfig c = config;
    c.policy = p;
    futures.push_back(std::async(std::launch::async, [&scenario, &demand, c] { return run(scenario, demand, c); }));
  }
  std::vector<RunReport> out;
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

Satisfaction satisfaction(const RunReport& report) noexcept { return {report.satisfaction_raw, report.satisfaction_grace}; }

ComparisonTable compare(std::span<const RunReport> reports) {
  if (reports.empty()) throw ValidationError("nothing to compare");
  const RunReport* b1 = nullptr;
  for (const auto& r : reports) {
    if (r.horizon != reports.front().horizon || r.dt_s != reports.front().dt_s) throw ValidationError("reports have mismatched horizons");
    if (r.policy == Policy::Baseline1) b1 = &r;
  }
  if (!b1) throw ValidationError("comparison needs a Baseline 1 report");
  ComparisonTable table;
  table.horizon = reports.front().horizon;
  for (const auto& r : reports) {
    ComparisonRow row;
    row.policy = r.policy;
    row.headline_energy_j = r.headline_energy_j;
    row.microwave_energy_j = r.microwave_energy_j;
    row.iab_energy_j = r.iab_energy_j;
    row.saving_vs_baseline1_j = b1->headline_energy_j - r.headline_energy_j;
    row.saving_fraction = b1->headline_energy_j > 0.0 ? row.saving_vs_baseline1_j / b1->headline_energy_j : 0.0;
    row.mean_energy_efficiency = r.mean_energy_efficiency;
    row.satisfaction_raw = r.satisfaction_raw;
    row.satisfaction_grace = r.satisfaction_grace;
    table.rows.push_back(row);
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) { return a.headline_energy_j < b.headline_energy_j; });
  return table;
}

std::vector<double> replay_state_energy(const Scenario& scenario, const RunReport& report) {
  std::vector<double> out;
  for (std::size_t k = 0; k < report.nodes.size(); ++k) {
    const auto* node = scenario.find_node(report.node_ids[k]);
    if (!node) throw LookupError("node '" + report.node_ids[k] + "' not in scenario");
    std::vector<RadioState> states = report.nodes[k].initial_states;
    std::map<std::string, std::size_t> index;
    for (std::size_t m = 0; m < node->radios.size(); ++m) index[node->radios[m].id] = m;
    std::vector<const TransitionRecord*> log;
    for (const auto& tr : report.transitions) {
      if (tr.node_id == node->id) log.push_back(&tr);
    }
    double e = 0.0;
    std::size_t next = 0;
    for (std::size_t t = 0; t < report.horizon; ++t) {
      for (; next < log.size() && log[next]->tick == t; ++next) {
        const auto m = index.at(log[next]->radio_id);
        if (states[m] != log[next]->from) throw ValidationError("transition log is inconsistent at tick " + std::to_string(t));
        states[m] = log[next]->to;
      }
      double w = 0.0;
      for (std::size_t m = 0; m < states.size(); ++m) w += node->radios[m].power[states[m]];
      e += w * report.dt_s;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace fwa
