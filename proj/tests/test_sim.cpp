#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "fwa/dual.hpp"
#include "fwa/error.hpp"
#include "fwa/scenario_io.hpp"
#include "fwa/sim.hpp"
#include "fwa/traffic.hpp"
#include "helpers.hpp"

using namespace fwa;
using RS = RadioState;

namespace {

DemandSeries bundled_demand(const Scenario& sc) {
  return to_demand(load_trace(data_dir() / "traces" / "bundled_week.csv"), 12000.0, site_mapping(sc));
}

// Every site at the same rate, chosen so the aggregate equals `total_bps`.
DemandSeries flat_demand(const Scenario& sc, double total_bps, std::size_t ticks) {
  auto mapping = site_mapping(sc);
  std::set<std::string> sites;
  for (const auto& m : mapping) sites.insert(m.site_id);
  std::vector<double> rates(sites.size(), total_bps / static_cast<double>(sites.size()));
  return DemandSeries::constant(mapping, rates, ticks);
}

SimulationConfig config(Policy p, std::size_t horizon = 0) {
  SimulationConfig c;
  c.policy = p;
  c.horizon = horizon;
  c.seed = 1;
  c.iab_mode = IabMode::Disabled;
  c.monitoring_energy_per_bit_j = 0.0;
  return c;
}

double all_on_capacity(const Scenario& sc) {
  double c = 0.0;
  for (const auto& r : sc.nodes[sc.head_node_index()].radios) c += r.capacity_bps;
  return c;
}

}  // namespace

TEST(SimTest, PolicyNames) {
  for (auto p : kAllPolicies) EXPECT_EQ(parse_policy(to_string(p)), p);
  EXPECT_FALSE(parse_policy("greedy").has_value());
}

TEST(SimTest, Baseline1WeekClosedForm) {
  const auto sc = test::bundled();
  const auto rep = run(sc, bundled_demand(sc), config(Policy::Baseline1));
  EXPECT_EQ(rep.horizon, 604800u);
  EXPECT_DOUBLE_EQ(rep.headline_energy_j, 2.0 * 80.0 * 604800.0);
  EXPECT_DOUBLE_EQ(rep.headline_energy_j, 96.768e6);
  for (const auto& n : rep.nodes) EXPECT_DOUBLE_EQ(n.energy_j, 96.768e6);
  EXPECT_TRUE(rep.transitions.empty());
  EXPECT_EQ(rep.violations.total(), 0u);
}

TEST(SimTest, ZeroDemandSettlesOnOneRadio) {
  auto sc = test::bundled();
  sc.controller.moisture_seconds_per_day = 0.0;
  const std::size_t horizon = 3600;
  const auto rep = run(sc, flat_demand(sc, 0.0, horizon), config(Policy::Proposed, horizon));
  for (const auto& n : rep.nodes) {
    EXPECT_EQ(std::count(n.final_states.begin(), n.final_states.end(), RS::Serving), 1);
    EXPECT_EQ(std::count(n.final_states.begin(), n.final_states.end(), RS::DeepSleep), 1);
    // At most the first two ticks run both radios.
    EXPECT_GE(n.energy_j, 83.0 * horizon);
    EXPECT_LE(n.energy_j, 83.0 * horizon + 2.0 * 77.0);
  }
  EXPECT_DOUBLE_EQ(rep.satisfaction_raw, 1.0);
}

TEST(SimTest, MoistureChargeForSleepingRadios) {
  const auto sc = test::bundled();
  const std::size_t horizon = 3600;
  const auto rep = run(sc, flat_demand(sc, 0.0, horizon), config(Policy::Proposed, horizon));
  const auto& head = rep.nodes.front();
  const double per_tick = 55.0 * 600.0 / 86400.0;
  EXPECT_NEAR(head.moisture_energy_j, per_tick * (horizon - 1), per_tick * 2);
}

TEST(SimTest, DeterministicForSeed) {
  const auto sc = test::bundled();
  const auto demand = bundled_demand(sc);
  auto cfg = config(Policy::Proposed, 1800);
  cfg.iab_mode = IabMode::Adaptive;
  cfg.seed = 5;
  const auto a = run(sc, demand, cfg);
  const auto b = run(sc, demand, cfg);
  EXPECT_EQ(a.node_power_w, b.node_power_w);
  EXPECT_EQ(a.du_power_w, b.du_power_w);
  EXPECT_EQ(a.transitions, b.transitions);
  EXPECT_EQ(a.total_energy_j, b.total_energy_j);
  EXPECT_EQ(a.violations.total(), 0u);
}

TEST(SimTest, TransitionLogReplaysStateEnergy) {
  const auto sc = test::bundled();
  const auto demand = bundled_demand(sc).scaled(1.5);
  for (auto p : kAllPolicies) {
    const auto rep = run(sc, demand, config(p, 86400));
    const auto replay = replay_state_energy(sc, rep);
    ASSERT_EQ(replay.size(), rep.nodes.size());
    for (std::size_t k = 0; k < replay.size(); ++k) {
      EXPECT_NEAR(replay[k], rep.nodes[k].state_energy_j, 1e-9 * replay[k]) << to_string(p);
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < rep.horizon; ++t) sum += rep.node_power_w[0][t];
    EXPECT_NEAR(sum * rep.dt_s, rep.headline_energy_j, 1e-9 * sum);
    for (const auto& tr : rep.transitions) EXPECT_TRUE(is_whitelisted(tr.from, tr.action, tr.to) || p == Policy::Baseline2);
  }
}

TEST(SimTest, Baseline2RespectsDwellAndStateSubset) {
  const auto sc = test::bundled();
  const auto rep = run(sc, bundled_demand(sc), config(Policy::Baseline2, 2 * 86400));
  EXPECT_EQ(rep.violations.dwell, 0u);
  EXPECT_EQ(rep.violations.on_floor, 0u);
  std::map<std::string, std::uint64_t> last;
  for (const auto& tr : rep.transitions) {
    EXPECT_NE(tr.to, RS::Startup);
    EXPECT_NE(tr.to, RS::WakeUp);
    auto it = last.find(tr.radio_id);
    if (it != last.end()) EXPECT_GE(tr.tick - it->second, 7200u) << tr.radio_id;
    last[tr.radio_id] = tr.tick;
  }
  EXPECT_FALSE(rep.transitions.empty());
}

TEST(SimTest, CompareSemantics) {
  const auto sc = test::bundled();
  const auto demand = bundled_demand(sc);
  const auto reports = run_all(sc, demand, config(Policy::Proposed, 86400));
  const auto table = compare(reports);
  ASSERT_EQ(table.rows.size(), 3u);
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    EXPECT_LE(table.rows[i - 1].headline_energy_j, table.rows[i].headline_energy_j);
  }
  for (const auto& row : table.rows) {
    if (row.policy == Policy::Baseline1) {
      EXPECT_EQ(row.saving_vs_baseline1_j, 0.0);
      EXPECT_EQ(row.saving_fraction, 0.0);
    }
  }
  EXPECT_EQ(table.rows.front().policy, Policy::Proposed);

  std::vector<RunReport> no_b1{reports[0], reports[2]};
  EXPECT_THROW(compare(no_b1), ValidationError);
  auto mismatched = reports;
  mismatched[1].horizon = 10;
  EXPECT_THROW(compare(mismatched), ValidationError);
}

TEST(SimTest, SustainedPeakCostsAtMostMonitoring) {
  const auto sc = test::bundled();
  const double peak = 0.95 * all_on_capacity(sc);
  const std::size_t horizon = 3600;
  const auto demand = flat_demand(sc, peak, horizon);
  auto cfg = config(Policy::Proposed, horizon);
  cfg.monitoring_energy_per_bit_j.reset();
  const auto proposed = run(sc, demand, cfg);
  const auto b1 = run(sc, demand, config(Policy::Baseline1, horizon));
  const auto& n = proposed.nodes.front();
  EXPECT_GT(n.monitoring_energy_j, 0.0);
  EXPECT_LE(proposed.headline_energy_j, b1.headline_energy_j + n.monitoring_energy_j + 1e-6);
  EXPECT_DOUBLE_EQ(proposed.satisfaction_raw, 1.0);
}

TEST(SimTest, InfeasibleDemandIsFlagged) {
  const auto sc = test::bundled();
  const std::size_t horizon = 600;
  const auto rep = run(sc, flat_demand(sc, 1.1 * all_on_capacity(sc), horizon), config(Policy::Proposed, horizon));
  EXPECT_LT(rep.satisfaction_raw, 1.0);
  EXPECT_TRUE(rep.infeasible);
  EXPECT_EQ(rep.infeasible_ticks, horizon);
  EXPECT_EQ(rep.violations.on_floor, 0u);
}

TEST(SimTest, HorizonLongerThanDemandRejected) {
  const auto sc = test::bundled();
  EXPECT_THROW(run(sc, flat_demand(sc, 1e9, 10), config(Policy::Proposed, 11)), ValidationError);
  auto bad = config(Policy::Proposed, 5);
  bad.dt_s = 0.0;
  EXPECT_THROW(run(sc, flat_demand(sc, 1e9, 10), bad), ValidationError);
}

TEST(SimTest, SurrogateMatchesMeasuredAveragePower) {
  auto sc = test::bundled();
  sc.controller.moisture_seconds_per_day = 0.0;
  const auto rep = run(sc, bundled_demand(sc), config(Policy::Proposed, 86400));
  const TransitionMatrix phi(0.0, 0.0);
  for (std::size_t k = 0; k < rep.nodes.size(); ++k) {
    const auto* node = sc.find_node(rep.node_ids[k]);
    std::map<std::string, std::size_t> index;
    std::vector<PowerProfile> profiles;
    for (std::size_t m = 0; m < node->radios.size(); ++m) {
      index[node->radios[m].id] = m;
      profiles.push_back(node->radios[m].power);
    }
    std::vector<RS> states = rep.nodes[k].initial_states;
    std::vector<PolicyTick> trace;
    std::size_t next = 0;
    for (std::size_t t = 0; t < rep.horizon; ++t) {
      for (; next < rep.transitions.size() && rep.transitions[next].tick == t; ++next) {
        const auto& tr = rep.transitions[next];
        if (tr.node_id == node->id) states[index.at(tr.radio_id)] = tr.to;
      }
      trace.push_back({states, {}});
    }
    const double surrogate = surrogate_objective(trace, profiles, phi, {0.0, 0.0}, rep.dt_s);
    double mean = 0.0;
    for (double w : rep.node_power_w[k]) mean += w;
    mean /= static_cast<double>(rep.horizon);
    EXPECT_NEAR(surrogate, mean, 1e-9 * mean) << rep.node_ids[k];
  }
}

TEST(SimTest, AdaptiveIabBeatsFixedWithoutMoreUnserved) {
  const auto sc = test::bundled();
  const auto demand = bundled_demand(sc);
  auto adaptive = config(Policy::Proposed, 900);
  adaptive.iab_mode = IabMode::Adaptive;
  auto fixed = adaptive;
  fixed.iab_mode = IabMode::Fixed;
  const auto a = run(sc, demand, adaptive);
  const auto f = run(sc, demand, fixed);
  std::size_t ua = 0, uf = 0;
  for (const auto& d : a.dus) ua += d.unserved_terminal_ticks;
  for (const auto& d : f.dus) uf += d.unserved_terminal_ticks;
  EXPECT_LE(ua, uf);
  EXPECT_LT(a.iab_energy_j, f.iab_energy_j);
  EXPECT_EQ(a.violations.rb_budget + a.violations.power_cap, 0u);
  EXPECT_EQ(f.violations.rb_budget + f.violations.power_cap, 0u);
}
