#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fwa/error.hpp"
#include "fwa/iab.hpp"

using namespace fwa;

namespace {

CarrierParams mid_params() { return {1, 4, 8, 1.0, 948.0 / 1024.0, 0.14, 1}; }

DuConfig config(int budget, CarrierParams params = mid_params(), Band band = Band::MidBand) {
  DuConfig c;
  c.band = band;
  c.mu = params.numerology;
  c.rb_budget = budget;
  c.params = params;
  return c;
}

TerminalLink link(const std::string& id, double gain = 1e-10, double noise = 1e-12) {
  TerminalLink l;
  l.terminal_id = id;
  l.gain_mm = gain;
  l.gain_md = gain;
  l.noise_power_w = noise;
  return l;
}

AllocateOptions peak_mcs(double cap = 20.0) {
  AllocateOptions o;
  o.adaptive = false;
  o.fixed_mcs = static_cast<int>(mcs_table().size()) - 1;
  o.power_cap_w = cap;
  return o;
}

}  // namespace

TEST(BandTest, SelectBand) {
  EXPECT_EQ(select_band({0.8, BandState::BothAvailable}), (BandChoice{1, 0}));
  EXPECT_EQ(select_band({0.8, BandState::MidOnly}), (BandChoice{0, 1}));
  for (auto s : {BandState::BothAvailable, BandState::MidOnly}) {
    const auto y = select_band({0.5, s});
    EXPECT_EQ(y.y_mm + y.y_md, 1);
  }
}

TEST(BandTest, FixedAndInitialConfigs) {
  CarrierSettings carrier;
  EXPECT_EQ(fixed_config(Band::MmWave, carrier).rb_budget, 264);
  EXPECT_EQ(fixed_config(Band::MidBand, carrier).rb_budget, 273);
  const auto init = initial_config(Band::MmWave, carrier);
  EXPECT_EQ(init.mu, fr2_numerology().min_numerology());
  for (const auto& e : fr2_numerology().entries_for(init.mu)) EXPECT_LE(e.bandwidth_mhz, init.bandwidth_mhz);
  EXPECT_EQ(init.params.numerology, init.mu);
}

TEST(AllocateTest, TwoTerminalsTwelveRbsEach) {
  const std::vector<TerminalLink> links{link("a"), link("b")};
  const std::vector<double> demand{100e6, 100e6};
  const auto d = allocate(config(264), links, demand, peak_mcs());
  EXPECT_EQ(d.unserved, 0u);
  EXPECT_EQ(d.rbs_used, 24);
  for (const auto& t : d.terminals) {
    EXPECT_TRUE(t.served);
    EXPECT_EQ(t.rbs, 12);
  }
  EXPECT_NEAR(rb_utilization(d), 24.0 / 264.0, 1e-15);
}

TEST(AllocateTest, ZeroDemand) {
  const std::vector<TerminalLink> links{link("a"), link("b")};
  const std::vector<double> demand{0.0, 0.0};
  for (bool adaptive : {true, false}) {
    AllocateOptions o;
    o.adaptive = adaptive;
    const auto d = allocate(config(264), links, demand, o);
    EXPECT_EQ(d.rbs_used, 0);
    EXPECT_EQ(d.total_power_w, 0.0);
    EXPECT_EQ(d.unserved, 0u);
    EXPECT_EQ(rb_utilization(d), 0.0);
  }
}

TEST(AllocateTest, OverflowDropsLargestDemand) {
  const auto p = mid_params();
  const auto& top = mcs_table().back();
  // Demands sized to exactly 50, 100 and 150 RBs at the peak MCS.
  const std::vector<double> demand{mcs_rate_bps(top, p, 150), mcs_rate_bps(top, p, 50), mcs_rate_bps(top, p, 100)};
  const std::vector<TerminalLink> links{link("big"), link("small"), link("mid")};
  const auto d = allocate(config(264), links, demand, peak_mcs());
  EXPECT_EQ(d.unserved, 1u);
  EXPECT_FALSE(d.terminals[0].served);
  EXPECT_TRUE(d.terminals[1].served);
  EXPECT_TRUE(d.terminals[2].served);
  EXPECT_EQ(d.rbs_used, 150);
  EXPECT_LE(d.rbs_used, 264);
}

TEST(AllocateTest, FullBudgetUtilizationOne) {
  const auto p = mid_params();
  const auto& top = mcs_table().back();
  const std::vector<TerminalLink> links{link("a")};
  const std::vector<double> demand{mcs_rate_bps(top, p, 264)};
  const auto d = allocate(config(264), links, demand, peak_mcs());
  EXPECT_DOUBLE_EQ(rb_utilization(d), 1.0);
}

TEST(AllocateTest, RandomInstancesRespectConstraints) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> count(1, 8);
  std::uniform_real_distribution<double> demand(0.0, 1.2e9);
  std::uniform_real_distribution<double> gain_db(-110.0, -80.0);
  std::uniform_real_distribution<double> cap(0.5, 20.0);
  CarrierSettings carrier;
  for (int trial = 0; trial < 400; ++trial) {
    const Band band = trial % 2 ? Band::MmWave : Band::MidBand;
    const auto& table = numerology_for(band);
    const auto entries = table.entries();
    const auto cfg = make_config(band, entries[static_cast<std::size_t>(trial) % entries.size()], carrier);
    const int n = count(rng);
    std::vector<TerminalLink> links;
    std::vector<double> demands;
    for (int v = 0; v < n; ++v) {
      links.push_back(link("t" + std::to_string(v), db_to_linear(gain_db(rng)), 1e-12));
      demands.push_back(trial % 5 == 0 && v == 0 ? 0.0 : demand(rng));
    }
    AllocateOptions opts;
    opts.adaptive = trial % 3 != 0;
    opts.power_cap_w = cap(rng);
    const auto d = allocate(cfg, links, demands, opts);
    EXPECT_LE(d.rbs_used, cfg.rb_budget);
    EXPECT_LE(d.total_power_w, opts.power_cap_w * (1.0 + 1e-12));
    EXPECT_LE(d.served_bps, cfg.capacity_bps() * (1.0 + 1e-12));
    int rbs = 0;
    std::size_t unserved = 0;
    for (std::size_t v = 0; v < links.size(); ++v) {
      const auto& t = d.terminals[v];
      rbs += t.rbs;
      if (!t.served) {
        ++unserved;
        EXPECT_EQ(t.rbs, 0);
        EXPECT_EQ(t.power_w, 0.0);
        continue;
      }
      if (t.demand_bps > 0.0) {
        EXPECT_GE(t.achieved_bps, t.demand_bps * (1.0 - 1e-9)) << trial;
        EXPECT_GE(t.snr, mcs_table()[static_cast<std::size_t>(t.mcs_index)].snr_threshold * (1.0 - 1e-9));
      }
    }
    EXPECT_EQ(rbs, d.rbs_used);
    EXPECT_EQ(unserved, d.unserved);
  }
}

TEST(AllocateTest, AdaptivePicksCheapestFeasibleMcsForOneTerminal) {
  const std::vector<TerminalLink> links{link("a")};
  const auto table = mcs_table();
  for (double dem : {1e6, 50e6, 300e6, 900e6}) {
    const std::vector<double> demand{dem};
    AllocateOptions o;
    const auto cfg = config(273);
    const auto d = allocate(cfg, links, demand, o);
    int oracle = -1;
    for (const auto& e : table) {
      if (rbs_for_mcs(e, cfg.params, dem) <= cfg.rb_budget) {
        oracle = e.index;
        break;
      }
    }
    ASSERT_TRUE(d.terminals[0].served) << dem;
    EXPECT_EQ(d.terminals[0].mcs_index, oracle) << dem;
    EXPECT_NEAR(d.terminals[0].power_w, power_for_snr(table[oracle].snr_threshold, 1e-10, 1e-12), 1e-9);
  }
}

TEST(AllocateTest, PowerCapShedsTerminals) {
  const std::vector<TerminalLink> links{link("near", 1e-10), link("far", 1e-14)};
  const std::vector<double> demand{100e6, 100e6};
  const auto d = allocate(config(273), links, demand, peak_mcs(2.0));
  EXPECT_TRUE(d.power_capped);
  EXPECT_TRUE(d.terminals[0].served);
  EXPECT_FALSE(d.terminals[1].served);
  EXPECT_LE(d.total_power_w, 2.0);
}

TEST(LoadTest, TrafficLoad) {
  EXPECT_DOUBLE_EQ(traffic_load({1, 0}, {80, 100}, {0, 0}), 0.8);
  EXPECT_DOUBLE_EQ(traffic_load({1, 0}, {100, 100}, {5, 9}), 1.0);
  EXPECT_DOUBLE_EQ(traffic_load({0, 1}, {80, 100}, {0, 50}), 0.0);
  EXPECT_THROW(traffic_load({1, 0}, {80, 0}, {0, 100}), LoadUndefined);
}

TEST(LoadTest, TrackerAverages) {
  UtilizationTracker tr(1.0);
  AllocationDecision d;
  d.config = config(264);
  d.rbs_used = 132;
  d.offered_bps = 100;
  d.served_bps = 100;
  tr.record(d);
  d.rbs_used = 66;
  d.offered_bps = 100;
  d.served_bps = 50;
  tr.record(d);
  EXPECT_DOUBLE_EQ(tr.mean_gamma(), 0.375);
  EXPECT_DOUBLE_EQ(tr.mean_rho(), 1.5);
  tr.reset_window();
  EXPECT_EQ(tr.mean_gamma(), 0.0);
}

TEST(BudgetTest, UpdateRbBudget) {
  EXPECT_EQ(update_rb_budget(0.6, 0.8, 264), 184);
  EXPECT_EQ(update_rb_budget(1.0, 1.0, 264), 264);
  EXPECT_EQ(update_rb_budget(0.0, 0.0, 264), 0);
  EXPECT_THROW(update_rb_budget(1.5, 0.0, 264), ValidationError);
}

TEST(BudgetTest, SymmetricInArguments) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_EQ(update_rb_budget(a, b, 273), update_rb_budget(b, a, 273));
  }
}

TEST(BudgetTest, ReselectNumerology) {
  const auto& t = fr1_numerology();
  EXPECT_EQ(reselect_numerology(t, 1, 133, 140).rbs, 162);
  EXPECT_EQ(reselect_numerology(t, 1, 273, 184).rbs, 162);
  EXPECT_EQ(reselect_numerology(t, 1, 273, 0).rbs, 24);
  EXPECT_EQ(reselect_numerology(t, 1, 273, 273).rbs, 273);
  EXPECT_EQ(reselect_numerology(t, 1, 133, 999).rbs, 273);
  EXPECT_THROW(reselect_numerology(t, 4, 10, 20), LookupError);
}

TEST(DmcpTest, SingleTerminalConverges) {
  CarrierSettings carrier;
  DmcpState state{initial_config(Band::MmWave, carrier), initial_config(Band::MidBand, carrier), Band::MmWave};
  const std::vector<TerminalLink> links{link("a")};
  const std::vector<double> demand{200e6};
  const auto res = dmcp_iterate(state, BandState::BothAvailable, links, demand, 0.0, 0.0, {}, carrier);
  EXPECT_TRUE(res.converged);
  EXPECT_FALSE(res.warning);
  EXPECT_LE(res.iterations, 2);
  EXPECT_EQ(res.decision.band, (BandChoice{1, 0}));
  const auto& cfg = res.decision.config;
  int oracle = -1;
  for (const auto& e : mcs_table()) {
    if (rbs_for_mcs(e, cfg.params, demand[0]) <= cfg.rb_budget) {
      oracle = e.index;
      break;
    }
  }
  // No other band/numerology pair reaches a cheaper MCS.
  for (Band b : {Band::MmWave, Band::MidBand}) {
    for (const auto& entry : numerology_for(b).entries()) {
      const auto c = make_config(b, entry, carrier);
      for (const auto& e : mcs_table()) {
        if (rbs_for_mcs(e, c.params, demand[0]) <= c.rb_budget) {
          EXPECT_GE(e.index, oracle);
          break;
        }
      }
    }
  }
  EXPECT_EQ(res.decision.terminals[0].mcs_index, oracle);
}

TEST(DmcpTest, MidOnlyForcesMidBand) {
  CarrierSettings carrier;
  DmcpState state{initial_config(Band::MmWave, carrier), initial_config(Band::MidBand, carrier), Band::MmWave};
  const std::vector<TerminalLink> links{link("a")};
  const std::vector<double> demand{50e6};
  const auto res = dmcp_iterate(state, BandState::MidOnly, links, demand, 0.5, 0.5, {}, carrier);
  EXPECT_EQ(res.decision.band, (BandChoice{0, 1}));
  EXPECT_EQ(state.band, Band::MidBand);
}

TEST(DmcpTest, InfeasibleDemandWarns) {
  CarrierSettings carrier;
  DmcpState state{initial_config(Band::MmWave, carrier), initial_config(Band::MidBand, carrier), Band::MmWave};
  const std::vector<TerminalLink> links{link("a")};
  const std::vector<double> demand{1e12};
  const auto res = dmcp_iterate(state, BandState::BothAvailable, links, demand, 1.0, 1.0, {}, carrier);
  EXPECT_TRUE(res.warning);
  EXPECT_EQ(res.decision.unserved, 1u);
}

TEST(DmcpTest, AnswerTableNonincreasing) {
  CarrierSettings carrier;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> demand(0.0, 2e9);
  std::uniform_real_distribution<double> gain_db(-110.0, -85.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    DmcpState state{initial_config(Band::MmWave, carrier), initial_config(Band::MidBand, carrier), Band::MmWave};
    std::vector<TerminalLink> links;
    std::vector<double> demands;
    for (int v = 0; v < 4; ++v) {
      auto l = link("t" + std::to_string(v), db_to_linear(gain_db(rng)));
      l.gain_md = l.gain_mm * 10.0;
      links.push_back(l);
      demands.push_back(demand(rng) / 4.0);
    }
    const auto res = dmcp_iterate(state, BandState::BothAvailable, links, demands, u(rng), u(rng) * 2.0, {}, carrier);
    for (std::size_t i = 1; i < res.answer_table.size(); ++i) {
      const auto& a = res.answer_table[i - 1];
      const auto& b = res.answer_table[i];
      EXPECT_TRUE(b.unserved < a.unserved || (b.unserved == a.unserved && b.objective_w <= a.objective_w * (1 + 1e-9)))
          << trial << " " << i;
    }
  }
}

TEST(DuAllocatorTest, DisabledModeIsEmpty) {
  IabDu du;
  du.id = "d";
  DuAllocator a(du, CarrierSettings{}, {link("a")}, IabMode::Disabled);
  const std::vector<double> demand{1e8};
  const auto d = a.step(demand, BandState::BothAvailable);
  EXPECT_EQ(d.total_power_w, 0.0);
  EXPECT_TRUE(d.terminals.empty());
}

TEST(DuAllocatorTest, AdaptiveNoMorePowerThanFixed) {
  IabDu du;
  du.id = "d";
  const std::vector<TerminalLink> links{link("a", 1e-11), link("b", 3e-12), link("c", 1e-12)};
  DuAllocator adaptive(du, CarrierSettings{}, links, IabMode::Adaptive);
  DuAllocator fixed(du, CarrierSettings{}, links, IabMode::Fixed);
  const std::vector<double> demand{20e6, 40e6, 10e6};
  for (int t = 0; t < 20; ++t) {
    const auto a = adaptive.step(demand, BandState::BothAvailable);
    const auto f = fixed.step(demand, BandState::BothAvailable);
    EXPECT_LE(a.unserved, f.unserved);
    EXPECT_LE(a.total_power_w, f.total_power_w);
  }
}

TEST(AllocationLogTest, LineFormat) {
  const std::vector<TerminalLink> links{link("a"), link("b")};
  const std::vector<double> demand{100e6, 0.0};
  auto d = allocate(config(264), links, demand, peak_mcs());
  d.du_id = "n3";
  std::ostringstream out;
  write_allocation_log(out, 17, d);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  std::istringstream f(line);
  std::uint64_t tick;
  std::string du, term, band;
  int rbs, mcs;
  double power;
  ASSERT_TRUE(f >> tick >> du >> term >> band >> rbs >> mcs >> power);
  EXPECT_EQ(tick, 17u);
  EXPECT_EQ(du, "n3");
  EXPECT_EQ(term, "a");
  EXPECT_EQ(rbs, 12);
  EXPECT_EQ(mcs, 27);
  EXPECT_NEAR(power, d.terminals[0].power_w, 1e-8 * power);
  std::getline(in, line);
  EXPECT_NE(line.find(" b "), std::string::npos);
}
