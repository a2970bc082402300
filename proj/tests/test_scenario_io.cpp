#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "fwa/error.hpp"
#include "fwa/scenario_io.hpp"
#include "helpers.hpp"

using namespace fwa;

namespace {

const char* kMinimal = R"([scenario]
name = tiny

[nodes]
node id=a

[radios]
radio id=a.r1 node=a band_ghz=42 bandwidth_hz=500e6 distance_m=29600 gain_tx_dbi=40 gain_rx_dbi=40 noise_w=1.8e-9
)";

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in, "test.scn");
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST(ScenarioIoTest, BundledScenarioShape) {
  const auto sc = test::bundled();
  EXPECT_EQ(sc.nodes.size(), 2u);
  EXPECT_EQ(sc.dus.size(), 8u);
  std::size_t cpes = 0, mts = 0;
  double dmin = 1e18, dmax = 0;
  for (const auto& t : sc.terminals) {
    if (t.kind == TerminalKind::Cpe) {
      ++cpes;
      dmin = std::min(dmin, t.distance_m);
      dmax = std::max(dmax, t.distance_m);
    } else {
      ++mts;
    }
  }
  EXPECT_EQ(cpes, 25u);
  EXPECT_EQ(mts, 7u);
  EXPECT_DOUBLE_EQ(dmin, 300.0);
  EXPECT_DOUBLE_EQ(dmax, 6100.0);
  for (const auto& n : sc.nodes) {
    ASSERT_EQ(n.radios.size(), 2u);
    for (const auto& r : n.radios) {
      EXPECT_DOUBLE_EQ(r.distance_m, 29600.0);
      EXPECT_GT(r.capacity_bps, 0.0);
    }
    EXPECT_DOUBLE_EQ(n.radios[0].band_ghz, 42.0);
    EXPECT_DOUBLE_EQ(n.radios[0].bandwidth_hz, 500e6);
    EXPECT_DOUBLE_EQ(n.radios[1].band_ghz, 7.0);
    EXPECT_DOUBLE_EQ(n.radios[1].bandwidth_hz, 64e6);
  }
  for (const auto& d : sc.dus) {
    EXPECT_DOUBLE_EQ(d.mmwave_band_ghz, 38.0);
    EXPECT_DOUBLE_EQ(d.mid_band_ghz, 6.0);
  }
}

TEST(ScenarioIoTest, SiteSharesSumToOne) {
  const auto sc = test::bundled();
  std::map<std::string, double> sum;
  for (const auto& t : sc.terminals) {
    if (t.kind == TerminalKind::Cpe) sum[t.site_id] += t.share;
  }
  for (const auto& [site, s] : sum) EXPECT_NEAR(s, 1.0, 1e-12) << site;
}

TEST(ScenarioIoTest, MinimalDefaults) {
  const auto sc = parse(kMinimal);
  ASSERT_EQ(sc.nodes.size(), 1u);
  const auto& r = sc.nodes[0].radios[0];
  EXPECT_EQ(r.power, PowerProfile{});
  EXPECT_DOUBLE_EQ(r.startup_duration_s, 60.0);
  EXPECT_DOUBLE_EQ(r.wakeup_duration_s, 10.0);
  EXPECT_EQ(r.state, RadioState::Serving);
  EXPECT_EQ(sc.nodes[0].thresholds, sc.controller.thresholds);
}

TEST(ScenarioIoTest, ZeroRadioNodeRejected) {
  const std::string text = "[nodes]\nnode id=a\nnode id=b\n[radios]\n"
                           "radio id=r node=a band_ghz=7 bandwidth_hz=64e6 distance_m=100 noise_w=1e-9\n";
  try {
    parse(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("must have >=1 radio"), std::string::npos) << e.what();
  }
}

TEST(ScenarioIoTest, NonzeroCompletelyOffPowerRejected) {
  const auto text = replace(kMinimal, "noise_w=1.8e-9", "noise_w=1.8e-9 power_w=3,3,55,50,80");
  EXPECT_THROW(parse(text), ValidationError);
}

TEST(ScenarioIoTest, NonpositiveTimerRejected) {
  EXPECT_THROW(parse(replace(kMinimal, "noise_w=1.8e-9", "noise_w=1.8e-9 startup_s=0")), ValidationError);
  EXPECT_THROW(parse(replace(kMinimal, "noise_w=1.8e-9", "noise_w=1.8e-9 power_w=0,90,55,50,80")), ValidationError);
}

TEST(ScenarioIoTest, DanglingReferencesRejected) {
  EXPECT_THROW(parse(replace(kMinimal, "node id=a", "node id=a downstream=zz")), ValidationError);
  EXPECT_THROW(parse(replace(kMinimal, "node=a", "node=q")), ValidationError);
  const std::string iab = std::string(kMinimal) +
                          "[dus]\ndu id=d0 kind=donor\n[terminals]\ncpe id=c1 du=nope distance_m=100 site=S01\n";
  EXPECT_THROW(parse(iab), ValidationError);
}

TEST(ScenarioIoTest, IabNodeNeedsBackhaul) {
  const std::string text = std::string(kMinimal) + "[dus]\ndu id=d0 kind=donor\ndu id=n1 kind=node phi=0.8\n";
  EXPECT_THROW(parse(text), ValidationError);
  const std::string ok = text + "[terminals]\nmt id=m1 du=d0 distance_m=2000 serves=n1\n";
  EXPECT_NO_THROW(parse(ok));
}

TEST(ScenarioIoTest, ParseErrorsCarryLineNumbers) {
  try {
    parse(replace(kMinimal, "band_ghz=42", "band_ghz=forty"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 8u);
    EXPECT_NE(std::string(e.what()).find("band_ghz"), std::string::npos);
  }
  try {
    parse(replace(kMinimal, "[nodes]", "[nodez]"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW(parse(replace(kMinimal, "noise_w=1.8e-9", "noise_w=1.8e-9 colour=blue")), ParseError);
  EXPECT_THROW(parse(replace(kMinimal, "noise_w=1.8e-9", "noise_w=1.8e-9 noise_w=2")), ParseError);
}

TEST(ScenarioIoTest, WakeAboveSleepThresholdRejected) {
  const std::string text = replace(kMinimal, "[nodes]", "[thresholds]\nsleep_threshold_bps = 1e8\nwake_threshold_bps = 2e8\n\n[nodes]");
  EXPECT_THROW(parse(text), ValidationError);
}

TEST(ScenarioIoTest, NodeThresholdOverride) {
  const auto sc = parse(replace(kMinimal, "node id=a", "node id=a sleep_threshold_bps=5e8"));
  EXPECT_EQ(sc.nodes[0].thresholds.sleep_threshold_bps, 5e8);
  EXPECT_FALSE(sc.controller.thresholds.sleep_threshold_bps.has_value());
  const auto again = parse(serialize_scenario(sc));
  EXPECT_EQ(again, sc);
}

TEST(ScenarioIoTest, BundledRoundTrip) {
  const auto sc = test::bundled();
  const auto text = serialize_scenario(sc);
  const auto again = parse(text);
  EXPECT_EQ(again, sc);
  EXPECT_EQ(serialize_scenario(again), text);
}

TEST(ScenarioIoTest, RandomizedRoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    auto sc = test::bundled();
    for (auto& n : sc.nodes) {
      for (auto& r : n.radios) {
        r.distance_m = 1000.0 + 50000.0 * u(rng);
        r.noise_power_w = 1e-10 * (1.0 + u(rng));
        r.power[RadioState::DeepSleep] = 1.0 + 5.0 * u(rng);
        r.startup_duration_s = 1.0 + 100.0 * u(rng);
      }
    }
    for (auto& d : sc.dus) {
      if (d.kind == DuKind::Node) d.availability.phi = u(rng);
    }
    for (auto& t : sc.terminals) t.distance_m = 100.0 + 6000.0 * u(rng);
    sc.controller.p_fail_startup = u(rng);
    validate_scenario(sc);
    EXPECT_EQ(parse(serialize_scenario(sc)), sc) << trial;
  }
}

TEST(ScenarioIoTest, Overrides) {
  auto sc = test::bundled();
  apply_scenario_override(sc, "controller.p_fail_wakeup", "0.25");
  EXPECT_DOUBLE_EQ(sc.controller.p_fail_wakeup, 0.25);
  apply_scenario_override(sc, "thresholds.sleep_threshold_bps", "4e8");
  for (const auto& n : sc.nodes) EXPECT_EQ(n.thresholds.sleep_threshold_bps, 4e8);
  apply_scenario_override(sc, "radios.wakeup_s", "20");
  for (const auto& n : sc.nodes) {
    for (const auto& r : n.radios) EXPECT_DOUBLE_EQ(r.wakeup_duration_s, 20.0);
  }
  apply_scenario_override(sc, "dus.phi", "0.5");
  for (const auto& d : sc.dus) EXPECT_DOUBLE_EQ(d.availability.phi, d.kind == DuKind::Donor ? 1.0 : 0.5);
  EXPECT_THROW(apply_scenario_override(sc, "controller.bogus", "1"), ValidationError);
  EXPECT_THROW(apply_scenario_override(sc, "nope", "1"), ValidationError);
  EXPECT_THROW(apply_scenario_override(sc, "controller.p_fail_startup", "2"), ValidationError);
  EXPECT_THROW(apply_scenario_override(sc, "controller.p_fail_startup", "abc"), ValidationError);
}

TEST(ScenarioIoTest, MissingScenarioName) {
  EXPECT_THROW(resolve_scenario_path("no_such_scenario"), ValidationError);
  EXPECT_THROW(load_scenario("/nonexistent/file.scn"), ValidationError);
}
