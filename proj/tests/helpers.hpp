#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fwa/domain.hpp"
#include "fwa/scenario_io.hpp"

namespace fwa::test {

inline RadioUnit radio(std::string id, double capacity_bps, RadioState state = RadioState::Serving) {
  RadioUnit r;
  r.id = std::move(id);
  r.band_ghz = 7.0;
  r.bandwidth_hz = 64e6;
  r.distance_m = 1000.0;
  r.noise_power_w = 1e-9;
  r.capacity_bps = capacity_bps;
  r.state = state;
  return r;
}

inline MicrowaveNode node(std::string id, std::vector<RadioUnit> radios) {
  MicrowaveNode n;
  n.id = std::move(id);
  n.radios = std::move(radios);
  return n;
}

// 0.6 Gbps "7 GHz" and 2.2 Gbps "42 GHz" radios.
inline MicrowaveNode two_radio_node(RadioState small = RadioState::Serving, RadioState big = RadioState::Serving) {
  return node("n0", {radio("r7", 0.6e9, small), radio("r42", 2.2e9, big)});
}

inline Scenario bundled() { return load_scenario(resolve_scenario_path("rural_montreal")); }

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("fwa_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fwa::test
