#pragma once

// Core domain types shared by every module: radio states, microwave radios
// and nodes, IAB stations (DUs), terminals and carrier parameters.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fwa {

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kSecondsPerWeek = 7.0 * kSecondsPerDay;

// Controller sub-states of a microwave radio. CompletelyOff and DeepSleep are
// the physical OFF state, the other three are physical ON.
enum class RadioState : std::uint8_t { CompletelyOff, DeepSleep, Startup, WakeUp, Serving };

inline constexpr std::size_t kRadioStateCount = 5;
inline constexpr std::array<RadioState, kRadioStateCount> kAllRadioStates{
    RadioState::CompletelyOff, RadioState::DeepSleep, RadioState::Startup, RadioState::WakeUp,
    RadioState::Serving};

constexpr std::size_t index_of(RadioState s) noexcept { return static_cast<std::size_t>(s); }

constexpr bool is_on(RadioState s) noexcept {
  return s == RadioState::Startup || s == RadioState::WakeUp || s == RadioState::Serving;
}

std::string_view to_string(RadioState s) noexcept;
std::optional<RadioState> parse_radio_state(std::string_view text) noexcept;

// Watts drawn in each sub-state, indexed by RadioState.
struct PowerProfile {
  std::array<double, kRadioStateCount> watts{0.0, 3.0, 55.0, 50.0, 80.0};

  double operator[](RadioState s) const noexcept { return watts[index_of(s)]; }
  double& operator[](RadioState s) noexcept { return watts[index_of(s)]; }

  friend bool operator==(const PowerProfile&, const PowerProfile&) = default;
};

// One long-haul microwave radio. The link fields (distance, antenna gains,
// noise) feed the Shannon capacity; `capacity_bps` is derived at load time.
struct RadioUnit {
  std::string id;
  double band_ghz = 0.0;
  double bandwidth_hz = 0.0;
  PowerProfile power;
  double tx_power_w = 1.0;
  double tx_power_cap_w = 2.0;
  double startup_duration_s = 60.0;
  double wakeup_duration_s = 10.0;

  double distance_m = 0.0;
  double antenna_gain_tx_dbi = 0.0;
  double antenna_gain_rx_dbi = 0.0;
  double noise_power_w = 0.0;

  RadioState state = RadioState::Serving;
  double time_in_state_s = 0.0;
  double idle_days = 0.0;

  double capacity_bps = 0.0;

  friend bool operator==(const RadioUnit&, const RadioUnit&) = default;
};

struct PolicyThresholds {
  // Unset thresholds resolve per radio: sleep = capacity of the candidate,
  // wake = 10% of the candidate's capacity.
  std::optional<double> sleep_threshold_bps;
  std::optional<double> wake_threshold_bps;
  double completely_off_period_s = kSecondsPerWeek;
  double rb_update_period_ms = 1000.0;

  double sleep_threshold_for(const RadioUnit& candidate) const noexcept;
  double wake_threshold_for(const RadioUnit& candidate) const noexcept;

  friend bool operator==(const PolicyThresholds&, const PolicyThresholds&) = default;
};

// Controller knobs that are not thresholds.
struct ControllerSettings {
  PolicyThresholds thresholds;
  double p_fail_startup = 0.0;
  double p_fail_wakeup = 0.0;
  double moisture_seconds_per_day = 600.0;
  double monitoring_energy_per_bit_j = 5e-8;

  friend bool operator==(const ControllerSettings&, const ControllerSettings&) = default;
};

struct MicrowaveNode {
  std::string id;
  std::vector<RadioUnit> radios;
  std::optional<std::string> upstream_id;
  std::optional<std::string> downstream_id;
  PolicyThresholds thresholds;

  friend bool operator==(const MicrowaveNode&, const MicrowaveNode&) = default;
};

enum class Band : std::uint8_t { MmWave, MidBand };
std::string_view to_string(Band b) noexcept;

enum class BandState : std::uint8_t { BothAvailable, MidOnly };
std::string_view to_string(BandState s) noexcept;

// Two-state availability of the IAB station's access bands.
struct BandAvailability {
  double phi = 1.0;
  BandState state = BandState::BothAvailable;

  std::array<double, 2> state_vector() const noexcept { return {phi, 1.0 - phi}; }

  friend bool operator==(const BandAvailability&, const BandAvailability&) = default;
};

// Rate and RB-demand parameters for one band. `numerology` selects T^u.
struct CarrierParams {
  int num_carriers = 1;
  int layers = 4;
  int modulation_order = 8;
  double scaling = 1.0;
  double max_code_rate = 948.0 / 1024.0;
  double overhead = 0.14;
  int numerology = 1;

  double symbol_duration_s() const noexcept;
  double subcarrier_spacing_hz() const noexcept;

  friend bool operator==(const CarrierParams&, const CarrierParams&) = default;
};

enum class TerminalKind : std::uint8_t { Cpe, IabMt };
std::string_view to_string(TerminalKind k) noexcept;

struct Terminal {
  std::string id;
  TerminalKind kind = TerminalKind::Cpe;
  std::string parent_du;
  double distance_m = 0.0;
  // CPEs draw demand from a traffic site; IAB-MTs carry the demand of the DU
  // they backhaul (`serves_du`).
  std::string site_id;
  double share = 1.0;
  std::string serves_du;
  double noise_power_w = 1e-12;
  double antenna_gain_dbi = 0.0;
  std::optional<double> initial_rb_power_w;

  friend bool operator==(const Terminal&, const Terminal&) = default;
};

enum class DuKind : std::uint8_t { Donor, Node };

struct IabDu {
  std::string id;
  DuKind kind = DuKind::Node;
  BandAvailability availability;
  double power_cap_w = 20.0;
  double mmwave_band_ghz = 38.0;
  double mid_band_ghz = 6.0;
  double mmwave_gain_dbi = 0.0;
  double mid_gain_dbi = 0.0;

  friend bool operator==(const IabDu&, const IabDu&) = default;
};

struct CarrierSettings {
  CarrierParams mmwave{1, 4, 8, 1.0, 948.0 / 1024.0, 0.18, 3};
  CarrierParams mid_band{1, 4, 8, 1.0, 948.0 / 1024.0, 0.14, 1};

  const CarrierParams& for_band(Band b) const noexcept { return b == Band::MmWave ? mmwave : mid_band; }

  friend bool operator==(const CarrierSettings&, const CarrierSettings&) = default;
};

struct Scenario {
  std::string name;
  std::vector<MicrowaveNode> nodes;
  std::vector<IabDu> dus;
  std::vector<Terminal> terminals;
  ControllerSettings controller;
  CarrierSettings carrier;

  const MicrowaveNode* find_node(std::string_view id) const noexcept;
  const IabDu* find_du(std::string_view id) const noexcept;
  std::size_t du_index(std::string_view id) const;
  // Head of the microwave chain (node without an upstream).
  std::size_t head_node_index() const;
  // Chain order from head to tail following downstream links.
  std::vector<std::size_t> chain_order() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

}  // namespace fwa
