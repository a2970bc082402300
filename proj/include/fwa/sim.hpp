#pragma once

// Discrete-time closed loop: demand -> microwave policy (+ sync) -> IAB
// allocation per DU -> metrics. Proposed, Baseline 1 (always on) and
// Baseline 2 (utilization trigger with dwell) policies.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fwa/domain.hpp"
#include "fwa/dual.hpp"
#include "fwa/fsm.hpp"
#include "fwa/iab.hpp"
#include "fwa/traffic.hpp"

namespace fwa {

enum class Policy { Proposed, Baseline1, Baseline2 };
std::string_view to_string(Policy p) noexcept;
std::optional<Policy> parse_policy(std::string_view text) noexcept;
inline constexpr std::array<Policy, 3> kAllPolicies{Policy::Proposed, Policy::Baseline1, Policy::Baseline2};

struct Baseline2Settings {
  double wake_utilization = 0.9;
  double sleep_utilization = 0.45;
  double dwell_s = 7200.0;
};

struct SimulationConfig {
  Policy policy = Policy::Proposed;
  std::size_t horizon = 0;  // ticks; 0 = whole demand series
  double dt_s = 1.0;
  std::uint64_t seed = 0;
  // Unset: adaptive for Proposed, fixed for the baselines.
  std::optional<IabMode> iab_mode;
  // Unset: the scenario's monitoring energy per bit.
  std::optional<double> monitoring_energy_per_bit_j;
  // Dual targets are memoized per demand bucket of this fraction of the head
  // node's all-on capacity.
  double bucket_fraction = 0.01;
  SolverOptions solver;
  Baseline2Settings baseline2;
  double band_dwell_s = 600.0;
  // Fraction of infeasible ticks above which the run is flagged.
  double infeasible_fraction = 0.0;
  bool record_ticks = true;
  // Optional line-delimited logs (not shared between concurrent runs).
  std::ostream* allocation_log = nullptr;
  std::ostream* sync_log = nullptr;

  IabMode effective_iab_mode() const noexcept;
};

// CPE terminals in scenario order, as demand mappings.
std::vector<SiteMapping> site_mapping(const Scenario& scenario);

struct MetricsRecord {
  std::uint64_t tick = 0;
  double demand_bps = 0.0;
  double delivered_bps = 0.0;
  std::vector<double> node_power_w;
  std::vector<double> node_delivered_bps;
  std::vector<double> du_power_w;
  // Absent when total power is 0.
  std::optional<double> energy_efficiency;
  bool satisfied = false;
  bool in_grace = false;
};

struct TransitionRecord {
  std::uint64_t tick = 0;
  std::string node_id;
  std::string radio_id;
  RadioState from = RadioState::Serving;
  ActionKind action = ActionKind::StayServing;
  RadioState to = RadioState::Serving;

  friend bool operator==(const TransitionRecord&, const TransitionRecord&) = default;
};

struct NodeTotals {
  std::string node_id;
  std::vector<RadioState> initial_states;
  std::vector<RadioState> final_states;
  double energy_j = 0.0;
  double state_energy_j = 0.0;
  double moisture_energy_j = 0.0;
  double monitoring_energy_j = 0.0;
  std::size_t transitions = 0;
};

struct DuTotals {
  std::string du_id;
  double energy_j = 0.0;  // sum of terminal transmit power x dt
  double offered_bits = 0.0;
  double served_bits = 0.0;
  std::size_t unserved_terminal_ticks = 0;
  std::size_t mid_only_ticks = 0;
  std::size_t dmcp_warnings = 0;
};

struct InvariantCounters {
  std::size_t on_floor = 0;
  std::size_t whitelist = 0;
  std::size_t rb_budget = 0;
  std::size_t power_cap = 0;
  std::size_t dwell = 0;

  std::size_t total() const noexcept { return on_floor + whitelist + rb_budget + power_cap + dwell; }
};

struct DualStats {
  std::size_t solves = 0;
  std::size_t lookups = 0;
  std::size_t warnings = 0;
};

struct RunReport {
  Policy policy = Policy::Proposed;
  IabMode iab_mode = IabMode::Adaptive;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  double dt_s = 1.0;
  std::vector<std::string> node_ids;
  std::vector<std::string> du_ids;

  // Per-tick columns (empty unless record_ticks). Node/DU columns are
  // indexed [node][tick] and [du][tick].
  std::vector<double> demand_bps;
  std::vector<double> delivered_bps;
  std::vector<std::vector<double>> node_power_w;
  std::vector<std::vector<double>> node_delivered_bps;
  std::vector<std::vector<double>> du_power_w;
  std::vector<double> energy_efficiency;  // NaN where undefined
  std::vector<std::uint8_t> satisfied;
  std::vector<std::uint8_t> in_grace;

  std::vector<TransitionRecord> transitions;
  std::vector<NodeTotals> nodes;
  std::vector<DuTotals> dus;

  double headline_energy_j = 0.0;  // head microwave node
  double microwave_energy_j = 0.0;
  double iab_energy_j = 0.0;
  double total_energy_j = 0.0;
  double delivered_bits = 0.0;
  double mean_energy_efficiency = 0.0;

  std::size_t satisfied_ticks = 0;
  std::size_t grace_ticks = 0;
  std::size_t satisfied_outside_grace = 0;
  double satisfaction_raw = 1.0;
  double satisfaction_grace = 1.0;
  std::size_t infeasible_ticks = 0;
  bool infeasible = false;

  InvariantCounters violations;
  DualStats dual;

  bool has_ticks() const noexcept { return !demand_bps.empty(); }
  MetricsRecord record(std::size_t tick) const;
};

// Throws ValidationError on an invalid config or a demand series shorter
// than the horizon.
RunReport run(const Scenario& scenario, const DemandSeries& demand, const SimulationConfig& config);

// Runs every policy (concurrently) with otherwise identical configs.
std::vector<RunReport> run_all(const Scenario& scenario, const DemandSeries& demand, const SimulationConfig& config);

struct Satisfaction {
  double raw = 1.0;
  double grace_excluded = 1.0;
};

Satisfaction satisfaction(const RunReport& report) noexcept;

struct ComparisonRow {
  Policy policy = Policy::Proposed;
  double headline_energy_j = 0.0;
  double microwave_energy_j = 0.0;
  double iab_energy_j = 0.0;
  double saving_vs_baseline1_j = 0.0;
  double saving_fraction = 0.0;
  double mean_energy_efficiency = 0.0;
  double satisfaction_raw = 1.0;
  double satisfaction_grace = 1.0;
};

struct ComparisonTable {
  std::size_t horizon = 0;
  std::vector<ComparisonRow> rows;  // ascending headline energy
};

// Throws ValidationError on mismatched horizons or a missing Baseline 1.
ComparisonTable compare(std::span<const RunReport> reports);

// Replays the transition log from the initial states and recomputes the
// state energy per node (J).
std::vector<double> replay_state_energy(const Scenario& scenario, const RunReport& report);

}  // namespace fwa
