#pragma once

// Per-node microwave radio controller: the five sub-state machine, trigger
// signals, timers, failure draws and upstream/downstream synchronization.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fwa/domain.hpp"

namespace fwa {

enum class ActionKind : std::uint8_t {
  GoStartup,
  StayOff,
  StartupFail,
  StartupComplete,
  GoDeepSleep,
  StaySleep,
  StayServing,
  GoWakeUp,
  WakeUpFail,
  WakeUpComplete,
  GoCompletelyOff,
  PowerOn,
  PowerOff,
};

std::string_view to_string(ActionKind a) noexcept;

// Power-switch action that accompanies `a`, if any.
std::optional<ActionKind> companion_action(ActionKind a) noexcept;

struct Transition {
  RadioState from;
  RadioState to;
  ActionKind action;

  friend bool operator==(const Transition&, const Transition&) = default;
};

// Every edge of the state diagram, including self-loops.
std::span<const Transition> transition_whitelist() noexcept;
bool is_whitelisted(RadioState from, ActionKind action, RadioState to) noexcept;

// Successor of a legal (state, action) pair on the success path.
std::optional<RadioState> nominal_target(RadioState from, ActionKind action) noexcept;

// Phi: (state, action) -> distribution over successor states.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  TransitionMatrix(double p_fail_startup, double p_fail_wakeup);

  // Zero row when the pair is not an edge of the diagram.
  std::array<double, kRadioStateCount> row(RadioState from, ActionKind action) const noexcept;
  bool defined(RadioState from, ActionKind action) const noexcept;

  double p_fail_startup() const noexcept { return p_fail_startup_; }
  double p_fail_wakeup() const noexcept { return p_fail_wakeup_; }

 private:
  double p_fail_startup_ = 0.0;
  double p_fail_wakeup_ = 0.0;
};

// One-hot x_{m,k}.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::vector<RadioState> states) : states_(std::move(states)) {}
  static StateVector of(const MicrowaveNode& node);

  std::size_t size() const noexcept { return states_.size(); }
  RadioState operator[](std::size_t m) const { return states_.at(m); }
  int x(std::size_t m, RadioState k) const { return states_.at(m) == k ? 1 : 0; }
  const std::vector<RadioState>& states() const noexcept { return states_; }

  std::size_t count_on() const noexcept;
  std::size_t count_in(RadioState k) const noexcept;

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  std::vector<RadioState> states_;
};

bool check_startup_trigger(double serving_capacity_bps, double demand_bps) noexcept;
double compute_sleep_signal(double serving_capacity_bps, double demand_bps, double sleep_threshold_bps);
double compute_wake_signal(double sleeping_capacity_bps, double demand_bps, double wake_threshold_bps);

struct FiredTransition {
  std::size_t radio = 0;
  RadioState from = RadioState::Serving;
  ActionKind action = ActionKind::StayServing;
  RadioState to = RadioState::Serving;
};

struct StepResult {
  // Last action per radio this tick; nullopt while a timer is running.
  std::vector<std::optional<ActionKind>> actions;
  std::vector<FiredTransition> fired;
  StateVector states;
  double power_w = 0.0;
  // A wake-up or startup was initiated this tick.
  bool triggered = false;
};

// State-sync record exchanged between neighbouring nodes at tick boundaries.
struct SyncMessage {
  std::string node_id;
  std::uint64_t tick = 0;
  std::vector<std::pair<std::string, RadioState>> radios;

  std::string to_line() const;
  static SyncMessage parse(std::string_view line);

  friend bool operator==(const SyncMessage&, const SyncMessage&) = default;
};

// Actions a downstream node must take to mirror the upstream physical states.
// Throws ValidationError on radio-count mismatch.
std::vector<std::pair<std::size_t, ActionKind>> sync_states(const StateVector& upstream,
                                                            const MicrowaveNode& downstream);

class NodeController {
 public:
  NodeController(MicrowaveNode node, const ControllerSettings& settings, std::uint64_t seed);

  const MicrowaveNode& node() const noexcept { return node_; }
  StateVector state_vector() const { return StateVector::of(node_); }
  const TransitionMatrix& matrix() const noexcept { return matrix_; }

  double serving_capacity() const noexcept;
  double pending_capacity() const noexcept;
  double power_w() const noexcept;
  std::size_t count_on() const noexcept;

  // Demand-driven step: timers, ON-floor, wake/startup, then sleep. Radios in
  // `target` (optional serving mask) are never put to sleep and are woken
  // when sleeping.
  StepResult step(double demand_bps, double dt, const std::vector<bool>* target = nullptr);

  // Follower step: timers, ON-floor, then mirror `upstream`.
  StepResult follow(const SyncMessage& upstream, double dt);

  // Externally requested action. Returns false (no change) when the action is
  // illegal from the radio's state or would leave no radio ON.
  bool request(std::size_t radio, ActionKind action);

  SyncMessage message(std::uint64_t tick) const;

 private:
  void begin_tick(double dt);
  void enforce_floor();
  bool apply(std::size_t radio, ActionKind action, bool check_floor = true);
  RadioState draw(RadioState from, ActionKind action);
  StepResult finish();

  MicrowaveNode node_;
  TransitionMatrix matrix_;
  std::mt19937_64 rng_;
  std::vector<FiredTransition> fired_;
  std::vector<std::optional<ActionKind>> last_;
  bool triggered_ = false;
};

}  // namespace fwa
