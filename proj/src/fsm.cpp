#include "fwa/fsm.hpp"

#include <algorithm>
#include <sstream>

#include "fwa/error.hpp"

namespace fwa {

namespace {

using RS = RadioState;
using AK = ActionKind;

constexpr std::array<std::string_view, 13> kActionNames{
    "GoStartup",   "StayOff",    "StartupFail", "StartupComplete", "GoDeepSleep", "StaySleep", "StayServing",
    "GoWakeUp",    "WakeUpFail", "WakeUpComplete", "GoCompletelyOff", "PowerOn",  "PowerOff"};

constexpr std::array<Transition, 11> kWhitelist{{
    {RS::CompletelyOff, RS::Startup, AK::GoStartup},
    {RS::CompletelyOff, RS::CompletelyOff, AK::StayOff},
    {RS::Startup, RS::Serving, AK::StartupComplete},
    {RS::Startup, RS::CompletelyOff, AK::StartupFail},
    {RS::Serving, RS::DeepSleep, AK::GoDeepSleep},
    {RS::Serving, RS::Serving, AK::StayServing},
    {RS::DeepSleep, RS::DeepSleep, AK::StaySleep},
    {RS::DeepSleep, RS::WakeUp, AK::GoWakeUp},
    {RS::WakeUp, RS::Serving, AK::WakeUpComplete},
    {RS::WakeUp, RS::DeepSleep, AK::WakeUpFail},
    {RS::DeepSleep, RS::CompletelyOff, AK::GoCompletelyOff},
}};

std::optional<ActionKind> stay_action(RadioState s) noexcept {
  switch (s) {
    case RS::CompletelyOff: return AK::StayOff;
    case RS::DeepSleep: return AK::StaySleep;
    case RS::Serving: return AK::StayServing;
    default: return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(ActionKind a) noexcept { return kActionNames[static_cast<std::size_t>(a)]; }

std::optional<ActionKind> companion_action(ActionKind a) noexcept {
  switch (a) {
    case AK::GoStartup: return AK::PowerOn;
    case AK::GoDeepSleep:
    case AK::GoCompletelyOff: return AK::PowerOff;
    default: return std::nullopt;
  }
}

std::span<const Transition> transition_whitelist() noexcept { return kWhitelist; }

bool is_whitelisted(RadioState from, ActionKind action, RadioState to) noexcept {
  return std::any_of(kWhitelist.begin(), kWhitelist.end(), [&](const Transition& t) {
    return t.from == from && t.action == action && t.to == to;
  });
}

std::optional<RadioState> nominal_target(RadioState from, ActionKind action) noexcept {
  for (const auto& t : kWhitelist) {
    if (t.from == from && t.action == action) return t.to;
  }
  return std::nullopt;
}

TransitionMatrix::TransitionMatrix(double p_fail_startup, double p_fail_wakeup)
    : p_fail_startup_(p_fail_startup), p_fail_wakeup_(p_fail_wakeup) {
  if (p_fail_startup < 0.0 || p_fail_startup > 1.0 || p_fail_wakeup < 0.0 || p_fail_wakeup > 1.0) {
    throw ValidationError("failure probabilities must lie in [0,1]");
  }
}

bool TransitionMatrix::defined(RadioState from, ActionKind action) const noexcept {
  return nominal_target(from, action).has_value();
}

std::array<double, kRadioStateCount> TransitionMatrix::row(RadioState from, ActionKind action) const noexcept {
  std::array<double, kRadioStateCount> out{};
  const auto to = nominal_target(from, action);
  if (!to) return out;
  if (from == RS::Startup && action == AK::StartupComplete) {
    out[index_of(RS::Serving)] = 1.0 - p_fail_startup_;
    out[index_of(RS::CompletelyOff)] = p_fail_startup_;
  } else if (from == RS::WakeUp && action == AK::WakeUpComplete) {
    out[index_of(RS::Serving)] = 1.0 - p_fail_wakeup_;
    out[index_of(RS::DeepSleep)] = p_fail_wakeup_;
  } else {
    out[index_of(*to)] = 1.0;
  }
  return out;
}

StateVector StateVector::of(const MicrowaveNode& node) {
  std::vector<RadioState> s;
  s.reserve(node.radios.size());
  for (const auto& r : node.radios) s.push_back(r.state);
  return StateVector(std::move(s));
}

std::size_t StateVector::count_on() const noexcept {
  return static_cast<std::size_t>(std::count_if(states_.begin(), states_.end(), is_on));
}

std::size_t StateVector::count_in(RadioState k) const noexcept {
  return static_cast<std::size_t>(std::count(states_.begin(), states_.end(), k));
}

bool check_startup_trigger(double serving_capacity_bps, double demand_bps) noexcept {
  return serving_capacity_bps < demand_bps && demand_bps > 0.0;
}

double compute_sleep_signal(double serving_capacity_bps, double demand_bps, double sleep_threshold_bps) {
  if (!(sleep_threshold_bps > 0.0)) throw ValidationError("sleep threshold must be positive");
  return std::max(serving_capacity_bps - demand_bps, sleep_threshold_bps);
}

double compute_wake_signal(double sleeping_capacity_bps, double demand_bps, double wake_threshold_bps) {
  if (!(wake_threshold_bps > 0.0)) throw ValidationError("wake threshold must be positive");
  return std::max(sleeping_capacity_bps - demand_bps, wake_threshold_bps);
}

std::string SyncMessage::to_line() const {
  std::ostringstream out;
  out << node_id << ' ' << tick;
  for (const auto& [id, state] : radios) out << ' ' << id << '=' << to_string(state);
  return out.str();
}

SyncMessage SyncMessage::parse(std::string_view line) {
  std::istringstream in{std::string(line)};
  SyncMessage msg;
  if (!(in >> msg.node_id >> msg.tick)) throw ParseError("", 0, "sync message needs node id and tick");
  std::string field;
  while (in >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("", 0, "sync field '" + field + "' is not radio=state");
    const auto state = parse_radio_state(std::string_view(field).substr(eq + 1));
    if (!state) throw ParseError("", 0, "unknown radio state in '" + field + "'");
    msg.radios.emplace_back(field.substr(0, eq), *state);
  }
  return msg;
}

std::vector<std::pair<std::size_t, ActionKind>> sync_states(const StateVector& upstream,
                                                            const MicrowaveNode& downstream) {
  if (upstream.size() != downstream.radios.size()) {
    throw ValidationError("sync between nodes with different radio counts (" + std::to_string(upstream.size()) +
                          " vs " + std::to_string(downstream.radios.size()) + ")");
  }
  std::vector<std::pair<std::size_t, ActionKind>> out;
  for (std::size_t m = 0; m < upstream.size(); ++m) {
    const RadioState mine = downstream.radios[m].state;
    if (is_on(upstream[m])) {
      if (mine == RS::DeepSleep) out.emplace_back(m, AK::GoWakeUp);
      if (mine == RS::CompletelyOff) out.emplace_back(m, AK::GoStartup);
    } else if (mine == RS::Serving) {
      out.emplace_back(m, AK::GoDeepSleep);
    }
  }
  return out;
}

NodeController::NodeController(MicrowaveNode node, const ControllerSettings& settings, std::uint64_t seed)
    : node_(std::move(node)), matrix_(settings.p_fail_startup, settings.p_fail_wakeup), rng_(seed) {
  if (node_.radios.empty()) throw ValidationError("node '" + node_.id + "' must have >=1 radio");
  last_.resize(node_.radios.size());
}

double NodeController::serving_capacity() const noexcept {
  double c = 0.0;
  for (const auto& r : node_.radios) {
    if (r.state == RS::Serving) c += r.capacity_bps;
  }
  return c;
}

double NodeController::pending_capacity() const noexcept {
  double c = 0.0;
  for (const auto& r : node_.radios) {
    if (r.state == RS::Startup || r.state == RS::WakeUp) c += r.capacity_bps;
  }
  return c;
}

double NodeController::power_w() const noexcept {
  double p = 0.0;
  for (const auto& r : node_.radios) p += r.power[r.state];
  return p;
}

std::size_t NodeController::count_on() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(node_.radios.begin(), node_.radios.end(), [](const RadioUnit& r) { return is_on(r.state); }));
}

RadioState NodeController::draw(RadioState from, ActionKind action) {
  const auto row = matrix_.row(from, action);
  const auto nominal = *nominal_target(from, action);
  const double p_fail = 1.0 - row[index_of(nominal)];
  if (p_fail <= 0.0) return nominal;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng_) >= p_fail) return nominal;
  for (RadioState s : kAllRadioStates) {
    if (s != nominal && row[index_of(s)] > 0.0) return s;
  }
  return nominal;
}

bool NodeController::apply(std::size_t m, ActionKind action, bool check_floor) {
  auto& radio = node_.radios[m];
  const RadioState from = radio.state;
  if (!nominal_target(from, action)) return false;
  RadioState to = draw(from, action);
  ActionKind fired = action;
  if (action == AK::StartupComplete && to != RS::Serving) fired = AK::StartupFail;
  if (action == AK::WakeUpComplete && to != RS::Serving) fired = AK::WakeUpFail;
  if (check_floor && is_on(from) && !is_on(to) && count_on() == 1) return false;
  if (to != from) {
    radio.state = to;
    radio.time_in_state_s = 0.0;
    radio.idle_days = 0.0;
  }
  fired_.push_back({m, from, fired, to});
  last_[m] = fired;
  if (action == AK::GoWakeUp || action == AK::GoStartup) triggered_ = true;
  return true;
}

bool NodeController::request(std::size_t radio, ActionKind action) {
  if (radio >= node_.radios.size()) throw LookupError("radio index out of range");
  switch (action) {
    case AK::GoStartup:
    case AK::GoDeepSleep:
    case AK::GoWakeUp:
    case AK::GoCompletelyOff:
    case AK::StayOff:
    case AK::StaySleep:
    case AK::StayServing: return apply(radio, action);
    default: return false;
  }
}

void NodeController::begin_tick(double dt) {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  fired_.clear();
  triggered_ = false;
  for (std::size_t m = 0; m < node_.radios.size(); ++m) {
    auto& r = node_.radios[m];
    r.time_in_state_s += dt;
    r.idle_days = r.state == RS::DeepSleep ? r.time_in_state_s / kSecondsPerDay : 0.0;
    last_[m] = stay_action(r.state);
  }
  for (std::size_t m = 0; m < node_.radios.size(); ++m) {
    const auto& r = node_.radios[m];
    if (r.state == RS::Startup && r.time_in_state_s >= r.startup_duration_s) {
      apply(m, AK::StartupComplete, false);
    } else if (r.state == RS::WakeUp && r.time_in_state_s >= r.wakeup_duration_s) {
      apply(m, AK::WakeUpComplete, false);
    } else if (r.state == RS::DeepSleep && r.time_in_state_s >= node_.thresholds.completely_off_period_s) {
      apply(m, AK::GoCompletelyOff, false);
    }
  }
}

namespace {

// Largest-capacity radio in `state` (lowest index on ties), or npos.
std::size_t largest_in(const std::vector<RadioUnit>& radios, RadioState state, const std::vector<bool>* mask) {
  std::size_t best = std::string::npos;
  for (std::size_t m = 0; m < radios.size(); ++m) {
    if (radios[m].state != state) continue;
    if (mask && !(*mask)[m]) continue;
    if (best == std::string::npos || radios[m].capacity_bps > radios[best].capacity_bps) best = m;
  }
  return best;
}

}  // namespace

void NodeController::enforce_floor() {
  if (count_on() > 0) return;
  std::size_t m = largest_in(node_.radios, RS::DeepSleep, nullptr);
  if (m != std::string::npos) {
    apply(m, AK::GoWakeUp);
    return;
  }
  m = largest_in(node_.radios, RS::CompletelyOff, nullptr);
  if (m != std::string::npos) apply(m, AK::GoStartup);
}

StepResult NodeController::finish() {
  StepResult out;
  out.actions = last_;
  out.fired = fired_;
  out.states = state_vector();
  out.power_w = power_w();
  out.triggered = triggered_;
  return out;
}

StepResult NodeController::step(double demand_bps, double dt, const std::vector<bool>* target) {
  if (target && target->size() != node_.radios.size()) throw ValidationError("target mask size mismatch");
  begin_tick(dt);
  enforce_floor();

  bool woke = triggered_;
  if (!woke && target) {
    std::size_t m = largest_in(node_.radios, RS::DeepSleep, target);
    if (m == std::string::npos) m = largest_in(node_.radios, RS::CompletelyOff, target);
    if (m != std::string::npos) {
      const auto action = node_.radios[m].state == RS::DeepSleep ? AK::GoWakeUp : AK::GoStartup;
      woke = apply(m, action);
    }
  }
  if (!woke) {
    const double available = serving_capacity() + pending_capacity();
    std::size_t m = largest_in(node_.radios, RS::DeepSleep, nullptr);
    if (m != std::string::npos) {
      if (available - demand_bps < node_.thresholds.wake_threshold_for(node_.radios[m])) woke = apply(m, AK::GoWakeUp);
    } else {
      m = largest_in(node_.radios, RS::CompletelyOff, nullptr);
      if (m != std::string::npos && demand_bps > 0.0 &&
          available - demand_bps < node_.thresholds.wake_threshold_for(node_.radios[m])) {
        woke = apply(m, AK::GoStartup);
      }
    }
  }

  if (!woke && std::none_of(node_.radios.begin(), node_.radios.end(),
                   [](const RadioUnit& r) { return r.state == RS::Startup || r.state == RS::WakeUp; })) {
    std::vector<std::size_t> candidates;
    for (std::size_t m = 0; m < node_.radios.size(); ++m) {
      if (node_.radios[m].state == RS::Serving && !(target && (*target)[m])) candidates.push_back(m);
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return node_.radios[a].capacity_bps < node_.radios[b].capacity_bps;
    });
    const double serving = serving_capacity();
    for (std::size_t m : candidates) {
      const auto& r = node_.radios[m];
      if (count_on() < 2) break;
      if ((serving - r.capacity_bps) - demand_bps >= node_.thresholds.sleep_threshold_for(r)) {
        if (apply(m, AK::GoDeepSleep)) break;
      }
    }
  }
  return finish();
}

StepResult NodeController::follow(const SyncMessage& upstream, double dt) {
  begin_tick(dt);
  enforce_floor();
  std::vector<RadioState> states;
  states.reserve(upstream.radios.size());
  for (const auto& [id, s] : upstream.radios) states.push_back(s);
  for (const auto& [m, action] : sync_states(StateVector(std::move(states)), node_)) apply(m, action);
  return finish();
}

SyncMessage NodeController::message(std::uint64_t tick) const {
  SyncMessage msg;
  msg.node_id = node_.id;
  msg.tick = tick;
  for (const auto& r : node_.radios) msg.radios.emplace_back(r.id, r.state);
  return msg;
}

}  // namespace fwa
