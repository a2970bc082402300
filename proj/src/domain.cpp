#include "fwa/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fwa/error.hpp"

namespace fwa {

namespace {
constexpr std::array<std::string_view, kRadioStateCount> kStateNames{
    "CompletelyOff", "DeepSleep", "Startup", "WakeUp", "Serving"};
}

std::string_view to_string(RadioState s) noexcept { return kStateNames[index_of(s)]; }

std::optional<RadioState> parse_radio_state(std::string_view text) noexcept {
  for (RadioState s : kAllRadioStates) {
    if (kStateNames[index_of(s)] == text) return s;
  }
  return std::nullopt;
}

std::string_view to_string(Band b) noexcept { return b == Band::MmWave ? "mmwave" : "mid"; }

std::string_view to_string(BandState s) noexcept {
  return s == BandState::BothAvailable ? "both" : "mid_only";
}

std::string_view to_string(TerminalKind k) noexcept { return k == TerminalKind::Cpe ? "cpe" : "iab-mt"; }

double PolicyThresholds::sleep_threshold_for(const RadioUnit& candidate) const noexcept {
  return sleep_threshold_bps.value_or(candidate.capacity_bps);
}

double PolicyThresholds::wake_threshold_for(const RadioUnit& candidate) const noexcept {
  return wake_threshold_bps.value_or(0.1 * candidate.capacity_bps);
}

double CarrierParams::symbol_duration_s() const noexcept {
  return 1e-3 / (14.0 * std::ldexp(1.0, numerology));
}

double CarrierParams::subcarrier_spacing_hz() const noexcept { return 15e3 * std::ldexp(1.0, numerology); }

const MicrowaveNode* Scenario::find_node(std::string_view id) const noexcept {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const MicrowaveNode& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

const IabDu* Scenario::find_du(std::string_view id) const noexcept {
  auto it = std::find_if(dus.begin(), dus.end(), [&](const IabDu& d) { return d.id == id; });
  return it == dus.end() ? nullptr : &*it;
}

std::size_t Scenario::du_index(std::string_view id) const {
  for (std::size_t i = 0; i < dus.size(); ++i) {
    if (dus[i].id == id) return i;
  }
  throw LookupError("unknown DU '" + std::string(id) + "'");
}

std::size_t Scenario::head_node_index() const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].upstream_id) return i;
  }
  throw ValidationError("microwave chain has no head node (every node has an upstream)");
}

std::vector<std::size_t> Scenario::chain_order() const {
  std::vector<std::size_t> order;
  if (nodes.empty()) return order;
  std::set<std::size_t> seen;
  std::size_t cur = head_node_index();
  while (true) {
    if (!seen.insert(cur).second) throw ValidationError("microwave chain contains a cycle");
    order.push_back(cur);
    const auto& next = nodes[cur].downstream_id;
    if (!next) break;
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const MicrowaveNode& n) { return n.id == *next; });
    if (it == nodes.end()) throw ValidationError("node '" + nodes[cur].id + "' has dangling downstream '" + *next + "'");
    cur = static_cast<std::size_t>(it - nodes.begin());
  }
  return order;
}

}  // namespace fwa
