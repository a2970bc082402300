#include "fwa/phy.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>

#include "fwa/error.hpp"

namespace fwa {

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) noexcept { return 10.0 * std::log10(linear); }

double snr(const LinkBudget& link) {
  if (!(link.noise_power_w > 0.0)) throw ValidationError("noise power must be positive");
  return link.gain_sq * link.tx_power_w / link.noise_power_w;
}

double shannon_rate(double bandwidth_hz, double snr_linear) noexcept {
  return bandwidth_hz * std::log2(1.0 + snr_linear);
}

double fspl_db(double distance_m, double carrier_hz) noexcept {
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * carrier_hz / kSpeedOfLight);
}

double channel_gain(double distance_m, double carrier_hz, double gain_tx_dbi, double gain_rx_dbi) {
  if (!(distance_m > 0.0) || !(carrier_hz > 0.0)) {
    throw ValidationError("channel_gain needs positive distance and carrier");
  }
  const double ratio = kSpeedOfLight / (4.0 * std::numbers::pi * distance_m * carrier_hz);
  return db_to_linear(gain_tx_dbi) * db_to_linear(gain_rx_dbi) * ratio * ratio;
}

double radio_capacity_bps(const RadioUnit& radio) {
  const double g = channel_gain(radio.distance_m, radio.band_ghz * 1e9, radio.antenna_gain_tx_dbi,
                                radio.antenna_gain_rx_dbi);
  return shannon_rate(radio.bandwidth_hz, snr({g, radio.tx_power_w, radio.noise_power_w}));
}

namespace {

double per_rb_bits_per_symbol(const CarrierParams& p) noexcept {
  return p.num_carriers * p.layers * p.modulation_order * p.scaling * p.max_code_rate * 12.0 * (1.0 - p.overhead);
}

}  // namespace

double max_du_rate_mbps(const CarrierParams& params, int rb_budget, int active) noexcept {
  if (rb_budget <= 0 || active == 0) return 0.0;
  return 1e-6 * per_rb_bits_per_symbol(params) * active * rb_budget / params.symbol_duration_s();
}

int rbs_required(double demand_mbps, const CarrierParams& params) {
  if (demand_mbps < 0.0) throw ValidationError("demand must be nonnegative");
  if (demand_mbps == 0.0) return 0;
  const double exact = 1e6 * demand_mbps * params.symbol_duration_s() / per_rb_bits_per_symbol(params);
  int r = std::max(1, static_cast<int>(std::ceil(exact)));
  // Snap the ceiling so it is tight against max_du_rate_mbps itself.
  while (r > 1 && max_du_rate_mbps(params, r - 1) >= demand_mbps) --r;
  while (max_du_rate_mbps(params, r) < demand_mbps) ++r;
  return r;
}

double effective_bandwidth_hz(const CarrierParams& params, int rbs) noexcept {
  return params.num_carriers * params.layers * 12.0 * rbs / params.symbol_duration_s() * (1.0 - params.overhead);
}

double mcs_rate_bps(const McsEntry& entry, const CarrierParams& params, int rbs) noexcept {
  return entry.spectral_efficiency() * params.scaling * effective_bandwidth_hz(params, rbs);
}

int rbs_for_mcs(const McsEntry& entry, const CarrierParams& params, double demand_bps) {
  if (demand_bps <= 0.0) return 0;
  const double per_rb = mcs_rate_bps(entry, params, 1);
  int r = static_cast<int>(std::ceil(demand_bps / per_rb));
  if (r > 1 && mcs_rate_bps(entry, params, r - 1) >= demand_bps) --r;
  while (mcs_rate_bps(entry, params, r) < demand_bps) ++r;
  return std::max(r, 1);
}

McsSelection select_mcs(std::span<const McsEntry> table, double snr_linear, double demand_bps, int rb_count,
                        const CarrierParams& params) {
  if (table.empty() || snr_linear < table.front().snr_threshold) {
    throw NoFeasibleMcs("SNR below the lowest MCS threshold");
  }
  const McsEntry* reachable = nullptr;
  for (const auto& e : table) {
    if (e.snr_threshold > snr_linear) break;
    reachable = &e;
    if (mcs_rate_bps(e, params, rb_count) >= demand_bps) return {e, false};
  }
  return {*reachable, true};
}

double update_tx_power(double p_w, double snr_actual, double snr_target, int w, int kappa) {
  if (!(snr_actual > 0.0)) throw DivergentPowerControl("power update with zero measured SNR");
  return snr_target * w * kappa * p_w / snr_actual;
}

double power_for_snr(double target_snr, double gain_sq, double noise_power_w) {
  if (!(gain_sq > 0.0)) throw DivergentPowerControl("zero channel gain");
  return target_snr * noise_power_w / gain_sq;
}

LinkAdaptation adapt_link(std::span<const McsEntry> table, int mcs_index, double power_w, double gain_sq,
                          double noise_power_w, double demand_bps, int rbs, const CarrierParams& params) {
  const double measured = snr({gain_sq, power_w, noise_power_w});
  const auto& cur = table[static_cast<std::size_t>(mcs_index)];
  const bool met = mcs_rate_bps(cur, params, rbs) >= demand_bps;
  if (!met) {
    std::size_t j = static_cast<std::size_t>(mcs_index);
    while (j + 1 < table.size() && mcs_rate_bps(table[j], params, rbs) < demand_bps) ++j;
    const double p = update_tx_power(power_w, measured, table[j].snr_threshold, 1, 1);
    return {static_cast<int>(j), p, AdaptCase::RaiseMcs};
  }
  const double rel = (measured - cur.snr_threshold) / cur.snr_threshold;
  if (std::abs(rel) <= 1e-12) return {mcs_index, power_w, AdaptCase::Hold};
  const double p = update_tx_power(power_w, measured, cur.snr_threshold, 1, 1);
  return {mcs_index, p, measured > cur.snr_threshold ? AdaptCase::LowerPower : AdaptCase::RestorePower};
}

}  // namespace fwa
