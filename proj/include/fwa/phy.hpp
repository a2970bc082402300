#pragma once

// Link budget and 5G NR rate math. Everything here is a pure function.
// Module boundaries carry bit/s; Mbps only appears in the *_mbps helpers.

#include <span>

#include "fwa/domain.hpp"
#include "fwa/tables.hpp"

namespace fwa {

inline constexpr double kSpeedOfLight = 299792458.0;

struct LinkBudget {
  double gain_sq = 0.0;
  double tx_power_w = 0.0;
  double noise_power_w = 1.0;
};

double db_to_linear(double db) noexcept;
double linear_to_db(double linear) noexcept;

// Linear SNR. Throws ValidationError when noise_power_w <= 0.
double snr(const LinkBudget& link);

// Shannon rate in bit/s.
double shannon_rate(double bandwidth_hz, double snr_linear) noexcept;

// Free-space path loss in dB.
double fspl_db(double distance_m, double carrier_hz) noexcept;

// Free-space |G|^2 including both antenna gains.
double channel_gain(double distance_m, double carrier_hz, double gain_tx_dbi, double gain_rx_dbi);

// Shannon capacity of a microwave radio from its link fields.
double radio_capacity_bps(const RadioUnit& radio);

// Peak DU rate in Mbps for `rb_budget` RBs; `active` is the 0/1 aggregate
// allocation indicator.
double max_du_rate_mbps(const CarrierParams& params, int rb_budget, int active = 1) noexcept;
inline double max_du_rate_bps(const CarrierParams& params, int rb_budget, int active = 1) noexcept {
  return 1e6 * max_du_rate_mbps(params, rb_budget, active);
}

// RBs needed to carry `demand_mbps` at peak MCS.
int rbs_required(double demand_mbps, const CarrierParams& params);
inline int rbs_required_bps(double demand_bps, const CarrierParams& params) {
  return rbs_required(demand_bps * 1e-6, params);
}

// Resource-element bandwidth of `rbs` RBs: layers x 12 x rbs / T^u x (1-OH).
double effective_bandwidth_hz(const CarrierParams& params, int rbs) noexcept;

// Rate of one MCS entry over `rbs` RBs.
double mcs_rate_bps(const McsEntry& entry, const CarrierParams& params, int rbs) noexcept;

// Smallest RB count at which `entry` carries `demand_bps`.
int rbs_for_mcs(const McsEntry& entry, const CarrierParams& params, double demand_bps);

struct McsSelection {
  McsEntry entry;
  bool underserved = false;
};

// Lowest entry with threshold <= snr whose rate at rb_count meets the demand.
// Falls back to the highest reachable entry flagged underserved.
// Throws NoFeasibleMcs when snr is below every threshold.
McsSelection select_mcs(std::span<const McsEntry> table, double snr_linear, double demand_bps, int rb_count,
                        const CarrierParams& params);

// p' = target * w * kappa * p / actual. Throws DivergentPowerControl when
// actual <= 0.
double update_tx_power(double p_w, double snr_actual, double snr_target, int w, int kappa);

// Power that reaches `target_snr` over a channel.
double power_for_snr(double target_snr, double gain_sq, double noise_power_w);

enum class AdaptCase { Hold, LowerPower, RaiseMcs, RestorePower };

struct LinkAdaptation {
  int mcs_index = 0;
  double power_w = 0.0;
  AdaptCase applied = AdaptCase::Hold;
};

// One step of MCS/power adaptation for a terminal at a fixed RB count.
//  SNR above threshold with demand met     -> lower power to the threshold.
//  demand not met at the current MCS       -> raise MCS, raise power.
//  SNR equal to threshold with demand met  -> hold.
LinkAdaptation adapt_link(std::span<const McsEntry> table, int mcs_index, double power_w, double gain_sq,
                          double noise_power_w, double demand_bps, int rbs, const CarrierParams& params);

}  // namespace fwa
