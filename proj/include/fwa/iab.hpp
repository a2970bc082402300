#pragma once

// IAB-DU access allocation: band selection, RB allocation with MCS/power
// adaptation, utilization and load tracking, RB-budget updates and the
// block-coordinate (DMCP) iteration over band and numerology choices.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fwa/domain.hpp"
#include "fwa/phy.hpp"
#include "fwa/tables.hpp"

namespace fwa {

struct BandChoice {
  int y_mm = 1;
  int y_md = 0;

  Band band() const noexcept { return y_mm == 1 ? Band::MmWave : Band::MidBand; }
  static BandChoice of(Band b) noexcept { return b == Band::MmWave ? BandChoice{1, 0} : BandChoice{0, 1}; }
  friend bool operator==(const BandChoice&, const BandChoice&) = default;
};

BandChoice select_band(const BandAvailability& availability) noexcept;

const NumerologyTable& numerology_for(Band band);

// Active numerology/bandwidth on one band, with the carrier parameters
// re-keyed to that numerology.
struct DuConfig {
  Band band = Band::MmWave;
  int mu = 0;
  double bandwidth_mhz = 0.0;
  int rb_budget = 0;
  CarrierParams params;

  double capacity_bps() const noexcept { return max_du_rate_bps(params, rb_budget); }
  friend bool operator==(const DuConfig&, const DuConfig&) = default;
};

DuConfig make_config(Band band, const NumerologyEntry& entry, const CarrierSettings& carrier);
// Minimum numerology at its maximum bandwidth.
DuConfig initial_config(Band band, const CarrierSettings& carrier);
// Fixed baseline: mmWave (mu=3, 400 MHz), mid-band (mu=1, 100 MHz).
DuConfig fixed_config(Band band, const CarrierSettings& carrier);

// Per-terminal channel toward its parent DU on each band.
struct TerminalLink {
  std::string terminal_id;
  double gain_mm = 0.0;
  double gain_md = 0.0;
  double noise_power_w = 1e-12;
  // Power at the mid-table MCS SNR unless configured.
  double initial_power_w = 0.0;

  double gain(Band b) const noexcept { return b == Band::MmWave ? gain_mm : gain_md; }
};

TerminalLink make_link(const Terminal& terminal, const IabDu& du);

struct TerminalAllocation {
  std::string terminal_id;
  bool served = false;
  int rbs = 0;
  int mcs_index = -1;
  double power_w = 0.0;
  double snr = 0.0;
  double demand_bps = 0.0;
  double achieved_bps = 0.0;
};

struct AllocationDecision {
  std::string du_id;
  BandChoice band;
  DuConfig config;
  std::vector<TerminalAllocation> terminals;
  int rbs_used = 0;
  double total_power_w = 0.0;
  std::size_t unserved = 0;
  double offered_bps = 0.0;
  double served_bps = 0.0;
  bool power_capped = false;
};

// One line per terminal: `tick du_id terminal_id band rbs mcs power_w`.
// Unserved terminals carry rbs 0 and mcs -1.
void write_allocation_log(std::ostream& out, std::uint64_t tick, const AllocationDecision& decision);

// Gamma = used RBs / active budget.
double rb_utilization(const AllocationDecision& decision) noexcept;

struct AllocateOptions {
  double power_cap_w = 20.0;
  bool adaptive = true;
  int fixed_mcs = -1;  // -1: mid-table entry
};

// `previous_power_w` (per terminal, may be empty) seeds the power update.
AllocationDecision allocate(const DuConfig& config, std::span<const TerminalLink> links,
                            std::span<const double> demands_bps, const AllocateOptions& opts,
                            std::span<const double> previous_power_w = {});

struct BandRates {
  double arrival_bps = 0.0;
  double service_bps = 0.0;
};

// rho = sum y*iota / sum y*g. Throws LoadUndefined on zero service.
double traffic_load(BandChoice y, BandRates mm, BandRates md);

// EWMA arrival/service rates per band and the per-window Gamma average.
class UtilizationTracker {
 public:
  explicit UtilizationTracker(double alpha = 0.1) : alpha_(alpha) {}

  void record(const AllocationDecision& decision);
  double mean_gamma() const noexcept;
  // Idle (no arrivals) -> 0; starved (arrivals, no service) -> 2.
  double mean_rho() const noexcept;
  void reset_window() noexcept;
  BandRates rates(Band b) const noexcept { return b == Band::MmWave ? mm_ : md_; }

 private:
  double alpha_;
  BandRates mm_;
  BandRates md_;
  BandChoice last_;
  double gamma_sum_ = 0.0;
  double rho_sum_ = 0.0;
  std::size_t samples_ = 0;
};

// floor((Gamma + rho) / 2 * beta).
int update_rb_budget(double gamma_bar, double rho_bar, int beta);

// Grow: smallest entry >= target; shrink: largest <= target; never below the
// smallest entry. Stays within numerology `mu`.
NumerologyEntry reselect_numerology(const NumerologyTable& table, int mu, int current_rbs, int target_rbs);

struct AnswerRecord {
  int iteration = 0;
  BandChoice y;
  DuConfig config;
  std::size_t unserved = 0;
  double objective_w = 0.0;
};

struct DmcpOptions {
  double tol = 1e-6;
  int max_iters = 100;
};

struct DmcpResult {
  AllocationDecision decision;
  std::vector<AnswerRecord> answer_table;
  int iterations = 0;
  bool converged = false;
  bool warning = false;
};

struct DmcpState {
  DuConfig mm;
  DuConfig md;
  Band band = Band::MmWave;
};

// Block-coordinate iteration: y-block (band) then z-block (numerology and
// budget, with w and kappa re-solved by allocate). Accepts only
// non-worsening iterates, compared as (unserved, power). Updates `state`.
DmcpResult dmcp_iterate(DmcpState& state, BandState availability, std::span<const TerminalLink> links,
                        std::span<const double> demands_bps, double gamma_bar, double rho_bar,
                        const AllocateOptions& alloc, const CarrierSettings& carrier, const DmcpOptions& opts = {},
                        std::span<const double> previous_power_w = {});

enum class IabMode { Adaptive, Fixed, Disabled };
std::string_view to_string(IabMode m) noexcept;

// Per-DU runtime: keeps configs, tracker and last powers between ticks.
class DuAllocator {
 public:
  DuAllocator(IabDu du, const CarrierSettings& carrier, std::vector<TerminalLink> links, IabMode mode,
              DmcpOptions opts = {});

  AllocationDecision step(std::span<const double> demands_bps, BandState availability);

  const IabDu& du() const noexcept { return du_; }
  const std::vector<TerminalLink>& links() const noexcept { return links_; }
  const DmcpState& state() const noexcept { return state_; }
  const DmcpResult& last_dmcp() const noexcept { return last_dmcp_; }

 private:
  IabDu du_;
  CarrierSettings carrier_;
  std::vector<TerminalLink> links_;
  IabMode mode_;
  DmcpOptions opts_;
  DmcpState state_;
  UtilizationTracker tracker_;
  std::vector<double> power_;
  DmcpResult last_dmcp_;
};

}  // namespace fwa
