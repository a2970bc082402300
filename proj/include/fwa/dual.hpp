#pragma once

// Microwave energy minimization: surrogate average-cost objective,
// Lagrangian, dual function, KKT audit and projected subgradient ascent.
// Policies are per-radio serving masks (Serving vs DeepSleep).

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "fwa/domain.hpp"
#include "fwa/fsm.hpp"

namespace fwa {

struct LagrangeMultipliers {
  double power = 0.0;  // Lambda, 1/W scale
  double rate = 0.0;   // lambda, W per Gbit/s
  double floor = 0.0;  // mu, W

  bool nonnegative() const noexcept { return power >= 0.0 && rate >= 0.0 && floor >= 0.0; }
  friend bool operator==(const LagrangeMultipliers&, const LagrangeMultipliers&) = default;
};

struct MonitoringCost {
  double energy_per_bit_j = 5e-8;
  double size_bits = 0.0;

  double energy_j() const noexcept { return size_bits * energy_per_bit_j; }
  // 64-bit words for an M-radio node: K*M matrix rows plus the M power entries.
  static MonitoringCost for_radios(std::size_t m, double energy_per_bit_j, std::size_t k = kRadioStateCount);
};

struct DualRadio {
  double capacity_bps = 0.0;
  double serving_w = 80.0;
  double sleep_w = 3.0;
  double tx_power_w = 1.0;
  double tx_power_cap_w = 2.0;
};

struct DualInstance {
  std::vector<DualRadio> radios;
  double demand_bps = 0.0;
  MonitoringCost monitoring{0.0, 0.0};
  double dt_s = 1.0;

  static DualInstance from_node(const MicrowaveNode& node, double demand_bps, const MonitoringCost& monitoring);
};

using ServingSet = std::vector<bool>;

// Constraint values g_i(x); feasible iff all <= 0.
struct Residuals {
  double power_w = 0.0;    // sum x P^TX - sum P_cap
  double rate_gbps = 0.0;  // D - sum x C
  double floor = 0.0;      // 1 - #ON

  bool feasible(double tol = 0.0) const noexcept { return power_w <= tol && rate_gbps <= tol && floor <= tol; }
};

// Per-tick record for the surrogate objective.
struct PolicyTick {
  std::vector<RadioState> states;
  std::vector<std::optional<ActionKind>> actions;
};

// Time-average of E/dt + sum_m sum_k' Phi(x_m, a_m)[k'] P_m[k'] over the
// trace, in W. Unknown or missing actions weigh the current state's power.
// Throws ValidationError on an empty trace.
double surrogate_objective(std::span<const PolicyTick> trace, std::span<const PowerProfile> profiles,
                           const TransitionMatrix& phi, const MonitoringCost& monitoring, double dt_s = 1.0);

// Stationary-policy objective A~(x) in W.
double policy_objective(const DualInstance& inst, const ServingSet& x);
Residuals residuals(const DualInstance& inst, const ServingSet& x);

// L(x; multipliers). Throws ValidationError on a negative multiplier.
double lagrangian(const DualInstance& inst, const ServingSet& x, const LagrangeMultipliers& mult);

struct KktReport {
  bool stationarity = false;
  bool complementary_slackness = false;
  bool primal_feasibility = false;
  bool dual_feasibility = false;
  // |mult_i * g_i| scaled by max(1, |A~|).
  double slack_power = 0.0;
  double slack_rate = 0.0;
  double slack_floor = 0.0;
  Residuals primal;
  // Largest L decrease available from a feasibility-preserving single flip,
  // scaled like the slackness residuals.
  double stationarity_residual = 0.0;
  double tol = 1e-6;

  bool all() const noexcept {
    return stationarity && complementary_slackness && primal_feasibility && dual_feasibility;
  }
  double max_slack() const noexcept;
};

KktReport check_kkt(const DualInstance& inst, const ServingSet& x, const LagrangeMultipliers& mult,
                    double tol = 1e-6);

// Memoized multiplier-independent values per serving mask.
class AnswerTable {
 public:
  struct Entry {
    double objective_w;
    Residuals residuals;
  };

  const Entry& get(const DualInstance& inst, const ServingSet& x);
  std::size_t size() const noexcept { return table_.size(); }
  std::size_t hits() const noexcept { return hits_; }

 private:
  std::unordered_map<std::uint64_t, Entry> table_;
  std::size_t hits_ = 0;
};

enum class StepSchedule { Polyak, Diminishing };

struct SolverOptions {
  StepSchedule schedule = StepSchedule::Polyak;
  double alpha0 = 1.0;
  double polyak_theta = 1.0;
  int max_iters = 2000;
  int max_stall = 50;
  double tol_gap = 1e-6;
  double tol_kkt = 1e-6;
  std::size_t m_enum = 4;
};

struct DualIterate {
  int k = 0;
  LagrangeMultipliers multipliers;
  double dual_value = 0.0;
  double primal_value = 0.0;
};

struct DualSolution {
  LagrangeMultipliers multipliers;
  ServingSet policy;
  double dual_value = 0.0;
  double primal_value = 0.0;
  double gap = 0.0;  // relative
  bool feasible = false;
  bool converged = false;
  bool warning = false;
  int iterations = 0;
  double complexity_bound = 0.0;  // 2r^3 + r^2
  std::vector<DualIterate> trajectory;
  KktReport kkt;
  std::size_t answer_table_size = 0;
};

// g(mult) = min over all serving masks of L. Fills `argmin` when given.
double dual_function(const DualInstance& inst, const LagrangeMultipliers& mult, ServingSet* argmin = nullptr,
                     const SolverOptions& opts = {});

DualSolution solve_dual(const DualInstance& inst, LagrangeMultipliers initial = {}, const SolverOptions& opts = {});

// Exhaustive minimum-power feasible serving set; ties prefer the larger total
// capacity, then the lexicographically smaller mask. nullopt when infeasible.
std::optional<ServingSet> brute_force_serving_set(const DualInstance& inst);

struct JointReport {
  double value_w = 0.0;
  double microwave_w = 0.0;
  double iab_w = 0.0;
  std::vector<std::size_t> violations;
};

// Per-tick constraint flags for the joint problem.
struct JointTickCheck {
  bool microwave_delivers = true;
  bool du_within_dmax = true;
  bool terminals_served = true;
};

// A = (1/T) sum_t [iab_w + microwave_w]. Throws ValidationError on length
// mismatch or an empty range.
JointReport joint_objective(std::span<const double> microwave_w, std::span<const double> iab_w,
                            std::span<const JointTickCheck> checks = {});

// bit/J. Throws ValidationError when joules <= 0.
double energy_efficiency(double delivered_bits, double joules);

}  // namespace fwa
