#include "fwa/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fwa/error.hpp"

namespace fwa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mask_key(const ServingSet& x) {
  if (x.size() > 64) throw ValidationError("serving masks are limited to 64 radios");
  std::uint64_t key = 0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    if (x[m]) key |= std::uint64_t{1} << m;
  }
  return key;
}

ServingSet mask_of(std::uint64_t key, std::size_t m) {
  ServingSet x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = (key >> i) & 1U;
  return x;
}

double total_capacity(const DualInstance& inst, const ServingSet& x) {
  double c = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    if (x[m]) c += inst.radios[m].capacity_bps;
  }
  return c;
}

void check_size(const DualInstance& inst, const ServingSet& x) {
  if (x.size() != inst.radios.size()) throw ValidationError("serving mask size does not match radio count");
}

double penalty(const Residuals& r, const LagrangeMultipliers& mult) {
  return mult.power * r.power_w + mult.rate * r.rate_gbps + mult.floor * r.floor;
}

// True when (obj_a, cap_a) should replace (obj_b, cap_b) as the better policy.
bool better(double obj_a, double cap_a, double obj_b, double cap_b) {
  const double tol = 1e-12 * std::max(1.0, std::abs(obj_b));
  if (obj_a < obj_b - tol) return true;
  if (obj_a > obj_b + tol) return false;
  return cap_a > cap_b;
}

}  // namespace

MonitoringCost MonitoringCost::for_radios(std::size_t m, double energy_per_bit_j, std::size_t k) {
  return {energy_per_bit_j, 64.0 * static_cast<double>(k * m + m)};
}

DualInstance DualInstance::from_node(const MicrowaveNode& node, double demand_bps, const MonitoringCost& monitoring) {
  DualInstance inst;
  for (const auto& r : node.radios) {
    inst.radios.push_back(
        {r.capacity_bps, r.power[RadioState::Serving], r.power[RadioState::DeepSleep], r.tx_power_w, r.tx_power_cap_w});
  }
  inst.demand_bps = demand_bps;
  inst.monitoring = monitoring;
  return inst;
}

double surrogate_objective(std::span<const PolicyTick> trace, std::span<const PowerProfile> profiles,
                           const TransitionMatrix& phi, const MonitoringCost& monitoring, double dt_s) {
  if (trace.empty()) throw ValidationError("surrogate objective over an empty trace");
  if (!(dt_s > 0.0)) throw ValidationError("dt must be positive");
  double sum = 0.0;
  for (const auto& tick : trace) {
    if (tick.states.size() != profiles.size()) throw ValidationError("trace tick radio count mismatch");
    double w = monitoring.energy_j() / dt_s;
    for (std::size_t m = 0; m < tick.states.size(); ++m) {
      const RadioState s = tick.states[m];
      const auto action = m < tick.actions.size() ? tick.actions[m] : std::nullopt;
      if (action && phi.defined(s, *action)) {
        const auto row = phi.row(s, *action);
        for (RadioState k : kAllRadioStates) w += row[index_of(k)] * profiles[m][k];
      } else {
        w += profiles[m][s];
      }
    }
    sum += w;
  }
  return sum / static_cast<double>(trace.size());
}

double policy_objective(const DualInstance& inst, const ServingSet& x) {
  check_size(inst, x);
  double w = inst.monitoring.energy_j() / inst.dt_s;
  for (std::size_t m = 0; m < x.size(); ++m) w += x[m] ? inst.radios[m].serving_w : inst.radios[m].sleep_w;
  return w;
}

Residuals residuals(const DualInstance& inst, const ServingSet& x) {
  check_size(inst, x);
  Residuals r;
  double tx = 0.0;
  double cap = 0.0;
  double on = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    cap += inst.radios[m].tx_power_cap_w;
    if (x[m]) {
      tx += inst.radios[m].tx_power_w;
      on += 1.0;
    }
  }
  r.power_w = tx - cap;
  r.rate_gbps = (inst.demand_bps - total_capacity(inst, x)) * 1e-9;
  r.floor = 1.0 - on;
  return r;
}

double lagrangian(const DualInstance& inst, const ServingSet& x, const LagrangeMultipliers& mult) {
  if (!mult.nonnegative()) throw ValidationError("Lagrange multipliers must be nonnegative");
  return policy_objective(inst, x) + penalty(residuals(inst, x), mult);
}

double KktReport::max_slack() const noexcept { return std::max({slack_power, slack_rate, slack_floor}); }

KktReport check_kkt(const DualInstance& inst, const ServingSet& x, const LagrangeMultipliers& mult, double tol) {
  KktReport rep;
  rep.tol = tol;
  rep.dual_feasibility = mult.nonnegative();
  rep.primal = residuals(inst, x);
  rep.primal_feasibility = rep.primal.feasible();
  const double obj = policy_objective(inst, x);
  const double scale = std::max(1.0, std::abs(obj));
  rep.slack_power = std::abs(mult.power * rep.primal.power_w) / scale;
  rep.slack_rate = std::abs(mult.rate * rep.primal.rate_gbps) / scale;
  rep.slack_floor = std::abs(mult.floor * rep.primal.floor) / scale;
  rep.complementary_slackness = rep.max_slack() <= tol;

  const double l0 = obj + penalty(rep.primal, mult);
  double worst = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    ServingSet y = x;
    y[m] = !y[m];
    const Residuals r = residuals(inst, y);
    if (!r.feasible()) continue;
    worst = std::max(worst, l0 - (policy_objective(inst, y) + penalty(r, mult)));
  }
  rep.stationarity_residual = worst / scale;
  rep.stationarity = rep.stationarity_residual <= tol;
  return rep;
}

const AnswerTable::Entry& AnswerTable::get(const DualInstance& inst, const ServingSet& x) {
  const auto key = mask_key(x);
  auto it = table_.find(key);
  if (it != table_.end()) {
    ++hits_;
    return it->second;
  }
  return table_.emplace(key, Entry{policy_objective(inst, x), residuals(inst, x)}).first->second;
}

namespace {

double minimize_lagrangian(const DualInstance& inst, const LagrangeMultipliers& mult, ServingSet* argmin,
                           const SolverOptions& opts, AnswerTable* table) {
  const std::size_t m = inst.radios.size();
  if (m <= opts.m_enum) {
    double best = kInf;
    double best_cap = -1.0;
    std::uint64_t best_key = 0;
    for (std::uint64_t key = 0; key < (std::uint64_t{1} << m); ++key) {
      const ServingSet x = mask_of(key, m);
      double obj = 0.0;
      Residuals r;
      if (table) {
        const auto& e = table->get(inst, x);
        obj = e.objective_w;
        r = e.residuals;
      } else {
        obj = policy_objective(inst, x);
        r = residuals(inst, x);
      }
      const double l = obj + penalty(r, mult);
      const double cap = total_capacity(inst, x);
      if (better(l, cap, best, best_cap)) {
        best = l;
        best_cap = cap;
        best_key = key;
      }
    }
    if (argmin) *argmin = mask_of(best_key, m);
    return best;
  }
  // Separable: each radio contributes x_m * c_m on top of the all-asleep value.
  ServingSet x(m, false);
  double value = policy_objective(inst, x) + penalty(residuals(inst, x), mult);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = inst.radios[i];
    const double c = (r.serving_w - r.sleep_w) + mult.power * r.tx_power_w - mult.rate * r.capacity_bps * 1e-9 -
                     mult.floor;
    if (c < 0.0) {
      x[i] = true;
      value += c;
    }
  }
  if (argmin) *argmin = std::move(x);
  return value;
}

ServingSet greedy_cover(const DualInstance& inst) {
  std::vector<std::size_t> order(inst.radios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return inst.radios[a].capacity_bps > inst.radios[b].capacity_bps; });
  ServingSet x(inst.radios.size(), false);
  double cap = 0.0;
  for (std::size_t i : order) {
    if (cap >= inst.demand_bps && cap > 0.0) break;
    x[i] = true;
    cap += inst.radios[i].capacity_bps;
  }
  return x;
}

}  // namespace

double dual_function(const DualInstance& inst, const LagrangeMultipliers& mult, ServingSet* argmin,
                     const SolverOptions& opts) {
  if (!mult.nonnegative()) throw ValidationError("Lagrange multipliers must be nonnegative");
  return minimize_lagrangian(inst, mult, argmin, opts, nullptr);
}

std::optional<ServingSet> brute_force_serving_set(const DualInstance& inst) {
  const std::size_t m = inst.radios.size();
  if (m > 20) throw ValidationError("brute force limited to 20 radios");
  std::optional<ServingSet> best;
  double best_obj = kInf;
  double best_cap = -1.0;
  for (std::uint64_t key = 0; key < (std::uint64_t{1} << m); ++key) {
    const ServingSet x = mask_of(key, m);
    if (!residuals(inst, x).feasible()) continue;
    const double obj = policy_objective(inst, x);
    const double cap = total_capacity(inst, x);
    if (better(obj, cap, best_obj, best_cap)) {
      best = x;
      best_obj = obj;
      best_cap = cap;
    }
  }
  return best;
}

DualSolution solve_dual(const DualInstance& inst, LagrangeMultipliers initial, const SolverOptions& opts) {
  if (inst.radios.empty()) throw ValidationError("dual instance needs at least one radio");
  if (!initial.nonnegative()) throw ValidationError("initial multipliers must be nonnegative");
  const std::size_t m = inst.radios.size();
  AnswerTable table;

  DualSolution sol;
  double ub = kInf;
  double ub_cap = -1.0;
  ServingSet incumbent(m, true);
  auto offer = [&](const ServingSet& x) {
    const auto& e = table.get(inst, x);
    if (!e.residuals.feasible()) return;
    const double cap = total_capacity(inst, x);
    if (better(e.objective_w, cap, ub, ub_cap)) {
      ub = e.objective_w;
      ub_cap = cap;
      incumbent = x;
    }
  };
  if (m <= opts.m_enum) {
    for (std::uint64_t key = 0; key < (std::uint64_t{1} << m); ++key) offer(mask_of(key, m));
  } else {
    offer(greedy_cover(inst));
    offer(ServingSet(m, true));
  }

  LagrangeMultipliers mult = initial;
  LagrangeMultipliers best_mult = initial;
  double best_g = -kInf;
  double theta = opts.polyak_theta;
  double alpha_scale = 0.0;
  int stall = 0;
  int k = 0;
  for (k = 1; k <= opts.max_iters; ++k) {
    ServingSet xk;
    const double g = minimize_lagrangian(inst, mult, &xk, opts, &table);
    offer(xk);
    const Residuals s = table.get(inst, xk).residuals;
    if (!std::isfinite(best_g) || g > best_g + 1e-15 * std::max(1.0, std::abs(best_g))) {
      best_g = g;
      best_mult = mult;
      stall = 0;
    } else {
      ++stall;
    }
    sol.trajectory.push_back({k, mult, g, ub});
    if (std::isfinite(ub) && (ub - best_g) / std::max(1.0, std::abs(ub)) <= opts.tol_gap) break;

    const double norm_sq = s.power_w * s.power_w + s.rate_gbps * s.rate_gbps + s.floor * s.floor;
    if (norm_sq <= 0.0) break;
    if (stall >= opts.max_stall) {
      if (opts.schedule == StepSchedule::Polyak && std::isfinite(ub)) {
        theta *= 0.5;
        stall = 0;
        if (theta < 1e-12) {
          sol.warning = true;
          break;
        }
      } else {
        sol.warning = true;
        break;
      }
    }
    double step = 0.0;
    if (opts.schedule == StepSchedule::Polyak && std::isfinite(ub)) {
      step = theta * std::max(ub - g, 0.0) / norm_sq;
    } else {
      if (alpha_scale == 0.0) alpha_scale = opts.alpha0 / std::sqrt(norm_sq);
      step = alpha_scale / std::sqrt(static_cast<double>(k));
    }
    mult.power = std::max(0.0, mult.power + step * s.power_w);
    mult.rate = std::max(0.0, mult.rate + step * s.rate_gbps);
    mult.floor = std::max(0.0, mult.floor + step * s.floor);
  }

  sol.iterations = std::min(k, opts.max_iters);
  const double r = sol.iterations;
  sol.complexity_bound = 2.0 * r * r * r + r * r;
  sol.multipliers = best_mult;
  sol.dual_value = best_g;
  sol.policy = incumbent;
  sol.feasible = std::isfinite(ub);
  sol.primal_value = sol.feasible ? ub : policy_objective(inst, incumbent);
  sol.gap = sol.feasible ? std::max(0.0, ub - best_g) / std::max(1.0, std::abs(ub)) : kInf;
  sol.converged = sol.feasible && sol.gap <= opts.tol_gap;
  if (!sol.feasible) sol.warning = true;
  sol.kkt = check_kkt(inst, sol.policy, sol.multipliers, opts.tol_kkt);
  sol.answer_table_size = table.size();
  return sol;
}

JointReport joint_objective(std::span<const double> microwave_w, std::span<const double> iab_w,
                            std::span<const JointTickCheck> checks) {
  if (microwave_w.size() != iab_w.size()) throw ValidationError("joint objective: mismatched tick ranges");
  if (microwave_w.empty()) throw ValidationError("joint objective over an empty range");
  if (!checks.empty() && checks.size() != microwave_w.size()) {
    throw ValidationError("joint objective: constraint checks cover a different tick range");
  }
  JointReport rep;
  for (std::size_t t = 0; t < microwave_w.size(); ++t) {
    rep.microwave_w += microwave_w[t];
    rep.iab_w += iab_w[t];
    if (!checks.empty()) {
      const auto& c = checks[t];
      if (!c.microwave_delivers || !c.du_within_dmax || !c.terminals_served) rep.violations.push_back(t);
    }
  }
  const double n = static_cast<double>(microwave_w.size());
  rep.microwave_w /= n;
  rep.iab_w /= n;
  rep.value_w = rep.microwave_w + rep.iab_w;
  return rep;
}

double energy_efficiency(double delivered_bits, double joules) {
  if (!(joules > 0.0)) throw ValidationError("energy efficiency undefined for zero energy");
  return delivered_bits / joules;
}

}  // namespace fwa
