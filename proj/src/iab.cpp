#include "fwa/iab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

#include "fwa/error.hpp"

namespace fwa {

BandChoice select_band(const BandAvailability& availability) noexcept {
  return availability.state == BandState::BothAvailable ? BandChoice{1, 0} : BandChoice{0, 1};
}

const NumerologyTable& numerology_for(Band band) {
  return band == Band::MmWave ? fr2_numerology() : fr1_numerology();
}

DuConfig make_config(Band band, const NumerologyEntry& entry, const CarrierSettings& carrier) {
  DuConfig c;
  c.band = band;
  c.mu = entry.mu;
  c.bandwidth_mhz = entry.bandwidth_mhz;
  c.rb_budget = entry.rbs;
  c.params = carrier.for_band(band);
  c.params.numerology = entry.mu;
  return c;
}

DuConfig initial_config(Band band, const CarrierSettings& carrier) {
  const auto& table = numerology_for(band);
  const auto entries = table.entries_for(table.min_numerology());
  return make_config(band, entries.back(), carrier);
}

DuConfig fixed_config(Band band, const CarrierSettings& carrier) {
  const auto& table = numerology_for(band);
  const auto* e = band == Band::MmWave ? table.find(3, 400) : table.find(1, 100);
  return make_config(band, *e, carrier);
}

TerminalLink make_link(const Terminal& terminal, const IabDu& du) {
  TerminalLink link;
  link.terminal_id = terminal.id;
  link.noise_power_w = terminal.noise_power_w;
  link.gain_mm = channel_gain(terminal.distance_m, du.mmwave_band_ghz * 1e9, du.mmwave_gain_dbi, terminal.antenna_gain_dbi);
  link.gain_md = channel_gain(terminal.distance_m, du.mid_band_ghz * 1e9, du.mid_gain_dbi, terminal.antenna_gain_dbi);
  const double mid_snr = mcs_table()[static_cast<std::size_t>(mid_table_mcs_index())].snr_threshold;
  link.initial_power_w = terminal.initial_rb_power_w.value_or(power_for_snr(mid_snr, link.gain_mm, link.noise_power_w));
  return link;
}

double rb_utilization(const AllocationDecision& decision) noexcept {
  if (decision.config.rb_budget <= 0) return 0.0;
  return static_cast<double>(decision.rbs_used) / decision.config.rb_budget;
}

namespace {

struct Work {
  std::size_t v;
  int beta;
};

}  // namespace

AllocationDecision allocate(const DuConfig& config, std::span<const TerminalLink> links,
                            std::span<const double> demands_bps, const AllocateOptions& opts,
                            std::span<const double> previous_power_w) {
  if (links.size() != demands_bps.size()) throw ValidationError("allocate: one demand per terminal is required");
  const auto table = mcs_table();
  const int top = static_cast<int>(table.size()) - 1;
  const int fixed = opts.fixed_mcs >= 0 ? opts.fixed_mcs : mid_table_mcs_index();
  const Band band = config.band;

  AllocationDecision out;
  out.band = BandChoice::of(band);
  out.config = config;
  out.terminals.resize(links.size());

  std::vector<Work> work;
  for (std::size_t v = 0; v < links.size(); ++v) {
    auto& t = out.terminals[v];
    t.terminal_id = links[v].terminal_id;
    t.demand_bps = demands_bps[v];
    if (demands_bps[v] < 0.0) throw ValidationError("negative demand for terminal '" + t.terminal_id + "'");
    out.offered_bps += demands_bps[v];
    if (demands_bps[v] == 0.0) {
      t.served = true;
      continue;
    }
    const auto& entry = table[static_cast<std::size_t>(opts.adaptive ? top : fixed)];
    int beta = rbs_for_mcs(entry, config.params, demands_bps[v]);
    if (opts.adaptive) beta = std::max(beta, rbs_required_bps(demands_bps[v], config.params));
    work.push_back({v, beta});
  }
  std::stable_sort(work.begin(), work.end(), [&](const Work& a, const Work& b) {
    if (a.beta != b.beta) return a.beta < b.beta;
    return links[a.v].terminal_id < links[b.v].terminal_id;
  });

  const int budget = config.rb_budget;
  std::vector<std::size_t> served;
  int used = 0;
  for (const auto& w : work) {
    if (used + w.beta > budget) break;
    used += w.beta;
    served.push_back(w.v);
  }
  for (std::size_t i = served.size(); i < work.size(); ++i) ++out.unserved;

  std::vector<int> mcs(links.size(), -1);
  std::vector<int> rbs(links.size(), 0);
  auto power_at = [&](std::size_t v, int i) {
    return power_for_snr(table[static_cast<std::size_t>(i)].snr_threshold, links[v].gain(band), links[v].noise_power_w);
  };

  if (opts.adaptive && !served.empty()) {
    // need[v][i] for i <= start, computed lazily.
    std::vector<std::vector<int>> need(links.size());
    auto need_at = [&](std::size_t v, int i) {
      auto& row = need[v];
      if (row.empty()) row.assign(table.size(), -1);
      int& n = row[static_cast<std::size_t>(i)];
      if (n < 0) n = rbs_for_mcs(table[static_cast<std::size_t>(i)], config.params, demands_bps[v]);
      return n;
    };
    int start = top;
    for (int i = 0; i <= top; ++i) {
      long total = 0;
      for (std::size_t v : served) total += need_at(v, i);
      if (total <= budget) {
        start = i;
        break;
      }
    }
    used = 0;
    for (std::size_t v : served) {
      mcs[v] = start;
      rbs[v] = need_at(v, start);
      used += rbs[v];
    }
    while (true) {
      double best_ratio = -1.0;
      std::size_t best_v = links.size();
      for (std::size_t v : served) {
        if (mcs[v] <= 0) continue;
        const int extra = need_at(v, mcs[v] - 1) - rbs[v];
        if (used + extra > budget) continue;
        const double saving = power_at(v, mcs[v]) - power_at(v, mcs[v] - 1);
        const double ratio = extra <= 0 ? std::numeric_limits<double>::infinity() : saving / extra;
        if (ratio > best_ratio) {
          best_ratio = ratio;
          best_v = v;
        }
      }
      if (best_v == links.size()) break;
      const int extra = need_at(best_v, mcs[best_v] - 1) - rbs[best_v];
      --mcs[best_v];
      rbs[best_v] += extra;
      used += extra;
    }
  } else {
    for (std::size_t v : served) {
      mcs[v] = fixed;
      rbs[v] = rbs_for_mcs(table[static_cast<std::size_t>(fixed)], config.params, demands_bps[v]);
    }
  }

  for (std::size_t v : served) {
    auto& t = out.terminals[v];
    const double target = table[static_cast<std::size_t>(mcs[v])].snr_threshold;
    if (opts.adaptive) {
      double p = v < previous_power_w.size() && previous_power_w[v] > 0.0 ? previous_power_w[v] : links[v].initial_power_w;
      if (!(p > 0.0)) p = power_at(v, mcs[v]);
      const double measured = snr({links[v].gain(band), p, links[v].noise_power_w});
      t.power_w = update_tx_power(p, measured, target, 1, 1);
    } else {
      t.power_w = power_at(v, mcs[v]);
    }
    t.served = true;
    t.mcs_index = mcs[v];
    t.rbs = rbs[v];
  }

  // Shed the most power-hungry terminals until the DU cap holds.
  double total = 0.0;
  for (std::size_t v : served) total += out.terminals[v].power_w;
  while (total > opts.power_cap_w && !served.empty()) {
    auto it = std::max_element(served.begin(), served.end(), [&](std::size_t a, std::size_t b) {
      return out.terminals[a].power_w < out.terminals[b].power_w;
    });
    auto& t = out.terminals[*it];
    total -= t.power_w;
    t = TerminalAllocation{t.terminal_id, false, 0, -1, 0.0, 0.0, t.demand_bps, 0.0};
    ++out.unserved;
    out.power_capped = true;
    served.erase(it);
  }

  for (std::size_t v = 0; v < links.size(); ++v) {
    auto& t = out.terminals[v];
    if (!t.served || t.rbs == 0) continue;
    t.snr = snr({links[v].gain(band), t.power_w, links[v].noise_power_w});
    t.achieved_bps = shannon_rate(effective_bandwidth_hz(config.params, t.rbs), t.snr);
    out.rbs_used += t.rbs;
    out.total_power_w += t.power_w;
    out.served_bps += t.demand_bps;
  }
  return out;
}

double traffic_load(BandChoice y, BandRates mm, BandRates md) {
  const double service = y.y_md * md.service_bps + y.y_mm * mm.service_bps;
  if (!(service > 0.0)) throw LoadUndefined("traffic load undefined with zero service rate");
  return (y.y_md * md.arrival_bps + y.y_mm * mm.arrival_bps) / service;
}

void UtilizationTracker::record(const AllocationDecision& decision) {
  auto& r = decision.band.band() == Band::MmWave ? mm_ : md_;
  r.arrival_bps = (1.0 - alpha_) * r.arrival_bps + alpha_ * decision.offered_bps;
  r.service_bps = (1.0 - alpha_) * r.service_bps + alpha_ * decision.served_bps;
  last_ = decision.band;
  double rho = 0.0;
  if (r.service_bps > 0.0) {
    rho = traffic_load(last_, mm_, md_);
  } else if (r.arrival_bps > 0.0) {
    rho = 2.0;
  }
  gamma_sum_ += rb_utilization(decision);
  rho_sum_ += rho;
  ++samples_;
}

double UtilizationTracker::mean_gamma() const noexcept { return samples_ ? gamma_sum_ / samples_ : 0.0; }

double UtilizationTracker::mean_rho() const noexcept { return samples_ ? rho_sum_ / samples_ : 0.0; }

void UtilizationTracker::reset_window() noexcept {
  gamma_sum_ = 0.0;
  rho_sum_ = 0.0;
  samples_ = 0;
}

int update_rb_budget(double gamma_bar, double rho_bar, int beta) {
  if (gamma_bar < 0.0 || gamma_bar > 1.0 || rho_bar < 0.0) throw ValidationError("utilization out of range");
  return static_cast<int>(std::floor((gamma_bar + rho_bar) / 2.0 * beta));
}

NumerologyEntry reselect_numerology(const NumerologyTable& table, int mu, int current_rbs, int target_rbs) {
  const auto entries = table.entries_for(mu);
  if (entries.empty()) throw LookupError("no entries for numerology " + std::to_string(mu));
  if (target_rbs > current_rbs) {
    for (const auto& e : entries) {
      if (e.rbs >= target_rbs) return e;
    }
    return entries.back();
  }
  if (target_rbs < current_rbs) {
    for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
      if (it->rbs <= target_rbs) return *it;
    }
    return entries.front();
  }
  for (const auto& e : entries) {
    if (e.rbs == current_rbs) return e;
  }
  return entries.front();
}

namespace {

// -1: a better, 0: tie, 1: b better. Objective is (unserved, power).
int compare(const AllocationDecision& a, const AllocationDecision& b, double tol) {
  if (a.unserved != b.unserved) return a.unserved < b.unserved ? -1 : 1;
  const double scale = std::max({std::abs(a.total_power_w), std::abs(b.total_power_w), 1e-300});
  if (a.total_power_w < b.total_power_w - tol * scale) return -1;
  if (a.total_power_w > b.total_power_w + tol * scale) return 1;
  return 0;
}

std::optional<NumerologyEntry> next_larger(const NumerologyTable& table, const DuConfig& cur) {
  const double cap = static_cast<double>(cur.rb_budget) * 15e3 * std::ldexp(1.0, cur.mu) * 12.0;
  std::optional<NumerologyEntry> best;
  for (const auto& e : table.entries()) {
    if (e.rb_bandwidth_hz() <= cap * (1.0 + 1e-12)) continue;
    if (!best || e.rb_bandwidth_hz() < best->rb_bandwidth_hz()) best = e;
  }
  return best;
}

}  // namespace

DmcpResult dmcp_iterate(DmcpState& state, BandState availability, std::span<const TerminalLink> links,
                        std::span<const double> demands_bps, double gamma_bar, double rho_bar,
                        const AllocateOptions& alloc, const CarrierSettings& carrier, const DmcpOptions& opts,
                        std::span<const double> previous_power_w) {
  const bool mm_ok = availability == BandState::BothAvailable;
  if (!mm_ok) state.band = Band::MidBand;
  auto cfg = [&](Band b) -> DuConfig& { return b == Band::MmWave ? state.mm : state.md; };
  auto eval = [&](const DuConfig& c) { return allocate(c, links, demands_bps, alloc, previous_power_w); };

  DmcpResult res;
  AllocationDecision best = eval(cfg(state.band));
  res.answer_table.push_back({0, best.band, best.config, best.unserved, best.total_power_w});

  for (int it = 1; it <= opts.max_iters; ++it) {
    const AllocationDecision prev = best;
    // y-block
    if (mm_ok) {
      const Band other = state.band == Band::MmWave ? Band::MidBand : Band::MmWave;
      AllocationDecision alt = eval(cfg(other));
      const int c = compare(alt, best, opts.tol);
      if (c < 0 || (c == 0 && other == Band::MmWave)) {
        state.band = other;
        best = std::move(alt);
      }
    }
    // z-block
    const auto& table = numerology_for(state.band);
    DuConfig& cur = cfg(state.band);
    std::vector<DuConfig> candidates;
    const int target = update_rb_budget(std::clamp(gamma_bar, 0.0, 1.0), std::max(rho_bar, 0.0), cur.rb_budget);
    candidates.push_back(make_config(state.band, reselect_numerology(table, cur.mu, cur.rb_budget, target), carrier));
    if (auto e = next_larger(table, cur)) candidates.push_back(make_config(state.band, *e, carrier));
    for (const auto& c : candidates) {
      if (c == cur) continue;
      AllocationDecision alt = eval(c);
      const int cmp = compare(alt, best, opts.tol);
      if (cmp < 0 || (cmp == 0 && c.capacity_bps() < best.config.capacity_bps())) {
        cur = c;
        best = std::move(alt);
      }
    }
    res.iterations = it;
    res.answer_table.push_back({it, best.band, best.config, best.unserved, best.total_power_w});
    if (compare(best, prev, opts.tol) == 0) {
      res.converged = true;
      break;
    }
  }
  res.warning = !res.converged || best.unserved > 0;
  res.decision = std::move(best);
  return res;
}

std::string_view to_string(IabMode m) noexcept {
  switch (m) {
    case IabMode::Adaptive: return "adaptive";
    case IabMode::Fixed: return "fixed";
    default: return "off";
  }
}

DuAllocator::DuAllocator(IabDu du, const CarrierSettings& carrier, std::vector<TerminalLink> links, IabMode mode,
                         DmcpOptions opts)
    : du_(std::move(du)), carrier_(carrier), links_(std::move(links)), mode_(mode), opts_(opts) {
  state_.mm = initial_config(Band::MmWave, carrier_);
  state_.md = initial_config(Band::MidBand, carrier_);
  state_.band = Band::MmWave;
  power_.assign(links_.size(), 0.0);
}

AllocationDecision DuAllocator::step(std::span<const double> demands_bps, BandState availability) {
  AllocateOptions alloc;
  alloc.power_cap_w = du_.power_cap_w;
  if (mode_ == IabMode::Disabled) {
    AllocationDecision d;
    d.du_id = du_.id;
    return d;
  }
  AllocationDecision d;
  if (mode_ == IabMode::Fixed) {
    alloc.adaptive = false;
    const Band band = select_band({du_.availability.phi, availability}).band();
    d = allocate(fixed_config(band, carrier_), links_, demands_bps, alloc);
  } else {
    const double gamma = tracker_.mean_gamma();
    const double rho = tracker_.mean_rho();
    tracker_.reset_window();
    last_dmcp_ = dmcp_iterate(state_, availability, links_, demands_bps, gamma, rho, alloc, carrier_, opts_, power_);
    d = last_dmcp_.decision;
    tracker_.record(d);
    for (std::size_t v = 0; v < links_.size(); ++v) {
      if (d.terminals[v].power_w > 0.0) power_[v] = d.terminals[v].power_w;
    }
  }
  d.du_id = du_.id;
  return d;
}

void write_allocation_log(std::ostream& out, std::uint64_t tick, const AllocationDecision& decision) {
  char buf[64];
  for (const auto& t : decision.terminals) {
    std::snprintf(buf, sizeof buf, "%.9g", t.power_w);
    out << tick << ' ' << decision.du_id << ' ' << t.terminal_id << ' ' << to_string(decision.config.band) << ' '
        << t.rbs << ' ' << t.mcs_index << ' ' << buf << '\n';
  }
}

}  // namespace fwa
