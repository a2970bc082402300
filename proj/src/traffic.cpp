#include "fwa/traffic.hpp"

#include <cstdio>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "fwa/error.hpp"

namespace fwa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

}  // namespace

std::size_t CountTrace::row_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : sites) n += s.counts.size();
  return n;
}

const SiteSeries* CountTrace::find(std::string_view site) const noexcept {
  for (const auto& s : sites) {
    if (s.site_id == site) return &s;
  }
  return nullptr;
}

CountTrace parse_trace(std::istream& in, const std::string& name, std::int64_t default_resolution_s) {
  struct Rows {
    std::vector<std::int64_t> ts;
    std::vector<std::int64_t> counts;
  };
  std::vector<std::string> order;
  std::map<std::string, Rows, std::less<>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_csv(t);
    if (fields.size() != 3) throw ParseError(name, lineno, "expected 3 columns timestamp,site_id,count");
    std::int64_t ts = 0;
    if (!parse_int(fields[0], ts)) {
      if (!seen_data && fields[0] == "timestamp" && fields[1] == "site_id" && fields[2] == "count") {
        seen_data = true;
        continue;
      }
      throw ParseError(name, lineno, "timestamp '" + std::string(fields[0]) + "' is not an integer");
    }
    seen_data = true;
    if (fields[1].empty()) throw ParseError(name, lineno, "empty site_id");
    std::int64_t count = 0;
    if (!parse_int(fields[2], count)) throw ParseError(name, lineno, "count '" + std::string(fields[2]) + "' is not an integer");
    if (count < 0) throw ParseError(name, lineno, "negative count");
    auto it = rows.find(fields[1]);
    if (it == rows.end()) {
      order.emplace_back(fields[1]);
      it = rows.emplace(std::string(fields[1]), Rows{}).first;
    }
    auto& r = it->second;
    if (!r.ts.empty() && ts <= r.ts.back()) {
      throw ParseError(name, lineno, "non-increasing timestamp for site '" + it->first + "'");
    }
    r.ts.push_back(ts);
    r.counts.push_back(count);
  }

  CountTrace trace;
  if (order.empty()) throw ParseError(name, 0, "trace has no data rows");
  std::int64_t res = 0;
  for (const auto& [id, r] : rows) {
    for (std::size_t i = 1; i < r.ts.size(); ++i) {
      const auto d = r.ts[i] - r.ts[i - 1];
      res = res == 0 ? d : std::min(res, d);
    }
  }
  trace.resolution_s = res == 0 ? default_resolution_s : res;
  trace.start = rows.find(order.front())->second.ts.front();
  for (const auto& id : order) {
    const auto& r = rows.find(id)->second;
    if (r.ts.front() != trace.start) throw ParseError(name, 0, "site '" + id + "' starts at a different timestamp");
    for (std::size_t i = 1; i < r.ts.size(); ++i) {
      if (r.ts[i] - r.ts[i - 1] != trace.resolution_s) {
        throw ParseError(name, 0, "site '" + id + "' is not on a regular " + std::to_string(trace.resolution_s) + " s grid");
      }
    }
    if (!trace.sites.empty() && r.counts.size() != trace.sites.front().counts.size()) {
      throw ParseError(name, 0, "site '" + id + "' has a different number of rows");
    }
    trace.sites.push_back({id, r.counts});
  }
  return trace;
}

CountTrace load_trace(const std::filesystem::path& path, std::int64_t default_resolution_s) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace '" + path.string() + "'");
  return parse_trace(in, path.string(), default_resolution_s);
}

void write_trace(std::ostream& out, const CountTrace& trace) {
  out << "timestamp,site_id,count\n";
  for (std::size_t t = 0; t < trace.length(); ++t) {
    const auto ts = trace.start + static_cast<std::int64_t>(t) * trace.resolution_s;
    for (const auto& s : trace.sites) out << ts << ',' << s.site_id << ',' << s.counts[t] << '\n';
  }
}

CountTrace augment(const CountTrace& trace, std::uint64_t seed, const AugmentOptions& opts) {
  if (opts.target_resolution_s <= 0 || trace.resolution_s % opts.target_resolution_s != 0) {
    throw ValidationError("trace resolution must be a multiple of the target resolution");
  }
  if (opts.jitter_sigma < 0.0) throw ValidationError("jitter sigma must be nonnegative");
  const auto n = static_cast<std::size_t>(trace.resolution_s / opts.target_resolution_s);
  const std::size_t windows = trace.length();
  CountTrace out;
  out.start = trace.start;
  out.resolution_s = opts.target_resolution_s;
  std::vector<double> v(n);
  std::vector<std::pair<double, std::size_t>> frac(n);
  for (std::size_t s = 0; s < trace.sites.size(); ++s) {
    const auto& src = trace.sites[s];
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = opts.jitter_sigma;
    SiteSeries dst{src.site_id, std::vector<std::int64_t>(windows * n)};
    auto mean = [&](std::ptrdiff_t w) {
      w = std::clamp<std::ptrdiff_t>(w, 0, static_cast<std::ptrdiff_t>(windows) - 1);
      return static_cast<double>(src.counts[static_cast<std::size_t>(w)]) / static_cast<double>(n);
    };
    for (std::size_t w = 0; w < windows; ++w) {
      const std::int64_t total = src.counts[w];
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double pos = static_cast<double>(w) + (static_cast<double>(j) + 0.5) / static_cast<double>(n) - 0.5;
        const double lo = std::floor(pos);
        const double a = pos - lo;
        const auto wl = static_cast<std::ptrdiff_t>(lo);
        double value = (1.0 - a) * mean(wl) + a * mean(wl + 1);
        if (sigma > 0.0) value *= std::exp(sigma * normal(rng) - 0.5 * sigma * sigma);
        v[j] = value;
        sum += value;
      }
      if (total == 0) continue;
      if (!(sum > 0.0)) {
        std::fill(v.begin(), v.end(), 1.0);
        sum = static_cast<double>(n);
      }
      std::int64_t assigned = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double x = static_cast<double>(total) * v[j] / sum;
        const double fl = std::floor(x);
        dst.counts[w * n + j] = static_cast<std::int64_t>(fl);
        assigned += static_cast<std::int64_t>(fl);
        frac[j] = {x - fl, j};
      }
      auto remaining = total - assigned;
      if (remaining > 0) {
        std::stable_sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t k = 0; remaining > 0; k = (k + 1) % n, --remaining) ++dst.counts[w * n + frac[k].second];
      } else {
        // Float rounding can overshoot; take back from the smallest fractions.
        std::stable_sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 0; remaining < 0; k = (k + 1) % n) {
          auto& c = dst.counts[w * n + frac[k].second];
          if (c > 0) {
            --c;
            ++remaining;
          }
        }
      }
    }
    out.sites.push_back(std::move(dst));
  }
  return out;
}

DemandSeries::DemandSeries(const CountTrace& trace, double packet_bits, std::vector<SiteMapping> mapping)
    : mapping_(std::move(mapping)), resolution_s_(static_cast<double>(trace.resolution_s)) {
  if (!(packet_bits > 0.0)) throw ValidationError("packet size must be positive");
  std::map<std::string, double, std::less<>> share_sum;
  std::map<std::string, std::size_t, std::less<>> slot;
  for (const auto& m : mapping_) {
    if (m.share < 0.0 || m.share > 1.0) throw ValidationError("share of terminal '" + m.terminal_id + "' outside [0,1]");
    const SiteSeries* site = trace.find(m.site_id);
    if (!site) throw LookupError("terminal '" + m.terminal_id + "' maps to unknown site '" + m.site_id + "'");
    share_sum[m.site_id] += m.share;
    auto it = slot.find(m.site_id);
    if (it == slot.end()) {
      it = slot.emplace(m.site_id, site_rate_.size()).first;
      std::vector<double> rate(site->counts.size());
      for (std::size_t t = 0; t < rate.size(); ++t) {
        rate[t] = static_cast<double>(site->counts[t]) * packet_bits / resolution_s_;
      }
      site_rate_.push_back(std::move(rate));
    }
    site_of_.push_back(it->second);
  }
  for (const auto& [site, sum] : share_sum) {
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("shares of site '" + site + "' do not sum to 1");
  }
  rebuild_aggregate();
}

void DemandSeries::rebuild_aggregate() {
  const std::size_t n = site_rate_.empty() ? 0 : site_rate_.front().size();
  aggregate_.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double d = 0.0;
    for (std::size_t v = 0; v < mapping_.size(); ++v) d += terminal(v, t);
    aggregate_[t] = d;
  }
}

std::size_t DemandSeries::terminal_index(std::string_view terminal_id) const {
  for (std::size_t v = 0; v < mapping_.size(); ++v) {
    if (mapping_[v].terminal_id == terminal_id) return v;
  }
  throw LookupError("unknown terminal '" + std::string(terminal_id) + "'");
}

double DemandSeries::peak() const noexcept {
  return aggregate_.empty() ? 0.0 : *std::max_element(aggregate_.begin(), aggregate_.end());
}

DemandSeries DemandSeries::scaled(double factor) const {
  if (factor < 0.0) throw ValidationError("demand scale must be nonnegative");
  DemandSeries out = *this;
  for (auto& series : out.site_rate_) {
    for (auto& r : series) r *= factor;
  }
  out.rebuild_aggregate();
  return out;
}

DemandSeries DemandSeries::constant(std::vector<SiteMapping> mapping, std::span<const double> site_rates_bps,
                                    std::size_t ticks) {
  DemandSeries out;
  out.mapping_ = std::move(mapping);
  std::vector<std::string> sites;
  for (const auto& m : out.mapping_) {
    auto it = std::find(sites.begin(), sites.end(), m.site_id);
    if (it == sites.end()) {
      sites.push_back(m.site_id);
      it = sites.end() - 1;
    }
    out.site_of_.push_back(static_cast<std::size_t>(it - sites.begin()));
  }
  if (site_rates_bps.size() != sites.size()) throw ValidationError("one rate per distinct site is required");
  for (double r : site_rates_bps) {
    if (r < 0.0) throw ValidationError("negative site rate");
    out.site_rate_.emplace_back(ticks, r);
  }
  out.rebuild_aggregate();
  return out;
}

void DemandSeries::write_csv(std::ostream& out) const {
  out << "tick,terminal_id,bits_per_second\n";
  char buf[64];
  for (std::size_t t = 0; t < ticks(); ++t) {
    for (std::size_t v = 0; v < mapping_.size(); ++v) {
      std::snprintf(buf, sizeof buf, "%.3f", terminal(v, t));
      out << t << ',' << mapping_[v].terminal_id << ',' << buf << '\n';
    }
  }
}

DemandSeries to_demand(const CountTrace& trace, double packet_bits, std::vector<SiteMapping> mapping) {
  return DemandSeries(trace, packet_bits, std::move(mapping));
}

CountTrace synthetic_week(const SyntheticTraceOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> weight(0.85, 1.15);
  std::uniform_real_distribution<double> phase(-0.75, 0.75);
  std::normal_distribution<double> noise(0.0, 0.03);
  CountTrace trace;
  trace.start = opts.start;
  trace.resolution_s = 900;
  const std::size_t windows = opts.days * 96;
  for (std::size_t s = 0; s < opts.sites; ++s) {
    char id[16];
    std::snprintf(id, sizeof id, "S%02zu", s + 1);
    const double w = weight(rng);
    const double shift = phase(rng);
    SiteSeries series{id, std::vector<std::int64_t>(windows)};
    for (std::size_t k = 0; k < windows; ++k) {
      const double hour = std::fmod((static_cast<double>(k) * 900.0 + 450.0) / 3600.0, 24.0);
      const std::size_t day = k / 96;
      const double diurnal = 0.55 - 0.45 * std::cos(2.0 * std::numbers::pi * (hour - 4.0 - shift) / 24.0);
      const double week = (day % 7) >= 5 ? opts.weekend_factor : 1.0;
      const double rate = opts.peak_site_bps * w * diurnal * week * std::max(0.0, 1.0 + noise(rng));
      series.counts[k] = std::llround(rate * 900.0 / opts.packet_bits);
    }
    trace.sites.push_back(std::move(series));
  }
  return trace;
}

}  // namespace fwa
