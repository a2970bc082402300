#pragma once

// Count-trace ingestion, 15-minute to 1-second augmentation and conversion
// of counts to per-terminal demand.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fwa {

struct SiteSeries {
  std::string site_id;
  std::vector<std::int64_t> counts;

  friend bool operator==(const SiteSeries&, const SiteSeries&) = default;
};

// Regular-grid count trace; every site shares start and resolution.
struct CountTrace {
  std::int64_t start = 0;
  std::int64_t resolution_s = 900;
  std::vector<SiteSeries> sites;

  std::size_t length() const noexcept { return sites.empty() ? 0 : sites.front().counts.size(); }
  std::size_t row_count() const noexcept;
  const SiteSeries* find(std::string_view site) const noexcept;

  friend bool operator==(const CountTrace&, const CountTrace&) = default;
};

// Columns timestamp,site_id,count (epoch seconds). A header row is optional.
// `default_resolution_s` applies when no site has two rows.
CountTrace parse_trace(std::istream& in, const std::string& name = "<trace>", std::int64_t default_resolution_s = 900);
CountTrace load_trace(const std::filesystem::path& path, std::int64_t default_resolution_s = 900);
void write_trace(std::ostream& out, const CountTrace& trace);

struct AugmentOptions {
  double jitter_sigma = 0.1;
  std::int64_t target_resolution_s = 1;
};

// Linear interpolation of window means, seeded log-normal jitter, then
// largest-remainder rounding so each window keeps its count exactly.
CountTrace augment(const CountTrace& trace, std::uint64_t seed, const AugmentOptions& opts = {});

struct SiteMapping {
  std::string terminal_id;
  std::string site_id;
  double share = 1.0;
};

// d_v(t) = count(site(v), t) * packet_bits * share / resolution, D(t) = sum d_v.
class DemandSeries {
 public:
  DemandSeries() = default;
  DemandSeries(const CountTrace& trace, double packet_bits, std::vector<SiteMapping> mapping);

  std::size_t ticks() const noexcept { return aggregate_.size(); }
  std::size_t terminals() const noexcept { return mapping_.size(); }
  const std::vector<SiteMapping>& mapping() const noexcept { return mapping_; }
  std::size_t terminal_index(std::string_view terminal_id) const;

  double terminal(std::size_t v, std::size_t tick) const noexcept {
    return site_rate_[site_of_[v]][tick] * mapping_[v].share;
  }
  double aggregate(std::size_t tick) const noexcept { return aggregate_[tick]; }
  std::span<const double> aggregate() const noexcept { return aggregate_; }
  double resolution_s() const noexcept { return resolution_s_; }
  double peak() const noexcept;

  // Uniform scaling of every terminal's demand.
  DemandSeries scaled(double factor) const;
  // Constant demand per terminal for synthetic runs.
  static DemandSeries constant(std::vector<SiteMapping> mapping, std::span<const double> site_rates_bps,
                               std::size_t ticks);

  void write_csv(std::ostream& out) const;

 private:
  void rebuild_aggregate();

  std::vector<SiteMapping> mapping_;
  std::vector<std::size_t> site_of_;
  std::vector<std::vector<double>> site_rate_;
  std::vector<double> aggregate_;
  double resolution_s_ = 1.0;
};

// Throws LookupError for a terminal mapped to a site absent from the trace.
DemandSeries to_demand(const CountTrace& trace, double packet_bits, std::vector<SiteMapping> mapping);

struct SyntheticTraceOptions {
  std::size_t sites = 8;
  std::size_t days = 7;
  std::int64_t start = 1704067200;  // Monday 2024-01-01 00:00 UTC
  double peak_site_bps = 300e6;
  double packet_bits = 12000.0;
  double weekend_factor = 0.8;
  std::uint64_t seed = 2024;
};

// Diurnal weekly 900 s trace used as the bundled dataset.
CountTrace synthetic_week(const SyntheticTraceOptions& opts = {});

}  // namespace fwa
