#pragma once

// Output files: provenance headers, per-tick metrics, transition logs, run
// summaries, comparison tables and solver reports.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fwa/dual.hpp"
#include "fwa/sim.hpp"

namespace fwa {

std::uint64_t fnv1a64(std::string_view data) noexcept;
std::string_view code_version() noexcept;

struct Provenance {
  std::string config_hash;  // 16 hex digits
  std::uint64_t seed = 0;
  std::string version;
  // Invocation settings echoed verbatim, in order.
  std::vector<std::pair<std::string, std::string>> settings;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

Provenance make_provenance(std::string_view config_text, std::uint64_t seed,
                           std::vector<std::pair<std::string, std::string>> settings = {});

// `# provenance version=... config_hash=... seed=...` then one
// `# setting key=value` line per setting.
void write_header(std::ostream& out, const Provenance& prov);
// Reads the leading `#` lines back. Throws ParseError when absent.
Provenance read_header(std::istream& in, const std::string& name = "<header>");

// Columns: tick, demand_bps, delivered_bps, power_w.<node>...,
// delivered_bps.<node>..., du_power_w.<du>..., energy_efficiency, satisfied,
// in_grace. energy_efficiency is empty where undefined.
void write_metrics_csv(std::ostream& out, const RunReport& report, const Provenance& prov);
// `tick node_id radio_id from action to` per line.
void write_transitions(std::ostream& out, const RunReport& report, const Provenance& prov);
void write_summary_json(std::ostream& out, const RunReport& report, const Provenance& prov);

void write_comparison_csv(std::ostream& out, const ComparisonTable& table, const Provenance& prov);
void write_comparison_json(std::ostream& out, const ComparisonTable& table, const Provenance& prov);
// Fixed-width text table for terminals.
std::string format_comparison(const ComparisonTable& table);

void write_solver_report_json(std::ostream& out, const DualInstance& inst, const DualSolution& sol,
                              const Provenance& prov);

// Writes through a temporary sibling and renames, so readers never see a
// partial file.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

// Digest of every *summary.json under `dir`, one row per file.
std::string summarize_outputs(const std::filesystem::path& dir);

}  // namespace fwa
