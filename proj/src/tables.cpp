#include "fwa/tables.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fwa/error.hpp"

namespace fwa {

double NumerologyEntry::subcarrier_spacing_hz() const noexcept { return 15e3 * std::ldexp(1.0, mu); }

double NumerologyEntry::rb_bandwidth_hz() const noexcept { return 12.0 * rbs * subcarrier_spacing_hz(); }

NumerologyTable::NumerologyTable(std::vector<NumerologyEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const NumerologyEntry& a, const NumerologyEntry& b) {
    return a.mu != b.mu ? a.mu < b.mu : a.bandwidth_mhz < b.bandwidth_mhz;
  });
}

const NumerologyEntry* NumerologyTable::find(int mu, double bandwidth_mhz) const noexcept {
  for (const auto& e : entries_) {
    if (e.mu == mu && std::abs(e.bandwidth_mhz - bandwidth_mhz) < 1e-9) return &e;
  }
  return nullptr;
}

int NumerologyTable::lookup(int mu, double bandwidth_mhz) const {
  if (const auto* e = find(mu, bandwidth_mhz)) return e->rbs;
  std::ostringstream msg;
  msg << "no RB entry for numerology " << mu << " at " << bandwidth_mhz << " MHz";
  throw LookupError(msg.str());
}

std::vector<NumerologyEntry> NumerologyTable::entries_for(int mu) const {
  std::vector<NumerologyEntry> out;
  for (const auto& e : entries_) {
    if (e.mu == mu) out.push_back(e);
  }
  return out;
}

int NumerologyTable::min_numerology() const {
  if (entries_.empty()) throw LookupError("empty numerology table");
  return entries_.front().mu;
}

const NumerologyEntry& NumerologyTable::smallest() const {
  if (entries_.empty()) throw LookupError("empty numerology table");
  return *std::min_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
    return a.rb_bandwidth_hz() < b.rb_bandwidth_hz();
  });
}

const NumerologyEntry& NumerologyTable::largest() const {
  if (entries_.empty()) throw LookupError("empty numerology table");
  return *std::max_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
    return a.rb_bandwidth_hz() < b.rb_bandwidth_hz();
  });
}

bool NumerologyTable::is_monotone() const noexcept {
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    const auto& prev = entries_[i - 1];
    const auto& cur = entries_[i];
    if (prev.mu == cur.mu && cur.rbs < prev.rbs) return false;
  }
  return true;
}

// Maximum transmission bandwidth configuration N_RB, 38.101-1 Table 5.3.2-1.
const NumerologyTable& fr1_numerology() {
  static const NumerologyTable table({
      {0, 10, 52},  {0, 15, 79},  {0, 20, 106}, {0, 25, 133}, {0, 30, 160}, {0, 40, 216},
      {0, 50, 270},

      {1, 10, 24},  {1, 15, 38},  {1, 20, 51},  {1, 25, 65},  {1, 30, 78},  {1, 40, 106},
      {1, 50, 133}, {1, 60, 162}, {1, 70, 189}, {1, 80, 217}, {1, 90, 245}, {1, 100, 273},

      {2, 10, 11},  {2, 15, 18},  {2, 20, 24},  {2, 25, 31},  {2, 30, 38},  {2, 40, 51},
      {2, 50, 65},  {2, 60, 79},  {2, 70, 93},  {2, 80, 107}, {2, 90, 121}, {2, 100, 135},
  });
  return table;
}

// 38.101-2 Table 5.3.2-1; mu=5 (480 kHz) rows are the FR2-2 extension.
const NumerologyTable& fr2_numerology() {
  static const NumerologyTable table({
      {2, 50, 66},
      {2, 100, 132},
      {2, 200, 264},

      {3, 50, 32},
      {3, 100, 66},
      {3, 200, 132},
      {3, 400, 264},

      {5, 400, 66},
      {5, 800, 124},
      {5, 1600, 248},
  });
  return table;
}

namespace {

struct McsRow {
  int qm;
  double rate_x1024;
  double threshold_db;
};

// 38.214 Table 5.1.3.1-2 (256QAM). Thresholds are the Shannon SNR for each
// entry's spectral efficiency, rounded up to 1e-6 dB.
constexpr McsRow kMcsRows[] = {
    {2, 120, -7.535088}, {2, 193, -5.249154}, {2, 308, -2.862079}, {2, 449, -0.775378},
    {2, 602, 1.000782},  {4, 378, 2.511146},  {4, 434, 3.499514},  {4, 490, 4.422741},
    {4, 553, 5.402835},  {4, 616, 6.335641},  {4, 658, 6.936725},  {6, 466, 7.510259},
    {6, 517, 8.551627},  {6, 567, 9.543555},  {6, 616, 10.494036}, {6, 666, 11.446614},
    {6, 719, 12.441319}, {6, 772, 13.423836}, {6, 822, 14.341891}, {6, 873, 15.271249},
    {8, 682.5, 15.941837}, {8, 711, 16.627882}, {8, 754, 17.658722}, {8, 797, 18.685434},
    {8, 841, 19.732669}, {8, 885, 20.777241}, {8, 916.5, 21.523748}, {8, 948, 22.269356},
};

std::vector<McsEntry> build_mcs_table() {
  std::vector<McsEntry> out;
  int i = 0;
  for (const auto& row : kMcsRows) {
    McsEntry e;
    e.index = i++;
    e.modulation_order = row.qm;
    e.code_rate = row.rate_x1024 / 1024.0;
    e.snr_threshold_db = row.threshold_db;
    e.snr_threshold = std::pow(10.0, row.threshold_db / 10.0);
    out.push_back(e);
  }
  return out;
}

}  // namespace

std::span<const McsEntry> mcs_table() {
  static const std::vector<McsEntry> table = build_mcs_table();
  return table;
}

int mid_table_mcs_index() { return static_cast<int>(mcs_table().size() - 1) / 2; }

}  // namespace fwa
