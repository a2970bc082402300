#pragma once

// Embedded 5G NR lookup tables: maximum RB counts per (numerology, channel
// bandwidth) and the 256QAM MCS table with SNR thresholds.

#include <span>
#include <vector>

namespace fwa {

struct NumerologyEntry {
  int mu = 0;
  double bandwidth_mhz = 0.0;
  int rbs = 0;

  double subcarrier_spacing_hz() const noexcept;
  // Bits-carrying capacity proxy: RBs x SCS. Used to order entries across
  // numerologies.
  double rb_bandwidth_hz() const noexcept;

  friend bool operator==(const NumerologyEntry&, const NumerologyEntry&) = default;
};

class NumerologyTable {
 public:
  NumerologyTable() = default;
  explicit NumerologyTable(std::vector<NumerologyEntry> entries);

  // Max RB count for (mu, bandwidth). Throws LookupError when absent.
  int lookup(int mu, double bandwidth_mhz) const;
  const NumerologyEntry* find(int mu, double bandwidth_mhz) const noexcept;

  std::span<const NumerologyEntry> entries() const noexcept { return entries_; }
  std::vector<NumerologyEntry> entries_for(int mu) const;
  int min_numerology() const;
  const NumerologyEntry& smallest() const;
  const NumerologyEntry& largest() const;

  // For every mu: larger bandwidth never yields fewer RBs.
  bool is_monotone() const noexcept;

 private:
  std::vector<NumerologyEntry> entries_;
};

// FR1 (sub-6 GHz, mid-band) and FR2 (mmWave) transmission-bandwidth tables.
const NumerologyTable& fr1_numerology();
const NumerologyTable& fr2_numerology();

struct McsEntry {
  int index = 0;
  int modulation_order = 2;
  double code_rate = 0.0;  // fraction, not x1024
  double snr_threshold_db = 0.0;
  double snr_threshold = 0.0;  // linear

  double spectral_efficiency() const noexcept { return modulation_order * code_rate; }
};

std::span<const McsEntry> mcs_table();
// Index used for the mid-table MCS (initial power, fixed baseline).
int mid_table_mcs_index();

}  // namespace fwa
