// Writes the synthetic diurnal weekly count trace (timestamp,site_id,count).

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fwa/traffic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic weekly count trace", "gen_trace"};
  fwa::SyntheticTraceOptions opts;
  std::string out;
  app.add_option("--out", out, "Output CSV (default stdout)");
  app.add_option("--seed", opts.seed, "RNG seed")->capture_default_str();
  app.add_option("--sites", opts.sites, "Number of sites")->capture_default_str();
  app.add_option("--days", opts.days, "Number of days")->capture_default_str();
  app.add_option("--peak-site-bps", opts.peak_site_bps, "Peak per-site demand (bit/s)")->capture_default_str();
  app.add_option("--packet-bits", opts.packet_bits, "Bits per counted packet")->capture_default_str();
  app.add_option("--weekend-factor", opts.weekend_factor, "Weekend demand scale")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const auto trace = fwa::synthetic_week(opts);
  if (out.empty()) {
    fwa::write_trace(std::cout, trace);
  } else {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "cannot write " << out << '\n';
      return 3;
    }
    fwa::write_trace(f, trace);
  }
  return 0;
}
