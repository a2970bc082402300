#include "fwa/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fwa/error.hpp"

namespace fwa {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double v, const char* f = "%.10g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Json provenance_json(const Provenance& p) {
  Json j;
  j["version"] = p.version;
  j["config_hash"] = p.config_hash;
  j["seed"] = p.seed;
  Json s = Json::array();
  for (const auto& [k, v] : p.settings) s.push_back(k + "=" + v);
  j["settings"] = std::move(s);
  return j;
}

Json states_json(const std::vector<RadioState>& states) {
  Json a = Json::array();
  for (auto s : states) a.push_back(std::string(to_string(s)));
  return a;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string_view code_version() noexcept { return FWA_VERSION; }

Provenance make_provenance(std::string_view config_text, std::uint64_t seed,
                           std::vector<std::pair<std::string, std::string>> settings) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config_text)));
  return {buf, seed, std::string(code_version()), std::move(settings)};
}

void write_header(std::ostream& out, const Provenance& prov) {
  out << "# provenance version=" << prov.version << " config_hash=" << prov.config_hash << " seed=" << prov.seed << '\n';
  for (const auto& [k, v] : prov.settings) out << "# setting " << k << '=' << v << '\n';
}

Provenance read_header(std::istream& in, const std::string& name) {
  Provenance p;
  std::string line;
  std::size_t lineno = 0;
  bool seen = false;
  while (in.peek() == '#' && std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line.substr(1));
    std::string kind;
    ls >> kind;
    if (kind == "provenance") {
      std::string tok;
      while (ls >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError(name, lineno, "malformed provenance field '" + tok + "'");
        const auto key = tok.substr(0, eq);
        const auto value = tok.substr(eq + 1);
        if (key == "version") p.version = value;
        else if (key == "config_hash") p.config_hash = value;
        else if (key == "seed") p.seed = std::stoull(value);
      }
      seen = true;
    } else if (kind == "setting") {
      std::string rest;
      std::getline(ls >> std::ws, rest);
      const auto eq = rest.find('=');
      if (eq == std::string::npos) throw ParseError(name, lineno, "malformed setting line");
      p.settings.emplace_back(rest.substr(0, eq), rest.substr(eq + 1));
    }
  }
  if (!seen) throw ParseError(name, lineno + 1, "missing provenance header");
  return p;
}

void write_metrics_csv(std::ostream& out, const RunReport& r, const Provenance& prov) {
  write_header(out, prov);
  out << "tick,demand_bps,delivered_bps";
  for (const auto& id : r.node_ids) out << ",power_w." << id;
  for (const auto& id : r.node_ids) out << ",delivered_bps." << id;
  for (const auto& id : r.du_ids) out << ",du_power_w." << id;
  out << ",energy_efficiency,satisfied,in_grace\n";
  for (std::size_t t = 0; t < r.demand_bps.size(); ++t) {
    out << t << ',' << num(r.demand_bps[t]) << ',' << num(r.delivered_bps[t]);
    for (const auto& col : r.node_power_w) out << ',' << num(col[t]);
    for (const auto& col : r.node_delivered_bps) out << ',' << num(col[t]);
    for (const auto& col : r.du_power_w) out << ',' << num(col[t]);
    out << ',';
    if (!std::isnan(r.energy_efficiency[t])) out << num(r.energy_efficiency[t]);
    out << ',' << int(r.satisfied[t]) << ',' << int(r.in_grace[t]) << '\n';
  }
}

void write_transitions(std::ostream& out, const RunReport& r, const Provenance& prov) {
  write_header(out, prov);
  for (const auto& t : r.transitions) {
    out << t.tick << ' ' << t.node_id << ' ' << t.radio_id << ' ' << to_string(t.from) << ' ' << to_string(t.action)
        << ' ' << to_string(t.to) << '\n';
  }
}

void write_summary_json(std::ostream& out, const RunReport& r, const Provenance& prov) {
  Json j;
  j["provenance"] = provenance_json(prov);
  j["policy"] = std::string(to_string(r.policy));
  j["iab_mode"] = std::string(to_string(r.iab_mode));
  j["horizon_ticks"] = r.horizon;
  j["dt_s"] = r.dt_s;
  j["energy_j"] = {{"headline", r.headline_energy_j},
                   {"microwave", r.microwave_energy_j},
                   {"iab", r.iab_energy_j},
                   {"total", r.total_energy_j}};
  Json nodes = Json::array();
  for (const auto& n : r.nodes) {
    nodes.push_back({{"id", n.node_id},
                     {"energy_j", n.energy_j},
                     {"state_energy_j", n.state_energy_j},
                     {"moisture_energy_j", n.moisture_energy_j},
                     {"monitoring_energy_j", n.monitoring_energy_j},
                     {"transitions", n.transitions},
                     {"initial_states", states_json(n.initial_states)},
                     {"final_states", states_json(n.final_states)}});
  }
  j["nodes"] = std::move(nodes);
  Json dus = Json::array();
  for (const auto& d : r.dus) {
    dus.push_back({{"id", d.du_id},
                   {"energy_j", d.energy_j},
                   {"offered_bits", d.offered_bits},
                   {"served_bits", d.served_bits},
                   {"unserved_terminal_ticks", d.unserved_terminal_ticks},
                   {"mid_only_ticks", d.mid_only_ticks},
                   {"dmcp_warnings", d.dmcp_warnings}});
  }
  j["dus"] = std::move(dus);
  j["satisfaction"] = {{"raw", r.satisfaction_raw},
                       {"grace_excluded", r.satisfaction_grace},
                       {"grace_ticks", r.grace_ticks},
                       {"satisfied_ticks", r.satisfied_ticks}};
  j["infeasible_ticks"] = r.infeasible_ticks;
  j["infeasible"] = r.infeasible;
  j["delivered_bits"] = r.delivered_bits;
  j["mean_energy_efficiency_bit_per_j"] = r.mean_energy_efficiency;
  j["violations"] = {{"on_floor", r.violations.on_floor},
                     {"whitelist", r.violations.whitelist},
                     {"rb_budget", r.violations.rb_budget},
                     {"power_cap", r.violations.power_cap},
                     {"dwell", r.violations.dwell}};
  j["dual"] = {{"solves", r.dual.solves}, {"lookups", r.dual.lookups}, {"warnings", r.dual.warnings}};
  out << j.dump(2) << '\n';
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table, const Provenance& prov) {
  write_header(out, prov);
  out << "policy,headline_energy_j,microwave_energy_j,iab_energy_j,saving_vs_baseline1_j,saving_fraction,"
         "mean_energy_efficiency,satisfaction_raw,satisfaction_grace\n";
  for (const auto& row : table.rows) {
    out << to_string(row.policy) << ',' << num(row.headline_energy_j, "%.3f") << ',' << num(row.microwave_energy_j, "%.3f")
        << ',' << num(row.iab_energy_j, "%.3f") << ',' << num(row.saving_vs_baseline1_j, "%.3f") << ','
        << num(row.saving_fraction, "%.6f") << ',' << num(row.mean_energy_efficiency) << ','
        << num(row.satisfaction_raw, "%.6f") << ',' << num(row.satisfaction_grace, "%.6f") << '\n';
  }
}

void write_comparison_json(std::ostream& out, const ComparisonTable& table, const Provenance& prov) {
  Json j;
  j["provenance"] = provenance_json(prov);
  j["horizon_ticks"] = table.horizon;
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    rows.push_back({{"policy", std::string(to_string(row.policy))},
                    {"headline_energy_j", row.headline_energy_j},
                    {"microwave_energy_j", row.microwave_energy_j},
                    {"iab_energy_j", row.iab_energy_j},
                    {"saving_vs_baseline1_j", row.saving_vs_baseline1_j},
                    {"saving_fraction", row.saving_fraction},
                    {"mean_energy_efficiency", row.mean_energy_efficiency},
                    {"satisfaction_raw", row.satisfaction_raw},
                    {"satisfaction_grace", row.satisfaction_grace}});
  }
  j["rows"] = std::move(rows);
  out << j.dump(2) << '\n';
}

std::string format_comparison(const ComparisonTable& table) {
  std::ostringstream out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-10s %14s %14s %12s %9s %12s %9s %9s\n", "policy", "node MJ", "microwave MJ",
                "saving MJ", "saving %", "EE Mbit/J", "sat", "sat(g)");
  out << buf;
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%-10s %14.6f %14.6f %12.6f %9.3f %12.4f %9.5f %9.5f\n",
                  std::string(to_string(r.policy)).c_str(), r.headline_energy_j / 1e6, r.microwave_energy_j / 1e6,
                  r.saving_vs_baseline1_j / 1e6, 100.0 * r.saving_fraction, r.mean_energy_efficiency / 1e6,
                  r.satisfaction_raw, r.satisfaction_grace);
    out << buf;
  }
  return out.str();
}

void write_solver_report_json(std::ostream& out, const DualInstance& inst, const DualSolution& sol,
                              const Provenance& prov) {
  Json j;
  j["provenance"] = provenance_json(prov);
  Json radios = Json::array();
  for (const auto& r : inst.radios) {
    radios.push_back({{"capacity_bps", r.capacity_bps},
                      {"serving_w", r.serving_w},
                      {"sleep_w", r.sleep_w},
                      {"tx_power_w", r.tx_power_w},
                      {"tx_power_cap_w", r.tx_power_cap_w}});
  }
  j["instance"] = {{"demand_bps", inst.demand_bps}, {"monitoring_j", inst.monitoring.energy_j()}, {"radios", radios}};
  Json policy = Json::array();
  for (bool b : sol.policy) policy.push_back(b ? "Serving" : "DeepSleep");
  j["policy"] = std::move(policy);
  j["multipliers"] = {{"power", sol.multipliers.power}, {"rate", sol.multipliers.rate}, {"floor", sol.multipliers.floor}};
  j["dual_value_w"] = sol.dual_value;
  j["primal_value_w"] = sol.primal_value;
  j["relative_gap"] = sol.gap;
  j["feasible"] = sol.feasible;
  j["converged"] = sol.converged;
  j["warning"] = sol.warning;
  j["iterations"] = sol.iterations;
  j["complexity_bound"] = sol.complexity_bound;
  j["answer_table_size"] = sol.answer_table_size;
  j["kkt"] = {{"stationarity", sol.kkt.stationarity},
              {"complementary_slackness", sol.kkt.complementary_slackness},
              {"primal_feasibility", sol.kkt.primal_feasibility},
              {"dual_feasibility", sol.kkt.dual_feasibility},
              {"slack_power", sol.kkt.slack_power},
              {"slack_rate", sol.kkt.slack_rate},
              {"slack_floor", sol.kkt.slack_floor},
              {"stationarity_residual", sol.kkt.stationarity_residual}};
  Json traj = Json::array();
  for (const auto& it : sol.trajectory) {
    traj.push_back({{"k", it.k},
                    {"power", it.multipliers.power},
                    {"rate", it.multipliers.rate},
                    {"floor", it.multipliers.floor},
                    {"dual_value_w", it.dual_value},
                    {"primal_value_w", it.primal_value}});
  }
  j["trajectory"] = std::move(traj);
  out << j.dump(2) << '\n';
}

void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    writer(out);
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string summarize_outputs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.size() >= 12 && name.compare(name.size() - 12, 12, "summary.json") == 0) {
      files.push_back(e.path());
    }
  }
  if (files.empty()) throw ValidationError("no *summary.json files under '" + dir.string() + "'");
  std::sort(files.begin(), files.end());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-40s %-10s %8s %10s %14s %14s %9s %9s\n", "file", "policy", "seed", "ticks", "node MJ",
                "total MJ", "sat", "sat(g)");
  out << buf;
  for (const auto& f : files) {
    std::ifstream in(f);
    Json j;
    try {
      j = Json::parse(in);
      std::snprintf(buf, sizeof buf, "%-40s %-10s %8llu %10llu %14.6f %14.6f %9.5f %9.5f\n",
                    std::filesystem::relative(f, dir).string().c_str(), j.at("policy").get<std::string>().c_str(),
                    static_cast<unsigned long long>(j.at("provenance").at("seed").get<std::uint64_t>()),
                    static_cast<unsigned long long>(j.at("horizon_ticks").get<std::uint64_t>()),
                    j.at("energy_j").at("headline").get<double>() / 1e6, j.at("energy_j").at("total").get<double>() / 1e6,
                    j.at("satisfaction").at("raw").get<double>(), j.at("satisfaction").at("grace_excluded").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("'" + f.string() + "' is not a run summary: " + e.what());
    }
    out << buf;
  }
  return out.str();
}

}  // namespace fwa
