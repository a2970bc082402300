#include "fwa/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fwa/error.hpp"
#include "fwa/phy.hpp"

namespace fwa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Record {
 public:
  Record(std::string file, std::size_t line, std::string kind) : file_(std::move(file)), line_(line), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

  void set(std::string key, std::string value) {
    if (!fields_.emplace(key, std::move(value)).second) fail("duplicate field '" + key + "'");
  }

  bool has(const std::string& key) const { return fields_.count(key) != 0; }

  std::string str(const std::string& key) {
    auto it = fields_.find(key);
    if (it == fields_.end()) fail("missing field '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  std::string str_or(const std::string& key, std::string fallback) { return has(key) ? str(key) : fallback; }

  double num(const std::string& key) { return to_double(key, str(key)); }
  double num_or(const std::string& key, double fallback) { return has(key) ? num(key) : fallback; }
  int integer(const std::string& key) {
    const double v = num(key);
    if (v != std::floor(v)) fail("field '" + key + "' must be an integer");
    return static_cast<int>(v);
  }
  int integer_or(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

  std::vector<double> list(const std::string& key) {
    std::vector<double> out;
    std::string s = str(key);
    std::size_t pos = 0;
    while (true) {
      const auto comma = s.find(',', pos);
      out.push_back(to_double(key, s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : fields_) {
      if (!used_.count(k)) fail("unknown field '" + k + "' for '" + kind_ + "'");
    }
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(file_, line_, what); }

 private:
  double to_double(const std::string& key, const std::string& text) const {
    const auto t = trim(text);
    char* end = nullptr;
    const std::string copy(t);
    const double v = std::strtod(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(v)) {
      fail("field '" + key + "' is not a number: '" + copy + "'");
    }
    return v;
  }

  std::string file_;
  std::size_t line_;
  std::string kind_;
  std::map<std::string, std::string> fields_;
  std::set<std::string> used_;
};

Record parse_record(const std::string& file, std::size_t line, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string kind;
  in >> kind;
  Record rec(file, line, kind);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError(file, line, "expected key=value, got '" + tok + "'");
    rec.set(tok.substr(0, eq), tok.substr(eq + 1));
  }
  return rec;
}

void set_threshold(PolicyThresholds& t, const std::string& key, double v, const std::function<void(const std::string&)>& fail) {
  if (key == "sleep_threshold_bps") t.sleep_threshold_bps = v;
  else if (key == "wake_threshold_bps") t.wake_threshold_bps = v;
  else if (key == "completely_off_period_s") t.completely_off_period_s = v;
  else if (key == "rb_update_period_ms") t.rb_update_period_ms = v;
  else fail("unknown threshold '" + key + "'");
}

void set_controller(ControllerSettings& c, const std::string& key, double v, const std::function<void(const std::string&)>& fail) {
  if (key == "p_fail_startup") c.p_fail_startup = v;
  else if (key == "p_fail_wakeup") c.p_fail_wakeup = v;
  else if (key == "moisture_seconds_per_day") c.moisture_seconds_per_day = v;
  else if (key == "monitoring_energy_per_bit_j") c.monitoring_energy_per_bit_j = v;
  else fail("unknown controller setting '" + key + "'");
}

double parse_number(const std::string& text, const std::function<void(const std::string&)>& fail) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) fail("not a number: '" + text + "'");
  return v;
}

CarrierParams parse_carrier(Record& r) {
  CarrierParams p;
  p.num_carriers = r.integer_or("carriers", p.num_carriers);
  p.layers = r.integer_or("layers", p.layers);
  p.modulation_order = r.integer_or("qm", p.modulation_order);
  p.scaling = r.num_or("scaling", p.scaling);
  p.max_code_rate = r.num_or("rmax", p.max_code_rate);
  p.overhead = r.num_or("overhead", p.overhead);
  p.numerology = r.integer_or("mu", p.numerology);
  r.finish();
  return p;
}

struct PendingNode {
  MicrowaveNode node;
  std::map<std::string, double> overrides;
};

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& name) {
  Scenario sc;
  std::vector<PendingNode> nodes;
  std::vector<std::pair<std::string, RadioUnit>> radios;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  bool seen_carrier_mm = false;
  bool seen_carrier_md = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    std::string_view t = trim(std::string_view(line).substr(0, hash));
    if (t.empty()) continue;
    auto fail = [&](const std::string& what) { throw ParseError(name, lineno, what); };
    if (t.front() == '[') {
      if (t.back() != ']') fail("unterminated section header");
      section = std::string(trim(t.substr(1, t.size() - 2)));
      static const std::set<std::string> known{"scenario", "thresholds", "controller", "carrier",
                                               "nodes",    "radios",     "dus",        "terminals"};
      if (!known.count(section)) fail("unknown section [" + section + "]");
      continue;
    }
    if (section.empty()) fail("content before the first section header");

    if (section == "scenario" || section == "thresholds" || section == "controller") {
      const auto eq = t.find('=');
      if (eq == std::string_view::npos) fail("expected key = value");
      const std::string key(trim(t.substr(0, eq)));
      const std::string value(trim(t.substr(eq + 1)));
      if (section == "scenario") {
        if (key != "name") fail("unknown scenario key '" + key + "'");
        sc.name = value;
      } else if (section == "thresholds") {
        set_threshold(sc.controller.thresholds, key, parse_number(value, fail), fail);
      } else {
        set_controller(sc.controller, key, parse_number(value, fail), fail);
      }
      continue;
    }

    Record r = parse_record(name, lineno, t);
    if (section == "carrier") {
      if (r.kind() == "mmwave") {
        if (seen_carrier_mm) r.fail("duplicate mmwave carrier");
        sc.carrier.mmwave = parse_carrier(r);
        seen_carrier_mm = true;
      } else if (r.kind() == "mid") {
        if (seen_carrier_md) r.fail("duplicate mid carrier");
        sc.carrier.mid_band = parse_carrier(r);
        seen_carrier_md = true;
      } else {
        r.fail("carrier records are 'mmwave' or 'mid'");
      }
    } else if (section == "nodes") {
      if (r.kind() != "node") r.fail("expected a 'node' record");
      PendingNode p;
      p.node.id = r.str("id");
      if (r.has("upstream")) p.node.upstream_id = r.str("upstream");
      if (r.has("downstream")) p.node.downstream_id = r.str("downstream");
      for (const char* key : {"sleep_threshold_bps", "wake_threshold_bps", "completely_off_period_s", "rb_update_period_ms"}) {
        if (r.has(key)) p.overrides[key] = r.num(key);
      }
      r.finish();
      nodes.push_back(std::move(p));
    } else if (section == "radios") {
      if (r.kind() != "radio") r.fail("expected a 'radio' record");
      RadioUnit u;
      u.id = r.str("id");
      const std::string node = r.str("node");
      u.band_ghz = r.num("band_ghz");
      u.bandwidth_hz = r.num("bandwidth_hz");
      u.distance_m = r.num("distance_m");
      u.antenna_gain_tx_dbi = r.num_or("gain_tx_dbi", 0.0);
      u.antenna_gain_rx_dbi = r.num_or("gain_rx_dbi", 0.0);
      u.noise_power_w = r.num("noise_w");
      u.tx_power_w = r.num_or("tx_power_w", u.tx_power_w);
      u.tx_power_cap_w = r.num_or("tx_cap_w", u.tx_power_cap_w);
      u.startup_duration_s = r.num_or("startup_s", u.startup_duration_s);
      u.wakeup_duration_s = r.num_or("wakeup_s", u.wakeup_duration_s);
      if (r.has("power_w")) {
        const auto p = r.list("power_w");
        if (p.size() != kRadioStateCount) r.fail("power_w needs 5 values (off,sleep,startup,wakeup,serving)");
        std::copy(p.begin(), p.end(), u.power.watts.begin());
      }
      if (r.has("state")) {
        const auto s = parse_radio_state(r.str("state"));
        if (!s) r.fail("unknown radio state");
        u.state = *s;
      }
      r.finish();
      radios.emplace_back(node, std::move(u));
    } else if (section == "dus") {
      if (r.kind() != "du") r.fail("expected a 'du' record");
      IabDu du;
      du.id = r.str("id");
      const std::string kind = r.str_or("kind", "node");
      if (kind == "donor") du.kind = DuKind::Donor;
      else if (kind == "node") du.kind = DuKind::Node;
      else r.fail("du kind must be 'donor' or 'node'");
      du.availability.phi = r.num_or("phi", 1.0);
      if (r.has("band_state")) {
        const auto s = r.str("band_state");
        if (s == "both") du.availability.state = BandState::BothAvailable;
        else if (s == "mid_only") du.availability.state = BandState::MidOnly;
        else r.fail("band_state must be 'both' or 'mid_only'");
      }
      du.power_cap_w = r.num_or("power_cap_w", du.power_cap_w);
      du.mmwave_band_ghz = r.num_or("mmwave_ghz", du.mmwave_band_ghz);
      du.mid_band_ghz = r.num_or("mid_ghz", du.mid_band_ghz);
      du.mmwave_gain_dbi = r.num_or("mmwave_gain_dbi", 0.0);
      du.mid_gain_dbi = r.num_or("mid_gain_dbi", 0.0);
      r.finish();
      sc.dus.push_back(std::move(du));
    } else if (section == "terminals") {
      Terminal term;
      if (r.kind() == "cpe") {
        term.kind = TerminalKind::Cpe;
      } else if (r.kind() == "mt") {
        term.kind = TerminalKind::IabMt;
      } else {
        r.fail("terminal records are 'cpe' or 'mt'");
      }
      term.id = r.str("id");
      term.parent_du = r.str("du");
      term.distance_m = r.num("distance_m");
      if (term.kind == TerminalKind::Cpe) {
        term.site_id = r.str("site");
        term.share = r.num_or("share", 1.0);
      } else {
        term.serves_du = r.str("serves");
      }
      term.noise_power_w = r.num_or("noise_w", term.noise_power_w);
      term.antenna_gain_dbi = r.num_or("gain_dbi", 0.0);
      if (r.has("initial_power_w")) term.initial_rb_power_w = r.num("initial_power_w");
      r.finish();
      sc.terminals.push_back(std::move(term));
    }
  }

  for (auto& p : nodes) {
    p.node.thresholds = sc.controller.thresholds;
    for (const auto& [k, v] : p.overrides) {
      set_threshold(p.node.thresholds, k, v, [&](const std::string& w) { throw ValidationError(w); });
    }
    sc.nodes.push_back(std::move(p.node));
  }
  for (auto& [node_id, radio] : radios) {
    auto it = std::find_if(sc.nodes.begin(), sc.nodes.end(), [&](const MicrowaveNode& n) { return n.id == node_id; });
    if (it == sc.nodes.end()) throw ValidationError("radio '" + radio.id + "' references unknown node '" + node_id + "'");
    it->radios.push_back(std::move(radio));
  }
  validate_scenario(sc);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario '" + path.string() + "'");
  return parse_scenario(in, path.string());
}

void validate_scenario(Scenario& sc) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
  };
  const auto& c = sc.controller;
  auto check_thresholds = [&](const PolicyThresholds& t, const std::string& where) {
    require(!t.sleep_threshold_bps || *t.sleep_threshold_bps > 0.0, where + ": sleep threshold must be positive");
    require(!t.wake_threshold_bps || *t.wake_threshold_bps > 0.0, where + ": wake threshold must be positive");
    require(!(t.sleep_threshold_bps && t.wake_threshold_bps) || *t.wake_threshold_bps <= *t.sleep_threshold_bps,
            where + ": wake threshold must not exceed the sleep threshold");
    require(t.completely_off_period_s > 0.0, where + ": completely-off period must be positive");
    require(t.rb_update_period_ms > 0.0, where + ": RB update period must be positive");
  };
  check_thresholds(c.thresholds, "thresholds");
  require(c.p_fail_startup >= 0.0 && c.p_fail_startup <= 1.0, "p_fail_startup must lie in [0,1]");
  require(c.p_fail_wakeup >= 0.0 && c.p_fail_wakeup <= 1.0, "p_fail_wakeup must lie in [0,1]");
  require(c.moisture_seconds_per_day >= 0.0 && c.moisture_seconds_per_day <= kSecondsPerDay,
          "moisture_seconds_per_day must lie in [0, 86400]");
  require(c.monitoring_energy_per_bit_j >= 0.0, "monitoring energy per bit must be nonnegative");

  for (const auto* cp : {&sc.carrier.mmwave, &sc.carrier.mid_band}) {
    require(cp->num_carriers > 0 && cp->layers > 0 && cp->modulation_order > 0, "carrier counts must be positive");
    require(cp->scaling > 0.0, "carrier scaling must be positive");
    require(cp->max_code_rate > 0.0 && cp->max_code_rate <= 1.0, "carrier rmax must lie in (0,1]");
    require(cp->overhead >= 0.0 && cp->overhead < 1.0, "carrier overhead must lie in [0,1)");
    require(cp->numerology >= 0 && cp->numerology <= 6, "carrier numerology out of range");
  }

  require(!sc.nodes.empty(), "scenario needs at least one microwave node");
  std::set<std::string> node_ids;
  std::set<std::string> radio_ids;
  for (auto& n : sc.nodes) {
    require(!n.id.empty(), "node with empty id");
    require(node_ids.insert(n.id).second, "duplicate node id '" + n.id + "'");
    require(!n.radios.empty(), "node '" + n.id + "' must have >=1 radio");
    check_thresholds(n.thresholds, "node '" + n.id + "'");
    for (auto& r : n.radios) {
      const std::string where = "radio '" + r.id + "'";
      require(radio_ids.insert(r.id).second, "duplicate radio id '" + r.id + "'");
      require(r.power[RadioState::CompletelyOff] == 0.0, where + ": CompletelyOff power must be 0");
      for (double w : r.power.watts) require(w >= 0.0, where + ": power profile must be nonnegative");
      require(r.power[RadioState::DeepSleep] > 0.0, where + ": DeepSleep power must be positive");
      require(r.power[RadioState::DeepSleep] < r.power[RadioState::Serving], where + ": DeepSleep power must be below Serving");
      require(r.startup_duration_s > 0.0 && r.wakeup_duration_s > 0.0, where + ": timers must be positive");
      require(r.band_ghz > 0.0 && r.bandwidth_hz > 0.0, where + ": band and bandwidth must be positive");
      require(r.distance_m > 0.0, where + ": distance must be positive");
      require(r.noise_power_w > 0.0, where + ": noise power must be positive");
      require(r.tx_power_w >= 0.0 && r.tx_power_cap_w > 0.0, where + ": transmit power must be nonnegative, cap positive");
      r.capacity_bps = radio_capacity_bps(r);
    }
  }
  for (const auto& n : sc.nodes) {
    if (n.upstream_id) {
      const auto* up = sc.find_node(*n.upstream_id);
      require(up != nullptr, "node '" + n.id + "' has dangling upstream '" + *n.upstream_id + "'");
      require(up->downstream_id == n.id, "node '" + n.id + "' upstream link is not mirrored");
      require(up->radios.size() == n.radios.size(), "linked nodes '" + up->id + "' and '" + n.id + "' differ in radio count");
    }
    if (n.downstream_id) {
      const auto* down = sc.find_node(*n.downstream_id);
      require(down != nullptr, "node '" + n.id + "' has dangling downstream '" + *n.downstream_id + "'");
      require(down->upstream_id == n.id, "node '" + n.id + "' downstream link is not mirrored");
    }
  }
  require(sc.chain_order().size() == sc.nodes.size(), "microwave nodes must form a single chain");

  std::set<std::string> du_ids;
  std::size_t donors = 0;
  for (const auto& d : sc.dus) {
    require(du_ids.insert(d.id).second, "duplicate DU id '" + d.id + "'");
    require(d.availability.phi >= 0.0 && d.availability.phi <= 1.0, "DU '" + d.id + "': phi must lie in [0,1]");
    require(d.power_cap_w > 0.0, "DU '" + d.id + "': power cap must be positive");
    require(d.mmwave_band_ghz > 0.0 && d.mid_band_ghz > 0.0, "DU '" + d.id + "': band frequencies must be positive");
    if (d.kind == DuKind::Donor) ++donors;
  }
  require(sc.dus.empty() || donors == 1, "exactly one IAB donor is required");

  std::set<std::string> term_ids;
  std::map<std::string, std::string> parent_of;
  for (const auto& t : sc.terminals) {
    const std::string where = "terminal '" + t.id + "'";
    require(term_ids.insert(t.id).second, "duplicate terminal id '" + t.id + "'");
    require(sc.find_du(t.parent_du) != nullptr, where + " references unknown DU '" + t.parent_du + "'");
    require(t.distance_m > 0.0, where + ": distance must be positive");
    require(t.noise_power_w > 0.0, where + ": noise power must be positive");
    require(!t.initial_rb_power_w || *t.initial_rb_power_w > 0.0, where + ": initial power must be positive");
    if (t.kind == TerminalKind::Cpe) {
      require(!t.site_id.empty(), where + ": CPE needs a site");
      require(t.share >= 0.0 && t.share <= 1.0, where + ": share must lie in [0,1]");
    } else {
      const auto* child = sc.find_du(t.serves_du);
      require(child != nullptr, where + " serves unknown DU '" + t.serves_du + "'");
      require(child->kind != DuKind::Donor, where + " cannot backhaul the donor");
      require(t.serves_du != t.parent_du, where + " serves its own parent");
      require(parent_of.emplace(t.serves_du, t.parent_du).second, "DU '" + t.serves_du + "' has more than one IAB-MT");
    }
  }
  for (const auto& d : sc.dus) {
    if (d.kind == DuKind::Donor) continue;
    require(parent_of.count(d.id) == 1, "IAB node '" + d.id + "' has no IAB-MT backhaul");
    std::set<std::string> seen{d.id};
    std::string cur = d.id;
    while (parent_of.count(cur)) {
      cur = parent_of[cur];
      require(seen.insert(cur).second, "IAB topology contains a cycle at '" + d.id + "'");
    }
  }
}

void write_scenario(std::ostream& out, const Scenario& sc) {
  const auto& th = sc.controller.thresholds;
  out << "[scenario]\nname = " << sc.name << "\n\n[thresholds]\n";
  if (th.sleep_threshold_bps) out << "sleep_threshold_bps = " << fmt(*th.sleep_threshold_bps) << '\n';
  if (th.wake_threshold_bps) out << "wake_threshold_bps = " << fmt(*th.wake_threshold_bps) << '\n';
  out << "completely_off_period_s = " << fmt(th.completely_off_period_s) << '\n'
      << "rb_update_period_ms = " << fmt(th.rb_update_period_ms) << "\n\n[controller]\n"
      << "p_fail_startup = " << fmt(sc.controller.p_fail_startup) << '\n'
      << "p_fail_wakeup = " << fmt(sc.controller.p_fail_wakeup) << '\n'
      << "moisture_seconds_per_day = " << fmt(sc.controller.moisture_seconds_per_day) << '\n'
      << "monitoring_energy_per_bit_j = " << fmt(sc.controller.monitoring_energy_per_bit_j) << "\n\n[carrier]\n";
  auto carrier = [&](const char* kind, const CarrierParams& p) {
    out << kind << " carriers=" << p.num_carriers << " layers=" << p.layers << " qm=" << p.modulation_order
        << " scaling=" << fmt(p.scaling) << " rmax=" << fmt(p.max_code_rate) << " overhead=" << fmt(p.overhead)
        << " mu=" << p.numerology << '\n';
  };
  carrier("mmwave", sc.carrier.mmwave);
  carrier("mid", sc.carrier.mid_band);

  out << "\n[nodes]\n";
  for (const auto& n : sc.nodes) {
    out << "node id=" << n.id;
    if (n.upstream_id) out << " upstream=" << *n.upstream_id;
    if (n.downstream_id) out << " downstream=" << *n.downstream_id;
    const auto& t = n.thresholds;
    if (t.sleep_threshold_bps && t.sleep_threshold_bps != th.sleep_threshold_bps) out << " sleep_threshold_bps=" << fmt(*t.sleep_threshold_bps);
    if (t.wake_threshold_bps && t.wake_threshold_bps != th.wake_threshold_bps) out << " wake_threshold_bps=" << fmt(*t.wake_threshold_bps);
    if (t.completely_off_period_s != th.completely_off_period_s) out << " completely_off_period_s=" << fmt(t.completely_off_period_s);
    if (t.rb_update_period_ms != th.rb_update_period_ms) out << " rb_update_period_ms=" << fmt(t.rb_update_period_ms);
    out << '\n';
  }
  out << "\n[radios]\n";
  for (const auto& n : sc.nodes) {
    for (const auto& r : n.radios) {
      out << "radio id=" << r.id << " node=" << n.id << " band_ghz=" << fmt(r.band_ghz) << " bandwidth_hz=" << fmt(r.bandwidth_hz)
          << " distance_m=" << fmt(r.distance_m) << " gain_tx_dbi=" << fmt(r.antenna_gain_tx_dbi)
          << " gain_rx_dbi=" << fmt(r.antenna_gain_rx_dbi) << " noise_w=" << fmt(r.noise_power_w)
          << " tx_power_w=" << fmt(r.tx_power_w) << " tx_cap_w=" << fmt(r.tx_power_cap_w)
          << " startup_s=" << fmt(r.startup_duration_s) << " wakeup_s=" << fmt(r.wakeup_duration_s) << " power_w=";
      for (std::size_t k = 0; k < kRadioStateCount; ++k) out << (k ? "," : "") << fmt(r.power.watts[k]);
      if (r.state != RadioState::Serving) out << " state=" << to_string(r.state);
      out << '\n';
    }
  }
  out << "\n[dus]\n";
  for (const auto& d : sc.dus) {
    out << "du id=" << d.id << " kind=" << (d.kind == DuKind::Donor ? "donor" : "node") << " phi=" << fmt(d.availability.phi);
    if (d.availability.state != BandState::BothAvailable) out << " band_state=" << to_string(d.availability.state);
    out << " power_cap_w=" << fmt(d.power_cap_w) << " mmwave_ghz=" << fmt(d.mmwave_band_ghz)
        << " mid_ghz=" << fmt(d.mid_band_ghz) << " mmwave_gain_dbi=" << fmt(d.mmwave_gain_dbi)
        << " mid_gain_dbi=" << fmt(d.mid_gain_dbi) << '\n';
  }
  out << "\n[terminals]\n";
  for (const auto& t : sc.terminals) {
    out << (t.kind == TerminalKind::Cpe ? "cpe" : "mt") << " id=" << t.id << " du=" << t.parent_du
        << " distance_m=" << fmt(t.distance_m);
    if (t.kind == TerminalKind::Cpe) {
      out << " site=" << t.site_id << " share=" << fmt(t.share);
    } else {
      out << " serves=" << t.serves_du;
    }
    out << " noise_w=" << fmt(t.noise_power_w) << " gain_dbi=" << fmt(t.antenna_gain_dbi);
    if (t.initial_rb_power_w) out << " initial_power_w=" << fmt(*t.initial_rb_power_w);
    out << '\n';
  }
}

std::string serialize_scenario(const Scenario& scenario) {
  std::ostringstream out;
  write_scenario(out, scenario);
  return out.str();
}

void apply_scenario_override(Scenario& sc, const std::string& key, const std::string& value) {
  auto fail = [&](const std::string& what) { throw ValidationError("override '" + key + "': " + what); };
  const auto dot = key.find('.');
  if (dot == std::string::npos) fail("expected section.field");
  const std::string section = key.substr(0, dot);
  const std::string field = key.substr(dot + 1);
  if (section == "thresholds") {
    const double v = parse_number(value, fail);
    set_threshold(sc.controller.thresholds, field, v, fail);
    for (auto& n : sc.nodes) set_threshold(n.thresholds, field, v, fail);
  } else if (section == "controller") {
    set_controller(sc.controller, field, parse_number(value, fail), fail);
  } else if (section == "radios") {
    const double v = parse_number(value, fail);
    for (auto& n : sc.nodes) {
      for (auto& r : n.radios) {
        if (field == "startup_s") r.startup_duration_s = v;
        else if (field == "wakeup_s") r.wakeup_duration_s = v;
        else if (field == "tx_power_w") r.tx_power_w = v;
        else if (field == "serving_w") r.power[RadioState::Serving] = v;
        else if (field == "sleep_w") r.power[RadioState::DeepSleep] = v;
        else fail("unknown radio field");
      }
    }
  } else if (section == "dus") {
    const double v = parse_number(value, fail);
    for (auto& d : sc.dus) {
      if (field == "phi") {
        if (d.kind != DuKind::Donor) d.availability.phi = v;
      } else if (field == "power_cap_w") {
        d.power_cap_w = v;
      } else {
        fail("unknown DU field");
      }
    }
  } else {
    fail("unknown section '" + section + "'");
  }
  validate_scenario(sc);
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("FWA_DATA_DIR"); env && *env) return env;
  return FWA_DATA_DIR;
}

std::filesystem::path resolve_scenario_path(const std::string& name_or_path) {
  std::filesystem::path p(name_or_path);
  if (std::filesystem::exists(p) && std::filesystem::is_regular_file(p)) return p;
  auto bundled = data_dir() / "scenarios" / (name_or_path + ".scn");
  if (std::filesystem::exists(bundled)) return bundled;
  throw ValidationError("scenario '" + name_or_path + "' not found (neither a file nor a bundled name)");
}

}  // namespace fwa
