#include "plantkg/sim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "plantkg/error.hpp"
#include "plantkg/util/strings.hpp"

namespace plantkg::sim {

namespace {

double read_number(const std::string& tok, std::size_t line, const std::string& what) {
  if (!util::is_decimal(tok))
    throw ParseError(what + " '" + tok + "' is not a number", line);
  return std::stod(tok);
}

// Pulls the token after position `i`, which belongs to the keyword at `i`.
const std::string& value_after(const std::vector<std::string>& tok, std::size_t i,
                               std::size_t line) {
  if (i + 1 >= tok.size())
    throw ParseError("keyword '" + tok[i] + "' needs a value", line);
  return tok[i + 1];
}

class ConfigParser {
 public:
  explicit ConfigParser(std::string_view text) : text_(text) {}

  PlantConfig run() {
    std::istringstream in{std::string(text_)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      auto tok = util::split_ws(raw);
      if (tok.empty()) continue;
      read_line(tok, line_no);
    }
    finish();
    return std::move(cfg_);
  }

 private:
  void read_line(const std::vector<std::string>& tok, std::size_t line) {
    const std::string& kw = tok[0];
    if (kw == "plant") read_scalar(cfg_.plant_id, tok, line);
    else if (kw == "module") read_scalar(cfg_.module_id, tok, line);
    else if (kw == "tank") read_tank(tok, line);
    else if (kw == "valve") read_valve(tok, line);
    else if (kw == "pump") read_pump(tok, line);
    else if (kw == "phase") read_phase(tok, line);
    else if (kw == "process") read_process(tok, line);
    else if (kw == "dt") cfg_.dt = read_setting(tok, line);
    else if (kw == "sample_period") cfg_.sample_period = read_setting(tok, line);
    else if (kw == "jitter") cfg_.jitter = read_setting(tok, line);
    else if (kw == "time_base") read_time_base(tok, line);
    else throw ParseError("unknown directive '" + kw + "'", line);
  }

  void read_scalar(std::string& slot, const std::vector<std::string>& tok,
                   std::size_t line) {
    if (tok.size() != 2)
      throw ParseError("'" + tok[0] + "' expects exactly one identifier", line);
    if (!slot.empty())
      throw ParseError("duplicate '" + tok[0] + "' line", line);
    slot = tok[1];
  }

  double read_setting(const std::vector<std::string>& tok, std::size_t line) {
    if (tok.size() != 2)
      throw ParseError("'" + tok[0] + "' expects exactly one value", line);
    return read_number(tok[1], line, tok[0]);
  }

  void read_time_base(const std::vector<std::string>& tok, std::size_t line) {
    if (tok.size() != 2)
      throw ParseError("'time_base' expects exactly one timestamp", line);
    auto t = util::parse_iso8601(tok[1]);
    if (!t) throw ParseError("time_base '" + tok[1] + "' is not an ISO 8601 instant", line);
    cfg_.time_base = *t;
  }

  void read_tank(const std::vector<std::string>& tok, std::size_t line) {
    if (tok.size() < 2) throw ParseError("'tank' needs an identifier", line);
    TankSpec t;
    t.id = tok[1];
    bool have_capacity = false, have_initial = false;
    for (std::size_t i = 2; i < tok.size(); i += 2) {
      const std::string& v = value_after(tok, i, line);
      if (tok[i] == "capacity") { t.capacity = read_number(v, line, "capacity"); have_capacity = true; }
      else if (tok[i] == "initial") { t.initial_level = read_number(v, line, "initial"); have_initial = true; }
      else if (tok[i] == "full_tag") t.full_tag = v;
      else if (tok[i] == "full_threshold") t.full_threshold = read_number(v, line, "full_threshold");
      else throw ParseError("unknown tank keyword '" + tok[i] + "'", line);
    }
    if (!have_capacity || !have_initial)
      throw ParseError("tank '" + t.id + "' needs both capacity and initial", line);
    cfg_.tanks.push_back(std::move(t));
  }

  void read_valve(const std::vector<std::string>& tok, std::size_t line) {
    if (tok.size() != 8 || tok[2] != "flow" || tok[4] != "from" || tok[6] != "to")
      throw ParseError("expected 'valve <id> flow <rate> from <tank> to <tank|drain>'", line);
    ValveSpec v;
    v.id = tok[1];
    v.nominal_flow = read_number(tok[3], line, "flow");
    v.from = tok[5];
    v.to = tok[7];
    cfg_.valves.push_back(std::move(v));
  }

  void read_pump(const std::vector<std::string>& tok, std::size_t line) {
    if (tok.size() != 6 || tok[2] != "flow" || tok[4] != "recirculates")
      throw ParseError("expected 'pump <id> flow <rate> recirculates <tank>'", line);
    if (!cfg_.pump.id.empty()) throw ParseError("duplicate 'pump' line", line);
    cfg_.pump.id = tok[1];
    cfg_.pump.nominal_flow = read_number(tok[3], line, "flow");
    cfg_.pump.tank = tok[5];
  }

  void read_phase(const std::vector<std::string>& tok, std::size_t line) {
    if (tok.size() < 2) throw ParseError("'phase' needs an identifier", line);
    PhaseSpec p;
    p.id = tok[1];
    bool have_end = false;
    for (std::size_t i = 2; i < tok.size();) {
      if (tok[i] == "open") {
        p.open_valves.push_back(value_after(tok, i, line));
        i += 2;
      } else if (tok[i] == "on") {
        p.pumps_on.push_back(value_after(tok, i, line));
        i += 2;
      } else if (tok[i] == "until") {
        if (i + 3 >= tok.size())
          throw ParseError("expected 'until <tank> >=|<= <level>'", line);
        if (have_end) throw ParseError("phase '" + p.id + "' has two end conditions", line);
        p.end_tank = tok[i + 1];
        if (tok[i + 2] == ">=") p.end = PhaseEnd::LevelAtLeast;
        else if (tok[i + 2] == "<=") p.end = PhaseEnd::LevelAtMost;
        else throw ParseError("until comparator must be '>=' or '<='", line);
        p.end_value = read_number(tok[i + 3], line, "level");
        have_end = true;
        i += 4;
      } else if (tok[i] == "duration") {
        if (have_end) throw ParseError("phase '" + p.id + "' has two end conditions", line);
        p.end = PhaseEnd::Duration;
        p.end_value = read_number(value_after(tok, i, line), line, "duration");
        have_end = true;
        i += 2;
      } else if (tok[i] == "refill_sources") {
        p.refill_sources = true;
        i += 1;
      } else {
        throw ParseError("unknown phase keyword '" + tok[i] + "'", line);
      }
    }
    if (!have_end)
      throw ParseError("phase '" + p.id + "' has no end condition", line);
    cfg_.phases.push_back(std::move(p));
  }

  void read_process(const std::vector<std::string>& tok, std::size_t line) {
    if (tok.size() < 2) throw ParseError("'process' needs an identifier", line);
    ProcessSpec p;
    p.id = tok[1];
    for (std::size_t i = 2; i < tok.size(); i += 2) {
      const std::string& v = value_after(tok, i, line);
      if (tok[i] == "parent") p.parent = v;
      else if (tok[i] == "executed_by") p.executed_by = v;
      else throw ParseError("unknown process keyword '" + tok[i] + "'", line);
    }
    cfg_.processes.push_back(std::move(p));
  }

  // Cross-line consistency checks, run once the whole file is read.
  void finish() {
    if (cfg_.plant_id.empty()) throw Error("plant description has no 'plant' line");
    if (cfg_.module_id.empty()) throw Error("plant description has no 'module' line");
    if (cfg_.tanks.empty()) throw Error("plant description declares no tanks");
    if (cfg_.pump.id.empty()) throw Error("plant description has no 'pump' line");
    if (cfg_.phases.empty()) throw Error("the recipe has no phases");

    std::set<std::string> tank_ids, full_tags;
    for (const TankSpec& t : cfg_.tanks) {
      if (!tank_ids.insert(t.id).second) throw Error("duplicate tank '" + t.id + "'");
      if (t.capacity <= 0) throw Error("tank '" + t.id + "' needs a positive capacity");
      if (t.initial_level < 0 || t.initial_level > t.capacity)
        throw Error("tank '" + t.id + "' initial level lies outside [0, capacity]");
      if (t.full_tag.empty() != (t.full_threshold == 0))
        throw Error("tank '" + t.id + "' needs full_tag and full_threshold together");
      if (!t.full_tag.empty()) {
        if (t.full_threshold < 0 || t.full_threshold > t.capacity)
          throw Error("tank '" + t.id + "' full_threshold lies outside (0, capacity]");
        if (!full_tags.insert(t.full_tag).second)
          throw Error("duplicate full_tag '" + t.full_tag + "'");
      }
    }

    std::set<std::string> valve_ids;
    for (const ValveSpec& v : cfg_.valves) {
      if (!valve_ids.insert(v.id).second) throw Error("duplicate valve '" + v.id + "'");
      if (v.nominal_flow <= 0) throw Error("valve '" + v.id + "' needs a positive flow");
      if (!tank_ids.count(v.from))
        throw Error("valve '" + v.id + "' drains unknown tank '" + v.from + "'");
      if (v.to != "drain" && !tank_ids.count(v.to))
        throw Error("valve '" + v.id + "' fills unknown tank '" + v.to + "'");
      if (v.from == v.to) throw Error("valve '" + v.id + "' connects a tank to itself");
    }
    if (valve_ids.count(cfg_.pump.id))
      throw Error("pump '" + cfg_.pump.id + "' reuses a valve identifier");
    if (cfg_.pump.nominal_flow <= 0)
      throw Error("pump '" + cfg_.pump.id + "' needs a positive flow");
    if (!tank_ids.count(cfg_.pump.tank))
      throw Error("pump '" + cfg_.pump.id + "' recirculates unknown tank '" + cfg_.pump.tank + "'");

    std::set<std::string> phase_ids;
    for (const PhaseSpec& p : cfg_.phases) {
      if (!phase_ids.insert(p.id).second) throw Error("duplicate phase '" + p.id + "'");
      for (const std::string& v : p.open_valves)
        if (!valve_ids.count(v))
          throw Error("phase '" + p.id + "' opens unknown valve '" + v + "'");
      for (const std::string& pm : p.pumps_on)
        if (pm != cfg_.pump.id)
          throw Error("phase '" + p.id + "' starts unknown pump '" + pm + "'");
      if (p.end == PhaseEnd::Duration) {
        if (p.end_value <= 0) throw Error("phase '" + p.id + "' needs a positive duration");
      } else {
        auto tank = std::find_if(cfg_.tanks.begin(), cfg_.tanks.end(),
                                 [&](const TankSpec& t) { return t.id == p.end_tank; });
        if (tank == cfg_.tanks.end())
          throw Error("phase '" + p.id + "' watches unknown tank '" + p.end_tank + "'");
        if (p.end_value < 0)
          throw Error("phase '" + p.id + "' needs a non-negative level target");
        if (p.end == PhaseEnd::LevelAtLeast &&
            p.end_value * (1.0 + cfg_.jitter) > tank->capacity)
          throw Error("phase '" + p.id + "' target can exceed the capacity of '" +
                      p.end_tank + "' under jitter");
      }
    }

    std::set<std::string> process_ids;
    for (const ProcessSpec& p : cfg_.processes) {
      if (!process_ids.insert(p.id).second) throw Error("duplicate process '" + p.id + "'");
      if (!p.parent.empty() && !process_ids.count(p.parent))
        throw Error("process '" + p.id + "' names undeclared parent '" + p.parent + "'");
      if (!p.executed_by.empty() && p.executed_by != cfg_.module_id)
        throw Error("process '" + p.id + "' references unknown module '" + p.executed_by + "'");
    }

    if (cfg_.dt <= 0) throw Error("dt must be positive");
    if (cfg_.sample_period <= 0) throw Error("sample_period must be positive");
    double steps = cfg_.sample_period / cfg_.dt;
    if (steps < 1 || std::fabs(steps - std::round(steps)) > 1e-9)
      throw Error("sample_period must be a whole number of dt steps");
    if (cfg_.jitter < 0 || cfg_.jitter > 0.2)
      throw Error("jitter must lie in [0, 0.2]");
  }

  std::string_view text_;
  PlantConfig cfg_;
};

}  // namespace

PlantConfig parse_plant_config(std::string_view text) {
  return ConfigParser(text).run();
}

PlantConfig load_plant_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_plant_config(buf.str());
}

AnomalySpec parse_anomaly(const std::string& text) {
  auto parts = util::split(text, ':');
  if (parts.size() != 4)
    throw Error("anomaly '" + text + "': expected <kind>:<valve>:<parameter>:<from-seconds>");
  AnomalySpec a;
  a.valve_id = parts[1];
  if (a.valve_id.empty())
    throw Error("anomaly '" + text + "': valve identifier is empty");
  if (parts[0] == "clog") {
    a.kind = AnomalySpec::Kind::Clog;
    if (!util::is_decimal(parts[2]))
      throw Error("anomaly '" + text + "': clog factor must be a number");
    a.factor = std::stod(parts[2]);
    if (a.factor <= 0 || a.factor >= 1)
      throw Error("anomaly '" + text + "': clog factor must lie in (0, 1)");
  } else if (parts[0] == "stuck") {
    a.kind = AnomalySpec::Kind::StuckValve;
    if (parts[2] == "open") a.stuck_open = true;
    else if (parts[2] == "closed") a.stuck_open = false;
    else throw Error("anomaly '" + text + "': stuck state must be 'open' or 'closed'");
  } else {
    throw Error("anomaly '" + text + "': unknown kind '" + parts[0] + "'");
  }
  if (!util::is_decimal(parts[3]))
    throw Error("anomaly '" + text + "': onset time must be a number");
  a.from_time = std::stod(parts[3]);
  if (a.from_time < 0)
    throw Error("anomaly '" + text + "': onset time must be non-negative");
  return a;
}

}  // namespace plantkg::sim
