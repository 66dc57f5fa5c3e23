#include "plantkg/sim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "plantkg/error.hpp"
#include "plantkg/util/strings.hpp"

namespace plantkg::sim {

namespace {

// Continuous sensor values carry three decimals; with the default rates a
// single step moves 0.01 litres, so nothing observable is lost.
constexpr int kLevelDecimals = 3;

// Slack for comparing simulated time against configured instants.
constexpr double kTimeEps = 1e-9;

EngineeringDoc build_engineering(const PlantConfig& cfg) {
  EngineeringDoc doc;

  doc.components.header = {"id", "class", "parent"};
  auto& comp = doc.components.rows;
  comp.push_back({cfg.plant_id, "isa88:ProcessCell", ""});
  for (const TankSpec& t : cfg.tanks)
    comp.push_back({cfg.plant_id + ".tank_" + t.id, "isa88:Unit", cfg.plant_id});
  comp.push_back({cfg.module_id, "isa88:EquipmentModule", cfg.plant_id});
  for (const ValveSpec& v : cfg.valves)
    comp.push_back({"valve_" + v.id, "isa88:ControlModule", cfg.module_id});
  comp.push_back({"pump_" + cfg.pump.id, "isa88:ControlModule", cfg.module_id});

  doc.tags.header = {"tag", "foi", "property", "datatype"};
  auto& tags = doc.tags.rows;
  for (const TankSpec& t : cfg.tanks) {
    std::string tag = "tank_" + t.id + ".level";
    tags.push_back({tag, cfg.plant_id + ".tank_" + t.id, tag + ".property", "xsd:decimal"});
  }
  for (const TankSpec& t : cfg.tanks) {
    if (t.full_tag.empty()) continue;
    tags.push_back({t.full_tag, cfg.plant_id + ".tank_" + t.id,
                    t.full_tag + ".property", "xsd:boolean"});
  }
  for (const ValveSpec& v : cfg.valves) {
    std::string tag = v.id + ".open";
    tags.push_back({tag, "valve_" + v.id, tag + ".property", "xsd:boolean"});
  }
  {
    std::string tag = cfg.pump.id + ".on";
    tags.push_back({tag, "pump_" + cfg.pump.id, tag + ".property", "xsd:boolean"});
  }

  doc.processes.header = {"id", "class", "parent", "executed_by"};
  for (const ProcessSpec& p : cfg.processes)
    doc.processes.rows.push_back({"proc_" + p.id, "vdi3682:Process",
                                  p.parent.empty() ? "" : "proc_" + p.parent,
                                  p.executed_by});
  return doc;
}

class Engine {
 public:
  Engine(const PlantConfig& cfg, std::uint64_t seed,
         const std::vector<AnomalySpec>& anomalies)
      : cfg_(cfg), anomalies_(anomalies), rng_(seed) {
    for (const TankSpec& t : cfg_.tanks) levels_[t.id] = t.initial_level;
    std::set<std::string> valve_ids;
    for (const ValveSpec& v : cfg_.valves) {
      valve_ids.insert(v.id);
      // A feed tank supplies another tank and is topped up by refill phases.
      if (v.to != "drain") feed_tanks_.insert(v.from);
    }
    for (const AnomalySpec& a : anomalies_)
      if (!valve_ids.count(a.valve_id))
        throw Error("anomaly references unknown valve '" + a.valve_id + "'");
  }

  SimResult run(double duration, const StepObserver& observer) {
    if (duration < 0) throw Error("simulation duration must be non-negative");
    const std::int64_t steps = std::llround(duration / cfg_.dt);
    const std::int64_t sample_every = std::llround(cfg_.sample_period / cfg_.dt);

    enter_phase(0, 0, 0.0);
    update_valves(0.0);
    emit_discrete_changes(ms_at(0));
    sample_levels(ms_at(0));

    for (std::int64_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * cfg_.dt;
      if (pending_advance_) {
        std::size_t next = (phase_index_ + 1) % cfg_.phases.size();
        enter_phase(next, next == 0 ? cycle_ + 1 : cycle_, t);
        pending_advance_ = false;
      }
      update_valves(t);
      emit_discrete_changes(ms_at(k));

      integrate(t);
      ++steps_in_phase_;

      emit_discrete_changes(ms_at(k + 1));
      if ((k + 1) % sample_every == 0) sample_levels(ms_at(k + 1));
      check_phase_end(static_cast<double>(k + 1) * cfg_.dt);

      if (observer) {
        StepSnapshot snap;
        snap.time = static_cast<double>(k + 1) * cfg_.dt;
        snap.external_in = step_in_;
        snap.external_out = step_out_;
        for (const TankSpec& t2 : cfg_.tanks) {
          snap.levels.push_back(levels_[t2.id]);
          snap.total_volume += levels_[t2.id];
        }
        observer(snap);
      }
      total_in_ += step_in_;
      total_out_ += step_out_;
      step_in_ = step_out_ = 0;
    }

    if (!spans_.empty() && !spans_.back().completed)
      spans_.back().end = static_cast<double>(steps) * cfg_.dt;

    SimResult result;
    result.records = std::move(records_);
    result.doc = build_engineering(cfg_);
    result.phases = std::move(spans_);
    result.final_levels = levels_;
    result.total_in = total_in_;
    result.total_out = total_out_;
    return result;
  }

 private:
  util::TimestampMs ms_at(std::int64_t step) const {
    return cfg_.time_base + std::llround(static_cast<double>(step) * cfg_.dt * 1000.0);
  }

  void enter_phase(std::size_t index, std::size_t cycle, double t) {
    phase_index_ = index;
    cycle_ = cycle;
    steps_in_phase_ = 0;
    const PhaseSpec& p = cfg_.phases[index];

    // Every activation gets its own jittered end target, so cycle timing
    // varies a little between activations and across seeds.
    std::uniform_real_distribution<double> dist(-cfg_.jitter, cfg_.jitter);
    phase_target_ = p.end_value * (1.0 + dist(rng_));

    commanded_open_.clear();
    for (const std::string& v : p.open_valves) commanded_open_.insert(v);
    pump_on_ = !p.pumps_on.empty();

    if (p.refill_sources) {
      for (const TankSpec& tank : cfg_.tanks) {
        if (!feed_tanks_.count(tank.id)) continue;
        double& level = levels_[tank.id];
        if (level < tank.initial_level) {
          step_in_ += tank.initial_level - level;
          level = tank.initial_level;
        }
      }
    }

    spans_.push_back({p.id, cycle, t, 0.0, false});
  }

  // Commanded states filtered through stuck-valve faults.
  void update_valves(double t) {
    for (const ValveSpec& v : cfg_.valves) {
      bool open = commanded_open_.count(v.id) > 0;
      for (const AnomalySpec& a : anomalies_) {
        if (a.kind == AnomalySpec::Kind::StuckValve && a.valve_id == v.id &&
            t >= a.from_time - kTimeEps)
          open = a.stuck_open;
      }
      actual_open_[v.id] = open;
    }
  }

  double clog_factor(const std::string& valve_id, double t) const {
    double f = 1.0;
    for (const AnomalySpec& a : anomalies_) {
      if (a.kind == AnomalySpec::Kind::Clog && a.valve_id == valve_id &&
          t >= a.from_time - kTimeEps)
        f *= a.factor;
    }
    return f;
  }

  // Moves volume through every open valve for one step.  A transfer is capped
  // by what the source holds and what the destination can still take, so
  // levels never leave [0, capacity].  The pump only recirculates.
  void integrate(double t) {
    for (const ValveSpec& v : cfg_.valves) {
      if (!actual_open_[v.id]) continue;
      const double rate = v.nominal_flow * clog_factor(v.id, t);
      double& from = levels_[v.from];
      double amount = std::min(rate * cfg_.dt, from);
      if (v.to == "drain") {
        from -= amount;
        step_out_ += amount;
      } else {
        const TankSpec& dest = tank(v.to);
        double& to = levels_[v.to];
        amount = std::min(amount, dest.capacity - to);
        if (amount <= 0) continue;
        from -= amount;
        to = std::min(to + amount, dest.capacity);
      }
    }
  }

  void check_phase_end(double t_next) {
    const PhaseSpec& p = cfg_.phases[phase_index_];
    bool done = false;
    switch (p.end) {
      case PhaseEnd::LevelAtLeast:
        done = levels_[p.end_tank] >= phase_target_;
        break;
      case PhaseEnd::LevelAtMost:
        done = levels_[p.end_tank] <= phase_target_;
        break;
      case PhaseEnd::Duration:
        done = static_cast<double>(steps_in_phase_) * cfg_.dt >= phase_target_ - kTimeEps;
        break;
    }
    if (done) {
      spans_.back().end = t_next;
      spans_.back().completed = true;
      pending_advance_ = true;
    }
  }

  void emit(util::TimestampMs ts, const std::string& tag, std::string value,
            const char* kind) {
    records_.push_back({ts, tag, std::move(value), kind});
  }

  // Discrete tags are compressed: a record appears when the value differs from
  // the last one logged for that tag (and once at start-up).
  void emit_discrete_changes(util::TimestampMs ts) {
    auto changed = [&](const std::string& tag, bool value) {
      auto it = last_discrete_.find(tag);
      if (it != last_discrete_.end() && it->second == value) return;
      last_discrete_[tag] = value;
      emit(ts, tag, value ? "true" : "false", "discrete");
    };
    for (const ValveSpec& v : cfg_.valves) changed(v.id + ".open", actual_open_[v.id]);
    changed(cfg_.pump.id + ".on", pump_on_);
    for (const TankSpec& t : cfg_.tanks) {
      if (t.full_tag.empty()) continue;
      changed(t.full_tag, levels_[t.id] >= t.full_threshold);
    }
  }

  void sample_levels(util::TimestampMs ts) {
    for (const TankSpec& t : cfg_.tanks)
      emit(ts, "tank_" + t.id + ".level",
           util::format_fixed(levels_[t.id], kLevelDecimals), "continuous");
  }

  const TankSpec& tank(const std::string& id) const {
    for (const TankSpec& t : cfg_.tanks)
      if (t.id == id) return t;
    throw Error("unknown tank '" + id + "'");  // unreachable after validation
  }

  const PlantConfig& cfg_;
  const std::vector<AnomalySpec>& anomalies_;
  std::mt19937_64 rng_;

  std::map<std::string, double> levels_;
  std::set<std::string> feed_tanks_;
  std::set<std::string> commanded_open_;
  std::map<std::string, bool> actual_open_;
  bool pump_on_ = false;

  std::size_t phase_index_ = 0;
  std::size_t cycle_ = 0;
  std::int64_t steps_in_phase_ = 0;
  double phase_target_ = 0;
  bool pending_advance_ = false;

  std::map<std::string, bool> last_discrete_;
  std::vector<SensorLogRecord> records_;
  std::vector<PhaseSpan> spans_;
  double step_in_ = 0, step_out_ = 0;
  double total_in_ = 0, total_out_ = 0;
};

}  // namespace

SimResult simulate(const PlantConfig& config, std::uint64_t seed, double duration,
                   const std::vector<AnomalySpec>& anomalies,
                   const StepObserver& observer) {
  return Engine(config, seed, anomalies).run(duration, observer);
}

void emit_log(const std::vector<SensorLogRecord>& records, const std::string& path) {
  util::CsvTable table;
  table.header = {"timestamp", "tag", "value", "kind"};
  for (const SensorLogRecord& r : records)
    table.rows.push_back({util::format_iso8601(r.timestamp), r.tag, r.value, r.kind});
  util::write_csv(path, table);
}

void emit_engineering(const EngineeringDoc& doc, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  util::write_csv((fs::path(dir) / "components.csv").string(), doc.components);
  util::write_csv((fs::path(dir) / "tags.csv").string(), doc.tags);
  util::write_csv((fs::path(dir) / "processes.csv").string(), doc.processes);
}

}  // namespace plantkg::sim
