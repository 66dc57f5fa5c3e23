#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "plantkg/util/csv.hpp"
#include "plantkg/util/time.hpp"

namespace plantkg::sim {

// ---------------------------------------------------------------------------
// Plant description
//
// A plant is a set of tanks connected by valves, one recirculation pump and a
// cyclic recipe.  The description is loaded from a line-oriented text file:
//
//   plant <id>
//   module <id>
//   tank <id> capacity <litres> initial <litres> [full_tag <tag> full_threshold <litres>]
//   valve <id> flow <litres-per-s> from <tank> to <tank|drain>
//   pump <id> flow <litres-per-s> recirculates <tank>
//   phase <id> [open <valve>]... [on <pump>]... <end> [refill_sources]
//     where <end> is one of:
//       until <tank> >= <litres> | until <tank> <= <litres> | duration <seconds>
//   process <id> [parent <process>] [executed_by <module>]
//   dt <seconds>
//   sample_period <seconds>
//   jitter <fraction>
//   time_base <iso8601>
//
// '#' starts a comment.  Phases run in file order and wrap around, so the
// recipe is cyclic.  A phase lists the actuators that are commanded active
// while it runs; everything else is commanded closed/off.  `refill_sources`
// tops every feed tank (a tank that drains into another tank) back up to its
// initial level when the phase is entered.
// ---------------------------------------------------------------------------

struct TankSpec {
  std::string id;
  double capacity = 0;
  double initial_level = 0;
  // Optional boolean sensor that reports level >= full_threshold.
  std::string full_tag;
  double full_threshold = 0;
};

struct ValveSpec {
  std::string id;
  double nominal_flow = 0;  // litres per second when fully open
  std::string from;
  std::string to;  // tank id, or "drain" for an external sink
};

struct PumpSpec {
  std::string id;
  double nominal_flow = 0;
  std::string tank;  // recirculated tank; running the pump moves no volume
};

enum class PhaseEnd { LevelAtLeast, LevelAtMost, Duration };

struct PhaseSpec {
  std::string id;
  std::vector<std::string> open_valves;
  std::vector<std::string> pumps_on;
  PhaseEnd end = PhaseEnd::Duration;
  std::string end_tank;   // for the level conditions
  double end_value = 0;   // litres, or seconds for Duration
  bool refill_sources = false;
};

struct ProcessSpec {
  std::string id;
  std::string parent;       // empty for a root process
  std::string executed_by;  // module id, or empty
};

struct PlantConfig {
  std::string plant_id;
  std::string module_id;
  std::vector<TankSpec> tanks;
  std::vector<ValveSpec> valves;
  PumpSpec pump;
  std::vector<PhaseSpec> phases;
  std::vector<ProcessSpec> processes;
  double dt = 0.1;            // integration step
  double sample_period = 1.0; // continuous sensor period; multiple of dt
  double jitter = 0.02;       // relative spread applied to phase end targets
  util::TimestampMs time_base = 0;
};

// Parses and validates a plant description.  Throws Error when a line is
// malformed or the description is inconsistent (capacity violations, unknown
// tank references, an empty recipe, dt incompatible with sample_period, ...).
PlantConfig parse_plant_config(std::string_view text);
PlantConfig load_plant_config_file(const std::string& path);

// ---------------------------------------------------------------------------
// Fault injection
// ---------------------------------------------------------------------------

struct AnomalySpec {
  enum class Kind {
    Clog,       // valve passes only `factor` of its nominal flow
    StuckValve  // valve ignores commands and holds `stuck_open`
  };
  Kind kind = Kind::Clog;
  std::string valve_id;
  double factor = 1.0;     // Clog only; must lie in (0, 1)
  bool stuck_open = false; // StuckValve only
  double from_time = 0;    // seconds from simulation start
};

// Parses the compact command-line form:
//   clog:<valve>:<factor>:<from-s>     e.g. clog:V101:0.5:120
//   stuck:<valve>:<open|closed>:<from-s>
AnomalySpec parse_anomaly(const std::string& text);

// ---------------------------------------------------------------------------
// Simulation output
// ---------------------------------------------------------------------------

struct SensorLogRecord {
  util::TimestampMs timestamp = 0;
  std::string tag;
  std::string value;
  std::string kind;  // "discrete" or "continuous"
};

// Engineering description of the plant as three tables:
//   components: id, class, parent
//   tags:       tag, foi, property, datatype
//   processes:  id, class, parent, executed_by
struct EngineeringDoc {
  util::CsvTable components;
  util::CsvTable tags;
  util::CsvTable processes;
};

// One phase activation, closed when the end condition fired.  `end` is the
// simulation end time when the run stopped mid-phase.
struct PhaseSpan {
  std::string phase_id;
  std::size_t cycle = 0;
  double start = 0;
  double end = 0;
  bool completed = false;
};

// Per-step accounting exposed to observers.  `external_in`/`external_out` are
// the litres that crossed the plant boundary during the step (refills and
// drains); transfers between tanks cancel out of the balance.
struct StepSnapshot {
  double time = 0;
  double total_volume = 0;
  double external_in = 0;
  double external_out = 0;
  std::vector<double> levels;  // one entry per tank, in config order
};

using StepObserver = std::function<void(const StepSnapshot&)>;

struct SimResult {
  std::vector<SensorLogRecord> records;
  EngineeringDoc doc;
  std::vector<PhaseSpan> phases;
  std::map<std::string, double> final_levels;
  double total_in = 0;   // litres supplied from outside over the run
  double total_out = 0;  // litres drained to outside over the run
};

// Runs the plant for `duration` seconds of simulated time with a fixed step.
//
// The run is deterministic: the same config, seed, duration and anomaly list
// always produce byte-identical sensor logs.  The seed drives only the
// per-activation jitter on phase end targets.  Discrete tags are logged when
// they change (plus once at start); continuous tags are sampled every
// sample_period.  Throws Error for anomalies that name unknown valves.
SimResult simulate(const PlantConfig& config, std::uint64_t seed,
                   double duration, const std::vector<AnomalySpec>& anomalies = {},
                   const StepObserver& observer = {});

// Writes the log as CSV with header "timestamp,tag,value,kind"; an empty run
// still produces the header row.
void emit_log(const std::vector<SensorLogRecord>& records, const std::string& path);

// Writes components.csv, tags.csv and processes.csv into `dir`.
void emit_engineering(const EngineeringDoc& doc, const std::string& dir);

}  // namespace plantkg::sim
