#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "plantkg/rdf/graph.hpp"
#include "plantkg/util/csv.hpp"
#include "plantkg/util/time.hpp"

namespace plantkg::learn {

// ---------------------------------------------------------------------------
// Timed automaton over discrete signal vectors
//
// A state is the complete assignment of the discrete tags; an event is one
// tag changing its value.  Learning folds a run's events into states and
// transitions and keeps per-transition dwell statistics; detection walks a
// new run through the learned automaton and reports everything the model
// does not permit.
// ---------------------------------------------------------------------------

struct DiscreteEvent {
  util::TimestampMs timestamp = 0;
  std::string tag;
  std::string value;
};

// Complete tag assignment; std::map keeps tags sorted so the derived key is
// canonical.
using StateAssignment = std::map<std::string, std::string>;

// "tag=value;tag=value" with tags in lexicographic order.
std::string state_key(const StateAssignment& assignment);
StateAssignment parse_state_key(const std::string& key);

// "tag→value"
std::string event_label(const std::string& tag, const std::string& value);

// Running min/max/mean and the sum of squared deviations (Welford update).
// Mean and m2 are reported but the acceptance test for dwell times is the
// [min, max] interval, widened by a relative tolerance.
struct TimingStats {
  std::uint64_t count = 0;
  double min = 0;
  double max = 0;
  double mean = 0;
  double m2 = 0;
  void add(double seconds);
  double stddev() const;
};

struct Transition {
  std::string target;
  TimingStats timing;
};

struct TimedAutomaton {
  std::vector<std::string> tag_universe;  // sorted, fixed when learning starts
  std::string initial_state;
  std::set<std::string> states;
  // Keyed by (source state key, event label).  Deterministic by construction:
  // the target is always the source assignment updated by the event.
  std::map<std::pair<std::string, std::string>, Transition> transitions;

  // Online-learning cursor.
  std::string current_state;
  util::TimestampMs entered_at = 0;

  bool empty() const { return states.empty(); }
};

// Discrete slice of one run: the assignment in force before the first change,
// the instant that assignment was observed, and the change events in time
// order.  Tags that never appear are dropped and noted in `warnings`.
struct EventTrace {
  StateAssignment initial;
  util::TimestampMs start_time = 0;
  std::vector<DiscreteEvent> events;
  std::vector<std::string> warnings;
};

// Queries every observation (sensor, result time, result) from the source,
// keeps those whose sensor tag is in `tag_universe`, orders them by time and
// tag, and compresses repeats into change events.
EventTrace extract_events(const rdf::TripleSource& source,
                          const std::set<std::string>& tag_universe);

// Same trace built from a sensor log table with columns
// timestamp,tag,value,kind; rows with kind "discrete" participate.
EventTrace events_from_log(const util::CsvTable& log,
                           const std::set<std::string>& tag_universe);

// One online learning step: dwell accounting, state/transition creation and
// the move of the cursor.  Accepts every event whose tag is in the universe.
void observe(TimedAutomaton& automaton, const DiscreteEvent& event);

// Fold of observe over the whole trace.  Throws when events are out of order.
TimedAutomaton learn_automaton(const EventTrace& trace);

enum class AnomalyKind { UnknownState, UnknownTransition, TimingViolation };
const char* anomaly_kind_name(AnomalyKind kind);

struct AnomalyItem {
  std::size_t event_index = 0;
  util::TimestampMs timestamp = 0;
  AnomalyKind kind = AnomalyKind::UnknownState;
  std::string source_state;
  std::string event_label;
  std::optional<double> observed_dwell;                 // seconds
  std::optional<std::pair<double, double>> allowed;     // dwell interval
};

struct AnomalyReport {
  std::vector<AnomalyItem> items;  // ordered by event_index
  bool ok() const { return items.empty(); }
};

// Walks the trace through the automaton.  Per event: a resulting vector the
// model has never seen is an UnknownState, a missing edge from a known state
// is an UnknownTransition, and a dwell outside [min*(1-tolerance),
// max*(1+tolerance)] is a TimingViolation.  After an UnknownState the walk
// shadows the raw vector silently until a known vector reappears, so a single
// fault does not cascade into follow-on reports.
AnomalyReport detect(const TimedAutomaton& automaton, const EventTrace& trace,
                     double tolerance);

// CSV rendering of a report: event_index, timestamp, kind, source_state,
// event_label, observed_dwell, allowed_lo, allowed_hi.
util::CsvTable report_table(const AnomalyReport& report);

// Versioned text serialisation; load(save(a)) reproduces every field of the
// learned model (the learning cursor resets to the initial state).
void save_automaton(const TimedAutomaton& automaton, const std::string& path);
TimedAutomaton load_automaton(const std::string& path);

}  // namespace plantkg::learn
