#include "plantkg/learn/automaton.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "plantkg/error.hpp"
#include "plantkg/util/strings.hpp"

namespace plantkg::learn {

namespace {

constexpr const char* kFormatHeader = "timed-automaton 1";
constexpr const char* kArrow = "→";

[[noreturn]] void malformed(const std::string& what, std::size_t line) {
  throw ParseError("automaton file: " + what, line);
}

// Serialised fields are whitespace-delimited, so the payload must not carry
// whitespace itself.  Discrete tags and values never do in practice.
void check_serialisable(const std::string& text, const std::string& what) {
  for (char c : text)
    if (std::isspace(static_cast<unsigned char>(c)))
      throw Error("cannot serialise " + what + " containing whitespace: '" + text + "'");
}

double read_double(const std::string& tok, std::size_t line, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    malformed(what + " '" + tok + "' is not a number", line);
  }
}

}  // namespace

std::string state_key(const StateAssignment& assignment) {
  std::string key;
  for (const auto& [tag, value] : assignment) {
    if (!key.empty()) key += ';';
    key += tag;
    key += '=';
    key += value;
  }
  return key;
}

StateAssignment parse_state_key(const std::string& key) {
  StateAssignment assignment;
  if (key.empty()) return assignment;
  for (const std::string& part : util::split(key, ';')) {
    auto eq = part.find('=');
    if (eq == std::string::npos)
      throw Error("state key entry '" + part + "' has no '='");
    assignment[part.substr(0, eq)] = part.substr(eq + 1);
  }
  return assignment;
}

std::string event_label(const std::string& tag, const std::string& value) {
  return tag + kArrow + value;
}

void TimingStats::add(double seconds) {
  ++count;
  if (count == 1) {
    min = max = mean = seconds;
    m2 = 0;
    return;
  }
  min = std::min(min, seconds);
  max = std::max(max, seconds);
  double delta = seconds - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (seconds - mean);
}

double TimingStats::stddev() const {
  if (count < 2) return 0;
  return std::sqrt(m2 / static_cast<double>(count - 1));
}

void observe(TimedAutomaton& a, const DiscreteEvent& event) {
  if (a.empty()) throw Error("observe needs an initialised automaton");
  if (!std::binary_search(a.tag_universe.begin(), a.tag_universe.end(), event.tag))
    throw Error("event tag '" + event.tag + "' is outside the tag universe");

  double dwell =
      static_cast<double>(event.timestamp - a.entered_at) / 1000.0;
  StateAssignment assignment = parse_state_key(a.current_state);
  assignment[event.tag] = event.value;
  std::string target = state_key(assignment);

  a.states.insert(target);
  Transition& tr = a.transitions[{a.current_state, event_label(event.tag, event.value)}];
  if (tr.timing.count == 0) tr.target = target;
  tr.timing.add(dwell);

  a.current_state = std::move(target);
  a.entered_at = event.timestamp;
}

TimedAutomaton learn_automaton(const EventTrace& trace) {
  TimedAutomaton a;
  for (const auto& [tag, value] : trace.initial) a.tag_universe.push_back(tag);
  a.initial_state = state_key(trace.initial);
  a.states.insert(a.initial_state);
  a.current_state = a.initial_state;
  a.entered_at = trace.start_time;

  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    util::TimestampMs prev =
        i == 0 ? trace.start_time : trace.events[i - 1].timestamp;
    if (trace.events[i].timestamp < prev)
      throw Error("events are out of order at index " + std::to_string(i));
    observe(a, trace.events[i]);
  }
  return a;
}

const char* anomaly_kind_name(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::UnknownState: return "UnknownState";
    case AnomalyKind::UnknownTransition: return "UnknownTransition";
    case AnomalyKind::TimingViolation: return "TimingViolation";
  }
  return "?";
}

AnomalyReport detect(const TimedAutomaton& a, const EventTrace& trace,
                     double tolerance) {
  if (a.empty()) throw Error("detect needs a learned automaton");
  if (tolerance < 0) throw Error("tolerance must be non-negative");

  AnomalyReport report;
  StateAssignment current = trace.initial;
  std::string current_key = state_key(current);
  bool known = a.states.count(current_key) > 0;
  if (!known)
    report.items.push_back({0, trace.start_time, AnomalyKind::UnknownState,
                            current_key, "", std::nullopt, std::nullopt});
  util::TimestampMs entered = trace.start_time;

  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const DiscreteEvent& e = trace.events[i];
    util::TimestampMs prev = i == 0 ? trace.start_time : trace.events[i - 1].timestamp;
    if (e.timestamp < prev)
      throw Error("events are out of order at index " + std::to_string(i));

    StateAssignment next = current;
    next[e.tag] = e.value;
    std::string next_key = state_key(next);
    std::string label = event_label(e.tag, e.value);
    double dwell = static_cast<double>(e.timestamp - entered) / 1000.0;

    if (known) {
      if (!a.states.count(next_key)) {
        report.items.push_back({i, e.timestamp, AnomalyKind::UnknownState,
                                current_key, label, std::nullopt, std::nullopt});
        known = false;  // shadow the raw vector until it becomes familiar
      } else {
        auto it = a.transitions.find({current_key, label});
        if (it == a.transitions.end()) {
          report.items.push_back({i, e.timestamp, AnomalyKind::UnknownTransition,
                                  current_key, label, std::nullopt, std::nullopt});
        } else {
          double lo = it->second.timing.min * (1.0 - tolerance);
          double hi = it->second.timing.max * (1.0 + tolerance);
          if (dwell < lo || dwell > hi)
            report.items.push_back({i, e.timestamp, AnomalyKind::TimingViolation,
                                    current_key, label, dwell,
                                    std::make_pair(lo, hi)});
        }
      }
    } else {
      known = a.states.count(next_key) > 0;  // resynchronised on a known vector
    }

    current = std::move(next);
    current_key = std::move(next_key);
    entered = e.timestamp;
  }
  return report;
}

util::CsvTable report_table(const AnomalyReport& report) {
  util::CsvTable t;
  t.header = {"event_index", "timestamp",      "kind",
              "source_state", "event_label",   "observed_dwell",
              "allowed_lo",   "allowed_hi"};
  for (const AnomalyItem& item : report.items) {
    t.rows.push_back({std::to_string(item.event_index),
                      util::format_iso8601(item.timestamp),
                      anomaly_kind_name(item.kind), item.source_state,
                      item.event_label,
                      item.observed_dwell ? util::format_double(*item.observed_dwell) : "",
                      item.allowed ? util::format_double(item.allowed->first) : "",
                      item.allowed ? util::format_double(item.allowed->second) : ""});
  }
  return t;
}

void save_automaton(const TimedAutomaton& a, const std::string& path) {
  if (a.empty()) throw Error("cannot serialise an empty automaton");
  if (a.tag_universe.empty()) throw Error("cannot serialise an automaton without tags");

  std::ostringstream out;
  out << kFormatHeader << "\n";
  out << "tags";
  for (const std::string& tag : a.tag_universe) {
    check_serialisable(tag, "a tag");
    out << ' ' << tag;
  }
  out << "\n";
  check_serialisable(a.initial_state, "a state key");
  out << "initial " << a.initial_state << "\n";
  for (const std::string& state : a.states) {
    check_serialisable(state, "a state key");
    out << "state " << state << "\n";
  }
  for (const auto& [edge, tr] : a.transitions) {
    check_serialisable(edge.second, "an event label");
    out << "transition " << edge.first << ' ' << edge.second << ' ' << tr.target
        << ' ' << tr.timing.count << ' ' << util::format_double(tr.timing.min)
        << ' ' << util::format_double(tr.timing.max) << ' '
        << util::format_double(tr.timing.mean) << ' '
        << util::format_double(tr.timing.m2) << "\n";
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write file: " + path);
  file << out.str();
}

TimedAutomaton load_automaton(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);

  TimedAutomaton a;
  std::string raw;
  std::size_t line_no = 0;
  bool saw_header = false, saw_tags = false, saw_initial = false;
  while (std::getline(in, raw)) {
    ++line_no;
    auto tok = util::split_ws(raw);
    if (tok.empty()) continue;
    if (!saw_header) {
      if (raw != kFormatHeader) malformed("unsupported format line '" + raw + "'", line_no);
      saw_header = true;
      continue;
    }
    if (tok[0] == "tags") {
      if (saw_tags) malformed("duplicate tags line", line_no);
      if (tok.size() < 2) malformed("tags line lists no tags", line_no);
      a.tag_universe.assign(tok.begin() + 1, tok.end());
      if (!std::is_sorted(a.tag_universe.begin(), a.tag_universe.end()))
        malformed("tags are not sorted", line_no);
      saw_tags = true;
    } else if (tok[0] == "initial") {
      if (tok.size() != 2) malformed("initial line needs one state key", line_no);
      a.initial_state = tok[1];
      saw_initial = true;
    } else if (tok[0] == "state") {
      if (tok.size() != 2) malformed("state line needs one state key", line_no);
      if (!a.states.insert(tok[1]).second) malformed("duplicate state '" + tok[1] + "'", line_no);
    } else if (tok[0] == "transition") {
      if (tok.size() != 9)
        malformed("transition line needs source, label, target and four timing fields", line_no);
      Transition tr;
      tr.target = tok[3];
      if (!util::is_integer(tok[4]) || tok[4].front() == '-')
        malformed("count '" + tok[4] + "' is not a natural number", line_no);
      tr.timing.count = std::stoull(tok[4]);
      tr.timing.min = read_double(tok[5], line_no, "min");
      tr.timing.max = read_double(tok[6], line_no, "max");
      tr.timing.mean = read_double(tok[7], line_no, "mean");
      tr.timing.m2 = read_double(tok[8], line_no, "m2");
      if (!a.transitions.emplace(std::make_pair(tok[1], tok[2]), std::move(tr)).second)
        malformed("duplicate transition " + tok[1] + " " + tok[2], line_no);
    } else {
      malformed("unknown line '" + tok[0] + "'", line_no);
    }
  }
  if (!saw_header) throw Error("automaton file: missing format line");
  if (!saw_tags) throw Error("automaton file: missing tags line");
  if (!saw_initial) throw Error("automaton file: missing initial line");
  if (a.states.empty()) throw Error("automaton file: no states");
  if (!a.states.count(a.initial_state))
    throw Error("automaton file: initial state is not in the state list");

  // Every state must be a total assignment of the tag universe.
  std::set<std::string> universe(a.tag_universe.begin(), a.tag_universe.end());
  for (const std::string& state : a.states) {
    StateAssignment assignment = parse_state_key(state);
    if (state_key(assignment) != state)
      throw Error("automaton file: state key '" + state + "' is not canonical");
    std::set<std::string> tags;
    for (const auto& [tag, value] : assignment) tags.insert(tag);
    if (tags != universe)
      throw Error("automaton file: state '" + state + "' does not cover the tag universe");
  }

  for (const auto& [edge, tr] : a.transitions) {
    const auto& [source, label] = edge;
    if (!a.states.count(source) || !a.states.count(tr.target))
      throw Error("automaton file: transition endpoints must be listed states");
    if (tr.timing.count < 1 || tr.timing.min > tr.timing.max || tr.timing.m2 < 0 ||
        tr.timing.mean < tr.timing.min - 1e-9 || tr.timing.mean > tr.timing.max + 1e-9)
      throw Error("automaton file: implausible timing statistics on " + source + " " + label);
    auto arrow = label.find(kArrow);
    if (arrow == std::string::npos)
      throw Error("automaton file: event label '" + label + "' has no arrow");
    StateAssignment assignment = parse_state_key(source);
    assignment[label.substr(0, arrow)] = label.substr(arrow + std::string(kArrow).size());
    if (state_key(assignment) != tr.target)
      throw Error("automaton file: transition target does not match source updated by " + label);
  }

  a.current_state = a.initial_state;
  a.entered_at = 0;
  return a;
}

}  // namespace plantkg::learn
