#include <algorithm>

#include "plantkg/error.hpp"
#include "plantkg/learn/automaton.hpp"
#include "plantkg/query/eval.hpp"
#include "plantkg/query/parser.hpp"
#include "plantkg/rdf/io.hpp"
#include "plantkg/util/strings.hpp"

namespace plantkg::learn {

namespace {

// Sensor, result time and result value of every observation in the source.
constexpr const char* kObservationQuery = R"(
SELECT ?sensor ?time ?result WHERE {
  ?sensor sosa:madeObservation ?obs .
  ?obs sosa:resultTime ?time ;
       sosa:hasSimpleResult ?result .
}
)";

struct RawObservation {
  util::TimestampMs timestamp;
  std::string tag;
  std::string value;
};

// Shared tail of both extraction routes: order by time (then tag, to break
// ties deterministically), take the first value per tag as the initial
// assignment, and keep only actual changes as events.
EventTrace compress(std::vector<RawObservation> observations,
                    const std::set<std::string>& tag_universe) {
  std::stable_sort(observations.begin(), observations.end(),
                   [](const RawObservation& a, const RawObservation& b) {
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     return a.tag < b.tag;
                   });

  EventTrace trace;
  std::map<std::string, std::string> last;
  bool first = true;
  for (RawObservation& o : observations) {
    if (first) {
      trace.start_time = o.timestamp;
      first = false;
    }
    auto it = last.find(o.tag);
    if (it == last.end()) {
      trace.initial[o.tag] = o.value;
      last.emplace(o.tag, std::move(o.value));
    } else if (it->second != o.value) {
      it->second = o.value;
      trace.events.push_back({o.timestamp, o.tag, std::move(o.value)});
    }
  }
  for (const std::string& tag : tag_universe)
    if (!last.count(tag))
      trace.warnings.push_back("tag '" + tag + "' has no observations");
  return trace;
}

}  // namespace

EventTrace extract_events(const rdf::TripleSource& source,
                          const std::set<std::string>& tag_universe) {
  static const query::QueryAst ast =
      query::parse(kObservationQuery, &rdf::default_prefixes());
  query::ResultTable table = query::evaluate(ast, source);

  std::vector<RawObservation> observations;
  for (const auto& row : table.rows) {
    if (!row[0] || !row[1] || !row[2]) continue;
    if (!rdf::is_iri(*row[0]) || !rdf::is_literal(*row[1]) || !rdf::is_literal(*row[2]))
      continue;
    std::string tag = std::get<rdf::Iri>(*row[0]).local_name();
    if (!tag_universe.count(tag)) continue;
    const std::string& lexical = std::get<rdf::Literal>(*row[1]).lexical;
    auto ts = util::parse_iso8601(lexical);
    if (!ts)
      throw Error("observation time '" + lexical + "' for tag '" + tag +
                  "' is not a timestamp");
    observations.push_back({*ts, std::move(tag), std::get<rdf::Literal>(*row[2]).lexical});
  }
  return compress(std::move(observations), tag_universe);
}

EventTrace events_from_log(const util::CsvTable& log,
                           const std::set<std::string>& tag_universe) {
  const std::vector<std::string> expected = {"timestamp", "tag", "value", "kind"};
  if (log.header != expected)
    throw Error("sensor log must have columns timestamp,tag,value,kind");

  std::vector<RawObservation> observations;
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const auto& row = log.rows[i];
    if (row[3] != "discrete") continue;
    if (!tag_universe.count(row[1])) continue;
    auto ts = util::parse_iso8601(row[0]);
    if (!ts)
      throw Error("sensor log row " + std::to_string(i) + ": bad timestamp '" + row[0] + "'");
    observations.push_back({*ts, row[1], row[2]});
  }
  return compress(std::move(observations), tag_universe);
}

}  // namespace plantkg::learn
