#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "plantkg/rdf/graph.hpp"

namespace plantkg::reason {

// The six supported entailment rules.
enum class Rule {
  SubClassTransitivity,     // (A sub B), (B sub C)      -> (A sub C)
  SubClassInstance,         // (x type A), (A sub B)     -> (x type B)
  SubPropertyTransitivity,  // (p subp q), (q subp r)    -> (p subp r)
  SubPropertyInheritance,   // (s p o), (p subp q)       -> (s q o)
  Domain,                   // (s p o), (p domain C)     -> (s type C)
  Range,                    // (s p o), (p range C)      -> (o type C), o not a literal
};

using RuleSet = std::set<Rule>;
const RuleSet& all_rules();

// "subclass-transitivity", "domain", ... (used by configuration surfaces).
std::string rule_name(Rule r);
Rule rule_from_name(const std::string& name);

// Least fixpoint of the enabled rules: extensive (input is contained),
// idempotent, and monotone in the input.  The rule set must not be empty.
// A safety cap aborts if the fixpoint exceeds its theoretical size bound.
rdf::Graph rdfs_closure(const rdf::Graph& g, const RuleSet& rules);

// Cardinality/datatype constraint over instances of a class, in the spirit
// of a property shape: each instance of `target_class` must have between
// min_count and max_count values of `property`, all carrying
// `value_datatype` when one is given.
struct ConstraintShape {
  std::string id;
  rdf::Iri target_class;
  rdf::Iri property;
  std::size_t min_count = 0;
  std::optional<std::size_t> max_count;    // nullopt = unbounded
  std::optional<rdf::Iri> value_datatype;  // literal objects must match
};

struct Violation {
  std::string shape_id;
  rdf::Term focus;
  rdf::Iri property;
  std::optional<std::size_t> observed_count;  // set for cardinality breaches
  std::optional<rdf::Term> bad_value;         // set for datatype breaches
  std::string message;
};

// Violations are reported, never repaired; an empty report means the graph
// conforms to every shape.  Deterministic order: shapes in file order, then
// focus nodes by term key.
struct ConsistencyReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ConsistencyReport validate(const rdf::Graph& g,
                           const std::vector<ConstraintShape>& shapes);

// Shape file: one record per line —
//   shape <id> target <class> property <property> min <n> max <n|*> [datatype <iri>]
// '#' starts a comment line; IRIs are prefixed names or <...>.
std::vector<ConstraintShape> parse_shapes(std::string_view text);
std::vector<ConstraintShape> load_shapes_file(const std::string& path);

}  // namespace plantkg::reason
