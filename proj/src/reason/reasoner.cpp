#include "plantkg/reason/reasoner.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "plantkg/error.hpp"
#include "plantkg/rdf/io.hpp"
#include "plantkg/util/strings.hpp"

namespace plantkg::reason {

using rdf::Graph;
using rdf::Iri;
using rdf::Term;
using rdf::Triple;

namespace {

Iri rdf_type() { return Iri(std::string(rdf::ns::rdf) + "type"); }
Iri sub_class_of() { return Iri(std::string(rdf::ns::rdfs) + "subClassOf"); }
Iri sub_property_of() { return Iri(std::string(rdf::ns::rdfs) + "subPropertyOf"); }
Iri domain_iri() { return Iri(std::string(rdf::ns::rdfs) + "domain"); }
Iri range_iri() { return Iri(std::string(rdf::ns::rdfs) + "range"); }

// Triples (subject, `via`, x) for a given subject, via the subject index.
void for_links(const Graph& g, const Term& subject, const Iri& via,
               const std::function<void(const Term&)>& fn) {
  for (const Triple* t : g.by_subject(subject))
    if (t->predicate == via) fn(t->object);
}

}  // namespace

const RuleSet& all_rules() {
  static const RuleSet rules = {
      Rule::SubClassTransitivity,    Rule::SubClassInstance,
      Rule::SubPropertyTransitivity, Rule::SubPropertyInheritance,
      Rule::Domain,                  Rule::Range,
  };
  return rules;
}

std::string rule_name(Rule r) {
  switch (r) {
    case Rule::SubClassTransitivity: return "subclass-transitivity";
    case Rule::SubClassInstance: return "subclass-instance";
    case Rule::SubPropertyTransitivity: return "subproperty-transitivity";
    case Rule::SubPropertyInheritance: return "subproperty-inheritance";
    case Rule::Domain: return "domain";
    case Rule::Range: return "range";
  }
  return "?";
}

Rule rule_from_name(const std::string& name) {
  for (Rule r : all_rules())
    if (rule_name(r) == name) return r;
  throw Error("unknown inference rule: " + name);
}

rdf::Graph rdfs_closure(const rdf::Graph& g, const RuleSet& rules) {
  if (rules.empty()) throw Error("closure invoked with no enabled rules");

  Graph out;
  out.add_all(g);

  // The fixpoint cannot exceed one triple per (node, node) pair and derived
  // predicate; every productive round adds at least one triple, so a round
  // counter past that bound means a non-monotone bug, not a big graph.
  std::unordered_set<std::string> nodes;
  for (const Triple& t : g.triples()) {
    nodes.insert(rdf::term_key(t.subject));
    nodes.insert(rdf::term_key(Term(t.predicate)));
    nodes.insert(rdf::term_key(t.object));
  }
  const std::size_t round_cap = nodes.size() * nodes.size() * 3 + 8;

  std::size_t round = 0;
  bool changed = true;
  while (changed) {
    if (++round > round_cap) throw Error("closure exceeded its iteration bound");
    changed = false;
    std::vector<Triple> fresh;

    // Snapshot iteration keeps each round well-defined; additions are
    // collected and applied between rounds.
    for (const Triple& t : out.triples()) {
      if (rules.count(Rule::SubClassTransitivity) && t.predicate == sub_class_of()) {
        for_links(out, t.object, sub_class_of(), [&](const Term& super) {
          fresh.push_back({t.subject, sub_class_of(), super});
        });
      }
      if (rules.count(Rule::SubClassInstance) && t.predicate == rdf_type()) {
        for_links(out, t.object, sub_class_of(), [&](const Term& super) {
          fresh.push_back({t.subject, rdf_type(), super});
        });
      }
      if (rules.count(Rule::SubPropertyTransitivity) &&
          t.predicate == sub_property_of()) {
        for_links(out, t.object, sub_property_of(), [&](const Term& super) {
          fresh.push_back({t.subject, sub_property_of(), super});
        });
      }
      if (rules.count(Rule::SubPropertyInheritance)) {
        for_links(out, Term(t.predicate), sub_property_of(), [&](const Term& super) {
          if (rdf::is_iri(super))
            fresh.push_back({t.subject, std::get<Iri>(super), t.object});
        });
      }
      if (rules.count(Rule::Domain)) {
        for_links(out, Term(t.predicate), domain_iri(), [&](const Term& klass) {
          fresh.push_back({t.subject, rdf_type(), klass});
        });
      }
      if (rules.count(Rule::Range) && !rdf::is_literal(t.object)) {
        for_links(out, Term(t.predicate), range_iri(), [&](const Term& klass) {
          fresh.push_back({t.object, rdf_type(), klass});
        });
      }
    }
    for (const Triple& t : fresh)
      if (out.add(t)) changed = true;
  }
  return out;
}

ConsistencyReport validate(const rdf::Graph& g,
                           const std::vector<ConstraintShape>& shapes) {
  ConsistencyReport report;
  for (const ConstraintShape& shape : shapes) {
    // Focus nodes: instances of the target class, in deterministic order.
    std::vector<Term> foci;
    for (const Triple* t : g.by_predicate(rdf_type()))
      if (t->object == Term(shape.target_class)) foci.push_back(t->subject);
    std::sort(foci.begin(), foci.end(), [](const Term& a, const Term& b) {
      return rdf::term_key(a) < rdf::term_key(b);
    });
    foci.erase(std::unique(foci.begin(), foci.end()), foci.end());

    for (const Term& focus : foci) {
      std::vector<const Term*> values;
      for (const Triple* t : g.by_subject(focus))
        if (t->predicate == shape.property) values.push_back(&t->object);

      if (values.size() < shape.min_count) {
        report.violations.push_back(
            {shape.id, focus, shape.property, values.size(), std::nullopt,
             "expected at least " + std::to_string(shape.min_count) + " value(s) of " +
                 shape.property.local_name() + ", found " +
                 std::to_string(values.size())});
      } else if (shape.max_count && values.size() > *shape.max_count) {
        report.violations.push_back(
            {shape.id, focus, shape.property, values.size(), std::nullopt,
             "expected at most " + std::to_string(*shape.max_count) + " value(s) of " +
                 shape.property.local_name() + ", found " +
                 std::to_string(values.size())});
      }
      if (shape.value_datatype) {
        for (const Term* v : values) {
          const auto* lit = std::get_if<rdf::Literal>(v);
          if (!lit || lit->datatype != *shape.value_datatype) {
            report.violations.push_back(
                {shape.id, focus, shape.property, std::nullopt, *v,
                 "value " + rdf::term_key(*v) + " does not have datatype " +
                     shape.value_datatype->local_name()});
          }
        }
      }
    }
  }
  return report;
}

namespace {

Iri resolve_shape_iri(const std::string& token, int line_no) {
  if (token.size() >= 2 && token.front() == '<' && token.back() == '>')
    return Iri(token.substr(1, token.size() - 2));
  auto colon = token.find(':');
  if (colon == std::string::npos)
    throw ParseError("expected a prefixed name or <IRI>, got '" + token + "'", line_no);
  auto base = rdf::default_prefixes().lookup(token.substr(0, colon));
  if (!base) throw ParseError("unknown prefix: " + token.substr(0, colon), line_no);
  return Iri(*base + token.substr(colon + 1));
}

}  // namespace

std::vector<ConstraintShape> parse_shapes(std::string_view text) {
  std::vector<ConstraintShape> shapes;
  int line_no = 0;
  for (const std::string& raw : util::split(text, '\n')) {
    ++line_no;
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> tok = util::split_ws(line);
    if (tok.size() < 10 || tok[0] != "shape" || tok[2] != "target" ||
        tok[4] != "property" || tok[6] != "min" || tok[8] != "max")
      throw ParseError(
          "expected: shape <id> target <class> property <iri> min <n> max <n|*> "
          "[datatype <iri>]",
          line_no);
    ConstraintShape shape;
    shape.id = tok[1];
    for (const ConstraintShape& s : shapes)
      if (s.id == shape.id) throw ParseError("duplicate shape id: " + shape.id, line_no);
    shape.target_class = resolve_shape_iri(tok[3], line_no);
    shape.property = resolve_shape_iri(tok[5], line_no);
    if (!util::is_integer(tok[7]) || tok[7][0] == '-')
      throw ParseError("min must be a non-negative integer", line_no);
    shape.min_count = std::stoull(tok[7]);
    if (tok[9] != "*") {
      if (!util::is_integer(tok[9]) || tok[9][0] == '-')
        throw ParseError("max must be a non-negative integer or *", line_no);
      shape.max_count = std::stoull(tok[9]);
      if (*shape.max_count < shape.min_count)
        throw ParseError("min exceeds max in shape " + shape.id, line_no);
    }
    std::size_t i = 10;
    if (i < tok.size()) {
      if (tok[i] != "datatype" || i + 1 >= tok.size())
        throw ParseError("expected: datatype <iri>", line_no);
      shape.value_datatype = resolve_shape_iri(tok[i + 1], line_no);
      i += 2;
    }
    if (i != tok.size()) throw ParseError("trailing tokens after shape", line_no);
    shapes.push_back(std::move(shape));
  }
  return shapes;
}

std::vector<ConstraintShape> load_shapes_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_shapes(buf.str());
}

}  // namespace plantkg::reason
