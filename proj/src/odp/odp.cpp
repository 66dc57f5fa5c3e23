#include "plantkg/odp/odp.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "plantkg/error.hpp"
#include "plantkg/rdf/io.hpp"
#include "plantkg/util/strings.hpp"

namespace plantkg::odp {

using rdf::Graph;
using rdf::Iri;
using rdf::Term;
using rdf::Triple;

namespace {

const std::map<std::string, std::string> standard_refs = {
    {"sosa", "W3C SOSA/SSN"},
    {"isa88", "IEC 61512 (ISA 88)"},
    {"vdi3682", "VDI 3682"},
    {"din61360", "DIN EN 61360"},
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Every non-built-in IRI in a pattern file must live under one of the
// namespaces the file itself declares; a stray IRI almost always means a
// typo'd prefix or an accidental dependency on another pattern.
void check_own_namespaces(const std::string& id, const Graph& g) {
  const char* builtins[] = {rdf::ns::rdf, rdf::ns::rdfs, rdf::ns::owl, rdf::ns::xsd};
  auto in_scope = [&](const Iri& iri) {
    for (const char* base : builtins)
      if (util::starts_with(iri.value, base)) return true;
    for (const auto& [prefix, base] : g.namespaces().entries())
      if (util::starts_with(iri.value, base)) return true;
    return false;
  };
  auto check = [&](const Iri& iri) {
    if (!in_scope(iri))
      throw Error("pattern " + id + " references foreign IRI <" + iri.value + ">");
  };
  for (const Triple& t : g.triples()) {
    if (rdf::is_iri(t.subject)) check(std::get<Iri>(t.subject));
    check(t.predicate);
    if (rdf::is_iri(t.object)) check(std::get<Iri>(t.object));
  }
}

// "http://example.org/din61360#unitOfMeasure" -> namespace part including
// the separator, local part, and the local part with its first letter
// upper-cased (used when minting class/property names).
std::string namespace_of(const Iri& iri) {
  auto pos = iri.value.find_last_of("#/");
  if (pos == std::string::npos)
    throw Error("cannot split IRI into namespace and local name: <" + iri.value + ">");
  return iri.value.substr(0, pos + 1);
}

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

bool mentions(const Graph& g, const Iri& iri) {
  for (const Triple& t : g.triples()) {
    if (t.subject == Term(iri) || t.predicate == iri || t.object == Term(iri)) return true;
  }
  return false;
}

const char* mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::EquivalentTo: return "equivalent_to";
    case Mechanism::SubClassing: return "sub_classing";
    case Mechanism::RelationTo: return "relation_to";
    case Mechanism::AttributeToClass: return "attribute_to_class";
  }
  return "?";
}

// Source and target must already exist in the T-Box being extended; a
// relation_to property must be new there (and only relation_to names one).
void validate_axiom(const AlignmentAxiom& axiom, const Graph& tbox) {
  if (axiom.relation_name.has_value() != (axiom.mechanism == Mechanism::RelationTo)) {
    throw Error(axiom.relation_name ? std::string("only relation_to takes a property name")
                                    : std::string("relation_to requires a property name"));
  }
  if (!mentions(tbox, axiom.source))
    throw Error(std::string(mechanism_name(axiom.mechanism)) + ": source <" +
                axiom.source.value + "> is not defined by the composed patterns");
  if (!mentions(tbox, axiom.target))
    throw Error(std::string(mechanism_name(axiom.mechanism)) + ": target <" +
                axiom.target.value + "> is not defined by the composed patterns");
  if (axiom.relation_name && mentions(tbox, *axiom.relation_name))
    throw Error("relation_to: property <" + axiom.relation_name->value +
                "> is already in use");
}

Iri resolve_term(const std::string& token, const rdf::NamespaceMap& prefixes,
                 int line_no) {
  if (token.size() >= 2 && token.front() == '<' && token.back() == '>')
    return Iri(token.substr(1, token.size() - 2));
  auto colon = token.find(':');
  if (colon == std::string::npos)
    throw ParseError("expected a prefixed name or <IRI>, got '" + token + "'", line_no);
  auto base = prefixes.lookup(token.substr(0, colon));
  if (!base) throw ParseError("unknown prefix: " + token.substr(0, colon), line_no);
  return Iri(*base + token.substr(colon + 1));
}

}  // namespace

const std::vector<std::string>& bundled_odp_ids() {
  static const std::vector<std::string> ids = {"sosa", "isa88", "vdi3682", "din61360"};
  return ids;
}

Odp load_odp(const std::string& id, const std::string& odp_dir) {
  auto ref = standard_refs.find(id);
  if (ref == standard_refs.end()) throw Error("unknown pattern id: " + id);
  Odp odp;
  odp.id = id;
  odp.standard_ref = ref->second;
  odp.tbox = rdf::load_file(odp_dir + "/" + id + ".ttl");
  check_own_namespaces(id, odp.tbox);
  return odp;
}

Graph alignment_triples(const AlignmentAxiom& axiom) {
  const Iri type(std::string(rdf::ns::rdf) + "type");
  const Iri sub_class_of(std::string(rdf::ns::rdfs) + "subClassOf");
  const Iri domain(std::string(rdf::ns::rdfs) + "domain");
  const Iri range(std::string(rdf::ns::rdfs) + "range");

  Graph g;
  switch (axiom.mechanism) {
    case Mechanism::EquivalentTo:
      g.add({axiom.source, Iri(std::string(rdf::ns::owl) + "equivalentClass"),
             axiom.target});
      break;
    case Mechanism::SubClassing:
      g.add({axiom.source, sub_class_of, axiom.target});
      break;
    case Mechanism::RelationTo: {
      if (!axiom.relation_name) throw Error("relation_to requires a property name");
      const Iri& rel = *axiom.relation_name;
      g.add({rel, type, Iri(std::string(rdf::ns::owl) + "ObjectProperty")});
      g.add({rel, domain, axiom.source});
      g.add({rel, range, axiom.target});
      break;
    }
    case Mechanism::AttributeToClass: {
      // Lift the attribute to a class of its own, minted next to the
      // attribute: ns#unitOfMeasure -> ns#UnitOfMeasureClass plus a
      // linking property ns#hasUnitOfMeasure from the owner class.
      std::string base = namespace_of(axiom.target);
      std::string name = capitalized(axiom.target.local_name());
      Iri lifted(base + name + "Class");
      Iri link(base + "has" + name);
      g.add({lifted, type, Iri(std::string(rdf::ns::owl) + "Class")});
      g.add({link, domain, axiom.source});
      g.add({link, range, lifted});
      break;
    }
  }
  return g;
}

Lwo align(Lwo draft, const AlignmentAxiom& axiom) {
  validate_axiom(axiom, draft.tbox);
  draft.alignments.push_back(axiom);
  draft.tbox.add_all(alignment_triples(axiom));
  return draft;
}

Lwo compose_lwo(const std::vector<std::string>& odp_ids,
                const std::vector<AlignmentAxiom>& axioms,
                const std::string& odp_dir) {
  Lwo lwo;
  lwo.odp_ids = odp_ids;
  std::set<std::string> seen;
  for (const auto& id : odp_ids) {
    if (!seen.insert(id).second) throw Error("duplicate pattern id: " + id);
    lwo.tbox.add_all(load_odp(id, odp_dir).tbox);
  }
  // Validate every axiom against the plain pattern union before emitting
  // anything, so the result cannot depend on axiom order.
  std::set<std::string> minted;
  for (const auto& axiom : axioms) {
    validate_axiom(axiom, lwo.tbox);
    if (axiom.relation_name && !minted.insert(axiom.relation_name->value).second)
      throw Error("relation_to: property <" + axiom.relation_name->value +
                  "> is minted twice");
  }
  lwo.alignments = axioms;
  for (const auto& axiom : axioms) lwo.tbox.add_all(alignment_triples(axiom));
  lwo.tbox.namespaces().merge(rdf::default_prefixes());
  return lwo;
}

std::vector<AlignmentAxiom> parse_alignments(std::string_view text,
                                             const rdf::NamespaceMap& prefixes) {
  std::vector<AlignmentAxiom> axioms;
  int line_no = 0;
  for (const std::string& raw : util::split(text, '\n')) {
    ++line_no;
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> tokens = util::split_ws(line);
    const std::string& keyword = tokens[0];

    Mechanism mechanism;
    std::size_t args;
    if (keyword == "equivalent_to") {
      mechanism = Mechanism::EquivalentTo;
      args = 2;
    } else if (keyword == "sub_classing") {
      mechanism = Mechanism::SubClassing;
      args = 2;
    } else if (keyword == "relation_to") {
      mechanism = Mechanism::RelationTo;
      args = 3;
    } else if (keyword == "attribute_to_class") {
      mechanism = Mechanism::AttributeToClass;
      args = 2;
    } else {
      throw ParseError("unknown alignment mechanism '" + keyword + "'", line_no);
    }
    if (tokens.size() != args + 1)
      throw ParseError(keyword + " expects " + std::to_string(args) + " terms",
                       line_no);

    AlignmentAxiom axiom;
    axiom.mechanism = mechanism;
    axiom.source = resolve_term(tokens[1], prefixes, line_no);
    axiom.target = resolve_term(tokens[2], prefixes, line_no);
    if (mechanism == Mechanism::RelationTo)
      axiom.relation_name = resolve_term(tokens[3], prefixes, line_no);
    axioms.push_back(std::move(axiom));
  }
  return axioms;
}

std::vector<AlignmentAxiom> load_alignment_file(const std::string& path,
                                                const rdf::NamespaceMap& prefixes) {
  return parse_alignments(read_file(path), prefixes);
}

}  // namespace plantkg::odp
