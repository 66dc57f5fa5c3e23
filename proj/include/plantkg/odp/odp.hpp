#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plantkg/rdf/graph.hpp"

namespace plantkg::odp {

// One reusable pattern, based on exactly one standard; its T-Box lives in the
// pattern's own namespace(s).
struct Odp {
  std::string id;            // vdi3682 | isa88 | sosa | din61360
  std::string standard_ref;  // the standard the pattern is based on
  rdf::Graph tbox;
};

const std::vector<std::string>& bundled_odp_ids();

// Loads a bundled pattern from `<odp_dir>/<id>.ttl` and checks that all
// non-built-in IRIs stay within the namespaces the file declares.
Odp load_odp(const std::string& id, const std::string& odp_dir);

// The four composition mechanisms. Each emits a fixed triple shape:
//   EquivalentTo     source owl:equivalentClass target          (1 triple)
//   SubClassing      source rdfs:subClassOf target              (1 triple)
//   RelationTo       new object property relation_name with
//                    rdfs:domain source, rdfs:range target      (3 triples)
//   AttributeToClass new class <ns>#<Attr>Class plus a linking
//                    property <ns>#has<Attr> from source        (3 triples)
enum class Mechanism { EquivalentTo, SubClassing, RelationTo, AttributeToClass };

struct AlignmentAxiom {
  Mechanism mechanism;
  rdf::Iri source;
  rdf::Iri target;                          // AttributeToClass: the attribute
  std::optional<rdf::Iri> relation_name;    // RelationTo only
};

// The exact triples one axiom emits (see table above).
rdf::Graph alignment_triples(const AlignmentAxiom& axiom);

// Composed project ontology: member patterns plus alignment triples.
struct Lwo {
  std::vector<std::string> odp_ids;
  std::vector<AlignmentAxiom> alignments;
  rdf::Graph tbox;
};

// Validates the axiom against the draft's T-Box (source/target must resolve;
// a RelationTo name must be fresh) and adds its triples.
Lwo align(Lwo draft, const AlignmentAxiom& axiom);

// Union of member T-Boxes plus all alignment triples. Order of ids and
// axioms does not affect the result.
Lwo compose_lwo(const std::vector<std::string>& odp_ids,
                const std::vector<AlignmentAxiom>& axioms,
                const std::string& odp_dir);

// Alignment file: one axiom per line —
//   equivalent_to <class> <class>
//   sub_classing <subclass> <superclass>
//   relation_to <domain> <range> <new property>
//   attribute_to_class <owner class> <attribute>
// Terms are prefixed names or full IRIs in angle brackets; '#' comments.
std::vector<AlignmentAxiom> parse_alignments(std::string_view text,
                                             const rdf::NamespaceMap& prefixes);
std::vector<AlignmentAxiom> load_alignment_file(const std::string& path,
                                                const rdf::NamespaceMap& prefixes);

}  // namespace plantkg::odp
