#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace plantkg::rdf {

// Well-known namespaces used throughout the toolkit.
namespace ns {
inline constexpr const char* rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr const char* rdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr const char* owl = "http://www.w3.org/2002/07/owl#";
inline constexpr const char* xsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr const char* sosa = "http://www.w3.org/ns/sosa/";
inline constexpr const char* ssn = "http://www.w3.org/ns/ssn/";
}  // namespace ns

struct Iri {
  std::string value;

  Iri() = default;
  explicit Iri(std::string v) : value(std::move(v)) {}

  // Local name after the last '#' or '/'.
  std::string local_name() const;

  bool operator==(const Iri&) const = default;
  auto operator<=>(const Iri&) const = default;
};

struct BlankNode {
  std::string label;

  bool operator==(const BlankNode&) const = default;
  auto operator<=>(const BlankNode&) const = default;
};

struct Literal {
  std::string lexical;
  Iri datatype;                     // defaults to xsd:string when unspecified
  std::optional<std::string> lang;  // only with rdf:langString

  Literal() : datatype(xsd_string()) {}
  explicit Literal(std::string lex) : lexical(std::move(lex)), datatype(xsd_string()) {}
  Literal(std::string lex, Iri dt) : lexical(std::move(lex)), datatype(std::move(dt)) {}
  static Literal with_lang(std::string lex, std::string language);

  static Iri xsd_string() { return Iri(std::string(ns::xsd) + "string"); }
  static Iri lang_string() { return Iri(std::string(ns::rdf) + "langString"); }

  bool operator==(const Literal&) const = default;
  auto operator<=>(const Literal&) const = default;
};

using Term = std::variant<Iri, Literal, BlankNode>;

bool is_iri(const Term& t);
bool is_literal(const Term& t);
bool is_blank(const Term& t);

// Canonical text form used in hashes, indexes and error messages:
// <iri>, "lexical"^^<dt> / "lexical"@lang, _:label.
std::string term_key(const Term& t);

struct Triple {
  Term subject;  // Iri or BlankNode; never Literal
  Iri predicate;
  Term object;

  Triple(Term s, Iri p, Term o);

  bool operator==(const Triple&) const = default;
  auto operator<=>(const Triple&) const = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const;
};

struct Variable {
  std::string name;  // without the leading '?'

  bool operator==(const Variable&) const = default;
  auto operator<=>(const Variable&) const = default;
};

// One slot of a triple pattern: a concrete term or a variable.
using PatternNode = std::variant<Term, Variable>;

struct TriplePattern {
  PatternNode subject;
  PatternNode predicate;
  PatternNode object;

  static TriplePattern all();  // (?s ?p ?o)

  bool operator==(const TriplePattern&) const = default;
};

bool is_var(const PatternNode& n);
const Variable* as_var(const PatternNode& n);
const Term* as_term(const PatternNode& n);

// A solution mapping: variable name -> term, kept sorted by name.
class Binding {
 public:
  Binding() = default;

  // Returns false if the variable is already bound to a different term.
  bool bind(const std::string& var, const Term& value);
  const Term* get(const std::string& var) const;
  bool has(const std::string& var) const { return get(var) != nullptr; }

  const std::vector<std::pair<std::string, Term>>& entries() const {
    return entries_;
  }
  std::size_t size() const { return entries_.size(); }

  // Merge of two bindings; nullopt when they disagree on a shared variable.
  static std::optional<Binding> merged(const Binding& a, const Binding& b);

  bool operator==(const Binding&) const = default;

 private:
  std::vector<std::pair<std::string, Term>> entries_;
};

}  // namespace plantkg::rdf
