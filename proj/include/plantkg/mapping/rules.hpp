#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "plantkg/rdf/term.hpp"

namespace plantkg::mapping {

enum class ColumnKind { Text, Decimal, Boolean, Timestamp };

struct Column {
  std::string name;
  ColumnKind kind;
};

// One declared logical source: a CSV file with a fixed, typed schema.
struct SourceDecl {
  std::string id;
  std::string path;  // as written in the mapping file; resolved at bind time
  std::vector<Column> columns;
  bool streamable = false;  // may back virtual rules
};

// Object-side expressions of a predicate-object map.  `datatype` is an IRI,
// or empty for `auto` sniffing (boolean, then decimal, then dateTime, then
// plain string).
struct ColumnIri {
  std::string column;  // cell holds a prefixed name or full IRI
};
struct ColumnLiteral {
  std::string column;
  std::string datatype;  // empty = auto
};
struct TemplateIri {
  std::string tpl;  // "ModVA:obs_{row_id}" style; placeholders name columns
};
struct ConstantTerm {
  rdf::Term term;
};
// Joins the current row against `table` on equal values in `key_column`
// (same column name on both sides) and renders `tpl` against the matched
// foreign row.
struct LookupIri {
  std::string table;
  std::string key_column;
  std::string tpl;
};
using ObjectExpr =
    std::variant<ColumnIri, ColumnLiteral, TemplateIri, ConstantTerm, LookupIri>;

struct PoMap {
  rdf::Iri predicate;
  ObjectExpr object;
  bool inverse = false;      // emit (object, predicate, subject) instead
  std::string only_if_set;   // skip the map where this column's cell is empty
};

struct MappingRule {
  std::string id;
  std::string source_id;
  bool virtual_mode = false;
  std::string subject_template;
  std::optional<rdf::Iri> type_assertion;
  std::vector<PoMap> po_maps;
};

struct MappingRuleSet {
  std::vector<SourceDecl> sources;
  std::vector<MappingRule> rules;

  const SourceDecl* find_source(const std::string& id) const;
};

// Parses the line-oriented mapping DSL (grammar in the repository README)
// and validates every rule against the declared sources: referenced columns
// and lookup tables must exist, datatypes must be compatible with the
// declared column kinds, and virtual rules may only read streamable sources.
MappingRuleSet parse_rules(std::string_view text);
MappingRuleSet load_rules_file(const std::string& path);

// The subset of rules with the given mode, with sources kept as-is.
MappingRuleSet rules_with_mode(const MappingRuleSet& ruleset, bool virtual_mode);

}  // namespace plantkg::mapping
