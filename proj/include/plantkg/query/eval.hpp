#pragma once

#include <optional>
#include <string>

#include "plantkg/query/ast.hpp"
#include "plantkg/rdf/graph.hpp"

namespace plantkg::query {

// Evaluates the query over any triple source (graph, virtual view, union).
// Solutions are the natural join of the patterns, joined with VALUES,
// restricted by filters, ordered/limited, then projected. Duplicate projected
// rows are kept (multiset semantics).
ResultTable evaluate(const QueryAst& ast, const rdf::TripleSource& source);

// Value ordering used by FILTER and ORDER BY: numeric literals by numeric
// value, xsd:dateTime by UTC instant, xsd:boolean false<true, strings
// byte-wise. nullopt when the operands have no defined ordering; a filter
// whose comparison is undefined removes the row ("no solution") rather than
// raising an error.
std::optional<int> compare_terms(const rdf::Term& a, const rdf::Term& b);

// Text form used for CSV cells: literals print their lexical form, IRIs
// compact to a prefixed name when possible, blank nodes print "_:label".
std::string render_term(const rdf::Term& t,
                        const rdf::NamespaceMap* prefixes = nullptr);

// CSV with one header row (variable names, no '?'); unbound cells are empty.
std::string to_csv(const ResultTable& table,
                   const rdf::NamespaceMap* prefixes = nullptr);

}  // namespace plantkg::query
