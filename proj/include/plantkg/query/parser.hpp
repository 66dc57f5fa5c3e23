#pragma once

#include <string>
#include <string_view>

#include "plantkg/query/ast.hpp"
#include "plantkg/rdf/graph.hpp"

namespace plantkg::query {

// Parses the supported query subset: SELECT (vars or *), a group of triple
// patterns with ';'/',' lists, one optional VALUES block, FILTER comparisons,
// ORDER BY on a single variable, LIMIT. PREFIX declarations may precede the
// query; `base_prefixes` are available without declaration.
//
// Every select/filter/order/VALUES variable must occur in a triple pattern or
// the VALUES clause; violations are rejected at parse time.
QueryAst parse(std::string_view text,
               const rdf::NamespaceMap* base_prefixes = nullptr);

QueryAst parse_file(const std::string& path,
                    const rdf::NamespaceMap* base_prefixes = nullptr);

}  // namespace plantkg::query
