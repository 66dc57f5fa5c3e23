#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plantkg/rdf/term.hpp"

namespace plantkg::query {

enum class FilterOp { Eq, Ne, Lt, Le, Gt, Ge };

// One comparison; operands are variables or constant terms.
struct FilterExpr {
  rdf::PatternNode lhs;
  FilterOp op;
  rdf::PatternNode rhs;
};

// Inline solution block: rows of constants bound to the listed variables.
struct ValuesClause {
  std::vector<std::string> vars;
  std::vector<std::vector<rdf::Term>> rows;  // each row has vars.size() cells
};

struct OrderSpec {
  std::string var;
  bool ascending = true;
};

struct QueryAst {
  bool select_all = false;             // SELECT *
  std::vector<std::string> select_vars;
  std::vector<rdf::TriplePattern> where;
  std::optional<ValuesClause> values;
  std::vector<FilterExpr> filters;
  std::optional<OrderSpec> order_by;
  std::optional<std::size_t> limit;
};

// Projected solutions. A cell is unbound only when a select variable is
// missing from a solution, which the supported grammar cannot produce but
// the table representation allows.
struct ResultTable {
  std::vector<std::string> header;  // variable names without '?'
  std::vector<std::vector<std::optional<rdf::Term>>> rows;
};

}  // namespace plantkg::query
