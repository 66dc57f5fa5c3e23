#include "plantkg/query/eval.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "plantkg/util/csv.hpp"
#include "plantkg/util/strings.hpp"
#include "plantkg/util/time.hpp"

namespace plantkg::query {

namespace {

using rdf::Binding;
using rdf::Iri;
using rdf::Literal;
using rdf::NamespaceMap;
using rdf::PatternNode;
using rdf::Term;
using rdf::TriplePattern;
using rdf::TripleSource;
using rdf::Variable;

std::string xsd(const char* local) {
  return std::string(rdf::ns::xsd) + local;
}

bool is_numeric_datatype(const std::string& dt) {
  static const std::set<std::string> numeric = {
      xsd("integer"), xsd("decimal"), xsd("double"),
      xsd("float"),   xsd("int"),     xsd("long"),
  };
  return numeric.count(dt) > 0;
}

std::optional<double> numeric_value(const Literal& lit) {
  if (!is_numeric_datatype(lit.datatype.value)) return std::nullopt;
  const char* begin = lit.lexical.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') return std::nullopt;
  return v;
}

int sign_of(double d) { return d < 0 ? -1 : (d > 0 ? 1 : 0); }

int lexical_compare(const std::string& a, const std::string& b) {
  return sign_of(static_cast<double>(a.compare(b)));
}

// Literal value families used for ordering: numeric, temporal, boolean,
// plain text, everything else (ordered by datatype, then lexical).
int literal_family(const Literal& lit) {
  if (is_numeric_datatype(lit.datatype.value)) return 0;
  if (lit.datatype.value == xsd("dateTime")) return 1;
  if (lit.datatype.value == xsd("boolean")) return 2;
  if (lit.datatype == Literal::xsd_string() ||
      lit.datatype == Literal::lang_string())
    return 3;
  return 4;
}

}  // namespace

std::optional<int> compare_terms(const Term& a, const Term& b) {
  const Literal* la = std::get_if<Literal>(&a);
  const Literal* lb = std::get_if<Literal>(&b);
  if (!la || !lb) return std::nullopt;

  if (auto va = numeric_value(*la)) {
    if (auto vb = numeric_value(*lb)) return sign_of(*va - *vb);
    return std::nullopt;
  }
  if (la->datatype.value == xsd("dateTime") &&
      lb->datatype.value == xsd("dateTime")) {
    auto ta = util::parse_iso8601(la->lexical);
    auto tb = util::parse_iso8601(lb->lexical);
    if (ta && tb) return sign_of(static_cast<double>(*ta - *tb));
    return std::nullopt;
  }
  if (la->datatype.value == xsd("boolean") &&
      lb->datatype.value == xsd("boolean"))
    return lexical_compare(la->lexical, lb->lexical);  // "false" < "true"
  if (la->datatype == Literal::xsd_string() &&
      lb->datatype == Literal::xsd_string())
    return lexical_compare(la->lexical, lb->lexical);
  if (la->datatype == Literal::lang_string() &&
      lb->datatype == Literal::lang_string() && la->lang == lb->lang)
    return lexical_compare(la->lexical, lb->lexical);
  return std::nullopt;
}

namespace {

// Tri-state filter: nullopt means the comparison is undefined for these
// operands, which removes the row just like a false result, but is kept
// distinct for clarity.
std::optional<bool> filter_result(const FilterExpr& f, const Binding& b) {
  auto resolve = [&b](const PatternNode& n) -> const Term* {
    if (const Variable* v = rdf::as_var(n)) return b.get(v->name);
    return rdf::as_term(n);
  };
  const Term* lhs = resolve(f.lhs);
  const Term* rhs = resolve(f.rhs);
  if (!lhs || !rhs) return std::nullopt;

  if (auto cmp = compare_terms(*lhs, *rhs)) {
    switch (f.op) {
      case FilterOp::Eq: return *cmp == 0;
      case FilterOp::Ne: return *cmp != 0;
      case FilterOp::Lt: return *cmp < 0;
      case FilterOp::Le: return *cmp <= 0;
      case FilterOp::Gt: return *cmp > 0;
      case FilterOp::Ge: return *cmp >= 0;
    }
  }
  if (f.op == FilterOp::Eq || f.op == FilterOp::Ne) {
    // Identity comparison for term kinds without a value ordering.
    bool eq;
    if (rdf::is_iri(*lhs) && rdf::is_iri(*rhs)) {
      eq = (*lhs == *rhs);
    } else if (rdf::is_blank(*lhs) && rdf::is_blank(*rhs)) {
      eq = (*lhs == *rhs);
    } else if (rdf::is_literal(*lhs) && rdf::is_literal(*rhs)) {
      const Literal& la = std::get<Literal>(*lhs);
      const Literal& lb = std::get<Literal>(*rhs);
      if (la.datatype != lb.datatype || la.lang != lb.lang)
        return std::nullopt;  // incompatible datatypes: no solution
      eq = (la.lexical == lb.lexical);
    } else {
      return std::nullopt;
    }
    return f.op == FilterOp::Eq ? eq : !eq;
  }
  return std::nullopt;
}

// Total order over optional terms for ORDER BY: unbound < blank < IRI <
// literal; literals by family, then value, then lexical tie-breakers.
int order_compare(const std::optional<Term>& a, const std::optional<Term>& b) {
  auto rank = [](const std::optional<Term>& t) {
    if (!t) return 0;
    if (rdf::is_blank(*t)) return 1;
    if (rdf::is_iri(*t)) return 2;
    return 3;
  };
  int ra = rank(a), rb = rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  if (ra == 0) return 0;
  if (ra == 1)
    return lexical_compare(std::get<rdf::BlankNode>(*a).label,
                           std::get<rdf::BlankNode>(*b).label);
  if (ra == 2)
    return lexical_compare(std::get<Iri>(*a).value, std::get<Iri>(*b).value);

  const Literal& la = std::get<Literal>(*a);
  const Literal& lb = std::get<Literal>(*b);
  int fa = literal_family(la), fb = literal_family(lb);
  if (fa != fb) return fa < fb ? -1 : 1;
  if (auto cmp = compare_terms(*a, *b); cmp && *cmp != 0) return *cmp;
  // Tie-break on the raw form so the order is total even for equal values
  // with different spellings ("1.0" vs "1.00") or exotic datatypes.
  if (int c = lexical_compare(la.datatype.value, lb.datatype.value)) return c;
  if (int c = lexical_compare(la.lexical, lb.lexical)) return c;
  std::string langa = la.lang.value_or(""), langb = lb.lang.value_or("");
  return lexical_compare(langa, langb);
}

std::vector<std::string> vars_in_appearance_order(const QueryAst& ast) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto note = [&](const PatternNode& n) {
    if (const Variable* v = rdf::as_var(n))
      if (seen.insert(v->name).second) out.push_back(v->name);
  };
  for (const auto& p : ast.where) {
    note(p.subject);
    note(p.predicate);
    note(p.object);
  }
  if (ast.values)
    for (const auto& v : ast.values->vars)
      if (seen.insert(v).second) out.push_back(v);
  return out;
}

}  // namespace

ResultTable evaluate(const QueryAst& ast, const TripleSource& source) {
  std::vector<Binding> solutions{Binding()};

  // Left-to-right nested index join over the basic graph pattern.
  for (const TriplePattern& pattern : ast.where) {
    std::vector<Binding> next;
    for (const Binding& partial : solutions) {
      TriplePattern bound = rdf::substitute(pattern, partial);
      source.match(bound, [&](const Binding& found) {
        Binding merged = partial;
        bool ok = true;
        for (const auto& [name, value] : found.entries())
          if (!merged.bind(name, value)) {
            ok = false;
            break;
          }
        if (ok) next.push_back(std::move(merged));
      });
    }
    solutions = std::move(next);
  }

  if (ast.values) {
    std::vector<Binding> next;
    for (const Binding& partial : solutions) {
      for (const auto& row : ast.values->rows) {
        Binding merged = partial;
        bool ok = true;
        for (std::size_t i = 0; i < row.size(); ++i)
          if (!merged.bind(ast.values->vars[i], row[i])) {
            ok = false;
            break;
          }
        if (ok) next.push_back(std::move(merged));
      }
    }
    solutions = std::move(next);
  }

  for (const FilterExpr& f : ast.filters) {
    std::erase_if(solutions, [&f](const Binding& b) {
      return filter_result(f, b) != std::optional<bool>(true);
    });
  }

  if (ast.order_by) {
    const std::string& var = ast.order_by->var;
    bool asc = ast.order_by->ascending;
    std::stable_sort(solutions.begin(), solutions.end(),
                     [&](const Binding& x, const Binding& y) {
                       const Term* tx = x.get(var);
                       const Term* ty = y.get(var);
                       std::optional<Term> ox = tx ? std::optional<Term>(*tx)
                                                   : std::nullopt;
                       std::optional<Term> oy = ty ? std::optional<Term>(*ty)
                                                   : std::nullopt;
                       int c = order_compare(ox, oy);
                       return asc ? c < 0 : c > 0;
                     });
  }

  if (ast.limit && solutions.size() > *ast.limit) solutions.resize(*ast.limit);

  ResultTable table;
  table.header =
      ast.select_all ? vars_in_appearance_order(ast) : ast.select_vars;
  table.rows.reserve(solutions.size());
  for (const Binding& b : solutions) {
    std::vector<std::optional<Term>> row;
    row.reserve(table.header.size());
    for (const std::string& var : table.header) {
      const Term* t = b.get(var);
      row.push_back(t ? std::optional<Term>(*t) : std::nullopt);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render_term(const Term& t, const NamespaceMap* prefixes) {
  if (const Literal* lit = std::get_if<Literal>(&t)) return lit->lexical;
  if (const rdf::BlankNode* b = std::get_if<rdf::BlankNode>(&t))
    return "_:" + b->label;
  const Iri& iri = std::get<Iri>(t);
  if (prefixes)
    if (auto compacted = prefixes->compact(iri)) return *compacted;
  return iri.value;
}

std::string to_csv(const ResultTable& table, const NamespaceMap* prefixes) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += util::csv_escape(table.header[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (row[i]) out += util::csv_escape(render_term(*row[i], prefixes));
    }
    out += '\n';
  }
  return out;
}

}  // namespace plantkg::query
