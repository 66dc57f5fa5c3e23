#include "plantkg/mapping/engine.hpp"

#include <algorithm>
#include <unordered_set>

#include "plantkg/error.hpp"
#include "plantkg/rdf/io.hpp"
#include "plantkg/util/csv.hpp"
#include "plantkg/util/strings.hpp"
#include "plantkg/util/time.hpp"

namespace plantkg::mapping {

using rdf::Graph;
using rdf::Iri;
using rdf::Literal;
using rdf::Term;
using rdf::Triple;

namespace {

constexpr int kRowIdColumn = -1;

[[noreturn]] void row_error(const MappingRule& rule, std::size_t row,
                            const std::string& detail) {
  throw Error("rule '" + rule.id + "' row " + std::to_string(row) + " of " +
              rule.source_id + ": " + detail);
}

std::string kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Text: return "text";
    case ColumnKind::Decimal: return "decimal";
    case ColumnKind::Boolean: return "boolean";
    case ColumnKind::Timestamp: return "timestamp";
  }
  return "?";
}

bool cell_matches_kind(const std::string& cell, ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Text: return true;
    case ColumnKind::Decimal: return util::is_decimal(cell);
    case ColumnKind::Boolean: return cell == "true" || cell == "false";
    case ColumnKind::Timestamp: return util::parse_iso8601(cell).has_value();
  }
  return false;
}

// A template split into fixed text around column slots; slot -1 is the
// row_id pseudo-column.
struct CompiledTemplate {
  std::vector<std::string> fixed;  // size = slots.size() + 1
  std::vector<int> slots;
};

CompiledTemplate compile_template(const std::string& tpl, const Table& table) {
  CompiledTemplate out;
  std::string current;
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] != '{') {
      current += tpl[i++];
      continue;
    }
    auto close = tpl.find('}', i);
    std::string name = tpl.substr(i + 1, close - i - 1);
    out.fixed.push_back(std::move(current));
    current.clear();
    out.slots.push_back(name == "row_id" ? kRowIdColumn
                                         : static_cast<int>(table.column(name)));
    i = close + 1;
  }
  out.fixed.push_back(std::move(current));
  return out;
}

// Prefixed names expand against the built-in table; anything with a scheme
// separator passes through as a full IRI.
Iri resolve_iri_text(const std::string& text, const MappingRule& rule,
                     std::size_t row) {
  if (text.find("://") != std::string::npos) return Iri(text);
  auto colon = text.find(':');
  if (colon != std::string::npos) {
    if (auto base = rdf::default_prefixes().lookup(text.substr(0, colon)))
      return Iri(*base + text.substr(colon + 1));
  }
  row_error(rule, row, "'" + text + "' does not resolve to an IRI");
}

std::string render_template(const CompiledTemplate& tpl, const Table& table,
                            std::size_t row, const MappingRule& rule) {
  std::string out = tpl.fixed[0];
  for (std::size_t i = 0; i < tpl.slots.size(); ++i) {
    if (tpl.slots[i] == kRowIdColumn) {
      out += std::to_string(row);
    } else {
      const std::string& cell = table.cell(row, static_cast<std::size_t>(tpl.slots[i]));
      if (cell.empty())
        row_error(rule, row,
                  "column '" + table.decl().columns[tpl.slots[i]].name +
                      "' is empty in a template");
      out += cell;
    }
    out += tpl.fixed[i + 1];
  }
  return out;
}

Literal auto_literal(const std::string& cell) {
  if (cell == "true" || cell == "false")
    return Literal{cell, Iri(std::string(rdf::ns::xsd) + "boolean")};
  if (util::is_decimal(cell))
    return Literal{cell, Iri(std::string(rdf::ns::xsd) + "decimal")};
  if (util::parse_iso8601(cell))
    return Literal{cell, Iri(std::string(rdf::ns::xsd) + "dateTime")};
  return Literal{cell};
}

Literal typed_literal(const std::string& cell, const std::string& datatype,
                      const MappingRule& rule, std::size_t row) {
  if (datatype.empty()) return auto_literal(cell);
  const std::string xsd = rdf::ns::xsd;
  bool ok = true;
  if (datatype == xsd + "boolean")
    ok = cell == "true" || cell == "false";
  else if (datatype == xsd + "decimal")
    ok = util::is_decimal(cell);
  else if (datatype == xsd + "integer")
    ok = util::is_integer(cell);
  else if (datatype == xsd + "dateTime")
    ok = util::parse_iso8601(cell).has_value();
  if (!ok)
    row_error(rule, row, "value '" + cell + "' is not a valid " + datatype);
  return Literal{cell, Iri(datatype)};
}

Term eval_expr(const ObjectExpr& expr, const BoundSources& bound, const Table& table,
               std::size_t row, const MappingRule& rule) {
  if (const auto* c = std::get_if<ColumnIri>(&expr)) {
    return resolve_iri_text(table.cell(row, table.column(c->column)), rule, row);
  }
  if (const auto* c = std::get_if<ColumnLiteral>(&expr)) {
    return typed_literal(table.cell(row, table.column(c->column)), c->datatype, rule,
                         row);
  }
  if (const auto* t = std::get_if<TemplateIri>(&expr)) {
    CompiledTemplate compiled = compile_template(t->tpl, table);
    return resolve_iri_text(render_template(compiled, table, row, rule), rule, row);
  }
  if (const auto* k = std::get_if<ConstantTerm>(&expr)) return k->term;
  const auto& l = std::get<LookupIri>(expr);
  const Table& foreign = bound.table(l.table);
  const std::string& key = table.cell(row, table.column(l.key_column));
  const auto& hits = foreign.rows_with(foreign.column(l.key_column), key);
  if (hits.empty())
    row_error(rule, row, "no row in '" + l.table + "' has " + l.key_column + " '" +
                             key + "'");
  if (hits.size() > 1)
    row_error(rule, row, "lookup key '" + key + "' is ambiguous in '" + l.table + "'");
  CompiledTemplate compiled = compile_template(l.tpl, foreign);
  return resolve_iri_text(render_template(compiled, foreign, hits[0], rule), rule, row);
}

}  // namespace

Table::Table(SourceDecl decl, const std::string& resolved_path)
    : decl_(std::move(decl)) {
  util::CsvTable data = util::read_csv(resolved_path);
  std::vector<std::string> expected;
  for (const Column& c : decl_.columns) expected.push_back(c.name);
  if (data.header != expected)
    throw Error("source '" + decl_.id + "': header of " + resolved_path +
                " does not match the declared columns");
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    if (data.rows[r].size() != expected.size())
      throw Error("source '" + decl_.id + "' row " + std::to_string(r) +
                  ": wrong field count");
    for (std::size_t c = 0; c < expected.size(); ++c) {
      if (!cell_matches_kind(data.rows[r][c], decl_.columns[c].kind))
        throw Error("source '" + decl_.id + "' row " + std::to_string(r) +
                    ": value '" + data.rows[r][c] + "' is not a valid " +
                    kind_name(decl_.columns[c].kind));
    }
  }
  rows_ = std::move(data.rows);

  indexes_.resize(decl_.columns.size());
  for (std::size_t r = 0; r < rows_.size(); ++r)
    for (std::size_t c = 0; c < decl_.columns.size(); ++c)
      indexes_[c][rows_[r][c]].push_back(r);
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < decl_.columns.size(); ++i)
    if (decl_.columns[i].name == name) return i;
  throw Error("source '" + decl_.id + "' has no column '" + name + "'");
}

bool Table::has_column(const std::string& name) const {
  for (const Column& c : decl_.columns)
    if (c.name == name) return true;
  return false;
}

const std::vector<std::size_t>& Table::rows_with(std::size_t col,
                                                 const std::string& value) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = indexes_[col].find(value);
  return it == indexes_[col].end() ? kEmpty : it->second;
}

BoundSources BoundSources::bind(const MappingRuleSet& ruleset,
                                const std::string& base_dir,
                                const std::map<std::string, std::string>& overrides) {
  BoundSources out;
  for (const SourceDecl& decl : ruleset.sources) {
    std::string path = decl.path;
    if (auto it = overrides.find(decl.id); it != overrides.end())
      path = it->second;
    else if (!base_dir.empty() && !path.empty() && path.front() != '/')
      path = base_dir + "/" + path;
    out.tables_.emplace(decl.id, Table(decl, path));
  }
  return out;
}

const Table& BoundSources::table(const std::string& id) const {
  auto it = tables_.find(id);
  if (it == tables_.end()) throw Error("source '" + id + "' is not bound");
  return it->second;
}

std::vector<Triple> map_row(const MappingRule& rule, const BoundSources& bound,
                            std::size_t row) {
  const Table& table = bound.table(rule.source_id);
  CompiledTemplate subject_tpl = compile_template(rule.subject_template, table);
  Term subject =
      resolve_iri_text(render_template(subject_tpl, table, row, rule), rule, row);

  std::vector<Triple> out;
  std::unordered_set<Triple, rdf::TripleHash> seen;
  auto push = [&](Triple t) {
    if (seen.insert(t).second) out.push_back(std::move(t));
  };
  if (rule.type_assertion)
    push({subject, Iri(std::string(rdf::ns::rdf) + "type"), *rule.type_assertion});
  for (const PoMap& po : rule.po_maps) {
    if (!po.only_if_set.empty() &&
        table.cell(row, table.column(po.only_if_set)).empty())
      continue;
    Term object = eval_expr(po.object, bound, table, row, rule);
    if (po.inverse)
      push({object, po.predicate, subject});
    else
      push({subject, po.predicate, object});
  }
  return out;
}

Graph materialize(const MappingRuleSet& ruleset, const BoundSources& bound) {
  Graph g;
  for (const MappingRule& rule : ruleset.rules) {
    const Table& table = bound.table(rule.source_id);
    for (std::size_t row = 0; row < table.row_count(); ++row)
      for (const Triple& t : map_row(rule, bound, row)) g.add(t);
  }
  g.namespaces().merge(rdf::default_prefixes());
  return g;
}

// One triple shape a rule can produce: subject expression, fixed predicate,
// object expression.  The type assertion and each po map become one emission;
// inverse maps swap which side carries the row subject.
struct VirtualView::Emission {
  const MappingRule* rule;
  const Table* table;
  ObjectExpr subject;
  Iri predicate;
  ObjectExpr object;
  int if_set_col = kRowIdColumn;  // -1 = no guard
};

VirtualView::VirtualView(MappingRuleSet ruleset, const BoundSources& bound)
    : rules_(std::move(ruleset)), bound_(bound) {
  for (const MappingRule& rule : rules_.rules) {
    const Table& table = bound.table(rule.source_id);
    TemplateIri subject{rule.subject_template};
    if (rule.type_assertion) {
      emissions_.push_back({&rule, &table, subject,
                            Iri(std::string(rdf::ns::rdf) + "type"),
                            ConstantTerm{*rule.type_assertion}, kRowIdColumn});
    }
    for (const PoMap& po : rule.po_maps) {
      int guard = po.only_if_set.empty()
                      ? kRowIdColumn
                      : static_cast<int>(table.column(po.only_if_set));
      if (po.inverse)
        emissions_.push_back({&rule, &table, po.object, po.predicate, subject, guard});
      else
        emissions_.push_back({&rule, &table, subject, po.predicate, po.object, guard});
    }
  }
}

VirtualView::~VirtualView() = default;

void VirtualView::reset_counters() const {
  rows_scanned_.store(0);
  bindings_emitted_.store(0);
}

namespace {

// Row pruning for a concrete pattern term against one expression side.
// nullopt: cannot prune (scan everything); otherwise the sorted candidate
// row set, possibly empty.
std::optional<std::vector<std::size_t>> invert_expr(const ObjectExpr& expr,
                                                    const BoundSources& bound,
                                                    const Table& table,
                                                    const Term& target) {
  if (const auto* k = std::get_if<ConstantTerm>(&expr)) {
    if (k->term == target) return std::nullopt;  // matches every row
    return std::vector<std::size_t>{};
  }
  if (const auto* c = std::get_if<ColumnLiteral>(&expr)) {
    const Literal* lit = std::get_if<Literal>(&target);
    if (!lit) return std::vector<std::size_t>{};
    // The emitted lexical form is the raw cell, so equal literals force an
    // equal cell; datatype agreement is re-checked per row later.
    return table.rows_with(table.column(c->column), lit->lexical);
  }
  if (const auto* t = std::get_if<TemplateIri>(&expr)) {
    const Iri* iri = std::get_if<Iri>(&target);
    if (!iri) return std::vector<std::size_t>{};
    CompiledTemplate compiled = compile_template(t->tpl, table);
    if (compiled.slots.size() != 1) return std::nullopt;

    std::string left = compiled.fixed[0];
    const std::string& right = compiled.fixed[1];
    // Expand the prefix part of the fixed text the same way rendering will.
    auto colon = left.find(':');
    if (left.find("://") == std::string::npos && colon != std::string::npos) {
      auto base = rdf::default_prefixes().lookup(left.substr(0, colon));
      if (!base) return std::nullopt;
      left = *base + left.substr(colon + 1);
    }
    const std::string& value = iri->value;
    if (value.size() < left.size() + right.size() ||
        !util::starts_with(value, left) || !util::ends_with(value, right))
      return std::vector<std::size_t>{};
    std::string middle = value.substr(left.size(), value.size() - left.size() - right.size());
    if (compiled.slots[0] == kRowIdColumn) {
      if (!util::is_integer(middle) || middle[0] == '-') return std::vector<std::size_t>{};
      std::size_t row = std::stoull(middle);
      if (row >= table.row_count() || std::to_string(row) != middle)
        return std::vector<std::size_t>{};
      return std::vector<std::size_t>{row};
    }
    return table.rows_with(static_cast<std::size_t>(compiled.slots[0]), middle);
  }
  if (const auto* l = std::get_if<LookupIri>(&expr)) {
    const Iri* iri = std::get_if<Iri>(&target);
    if (!iri) return std::vector<std::size_t>{};
    const Table& foreign = bound.table(l->table);
    CompiledTemplate compiled = compile_template(l->tpl, foreign);
    std::size_t foreign_key = foreign.column(l->key_column);
    std::vector<std::size_t> rows;
    for (std::size_t fr = 0; fr < foreign.row_count(); ++fr) {
      std::string rendered;
      try {
        // No rule context here; any render problem falls back to a scan.
        MappingRule dummy;
        rendered = render_template(compiled, foreign, fr, dummy);
      } catch (const Error&) {
        return std::nullopt;
      }
      Iri resolved;
      if (rendered.find("://") != std::string::npos) {
        resolved = Iri(rendered);
      } else {
        auto colon2 = rendered.find(':');
        if (colon2 == std::string::npos) return std::nullopt;
        auto base = rdf::default_prefixes().lookup(rendered.substr(0, colon2));
        if (!base) return std::nullopt;
        resolved = Iri(*base + rendered.substr(colon2 + 1));
      }
      if (resolved == *iri) {
        const auto& hits =
            table.rows_with(table.column(l->key_column), foreign.cell(fr, foreign_key));
        rows.insert(rows.end(), hits.begin(), hits.end());
      }
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
  }
  return std::nullopt;  // ColumnIri: cell spelling is not unique, scan
}

}  // namespace

void VirtualView::match(const rdf::TriplePattern& pattern,
                        const std::function<void(const rdf::Binding&)>& sink) const {
  const Term* pred = rdf::as_term(pattern.predicate);
  if (pred && !rdf::is_iri(*pred)) return;
  const Term* subj = rdf::as_term(pattern.subject);
  const Term* obj = rdf::as_term(pattern.object);

  std::unordered_set<Triple, rdf::TripleHash> seen;
  for (const Emission& e : emissions_) {
    if (pred && std::get<Iri>(*pred) != e.predicate) continue;
    const Table& table = *e.table;

    std::optional<std::vector<std::size_t>> rows;
    if (subj) rows = invert_expr(e.subject, bound_, table, *subj);
    if (!rows && obj) rows = invert_expr(e.object, bound_, table, *obj);

    auto visit = [&](std::size_t row) {
      rows_scanned_.fetch_add(1);
      if (e.if_set_col >= 0 && table.cell(row, e.if_set_col).empty()) return;
      Term s = eval_expr(e.subject, bound_, table, row, *e.rule);
      Term o = eval_expr(e.object, bound_, table, row, *e.rule);
      Triple t(std::move(s), e.predicate, std::move(o));
      if (auto b = rdf::match_triple(pattern, t)) {
        if (seen.insert(t).second) {
          bindings_emitted_.fetch_add(1);
          sink(*b);
        }
      }
    };
    if (rows) {
      for (std::size_t row : *rows) visit(row);
    } else {
      for (std::size_t row = 0; row < table.row_count(); ++row) visit(row);
    }
  }
}

}  // namespace plantkg::mapping
