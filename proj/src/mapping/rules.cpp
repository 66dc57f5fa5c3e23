#include "plantkg/mapping/rules.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "plantkg/error.hpp"
#include "plantkg/rdf/graph.hpp"
#include "plantkg/rdf/io.hpp"
#include "plantkg/util/strings.hpp"

namespace plantkg::mapping {

namespace {

struct Token {
  std::string text;
  bool quoted = false;
};

// Drops a trailing comment: a '#' outside quotes that starts the line or
// follows whitespace (so IRIs containing '#' survive).
std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"') in_quotes = !in_quotes;
    if (c == '#' && !in_quotes && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1]))))
      return line.substr(0, i);
  }
  return line;
}

// Whitespace-separated tokens where "..." is one token and a '('..')' group
// sticks to the word before it, e.g. `columns(a:text, b:decimal)`.
std::vector<Token> tokenize(const std::string& line, int line_no) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '"') {
      auto end = line.find('"', i + 1);
      if (end == std::string::npos) throw ParseError("unterminated string", line_no);
      tokens.push_back({line.substr(i + 1, end - i - 1), true});
      i = end + 1;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
           line[i] != '(')
      ++i;
    if (i < line.size() && line[i] == '(') {
      auto close = line.find(')', i);
      if (close == std::string::npos) throw ParseError("missing ')'", line_no);
      i = close + 1;
    }
    tokens.push_back({line.substr(start, i - start), false});
  }
  return tokens;
}

// "word(inner)" -> inner, if the token is of that shape with that word.
std::optional<std::string> group_of(const Token& t, std::string_view word) {
  if (t.quoted) return std::nullopt;
  if (!util::starts_with(t.text, std::string(word) + "(") || t.text.back() != ')')
    return std::nullopt;
  return t.text.substr(word.size() + 1, t.text.size() - word.size() - 2);
}

rdf::Iri resolve_iri_token(const Token& t, int line_no) {
  if (t.quoted)
    throw ParseError("expected an IRI or prefixed name, got a string", line_no);
  const std::string& s = t.text;
  if (s.size() >= 2 && s.front() == '<' && s.back() == '>')
    return rdf::Iri(s.substr(1, s.size() - 2));
  auto colon = s.find(':');
  if (colon == std::string::npos)
    throw ParseError("expected an IRI or prefixed name, got '" + s + "'", line_no);
  auto base = rdf::default_prefixes().lookup(s.substr(0, colon));
  if (!base) throw ParseError("unknown prefix: " + s.substr(0, colon), line_no);
  return rdf::Iri(*base + s.substr(colon + 1));
}

ColumnKind parse_kind(const std::string& s, int line_no) {
  if (s == "text") return ColumnKind::Text;
  if (s == "decimal") return ColumnKind::Decimal;
  if (s == "boolean") return ColumnKind::Boolean;
  if (s == "timestamp") return ColumnKind::Timestamp;
  throw ParseError("unknown column kind '" + s + "'", line_no);
}

// Placeholder names of a template, in order; throws on unbalanced braces.
std::vector<std::string> placeholders(const std::string& tpl, int line_no) {
  std::vector<std::string> names;
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '}') throw ParseError("'}' without '{' in template", line_no);
    if (tpl[i] != '{') {
      ++i;
      continue;
    }
    auto close = tpl.find('}', i);
    if (close == std::string::npos || close == i + 1)
      throw ParseError("malformed placeholder in template '" + tpl + "'", line_no);
    std::string name = tpl.substr(i + 1, close - i - 1);
    if (name.find('{') != std::string::npos)
      throw ParseError("malformed placeholder in template '" + tpl + "'", line_no);
    names.push_back(std::move(name));
    i = close + 1;
  }
  return names;
}

bool kind_accepts_datatype(ColumnKind kind, const std::string& datatype) {
  if (datatype.empty()) return true;  // auto adapts to the cell
  const std::string xsd_string = std::string(rdf::ns::xsd) + "string";
  if (datatype == xsd_string || kind == ColumnKind::Text) return true;
  switch (kind) {
    case ColumnKind::Decimal: return datatype == std::string(rdf::ns::xsd) + "decimal";
    case ColumnKind::Boolean: return datatype == std::string(rdf::ns::xsd) + "boolean";
    case ColumnKind::Timestamp: return datatype == std::string(rdf::ns::xsd) + "dateTime";
    case ColumnKind::Text: return true;
  }
  return false;
}

class RuleParser {
 public:
  explicit RuleParser(std::string_view text) : text_(text) {}

  MappingRuleSet run() {
    int line_no = 0;
    for (const std::string& raw : util::split(text_, '\n')) {
      ++line_no;
      std::vector<Token> tokens = tokenize(strip_comment(raw), line_no);
      if (tokens.empty()) continue;
      const std::string& head = tokens[0].text;
      if (head == "source") {
        read_source(tokens, line_no);
      } else if (head == "rule") {
        finish_rule(line_no);
        read_rule_header(tokens, line_no);
      } else if (head == "subject" || head == "type" || head == "po") {
        if (!open_rule_)
          throw ParseError("'" + head + "' outside a rule", line_no);
        if (head == "subject")
          read_subject(tokens, line_no);
        else if (head == "type")
          read_type(tokens, line_no);
        else
          read_po(tokens, line_no);
      } else {
        throw ParseError("unknown directive '" + head + "'", line_no);
      }
    }
    finish_rule(line_no);
    return std::move(out_);
  }

 private:
  void read_source(const std::vector<Token>& tokens, int line_no) {
    if (open_rule_ || !out_.rules.empty())
      throw ParseError("source declarations must precede rules", line_no);
    if (tokens.size() < 5 || tokens[2].text != "csv")
      throw ParseError("expected: source <id> csv \"<path>\" columns(...)", line_no);
    SourceDecl decl;
    decl.id = tokens[1].text;
    if (out_.find_source(decl.id))
      throw ParseError("duplicate source id: " + decl.id, line_no);
    if (!tokens[3].quoted) throw ParseError("source path must be quoted", line_no);
    decl.path = tokens[3].text;

    auto cols = group_of(tokens[4], "columns");
    if (!cols) throw ParseError("expected columns(...)", line_no);
    std::set<std::string> seen;
    for (const std::string& part : util::split(*cols, ',')) {
      std::string spec = util::trim(part);
      auto colon = spec.find(':');
      if (colon == std::string::npos)
        throw ParseError("expected <name>:<kind> in columns(...), got '" + spec + "'",
                         line_no);
      Column col{util::trim(spec.substr(0, colon)),
                 parse_kind(util::trim(spec.substr(colon + 1)), line_no)};
      if (col.name.empty() || !seen.insert(col.name).second)
        throw ParseError("bad or duplicate column name '" + col.name + "'", line_no);
      decl.columns.push_back(std::move(col));
    }
    if (decl.columns.empty()) throw ParseError("source declares no columns", line_no);

    std::size_t i = 5;
    if (i < tokens.size() && tokens[i].text == "streamable") {
      decl.streamable = true;
      ++i;
    }
    if (i != tokens.size()) throw ParseError("trailing tokens after source", line_no);
    out_.sources.push_back(std::move(decl));
  }

  void read_rule_header(const std::vector<Token>& tokens, int line_no) {
    if (tokens.size() < 4 || tokens[2].text != "from")
      throw ParseError("expected: rule <id> from <source> [static|virtual]", line_no);
    MappingRule rule;
    rule.id = tokens[1].text;
    for (const MappingRule& r : out_.rules)
      if (r.id == rule.id) throw ParseError("duplicate rule id: " + rule.id, line_no);
    rule.source_id = tokens[3].text;
    const SourceDecl* src = out_.find_source(rule.source_id);
    if (!src) throw ParseError("unknown source id: " + rule.source_id, line_no);
    std::size_t i = 4;
    if (i < tokens.size()) {
      if (tokens[i].text == "virtual")
        rule.virtual_mode = true;
      else if (tokens[i].text != "static")
        throw ParseError("rule mode must be 'static' or 'virtual'", line_no);
      ++i;
    }
    if (i != tokens.size()) throw ParseError("trailing tokens after rule", line_no);
    if (rule.virtual_mode && !src->streamable)
      throw ParseError("virtual rule '" + rule.id + "' needs a streamable source",
                       line_no);
    open_rule_ = std::move(rule);
  }

  void read_subject(const std::vector<Token>& tokens, int line_no) {
    if (tokens.size() != 2 || !tokens[1].quoted)
      throw ParseError("expected: subject \"<template>\"", line_no);
    if (!open_rule_->subject_template.empty())
      throw ParseError("duplicate subject line", line_no);
    check_template(tokens[1].text, *source_of(*open_rule_), line_no);
    open_rule_->subject_template = tokens[1].text;
  }

  void read_type(const std::vector<Token>& tokens, int line_no) {
    if (tokens.size() != 2) throw ParseError("expected: type <class>", line_no);
    if (open_rule_->type_assertion) throw ParseError("duplicate type line", line_no);
    open_rule_->type_assertion = resolve_iri_token(tokens[1], line_no);
  }

  void read_po(const std::vector<Token>& tokens, int line_no) {
    const SourceDecl& src = *source_of(*open_rule_);
    PoMap po;
    std::size_t i = 1;
    if (i < tokens.size() && tokens[i].text == "inverse") {
      po.inverse = true;
      ++i;
    }
    if (i >= tokens.size()) throw ParseError("po is missing a predicate", line_no);
    po.predicate = resolve_iri_token(tokens[i++], line_no);
    if (i >= tokens.size()) throw ParseError("po is missing an object form", line_no);

    if (auto col = group_of(tokens[i], "column")) {
      ++i;
      if (i + 1 >= tokens.size() || tokens[i].text != "as")
        throw ParseError("expected: column(<name>) as iri|literal <datatype>", line_no);
      ++i;
      check_column(*col, src, line_no);
      if (tokens[i].text == "iri") {
        po.object = ColumnIri{*col};
        ++i;
      } else if (tokens[i].text == "literal") {
        ++i;
        if (i >= tokens.size())
          throw ParseError("'as literal' needs a datatype or 'auto'", line_no);
        std::string datatype;
        if (tokens[i].text != "auto") datatype = resolve_iri_token(tokens[i], line_no).value;
        if (!kind_accepts_datatype(column_kind(*col, src), datatype))
          throw ParseError("column '" + *col + "' of source '" + src.id +
                               "' cannot map to datatype " + tokens[i].text,
                           line_no);
        po.object = ColumnLiteral{*col, datatype};
        ++i;
      } else {
        throw ParseError("expected 'iri' or 'literal' after 'as'", line_no);
      }
    } else if (tokens[i].text == "template") {
      ++i;
      if (i >= tokens.size() || !tokens[i].quoted)
        throw ParseError("expected: template \"<template>\"", line_no);
      check_template(tokens[i].text, src, line_no);
      po.object = TemplateIri{tokens[i].text};
      ++i;
    } else if (auto lookup = group_of(tokens[i], "lookup")) {
      ++i;
      std::vector<std::string> parts = util::split_ws(*lookup);
      if (parts.size() != 3 || parts[1] != "by")
        throw ParseError("expected: lookup(<table> by <column>)", line_no);
      const SourceDecl* foreign = out_.find_source(parts[0]);
      if (!foreign) throw ParseError("unknown lookup table: " + parts[0], line_no);
      check_column(parts[2], src, line_no);
      check_column(parts[2], *foreign, line_no);
      if (i >= tokens.size() || tokens[i].text != "template" || i + 1 >= tokens.size() ||
          !tokens[i + 1].quoted)
        throw ParseError("expected: lookup(...) template \"<template>\"", line_no);
      check_template(tokens[i + 1].text, *foreign, line_no);
      po.object = LookupIri{parts[0], parts[2], tokens[i + 1].text};
      i += 2;
    } else if (tokens[i].text == "constant") {
      ++i;
      if (i >= tokens.size()) throw ParseError("constant is missing its term", line_no);
      if (tokens[i].quoted)
        po.object = ConstantTerm{rdf::Literal{tokens[i].text}};
      else
        po.object = ConstantTerm{resolve_iri_token(tokens[i], line_no)};
      ++i;
    } else {
      throw ParseError("expected column(...), template, lookup(...) or constant",
                       line_no);
    }

    if (i < tokens.size()) {
      auto guard = group_of(tokens[i], "if_set");
      if (!guard) throw ParseError("trailing tokens after po", line_no);
      check_column(*guard, src, line_no);
      po.only_if_set = *guard;
      ++i;
    }
    if (i != tokens.size()) throw ParseError("trailing tokens after po", line_no);

    if (po.inverse) {
      bool literal_subject =
          std::holds_alternative<ColumnLiteral>(po.object) ||
          (std::holds_alternative<ConstantTerm>(po.object) &&
           rdf::is_literal(std::get<ConstantTerm>(po.object).term));
      if (literal_subject)
        throw ParseError("an inverse po cannot produce a literal subject", line_no);
    }
    open_rule_->po_maps.push_back(std::move(po));
  }

  void finish_rule(int line_no) {
    if (!open_rule_) return;
    if (open_rule_->subject_template.empty())
      throw ParseError("rule '" + open_rule_->id + "' has no subject", line_no);
    out_.rules.push_back(std::move(*open_rule_));
    open_rule_.reset();
  }

  const SourceDecl* source_of(const MappingRule& rule) const {
    return out_.find_source(rule.source_id);
  }

  static void check_column(const std::string& name, const SourceDecl& src, int line_no) {
    for (const Column& c : src.columns)
      if (c.name == name) return;
    throw ParseError("unknown column '" + name + "' in source '" + src.id + "'",
                     line_no);
  }

  static ColumnKind column_kind(const std::string& name, const SourceDecl& src) {
    for (const Column& c : src.columns)
      if (c.name == name) return c.kind;
    return ColumnKind::Text;
  }

  // Validates placeholder syntax and that every placeholder is a column of
  // `src` (or the row_id pseudo-column).
  static void check_template(const std::string& tpl, const SourceDecl& src,
                             int line_no) {
    for (const std::string& name : placeholders(tpl, line_no)) {
      if (name == "row_id") continue;
      check_column(name, src, line_no);
    }
  }

  std::string_view text_;
  MappingRuleSet out_;
  std::optional<MappingRule> open_rule_;
};

}  // namespace

const SourceDecl* MappingRuleSet::find_source(const std::string& id) const {
  for (const SourceDecl& s : sources)
    if (s.id == id) return &s;
  return nullptr;
}

MappingRuleSet parse_rules(std::string_view text) { return RuleParser(text).run(); }

MappingRuleSet load_rules_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rules(buf.str());
}

MappingRuleSet rules_with_mode(const MappingRuleSet& ruleset, bool virtual_mode) {
  MappingRuleSet out;
  out.sources = ruleset.sources;
  for (const MappingRule& r : ruleset.rules)
    if (r.virtual_mode == virtual_mode) out.rules.push_back(r);
  return out;
}

}  // namespace plantkg::mapping
