#include "plantkg/query/parser.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "plantkg/error.hpp"
#include "plantkg/util/scanner.hpp"
#include "plantkg/util/strings.hpp"

namespace plantkg::query {

namespace {

using rdf::Iri;
using rdf::Literal;
using rdf::NamespaceMap;
using rdf::PatternNode;
using rdf::Term;
using rdf::TriplePattern;
using rdf::Variable;
using util::Scanner;

class QueryParser {
 public:
  QueryParser(std::string_view text, const NamespaceMap* base) : scan_(text) {
    if (base) prefixes_.merge(*base);
  }

  QueryAst run() {
    read_prologue();
    read_select();
    read_group();
    read_modifiers();
    scan_.skip_ws_and_comments();
    if (!scan_.eof()) scan_.fail("unexpected content after query");
    validate_scope();
    return std::move(ast_);
  }

 private:
  // Upcoming bare word, lowercased, without consuming it.
  std::string peek_word() const {
    std::string w;
    std::size_t i = 0;
    while (true) {
      char c = scan_.peek(i);
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
        w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      else
        break;
      ++i;
    }
    return w;
  }

  void expect_keyword(const char* kw) {
    scan_.skip_ws_and_comments();
    if (peek_word() != kw) scan_.fail(std::string("expected '") + kw + "'");
    scan_.read_name();
  }

  void read_prologue() {
    while (true) {
      scan_.skip_ws_and_comments();
      if (peek_word() != "prefix") return;
      scan_.read_name();
      scan_.skip_ws_and_comments();
      std::string prefix = scan_.read_name();
      scan_.expect(':', "prefix declaration");
      scan_.skip_ws_and_comments();
      prefixes_.declare(prefix, scan_.read_iriref());
    }
  }

  void read_select() {
    expect_keyword("select");
    scan_.skip_ws_and_comments();
    if (scan_.consume('*')) {
      ast_.select_all = true;
      return;
    }
    while (true) {
      scan_.skip_ws_and_comments();
      if (scan_.peek() != '?') break;
      ast_.select_vars.push_back(read_variable().name);
    }
    if (ast_.select_vars.empty())
      scan_.fail("expected '*' or at least one ?variable after 'select'");
  }

  Variable read_variable() {
    scan_.expect('?', "variable");
    std::string name = scan_.read_name();
    if (name.empty()) scan_.fail("empty variable name");
    return Variable{name};
  }

  void read_group() {
    expect_keyword("where");
    scan_.skip_ws_and_comments();
    scan_.expect('{', "group start");
    while (true) {
      scan_.skip_ws_and_comments();
      if (scan_.consume('}')) return;
      if (scan_.eof()) scan_.fail("unterminated group (missing '}')");
      std::string w = peek_word();
      if (w == "values") {
        read_values();
      } else if (w == "filter") {
        read_filter();
      } else {
        read_triples_statement();
      }
    }
  }

  void read_triples_statement() {
    PatternNode subject = read_node();
    if (const Term* t = rdf::as_term(subject); t && rdf::is_literal(*t))
      scan_.fail("literal subject not allowed");
    while (true) {
      scan_.skip_ws_and_comments();
      PatternNode predicate = read_predicate_node();
      while (true) {
        scan_.skip_ws_and_comments();
        PatternNode object = read_node();
        ast_.where.push_back(TriplePattern{subject, predicate, object});
        scan_.skip_ws_and_comments();
        if (!scan_.consume(',')) break;
      }
      if (!scan_.consume(';')) break;
      scan_.skip_ws_and_comments();
      if (scan_.peek() == '.' || scan_.peek() == '}') break;  // trailing ';'
    }
    scan_.skip_ws_and_comments();
    if (scan_.peek() == '}') return;  // final '.' may be omitted
    scan_.expect('.', "pattern end");
  }

  PatternNode read_predicate_node() {
    char c = scan_.peek();
    if (c == '?') return read_variable();
    if (c == '<') return Term(Iri(scan_.read_iriref()));
    if (c == 'a') {
      char after = scan_.peek(1);
      if (std::isspace(static_cast<unsigned char>(after))) {
        scan_.advance();
        return Term(Iri(std::string(rdf::ns::rdf) + "type"));
      }
    }
    return Term(read_prefixed_name());
  }

  // A term or variable in subject/object/operand position.
  PatternNode read_node() {
    char c = scan_.peek();
    if (c == '?') return read_variable();
    return Term(read_constant_term());
  }

  Term read_constant_term() {
    char c = scan_.peek();
    if (c == '<') return Term(Iri(scan_.read_iriref()));
    if (c == '"') return Term(read_literal());
    if (c == '_' && scan_.peek(1) == ':')
      scan_.fail("blank nodes are not supported in queries");
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        ((c == '-' || c == '+') && std::isdigit(static_cast<unsigned char>(scan_.peek(1)))))
      return Term(read_number());
    std::string word = peek_word();
    if (word == "true" || word == "false") {
      char after = scan_.peek(word.size());
      if (after != ':') {
        scan_.read_name();
        return Term(Literal(word, Iri(std::string(rdf::ns::xsd) + "boolean")));
      }
    }
    return Term(read_prefixed_name());
  }

  Literal read_literal() {
    std::string lex = scan_.read_string();
    if (scan_.consume('@')) {
      std::string lang = scan_.read_name();
      if (lang.empty()) scan_.fail("empty language tag");
      return Literal::with_lang(lex, lang);
    }
    if (scan_.peek() == '^' && scan_.peek(1) == '^') {
      scan_.advance();
      scan_.advance();
      Iri dt = scan_.peek() == '<' ? Iri(scan_.read_iriref()) : read_prefixed_name();
      return Literal(lex, dt);
    }
    return Literal(lex);
  }

  Literal read_number() {
    std::string lex;
    if (scan_.peek() == '-' || scan_.peek() == '+') lex += scan_.advance();
    bool dot = false;
    while (true) {
      char c = scan_.peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        lex += scan_.advance();
      } else if (c == '.' && !dot &&
                 std::isdigit(static_cast<unsigned char>(scan_.peek(1)))) {
        dot = true;
        lex += scan_.advance();
      } else {
        break;
      }
    }
    const char* dt = dot ? "decimal" : "integer";
    return Literal(lex, Iri(std::string(rdf::ns::xsd) + dt));
  }

  Iri read_prefixed_name() {
    std::string prefix = scan_.read_name();
    if (!scan_.consume(':'))
      scan_.fail(prefix.empty() ? "expected RDF term or variable"
                                : "expected ':' after prefix '" + prefix + "'");
    std::string local = scan_.read_pn_local();
    auto ns = prefixes_.lookup(prefix);
    if (!ns) scan_.fail("unknown prefix '" + prefix + ":'");
    return Iri(*ns + local);
  }

  void read_values() {
    if (ast_.values.has_value()) scan_.fail("multiple VALUES clauses");
    scan_.read_name();  // "VALUES"
    scan_.skip_ws_and_comments();
    ValuesClause clause;
    bool parens = scan_.consume('(');
    if (parens) {
      while (true) {
        scan_.skip_ws_and_comments();
        if (scan_.consume(')')) break;
        clause.vars.push_back(read_variable().name);
      }
    } else {
      scan_.skip_ws_and_comments();
      clause.vars.push_back(read_variable().name);
    }
    if (clause.vars.empty()) scan_.fail("VALUES clause names no variables");
    scan_.skip_ws_and_comments();
    scan_.expect('{', "VALUES rows");
    while (true) {
      scan_.skip_ws_and_comments();
      if (scan_.consume('}')) break;
      std::vector<Term> row;
      if (parens) {
        scan_.expect('(', "VALUES row");
        while (true) {
          scan_.skip_ws_and_comments();
          if (scan_.consume(')')) break;
          row.push_back(read_constant_term());
        }
      } else {
        row.push_back(read_constant_term());
      }
      if (row.size() != clause.vars.size())
        scan_.fail("VALUES row has " + std::to_string(row.size()) +
                   " terms, expected " + std::to_string(clause.vars.size()));
      clause.rows.push_back(std::move(row));
    }
    ast_.values = std::move(clause);
    scan_.skip_ws_and_comments();
    scan_.consume('.');  // optional separator after the block
  }

  void read_filter() {
    scan_.read_name();  // "FILTER"
    scan_.skip_ws_and_comments();
    scan_.expect('(', "filter expression");
    scan_.skip_ws_and_comments();
    PatternNode lhs = read_node();
    scan_.skip_ws_and_comments();
    FilterOp op = read_comparison_op();
    scan_.skip_ws_and_comments();
    PatternNode rhs = read_node();
    scan_.skip_ws_and_comments();
    scan_.expect(')', "filter end");
    ast_.filters.push_back(FilterExpr{lhs, op, rhs});
    scan_.skip_ws_and_comments();
    scan_.consume('.');
  }

  FilterOp read_comparison_op() {
    char c = scan_.peek();
    if (c == '=') {
      scan_.advance();
      return FilterOp::Eq;
    }
    if (c == '!') {
      scan_.advance();
      scan_.expect('=', "comparison operator");
      return FilterOp::Ne;
    }
    if (c == '<') {
      scan_.advance();
      return scan_.consume('=') ? FilterOp::Le : FilterOp::Lt;
    }
    if (c == '>') {
      scan_.advance();
      return scan_.consume('=') ? FilterOp::Ge : FilterOp::Gt;
    }
    scan_.fail("expected comparison operator (= != < <= > >=)");
  }

  void read_modifiers() {
    scan_.skip_ws_and_comments();
    if (peek_word() == "order") {
      scan_.read_name();
      expect_keyword("by");
      scan_.skip_ws_and_comments();
      OrderSpec spec;
      std::string w = peek_word();
      if (w == "asc" || w == "desc") {
        scan_.read_name();
        spec.ascending = (w == "asc");
        scan_.skip_ws_and_comments();
        scan_.expect('(', "order key");
        scan_.skip_ws_and_comments();
        spec.var = read_variable().name;
        scan_.skip_ws_and_comments();
        scan_.expect(')', "order key");
      } else {
        spec.var = read_variable().name;
      }
      ast_.order_by = spec;
      scan_.skip_ws_and_comments();
    }
    if (peek_word() == "limit") {
      scan_.read_name();
      scan_.skip_ws_and_comments();
      std::string digits;
      while (std::isdigit(static_cast<unsigned char>(scan_.peek())))
        digits += scan_.advance();
      if (digits.empty()) scan_.fail("expected row count after LIMIT");
      ast_.limit = static_cast<std::size_t>(std::stoull(digits));
      if (*ast_.limit == 0) scan_.fail("LIMIT must be positive");
    }
  }

  // Every referenced variable must be introduced by a pattern or VALUES.
  void validate_scope() {
    std::set<std::string> in_scope;
    auto note = [&in_scope](const PatternNode& n) {
      if (const Variable* v = rdf::as_var(n)) in_scope.insert(v->name);
    };
    for (const auto& p : ast_.where) {
      note(p.subject);
      note(p.predicate);
      note(p.object);
    }
    if (ast_.values)
      for (const auto& v : ast_.values->vars) in_scope.insert(v);

    auto require = [&](const std::string& name, const char* where) {
      if (!in_scope.count(name))
        throw ParseError("variable ?" + name + " (" + where +
                             ") does not occur in any pattern or VALUES clause",
                         1);
    };
    for (const auto& v : ast_.select_vars) require(v, "select");
    for (const auto& f : ast_.filters) {
      if (const Variable* v = rdf::as_var(f.lhs)) require(v->name, "filter");
      if (const Variable* v = rdf::as_var(f.rhs)) require(v->name, "filter");
    }
    if (ast_.order_by) require(ast_.order_by->var, "order by");
  }

  Scanner scan_;
  NamespaceMap prefixes_;
  QueryAst ast_;
};

}  // namespace

QueryAst parse(std::string_view text, const rdf::NamespaceMap* base_prefixes) {
  return QueryParser(text, base_prefixes).run();
}

QueryAst parse_file(const std::string& path, const rdf::NamespaceMap* base_prefixes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open query file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), base_prefixes);
}

}  // namespace plantkg::query
