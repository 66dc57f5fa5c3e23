#include "plantkg/rdf/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "plantkg/error.hpp"
#include "plantkg/util/scanner.hpp"

namespace plantkg::rdf {

namespace {

using util::pn_local_char;
using util::Scanner;

class TurtleReader {
 public:
  TurtleReader(std::string_view text, const NamespaceMap* base)
      : scan_(text) {
    if (base) graph_.namespaces().merge(*base);
  }

  Graph run() {
    while (true) {
      scan_.skip_ws_and_comments();
      if (scan_.eof()) break;
      if (scan_.peek() == '@') {
        read_prefix_directive(false);
      } else if (peek_keyword("PREFIX") || peek_keyword("prefix")) {
        read_prefix_directive(true);
      } else {
        read_statement();
      }
    }
    return std::move(graph_);
  }

 private:
  bool peek_keyword(std::string_view kw) const {
    for (std::size_t i = 0; i < kw.size(); ++i)
      if (scan_.peek(i) != kw[i]) return false;
    char after = scan_.peek(kw.size());
    return std::isspace(static_cast<unsigned char>(after)) || after == '\0';
  }

  void read_prefix_directive(bool sparql_style) {
    if (!sparql_style) scan_.expect('@', "directive");
    std::string kw = scan_.read_name();
    if (kw != "prefix" && kw != "PREFIX")
      scan_.fail("unknown directive '" + kw + "'");
    scan_.skip_ws_and_comments();
    std::string prefix = scan_.read_name();
    scan_.expect(':', "prefix declaration");
    scan_.skip_ws_and_comments();
    std::string ns = scan_.read_iriref();
    graph_.namespaces().declare(prefix, ns);
    scan_.skip_ws_and_comments();
    if (!sparql_style) scan_.expect('.', "directive end");
  }

  void read_statement() {
    Term subject = read_subject();
    read_predicate_object_list(subject);
    scan_.skip_ws_and_comments();
    scan_.expect('.', "statement end");
  }

  Term read_subject() {
    scan_.skip_ws_and_comments();
    char c = scan_.peek();
    if (c == '<') return Term(Iri(scan_.read_iriref()));
    if (c == '_') return Term(read_blank_label());
    if (c == '[') return read_anon_subject();
    return Term(read_prefixed_name());
  }

  Term read_anon_subject() {
    scan_.expect('[', "blank node");
    BlankNode b = fresh_blank();
    scan_.skip_ws_and_comments();
    if (!scan_.consume(']')) {
      read_predicate_object_list(Term(b), /*allow_anon_objects=*/false);
      scan_.skip_ws_and_comments();
      scan_.expect(']', "blank node close");
    }
    return Term(b);
  }

  void read_predicate_object_list(const Term& subject,
                                  bool allow_anon_objects = true) {
    while (true) {
      scan_.skip_ws_and_comments();
      Iri predicate = read_predicate();
      while (true) {
        scan_.skip_ws_and_comments();
        Term object = read_object(allow_anon_objects);
        graph_.add(Triple(subject, predicate, object));
        scan_.skip_ws_and_comments();
        if (!scan_.consume(',')) break;
      }
      if (!scan_.consume(';')) break;
      scan_.skip_ws_and_comments();
      // Trailing ';' before '.' or ']' is allowed.
      char c = scan_.peek();
      if (c == '.' || c == ']') break;
    }
  }

  Iri read_predicate() {
    char c = scan_.peek();
    if (c == '<') return Iri(scan_.read_iriref());
    if (c == 'a') {
      char after = scan_.peek(1);
      if (std::isspace(static_cast<unsigned char>(after))) {
        scan_.advance();
        return Iri(std::string(ns::rdf) + "type");
      }
    }
    return read_prefixed_name();
  }

  Term read_object(bool allow_anon) {
    char c = scan_.peek();
    if (c == '<') return Term(Iri(scan_.read_iriref()));
    if (c == '"') return Term(read_literal());
    if (c == '_') return Term(read_blank_label());
    if (c == '[') {
      if (!allow_anon) scan_.fail("nested anonymous blank nodes not supported");
      scan_.expect('[', "blank node");
      BlankNode b = fresh_blank();
      scan_.skip_ws_and_comments();
      if (!scan_.consume(']')) {
        read_predicate_object_list(Term(b), /*allow_anon_objects=*/false);
        scan_.skip_ws_and_comments();
        scan_.expect(']', "blank node close");
      }
      return Term(b);
    }
    if (c == '(') scan_.fail("RDF collections not supported");
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

  BlankNode read_blank_label() {
    scan_.expect('_', "blank node");
    scan_.expect(':', "blank node");
    std::string label = scan_.read_name();
    if (label.empty()) scan_.fail("empty blank node label");
    return BlankNode{label};
  }

  BlankNode fresh_blank() { return BlankNode{"anon" + std::to_string(anon_counter_++)}; }

  Iri read_prefixed_name() {
    std::string prefix = scan_.read_name();
    if (!scan_.consume(':'))
      scan_.fail(prefix.empty() ? "expected RDF term"
                                : "expected ':' after prefix '" + prefix + "'");
    std::string local = scan_.read_pn_local();
    auto ns = graph_.namespaces().lookup(prefix);
    if (!ns) scan_.fail("unknown prefix '" + prefix + ":'");
    return Iri(*ns + local);
  }

  Scanner scan_;
  Graph graph_;
  int anon_counter_ = 0;
};

Graph load_ntriples(std::string_view text, const NamespaceMap* base) {
  Graph g;
  if (base) g.namespaces().merge(*base);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view raw =
        end == std::string_view::npos ? text.substr(start) : text.substr(start, end - start);
    ++line_no;
    std::string_view stripped = raw;
    while (!stripped.empty() &&
           std::isspace(static_cast<unsigned char>(stripped.back())))
      stripped.remove_suffix(1);
    std::size_t lead = 0;
    while (lead < stripped.size() &&
           std::isspace(static_cast<unsigned char>(stripped[lead])))
      ++lead;
    stripped.remove_prefix(lead);
    if (!stripped.empty() && stripped[0] != '#') {
      Scanner scan(stripped, line_no);
      auto read_subject = [&]() -> Term {
        scan.skip_ws_and_comments();
        if (scan.peek() == '<') return Term(Iri(scan.read_iriref()));
        if (scan.peek() == '_') {
          scan.advance();
          if (!scan.consume(':')) scan.fail("expected blank node");
          return Term(BlankNode{scan.read_name()});
        }
        scan.fail("expected subject IRI or blank node");
      };
      auto read_object = [&]() -> Term {
        scan.skip_ws_and_comments();
        if (scan.peek() == '<') return Term(Iri(scan.read_iriref()));
        if (scan.peek() == '_') {
          scan.advance();
          if (!scan.consume(':')) scan.fail("expected blank node");
          return Term(BlankNode{scan.read_name()});
        }
        if (scan.peek() == '"') {
          std::string lex = scan.read_string();
          if (scan.consume('@')) return Term(Literal::with_lang(lex, scan.read_name()));
          if (scan.peek() == '^' && scan.peek(1) == '^') {
            scan.advance();
            scan.advance();
            return Term(Literal(lex, Iri(scan.read_iriref())));
          }
          return Term(Literal(lex));
        }
        scan.fail("expected object term");
      };
      Term s = read_subject();
      scan.skip_ws_and_comments();
      Iri p(scan.read_iriref());
      Term o = read_object();
      scan.skip_ws_and_comments();
      if (!scan.consume('.'))
        throw ParseError("missing terminal '.'", line_no, scan.col());
      scan.skip_ws_and_comments();
      if (!scan.eof()) throw ParseError("trailing content after '.'", line_no, scan.col());
      g.add(Triple(std::move(s), std::move(p), std::move(o)));
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return g;
}

std::string escape_literal(const std::string& lex) {
  std::string out;
  out.reserve(lex.size() + 2);
  for (char c : lex) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

bool valid_pn_local(const std::string& local) {
  if (local.empty()) return false;
  if (local.front() == '-' || local.front() == '.' || local.back() == '.')
    return false;
  for (char c : local)
    if (!pn_local_char(c) && c != '.') return false;
  return true;
}

std::string write_iri(const Iri& iri, const NamespaceMap* prefixes) {
  if (prefixes) {
    if (auto compacted = prefixes->compact(iri)) {
      auto colon = compacted->find(':');
      if (valid_pn_local(compacted->substr(colon + 1))) return *compacted;
    }
  }
  return "<" + iri.value + ">";
}

std::string write_term(const Term& t, const NamespaceMap* prefixes) {
  if (const auto* iri = std::get_if<Iri>(&t)) return write_iri(*iri, prefixes);
  if (const auto* b = std::get_if<BlankNode>(&t)) return "_:" + b->label;
  const auto& lit = std::get<Literal>(t);
  std::string out = "\"" + escape_literal(lit.lexical) + "\"";
  if (lit.lang) return out + "@" + *lit.lang;
  if (lit.datatype == Literal::xsd_string()) return out;
  return out + "^^" + write_iri(lit.datatype, prefixes);
}

std::string serialize_ntriples(const Graph& g, bool canonical) {
  std::vector<std::string> lines;
  lines.reserve(g.size());
  for (const auto& t : g.triples()) {
    lines.push_back(write_term(t.subject, nullptr) + " <" + t.predicate.value +
                    "> " + write_term(t.object, nullptr) + " .");
  }
  if (canonical) std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string serialize_turtle(const Graph& g, bool canonical) {
  const NamespaceMap& prefixes = g.namespaces();
  std::string out;
  for (const auto& [prefix, iri] : prefixes.entries())
    out += "@prefix " + prefix + ": <" + iri + "> .\n";
  if (!prefixes.entries().empty()) out += "\n";

  // Group triples by subject.
  std::map<std::string, std::pair<Term, std::vector<const Triple*>>> groups;
  for (const auto& t : g.triples()) {
    auto& slot = groups[term_key(t.subject)];
    slot.first = t.subject;
    slot.second.push_back(&t);
  }
  const std::string rdf_type = std::string(ns::rdf) + "type";
  for (auto& [key, slot] : groups) {
    auto& ts = slot.second;
    if (canonical) {
      std::sort(ts.begin(), ts.end(), [&](const Triple* a, const Triple* b) {
        // rdf:type first, then predicate, then object.
        bool at = a->predicate.value == rdf_type, bt = b->predicate.value == rdf_type;
        if (at != bt) return at;
        if (a->predicate.value != b->predicate.value)
          return a->predicate.value < b->predicate.value;
        return term_key(a->object) < term_key(b->object);
      });
    }
    out += write_term(slot.first, &prefixes);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      bool same_pred = i > 0 && ts[i]->predicate == ts[i - 1]->predicate;
      if (i == 0)
        out += " ";
      else if (same_pred)
        out += ", ";
      else
        out += " ;\n    ";
      if (!same_pred) {
        if (ts[i]->predicate.value == rdf_type)
          out += "a ";
        else
          out += write_iri(ts[i]->predicate, &prefixes) + " ";
      }
      out += write_term(ts[i]->object, &prefixes);
    }
    out += " .\n";
  }
  return out;
}

}  // namespace

Graph load(std::string_view text, Format format, const NamespaceMap* base_prefixes) {
  if (format == Format::NTriples) return load_ntriples(text, base_prefixes);
  return TurtleReader(text, base_prefixes).run();
}

Graph load_file(const std::string& path, const NamespaceMap* base_prefixes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  Format format = path.size() >= 3 && path.compare(path.size() - 3, 3, ".nt") == 0
                      ? Format::NTriples
                      : Format::TurtleSubset;
  return load(buf.str(), format, base_prefixes);
}

std::string serialize(const Graph& g, Format format, bool canonical) {
  if (format == Format::NTriples) return serialize_ntriples(g, canonical);
  return serialize_turtle(g, canonical);
}

void save_file(const Graph& g, const std::string& path, Format format, bool canonical) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open file for writing: " + path);
  out << serialize(g, format, canonical);
}

NamespaceMap load_prefix_file(const std::string& path) {
  Graph g = load_file(path, nullptr);
  if (!g.empty()) throw Error("prefix file must contain only @prefix directives: " + path);
  return g.namespaces();
}

const NamespaceMap& default_prefixes() {
  static const NamespaceMap map = [] {
    NamespaceMap m;
    m.declare("rdf", ns::rdf);
    m.declare("rdfs", ns::rdfs);
    m.declare("owl", ns::owl);
    m.declare("xsd", ns::xsd);
    m.declare("sosa", ns::sosa);
    m.declare("ssn", ns::ssn);
    m.declare("ModVA", "http://example.org/ModVA#");
    m.declare("vdi3682", "http://example.org/vdi3682#");
    m.declare("isa88", "http://example.org/isa88#");
    m.declare("din61360", "http://example.org/din61360#");
    return m;
  }();
  return map;
}

namespace {

// Blank-node bijection search for graph isomorphism. Desk-scale inputs only.
bool extend_mapping(const std::vector<std::string>& labels_a,
                    std::size_t next,
                    std::map<std::string, std::string>& mapping,
                    std::vector<bool>& used_b,
                    const std::vector<std::string>& labels_b,
                    const Graph& a, const Graph& b) {
  if (next == labels_a.size()) {
    // Verify: every triple of a maps into b.
    for (const auto& t : a.triples()) {
      auto map_term = [&](const Term& term) -> Term {
        if (const auto* blank = std::get_if<BlankNode>(&term))
          return Term(BlankNode{mapping.at(blank->label)});
        return term;
      };
      if (!b.contains(Triple(map_term(t.subject), t.predicate, map_term(t.object))))
        return false;
    }
    return true;
  }
  for (std::size_t i = 0; i < labels_b.size(); ++i) {
    if (used_b[i]) continue;
    mapping[labels_a[next]] = labels_b[i];
    used_b[i] = true;
    if (extend_mapping(labels_a, next + 1, mapping, used_b, labels_b, a, b))
      return true;
    used_b[i] = false;
    mapping.erase(labels_a[next]);
  }
  return false;
}

std::vector<std::string> blank_labels(const Graph& g) {
  std::vector<std::string> out;
  auto note = [&out](const Term& t) {
    if (const auto* b = std::get_if<BlankNode>(&t))
      if (std::find(out.begin(), out.end(), b->label) == out.end())
        out.push_back(b->label);
  };
  for (const auto& t : g.triples()) {
    note(t.subject);
    note(t.object);
  }
  return out;
}

}  // namespace

bool isomorphic_modulo_blanks(const Graph& a, const Graph& b) {
  if (a.size() != b.size()) return false;
  auto labels_a = blank_labels(a);
  auto labels_b = blank_labels(b);
  if (labels_a.size() != labels_b.size()) return false;
  if (labels_a.empty()) return a.same_triples(b);
  std::map<std::string, std::string> mapping;
  std::vector<bool> used(labels_b.size(), false);
  return extend_mapping(labels_a, 0, mapping, used, labels_b, a, b);
}

}  // namespace plantkg::rdf
