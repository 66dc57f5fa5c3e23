#include "plantkg/rdf/term.hpp"

#include "plantkg/error.hpp"

namespace plantkg::rdf {

std::string Iri::local_name() const {
  auto pos = value.find_last_of("#/");
  if (pos == std::string::npos) return value;
  return value.substr(pos + 1);
}

Literal Literal::with_lang(std::string lex, std::string language) {
  Literal l;
  l.lexical = std::move(lex);
  l.datatype = lang_string();
  l.lang = std::move(language);
  return l;
}

bool is_iri(const Term& t) { return std::holds_alternative<Iri>(t); }
bool is_literal(const Term& t) { return std::holds_alternative<Literal>(t); }
bool is_blank(const Term& t) { return std::holds_alternative<BlankNode>(t); }

std::string term_key(const Term& t) {
  if (const auto* iri = std::get_if<Iri>(&t)) return "<" + iri->value + ">";
  if (const auto* b = std::get_if<BlankNode>(&t)) return "_:" + b->label;
  const auto& lit = std::get<Literal>(t);
  std::string out = "\"" + lit.lexical + "\"";
  if (lit.lang)
    out += "@" + *lit.lang;
  else
    out += "^^<" + lit.datatype.value + ">";
  return out;
}

Triple::Triple(Term s, Iri p, Term o)
    : subject(std::move(s)), predicate(std::move(p)), object(std::move(o)) {
  if (is_literal(subject)) throw Error("triple subject cannot be a literal");
}

std::size_t TripleHash::operator()(const Triple& t) const {
  std::hash<std::string> h;
  std::size_t seed = h(term_key(t.subject));
  auto mix = [&seed](std::size_t v) {
    seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  };
  mix(h(t.predicate.value));
  mix(h(term_key(t.object)));
  return seed;
}

TriplePattern TriplePattern::all() {
  return TriplePattern{Variable{"s"}, Variable{"p"}, Variable{"o"}};
}

bool is_var(const PatternNode& n) { return std::holds_alternative<Variable>(n); }

const Variable* as_var(const PatternNode& n) {
  return std::get_if<Variable>(&n);
}

const Term* as_term(const PatternNode& n) { return std::get_if<Term>(&n); }

bool Binding::bind(const std::string& var, const Term& value) {
  auto it = entries_.begin();
  for (; it != entries_.end(); ++it) {
    if (it->first == var) return it->second == value;
    if (it->first > var) break;
  }
  entries_.insert(it, {var, value});
  return true;
}

const Term* Binding::get(const std::string& var) const {
  for (const auto& [name, term] : entries_)
    if (name == var) return &term;
  return nullptr;
}

std::optional<Binding> Binding::merged(const Binding& a, const Binding& b) {
  Binding out = a;
  for (const auto& [name, term] : b.entries_)
    if (!out.bind(name, term)) return std::nullopt;
  return out;
}

}  // namespace plantkg::rdf
