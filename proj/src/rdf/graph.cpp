#include "plantkg/rdf/graph.hpp"

#include <algorithm>

#include "plantkg/error.hpp"

namespace plantkg::rdf {

void NamespaceMap::declare(const std::string& prefix, const std::string& iri) {
  auto it = map_.find(prefix);
  if (it != map_.end()) {
    if (it->second != iri)
      throw Error("prefix '" + prefix + "' already bound to " + it->second);
    return;
  }
  map_[prefix] = iri;
}

std::optional<std::string> NamespaceMap::lookup(const std::string& prefix) const {
  auto it = map_.find(prefix);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

Iri NamespaceMap::expand(const std::string& prefixed) const {
  auto colon = prefixed.find(':');
  if (colon == std::string::npos)
    throw Error("not a prefixed name: " + prefixed);
  std::string prefix = prefixed.substr(0, colon);
  auto ns = lookup(prefix);
  if (!ns) throw Error("unknown prefix '" + prefix + ":'");
  return Iri(*ns + prefixed.substr(colon + 1));
}

std::optional<std::string> NamespaceMap::compact(const Iri& iri) const {
  const std::string* best_ns = nullptr;
  const std::string* best_prefix = nullptr;
  for (const auto& [prefix, ns] : map_) {
    if (iri.value.size() > ns.size() && iri.value.compare(0, ns.size(), ns) == 0) {
      if (!best_ns || ns.size() > best_ns->size()) {
        best_ns = &ns;
        best_prefix = &prefix;
      }
    }
  }
  if (!best_ns) return std::nullopt;
  return *best_prefix + ":" + iri.value.substr(best_ns->size());
}

void NamespaceMap::merge(const NamespaceMap& other) {
  for (const auto& [prefix, iri] : other.map_) declare(prefix, iri);
}

bool looks_prefixed(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) return false;
  return text.find("://") == std::string::npos;
}

std::vector<Binding> TripleSource::match_all(const TriplePattern& pattern) const {
  std::vector<Binding> out;
  match(pattern, [&out](const Binding& b) { out.push_back(b); });
  return out;
}

bool Graph::add(Triple t) {
  if (index_.contains(t)) return false;
  std::size_t idx = triples_.size();
  by_subject_[term_key(t.subject)].push_back(idx);
  by_predicate_[t.predicate.value].push_back(idx);
  index_.insert(t);
  triples_.push_back(std::move(t));
  return true;
}

void Graph::add_all(const Graph& other) {
  for (const auto& t : other.triples()) add(t);
  namespaces_.merge(other.namespaces());
}

bool Graph::contains(const Triple& t) const { return index_.contains(t); }

std::optional<Binding> match_triple(const TriplePattern& pattern, const Triple& t) {
  Binding b;
  auto accept = [&b](const PatternNode& node, const Term& value) {
    if (const auto* var = as_var(node)) return b.bind(var->name, value);
    return *as_term(node) == value;
  };
  if (!accept(pattern.subject, t.subject)) return std::nullopt;
  if (!accept(pattern.predicate, Term(t.predicate))) return std::nullopt;
  if (!accept(pattern.object, t.object)) return std::nullopt;
  return b;
}

TriplePattern substitute(const TriplePattern& pattern, const Binding& b) {
  auto subst = [&b](const PatternNode& node) -> PatternNode {
    if (const auto* var = as_var(node)) {
      if (const Term* t = b.get(var->name)) return *t;
    }
    return node;
  };
  return TriplePattern{subst(pattern.subject), subst(pattern.predicate),
                       subst(pattern.object)};
}

void Graph::match(const TriplePattern& pattern,
                  const std::function<void(const Binding&)>& sink) const {
  // Most selective available index: subject, then predicate, then full scan.
  const std::vector<std::size_t>* candidates = nullptr;
  if (const Term* s = as_term(pattern.subject)) {
    auto it = by_subject_.find(term_key(*s));
    if (it == by_subject_.end()) return;
    candidates = &it->second;
  } else if (const Term* p = as_term(pattern.predicate)) {
    if (!is_iri(*p)) return;
    auto it = by_predicate_.find(std::get<Iri>(*p).value);
    if (it == by_predicate_.end()) return;
    candidates = &it->second;
  }
  if (candidates) {
    for (std::size_t idx : *candidates)
      if (auto b = match_triple(pattern, triples_[idx])) sink(*b);
  } else {
    for (const auto& t : triples_)
      if (auto b = match_triple(pattern, t)) sink(*b);
  }
}

std::vector<const Triple*> Graph::by_subject(const Term& s) const {
  std::vector<const Triple*> out;
  auto it = by_subject_.find(term_key(s));
  if (it == by_subject_.end()) return out;
  out.reserve(it->second.size());
  for (std::size_t idx : it->second) out.push_back(&triples_[idx]);
  return out;
}

std::vector<const Triple*> Graph::by_predicate(const Iri& p) const {
  std::vector<const Triple*> out;
  auto it = by_predicate_.find(p.value);
  if (it == by_predicate_.end()) return out;
  out.reserve(it->second.size());
  for (std::size_t idx : it->second) out.push_back(&triples_[idx]);
  return out;
}

bool Graph::same_triples(const Graph& other) const {
  if (size() != other.size()) return false;
  for (const auto& t : triples_)
    if (!other.contains(t)) return false;
  return true;
}

void UnionSource::match(const TriplePattern& pattern,
                        const std::function<void(const Binding&)>& sink) const {
  for (const TripleSource* part : parts_) part->match(pattern, sink);
}

}  // namespace plantkg::rdf
