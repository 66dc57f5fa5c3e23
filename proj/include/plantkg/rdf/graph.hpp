#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "plantkg/rdf/term.hpp"

namespace plantkg::rdf {

// Prefix -> namespace IRI map. A prefix maps to exactly one namespace.
class NamespaceMap {
 public:
  // Throws on re-binding a prefix to a different IRI.
  void declare(const std::string& prefix, const std::string& iri);

  std::optional<std::string> lookup(const std::string& prefix) const;

  // Expands "pfx:local" using declared prefixes; throws on unknown prefix.
  Iri expand(const std::string& prefixed) const;

  // Longest-namespace match; nullopt when no declared namespace applies.
  std::optional<std::string> compact(const Iri& iri) const;

  const std::map<std::string, std::string>& entries() const { return map_; }
  void merge(const NamespaceMap& other);

 private:
  std::map<std::string, std::string> map_;
};

// Returns true for "pfx:local" shapes (single ':', no "://").
bool looks_prefixed(const std::string& text);

// Sink-style access used by the evaluator; implemented by Graph,
// VirtualView and UnionSource.
class TripleSource {
 public:
  virtual ~TripleSource() = default;

  // Calls `sink` once per solution of `pattern`. Repeated variable names in
  // the pattern constrain equality.
  virtual void match(const TriplePattern& pattern,
                     const std::function<void(const Binding&)>& sink) const = 0;

  std::vector<Binding> match_all(const TriplePattern& pattern) const;
};

// In-memory triple set with set semantics and per-position indexes.
// Single-writer during construction; safe for concurrent reads afterwards.
class Graph : public TripleSource {
 public:
  Graph() = default;

  // Returns true when the triple was new.
  bool add(Triple t);
  void add_all(const Graph& other);

  bool contains(const Triple& t) const;
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  const std::vector<Triple>& triples() const { return triples_; }

  void match(const TriplePattern& pattern,
             const std::function<void(const Binding&)>& sink) const override;

  // Triples with the given subject / predicate (index lookups).
  std::vector<const Triple*> by_subject(const Term& s) const;
  std::vector<const Triple*> by_predicate(const Iri& p) const;

  NamespaceMap& namespaces() { return namespaces_; }
  const NamespaceMap& namespaces() const { return namespaces_; }

  // Set equality of triples; namespaces are not compared.
  bool same_triples(const Graph& other) const;

 private:
  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> index_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_subject_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_predicate_;
  NamespaceMap namespaces_;
};

// Tries to bind pattern against a concrete triple; nullopt on mismatch.
std::optional<Binding> match_triple(const TriplePattern& pattern, const Triple& t);

// Substitutes bound variables of `b` into `pattern`.
TriplePattern substitute(const TriplePattern& pattern, const Binding& b);

// Concatenation of several sources (e.g. T-Box graph + virtual A-Box).
class UnionSource : public TripleSource {
 public:
  explicit UnionSource(std::vector<const TripleSource*> parts)
      : parts_(std::move(parts)) {}

  void match(const TriplePattern& pattern,
             const std::function<void(const Binding&)>& sink) const override;

 private:
  std::vector<const TripleSource*> parts_;
};

}  // namespace plantkg::rdf
