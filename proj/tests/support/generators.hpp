#pragma once

// Randomized inputs for property tests. The vocabulary pool is deliberately
// tiny so that exhaustive oracles (scan joins, naive fixpoints) stay cheap
// while collisions — repeated terms, shared predicates — happen often.

#include <random>
#include <string>
#include <vector>

#include "plantkg/rdf/graph.hpp"
#include "plantkg/rdf/term.hpp"

namespace testgen {

using plantkg::rdf::Graph;
using plantkg::rdf::Iri;
using plantkg::rdf::Literal;
using plantkg::rdf::Term;
using plantkg::rdf::Triple;
using plantkg::rdf::TriplePattern;
using plantkg::rdf::Variable;

struct Vocab {
  std::vector<Iri> nodes;
  std::vector<Iri> predicates;
  std::vector<Term> objects;  // nodes plus a few literals
};

inline Vocab small_vocab() {
  Vocab v;
  for (char c : {'a', 'b', 'c', 'd', 'e', 'f'})
    v.nodes.push_back(Iri(std::string("http://t.example/n#") + c));
  for (char c : {'p', 'q', 'r'})
    v.predicates.push_back(Iri(std::string("http://t.example/p#") + c));
  for (const auto& n : v.nodes) v.objects.push_back(Term(n));
  v.objects.push_back(Term(Literal("1", Iri("http://www.w3.org/2001/XMLSchema#integer"))));
  v.objects.push_back(Term(Literal("x")));
  v.objects.push_back(Term(Literal("y")));
  return v;
}

inline Graph random_graph(std::mt19937_64& rng, std::size_t max_triples,
                          const Vocab& v) {
  std::uniform_int_distribution<std::size_t> size_dist(0, max_triples);
  std::uniform_int_distribution<std::size_t> node(0, v.nodes.size() - 1);
  std::uniform_int_distribution<std::size_t> pred(0, v.predicates.size() - 1);
  std::uniform_int_distribution<std::size_t> obj(0, v.objects.size() - 1);
  Graph g;
  std::size_t n = size_dist(rng);
  for (std::size_t i = 0; i < n; ++i)
    g.add(Triple(Term(v.nodes[node(rng)]), v.predicates[pred(rng)],
                 v.objects[obj(rng)]));
  return g;
}

// A pattern position: variable (from a small name pool) or concrete term.
inline plantkg::rdf::PatternNode random_node(std::mt19937_64& rng,
                                             const std::vector<Term>& pool,
                                             const std::vector<std::string>& vars,
                                             double var_prob) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < var_prob) {
    std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
    return Variable{vars[pick(rng)]};
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pool[pick(rng)];
}

inline TriplePattern random_pattern(std::mt19937_64& rng, const Vocab& v,
                                    const std::vector<std::string>& vars,
                                    double var_prob = 0.5) {
  std::vector<Term> subjects;
  for (const auto& n : v.nodes) subjects.push_back(Term(n));
  std::vector<Term> preds;
  for (const auto& p : v.predicates) preds.push_back(Term(p));
  TriplePattern p;
  p.subject = random_node(rng, subjects, vars, var_prob);
  p.predicate = random_node(rng, preds, vars, var_prob);
  p.object = random_node(rng, v.objects, vars, var_prob);
  return p;
}

}  // namespace testgen
