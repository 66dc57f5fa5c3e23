#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>

#include "plantkg/error.hpp"
#include "plantkg/rdf/graph.hpp"
#include "plantkg/rdf/io.hpp"
#include "plantkg/rdf/term.hpp"
#include "support/generators.hpp"

using namespace plantkg;
using namespace plantkg::rdf;

namespace {

Iri iri(const std::string& s) { return Iri("http://t.example/" + s); }

// Independent per-triple matcher used as the oracle: checks each position by
// hand, tracking repeated-variable consistency, without touching the library's
// own match machinery.
std::optional<Binding> oracle_match(const TriplePattern& p, const Triple& t) {
  std::map<std::string, Term> env;
  auto fits = [&](const PatternNode& node, const Term& value) {
    if (const Variable* var = std::get_if<Variable>(&node)) {
      auto it = env.find(var->name);
      if (it == env.end()) {
        env.emplace(var->name, value);
        return true;
      }
      return it->second == value;
    }
    return std::get<Term>(node) == value;
  };
  if (!fits(p.subject, t.subject)) return std::nullopt;
  if (!fits(p.predicate, Term(t.predicate))) return std::nullopt;
  if (!fits(p.object, t.object)) return std::nullopt;
  Binding b;
  for (const auto& [name, value] : env) b.bind(name, value);
  return b;
}

std::string binding_key(const Binding& b) {
  std::string out;
  for (const auto& [name, value] : b.entries())
    out += name + "=" + term_key(value) + "|";
  return out;
}

std::vector<std::string> sorted_keys(const std::vector<Binding>& bs) {
  std::vector<std::string> out;
  out.reserve(bs.size());
  for (const auto& b : bs) out.push_back(binding_key(b));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("term keys and literal defaults") {
  CHECK(term_key(Term(iri("a"))) == "<http://t.example/a>");
  CHECK(term_key(Term(BlankNode{"b1"})) == "_:b1");
  Literal plain("hi");
  CHECK(plain.datatype == Literal::xsd_string());
  CHECK_FALSE(plain.lang.has_value());
  CHECK(term_key(Term(plain)) == "\"hi\"^^<http://www.w3.org/2001/XMLSchema#string>");
  Literal tagged = Literal::with_lang("hallo", "de");
  CHECK(tagged.datatype == Literal::lang_string());
  CHECK(term_key(Term(tagged)) == "\"hallo\"@de");
}

TEST_CASE("iri local_name") {
  CHECK(Iri("http://example.org/ModVA#tank_B201.level").local_name() == "tank_B201.level");
  CHECK(Iri("http://www.w3.org/ns/sosa/Sensor").local_name() == "Sensor");
}

TEST_CASE("triple rejects literal subject") {
  CHECK_THROWS_AS(Triple(Term(Literal("x")), iri("p"), Term(iri("o"))), Error);
}

TEST_CASE("graph set semantics") {
  Graph g;
  Triple t(Term(iri("s")), iri("p"), Term(iri("o")));
  CHECK(g.add(t));
  CHECK_FALSE(g.add(t));
  CHECK(g.size() == 1);
  CHECK(g.contains(t));
  g.add(Triple(Term(iri("s")), iri("p"), Term(iri("o2"))));
  g.add(Triple(Term(iri("s2")), iri("p"), Term(iri("o"))));
  CHECK(g.size() == 3);
}

TEST_CASE("graph set semantics holds on random graphs") {
  std::mt19937_64 rng(7);
  auto vocab = testgen::small_vocab();
  for (int round = 0; round < 50; ++round) {
    Graph g = testgen::random_graph(rng, 40, vocab);
    std::size_t before = g.size();
    for (const Triple& t : std::vector<Triple>(g.triples())) CHECK_FALSE(g.add(t));
    CHECK(g.size() == before);
  }
}

TEST_CASE("match on empty graph") {
  Graph g;
  CHECK(g.match_all(TriplePattern::all()).empty());
}

TEST_CASE("match binds variables") {
  Graph g;
  g.add(Triple(Term(iri("b201")), iri("observes"), Term(iri("level"))));
  g.add(Triple(Term(iri("b201")), iri("observes"), Term(iri("full"))));
  g.add(Triple(Term(iri("v101")), iri("observes"), Term(iri("open"))));

  TriplePattern p;
  p.subject = Term(iri("b201"));
  p.predicate = Variable{"p"};
  p.object = Variable{"o"};
  auto rows = g.match_all(p);
  CHECK(rows.size() == 2);
  for (const auto& b : rows) {
    REQUIRE(b.get("p") != nullptr);
    CHECK(*b.get("p") == Term(iri("observes")));
  }
}

TEST_CASE("repeated variable constrains equality") {
  Graph g;
  g.add(Triple(Term(iri("a")), iri("p"), Term(iri("a"))));
  g.add(Triple(Term(iri("a")), iri("p"), Term(iri("b"))));
  TriplePattern p;
  p.subject = Variable{"x"};
  p.predicate = Term(iri("p"));
  p.object = Variable{"x"};
  auto rows = g.match_all(p);
  REQUIRE(rows.size() == 1);
  CHECK(*rows[0].get("x") == Term(iri("a")));
}

TEST_CASE("fully concrete pattern behaves like contains") {
  Graph g;
  g.add(Triple(Term(iri("s")), iri("p"), Term(iri("o"))));
  TriplePattern hit{Term(iri("s")), Term(iri("p")), Term(iri("o"))};
  TriplePattern miss{Term(iri("s")), Term(iri("p")), Term(iri("nope"))};
  CHECK(g.match_all(hit).size() == 1);
  CHECK(g.match_all(hit)[0].size() == 0);
  CHECK(g.match_all(miss).empty());
}

TEST_CASE("match equals exhaustive scan oracle") {
  std::mt19937_64 rng(42);
  auto vocab = testgen::small_vocab();
  std::vector<std::string> vars{"x", "y", "z"};
  for (int round = 0; round < 300; ++round) {
    Graph g = testgen::random_graph(rng, 100, vocab);
    TriplePattern p = testgen::random_pattern(rng, vocab, vars);

    std::vector<Binding> expected;
    for (const Triple& t : g.triples())
      if (auto b = oracle_match(p, t)) expected.push_back(*b);

    auto got = g.match_all(p);
    REQUIRE_MESSAGE(sorted_keys(got) == sorted_keys(expected),
                    "round " << round << ": match disagrees with scan oracle");
  }
}

TEST_CASE("namespace map") {
  NamespaceMap m;
  m.declare("sosa", ns::sosa);
  m.declare("sosa", ns::sosa);  // same binding again is fine
  CHECK_THROWS_AS(m.declare("sosa", "http://other/"), Error);
  CHECK(m.lookup("sosa").value() == ns::sosa);
  CHECK_FALSE(m.lookup("rdf").has_value());
  CHECK(m.expand("sosa:Sensor") == Iri(std::string(ns::sosa) + "Sensor"));
  CHECK_THROWS_AS(m.expand("rdf:type"), Error);
  CHECK(m.compact(Iri(std::string(ns::sosa) + "Observation")).value() == "sosa:Observation");
  CHECK_FALSE(m.compact(iri("elsewhere")).has_value());
}

TEST_CASE("ntriples load basics") {
  std::string doc =
      "# sensor wiring\n"
      "<http://t.example/s> <http://t.example/p> <http://t.example/o> .\n"
      "\n"
      "<http://t.example/s> <http://t.example/q> \"5.5\"^^<http://www.w3.org/2001/XMLSchema#decimal> .\n"
      "_:b1 <http://t.example/p> \"a\\nb\\t\\\"c\\\"\" .\n"
      "<http://t.example/s> <http://t.example/r> \"gr\\u00FCn\"@de .\n";
  Graph g = load(doc, Format::NTriples);
  CHECK(g.size() == 4);
  CHECK(g.contains(Triple(Term(iri("s")), iri("p"), Term(iri("o")))));
  CHECK(g.contains(Triple(Term(iri("s")), iri("q"),
                          Term(Literal("5.5", Iri("http://www.w3.org/2001/XMLSchema#decimal"))))));
  CHECK(g.contains(Triple(Term(BlankNode{"b1"}), iri("p"), Term(Literal("a\nb\t\"c\"")))));
  CHECK(g.contains(Triple(Term(iri("s")), iri("r"), Term(Literal::with_lang("gr\xC3\xBCn", "de")))));
}

TEST_CASE("ntriples missing terminal dot reports the line") {
  std::string doc =
      "<http://t.example/s> <http://t.example/p> <http://t.example/o> .\n"
      "<http://t.example/s> <http://t.example/p> <http://t.example/o2>\n";
  try {
    load(doc, Format::NTriples);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("'.'") != std::string::npos);
  }
}

TEST_CASE("ntriples trailing content rejected") {
  CHECK_THROWS_AS(
      load("<http://t.example/s> <http://t.example/p> <http://t.example/o> . extra\n",
           Format::NTriples),
      ParseError);
}

TEST_CASE("relative iri rejected") {
  CHECK_THROWS_AS(load("<foo> <http://t.example/p> <http://t.example/o> .\n",
                       Format::NTriples),
                  ParseError);
}

TEST_CASE("empty document round-trip") {
  Graph g = load("", Format::NTriples);
  CHECK(g.empty());
  CHECK(serialize(g, Format::NTriples).empty());
  CHECK(load(serialize(g, Format::TurtleSubset), Format::TurtleSubset).empty());
}

TEST_CASE("turtle subset load") {
  std::string doc =
      "@prefix sosa: <http://www.w3.org/ns/sosa/> .\n"
      "@prefix ModVA: <http://example.org/ModVA#> .\n"
      "PREFIX isa88: <http://example.org/isa88#>\n"
      "\n"
      "# mixing unit\n"
      "ModVA:mixer_partial0.tank_B201 a isa88:Unit ;\n"
      "    isa88:isPartOf ModVA:mixer_partial0 .\n"
      "ModVA:obs_0 a sosa:Observation ;\n"
      "    sosa:hasSimpleResult \"true\"^^<http://www.w3.org/2001/XMLSchema#boolean> ;\n"
      "    sosa:hasFeatureOfInterest ModVA:mixer_partial0.tank_B201 , ModVA:mixer_partial0 .\n";
  Graph g = load(doc, Format::TurtleSubset);
  CHECK(g.size() == 6);
  Iri unit("http://example.org/ModVA#mixer_partial0.tank_B201");
  CHECK(g.contains(Triple(Term(unit), Iri(std::string(ns::rdf) + "type"),
                          Term(Iri("http://example.org/isa88#Unit")))));
  CHECK(g.contains(Triple(Term(Iri("http://example.org/ModVA#obs_0")),
                          Iri(std::string(ns::sosa) + "hasFeatureOfInterest"),
                          Term(unit))));
  CHECK(g.namespaces().lookup("isa88").value() == "http://example.org/isa88#");
}

TEST_CASE("turtle dotted local name stops before statement dot") {
  std::string doc =
      "@prefix ModVA: <http://example.org/ModVA#> .\n"
      "@prefix x: <http://t.example/> .\n"
      "ModVA:tank_B201.level x:p x:o.\n";  // no space before the final dot
  Graph g = load(doc, Format::TurtleSubset);
  REQUIRE(g.size() == 1);
  CHECK(g.triples()[0].subject ==
        Term(Iri("http://example.org/ModVA#tank_B201.level")));
  CHECK(g.triples()[0].object == Term(iri("o")));
}

TEST_CASE("turtle unknown prefix reports position") {
  std::string doc = "@prefix x: <http://t.example/> .\nx:a x:p nope:o .\n";
  try {
    load(doc, Format::TurtleSubset);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("nope") != std::string::npos);
  }
}

TEST_CASE("turtle blank nodes, explicit and anonymous") {
  std::string doc =
      "@prefix x: <http://t.example/> .\n"
      "_:cfg x:p x:a .\n"
      "[ x:q x:b ; x:r \"v\" ] x:p _:cfg .\n";
  Graph g = load(doc, Format::TurtleSubset);
  CHECK(g.size() == 4);
  // The anonymous node received a fresh label shared by its three triples.
  std::size_t blank_subjects = 0;
  for (const auto& t : g.triples())
    if (is_blank(t.subject)) ++blank_subjects;
  CHECK(blank_subjects == 4);
}

TEST_CASE("turtle trailing semicolon tolerated") {
  std::string doc =
      "@prefix x: <http://t.example/> .\n"
      "x:s x:p x:o ;\n"
      "    x:q x:o2 ;\n"
      ".\n";
  CHECK(load(doc, Format::TurtleSubset).size() == 2);
}

TEST_CASE("canonical serialization is byte-stable across insertion order") {
  auto vocab = testgen::small_vocab();
  std::mt19937_64 rng(11);
  Graph a = testgen::random_graph(rng, 60, vocab);
  Graph b;
  std::vector<Triple> shuffled(a.triples());
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (const auto& t : shuffled) b.add(t);
  CHECK(serialize(a, Format::NTriples) == serialize(b, Format::NTriples));
  CHECK(serialize(a, Format::TurtleSubset) == serialize(b, Format::TurtleSubset));
  CHECK(serialize(a, Format::NTriples) == serialize(a, Format::NTriples));
}

TEST_CASE("round-trip: random graphs through both formats") {
  std::mt19937_64 rng(99);
  auto vocab = testgen::small_vocab();
  for (int round = 0; round < 40; ++round) {
    Graph g = testgen::random_graph(rng, 80, vocab);
    Graph via_nt = load(serialize(g, Format::NTriples), Format::NTriples);
    CHECK(via_nt.same_triples(g));
    Graph via_ttl = load(serialize(g, Format::TurtleSubset), Format::TurtleSubset);
    CHECK(via_ttl.same_triples(g));
  }
}

TEST_CASE("round-trip with prefixes and mixed terms") {
  Graph g;
  g.namespaces().merge(default_prefixes());
  Iri obs("http://example.org/ModVA#obs_12");
  g.add(Triple(Term(obs), Iri(std::string(ns::rdf) + "type"),
               Term(Iri(std::string(ns::sosa) + "Observation"))));
  g.add(Triple(Term(obs), Iri(std::string(ns::sosa) + "resultTime"),
               Term(Literal("2024-01-01T00:00:12.000Z",
                            Iri(std::string(ns::xsd) + "dateTime")))));
  g.add(Triple(Term(obs), Iri(std::string(ns::sosa) + "hasSimpleResult"),
               Term(Literal("9.95", Iri(std::string(ns::xsd) + "decimal")))));
  g.add(Triple(Term(BlankNode{"note"}), Iri("http://t.example/says"),
               Term(Literal::with_lang("voll", "de"))));

  std::string ttl = serialize(g, Format::TurtleSubset);
  CHECK(ttl.find("sosa:Observation") != std::string::npos);  // compaction used
  CHECK(load(ttl, Format::TurtleSubset).same_triples(g));
  CHECK(load(serialize(g, Format::NTriples), Format::NTriples).same_triples(g));
}

TEST_CASE("cross-format: turtle to ntriples preserves triples") {
  std::string doc =
      "@prefix x: <http://t.example/> .\n"
      "x:s x:p x:o ; x:q \"1\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n";
  Graph g = load(doc, Format::TurtleSubset);
  Graph back = load(serialize(g, Format::NTriples), Format::NTriples);
  CHECK(back.same_triples(g));
}

TEST_CASE("blank-node isomorphism") {
  auto mk = [](const std::string& l1, const std::string& l2) {
    Graph g;
    g.add(Triple(Term(BlankNode{l1}), iri("p"), Term(BlankNode{l2})));
    g.add(Triple(Term(BlankNode{l2}), iri("p"), Term(iri("end"))));
    return g;
  };
  CHECK(isomorphic_modulo_blanks(mk("a", "b"), mk("x", "y")));
  CHECK_FALSE(isomorphic_modulo_blanks(mk("a", "b"), mk("x", "x")));

  Graph chain2;
  chain2.add(Triple(Term(BlankNode{"a"}), iri("p"), Term(iri("end"))));
  CHECK_FALSE(isomorphic_modulo_blanks(mk("a", "b"), chain2));

  // No blanks: isomorphism degenerates to set equality.
  Graph p1, p2;
  p1.add(Triple(Term(iri("s")), iri("p"), Term(iri("o"))));
  p2.add(Triple(Term(iri("s")), iri("p"), Term(iri("o"))));
  CHECK(isomorphic_modulo_blanks(p1, p2));
  p2.add(Triple(Term(iri("s")), iri("p"), Term(iri("o2"))));
  CHECK_FALSE(isomorphic_modulo_blanks(p1, p2));
}

TEST_CASE("default prefixes cover the toolkit vocabularies") {
  const NamespaceMap& m = default_prefixes();
  CHECK(m.lookup("rdf").value() == ns::rdf);
  CHECK(m.lookup("sosa").value() == ns::sosa);
  CHECK(m.lookup("ssn").value() == ns::ssn);
  CHECK(m.lookup("ModVA").value() == "http://example.org/ModVA#");
  CHECK(m.lookup("vdi3682").value() == "http://example.org/vdi3682#");
  CHECK(m.lookup("isa88").value() == "http://example.org/isa88#");
  CHECK(m.lookup("din61360").value() == "http://example.org/din61360#");
}

TEST_CASE("bundled prefix file matches the built-in table") {
  NamespaceMap from_file =
      load_prefix_file(std::string(PLANTKG_FIXTURE_DIR) + "/prefixes.ttl");
  CHECK(from_file.entries() == default_prefixes().entries());
}

TEST_CASE("prefix file with triples rejected") {
  auto path = std::filesystem::temp_directory_path() / "plantkg_badprefix.ttl";
  {
    std::ofstream out(path);
    out << "@prefix x: <http://t.example/> .\nx:s x:p x:o .\n";
  }
  CHECK_THROWS_AS(load_prefix_file(path.string()), Error);
  std::filesystem::remove(path);
}

TEST_CASE("union source concatenates parts") {
  Graph a, b;
  a.add(Triple(Term(iri("s")), iri("p"), Term(iri("o1"))));
  b.add(Triple(Term(iri("s")), iri("p"), Term(iri("o2"))));
  UnionSource u({&a, &b});
  TriplePattern p;
  p.subject = Term(iri("s"));
  p.predicate = Term(iri("p"));
  p.object = Variable{"o"};
  CHECK(u.match_all(p).size() == 2);
}
