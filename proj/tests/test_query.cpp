#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "plantkg/error.hpp"
#include "plantkg/query/eval.hpp"
#include "plantkg/query/parser.hpp"
#include "plantkg/rdf/io.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace plantkg;
using namespace plantkg::rdf;
using namespace plantkg::query;

namespace {

Iri iri(const std::string& s) { return Iri("http://t.example/" + s); }

Literal num(const std::string& lex, const char* dt = "decimal") {
  return Literal(lex, Iri(std::string(ns::xsd) + dt));
}

using testgen::oracle_keys;
using testgen::row_key;
using testgen::table_keys;

}  // namespace

TEST_CASE("parses the bundled B201 observations query") {
  QueryAst ast = parse_file(std::string(PLANTKG_FIXTURE_DIR) +
                                "/queries/observations_b201.rq",
                            &default_prefixes());
  CHECK(ast.select_vars ==
        std::vector<std::string>{"time", "result", "sensor", "property", "foi"});
  CHECK(ast.where.size() == 6);
  REQUIRE(ast.values.has_value());
  CHECK(ast.values->vars == std::vector<std::string>{"foi"});
  REQUIRE(ast.values->rows.size() == 1);
  CHECK(ast.values->rows[0][0] ==
        Term(Iri("http://example.org/ModVA#mixer_partial0.tank_B201")));
  CHECK(ast.filters.empty());
  CHECK_FALSE(ast.limit.has_value());

  // Predicate inventory: the six SOSA/SSN predicates, in order.
  std::vector<std::string> preds;
  for (const auto& p : ast.where)
    preds.push_back(std::get<Iri>(*as_term(p.predicate)).local_name());
  CHECK(preds == std::vector<std::string>{"observes", "madeObservation",
                                          "resultTime", "hasSimpleResult",
                                          "hasFeatureOfInterest", "isPropertyOf"});
}

TEST_CASE("parses a minimal query") {
  QueryAst ast = parse("select ?s where { ?s ?p ?o }");
  CHECK(ast.select_vars == std::vector<std::string>{"s"});
  CHECK(ast.where.size() == 1);
  QueryAst all = parse("SELECT * WHERE { ?s ?p ?o . } LIMIT 2");
  CHECK(all.select_all);
  CHECK(all.limit == std::size_t{2});
}

TEST_CASE("parse rejects malformed queries") {
  CHECK_THROWS_AS(parse("select where { ?s ?p ?o }"), ParseError);
  CHECK_THROWS_AS(parse("select ?s { ?s ?p ?o }"), ParseError);  // no WHERE
  CHECK_THROWS_AS(parse("select ?s where { ?s sosa:observes ?o }"), ParseError);
  CHECK_THROWS_AS(parse("select ?x where { ?s ?p ?o }"), ParseError);  // scope
  CHECK_THROWS_AS(parse("select ?s where { ?s ?p ?o } limit 0"), ParseError);
  CHECK_THROWS_AS(parse("select ?s where { ?s ?p ?o } extra"), ParseError);
  CHECK_THROWS_AS(parse("select ?s where { ?s ?p ?o filter(?s ** ?o) }"),
                  ParseError);
  CHECK_THROWS_AS(
      parse("select ?s where { ?s ?p ?o . values (?a ?b) { (1) } }"),
      ParseError);  // row arity
  CHECK_THROWS_AS(parse("select ?s where { ?s ?p ?o . values ?o {1} values ?o {2} }"),
                  ParseError);
  CHECK_THROWS_AS(parse("select ?s where { \"lit\" ?p ?o }"), ParseError);
  CHECK_THROWS_AS(parse("select ?s where { _:b ?p ?o }"), ParseError);
}

TEST_CASE("filter and order-by variables must be in scope") {
  CHECK_THROWS_AS(parse("select ?s where { ?s ?p ?o . filter(?t > 1) }"),
                  ParseError);
  CHECK_THROWS_AS(parse("select ?s where { ?s ?p ?o } order by ?t"), ParseError);
  QueryAst ok = parse(
      "select ?s where { ?s ?p ?o . filter(?o >= 2) } order by desc(?s) limit 3");
  CHECK(ok.filters.size() == 1);
  CHECK(ok.filters[0].op == FilterOp::Ge);
  REQUIRE(ok.order_by.has_value());
  CHECK_FALSE(ok.order_by->ascending);
}

TEST_CASE("evaluate joins shared variables") {
  Graph g;
  g.add(Triple(Term(iri("s1")), iri("observes"), Term(iri("prop1"))));
  g.add(Triple(Term(iri("s2")), iri("observes"), Term(iri("prop2"))));
  g.add(Triple(Term(iri("prop1")), iri("isPropertyOf"), Term(iri("tank"))));

  QueryAst ast = parse(
      "select ?sensor where { ?sensor <http://t.example/observes> ?p . "
      "?p <http://t.example/isPropertyOf> <http://t.example/tank> }");
  ResultTable t = evaluate(ast, g);
  CHECK(t.header == std::vector<std::string>{"sensor"});
  REQUIRE(t.rows.size() == 1);
  CHECK(*t.rows[0][0] == Term(iri("s1")));
}

TEST_CASE("evaluate over empty source yields empty table with header") {
  Graph g;
  ResultTable t = evaluate(parse("select ?s ?o where { ?s ?p ?o }"), g);
  CHECK(t.header == std::vector<std::string>{"s", "o"});
  CHECK(t.rows.empty());
}

TEST_CASE("projection keeps duplicate rows") {
  Graph g;
  g.add(Triple(Term(iri("s")), iri("p"), Term(iri("o1"))));
  g.add(Triple(Term(iri("s")), iri("p"), Term(iri("o2"))));
  ResultTable t =
      evaluate(parse("select ?s where { ?s <http://t.example/p> ?o }"), g);
  CHECK(t.rows.size() == 2);
  CHECK(row_key(t.rows[0]) == row_key(t.rows[1]));
}

TEST_CASE("numeric, temporal and boolean filters") {
  Graph g;
  g.add(Triple(Term(iri("a")), iri("level"), Term(num("14.5"))));
  g.add(Triple(Term(iri("b")), iri("level"), Term(num("15"))));
  g.add(Triple(Term(iri("c")), iri("level"), Term(num("17.25"))));

  auto q = [&](const std::string& text) {
    return evaluate(parse(text), g).rows.size();
  };
  CHECK(q("select ?s where { ?s <http://t.example/level> ?v . filter(?v >= 15) }") == 2);
  CHECK(q("select ?s where { ?s <http://t.example/level> ?v . filter(?v < 15) }") == 1);
  CHECK(q("select ?s where { ?s <http://t.example/level> ?v . filter(?v = 15.0) }") == 1);
  CHECK(q("select ?s where { ?s <http://t.example/level> ?v . filter(?v != 15) }") == 2);

  Graph times;
  const std::string dt = std::string(ns::xsd) + "dateTime";
  times.add(Triple(Term(iri("o1")), iri("at"),
                   Term(Literal("2024-01-01T00:00:05.000Z", Iri(dt)))));
  times.add(Triple(Term(iri("o2")), iri("at"),
                   Term(Literal("2024-01-01T00:01:05.000Z", Iri(dt)))));
  ResultTable window = evaluate(
      parse("select ?o where { ?o <http://t.example/at> ?t . "
            "filter(?t > \"2024-01-01T00:00:30.000Z\"^^"
            "<http://www.w3.org/2001/XMLSchema#dateTime>) }"),
      times);
  REQUIRE(window.rows.size() == 1);
  CHECK(*window.rows[0][0] == Term(iri("o2")));

  Graph flags;
  flags.add(Triple(Term(iri("v1")), iri("open"),
                   Term(Literal("true", Iri(std::string(ns::xsd) + "boolean")))));
  flags.add(Triple(Term(iri("v2")), iri("open"),
                   Term(Literal("false", Iri(std::string(ns::xsd) + "boolean")))));
  ResultTable open = evaluate(
      parse("select ?v where { ?v <http://t.example/open> ?x . filter(?x = true) }"),
      flags);
  REQUIRE(open.rows.size() == 1);
  CHECK(*open.rows[0][0] == Term(iri("v1")));
}

TEST_CASE("incompatible comparison removes the row for every operator") {
  Graph g;
  g.add(Triple(Term(iri("s")), iri("p"), Term(Literal("text"))));
  for (const char* op : {"=", "!=", "<", ">"}) {
    std::string q = "select ?s where { ?s <http://t.example/p> ?v . filter(?v " +
                    std::string(op) + " 5) }";
    CHECK_MESSAGE(evaluate(parse(q), g).rows.empty(), "operator " << op);
  }
}

TEST_CASE("iri equality filters work, iri ordering yields no solutions") {
  Graph g;
  g.add(Triple(Term(iri("s1")), iri("p"), Term(iri("o1"))));
  g.add(Triple(Term(iri("s2")), iri("p"), Term(iri("o2"))));
  auto rows = [&](const std::string& f) {
    return evaluate(parse("select ?s where { ?s <http://t.example/p> ?o . "
                          "filter(?o " + f + ") }"),
                    g)
        .rows.size();
  };
  CHECK(rows("= <http://t.example/o1>") == 1);
  CHECK(rows("!= <http://t.example/o1>") == 1);
  CHECK(rows("< <http://t.example/o1>") == 0);
}

TEST_CASE("VALUES restricts like an equality filter") {
  std::mt19937_64 rng(5);
  auto vocab = testgen::small_vocab();
  for (int round = 0; round < 30; ++round) {
    Graph g = testgen::random_graph(rng, 50, vocab);

    QueryAst base;
    base.select_all = true;
    TriplePattern p;
    p.subject = Variable{"s"};
    p.predicate = Term(vocab.predicates[round % vocab.predicates.size()]);
    p.object = Variable{"o"};
    base.where.push_back(p);

    std::uniform_int_distribution<std::size_t> pick(0, vocab.objects.size() - 1);
    Term chosen = vocab.objects[pick(rng)];

    QueryAst with_values = base;
    ValuesClause clause;
    clause.vars = {"o"};
    clause.rows = {{chosen}};
    with_values.values = clause;

    auto restricted = table_keys(evaluate(with_values, g));

    ResultTable full = evaluate(base, g);
    std::size_t o_col =
        std::find(full.header.begin(), full.header.end(), "o") - full.header.begin();
    std::vector<std::string> filtered;
    for (const auto& row : full.rows)
      if (row[o_col] && *row[o_col] == chosen) filtered.push_back(row_key(row));
    std::sort(filtered.begin(), filtered.end());

    REQUIRE_MESSAGE(restricted == filtered, "round " << round);
  }
}

TEST_CASE("ORDER BY sorts and LIMIT truncates the ordered prefix") {
  Graph g;
  g.add(Triple(Term(iri("a")), iri("level"), Term(num("17.25"))));
  g.add(Triple(Term(iri("b")), iri("level"), Term(num("3"))));
  g.add(Triple(Term(iri("c")), iri("level"), Term(num("9.5"))));

  ResultTable asc = evaluate(
      parse("select ?s ?v where { ?s <http://t.example/level> ?v } order by ?v"), g);
  REQUIRE(asc.rows.size() == 3);
  CHECK(*asc.rows[0][0] == Term(iri("b")));
  CHECK(*asc.rows[2][0] == Term(iri("a")));

  ResultTable desc = evaluate(
      parse("select ?s where { ?s <http://t.example/level> ?v } order by desc(?v) limit 2"),
      g);
  REQUIRE(desc.rows.size() == 2);
  CHECK(*desc.rows[0][0] == Term(iri("a")));
  CHECK(*desc.rows[1][0] == Term(iri("c")));
}

TEST_CASE("LIMIT never exceeds n on random inputs") {
  std::mt19937_64 rng(17);
  auto vocab = testgen::small_vocab();
  for (int round = 0; round < 20; ++round) {
    Graph g = testgen::random_graph(rng, 60, vocab);
    QueryAst ast;
    ast.select_all = true;
    TriplePattern p = TriplePattern::all();
    ast.where.push_back(p);
    std::size_t full = evaluate(ast, g).rows.size();
    ast.limit = 5;
    std::size_t limited = evaluate(ast, g).rows.size();
    CHECK(limited <= 5);
    CHECK(limited == std::min<std::size_t>(5, full));
  }
}

TEST_CASE("evaluate equals the brute-force join oracle") {
  std::mt19937_64 rng(23);
  auto vocab = testgen::small_vocab();
  std::vector<std::string> vars{"x", "y", "z"};
  std::uniform_int_distribution<int> n_patterns(1, 4);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  for (int round = 0; round < 250; ++round) {
    Graph g = testgen::random_graph(rng, 60, vocab);
    QueryAst ast;
    int n = n_patterns(rng);
    for (int i = 0; i < n; ++i)
      ast.where.push_back(testgen::random_pattern(rng, vocab, vars, 0.45));

    std::set<std::string> used;
    for (const auto& p : ast.where) {
      if (const Variable* v = as_var(p.subject)) used.insert(v->name);
      if (const Variable* v = as_var(p.predicate)) used.insert(v->name);
      if (const Variable* v = as_var(p.object)) used.insert(v->name);
    }
    if (coin(rng) < 0.5 || used.empty()) {
      ast.select_all = true;
    } else {
      // Project a random non-empty subset, in sorted order.
      for (const auto& v : used)
        if (coin(rng) < 0.6) ast.select_vars.push_back(v);
      if (ast.select_vars.empty())
        ast.select_vars.push_back(*used.begin());
    }

    auto expected = oracle_keys(ast, g);
    auto got = table_keys(evaluate(ast, g));
    REQUIRE_MESSAGE(got == expected,
                    "round " << round << ": evaluator disagrees with oracle ("
                             << got.size() << " vs " << expected.size() << ")");
  }
}

TEST_CASE("evaluation over a union source matches the merged graph") {
  std::mt19937_64 rng(31);
  auto vocab = testgen::small_vocab();
  for (int round = 0; round < 10; ++round) {
    Graph whole = testgen::random_graph(rng, 40, vocab);
    Graph part1, part2;
    for (std::size_t i = 0; i < whole.triples().size(); ++i)
      (i % 2 ? part1 : part2).add(whole.triples()[i]);
    UnionSource split({&part1, &part2});

    QueryAst ast;
    ast.select_all = true;
    ast.where.push_back(testgen::random_pattern(rng, vocab, {"a", "b"}, 0.7));
    CHECK(table_keys(evaluate(ast, split)) == table_keys(evaluate(ast, whole)));
  }
}

TEST_CASE("evaluation is deterministic per run") {
  std::mt19937_64 rng(37);
  auto vocab = testgen::small_vocab();
  Graph g = testgen::random_graph(rng, 50, vocab);
  QueryAst ast = parse("select * where { ?s ?p ?o }");
  ResultTable a = evaluate(ast, g);
  ResultTable b = evaluate(ast, g);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    CHECK(row_key(a.rows[i]) == row_key(b.rows[i]));
}

TEST_CASE("csv export") {
  ResultTable t;
  t.header = {"sensor", "value"};
  t.rows.push_back({Term(Iri("http://www.w3.org/ns/sosa/Sensor")),
                    Term(Literal("say \"hi\", ok"))});
  t.rows.push_back({Term(Iri("http://elsewhere.example/x")), std::nullopt});
  std::string csv = to_csv(t, &default_prefixes());
  CHECK(csv ==
        "sensor,value\n"
        "sosa:Sensor,\"say \"\"hi\"\", ok\"\n"
        "http://elsewhere.example/x,\n");
}

TEST_CASE("end-to-end: listing-shaped query over a hand-built graph") {
  // Two sensors; only one observes a property of the mixing tank.
  std::string doc =
      "@prefix sosa: <http://www.w3.org/ns/sosa/> .\n"
      "@prefix ssn: <http://www.w3.org/ns/ssn/> .\n"
      "@prefix ModVA: <http://example.org/ModVA#> .\n"
      "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n"
      "ModVA:tank_B201.level sosa:observes ModVA:tank_B201.level.property ;\n"
      "  sosa:madeObservation ModVA:obs_0 , ModVA:obs_1 .\n"
      "ModVA:tank_B201.level.property ssn:isPropertyOf ModVA:mixer_partial0.tank_B201 .\n"
      "ModVA:obs_0 sosa:resultTime \"2024-01-01T00:00:00.000Z\"^^xsd:dateTime ;\n"
      "  sosa:hasSimpleResult \"0.0\"^^xsd:decimal ;\n"
      "  sosa:hasFeatureOfInterest ModVA:mixer_partial0.tank_B201 .\n"
      "ModVA:obs_1 sosa:resultTime \"2024-01-01T00:00:01.000Z\"^^xsd:dateTime ;\n"
      "  sosa:hasSimpleResult \"0.1\"^^xsd:decimal ;\n"
      "  sosa:hasFeatureOfInterest ModVA:mixer_partial0.tank_B201 .\n"
      "ModVA:tank_B101.level sosa:observes ModVA:tank_B101.level.property ;\n"
      "  sosa:madeObservation ModVA:obs_2 .\n"
      "ModVA:tank_B101.level.property ssn:isPropertyOf ModVA:mixer_partial0.tank_B101 .\n"
      "ModVA:obs_2 sosa:resultTime \"2024-01-01T00:00:00.000Z\"^^xsd:dateTime ;\n"
      "  sosa:hasSimpleResult \"10.0\"^^xsd:decimal ;\n"
      "  sosa:hasFeatureOfInterest ModVA:mixer_partial0.tank_B101 .\n";
  Graph g = load(doc, Format::TurtleSubset);

  QueryAst listing = parse_file(std::string(PLANTKG_FIXTURE_DIR) +
                                    "/queries/observations_b201.rq",
                                &default_prefixes());
  ResultTable t = evaluate(listing, g);
  CHECK(t.rows.size() == 2);  // obs_0 and obs_1 only
  for (const auto& row : t.rows) {
    CHECK(*row[4] == Term(Iri("http://example.org/ModVA#mixer_partial0.tank_B201")));
    CHECK(*row[2] == Term(Iri("http://example.org/ModVA#tank_B201.level")));
  }

  QueryAst cq1 = parse_file(std::string(PLANTKG_FIXTURE_DIR) +
                                "/queries/cq1_sensors_of_b201.rq",
                            &default_prefixes());
  ResultTable sensors = evaluate(cq1, g);
  std::set<std::string> names;
  for (const auto& row : sensors.rows)
    names.insert(std::get<Iri>(*row[0]).local_name());
  CHECK(names == std::set<std::string>{"tank_B201.level"});
}
