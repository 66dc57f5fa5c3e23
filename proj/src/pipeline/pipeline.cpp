#include "plantkg/pipeline/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "plantkg/learn/automaton.hpp"
#include "plantkg/mapping/engine.hpp"
#include "plantkg/mapping/rules.hpp"
#include "plantkg/odp/odp.hpp"
#include "plantkg/odp/reqspec.hpp"
#include "plantkg/query/eval.hpp"
#include "plantkg/query/parser.hpp"
#include "plantkg/rdf/io.hpp"
#include "plantkg/reason/reasoner.hpp"
#include "plantkg/sim/sim.hpp"
#include "plantkg/util/csv.hpp"
#include "plantkg/util/strings.hpp"

namespace plantkg::pipeline {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

double read_number(const std::string& value, const std::string& key,
                   std::size_t line) {
  if (!util::is_decimal(value))
    throw ParseError(key + " '" + value + "' is not a number", line);
  return std::stod(value);
}

std::uint64_t read_seed(const std::string& value, std::size_t line) {
  if (!util::is_integer(value) || value.front() == '-')
    throw ParseError("seed '" + value + "' is not a non-negative integer", line);
  return std::stoull(value);
}

// Runs a stage body and prefixes any failure with the stage's name, so one
// look at the error tells where the workflow stopped.
template <typename Fn>
auto run_stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

ProjectConfig parse_project_config(std::string_view text,
                                   const std::string& base_dir) {
  ProjectConfig config;
  auto resolve = [&](const std::string& rel) {
    if (rel.empty() || rel.front() == '/' || base_dir.empty()) return rel;
    return base_dir + "/" + rel;
  };

  std::set<std::string> seen;
  auto once = [&](const std::string& key, std::size_t line) {
    if (!seen.insert(key).second)
      throw ParseError("duplicate " + key + " line", line);
  };

  std::size_t line_no = 0;
  for (const std::string& raw : util::split(text, '\n')) {
    ++line_no;
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto space = line.find_first_of(" \t");
    std::string key = space == std::string::npos ? line : line.substr(0, space);
    std::string value =
        space == std::string::npos ? "" : util::trim(line.substr(space));
    if (value.empty()) throw ParseError("'" + key + "' needs a value", line_no);

    if (key == "project") {
      once(key, line_no);
      config.project = value;
    } else if (key == "reqspec") {
      once(key, line_no);
      config.reqspec_path = resolve(value);
    } else if (key == "odp_dir") {
      once(key, line_no);
      config.odp_dir = resolve(value);
    } else if (key == "odp") {
      config.extra_odps.push_back(value);
    } else if (key == "alignments") {
      once(key, line_no);
      config.alignments_path = resolve(value);
    } else if (key == "mapping") {
      once(key, line_no);
      config.mapping_path = resolve(value);
    } else if (key == "tags_source") {
      once(key, line_no);
      config.tags_source = value;
    } else if (key == "shapes") {
      once(key, line_no);
      config.shapes_path = resolve(value);
    } else if (key == "plant") {
      once(key, line_no);
      config.plant_path = resolve(value);
    } else if (key == "seed") {
      once(key, line_no);
      config.seed = read_seed(value, line_no);
    } else if (key == "duration") {
      once(key, line_no);
      config.duration = read_number(value, key, line_no);
      if (config.duration <= 0)
        throw ParseError("duration must be positive", line_no);
    } else if (key == "tolerance") {
      once(key, line_no);
      config.tolerance = read_number(value, key, line_no);
      if (config.tolerance < 0)
        throw ParseError("tolerance must be non-negative", line_no);
    } else if (key == "closure") {
      once(key, line_no);
      if (value == "on") config.closure = true;
      else if (value == "off") config.closure = false;
      else throw ParseError("closure must be 'on' or 'off'", line_no);
    } else if (key == "exploration_query") {
      config.exploration_queries.push_back(resolve(value));
    } else if (key == "preparation_query") {
      once(key, line_no);
      config.preparation_query = resolve(value);
    } else if (key == "anomaly") {
      config.anomalies.push_back(value);
    } else if (key == "detect_log") {
      once(key, line_no);
      config.detect_log = resolve(value);
    } else {
      throw ParseError("unknown project setting '" + key + "'", line_no);
    }
  }
  return config;
}

ProjectConfig load_project_config_file(const std::string& path) {
  std::string base_dir = fs::path(path).parent_path().string();
  return parse_project_config(read_file(path), base_dir);
}

RunSummary run_pipeline(const ProjectConfig& config, const std::string& out_dir) {
  if (out_dir.empty()) throw Error("output directory is not set");

  RunSummary summary;
  RunPaths& paths = summary.paths;
  paths.out_dir = out_dir;
  paths.sensor_log = out_dir + "/sensor_log.csv";
  paths.tables_dir = out_dir + "/tables";
  paths.lwo = out_dir + "/lwo.ttl";
  paths.static_graph = out_dir + "/static.nt";
  paths.closure_graph = out_dir + "/closure.nt";
  paths.answers_dir = out_dir + "/answers";
  paths.automaton = out_dir + "/plant.model";
  paths.report = out_dir + "/report.csv";
  paths.registry = out_dir + "/registry.json";

  std::error_code ec;
  fs::create_directories(paths.answers_dir, ec);
  if (ec) throw Error("cannot create output directory: " + out_dir);

  RegistryIndex registry;
  auto record = [&](std::string id, ArtifactKind kind, const std::string& path,
                    Role role, std::optional<std::string> standard_ref,
                    bool reusable) {
    ArtifactDescriptor entry;
    entry.project = summary.project;
    entry.id = std::move(id);
    entry.kind = kind;
    entry.path = path;
    entry.created_by_role = role;
    entry.standard_ref = std::move(standard_ref);
    entry.reusable = reusable;
    register_artifact(registry, entry);
  };

  // Elicitation: load the requirement spec and take the stories from it.
  odp::OntologyRequirementSpec spec = run_stage("requirements", [&] {
    if (config.reqspec_path.empty())
      throw Error("no requirement specification configured");
    odp::OntologyRequirementSpec loaded =
        odp::load_reqspec_file(config.reqspec_path);
    if (!config.project.empty() && loaded.project != config.project)
      throw Error("project name mismatch: config says '" + config.project +
                  "', requirement spec says '" + loaded.project + "'");
    return loaded;
  });
  summary.project = config.project.empty() ? spec.project : config.project;
  run_stage("requirements", [&] {
    for (const odp::UserStory& story : spec.user_stories)
      record("story_" + story.id, ArtifactKind::UserStory, story.source_path,
             Role::EndUser, std::nullopt, false);
    record("reqspec", ArtifactKind::OntologyReqSpec, config.reqspec_path,
           Role::EndUser, std::nullopt, true);
  });

  // Design: compose the project ontology from the patterns the competency
  // questions name (plus any extras the project file lists).
  odp::Lwo lwo = run_stage("design", [&] {
    if (config.odp_dir.empty()) throw Error("no pattern directory configured");
    std::set<std::string> wanted(config.extra_odps.begin(),
                                 config.extra_odps.end());
    for (const odp::CompetencyQuestion& cq : spec.cqs)
      wanted.insert(cq.odp_ids.begin(), cq.odp_ids.end());
    std::vector<std::string> ids;
    for (const std::string& id : odp::bundled_odp_ids())
      if (wanted.erase(id)) ids.push_back(id);
    if (!wanted.empty()) throw Error("unknown pattern id: " + *wanted.begin());

    std::vector<odp::AlignmentAxiom> axioms;
    if (!config.alignments_path.empty())
      axioms = odp::load_alignment_file(config.alignments_path,
                                        rdf::default_prefixes());
    odp::Lwo composed = odp::compose_lwo(ids, axioms, config.odp_dir);
    rdf::save_file(composed.tbox, paths.lwo, rdf::Format::TurtleSubset);

    for (const std::string& id : ids) {
      odp::Odp pattern = odp::load_odp(id, config.odp_dir);
      record("odp_" + id, ArtifactKind::LightweightODP,
             config.odp_dir + "/" + id + ".ttl", Role::DomainExpert,
             pattern.standard_ref, true);
    }
    record("lwo", ArtifactKind::LWO, paths.lwo, Role::DomainExpert, std::nullopt,
           true);
    if (!config.alignments_path.empty())
      record("alignments", ArtifactKind::AlignmentOntology,
             config.alignments_path, Role::DomainExpert, std::nullopt, true);
    return composed;
  });

  // Data generation: run the plant and write the log plus the engineering
  // tables the mapping reads.
  run_stage("simulate", [&] {
    if (config.plant_path.empty()) throw Error("no plant model configured");
    if (config.duration <= 0) throw Error("simulation duration is not set");
    sim::PlantConfig plant = sim::load_plant_config_file(config.plant_path);
    std::vector<sim::AnomalySpec> anomalies;
    for (const std::string& text : config.anomalies)
      anomalies.push_back(sim::parse_anomaly(text));
    sim::SimResult run =
        sim::simulate(plant, config.seed, config.duration, anomalies);
    sim::emit_log(run.records, paths.sensor_log);
    sim::emit_engineering(run.doc, paths.tables_dir);
    summary.log_rows = run.records.size();
  });

  // Graph building: bind the mapping sources — generated files shadow the
  // paths written in the mapping file — and store T-Box plus static A-Box.
  mapping::MappingRuleSet virtual_rules;
  mapping::BoundSources bound;
  rdf::Graph static_graph;
  run_stage("build", [&] {
    if (config.mapping_path.empty()) throw Error("no mapping rules configured");
    mapping::MappingRuleSet ruleset =
        mapping::load_rules_file(config.mapping_path);

    std::map<std::string, std::string> overrides;
    for (const mapping::SourceDecl& source : ruleset.sources) {
      if (source.id == "sensor_log" && fs::exists(paths.sensor_log))
        overrides[source.id] = paths.sensor_log;
      std::string table_path = paths.tables_dir + "/" + source.id + ".csv";
      if (fs::exists(table_path)) overrides[source.id] = table_path;
    }
    std::string base_dir = fs::path(config.mapping_path).parent_path().string();
    bound = mapping::BoundSources::bind(ruleset, base_dir, overrides);

    virtual_rules = mapping::rules_with_mode(ruleset, true);
    static_graph = mapping::materialize(mapping::rules_with_mode(ruleset, false),
                                        bound);
    static_graph.add_all(lwo.tbox);
    static_graph.namespaces().merge(lwo.tbox.namespaces());
    rdf::save_file(static_graph, paths.static_graph, rdf::Format::NTriples);

    record("mapping_rules", ArtifactKind::MappingRules, config.mapping_path,
           Role::OntologyExpert, std::nullopt, false);
    record("hwo", ArtifactKind::HWO, paths.static_graph, Role::OntologyExpert,
           std::nullopt, true);
  });
  summary.static_triples = static_graph.size();

  // Consistency check over the complete graph, observations included.
  rdf::Graph full;
  run_stage("validate", [&] {
    if (config.shapes_path.empty())
      throw Error("no consistency shapes configured");
    std::vector<reason::ConstraintShape> shapes =
        reason::load_shapes_file(config.shapes_path);
    full = static_graph;
    full.add_all(mapping::materialize(virtual_rules, bound));
    reason::ConsistencyReport report = reason::validate(full, shapes);
    if (!report.ok()) {
      std::size_t n = report.violations.size();
      std::string msg =
          std::to_string(n) + " constraint violation" + (n == 1 ? "" : "s");
      std::size_t shown = std::min<std::size_t>(n, 3);
      for (std::size_t i = 0; i < shown; ++i) {
        msg += (i == 0 ? ": " : "; ") + report.violations[i].shape_id + ": " +
               report.violations[i].message;
      }
      if (n > shown) msg += "; ...";
      throw Error(msg);
    }
  });
  summary.full_triples = full.size();

  // Optional enrichment: store the entailed graph next to the stated one.
  run_stage("closure", [&] {
    if (!config.closure) return;
    rdf::Graph closed = reason::rdfs_closure(full, reason::all_rules());
    summary.closure_added = closed.size() - full.size();
    rdf::save_file(closed, paths.closure_graph, rdf::Format::NTriples);
  });

  // Exploration: answer every direct competency question plus the extra
  // queries, over the live view rather than the materialized copy.
  mapping::VirtualView view(virtual_rules, bound);
  rdf::UnionSource kg({&static_graph, &view});
  run_stage("explore", [&] {
    auto answer = [&](const std::string& query_path, const std::string& name) {
      query::QueryAst ast =
          query::parse_file(query_path, &rdf::default_prefixes());
      query::ResultTable result = query::evaluate(ast, kg);
      write_file(paths.answers_dir + "/" + name + ".csv",
                 query::to_csv(result, &rdf::default_prefixes()));
      ++summary.answered_queries;
    };
    for (const odp::CompetencyQuestion& cq : spec.cqs) {
      if (cq.model_derived) continue;
      answer(cq.answer_query, cq.id);
      record("q_" + cq.id, ArtifactKind::ExplorationQuery, cq.answer_query,
             Role::DataScientist, std::nullopt, true);
    }
    for (const std::string& query_path : config.exploration_queries) {
      std::string stem = fs::path(query_path).stem().string();
      answer(query_path, stem);
      record("q_" + stem, ArtifactKind::ExplorationQuery, query_path,
             Role::DataScientist, std::nullopt, true);
    }
  });

  // Learning: slice the discrete signals out of the graph and fold them into
  // the timing model.
  std::set<std::string> universe;
  learn::EventTrace trace;
  learn::TimedAutomaton automaton;
  run_stage("learn", [&] {
    const mapping::Table& tags = bound.table(config.tags_source);
    std::size_t tag_col = tags.column("tag");
    std::size_t type_col = tags.column("datatype");
    for (std::size_t row = 0; row < tags.row_count(); ++row)
      if (tags.cell(row, type_col) == "xsd:boolean")
        universe.insert(tags.cell(row, tag_col));
    if (universe.empty())
      throw Error("source '" + config.tags_source + "' declares no discrete tags");

    if (!config.preparation_query.empty()) {
      // The file documents the extraction; it has to at least parse.
      query::parse_file(config.preparation_query, &rdf::default_prefixes());
      std::string stem = fs::path(config.preparation_query).stem().string();
      record("prep_" + stem, ArtifactKind::PreparationQuery,
             config.preparation_query, Role::DataScientist, std::nullopt, true);
    }

    trace = learn::extract_events(kg, universe);
    automaton = learn::learn_automaton(trace);
    learn::save_automaton(automaton, paths.automaton);
    record("automaton", ArtifactKind::Automaton, paths.automaton,
           Role::DataScientist, std::nullopt, false);
  });
  summary.events = trace.events.size();
  summary.states = automaton.states.size();
  summary.transitions = automaton.transitions.size();

  // Detection: replay the training run (or walk a foreign log) through the
  // model and store what it does not permit.
  run_stage("detect", [&] {
    learn::EventTrace probe = trace;
    if (config.detect_log)
      probe = learn::events_from_log(util::read_csv(*config.detect_log), universe);
    learn::AnomalyReport report = learn::detect(automaton, probe, config.tolerance);
    util::write_csv(paths.report, learn::report_table(report));
    summary.report_items = report.items.size();
  });

  save_registry(registry, paths.registry);
  summary.registry = std::move(registry);
  return summary;
}

std::string render_summary(const RunSummary& summary) {
  std::ostringstream out;
  out << "project           " << summary.project << "\n"
      << "sensor log rows   " << summary.log_rows << "\n"
      << "static triples    " << summary.static_triples << "\n"
      << "graph triples     " << summary.full_triples << "\n";
  if (summary.closure_added > 0)
    out << "closure added     " << summary.closure_added << "\n";
  out << "answered queries  " << summary.answered_queries << "\n"
      << "events            " << summary.events << "\n"
      << "states            " << summary.states << "\n"
      << "transitions       " << summary.transitions << "\n"
      << "report items      " << summary.report_items << "\n";
  return out.str();
}

}  // namespace plantkg::pipeline
