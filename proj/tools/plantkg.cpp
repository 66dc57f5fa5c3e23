// Command-line frontend for the plant knowledge-graph toolkit.
//
//   plantkg sim run        simulate the plant and write the sensor log
//   plantkg kg build       materialize a graph from mapping rules
//   plantkg kg query       answer a query over graphs and live views
//   plantkg kg validate    check a graph against consistency shapes
//   plantkg kg closure     materialize the entailed graph
//   plantkg learn          learn the timing model from a run
//   plantkg detect         walk a run through a learned model
//   plantkg registry ...   record and inspect ontological artifacts
//   plantkg pipeline run   the whole workflow in one call
//
// Exit codes: 0 on success, 1 on usage errors, 2 when an operation fails.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "plantkg/error.hpp"
#include "plantkg/learn/automaton.hpp"
#include "plantkg/mapping/engine.hpp"
#include "plantkg/mapping/rules.hpp"
#include "plantkg/pipeline/pipeline.hpp"
#include "plantkg/pipeline/registry.hpp"
#include "plantkg/query/eval.hpp"
#include "plantkg/query/parser.hpp"
#include "plantkg/rdf/io.hpp"
#include "plantkg/reason/reasoner.hpp"
#include "plantkg/sim/sim.hpp"
#include "plantkg/util/csv.hpp"
#include "plantkg/util/time.hpp"

namespace {

namespace fs = std::filesystem;
using namespace plantkg;

// "--override id=path" arguments, split at the first '='.
std::map<std::string, std::string> parse_overrides(
    const std::vector<std::string>& specs) {
  std::map<std::string, std::string> overrides;
  for (const std::string& spec : specs) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw Error("override '" + spec + "' is not of the form <source>=<path>");
    overrides[spec.substr(0, eq)] = spec.substr(eq + 1);
  }
  return overrides;
}

rdf::Format format_for(const std::string& path) {
  return fs::path(path).extension() == ".ttl" ? rdf::Format::TurtleSubset
                                              : rdf::Format::NTriples;
}

// The triple sources named on the command line, kept alive together so a
// union over them stays valid.  Graph files contribute stored triples; a
// mapping file contributes its static rules materialized plus a live view
// of its virtual rules.
struct SourceBundle {
  std::vector<rdf::Graph> graphs;
  mapping::MappingRuleSet virtual_rules;
  std::optional<mapping::BoundSources> bound;
  std::unique_ptr<mapping::VirtualView> view;
  std::vector<const rdf::TripleSource*> parts;
};

void open_sources(SourceBundle& bundle, const std::vector<std::string>& graph_paths,
                  const std::string& mapping_path,
                  const std::vector<std::string>& override_specs,
                  bool materialize_virtual) {
  for (const std::string& path : graph_paths)
    bundle.graphs.push_back(rdf::load_file(path, &rdf::default_prefixes()));

  if (!mapping_path.empty()) {
    mapping::MappingRuleSet ruleset = mapping::load_rules_file(mapping_path);
    std::string base_dir = fs::path(mapping_path).parent_path().string();
    bundle.bound = mapping::BoundSources::bind(ruleset, base_dir,
                                               parse_overrides(override_specs));
    bundle.graphs.push_back(mapping::materialize(
        mapping::rules_with_mode(ruleset, false), *bundle.bound));
    bundle.virtual_rules = mapping::rules_with_mode(ruleset, true);
    if (materialize_virtual) {
      bundle.graphs.back().add_all(
          mapping::materialize(bundle.virtual_rules, *bundle.bound));
    } else {
      bundle.view = std::make_unique<mapping::VirtualView>(bundle.virtual_rules,
                                                           *bundle.bound);
    }
  }
  if (bundle.graphs.empty() && !bundle.view)
    throw Error("no input: give --graph and/or --mapping");

  for (const rdf::Graph& g : bundle.graphs) bundle.parts.push_back(&g);
  if (bundle.view) bundle.parts.push_back(bundle.view.get());
}

// Discrete tags: the rows of the tag table whose datatype is xsd:boolean.
std::set<std::string> discrete_tags(const std::string& tags_csv) {
  util::CsvTable table = util::read_csv(tags_csv);
  std::size_t tag_col = table.header.size(), type_col = table.header.size();
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == "tag") tag_col = i;
    if (table.header[i] == "datatype") type_col = i;
  }
  if (tag_col == table.header.size() || type_col == table.header.size())
    throw Error("tag table " + tags_csv + " lacks 'tag'/'datatype' columns");
  std::set<std::string> tags;
  for (const auto& row : table.rows)
    if (row[type_col] == "xsd:boolean") tags.insert(row[tag_col]);
  if (tags.empty()) throw Error("tag table " + tags_csv + " has no discrete tags");
  return tags;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph toolkit for plant data projects"};
  app.require_subcommand(1);
  std::string out_dir = "out";
  std::uint64_t seed = 42;
  app.add_option("--out-dir", out_dir, "Directory for generated files")
      ->capture_default_str();
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "Simulator seed")->capture_default_str();

  // --- sim run ------------------------------------------------------------
  CLI::App* sim_cmd = app.add_subcommand("sim", "Plant simulator");
  sim_cmd->require_subcommand(1);
  sim_cmd->fallthrough();
  CLI::App* sim_run =
      sim_cmd->add_subcommand("run", "Simulate and write log plus tables");
  sim_run->fallthrough();
  std::string sim_config;
  double sim_duration = 0;
  std::vector<std::string> sim_anomalies;
  sim_run->add_option("--config", sim_config, "Plant model file")->required();
  sim_run->add_option("--duration", sim_duration, "Simulated seconds")->required();
  sim_run->add_option("--anomaly", sim_anomalies,
                      "Fault injection, e.g. clog:V101:0.5:120");
  sim_run->callback([&] {
    sim::PlantConfig plant = sim::load_plant_config_file(sim_config);
    std::vector<sim::AnomalySpec> anomalies;
    for (const std::string& text : sim_anomalies)
      anomalies.push_back(sim::parse_anomaly(text));
    sim::SimResult run = sim::simulate(plant, seed, sim_duration, anomalies);
    fs::create_directories(out_dir);
    std::string log_path = out_dir + "/sensor_log.csv";
    sim::emit_log(run.records, log_path);
    sim::emit_engineering(run.doc, out_dir + "/tables");
    std::cout << "wrote " << log_path << " (" << run.records.size()
              << " rows) and " << out_dir << "/tables\n";
  });

  // --- kg build / query / validate / closure ------------------------------
  CLI::App* kg_cmd = app.add_subcommand("kg", "Knowledge graph operations");
  kg_cmd->require_subcommand(1);
  kg_cmd->fallthrough();

  std::vector<std::string> kg_graphs, kg_overrides;
  std::string kg_mapping;

  CLI::App* kg_build = kg_cmd->add_subcommand(
      "build", "Materialize mapping rules into a stored graph");
  kg_build->fallthrough();
  std::string build_out;
  bool build_virtual = false;
  kg_build->add_option("--mapping", kg_mapping, "Mapping rule file")->required();
  kg_build->add_option("--override", kg_overrides,
                       "Replace a source path: <source>=<path>");
  kg_build->add_option("--graph", kg_graphs, "Extra graph to merge (e.g. a T-Box)");
  kg_build->add_flag("--include-virtual", build_virtual,
                     "Materialize virtual rules too");
  kg_build->add_option("--out", build_out, "Output graph file")->required();
  kg_build->callback([&] {
    mapping::MappingRuleSet ruleset = mapping::load_rules_file(kg_mapping);
    std::string base_dir = fs::path(kg_mapping).parent_path().string();
    mapping::BoundSources bound = mapping::BoundSources::bind(
        ruleset, base_dir, parse_overrides(kg_overrides));
    rdf::Graph merged =
        mapping::materialize(mapping::rules_with_mode(ruleset, false), bound);
    if (build_virtual)
      merged.add_all(
          mapping::materialize(mapping::rules_with_mode(ruleset, true), bound));
    for (const std::string& path : kg_graphs) {
      rdf::Graph g = rdf::load_file(path, &rdf::default_prefixes());
      merged.add_all(g);
      merged.namespaces().merge(g.namespaces());
    }
    rdf::save_file(merged, build_out, format_for(build_out));
    std::cout << "wrote " << build_out << " (" << merged.size() << " triples)\n";
  });

  CLI::App* kg_query =
      kg_cmd->add_subcommand("query", "Answer a query over the given sources");
  kg_query->fallthrough();
  std::string query_file, query_out;
  kg_query->add_option("--query", query_file, "Query file")->required();
  kg_query->add_option("--graph", kg_graphs, "Stored graph file");
  kg_query->add_option("--mapping", kg_mapping,
                       "Mapping file; virtual rules answer live");
  kg_query->add_option("--override", kg_overrides,
                       "Replace a source path: <source>=<path>");
  kg_query->add_option("--out", query_out, "Write CSV here instead of stdout");
  kg_query->callback([&] {
    SourceBundle bundle;
    open_sources(bundle, kg_graphs, kg_mapping, kg_overrides, false);
    rdf::UnionSource source(bundle.parts);
    query::QueryAst ast = query::parse_file(query_file, &rdf::default_prefixes());
    query::ResultTable result = query::evaluate(ast, source);
    std::string csv = query::to_csv(result, &rdf::default_prefixes());
    if (query_out.empty()) {
      std::cout << csv;
    } else {
      write_text(query_out, csv);
      std::cout << "wrote " << query_out << " (" << result.rows.size()
                << " rows)\n";
    }
  });

  CLI::App* kg_validate =
      kg_cmd->add_subcommand("validate", "Check sources against shapes");
  kg_validate->fallthrough();
  std::string shapes_file;
  kg_validate->add_option("--shapes", shapes_file, "Constraint file")->required();
  kg_validate->add_option("--graph", kg_graphs, "Stored graph file");
  kg_validate->add_option("--mapping", kg_mapping, "Mapping file");
  kg_validate->add_option("--override", kg_overrides,
                          "Replace a source path: <source>=<path>");
  kg_validate->callback([&] {
    SourceBundle bundle;
    open_sources(bundle, kg_graphs, kg_mapping, kg_overrides, true);
    rdf::Graph merged;
    for (rdf::Graph& g : bundle.graphs) merged.add_all(g);
    reason::ConsistencyReport report =
        reason::validate(merged, reason::load_shapes_file(shapes_file));
    if (report.ok()) {
      std::cout << "conforms (" << merged.size() << " triples)\n";
      return;
    }
    std::ostringstream msg;
    msg << report.violations.size() << " constraint violation"
        << (report.violations.size() == 1 ? "" : "s");
    std::size_t shown = std::min<std::size_t>(report.violations.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
      const reason::Violation& v = report.violations[i];
      msg << "\n  " << v.shape_id << "  "
          << query::render_term(v.focus, &rdf::default_prefixes()) << "  "
          << v.message;
    }
    if (report.violations.size() > shown) msg << "\n  ...";
    throw Error(msg.str());
  });

  CLI::App* kg_closure =
      kg_cmd->add_subcommand("closure", "Materialize the entailed graph");
  kg_closure->fallthrough();
  std::string closure_in, closure_out;
  std::vector<std::string> closure_rules;
  kg_closure->add_option("--graph", closure_in, "Input graph file")->required();
  kg_closure->add_option("--out", closure_out, "Output graph file")->required();
  kg_closure->add_option("--rule", closure_rules,
                         "Entailment rule name (default: all)");
  kg_closure->callback([&] {
    rdf::Graph g = rdf::load_file(closure_in, &rdf::default_prefixes());
    reason::RuleSet rules;
    for (const std::string& name : closure_rules)
      rules.insert(reason::rule_from_name(name));
    if (rules.empty()) rules = reason::all_rules();
    rdf::Graph closed = reason::rdfs_closure(g, rules);
    rdf::save_file(closed, closure_out, format_for(closure_out));
    std::cout << "wrote " << closure_out << " (" << g.size() << " stated + "
              << closed.size() - g.size() << " entailed triples)\n";
  });

  // --- learn / detect -----------------------------------------------------
  CLI::App* learn_cmd =
      app.add_subcommand("learn", "Learn the timing model from a run");
  learn_cmd->fallthrough();
  std::string learn_tags, learn_log, learn_out;
  learn_cmd->add_option("--tags", learn_tags, "Tag table (tag/datatype columns)")
      ->required();
  learn_cmd->add_option("--log", learn_log, "Sensor log CSV");
  learn_cmd->add_option("--graph", kg_graphs, "Stored graph file");
  learn_cmd->add_option("--mapping", kg_mapping, "Mapping file");
  learn_cmd->add_option("--override", kg_overrides,
                        "Replace a source path: <source>=<path>");
  learn_cmd->add_option("--out", learn_out, "Model file to write")->required();
  learn_cmd->callback([&] {
    std::set<std::string> universe = discrete_tags(learn_tags);
    learn::EventTrace trace;
    if (!learn_log.empty()) {
      trace = learn::events_from_log(util::read_csv(learn_log), universe);
    } else {
      SourceBundle bundle;
      open_sources(bundle, kg_graphs, kg_mapping, kg_overrides, false);
      rdf::UnionSource source(bundle.parts);
      trace = learn::extract_events(source, universe);
    }
    learn::TimedAutomaton automaton = learn::learn_automaton(trace);
    learn::save_automaton(automaton, learn_out);
    std::cout << "wrote " << learn_out << " (" << automaton.states.size()
              << " states, " << automaton.transitions.size()
              << " transitions from " << trace.events.size() << " events)\n";
  });

  CLI::App* detect_cmd =
      app.add_subcommand("detect", "Walk a run through a learned model");
  detect_cmd->fallthrough();
  std::string detect_model, detect_log, detect_report;
  double detect_tolerance = 0.1;
  detect_cmd->add_option("--automaton", detect_model, "Model file")->required();
  detect_cmd->add_option("--log", detect_log, "Sensor log CSV")->required();
  detect_cmd->add_option("--tolerance", detect_tolerance, "Dwell tolerance")
      ->capture_default_str();
  detect_cmd->add_option("--report", detect_report, "Write the report CSV here");
  detect_cmd->callback([&] {
    learn::TimedAutomaton automaton = learn::load_automaton(detect_model);
    std::set<std::string> universe(automaton.tag_universe.begin(),
                                   automaton.tag_universe.end());
    learn::EventTrace trace =
        learn::events_from_log(util::read_csv(detect_log), universe);
    learn::AnomalyReport report =
        learn::detect(automaton, trace, detect_tolerance);
    if (!detect_report.empty())
      util::write_csv(detect_report, learn::report_table(report));
    std::cout << report.items.size() << " flagged event"
              << (report.items.size() == 1 ? "" : "s") << "\n";
    for (const learn::AnomalyItem& item : report.items) {
      std::cout << "  #" << item.event_index << "  "
                << util::format_iso8601(item.timestamp) << "  "
                << learn::anomaly_kind_name(item.kind) << "  at "
                << item.source_state << "  on "
                << (item.event_label.empty() ? "-" : item.event_label);
      if (item.observed_dwell)
        std::cout << "  dwell " << *item.observed_dwell << "s";
      if (item.allowed)
        std::cout << "  allowed [" << item.allowed->first << "s, "
                  << item.allowed->second << "s]";
      std::cout << "\n";
    }
  });

  // --- registry -----------------------------------------------------------
  CLI::App* registry_cmd =
      app.add_subcommand("registry", "Artifact registry operations");
  registry_cmd->require_subcommand(1);
  registry_cmd->fallthrough();
  std::string registry_file = "registry.json";
  registry_cmd->add_option("--registry", registry_file, "Registry file")
      ->capture_default_str();

  CLI::App* reg_register =
      registry_cmd->add_subcommand("register", "Record one artifact");
  reg_register->fallthrough();
  pipeline::ArtifactDescriptor entry;
  std::string entry_kind, entry_role, entry_standard;
  bool entry_reusable = false;
  reg_register->add_option("--project", entry.project, "Project name")->required();
  reg_register->add_option("--id", entry.id, "Artifact id")->required();
  reg_register->add_option("--kind", entry_kind, "Artifact kind")->required();
  reg_register->add_option("--role", entry_role, "Creating role")->required();
  reg_register->add_option("--path", entry.path, "Artifact file")->required();
  reg_register->add_option("--standard-ref", entry_standard,
                           "Industry standard the artifact is based on");
  reg_register->add_flag("--reusable", entry_reusable,
                         "Mark as reusable across projects");
  reg_register->callback([&] {
    entry.kind = pipeline::kind_from_name(entry_kind);
    entry.created_by_role = pipeline::role_from_name(entry_role);
    if (!entry_standard.empty()) entry.standard_ref = entry_standard;
    entry.reusable = entry_reusable;
    pipeline::RegistryIndex index;
    if (fs::exists(registry_file))
      index = pipeline::load_registry(registry_file);
    pipeline::register_artifact(index, entry);
    pipeline::save_registry(index, registry_file);
    std::cout << "registered " << entry.project << "/" << entry.id << " in "
              << registry_file << "\n";
  });

  CLI::App* reg_list = registry_cmd->add_subcommand("list", "Print all entries");
  reg_list->fallthrough();
  reg_list->callback([&] {
    pipeline::RegistryIndex index = pipeline::load_registry(registry_file);
    std::cout << pipeline::render_index(index);
  });

  CLI::App* reg_reuse = registry_cmd->add_subcommand(
      "reuse-report", "Reuse prospects for a follow-up scenario");
  reg_reuse->fallthrough();
  std::string reuse_scenario;
  reg_reuse->add_option("--scenario", reuse_scenario, "A or B")->required();
  reg_reuse->callback([&] {
    pipeline::RegistryIndex index = pipeline::load_registry(registry_file);
    pipeline::ScenarioReport report = pipeline::reuse_report(
        index, pipeline::scenario_from_name(reuse_scenario));
    std::cout << pipeline::render_report(report);
  });

  // --- pipeline run -------------------------------------------------------
  CLI::App* pipeline_cmd =
      app.add_subcommand("pipeline", "Integrated workflow runs");
  pipeline_cmd->require_subcommand(1);
  pipeline_cmd->fallthrough();
  CLI::App* pipeline_run =
      pipeline_cmd->add_subcommand("run", "Run the whole workflow");
  pipeline_run->fallthrough();
  std::string pipeline_config;
  pipeline_run->add_option("--config", pipeline_config, "Project file")
      ->required();
  pipeline_run->callback([&] {
    pipeline::ProjectConfig config =
        pipeline::load_project_config_file(pipeline_config);
    if (seed_opt->count() > 0) config.seed = seed;
    pipeline::RunSummary summary = pipeline::run_pipeline(config, out_dir);
    std::cout << pipeline::render_summary(summary) << "registry          "
              << summary.paths.registry << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
