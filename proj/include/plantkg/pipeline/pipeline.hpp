#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plantkg/error.hpp"
#include "plantkg/pipeline/registry.hpp"

namespace plantkg::pipeline {

// ---------------------------------------------------------------------------
// Project pipeline
//
// One project file wires all stage inputs together; run_pipeline() then walks
// the whole workflow: requirements -> design -> simulate -> build -> validate
// -> (optional) closure -> explore -> learn -> detect.  Every produced
// ontological artifact is written below the output directory and recorded in
// the registry, and a failing stage aborts the run with an error naming the
// stage.
// ---------------------------------------------------------------------------

// Line-oriented project file ('#' comments; paths resolve against the file's
// own directory):
//   project <name>                    optional; defaults to the reqspec's
//   reqspec <path>                    requirement specification
//   odp_dir <path>                    directory with the bundled patterns
//   odp <id>                          extra pattern beside those the CQs name
//   alignments <path>                 alignment axiom file
//   mapping <path>                    mapping rule file
//   tags_source <id>                  source with the tag schema (default "tags")
//   shapes <path>                     consistency constraint file
//   plant <path>                      plant model for the simulator
//   seed <n>                          simulator seed (default 42)
//   duration <seconds>                simulated time span
//   tolerance <t>                     dwell-time tolerance for detection
//   closure on|off                    materialize the entailed graph (default off)
//   exploration_query <path>          extra query to answer (repeatable)
//   preparation_query <path>          query documenting the event extraction
//   anomaly <spec>                    simulator fault injection (repeatable)
//   detect_log <path>                 foreign sensor log to detect on; when
//                                     absent the training run is replayed
struct ProjectConfig {
  std::string project;
  std::string reqspec_path;
  std::string odp_dir;
  std::vector<std::string> extra_odps;
  std::string alignments_path;
  std::string mapping_path;
  std::string tags_source = "tags";
  std::string shapes_path;
  std::string plant_path;
  std::uint64_t seed = 42;
  double duration = 0;
  double tolerance = 0.1;
  bool closure = false;
  std::vector<std::string> exploration_queries;
  std::string preparation_query;
  std::vector<std::string> anomalies;  // raw specs, parsed by the simulator
  std::optional<std::string> detect_log;
};

ProjectConfig parse_project_config(std::string_view text, const std::string& base_dir);
ProjectConfig load_project_config_file(const std::string& path);

// A stage failure; what() reads "stage '<name>': <detail>".
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& detail)
      : Error("stage '" + stage + "': " + detail), stage_(stage) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Where a run's outputs land, all below the chosen output directory.
struct RunPaths {
  std::string out_dir;
  std::string sensor_log;    // sensor_log.csv
  std::string tables_dir;    // tables/  (generated engineering tables)
  std::string lwo;           // lwo.ttl
  std::string static_graph;  // static.nt  (T-Box plus static A-Box)
  std::string closure_graph; // closure.nt (only with closure on)
  std::string answers_dir;   // answers/<query>.csv
  std::string automaton;     // plant.model
  std::string report;        // report.csv
  std::string registry;      // registry.json
};

// Counters reported after a successful run.
struct RunSummary {
  std::string project;
  std::size_t log_rows = 0;
  std::size_t static_triples = 0;
  std::size_t full_triples = 0;    // static plus materialized observations
  std::size_t closure_added = 0;
  std::size_t answered_queries = 0;
  std::size_t events = 0;
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t report_items = 0;
  RegistryIndex registry;
  RunPaths paths;
};

// Runs the whole workflow and writes every artifact below `out_dir`.  The run
// is deterministic: re-running with unchanged inputs and the same seed
// rewrites byte-identical files.  Throws StageError on the first failure.
RunSummary run_pipeline(const ProjectConfig& config, const std::string& out_dir);

// One line per counter, as printed by the command-line frontend.
std::string render_summary(const RunSummary& summary);

}  // namespace plantkg::pipeline
