#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "plantkg/error.hpp"
#include "plantkg/pipeline/pipeline.hpp"
#include "plantkg/pipeline/registry.hpp"
#include "plantkg/sim/sim.hpp"
#include "plantkg/util/csv.hpp"

using namespace plantkg;
using namespace plantkg::pipeline;

namespace {

const std::string kFixtures = PLANTKG_FIXTURE_DIR;
const std::string kCli = PLANTKG_CLI_PATH;

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() / "plantkg_pipeline_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

bool error_contains(const std::function<void()>& fn, const std::string& needle) {
  try {
    fn();
  } catch (const Error& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

// Runs fn and hands back the stage a StageError names ("" when none thrown).
std::string failing_stage(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const StageError& e) {
    return e.stage();
  }
  return "";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

ProjectConfig fixture_config() {
  return load_project_config_file(kFixtures + "/project/pipeline.cfg");
}

// All cells of one CSV column, header excluded.
std::set<std::string> csv_column(const std::string& path, const std::string& name) {
  util::CsvTable table = util::read_csv(path);
  std::size_t col = table.header.size();
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == name) col = i;
  REQUIRE(col != table.header.size());
  std::set<std::string> cells;
  for (const auto& row : table.rows) cells.insert(row[col]);
  return cells;
}

// Every regular file below `dir`, keyed by relative path.
std::map<std::string, std::string> dir_contents(const std::string& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
    if (entry.is_regular_file())
      files[std::filesystem::relative(entry.path(), dir).string()] =
          slurp(entry.path().string());
  return files;
}

// Runs the frontend binary; output (both streams) lands in `capture`.
int run_cli(const std::string& args, std::string* capture = nullptr) {
  static int counter = 0;
  std::string out_file = std::filesystem::temp_directory_path() /
                         ("plantkg_cli_out_" + std::to_string(counter++));
  int status = std::system((kCli + " " + args + " > " + out_file + " 2>&1").c_str());
  if (capture) *capture = slurp(out_file);
  std::filesystem::remove(out_file);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("project files parse into resolved, validated settings") {
  ProjectConfig config = parse_project_config(
      "# comment\n"
      "project demo\n"
      "reqspec spec.txt\n"
      "odp_dir /abs/odps\n"
      "odp din61360\n"
      "odp sosa\n"
      "alignments align.txt\n"
      "mapping rules.map\n"
      "tags_source tagdefs\n"
      "shapes checks.txt\n"
      "plant plant.cfg\n"
      "seed 7\n"
      "duration 120.5\n"
      "tolerance 0.25\n"
      "closure on\n"
      "exploration_query q1.rq\n"
      "exploration_query /abs/q2.rq\n"
      "preparation_query prep.rq\n"
      "anomaly clog:V101:0.5:60\n"
      "detect_log other.csv\n",
      "/base");
  CHECK(config.project == "demo");
  CHECK(config.reqspec_path == "/base/spec.txt");
  CHECK(config.odp_dir == "/abs/odps");
  CHECK(config.extra_odps == std::vector<std::string>{"din61360", "sosa"});
  CHECK(config.alignments_path == "/base/align.txt");
  CHECK(config.mapping_path == "/base/rules.map");
  CHECK(config.tags_source == "tagdefs");
  CHECK(config.shapes_path == "/base/checks.txt");
  CHECK(config.plant_path == "/base/plant.cfg");
  CHECK(config.seed == 7);
  CHECK(config.duration == 120.5);
  CHECK(config.tolerance == 0.25);
  CHECK(config.closure);
  CHECK(config.exploration_queries ==
        std::vector<std::string>{"/base/q1.rq", "/abs/q2.rq"});
  CHECK(config.preparation_query == "/base/prep.rq");
  CHECK(config.anomalies == std::vector<std::string>{"clog:V101:0.5:60"});
  REQUIRE(config.detect_log.has_value());
  CHECK(*config.detect_log == "/base/other.csv");

  // Defaults of an empty file.
  ProjectConfig bare = parse_project_config("", "");
  CHECK(bare.seed == 42);
  CHECK(bare.tolerance == 0.1);
  CHECK(bare.tags_source == "tags");
  CHECK(!bare.closure);

  CHECK(error_contains([] { parse_project_config("seed 1\nseed 2\n", ""); },
                       "duplicate seed line"));
  CHECK(error_contains([] { parse_project_config("volume 3\n", ""); },
                       "unknown project setting 'volume'"));
  CHECK(error_contains([] { parse_project_config("seed x\n", ""); },
                       "not a non-negative integer"));
  CHECK(error_contains([] { parse_project_config("duration -5\n", ""); },
                       "duration must be positive"));
  CHECK(error_contains([] { parse_project_config("duration abc\n", ""); },
                       "not a number"));
  CHECK(error_contains([] { parse_project_config("tolerance -0.1\n", ""); },
                       "tolerance must be non-negative"));
  CHECK(error_contains([] { parse_project_config("closure maybe\n", ""); },
                       "'on' or 'off'"));
  CHECK(error_contains([] { parse_project_config("mapping\n", ""); },
                       "'mapping' needs a value"));
}

TEST_CASE("the fixture project runs end-to-end and registers every artifact kind") {
  TempDir tmp;
  ProjectConfig config = fixture_config();
  RunSummary summary = run_pipeline(config, tmp.path("out"));

  CHECK(summary.project == "mixing_plant_anomaly_detection");
  CHECK(summary.log_rows > 10000);
  CHECK(summary.static_triples > 100);
  CHECK(summary.full_triples > summary.static_triples);
  CHECK(summary.closure_added > 0);
  CHECK(summary.answered_queries == 3);
  CHECK(summary.events > 50);
  CHECK(summary.states > 5);
  CHECK(summary.transitions >= summary.states);
  // Replaying the training run must not flag anything.
  CHECK(summary.report_items == 0);

  // Everything the run promises is on disk.
  const RunPaths& paths = summary.paths;
  for (const std::string& file :
       {paths.sensor_log, paths.lwo, paths.static_graph, paths.closure_graph,
        paths.automaton, paths.report, paths.registry})
    CHECK(std::filesystem::exists(file));

  // One artifact of every kind, each with an existing file behind it.
  std::set<std::string> kinds;
  for (const ArtifactDescriptor& entry : summary.registry.entries) {
    kinds.insert(kind_name(entry.kind));
    CHECK(std::filesystem::exists(entry.path));
    CHECK(entry.project == summary.project);
  }
  CHECK(kinds == std::set<std::string>{
                     "UserStory", "OntologyReqSpec", "LightweightODP", "LWO",
                     "AlignmentOntology", "HWO", "MappingRules",
                     "ExplorationQuery", "PreparationQuery", "Automaton"});

  // The saved registry file reads back to the in-memory index.
  RegistryIndex reloaded = load_registry(paths.registry);
  CHECK(reloaded.entries.size() == summary.registry.entries.size());

  // The two competency questions come out with their known answers.
  CHECK(csv_column(tmp.path("out/answers/cq1.csv"), "sensor") ==
        std::set<std::string>{"ModVA:tank_B201.level", "ModVA:B201_isFull"});
  CHECK(csv_column(tmp.path("out/answers/cq2.csv"), "part") ==
        std::set<std::string>{"ModVA:FillEmptyTankB201"});
}

TEST_CASE("re-running the pipeline rewrites byte-identical artifacts") {
  TempDir tmp;
  ProjectConfig config = fixture_config();
  config.duration = 600;  // two cycles are enough to compare bytes
  run_pipeline(config, tmp.path("out"));
  std::map<std::string, std::string> first = dir_contents(tmp.path("out"));
  run_pipeline(config, tmp.path("out"));
  std::map<std::string, std::string> second = dir_contents(tmp.path("out"));
  REQUIRE(first.size() == second.size());
  for (const auto& [name, content] : first) {
    REQUIRE(second.count(name) == 1);
    CHECK_MESSAGE(second.at(name) == content, name, " changed between runs");
  }

  // A different seed must change the generated data.
  config.seed = 43;
  run_pipeline(config, tmp.path("out"));
  CHECK(slurp(tmp.path("out/sensor_log.csv")) != first.at("sensor_log.csv"));
}

TEST_CASE("stage errors name the stage that failed") {
  TempDir tmp;

  ProjectConfig config = fixture_config();
  config.reqspec_path = "";
  CHECK(failing_stage([&] { run_pipeline(config, tmp.path("o1")); }) ==
        "requirements");

  config = fixture_config();
  config.project = "some_other_project";
  CHECK(error_contains([&] { run_pipeline(config, tmp.path("o2")); },
                       "stage 'requirements': project name mismatch"));

  config = fixture_config();
  config.odp_dir = tmp.path("no_patterns");
  CHECK(failing_stage([&] { run_pipeline(config, tmp.path("o3")); }) == "design");

  config = fixture_config();
  config.extra_odps.push_back("iec62714");
  CHECK(error_contains([&] { run_pipeline(config, tmp.path("o4")); },
                       "stage 'design': unknown pattern id: iec62714"));

  config = fixture_config();
  config.plant_path = tmp.path("no_plant.cfg");
  CHECK(failing_stage([&] { run_pipeline(config, tmp.path("o5")); }) == "simulate");

  config = fixture_config();
  config.anomalies.push_back("melt:V101:1:0");
  CHECK(failing_stage([&] { run_pipeline(config, tmp.path("o6")); }) == "simulate");
  CHECK(error_contains([&] { run_pipeline(config, tmp.path("o6")); },
                       "unknown kind 'melt'"));

  config = fixture_config();
  config.duration = 0;
  CHECK(error_contains([&] { run_pipeline(config, tmp.path("o7")); },
                       "stage 'simulate': simulation duration is not set"));

  config = fixture_config();
  config.mapping_path = tmp.path("missing.map");
  CHECK(failing_stage([&] { run_pipeline(config, tmp.path("o8")); }) == "build");

  config = fixture_config();
  config.mapping_path = "";
  CHECK(error_contains([&] { run_pipeline(config, tmp.path("o9")); },
                       "stage 'build': no mapping rules configured"));

  config = fixture_config();
  config.shapes_path = "";
  CHECK(error_contains([&] { run_pipeline(config, tmp.path("o10")); },
                       "stage 'validate': no consistency shapes configured"));

  config = fixture_config();
  config.tags_source = "components";  // exists, but holds no tag schema
  CHECK(failing_stage([&] { run_pipeline(config, tmp.path("o11")); }) == "learn");

  config = fixture_config();
  config.detect_log = tmp.path("missing.csv");
  CHECK(failing_stage([&] { run_pipeline(config, tmp.path("o12")); }) == "detect");
}

TEST_CASE("an observation without a timestamp fails validation by one violation") {
  TempDir tmp;

  // Four observations served by a doctored mapping whose time rule skips the
  // row with the empty marker column: obs_1 ends up without a resultTime.
  spit(tmp.path("sensor_ext.csv"),
       "timestamp,tag,value,kind,extra\n"
       "2024-01-01T00:00:00.000Z,V101.open,false,discrete,x\n"
       "2024-01-01T00:00:01.000Z,V101.open,true,discrete,\n"
       "2024-01-01T00:00:02.000Z,P201.on,true,discrete,x\n"
       "2024-01-01T00:00:03.000Z,P201.on,false,discrete,x\n");
  spit(tmp.path("doctored.map"),
       "source tags csv \"" + kFixtures + "/plant/tables/tags.csv\" "
       "columns(tag:text, foi:text, property:text, datatype:text)\n"
       "source sensor_ext csv \"" + tmp.path("sensor_ext.csv") + "\" "
       "columns(timestamp:timestamp, tag:text, value:text, kind:text, extra:text)"
       " streamable\n"
       "\n"
       "rule sensor_declarations from tags static\n"
       "  subject \"ModVA:{tag}\"\n"
       "  type sosa:Sensor\n"
       "  po sosa:observes template \"ModVA:{property}\"\n"
       "\n"
       "rule observations from sensor_ext virtual\n"
       "  subject \"ModVA:obs_{row_id}\"\n"
       "  type sosa:Observation\n"
       "  po sosa:hasSimpleResult column(value) as literal auto\n"
       "  po sosa:hasFeatureOfInterest lookup(tags by tag) template \"ModVA:{foi}\"\n"
       "  po inverse sosa:madeObservation template \"ModVA:{tag}\"\n"
       "\n"
       "rule observation_times from sensor_ext virtual\n"
       "  subject \"ModVA:obs_{row_id}\"\n"
       "  po sosa:resultTime column(timestamp) as literal xsd:dateTime if_set(extra)\n");

  ProjectConfig config = fixture_config();
  config.duration = 30;
  config.mapping_path = tmp.path("doctored.map");
  try {
    run_pipeline(config, tmp.path("out"));
    FAIL("expected a validate-stage failure");
  } catch (const StageError& e) {
    CHECK(e.stage() == "validate");
    CHECK(std::string(e.what()).find("1 constraint violation") !=
          std::string::npos);
    CHECK(std::string(e.what()).find("observation_has_time") != std::string::npos);
  }
}

TEST_CASE("a foreign log with a slow phase is flagged during detection") {
  TempDir tmp;

  // A clogged inlet valve doubles the first fill phase.
  sim::PlantConfig plant =
      sim::load_plant_config_file(kFixtures + "/plant/default.cfg");
  sim::SimResult faulty =
      sim::simulate(plant, 99, 1200, {sim::parse_anomaly("clog:V101:0.5:0")});
  sim::emit_log(faulty.records, tmp.path("faulty.csv"));

  ProjectConfig config = fixture_config();
  config.duration = 1200;
  config.closure = false;
  config.detect_log = tmp.path("faulty.csv");
  RunSummary summary = run_pipeline(config, tmp.path("out"));

  CHECK(summary.report_items >= 1);
  CHECK(summary.closure_added == 0);
  CHECK(!std::filesystem::exists(summary.paths.closure_graph));
  CHECK(slurp(summary.paths.report).find("TimingViolation") != std::string::npos);
}

TEST_CASE("the frontend wires the workflow together with honest exit codes") {
  TempDir tmp;
  std::string output;

  // Whole pipeline through the binary.
  CHECK(run_cli("--out-dir " + tmp.path("out") + " pipeline run --config " +
                    kFixtures + "/project/pipeline.cfg",
                &output) == 0);
  CHECK(output.find("project           mixing_plant_anomaly_detection") !=
        std::string::npos);
  CHECK(output.find("report items      0") != std::string::npos);

  // Usage problems exit with 1.
  CHECK(run_cli("kg bogus", &output) == 1);
  CHECK(run_cli("", &output) == 1);
  CHECK(run_cli("--help", &output) == 0);

  // Operation failures exit with 2.
  CHECK(run_cli("pipeline run --config " + tmp.path("none.cfg"), &output) == 2);
  CHECK(output.find("error:") != std::string::npos);

  // Registry round trip through the binary, reuse matrix included.
  std::string registry = tmp.path("registry.json");
  CHECK(run_cli("registry register --registry " + registry +
                    " --project demo --id story1 --kind UserStory --role EndUser"
                    " --path " + kFixtures + "/project/reqspec.txt",
                &output) == 0);
  CHECK(run_cli("registry register --registry " + registry +
                    " --project demo --id hwo1 --kind HWO --role EndUser --path " +
                    kFixtures + "/project/reqspec.txt",
                &output) == 2);
  CHECK(output.find("may not register") != std::string::npos);
  CHECK(run_cli("registry list --registry " + registry, &output) == 0);
  CHECK(output.find("demo/story1  UserStory  EndUser") != std::string::npos);
  CHECK(run_cli("registry reuse-report --registry " + registry + " --scenario B",
                &output) == 0);
  CHECK(output.find("Mapping Rules                 No") != std::string::npos);
  CHECK(run_cli("registry reuse-report --registry " + registry + " --scenario C",
                &output) == 2);

  // Validation failures surface the violations and exit with 2.
  CHECK(run_cli("kg validate --shapes " + kFixtures + "/shapes/plant.shapes" +
                    " --mapping " + kFixtures + "/mapping/plant.map",
                &output) == 0);
  CHECK(output.find("conforms") != std::string::npos);
}
