#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "plantkg/error.hpp"
#include "plantkg/pipeline/registry.hpp"

using namespace plantkg;
using namespace plantkg::pipeline;

namespace {

const std::string kFixtures = PLANTKG_FIXTURE_DIR;

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() / "plantkg_registry_test";
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

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::vector<ArtifactKind> kAllKinds = {
    ArtifactKind::UserStory,        ArtifactKind::OntologyReqSpec,
    ArtifactKind::LightweightODP,   ArtifactKind::LWO,
    ArtifactKind::AlignmentOntology, ArtifactKind::HWO,
    ArtifactKind::MappingRules,     ArtifactKind::ExplorationQuery,
    ArtifactKind::PreparationQuery, ArtifactKind::Automaton,
};

const std::vector<Role> kAllRoles = {Role::EndUser, Role::DomainExpert,
                                     Role::OntologyExpert, Role::DataScientist};

// A descriptor that passes registration; the path points at a fixture file
// that certainly exists.
ArtifactDescriptor sample(const std::string& project, const std::string& id,
                          ArtifactKind kind, Role role) {
  ArtifactDescriptor d;
  d.project = project;
  d.id = id;
  d.kind = kind;
  d.path = kFixtures + "/project/reqspec.txt";
  d.created_by_role = role;
  d.reusable = true;
  return d;
}

// Any role the kind accepts (each kind has at least one).
Role some_creator(ArtifactKind kind) {
  for (Role role : kAllRoles)
    if (role_may_create(kind, role)) return role;
  FAIL("kind accepts no role at all");
  return Role::EndUser;
}

// An index holding one artifact of every kind.
RegistryIndex populated_index() {
  RegistryIndex index;
  int n = 0;
  for (ArtifactKind kind : kAllKinds)
    register_artifact(index, sample("base", "a" + std::to_string(n++), kind,
                                    some_creator(kind)));
  return index;
}

}  // namespace

TEST_CASE("kind and role names round-trip and reject unknowns") {
  for (ArtifactKind kind : kAllKinds) CHECK(kind_from_name(kind_name(kind)) == kind);
  for (Role role : kAllRoles) CHECK(role_from_name(role_name(role)) == role);
  CHECK(kind_name(ArtifactKind::HWO) == "HWO");
  CHECK(kind_name(ArtifactKind::OntologyReqSpec) == "OntologyReqSpec");
  CHECK(role_name(Role::DataScientist) == "DataScientist");
  CHECK(error_contains([] { kind_from_name("Widget"); }, "unknown artifact kind"));
  CHECK(error_contains([] { role_from_name("Intern"); }, "unknown role"));
  CHECK(error_contains([] { scenario_from_name("C"); }, "unknown scenario"));
  CHECK(scenario_from_name("A") == Scenario::A);
  CHECK(scenario_from_name("B") == Scenario::B);
}

TEST_CASE("the kind/role matrix follows the workflow responsibilities") {
  using K = ArtifactKind;
  using R = Role;
  // kind -> exactly the roles in a developing position for it.
  const std::map<K, std::set<R>> expected = {
      {K::UserStory, {R::EndUser}},
      {K::OntologyReqSpec, {R::EndUser, R::DomainExpert, R::DataScientist}},
      {K::LightweightODP, {R::DomainExpert, R::DataScientist}},
      {K::LWO, {R::DomainExpert, R::DataScientist}},
      {K::AlignmentOntology, {R::DomainExpert, R::DataScientist, R::OntologyExpert}},
      {K::HWO, {R::OntologyExpert}},
      {K::MappingRules, {R::OntologyExpert}},
      {K::ExplorationQuery, {R::DataScientist}},
      {K::PreparationQuery, {R::DataScientist}},
      {K::Automaton, {R::DataScientist}},
  };
  for (const auto& [kind, roles] : expected)
    for (Role role : kAllRoles)
      CHECK(role_may_create(kind, role) == (roles.count(role) > 0));
}

TEST_CASE("registration accepts valid artifacts and rejects the rest") {
  RegistryIndex index;
  register_artifact(index, sample("p", "story1", ArtifactKind::UserStory,
                                  Role::EndUser));
  CHECK(index.entries.size() == 1);
  CHECK(index.find("p", "story1") != nullptr);
  CHECK(index.find("p", "other") == nullptr);
  CHECK(index.find("q", "story1") == nullptr);

  // The heavyweight ontology is the ontology expert's deliverable.
  CHECK(error_contains(
      [&] {
        register_artifact(index, sample("p", "hwo1", ArtifactKind::HWO,
                                        Role::EndUser));
      },
      "role 'EndUser' may not register artifacts of kind 'HWO'"));

  // Same key twice.
  CHECK(error_contains(
      [&] {
        register_artifact(index, sample("p", "story1", ArtifactKind::UserStory,
                                        Role::EndUser));
      },
      "already registered"));

  // Same id under another project is a different key.
  register_artifact(index, sample("q", "story1", ArtifactKind::UserStory,
                                  Role::EndUser));
  CHECK(index.entries.size() == 2);

  ArtifactDescriptor ghost = sample("p", "ghost", ArtifactKind::UserStory,
                                    Role::EndUser);
  ghost.path = kFixtures + "/does_not_exist.txt";
  CHECK(error_contains([&] { register_artifact(index, ghost); },
                       "does not exist"));

  ArtifactDescriptor blank = sample("", "x", ArtifactKind::UserStory, Role::EndUser);
  CHECK(error_contains([&] { register_artifact(index, blank); },
                       "project is empty"));
  blank = sample("p", "", ArtifactKind::UserStory, Role::EndUser);
  CHECK(error_contains([&] { register_artifact(index, blank); }, "id is empty"));
}

TEST_CASE("registry files round-trip losslessly and are byte-stable") {
  TempDir tmp;
  RegistryIndex index;
  ArtifactDescriptor with_ref = sample("p", "odp1", ArtifactKind::LightweightODP,
                                       Role::DomainExpert);
  with_ref.standard_ref = "VDI 3682";
  register_artifact(index, with_ref);
  ArtifactDescriptor plain = sample("p", "auto1", ArtifactKind::Automaton,
                                    Role::DataScientist);
  plain.reusable = false;
  register_artifact(index, plain);
  // Registered out of key order on purpose; saving sorts.
  register_artifact(index, sample("a_first", "z", ArtifactKind::UserStory,
                                  Role::EndUser));

  std::string file = tmp.path("registry.json");
  save_registry(index, file);
  RegistryIndex loaded = load_registry(file);
  REQUIRE(loaded.entries.size() == 3);

  // Same set of entries, field for field.
  for (const ArtifactDescriptor& original : index.entries) {
    const ArtifactDescriptor* copy = loaded.find(original.project, original.id);
    REQUIRE(copy != nullptr);
    CHECK(copy->kind == original.kind);
    CHECK(copy->path == original.path);
    CHECK(copy->created_by_role == original.created_by_role);
    CHECK(copy->standard_ref == original.standard_ref);
    CHECK(copy->reusable == original.reusable);
  }

  // Sorted on save: the "a_first" project leads the file.
  CHECK(loaded.entries[0].project == "a_first");

  // Saving the loaded index reproduces the file byte for byte.
  std::string again = tmp.path("again.json");
  save_registry(loaded, again);
  CHECK(slurp(file) == slurp(again));
}

TEST_CASE("malformed registry files are rejected with an explanation") {
  TempDir tmp;
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(tmp.path(name), std::ios::binary);
    out << content;
    return tmp.path(name);
  };

  CHECK(error_contains([&] { load_registry(tmp.path("missing.json")); },
                       "cannot open"));
  CHECK(error_contains([&] { load_registry(write("bad.json", "{ nope")); },
                       "bad.json"));
  CHECK(error_contains(
      [&] { load_registry(write("v9.json", R"({"version":9,"artifacts":[]})")); },
      "unsupported format"));
  CHECK(error_contains(
      [&] { load_registry(write("noart.json", R"({"version":1})")); },
      "missing artifact list"));

  const std::string entry_prefix =
      R"({"version":1,"artifacts":[{"project":"p","id":"x","kind":)";
  CHECK(error_contains(
      [&] {
        load_registry(write("kind.json",
                            entry_prefix +
                                R"("Widget","path":"f","created_by_role":"EndUser","reusable":true}]})"));
      },
      "unknown artifact kind"));
  CHECK(error_contains(
      [&] {
        load_registry(write("pair.json",
                            entry_prefix +
                                R"("HWO","path":"f","created_by_role":"EndUser","reusable":true}]})"));
      },
      "pairs kind 'HWO' with role 'EndUser'"));
  CHECK(error_contains(
      [&] {
        load_registry(write("nopath.json",
                            entry_prefix +
                                R"("UserStory","created_by_role":"EndUser","reusable":true}]})"));
      },
      "lacks 'path'"));
  CHECK(error_contains(
      [&] {
        load_registry(write(
            "dupe.json",
            R"({"version":1,"artifacts":[)" +
                std::string(
                    R"({"project":"p","id":"x","kind":"UserStory","path":"f","created_by_role":"EndUser","reusable":true},)") +
                R"({"project":"p","id":"x","kind":"UserStory","path":"f","created_by_role":"EndUser","reusable":true}]})"));
      },
      "duplicate artifact 'p/x'"));
}

TEST_CASE("reuse prospects depend only on the scenario") {
  RegistryIndex index = populated_index();

  ScenarioReport a = reuse_report(index, Scenario::A);
  ScenarioReport b = reuse_report(index, Scenario::B);

  const std::vector<ArtifactKind> matrix_kinds = {
      ArtifactKind::UserStory,        ArtifactKind::OntologyReqSpec,
      ArtifactKind::LWO,              ArtifactKind::AlignmentOntology,
      ArtifactKind::HWO,              ArtifactKind::MappingRules,
      ArtifactKind::ExplorationQuery, ArtifactKind::PreparationQuery,
  };
  REQUIRE(a.rows.size() == 8);
  REQUIRE(b.rows.size() == 8);
  for (ArtifactKind kind : matrix_kinds) {
    REQUIRE(a.rows.count(kind) == 1);
    REQUIRE(b.rows.count(kind) == 1);
  }

  // On the same plant only the stories start over; everything else extends.
  for (ArtifactKind kind : matrix_kinds) {
    Reuse expected = kind == ArtifactKind::UserStory ? Reuse::No
                                                     : Reuse::YesWithExtension;
    CHECK(a.rows.at(kind) == expected);
  }
  // On a new plant only the data wiring starts over.
  for (ArtifactKind kind : matrix_kinds) {
    Reuse expected = kind == ArtifactKind::MappingRules ? Reuse::No : Reuse::Yes;
    CHECK(b.rows.at(kind) == expected);
  }

  CHECK(error_contains([] { reuse_report(RegistryIndex{}, Scenario::A); },
                       "registry is empty"));
}

TEST_CASE("the rendered reuse matrix is stable") {
  RegistryIndex index = populated_index();
  CHECK(render_report(reuse_report(index, Scenario::A)) ==
        "Reusability for scenario A (New Use Case, same CPPS)\n"
        "  User Stories                  No\n"
        "  Ontology Req. Specification   Yes with extension\n"
        "  Lightweight Ontology          Yes with extension\n"
        "  Alignment Ontology            Yes with extension\n"
        "  Heavyweight Ontology          Yes with extension\n"
        "  Mapping Rules                 Yes with extension\n"
        "  SPARQL Queries (Exploration)  Yes with extension\n"
        "  SPARQL Queries (Preparation)  Yes with extension\n");
  CHECK(render_report(reuse_report(index, Scenario::B)) ==
        "Reusability for scenario B (Same Use Case, Different CPPS)\n"
        "  User Stories                  Yes\n"
        "  Ontology Req. Specification   Yes\n"
        "  Lightweight Ontology          Yes\n"
        "  Alignment Ontology            Yes\n"
        "  Heavyweight Ontology          Yes\n"
        "  Mapping Rules                 No\n"
        "  SPARQL Queries (Exploration)  Yes\n"
        "  SPARQL Queries (Preparation)  Yes\n");
}

TEST_CASE("the index listing names every entry on its own line") {
  RegistryIndex index;
  register_artifact(index, sample("p", "s1", ArtifactKind::UserStory, Role::EndUser));
  ArtifactDescriptor bound = sample("p", "m1", ArtifactKind::MappingRules,
                                    Role::OntologyExpert);
  bound.reusable = false;
  register_artifact(index, bound);
  std::string listing = render_index(index);
  CHECK(listing.find("p/s1  UserStory  EndUser  reusable") != std::string::npos);
  CHECK(listing.find("p/m1  MappingRules  OntologyExpert  project-bound") !=
        std::string::npos);
}
