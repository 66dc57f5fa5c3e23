#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace plantkg::pipeline {

// ---------------------------------------------------------------------------
// Artifact registry
//
// Every ontological artifact a project produces — user stories, requirement
// specs, design patterns, ontologies, mapping rules, queries, learned models —
// is recorded here so follow-up projects can check what already exists before
// modeling anything new.  Entries are descriptive metadata only; the files
// themselves live wherever their path points.
// ---------------------------------------------------------------------------

// Kinds in workflow order: elicitation, design, integration, analysis.
enum class ArtifactKind {
  UserStory,
  OntologyReqSpec,
  LightweightODP,
  LWO,
  AlignmentOntology,
  HWO,
  MappingRules,
  ExplorationQuery,
  PreparationQuery,
  Automaton,
};

// The four workflow roles.  Roles are metadata on artifacts, not accounts;
// the registry documents who is responsible for a kind of artifact.
enum class Role { EndUser, DomainExpert, OntologyExpert, DataScientist };

// Machine names ("HWO", "DataScientist") used in files and on the CLI.
std::string kind_name(ArtifactKind kind);
ArtifactKind kind_from_name(const std::string& name);
std::string role_name(Role role);
Role role_from_name(const std::string& name);

// Human label used in reports ("Heavyweight Ontology", "User Stories").
std::string kind_label(ArtifactKind kind);

// True when the workflow puts `role` in a developing position for `kind`:
// stories come from end users, heavyweight ontologies and mapping rules from
// ontology experts, queries and learned models from data scientists, and the
// modeling artifacts in between from domain experts and data scientists.
bool role_may_create(ArtifactKind kind, Role role);

struct ArtifactDescriptor {
  std::string project;
  std::string id;
  ArtifactKind kind = ArtifactKind::UserStory;
  std::string path;
  Role created_by_role = Role::EndUser;
  std::optional<std::string> standard_ref;  // industry standard it is based on
  bool reusable = false;
};

// Flat artifact index across projects; (project, id) identifies an entry.
struct RegistryIndex {
  std::vector<ArtifactDescriptor> entries;

  const ArtifactDescriptor* find(const std::string& project,
                                 const std::string& id) const;
};

// Validates the descriptor — the role must be allowed to create the kind,
// the file must exist, and the (project, id) key must be fresh — and appends
// it to the index.
void register_artifact(RegistryIndex& index, const ArtifactDescriptor& descriptor);

// JSON round trip.  Saving sorts entries by (project, id) so the file is
// byte-stable; loading re-validates kind/role pairing and key uniqueness but
// not file existence (the registry may describe files on another machine).
void save_registry(const RegistryIndex& index, const std::string& path);
RegistryIndex load_registry(const std::string& path);

// One line per entry: key, kind, role, reuse marker, path.
std::string render_index(const RegistryIndex& index);

// The two follow-up situations the reuse matrix covers.
enum class Scenario {
  A,  // new use case on the same plant
  B,  // same use case on a different but structurally similar plant
};

std::string scenario_name(Scenario scenario);       // "A" | "B"
Scenario scenario_from_name(const std::string& name);
std::string scenario_label(Scenario scenario);      // column heading text

// Reuse verdict for one artifact kind under one scenario.
enum class Reuse { No, Yes, YesWithExtension };
std::string reuse_name(Reuse reuse);  // "No" | "Yes" | "Yes with extension"

// The reuse matrix restricted to one scenario: a verdict for each of the
// eight artifact kinds that carry over between projects.  Individual design
// patterns are folded into the lightweight-ontology row, and learned models
// are always rebuilt from fresh data, so neither gets a row of its own.
struct ScenarioReport {
  Scenario scenario = Scenario::A;
  std::map<ArtifactKind, Reuse> rows;
};

// Reuse prospects of the indexed artifacts under the scenario.  On the same
// plant (A) everything except the user stories carries over with extensions;
// on a different plant (B) everything carries over unchanged except the
// mapping rules, which are specific to each system's data sources.
ScenarioReport reuse_report(const RegistryIndex& index, Scenario scenario);

// Fixed-width text table of one report.
std::string render_report(const ScenarioReport& report);

}  // namespace plantkg::pipeline
