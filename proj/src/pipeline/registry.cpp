#include "plantkg/pipeline/registry.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "plantkg/error.hpp"

namespace plantkg::pipeline {

namespace {

using nlohmann::ordered_json;

struct KindInfo {
  ArtifactKind kind;
  const char* name;
  const char* label;
};

constexpr KindInfo kKinds[] = {
    {ArtifactKind::UserStory, "UserStory", "User Stories"},
    {ArtifactKind::OntologyReqSpec, "OntologyReqSpec", "Ontology Req. Specification"},
    {ArtifactKind::LightweightODP, "LightweightODP", "Lightweight ODP"},
    {ArtifactKind::LWO, "LWO", "Lightweight Ontology"},
    {ArtifactKind::AlignmentOntology, "AlignmentOntology", "Alignment Ontology"},
    {ArtifactKind::HWO, "HWO", "Heavyweight Ontology"},
    {ArtifactKind::MappingRules, "MappingRules", "Mapping Rules"},
    {ArtifactKind::ExplorationQuery, "ExplorationQuery", "SPARQL Queries (Exploration)"},
    {ArtifactKind::PreparationQuery, "PreparationQuery", "SPARQL Queries (Preparation)"},
    {ArtifactKind::Automaton, "Automaton", "Timed Automaton"},
};

const KindInfo& info(ArtifactKind kind) {
  for (const KindInfo& k : kKinds)
    if (k.kind == kind) return k;
  throw Error("unknown artifact kind value");
}

constexpr std::pair<Role, const char*> kRoles[] = {
    {Role::EndUser, "EndUser"},
    {Role::DomainExpert, "DomainExpert"},
    {Role::OntologyExpert, "OntologyExpert"},
    {Role::DataScientist, "DataScientist"},
};

}  // namespace

std::string kind_name(ArtifactKind kind) { return info(kind).name; }

ArtifactKind kind_from_name(const std::string& name) {
  for (const KindInfo& k : kKinds)
    if (name == k.name) return k.kind;
  throw Error("unknown artifact kind: " + name);
}

std::string kind_label(ArtifactKind kind) { return info(kind).label; }

std::string role_name(Role role) {
  for (const auto& [value, name] : kRoles)
    if (value == role) return name;
  throw Error("unknown role value");
}

Role role_from_name(const std::string& name) {
  for (const auto& [value, role_text] : kRoles)
    if (name == role_text) return value;
  throw Error("unknown role: " + name);
}

bool role_may_create(ArtifactKind kind, Role role) {
  switch (kind) {
    case ArtifactKind::UserStory:
      return role == Role::EndUser;
    case ArtifactKind::OntologyReqSpec:
      // Elicited with the end user, written down with the modeling roles.
      return role == Role::EndUser || role == Role::DomainExpert ||
             role == Role::DataScientist;
    case ArtifactKind::LightweightODP:
    case ArtifactKind::LWO:
      return role == Role::DomainExpert || role == Role::DataScientist;
    case ArtifactKind::AlignmentOntology:
      return role == Role::DomainExpert || role == Role::DataScientist ||
             role == Role::OntologyExpert;
    case ArtifactKind::HWO:
    case ArtifactKind::MappingRules:
      return role == Role::OntologyExpert;
    case ArtifactKind::ExplorationQuery:
    case ArtifactKind::PreparationQuery:
    case ArtifactKind::Automaton:
      return role == Role::DataScientist;
  }
  return false;
}

const ArtifactDescriptor* RegistryIndex::find(const std::string& project,
                                              const std::string& id) const {
  for (const ArtifactDescriptor& entry : entries)
    if (entry.project == project && entry.id == id) return &entry;
  return nullptr;
}

void register_artifact(RegistryIndex& index, const ArtifactDescriptor& descriptor) {
  if (descriptor.project.empty()) throw Error("artifact project is empty");
  if (descriptor.id.empty()) throw Error("artifact id is empty");
  if (!role_may_create(descriptor.kind, descriptor.created_by_role))
    throw Error("role '" + role_name(descriptor.created_by_role) +
                "' may not register artifacts of kind '" +
                kind_name(descriptor.kind) + "'");
  if (!std::filesystem::exists(descriptor.path))
    throw Error("artifact file does not exist: " + descriptor.path);
  if (index.find(descriptor.project, descriptor.id))
    throw Error("artifact '" + descriptor.project + "/" + descriptor.id +
                "' is already registered");
  index.entries.push_back(descriptor);
}

void save_registry(const RegistryIndex& index, const std::string& path) {
  std::vector<const ArtifactDescriptor*> sorted;
  sorted.reserve(index.entries.size());
  for (const ArtifactDescriptor& entry : index.entries) sorted.push_back(&entry);
  std::sort(sorted.begin(), sorted.end(),
            [](const ArtifactDescriptor* a, const ArtifactDescriptor* b) {
              if (a->project != b->project) return a->project < b->project;
              return a->id < b->id;
            });

  ordered_json doc;
  doc["version"] = 1;
  doc["artifacts"] = ordered_json::array();
  for (const ArtifactDescriptor* entry : sorted) {
    ordered_json item;
    item["project"] = entry->project;
    item["id"] = entry->id;
    item["kind"] = kind_name(entry->kind);
    item["path"] = entry->path;
    item["created_by_role"] = role_name(entry->created_by_role);
    if (entry->standard_ref) item["standard_ref"] = *entry->standard_ref;
    item["reusable"] = entry->reusable;
    doc["artifacts"].push_back(std::move(item));
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << doc.dump(2) << '\n';
}

RegistryIndex load_registry(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("registry file " + path + ": " + e.what());
  }
  if (!doc.is_object() || doc.value("version", 0) != 1)
    throw Error("registry file " + path + ": unsupported format");
  if (!doc.contains("artifacts") || !doc["artifacts"].is_array())
    throw Error("registry file " + path + ": missing artifact list");

  RegistryIndex index;
  for (const ordered_json& item : doc["artifacts"]) {
    auto field = [&](const char* key) -> std::string {
      if (!item.contains(key) || !item[key].is_string())
        throw Error("registry file " + path + ": artifact entry lacks '" +
                    std::string(key) + "'");
      return item[key].get<std::string>();
    };
    ArtifactDescriptor entry;
    entry.project = field("project");
    entry.id = field("id");
    entry.kind = kind_from_name(field("kind"));
    entry.path = field("path");
    entry.created_by_role = role_from_name(field("created_by_role"));
    if (item.contains("standard_ref")) entry.standard_ref = field("standard_ref");
    if (!item.contains("reusable") || !item["reusable"].is_boolean())
      throw Error("registry file " + path + ": artifact entry lacks 'reusable'");
    entry.reusable = item["reusable"].get<bool>();

    if (!role_may_create(entry.kind, entry.created_by_role))
      throw Error("registry file " + path + ": artifact '" + entry.project + "/" +
                  entry.id + "' pairs kind '" + kind_name(entry.kind) +
                  "' with role '" + role_name(entry.created_by_role) + "'");
    if (index.find(entry.project, entry.id))
      throw Error("registry file " + path + ": duplicate artifact '" +
                  entry.project + "/" + entry.id + "'");
    index.entries.push_back(std::move(entry));
  }
  return index;
}

std::string render_index(const RegistryIndex& index) {
  std::ostringstream out;
  for (const ArtifactDescriptor& entry : index.entries) {
    out << entry.project << "/" << entry.id << "  " << kind_name(entry.kind)
        << "  " << role_name(entry.created_by_role)
        << (entry.reusable ? "  reusable" : "  project-bound") << "  "
        << entry.path << "\n";
  }
  return out.str();
}

std::string scenario_name(Scenario scenario) {
  return scenario == Scenario::A ? "A" : "B";
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "A") return Scenario::A;
  if (name == "B") return Scenario::B;
  throw Error("unknown scenario: " + name + " (expected A or B)");
}

std::string scenario_label(Scenario scenario) {
  return scenario == Scenario::A ? "New Use Case, same CPPS"
                                 : "Same Use Case, Different CPPS";
}

std::string reuse_name(Reuse reuse) {
  switch (reuse) {
    case Reuse::No: return "No";
    case Reuse::Yes: return "Yes";
    case Reuse::YesWithExtension: return "Yes with extension";
  }
  throw Error("unknown reuse value");
}

ScenarioReport reuse_report(const RegistryIndex& index, Scenario scenario) {
  if (index.entries.empty())
    throw Error("registry is empty; nothing to report on");

  constexpr ArtifactKind kMatrixKinds[] = {
      ArtifactKind::UserStory,        ArtifactKind::OntologyReqSpec,
      ArtifactKind::LWO,              ArtifactKind::AlignmentOntology,
      ArtifactKind::HWO,              ArtifactKind::MappingRules,
      ArtifactKind::ExplorationQuery, ArtifactKind::PreparationQuery,
  };

  ScenarioReport report;
  report.scenario = scenario;
  for (ArtifactKind kind : kMatrixKinds) {
    Reuse verdict;
    if (scenario == Scenario::A) {
      // Same plant, new question: only the stories start over.
      verdict = kind == ArtifactKind::UserStory ? Reuse::No
                                                : Reuse::YesWithExtension;
    } else {
      // Same question, new plant: only the data wiring starts over.
      verdict = kind == ArtifactKind::MappingRules ? Reuse::No : Reuse::Yes;
    }
    report.rows[kind] = verdict;
  }
  return report;
}

std::string render_report(const ScenarioReport& report) {
  std::size_t width = 0;
  for (const auto& [kind, verdict] : report.rows)
    width = std::max(width, kind_label(kind).size());

  std::ostringstream out;
  out << "Reusability for scenario " << scenario_name(report.scenario) << " ("
      << scenario_label(report.scenario) << ")\n";
  for (const auto& [kind, verdict] : report.rows) {
    std::string label = kind_label(kind);
    out << "  " << label << std::string(width - label.size() + 2, ' ')
        << reuse_name(verdict) << "\n";
  }
  return out.str();
}

}  // namespace plantkg::pipeline
