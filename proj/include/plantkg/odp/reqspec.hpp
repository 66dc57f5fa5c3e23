#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace plantkg::odp {

// Structured user story; all three narrative fields are required so the
// story stays checkable instead of free prose.
struct UserStory {
  std::string id;
  std::string role;
  std::string goal;
  std::string benefit;
  std::vector<std::string> data_sources;
  std::vector<std::string> acceptance;
  std::string source_path;  // file the story was loaded from; empty for raw text
};

struct CompetencyQuestion {
  std::string id;
  std::string question;
  bool model_derived = false;         // false: answerable directly by a query
  std::vector<std::string> odp_ids;   // at least one
  std::string answer_query;           // query file path; required when direct
};

struct OntologyRequirementSpec {
  std::string project;
  std::vector<UserStory> user_stories;
  std::vector<CompetencyQuestion> cqs;
};

// Story file format (line oriented, '#' comments):
//   story <id>
//   role: <text>           goal: <text>         benefit: <text>
//   data_source: <text>    acceptance: <text>   (repeatable)
UserStory parse_user_story(std::string_view text);
UserStory load_user_story_file(const std::string& path);

// Requirement spec format:
//   project <name>
//   story <relative path to story file>
//   cq <id> ... end   with question:/kind:/odps:/answer_query: lines,
//   kind ∈ {direct, model-derived}.
OntologyRequirementSpec parse_reqspec(std::string_view text,
                                      const std::string& base_dir);
OntologyRequirementSpec load_reqspec_file(const std::string& path);

}  // namespace plantkg::odp
