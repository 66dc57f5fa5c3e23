#include "plantkg/odp/reqspec.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "plantkg/error.hpp"
#include "plantkg/odp/odp.hpp"
#include "plantkg/util/strings.hpp"

namespace plantkg::odp {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void set_once(std::string& slot, const std::string& value, const std::string& key,
              int line_no) {
  if (!slot.empty()) throw ParseError("duplicate " + key + " field", line_no);
  slot = value;
}

// Splits "key: value" with both sides trimmed; the value must be non-empty.
std::pair<std::string, std::string> split_field(const std::string& line, int line_no) {
  auto colon = line.find(':');
  if (colon == std::string::npos)
    throw ParseError("expected '<field>: <text>', got '" + line + "'", line_no);
  std::string key = util::trim(line.substr(0, colon));
  std::string value = util::trim(line.substr(colon + 1));
  if (value.empty()) throw ParseError(key + " text is empty", line_no);
  return {key, value};
}

bool known_odp(const std::string& id) {
  const auto& ids = bundled_odp_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

}  // namespace

UserStory parse_user_story(std::string_view text) {
  UserStory story;
  bool seen_header = false;
  int line_no = 0;
  for (const std::string& raw : util::split(text, '\n')) {
    ++line_no;
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      if (!util::starts_with(line, "story "))
        throw ParseError("expected 'story <id>'", line_no);
      story.id = util::trim(line.substr(6));
      if (story.id.empty()) throw ParseError("story id is empty", line_no);
      seen_header = true;
      continue;
    }
    auto [key, value] = split_field(line, line_no);
    if (key == "role") {
      set_once(story.role, value, key, line_no);
    } else if (key == "goal") {
      set_once(story.goal, value, key, line_no);
    } else if (key == "benefit") {
      set_once(story.benefit, value, key, line_no);
    } else if (key == "data_source") {
      story.data_sources.push_back(value);
    } else if (key == "acceptance") {
      story.acceptance.push_back(value);
    } else {
      throw ParseError("unknown story field '" + key + "'", line_no);
    }
  }
  if (!seen_header) throw Error("story file has no 'story <id>' line");
  if (story.role.empty()) throw Error("story " + story.id + " has no role");
  if (story.goal.empty()) throw Error("story " + story.id + " has no goal");
  if (story.benefit.empty()) throw Error("story " + story.id + " has no benefit");
  return story;
}

UserStory load_user_story_file(const std::string& path) {
  return parse_user_story(read_file(path));
}

OntologyRequirementSpec parse_reqspec(std::string_view text,
                                      const std::string& base_dir) {
  OntologyRequirementSpec spec;
  auto resolve = [&](const std::string& rel) {
    if (base_dir.empty() || (!rel.empty() && rel.front() == '/')) return rel;
    return base_dir + "/" + rel;
  };

  std::optional<CompetencyQuestion> open_cq;
  bool kind_seen = false;
  int line_no = 0;
  for (const std::string& raw : util::split(text, '\n')) {
    ++line_no;
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (open_cq) {
      if (line == "end") {
        if (open_cq->question.empty())
          throw ParseError("cq " + open_cq->id + " has no question", line_no);
        if (!kind_seen)
          throw ParseError("cq " + open_cq->id + " has no kind", line_no);
        if (open_cq->odp_ids.empty())
          throw ParseError("cq " + open_cq->id + " names no patterns", line_no);
        if (!open_cq->model_derived && open_cq->answer_query.empty())
          throw ParseError("cq " + open_cq->id + " is direct but has no answer_query",
                           line_no);
        if (open_cq->model_derived && !open_cq->answer_query.empty())
          throw ParseError("cq " + open_cq->id +
                               " is model-derived and cannot have an answer_query",
                           line_no);
        spec.cqs.push_back(std::move(*open_cq));
        open_cq.reset();
        continue;
      }
      auto [key, value] = split_field(line, line_no);
      if (key == "question") {
        set_once(open_cq->question, value, key, line_no);
      } else if (key == "kind") {
        if (kind_seen) throw ParseError("duplicate kind field", line_no);
        if (value == "direct") {
          open_cq->model_derived = false;
        } else if (value == "model-derived") {
          open_cq->model_derived = true;
        } else {
          throw ParseError("kind must be 'direct' or 'model-derived'", line_no);
        }
        kind_seen = true;
      } else if (key == "odps") {
        if (!open_cq->odp_ids.empty()) throw ParseError("duplicate odps field", line_no);
        for (const std::string& part : util::split(value, ',')) {
          std::string id = util::trim(part);
          if (id.empty()) throw ParseError("empty pattern id in odps list", line_no);
          if (!known_odp(id)) throw ParseError("unknown pattern id: " + id, line_no);
          open_cq->odp_ids.push_back(id);
        }
      } else if (key == "answer_query") {
        set_once(open_cq->answer_query, resolve(value), key, line_no);
      } else {
        throw ParseError("unknown cq field '" + key + "'", line_no);
      }
      continue;
    }

    if (util::starts_with(line, "project ")) {
      set_once(spec.project, util::trim(line.substr(8)), "project", line_no);
    } else if (util::starts_with(line, "story ")) {
      std::string story_path = resolve(util::trim(line.substr(6)));
      UserStory story = load_user_story_file(story_path);
      story.source_path = story_path;
      for (const UserStory& existing : spec.user_stories)
        if (existing.id == story.id)
          throw ParseError("duplicate story id: " + story.id, line_no);
      spec.user_stories.push_back(std::move(story));
    } else if (util::starts_with(line, "cq ")) {
      CompetencyQuestion cq;
      cq.id = util::trim(line.substr(3));
      if (cq.id.empty()) throw ParseError("cq id is empty", line_no);
      for (const CompetencyQuestion& existing : spec.cqs)
        if (existing.id == cq.id)
          throw ParseError("duplicate cq id: " + cq.id, line_no);
      open_cq = std::move(cq);
      kind_seen = false;
    } else {
      throw ParseError("unexpected line '" + line + "'", line_no);
    }
  }
  if (open_cq) throw Error("cq " + open_cq->id + " is missing 'end'");
  if (spec.project.empty()) throw Error("requirement spec has no project line");
  if (spec.user_stories.empty()) throw Error("requirement spec has no user stories");
  if (spec.cqs.empty()) throw Error("requirement spec has no competency questions");
  return spec;
}

OntologyRequirementSpec load_reqspec_file(const std::string& path) {
  std::string base_dir = std::filesystem::path(path).parent_path().string();
  return parse_reqspec(read_file(path), base_dir);
}

}  // namespace plantkg::odp
