#include "memcl/schema.hpp"

#include <algorithm>

#include "memcl/error.hpp"
#include "memcl/retrieval.hpp"

namespace memcl {

std::string_view to_string(WorldKind w) {
  return w == WorldKind::cleanplace ? "cleanplace" : "gridfind";
}

std::string_view to_string(Family f) { return f == Family::A ? "A" : "B"; }

WorldKind parse_world(std::string_view s) {
  if (s == "cleanplace") return WorldKind::cleanplace;
  if (s == "gridfind") return WorldKind::gridfind;
  throw Error(ErrorCode::parse_error, "unknown world '" + std::string(s) + "'");
}

Family parse_family(std::string_view s) {
  if (s == "A") return Family::A;
  if (s == "B") return Family::B;
  throw Error(ErrorCode::parse_error, "unknown task family '" + std::string(s) + "'");
}

std::string fill_template(std::string_view tmpl, const Slots& slots) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const std::string name(tmpl.substr(i + 1, close - i - 1));
        if (auto it = slots.find(name); it != slots.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

Insight SkillSchema::generic_insight() const {
  return {"Explore systematically and check every place the goal could be before giving up.",
          "when no specific strategy applies to the task"};
}

const SkillInfo& SkillSchema::skill(std::string_view id) const {
  for (const auto& s : skills)
    if (s.id == id) return s;
  throw Error(ErrorCode::validation_error, "unknown skill '" + std::string(id) + "'");
}

const SkillInfo* SkillSchema::skill_by_verb(std::string_view verb) const {
  for (const auto& s : skills)
    if (s.verb == verb) return &s;
  return nullptr;
}

std::size_t SkillSchema::canonical_index(std::string_view id) const {
  for (std::size_t i = 0; i < skills.size(); ++i)
    if (skills[i].id == id) return i;
  throw Error(ErrorCode::validation_error, "unknown skill '" + std::string(id) + "'");
}

std::vector<std::string> SkillSchema::missing_skills(Family family, double difficulty) const {
  for (const auto& band : bands.at(family))
    if (difficulty < band.upper) return band.missing;
  return bands.at(family).back().missing;
}

Slots SkillSchema::extract_slots(std::string_view instruction,
                                 std::string_view initial_observation) const {
  Slots slots;
  const auto instr = tokenize(instruction);
  const auto obs = tokenize(initial_observation);
  if (world == WorldKind::cleanplace) {
    // "put [a clean] OBJ in TARGET"
    auto in = std::find(instr.begin(), instr.end(), "in");
    if (in != instr.begin() && in != instr.end()) {
      slots["obj"] = *(in - 1);
      if (in + 1 != instr.end()) slots["target"] = *(in + 1);
    }
    return slots;
  }
  // "<verb> the COLOR OBJ"
  auto the = std::find(instr.begin(), instr.end(), "the");
  if (the != instr.end() && the + 1 != instr.end()) {
    slots["color"] = *(the + 1);
    if (the + 2 != instr.end()) slots["obj"] = *(the + 2);
  }
  // "You stand in a LAYOUT at cell X Y facing DIR. ..."
  for (std::size_t i = 0; i + 1 < obs.size(); ++i) {
    if (obs[i] == "a" && i > 0 && obs[i - 1] == "in" && !slots.count("layout"))
      slots["layout"] = obs[i + 1];
    if (obs[i] == "cell" && i + 2 < obs.size()) {
      slots["x"] = obs[i + 1];
      slots["y"] = obs[i + 2];
    }
    if (obs[i] == "facing") slots["dir"] = obs[i + 1];
  }
  return slots;
}

std::vector<std::string> SkillSchema::parse_script(std::string_view raw_value) const {
  std::vector<std::string> script;
  constexpr std::string_view prefix = "[Agent]: ";
  std::size_t pos = 0;
  while (pos <= raw_value.size()) {
    auto end = raw_value.find('\n', pos);
    if (end == std::string_view::npos) end = raw_value.size();
    const auto line = raw_value.substr(pos, end - pos);
    pos = end + 1;
    if (!line.starts_with(prefix)) continue;
    const auto tokens = tokenize(line.substr(prefix.size()));
    if (tokens.empty()) continue;
    const auto* s = skill_by_verb(tokens.front());
    if (s == nullptr) continue;
    if (script.empty() || script.back() != s->id) script.push_back(s->id);
  }
  return script;
}

std::optional<std::string> SkillSchema::skill_missing_in(std::string_view observation) const {
  for (const auto& s : skills)
    if (!s.missing_marker.empty() && observation.find(s.missing_marker) != std::string_view::npos)
      return s.id;
  return std::nullopt;
}

namespace {

SkillSchema make_cleanplace() {
  SkillSchema s;
  s.world = WorldKind::cleanplace;
  s.glue_verbs = {"go"};
  s.extra_marker = "did not call for that";
  s.extra_message = "Nothing happens. The task did not call for that.";
  s.skills = {
      {"locate", "search", "search receptacles one by one",
       "Search receptacles one by one, starting with countertops and tables, until the {obj} "
       "turns up.",
       "Avoid grabbing at a {obj} you have not seen; search receptacles one by one until it "
       "turns up.",
       "when the {obj} is not visible from the starting position", "", "have not seen",
       "Nothing happens. You have not seen a {obj} yet."},
      {"take", "take", "pick it up before moving",
       "As soon as the {obj} is in sight, pick it up before moving anywhere else.",
       "Avoid walking off without the {obj}; pick it up before moving.",
       "after finding the {obj} on a receptacle", "", "are not holding",
       "Nothing happens. You are not holding the {obj}."},
      {"clean_step", "clean", "clean it at the sinkbasin",
       "When the task asks for a clean {obj}, clean it at the sinkbasin before placing it.",
       "Avoid putting the {obj} away dirty; when the task says clean, clean it at the sinkbasin "
       "first.",
       "after picking up a {obj} that must be clean before it goes in the {target}", "clean",
       "still dirty", "The {obj} 1 is still dirty, so the task is not complete."},
      {"place", "put", "carry it straight to the",
       "With the {obj} in hand, carry it straight to the {target} and put it there.",
       "Avoid stopping early; carry it straight to the {target} and put the {obj} in it.",
       "when holding the {obj} and ready to put it in the {target}", "", "is not in the",
       "The {obj} 1 is not in the {target} yet."},
  };
  s.bands[Family::A] = {{0.95, {}}, {1.0, {"locate"}}};
  s.bands[Family::B] = {{0.54, {}}, {0.66, {"locate"}}, {1.0, {"clean_step"}}};
  return s;
}

SkillSchema make_gridfind() {
  SkillSchema s;
  s.world = WorldKind::gridfind;
  s.glue_verbs = {"go"};
  s.extra_marker = "did not call for that";
  s.extra_message = "Nothing happens. The task did not call for that.";
  s.skills = {
      {"navigate", "walk", "walk through the nearest doorway",
       "To reach a goal in another room, walk through the nearest doorway and keep track of the "
       "rooms already visited.",
       "Avoid circling the first room when the goal is elsewhere; walk through the nearest "
       "doorway early.",
       "when you must go to a goal in another room starting from a {layout} at {x} {y} facing {dir}", "",
       "goal is in another room", "You bump into a wall; the goal is in another room."},
      {"scan_rooms", "scan", "scan each room systematically",
       "When the target is out of sight, scan each room systematically before moving on.",
       // Same advice either way: scanning is the fix for both outcomes.
       "When the target is out of sight, scan each room systematically before moving on.",
       "when out of view go to the door and scan from a {layout} at {x} {y} facing {dir}",
       "", "cannot see the", "You cannot see the {color} {obj} from here."},
      {"approach_object", "step", "step toward it directly",
       "Once the target is visible, step toward it directly instead of exploring further.",
       "Avoid stopping at a distance; once the target is visible step toward it directly.",
       "when a goal object is already visible from a {layout} at {x} {y} facing {dir}", "", "out of reach",
       "The {color} {obj} is out of reach."},
      {"pickup", "pickup", "use the pickup action",
       "Stand next to the object and use the pickup action while facing it.",
       "Avoid reaching from afar; stand adjacent and use the pickup action while facing it.",
       "when you must pick up an item starting from a {layout} at {x} {y} facing {dir}", "", "not carrying",
       "You are not carrying the {color} {obj}."},
      {"open_door", "toggle", "toggle the door",
       "Doors open with the toggle action once you face them, so toggle the door rather than "
       "walking into it.",
       "Avoid walking into a closed door; face it and toggle the door.",
       "when a door must be opened starting from a {layout} at {x} {y} facing {dir}", "", "still closed",
       "The {color} door is still closed."},
  };
  s.bands[Family::A] = {{0.70, {}}, {1.0, {"navigate"}}};
  s.bands[Family::B] = {{0.49, {}}, {1.0, {"scan_rooms"}}};
  return s;
}

}  // namespace

const SkillSchema& schema_for(WorldKind world) {
  static const SkillSchema cleanplace = make_cleanplace();
  static const SkillSchema gridfind = make_gridfind();
  return world == WorldKind::cleanplace ? cleanplace : gridfind;
}

}  // namespace memcl
