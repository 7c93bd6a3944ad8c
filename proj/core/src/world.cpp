#include "memcl/world.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>

#include "json.hpp"
#include "memcl/error.hpp"
#include "memcl/rng.hpp"

namespace memcl {

namespace {

constexpr std::array kObjects = {"apple", "bowl",  "cup",    "mug",     "plate",  "pan",   "pot",
                                 "spoon", "knife", "fork",   "lettuce", "tomato", "potato", "egg",
                                 "ladle", "kettle", "cloth", "sponge", "spatula", "glass"};
constexpr std::array kTargets = {"fridge", "microwave", "garbagecan", "safe",  "cart",
                                 "bathtubbasin", "armchair", "bed",   "dresser", "desk"};
constexpr std::array kLocations = {"cabinet", "countertop", "diningtable", "drawer",
                                   "shelf",   "sidetable",  "stoveburner", "coffeetable"};
constexpr std::array kDistractors = {"saltshaker", "peppershaker", "creditcard", "keychain",
                                     "newspaper",  "remotecontrol"};

constexpr std::array kColors = {"red", "green", "blue", "purple", "yellow", "grey"};
constexpr std::array kGridObjects = {"ball", "box", "key"};
constexpr std::array kLayouts = {"corridor", "junction", "corner", "hall", "alcove", "chamber"};
constexpr std::array kDirections = {"north", "south", "east", "west"};

template <class Array>
std::string pick(std::mt19937_64& rng, const Array& values) {
  return values[rng() % values.size()];
}

double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

std::vector<std::string> required_for(WorldKind world, Family family, int subtask) {
  if (world == WorldKind::cleanplace) {
    if (family == Family::A) return {"locate", "take", "place"};
    return {"locate", "take", "clean_step", "place"};
  }
  if (family == Family::B) return {"scan_rooms", "approach_object"};
  switch (subtask) {
    case 0: return {"navigate", "approach_object"};
    case 1: return {"navigate", "approach_object", "pickup"};
    default: return {"navigate", "open_door"};
  }
}

TaskInstance make_cleanplace(Family family, std::mt19937_64& rng) {
  TaskInstance t;
  const auto obj = pick(rng, kObjects);
  const auto target = pick(rng, kTargets);
  std::vector<std::string> locs(kLocations.begin(), kLocations.end());
  shuffle_in_place(locs, rng);
  const int visits = 1 + static_cast<int>(rng() % 4);
  t.search_path.assign(locs.begin(), locs.begin() + visits);
  t.instruction = family == Family::A ? "put " + obj + " in " + target
                                      : "put a clean " + obj + " in " + target;
  std::string obs = "You are in the middle of a room. Looking around you, you see ";
  std::vector<std::string> visible(kLocations.begin(), kLocations.end());
  visible.push_back("sinkbasin");
  visible.push_back(target);
  shuffle_in_place(visible, rng);
  for (std::size_t i = 0; i < visible.size(); ++i) {
    if (i + 1 == visible.size()) obs += "and ";
    obs += "a " + visible[i] + " 1";
    obs += i + 1 == visible.size() ? "." : ", ";
  }
  t.initial_observation = obs;
  t.slots = {{"obj", obj}, {"target", target}};
  return t;
}

TaskInstance make_gridfind(Family family, int subtask, std::mt19937_64& rng) {
  TaskInstance t;
  const auto color = pick(rng, kColors);
  const auto obj = pick(rng, kGridObjects);
  const auto layout = pick(rng, kLayouts);
  const auto x = std::to_string(rng() % 8);
  const auto y = std::to_string(rng() % 8);
  const auto dir = pick(rng, kDirections);
  const int rooms = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < rooms; ++i) t.doorways.push_back(pick(rng, kColors));
  t.scans = 2 + static_cast<int>(rng() % 4);
  t.approach = 1 + static_cast<int>(rng() % 3);
  if (family == Family::B) {
    t.instruction = "find the " + color + " " + obj;
    t.slots = {{"color", color}, {"obj", obj}};
  } else if (subtask == 0) {
    t.instruction = "go to the " + color + " " + obj;
    t.slots = {{"color", color}, {"obj", obj}};
  } else if (subtask == 1) {
    t.instruction = "pick up the " + color + " " + obj;
    t.slots = {{"color", color}, {"obj", obj}};
  } else {
    t.instruction = "open the " + color + " door";
    t.slots = {{"color", color}, {"obj", "door"}};
  }
  t.initial_observation = "You stand in a " + layout + " at cell " + x + " " + y + " facing " +
                          dir + ". A " + t.doorways.front() + " door is ahead.";
  t.slots["layout"] = layout;
  t.slots["x"] = x;
  t.slots["y"] = y;
  t.slots["dir"] = dir;
  return t;
}

std::vector<TraceLine> expand_skill(const TaskInstance& t, const std::string& skill,
                                    std::mt19937_64& rng) {
  std::vector<TraceLine> lines;
  const auto slot = [&](const char* name) {
    auto it = t.slots.find(name);
    return it == t.slots.end() ? std::string() : it->second;
  };
  const auto obj = slot("obj");
  if (t.world == WorldKind::cleanplace) {
    if (skill == "locate") {
      for (std::size_t i = 0; i < t.search_path.size(); ++i) {
        const auto& loc = t.search_path[i];
        std::string obs = "On the " + loc + " 1, you see ";
        if (i + 1 == t.search_path.size())
          obs += "a " + obj + " 1.";
        else
          obs += rng() % 2 ? "nothing." : "a " + pick(rng, kDistractors) + " 1.";
        lines.push_back({"search " + loc + " 1", obs});
      }
    } else if (skill == "take") {
      const auto& loc = t.search_path.back();
      lines.push_back({"take " + obj + " 1 from " + loc + " 1",
                       "You pick up the " + obj + " 1 from the " + loc + " 1."});
    } else if (skill == "clean_step") {
      lines.push_back({"go to sinkbasin 1", "You arrive at sinkbasin 1."});
      lines.push_back({"clean " + obj + " 1 with sinkbasin 1",
                       "You clean the " + obj + " 1 using the sinkbasin 1."});
    } else if (skill == "place") {
      const auto target = slot("target");
      lines.push_back({"go to " + target + " 1", "You arrive at " + target + " 1."});
      lines.push_back({"put " + obj + " 1 in " + target + " 1",
                       "You put the " + obj + " 1 in the " + target + " 1."});
    }
    return lines;
  }
  const auto color = slot("color");
  const auto target = color + " " + obj;
  if (skill == "navigate") {
    for (const auto& door : t.doorways) {
      lines.push_back({"walk through the " + door + " doorway",
                       rng() % 2 ? "You enter a new room." : "You enter a room with a closed door."});
    }
  } else if (skill == "scan_rooms") {
    for (int i = 1; i <= t.scans; ++i) {
      lines.push_back({"scan room " + std::to_string(i),
                       i == t.scans ? "You spot the " + target + "." : "Nothing of interest here."});
    }
  } else if (skill == "approach_object") {
    for (int j = 1; j <= t.approach; ++j) {
      lines.push_back({"step toward the " + target,
                       j == t.approach ? "You are next to the " + target + "."
                                       : "The " + target + " is " +
                                             std::to_string(t.approach - j) + " tiles ahead."});
    }
  } else if (skill == "pickup") {
    lines.push_back({"pickup the " + target, "You are carrying the " + target + "."});
  } else if (skill == "open_door") {
    lines.push_back({"go to the " + color + " door", "You face the " + color + " door."});
    lines.push_back({"toggle the " + color + " door", "The " + color + " door swings open."});
  }
  return lines;
}

// First non-glue action of a skill, used when the agent attempts it out of turn.
std::string main_action(const TaskInstance& t, const std::string& skill) {
  std::mt19937_64 scratch(0);
  const auto& schema = schema_for(t.world);
  for (const auto& line : expand_skill(t, skill, scratch)) {
    const auto tokens = tokenize(line.action);
    if (!tokens.empty() && schema.skill_by_verb(tokens.front()) != nullptr) return line.action;
  }
  return skill;
}

std::vector<std::string> reconcile(std::vector<std::string> plan, const AgentState& state,
                                   const TaskInstance& instance) {
  const auto& schema = schema_for(instance.world);
  const auto instr = tokenize(instance.instruction);
  for (const auto& s : schema.skills) {
    if (s.cue.empty() || !state.known_skills.count(s.id)) continue;
    const bool cued = std::find(instr.begin(), instr.end(), s.cue) != instr.end();
    auto it = std::find(plan.begin(), plan.end(), s.id);
    if (cued && it == plan.end()) {
      const auto idx = schema.canonical_index(s.id);
      auto pos = std::find_if(plan.begin(), plan.end(), [&](const std::string& p) {
        return schema.canonical_index(p) > idx;
      });
      plan.insert(pos, s.id);
    } else if (!cued && it != plan.end()) {
      plan.erase(it);
    }
  }
  return plan;
}

std::vector<std::string> compute_plan(const AgentState& state, const TaskInstance& instance) {
  if (state.override_script) return reconcile(*state.override_script, state, instance);
  return own_plan(state, instance);
}

}  // namespace

std::vector<TaskInstance> generate_tasks(WorldKind world, Family family, int n,
                                         std::uint64_t seed, std::string_view split) {
  if (n < 1) throw Error(ErrorCode::validation_error, "generate_tasks requires n >= 1");
  std::mt19937_64 rng(mix_seed(seed, {to_string(world), to_string(family), split}));
  std::vector<int> grid(static_cast<std::size_t>(n));
  std::iota(grid.begin(), grid.end(), 0);
  shuffle_in_place(grid, rng);
  std::vector<int> subtasks(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) subtasks[static_cast<std::size_t>(i)] = i % 3;
  shuffle_in_place(subtasks, rng);

  std::vector<TaskInstance> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double difficulty = (grid[ui] + unit_interval(rng)) / n;
    TaskInstance t = world == WorldKind::cleanplace ? make_cleanplace(family, rng)
                                                    : make_gridfind(family, subtasks[ui], rng);
    char id[96];
    std::snprintf(id, sizeof id, "%s-%s-%.*s-%04d", std::string(to_string(world)).c_str(),
                  std::string(to_string(family)).c_str(), static_cast<int>(split.size()),
                  split.data(), i);
    t.id = id;
    t.world = world;
    t.family = family;
    t.difficulty = difficulty;
    t.required_skills = required_for(world, family, subtasks[ui]);
    out.push_back(std::move(t));
  }
  return out;
}

AgentState initial_state(const TaskInstance& instance) {
  const auto& schema = schema_for(instance.world);
  AgentState state;
  for (const auto& s : schema.skills) state.known_skills.insert(s.id);
  for (const auto& m : schema.missing_skills(instance.family, instance.difficulty))
    state.known_skills.erase(m);
  state.plan = own_plan(state, instance);
  return state;
}

std::vector<std::string> own_plan(const AgentState& state, const TaskInstance& instance) {
  std::vector<std::string> plan;
  for (const auto& s : instance.required_skills)
    if (state.known_skills.count(s)) plan.push_back(s);
  return plan;
}

double jaccard(std::string_view a, std::string_view b) {
  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

AgentState apply_guidance(AgentState state, const std::vector<const MemoryUnit*>& retrieved,
                          const TaskInstance& instance, double overlap_threshold) {
  if (retrieved.empty()) return state;
  const auto& schema = schema_for(instance.world);
  bool overridden = false;
  for (const auto* unit : retrieved) {
    if (unit->kind == UnitKind::raw_trajectory) {
      if (overridden) continue;
      const auto nl = unit->key_text.find('\n');
      const auto source_instruction = std::string_view(unit->key_text).substr(0, nl);
      if (jaccard(source_instruction, instance.instruction) < overlap_threshold) continue;
      // A transcript that visibly ends in failure is not worth copying.
      if (unit->value_text.find(kCompletionMarker) == std::string::npos) continue;
      auto script = schema.parse_script(unit->value_text);
      if (script.empty()) continue;
      state.override_script = std::move(script);
      state.override_unit = unit->id;
      state.guidance.push_back("override:" + unit->id);
      overridden = true;
      continue;
    }
    std::string lowered = unit->value_text;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto& s : schema.skills) {
      if (lowered.find(s.trigger) == std::string::npos) continue;
      if (state.known_skills.insert(s.id).second)
        state.guidance.push_back("skill:" + s.id + "@" + unit->id);
    }
  }
  state.plan = compute_plan(state, instance);
  return state;
}

RawTrajectory EpisodeRecord::trajectory() const {
  RawTrajectory t;
  t.instruction = instruction;
  t.initial_observation = initial_observation;
  for (const auto& line : trace) {
    t.steps.push_back({Actor::agent, line.action});
    t.steps.push_back({Actor::environment, line.observation});
  }
  t.outcome = outcome;
  return t;
}

bool EpisodeRecord::operator==(const EpisodeRecord& o) const {
  auto same_events = [](const std::vector<RetrievalEvent>& a, const std::vector<RetrievalEvent>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].query.text != b[i].query.text || a[i].query.step != b[i].query.step ||
          a[i].query.episode_id != b[i].query.episode_id ||
          a[i].returned_unit_ids != b[i].returned_unit_ids || a[i].scores != b[i].scores)
        return false;
    }
    return true;
  };
  auto same_trace = [](const std::vector<TraceLine>& a, const std::vector<TraceLine>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].action != b[i].action || a[i].observation != b[i].observation) return false;
    return true;
  };
  return episode_id == o.episode_id && instance_id == o.instance_id &&
         instruction == o.instruction && initial_observation == o.initial_observation &&
         initial_plan == o.initial_plan && executed == o.executed && outcome == o.outcome &&
         same_trace(trace, o.trace) && same_events(retrievals, o.retrievals);
}

EpisodeRecord run_episode(const TaskInstance& instance, std::optional<PoolView> pool,
                          Condition condition, const EpisodeParams& params, std::uint64_t seed,
                          std::string episode_id) {
  const auto& schema = schema_for(instance.world);
  EpisodeRecord rec;
  rec.episode_id = episode_id.empty() ? instance.id : std::move(episode_id);
  rec.instance_id = instance.id;
  rec.instruction = instance.instruction;
  rec.initial_observation = instance.initial_observation;

  std::mt19937_64 rng(mix_seed(seed, {instance.id}));
  AgentState state = initial_state(instance);

  auto consult = [&](const Query& q) {
    auto event = retrieve(*pool->pool, *pool->index, q, params.top_k, params.bm25);
    std::vector<const MemoryUnit*> units;
    for (const auto& id : event.returned_unit_ids) units.push_back(pool->pool->find(id));
    rec.retrievals.push_back(std::move(event));
    return units;
  };

  if (pool) {
    const auto units = consult(build_step_query(instance.instruction, {}, rec.episode_id, 0));
    state = apply_guidance(std::move(state), units, instance, params.overlap_threshold);
  }
  rec.initial_plan = state.plan;
  std::vector<std::string> plan = state.plan;

  const auto& required = instance.required_skills;
  std::size_t pos = 0;
  int step = 0;
  bool failed = false;

  auto after_step = [&] {
    if (!pool || !should_requery(condition, params.step_interval, step)) return;
    const std::size_t begin = rec.trace.size() > params.window ? rec.trace.size() - params.window : 0;
    const std::span<const TraceLine> window(rec.trace.data() + begin, rec.trace.size() - begin);
    const auto units = consult(build_step_query(instance.instruction, window, rec.episode_id, step));
    state = apply_guidance(std::move(state), units, instance, params.overlap_threshold);
    // Only adopt the new plan if it agrees with what has already happened.
    if (state.plan.size() >= pos && std::equal(rec.executed.begin(), rec.executed.end(),
                                               state.plan.begin()))
      plan = state.plan;
  };

  auto fail_with = [&](std::string action, std::string observation) {
    ++step;
    rec.trace.push_back({std::move(action), std::move(observation)});
    failed = true;
    after_step();
  };

  while (!failed) {
    if (step >= params.max_steps) {
      failed = true;
      break;
    }
    if (pos == required.size()) {
      if (plan.size() > pos)
        fail_with(main_action(instance, plan[pos]), schema.extra_message);
      break;
    }
    if (pos >= plan.size()) {
      fail_with("done", fill_template(schema.skill(required[pos]).missing_message, instance.slots));
      break;
    }
    const auto& next = plan[pos];
    if (next != required[pos]) {
      const bool extra = std::find(required.begin(), required.end(), next) == required.end();
      fail_with(main_action(instance, next),
                extra ? schema.extra_message
                      : fill_template(schema.skill(required[pos]).missing_message, instance.slots));
      break;
    }
    const std::string skill = next;
    for (auto& line : expand_skill(instance, skill, rng)) {
      if (step >= params.max_steps) {
        failed = true;
        break;
      }
      ++step;
      rec.trace.push_back(std::move(line));
      after_step();
    }
    if (failed) break;
    rec.executed.push_back(skill);
    ++pos;
  }

  rec.outcome = !failed && rec.executed == required ? Outcome::success : Outcome::failure;
  if (rec.outcome == Outcome::success && !rec.trace.empty())
    rec.trace.back().observation += std::string(" ") + kCompletionMarker;
  return rec;
}

std::string event_id(const RetrievalEvent& event) {
  return event.query.episode_id + "@" + std::to_string(event.query.step);
}

std::string episode_to_jsonl(const EpisodeRecord& record) {
  nlohmann::ordered_json j;
  j["episode_id"] = record.episode_id;
  j["instance_id"] = record.instance_id;
  j["instruction"] = record.instruction;
  j["plan"] = record.initial_plan;
  j["executed"] = record.executed;
  j["steps"] = record.trace.size();
  j["outcome"] = to_string(record.outcome);
  auto ids = nlohmann::ordered_json::array();
  for (const auto& e : record.retrievals) ids.push_back(event_id(e));
  j["retrieval_event_ids"] = ids;
  return j.dump();
}

}  // namespace memcl
