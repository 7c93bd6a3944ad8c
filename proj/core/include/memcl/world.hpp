#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "memcl/memory.hpp"
#include "memcl/representation.hpp"
#include "memcl/retrieval.hpp"
#include "memcl/schema.hpp"

namespace memcl {

/// Appended to the last observation of a successful episode.
inline constexpr const char* kCompletionMarker = "Task complete.";

struct TaskInstance {
  std::string id;
  Family family = Family::A;
  WorldKind world = WorldKind::cleanplace;
  std::string instruction;
  std::string initial_observation;
  std::vector<std::string> required_skills;
  double difficulty = 0.0;
  Slots slots;
  // cleanplace: receptacles visited while searching, the last one holds the object.
  std::vector<std::string> search_path;
  // gridfind: doorway colours crossed, rooms scanned, tiles to approach.
  std::vector<std::string> doorways;
  int scans = 0;
  int approach = 0;
};

/// Generates `n` instances. `split` namespaces ids ("train"/"test") and is
/// mixed into the stream so splits never share content by accident.
std::vector<TaskInstance> generate_tasks(WorldKind world, Family family, int n,
                                         std::uint64_t seed, std::string_view split = "test");

struct AgentState {
  std::set<std::string> known_skills;
  std::vector<std::string> plan;
  std::vector<std::string> guidance;
  // Literal script adopted from a raw memory; persists until another
  // override replaces it.
  std::optional<std::vector<std::string>> override_script;
  std::string override_unit;
};

struct EpisodeParams {
  std::size_t top_k = 1;
  int step_interval = 4;
  std::size_t window = 4;
  int max_steps = 30;
  double overlap_threshold = 0.5;
  Bm25Params bm25;
};

/// Skills the agent starts with: every schema skill minus the band's gaps.
AgentState initial_state(const TaskInstance& instance);

/// Plan from own reasoning: required skills the agent knows, in order.
std::vector<std::string> own_plan(const AgentState& state, const TaskInstance& instance);

/// Token-set Jaccard similarity.
double jaccard(std::string_view a, std::string_view b);

/// Folds retrieved units (in score order) into the agent state. Insight units
/// only ever add skills; a raw unit whose source instruction overlaps enough
/// and whose transcript ends in completion replaces the plan with its literal
/// script, and lower-ranked raw units in the same batch cannot displace that
/// override. The plan is recomputed.
AgentState apply_guidance(AgentState state, const std::vector<const MemoryUnit*>& retrieved,
                          const TaskInstance& instance, double overlap_threshold);

struct EpisodeRecord {
  std::string episode_id;
  std::string instance_id;
  std::string instruction;
  std::string initial_observation;
  std::vector<std::string> initial_plan;
  std::vector<std::string> executed;
  std::vector<TraceLine> trace;
  Outcome outcome = Outcome::failure;
  std::vector<RetrievalEvent> retrievals;

  RawTrajectory trajectory() const;
  bool operator==(const EpisodeRecord&) const;
};

/// Read-only view of a pool together with its synced index.
struct PoolView {
  const ExperiencePool* pool = nullptr;
  const Bm25Index* index = nullptr;
};

/// Runs one episode. With no pool the agent acts on its own plan; otherwise
/// it retrieves at step 0 and, under the step condition, after every
/// `step_interval` actions.
EpisodeRecord run_episode(const TaskInstance& instance, std::optional<PoolView> pool,
                          Condition condition, const EpisodeParams& params, std::uint64_t seed,
                          std::string episode_id = {});

std::string episode_to_jsonl(const EpisodeRecord& record);

/// Event ids used to link episode lines with retrieval log lines.
std::string event_id(const RetrievalEvent& event);

}  // namespace memcl
