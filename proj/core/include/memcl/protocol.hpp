#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "memcl/llm.hpp"
#include "memcl/memory.hpp"
#include "memcl/retrieval.hpp"
#include "memcl/schema.hpp"
#include "memcl/world.hpp"

namespace memcl {

/// One cell of the experimental matrix.
struct Arm {
  WorldKind world = WorldKind::cleanplace;
  Condition condition = Condition::agg;
  Representation representation = Representation::insight;

  /// "cleanplace-raw-agg", used as a directory name.
  std::string name() const;
  bool operator==(const Arm&) const = default;
};

struct TopK {
  std::size_t agg = 1;
  std::size_t ind = 3;
  std::size_t step = 3;
  std::size_t for_condition(Condition c) const;
};

struct RunConfig {
  std::vector<WorldKind> worlds{WorldKind::cleanplace, WorldKind::gridfind};
  std::vector<Condition> conditions{Condition::agg, Condition::ind, Condition::step};
  std::vector<Representation> representations{Representation::raw, Representation::insight};
  int train_n = 200;
  int test_n = 100;
  std::uint64_t seed = 42;
  Bm25Params bm25;
  int step_interval = 4;
  int runs = 2;
  TopK top_k;
  std::size_t window = 4;
  int max_steps = 30;
  double overlap_threshold = 0.5;
  // End-of-phase evaluation is milestone `milestones`; earlier ones are
  // spread evenly through each training phase.
  int milestones = 1;
  bool eval_write = false;
  // "rule" or "llm".
  std::string abstractor = "rule";
  AdapterConfig llm;
  // Affects wall time only, never output.
  int workers = 4;

  /// Raw memories are only stored task-level, so raw pairs with agg alone.
  std::vector<Arm> arms() const;
  EpisodeParams episode_params(Condition c) const;
};

/// Throws ConfigInvalid naming the offending field.
void validate(const RunConfig& config);

/// Canonical JSON of every output-affecting field (workers excluded).
std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(std::string_view text);
/// 16 hex digits of FNV-1a over config_to_json.
std::string config_hash(const RunConfig& config);

inline constexpr const char* kRunTypes[] = {"baseline_A", "baseline_B", "scratch_A",
                                            "scratch_B",  "cross_AB",   "cross_BA"};

struct EpisodeSummary {
  std::string episode_id;
  std::string instance_id;
  Outcome outcome = Outcome::failure;
  std::size_t steps = 0;
  std::vector<std::string> executed;
};

struct InstanceOutcome {
  std::string instance_id;
  Outcome outcome = Outcome::failure;
  bool operator==(const InstanceOutcome&) const = default;
};

struct EvalResult {
  Family task = Family::A;
  int milestone = 1;
  int milestones = 1;
  std::size_t train_episodes_seen = 0;
  // Relative path of the pool snapshot evaluated against; empty for the
  // no-memory baseline.
  std::string pool_snapshot;
  std::size_t pool_units = 0;
  std::vector<InstanceOutcome> outcomes;
};

struct PhaseLog {
  // "train_A", "eval_A", "eval_A_m1", "probe_A", ...
  std::string name;
  Family task = Family::A;
  bool training = false;
  std::vector<EpisodeSummary> episodes;
  std::vector<RetrievalEvent> retrievals;
  std::size_t pool_units = 0;
  std::optional<EvalResult> eval;
};

struct RunLog {
  Arm arm;
  int rep = 0;
  std::string run_type;
  std::vector<PhaseLog> phases;

  const PhaseLog* phase(std::string_view name) const;
  std::filesystem::path relative_dir() const;
};

struct RunArtifacts {
  RunConfig config;
  std::string config_hash;
  std::filesystem::path dir;  // runs/<hash>
  std::vector<RunLog> runs;

  const RunLog* find(const Arm& arm, int rep, std::string_view run_type) const;
};

struct ProbeResult {
  std::vector<InstanceOutcome> outcomes;
  std::vector<EpisodeRecord> episodes;
};

/// Runs every test instance against a frozen pool. No insertion happens.
ProbeResult eval_probe(const ExperiencePool& pool, const std::vector<TaskInstance>& test_set,
                       Condition condition, const EpisodeParams& params, std::uint64_t seed);

/// Executes the full matrix and writes it under `out_root`/runs/<hash>.
RunArtifacts run_matrix(const RunConfig& config, const std::filesystem::path& out_root);

/// Reads an artifact directory (runs/<hash>) back. Throws IncompleteArtifacts
/// or ArtifactCorrupt.
RunArtifacts load_artifacts(const std::filesystem::path& dir);

}  // namespace memcl
