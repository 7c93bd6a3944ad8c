#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace memcl {

enum class Condition { agg, ind, step };
enum class Representation { raw, insight };
enum class UnitKind { raw_trajectory, insight_bundle, insight_single };
enum class Outcome { success, failure };

std::string_view to_string(Condition c);
std::string_view to_string(Representation r);
std::string_view to_string(UnitKind k);
std::string_view to_string(Outcome o);
Condition parse_condition(std::string_view s);
Representation parse_representation(std::string_view s);
UnitKind parse_unit_kind(std::string_view s);
Outcome parse_outcome(std::string_view s);

/// A distilled lesson plus the situation it applies to.
struct Insight {
  std::string body;
  std::string when_to_use;

  bool operator==(const Insight&) const = default;
};

/// One (key, value) memory entry. `key_text` is what retrieval matches
/// against; `value_text` is what the agent reads once the unit is returned.
struct MemoryUnit {
  std::string id;
  std::string key_text;
  std::string value_text;
  UnitKind kind = UnitKind::raw_trajectory;
  std::string source_task;
  std::string source_episode;
  std::uint64_t insert_seq = 0;
  // Stored for provenance only; retrieval does not weight by it.
  Outcome outcome = Outcome::success;

  bool operator==(const MemoryUnit&) const = default;
};

/// Separator line placed between insights inside a bundle's value text.
inline constexpr std::string_view kBundleSeparator = "---";

/// Serialized trajectory: the pool derives the key from the instruction plus
/// this initial observation (instruction alone when it is empty).
struct RawPayload {
  std::string initial_observation;
  std::string value_text;
};

using EpisodePayload = std::variant<RawPayload, std::vector<Insight>>;

enum class InsertStatus { ok, empty_payload };

struct InsertResult {
  std::vector<std::string> ids;
  InsertStatus status = InsertStatus::ok;
};

struct Provenance {
  std::string source_task;
  std::string source_episode;
  Outcome outcome = Outcome::success;
};

/// Append-only experience pool. Condition and representation are fixed at
/// construction and determine how an episode becomes units.
class ExperiencePool {
 public:
  ExperiencePool(Condition condition, Representation representation)
      : condition_(condition), representation_(representation) {}

  Condition condition() const noexcept { return condition_; }
  Representation representation() const noexcept { return representation_; }
  const std::vector<MemoryUnit>& units() const noexcept { return units_; }
  std::size_t size() const noexcept { return units_.size(); }
  bool empty() const noexcept { return units_.empty(); }

  /// Returns nullptr if no unit has this id.
  const MemoryUnit* find(std::string_view id) const;

  /// Raw representation expects a RawPayload; insight expects the distilled
  /// list. A payload of the wrong alternative, an empty
  /// insight list, or an empty raw value yields status empty_payload and
  /// inserts nothing.
  InsertResult insert_episode(std::string_view instruction, const EpisodePayload& payload,
                              const Provenance& provenance);

  /// Appends a fully formed unit (used by restore). Throws on invariant
  /// violations: empty key/value, non-increasing insert_seq, duplicate id, or
  /// a kind the pool's condition/representation does not admit.
  void append_unit(MemoryUnit unit);

  bool operator==(const ExperiencePool&) const = default;

 private:
  std::string next_id() const;

  Condition condition_;
  Representation representation_;
  std::vector<MemoryUnit> units_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

ExperiencePool new_pool(Condition condition, Representation representation);

/// JSONL: header line then one unit per line, LF-terminated.
std::string pool_snapshot(const ExperiencePool& pool);
ExperiencePool pool_restore(std::string_view snapshot);

/// Joins insights into the single value text of an aggregated bundle.
std::string render_bundle(const std::vector<Insight>& insights);
/// Inverse of render_bundle over the body lines.
std::vector<std::string> split_bundle(std::string_view value_text);

}  // namespace memcl
