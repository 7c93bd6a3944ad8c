#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memcl/memory.hpp"

namespace memcl {

enum class WorldKind { cleanplace, gridfind };
enum class Family { A, B };

std::string_view to_string(WorldKind w);
std::string_view to_string(Family f);
WorldKind parse_world(std::string_view s);
Family parse_family(std::string_view s);

using Slots = std::map<std::string, std::string>;

/// Replaces every "{name}" with slots[name]; unknown names are left as is.
std::string fill_template(std::string_view tmpl, const Slots& slots);

struct SkillInfo {
  std::string id;
  // First token of every primitive action that belongs to this skill.
  std::string verb;
  // Phrase whose presence in insight text teaches the skill.
  std::string trigger;
  std::string lesson;
  std::string avoid;
  std::string when_to_use;
  // Instruction token that demands the skill; empty when none does.
  std::string cue;
  // Substring of the environment message emitted when the skill was needed
  // but skipped.
  std::string missing_marker;
  std::string missing_message;
};

/// Skills the agent lacks for instances whose difficulty is below `upper`
/// (and at or above the previous band's bound).
struct DeficiencyBand {
  double upper = 1.0;
  std::vector<std::string> missing;
};

struct SkillSchema {
  WorldKind world = WorldKind::cleanplace;
  std::vector<SkillInfo> skills;  // canonical order
  std::map<Family, std::vector<DeficiencyBand>> bands;
  // Verbs of navigation glue actions that belong to no skill.
  std::vector<std::string> glue_verbs;
  std::string extra_marker;
  std::string extra_message;
  Insight generic_insight() const;

  const SkillInfo& skill(std::string_view id) const;
  const SkillInfo* skill_by_verb(std::string_view verb) const;
  std::size_t canonical_index(std::string_view id) const;

  /// Skills the agent lacks at this difficulty for this family.
  std::vector<std::string> missing_skills(Family family, double difficulty) const;

  /// Recovers template slots from the instruction and initial observation.
  Slots extract_slots(std::string_view instruction, std::string_view initial_observation) const;

  /// Reads a raw value text and returns the skill sequence its agent lines
  /// perform (consecutive repeats collapsed, glue dropped).
  std::vector<std::string> parse_script(std::string_view raw_value) const;

  /// Skill whose missing-marker appears in `observation`, if any.
  std::optional<std::string> skill_missing_in(std::string_view observation) const;
};

const SkillSchema& schema_for(WorldKind world);

}  // namespace memcl
