#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "memcl/memory.hpp"
#include "memcl/schema.hpp"

namespace memcl {

class CompletionClient;

enum class Actor { agent, environment };

struct TrajectoryStep {
  Actor actor = Actor::agent;
  std::string text;
};

struct RawTrajectory {
  std::string instruction;
  std::string initial_observation;
  std::vector<TrajectoryStep> steps;
  Outcome outcome = Outcome::failure;
};

struct SerializedRaw {
  std::string key_text;
  std::string value_text;
};

/// Key is the instruction plus the initial observation; value is one
/// "[Agent]: ..." / "[Env]: ..." line per step. Throws EmptyTrajectory.
SerializedRaw serialize_raw(const RawTrajectory& trajectory);

/// The payload the pool needs for a raw insert.
RawPayload raw_payload(const RawTrajectory& trajectory);

inline constexpr std::size_t kMaxRuleInsights = 3;
inline constexpr std::size_t kMaxLlmInsights = 5;

/// Deterministic distiller. Success yields one lesson per exercised skill in
/// first-use order; failure leads with an avoid-insight for the skill that
/// was missing. Never returns an empty list.
std::vector<Insight> rule_distill(const RawTrajectory& trajectory, const SkillSchema& schema);

/// Prompt template used by llm_distill; placeholders {instruction},
/// {outcome} and {trajectory}.
std::string_view distill_prompt_template();
std::string_view distill_prompt_version();
std::string render_distill_prompt(const RawTrajectory& trajectory);

/// Parses "Insight N. body" lines, each optionally followed by a
/// "When: ..." line. Continuation lines are folded into the body.
std::vector<Insight> parse_insight_response(std::string_view response,
                                            std::string_view default_when);

struct LlmDistillResult {
  std::vector<Insight> insights;
  bool fell_back = false;
  int attempts = 0;
};

/// Throws AdapterUnavailable without a client. Retries once on an
/// unparseable response, then falls back to rule_distill.
LlmDistillResult llm_distill(const RawTrajectory& trajectory, CompletionClient* client,
                             const SkillSchema& schema);

class Abstractor {
 public:
  virtual ~Abstractor() = default;
  virtual std::vector<Insight> distill(const RawTrajectory& trajectory) = 0;
};

class RuleAbstractor final : public Abstractor {
 public:
  explicit RuleAbstractor(const SkillSchema& schema) : schema_(schema) {}
  std::vector<Insight> distill(const RawTrajectory& trajectory) override {
    return rule_distill(trajectory, schema_);
  }

 private:
  const SkillSchema& schema_;
};

class LlmAbstractor final : public Abstractor {
 public:
  LlmAbstractor(const SkillSchema& schema, CompletionClient& client)
      : schema_(schema), client_(client) {}
  std::vector<Insight> distill(const RawTrajectory& trajectory) override;
  std::size_t fallbacks() const noexcept { return fallbacks_; }

 private:
  const SkillSchema& schema_;
  CompletionClient& client_;
  std::size_t fallbacks_ = 0;
};

}  // namespace memcl
