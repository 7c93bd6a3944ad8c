#include "memcl/representation.hpp"

#include <algorithm>
#include <cctype>

#include "memcl/error.hpp"
#include "memcl/llm.hpp"
#include "memcl/retrieval.hpp"

namespace memcl {

extern const char* const kDistillPromptAsset;

SerializedRaw serialize_raw(const RawTrajectory& trajectory) {
  if (trajectory.steps.empty())
    throw Error(ErrorCode::empty_trajectory, "cannot serialize a trajectory with no steps");
  SerializedRaw out;
  out.key_text = trajectory.instruction;
  if (!trajectory.initial_observation.empty()) out.key_text += "\n" + trajectory.initial_observation;
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
    const auto& s = trajectory.steps[i];
    if (i) out.value_text += '\n';
    out.value_text += s.actor == Actor::agent ? "[Agent]: " : "[Env]: ";
    out.value_text += s.text;
  }
  return out;
}

RawPayload raw_payload(const RawTrajectory& trajectory) {
  auto s = serialize_raw(trajectory);
  return {trajectory.initial_observation, std::move(s.value_text)};
}

namespace {

const SkillInfo* skill_of_action(const SkillSchema& schema, std::string_view action) {
  const auto tokens = tokenize(action);
  return tokens.empty() ? nullptr : schema.skill_by_verb(tokens.front());
}

}  // namespace

std::vector<Insight> rule_distill(const RawTrajectory& trajectory, const SkillSchema& schema) {
  const Slots slots = schema.extract_slots(trajectory.instruction, trajectory.initial_observation);
  std::vector<const TrajectoryStep*> actions;
  const TrajectoryStep* last_env = nullptr;
  for (const auto& s : trajectory.steps) {
    if (s.actor == Actor::agent)
      actions.push_back(&s);
    else
      last_env = &s;
  }

  // On failure the final action is the attempt that went wrong; it did not
  // exercise its skill.
  std::string failed;
  std::size_t usable = actions.size();
  if (trajectory.outcome == Outcome::failure && last_env != nullptr) {
    if (auto missing = schema.skill_missing_in(last_env->text)) {
      failed = *missing;
      if (usable) --usable;
    } else if (!schema.extra_marker.empty() &&
               last_env->text.find(schema.extra_marker) != std::string::npos && usable) {
      if (const auto* s = skill_of_action(schema, actions.back()->text)) failed = s->id;
      --usable;
    }
  }

  std::vector<std::string> exercised;
  for (std::size_t i = 0; i < usable; ++i) {
    const auto* s = skill_of_action(schema, actions[i]->text);
    if (s == nullptr || s->id == failed) continue;
    if (std::find(exercised.begin(), exercised.end(), s->id) == exercised.end())
      exercised.push_back(s->id);
  }

  std::vector<Insight> out;
  if (!failed.empty()) {
    const auto& s = schema.skill(failed);
    out.push_back({fill_template(s.avoid, slots), fill_template(s.when_to_use, slots)});
  }
  for (const auto& id : exercised) {
    if (out.size() >= kMaxRuleInsights) break;
    const auto& s = schema.skill(id);
    out.push_back({fill_template(s.lesson, slots), fill_template(s.when_to_use, slots)});
  }
  if (out.empty()) out.push_back(schema.generic_insight());
  return out;
}

std::string_view distill_prompt_template() { return kDistillPromptAsset; }
std::string_view distill_prompt_version() { return "distill_prompt_v1"; }

std::string render_distill_prompt(const RawTrajectory& trajectory) {
  std::string steps;
  for (const auto& s : trajectory.steps) {
    steps += s.actor == Actor::agent ? "[Agent]: " : "[Env]: ";
    steps += s.text;
    steps += '\n';
  }
  const std::string obs =
      trajectory.initial_observation.empty() ? "" : "\n" + trajectory.initial_observation;
  return fill_template(distill_prompt_template(),
                       {{"instruction", trajectory.instruction + obs},
                        {"outcome", std::string(to_string(trajectory.outcome))},
                        {"trajectory", steps}});
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// "Insight 12. text" or "Insight 12: text"; returns the text after the marker.
std::optional<std::string_view> insight_header(std::string_view line) {
  constexpr std::string_view word = "Insight";
  if (!line.starts_with(word)) return std::nullopt;
  std::size_t i = word.size();
  while (i < line.size() && line[i] == ' ') ++i;
  const std::size_t digits = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == digits || i >= line.size() || (line[i] != '.' && line[i] != ':')) return std::nullopt;
  return trim(line.substr(i + 1));
}

}  // namespace

std::vector<Insight> parse_insight_response(std::string_view response,
                                            std::string_view default_when) {
  std::vector<Insight> out;
  bool in_body = false;
  std::size_t pos = 0;
  while (pos <= response.size()) {
    auto end = response.find('\n', pos);
    if (end == std::string_view::npos) end = response.size();
    const auto line = trim(response.substr(pos, end - pos));
    pos = end + 1;
    if (auto body = insight_header(line)) {
      out.push_back({std::string(*body), ""});
      in_body = true;
    } else if (!out.empty() && line.starts_with("When:")) {
      out.back().when_to_use = std::string(trim(line.substr(5)));
      in_body = false;
    } else if (in_body && !line.empty()) {
      auto& body = out.back().body;
      if (!body.empty()) body += ' ';
      body += line;
    } else if (line.empty()) {
      in_body = false;
    }
  }
  std::erase_if(out, [](const Insight& i) { return i.body.empty(); });
  for (auto& i : out)
    if (i.when_to_use.empty()) i.when_to_use = std::string(default_when);
  if (out.size() > kMaxLlmInsights) out.resize(kMaxLlmInsights);
  return out;
}

LlmDistillResult llm_distill(const RawTrajectory& trajectory, CompletionClient* client,
                             const SkillSchema& schema) {
  if (client == nullptr)
    throw Error(ErrorCode::adapter_unavailable, "llm_distill needs a completion client");
  CompletionRequest request;
  request.system_text = "You distill agent trajectories into reusable strategy insights.";
  request.user_text = render_distill_prompt(trajectory);
  LlmDistillResult result;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ++result.attempts;
    auto insights = parse_insight_response(client->complete(request), trajectory.instruction);
    if (!insights.empty()) {
      result.insights = std::move(insights);
      return result;
    }
  }
  result.insights = rule_distill(trajectory, schema);
  result.fell_back = true;
  return result;
}

std::vector<Insight> LlmAbstractor::distill(const RawTrajectory& trajectory) {
  auto r = llm_distill(trajectory, &client_, schema_);
  if (r.fell_back) ++fallbacks_;
  return std::move(r.insights);
}

}  // namespace memcl
