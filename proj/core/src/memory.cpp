#include "memcl/memory.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "memcl/error.hpp"

namespace memcl {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::agg: return "agg";
    case Condition::ind: return "ind";
    case Condition::step: return "step";
  }
  return "?";
}

std::string_view to_string(Representation r) {
  return r == Representation::raw ? "raw" : "insight";
}

std::string_view to_string(UnitKind k) {
  switch (k) {
    case UnitKind::raw_trajectory: return "raw_trajectory";
    case UnitKind::insight_bundle: return "insight_bundle";
    case UnitKind::insight_single: return "insight_single";
  }
  return "?";
}

std::string_view to_string(Outcome o) { return o == Outcome::success ? "success" : "failure"; }

Condition parse_condition(std::string_view s) {
  if (s == "agg") return Condition::agg;
  if (s == "ind") return Condition::ind;
  if (s == "step") return Condition::step;
  throw Error(ErrorCode::parse_error, "unknown condition '" + std::string(s) + "'");
}

Representation parse_representation(std::string_view s) {
  if (s == "raw") return Representation::raw;
  if (s == "insight") return Representation::insight;
  throw Error(ErrorCode::parse_error, "unknown representation '" + std::string(s) + "'");
}

UnitKind parse_unit_kind(std::string_view s) {
  if (s == "raw_trajectory") return UnitKind::raw_trajectory;
  if (s == "insight_bundle") return UnitKind::insight_bundle;
  if (s == "insight_single") return UnitKind::insight_single;
  throw Error(ErrorCode::parse_error, "unknown unit kind '" + std::string(s) + "'");
}

Outcome parse_outcome(std::string_view s) {
  if (s == "success") return Outcome::success;
  if (s == "failure") return Outcome::failure;
  throw Error(ErrorCode::parse_error, "unknown outcome '" + std::string(s) + "'");
}

std::string render_bundle(const std::vector<Insight>& insights) {
  std::string out;
  for (std::size_t i = 0; i < insights.size(); ++i) {
    if (i > 0) {
      out += '\n';
      out += kBundleSeparator;
      out += '\n';
    }
    out += insights[i].body;
  }
  return out;
}

std::vector<std::string> split_bundle(std::string_view value_text) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream in{std::string(value_text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line == kBundleSeparator) {
      if (!current.empty()) parts.push_back(current);
      current.clear();
      continue;
    }
    if (!current.empty()) current += '\n';
    current += line;
  }
  if (!current.empty()) parts.push_back(current);
  return parts;
}

namespace {

bool kind_admitted(Condition c, Representation r, UnitKind k) {
  if (r == Representation::raw) return k == UnitKind::raw_trajectory;
  if (c == Condition::agg) return k == UnitKind::insight_bundle;
  return k == UnitKind::insight_single;
}

}  // namespace

const MemoryUnit* ExperiencePool::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &units_[it->second];
}

std::string ExperiencePool::next_id() const {
  const auto seq = units_.empty() ? std::uint64_t{1} : units_.back().insert_seq + 1;
  char buf[32];
  std::snprintf(buf, sizeof buf, "u%06llu", static_cast<unsigned long long>(seq));
  return buf;
}

void ExperiencePool::append_unit(MemoryUnit unit) {
  if (unit.key_text.empty() || unit.value_text.empty())
    throw Error(ErrorCode::validation_error, "unit " + unit.id + " has empty key or value");
  if (!units_.empty() && unit.insert_seq <= units_.back().insert_seq)
    throw Error(ErrorCode::validation_error, "unit " + unit.id + " breaks insert_seq order");
  if (by_id_.count(unit.id)) throw Error(ErrorCode::validation_error, "duplicate unit id " + unit.id);
  if (!kind_admitted(condition_, representation_, unit.kind))
    throw Error(ErrorCode::validation_error,
                "unit kind " + std::string(to_string(unit.kind)) + " not admitted by pool");
  if (unit.kind == UnitKind::insight_bundle && split_bundle(unit.value_text).empty())
    throw Error(ErrorCode::validation_error, "bundle " + unit.id + " holds no insight");
  if (unit.kind == UnitKind::insight_single && split_bundle(unit.value_text).size() != 1)
    throw Error(ErrorCode::validation_error, "single insight " + unit.id + " holds more than one");
  by_id_.emplace(unit.id, units_.size());
  units_.push_back(std::move(unit));
}

InsertResult ExperiencePool::insert_episode(std::string_view instruction,
                                            const EpisodePayload& payload,
                                            const Provenance& provenance) {
  InsertResult result;
  auto make_unit = [&](std::string key, std::string value, UnitKind kind) {
    MemoryUnit u;
    u.id = next_id();
    u.key_text = std::move(key);
    u.value_text = std::move(value);
    u.kind = kind;
    u.source_task = provenance.source_task;
    u.source_episode = provenance.source_episode;
    u.insert_seq = units_.empty() ? 1 : units_.back().insert_seq + 1;
    u.outcome = provenance.outcome;
    result.ids.push_back(u.id);
    append_unit(std::move(u));
  };

  if (representation_ == Representation::raw) {
    const auto* raw = std::get_if<RawPayload>(&payload);
    if (raw == nullptr || raw->value_text.empty() || instruction.empty()) {
      result.status = InsertStatus::empty_payload;
      return result;
    }
    std::string key(instruction);
    if (!raw->initial_observation.empty()) {
      key += '\n';
      key += raw->initial_observation;
    }
    make_unit(std::move(key), raw->value_text, UnitKind::raw_trajectory);
    return result;
  }

  const auto* insights = std::get_if<std::vector<Insight>>(&payload);
  if (insights == nullptr || insights->empty()) {
    result.status = InsertStatus::empty_payload;
    return result;
  }
  for (const auto& in : *insights) {
    if (in.body.empty() || in.body.find('\n') != std::string::npos)
      throw Error(ErrorCode::validation_error, "insight body must be a single non-empty line");
  }

  if (condition_ == Condition::agg) {
    if (instruction.empty()) {
      result.status = InsertStatus::empty_payload;
      return result;
    }
    make_unit(std::string(instruction), render_bundle(*insights), UnitKind::insight_bundle);
  } else {
    for (const auto& in : *insights) {
      if (in.when_to_use.empty())
        throw Error(ErrorCode::validation_error, "individually indexed insight lacks when_to_use");
    }
    for (const auto& in : *insights) make_unit(in.when_to_use, in.body, UnitKind::insight_single);
  }
  return result;
}

ExperiencePool new_pool(Condition condition, Representation representation) {
  return ExperiencePool(condition, representation);
}

std::string pool_snapshot(const ExperiencePool& pool) {
  std::string out;
  ojson header;
  header["condition"] = to_string(pool.condition());
  header["representation"] = to_string(pool.representation());
  header["unit_count"] = pool.size();
  out += header.dump();
  out += '\n';
  for (const auto& u : pool.units()) {
    ojson j;
    j["id"] = u.id;
    j["key_text"] = u.key_text;
    j["value_text"] = u.value_text;
    j["kind"] = to_string(u.kind);
    j["source_task"] = u.source_task;
    j["source_episode"] = u.source_episode;
    j["insert_seq"] = u.insert_seq;
    j["outcome"] = to_string(u.outcome);
    out += j.dump();
    out += '\n';
  }
  return out;
}

ExperiencePool pool_restore(std::string_view snapshot) {
  std::istringstream in{std::string(snapshot)};
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse_error, "pool snapshot is empty");
  try {
    auto header = nlohmann::json::parse(line);
    ExperiencePool pool(parse_condition(header.at("condition").get<std::string>()),
                        parse_representation(header.at("representation").get<std::string>()));
    const auto expected = header.at("unit_count").get<std::size_t>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      MemoryUnit u;
      u.id = j.at("id").get<std::string>();
      u.key_text = j.at("key_text").get<std::string>();
      u.value_text = j.at("value_text").get<std::string>();
      u.kind = parse_unit_kind(j.at("kind").get<std::string>());
      u.source_task = j.at("source_task").get<std::string>();
      u.source_episode = j.at("source_episode").get<std::string>();
      u.insert_seq = j.at("insert_seq").get<std::uint64_t>();
      u.outcome = parse_outcome(j.at("outcome").get<std::string>());
      pool.append_unit(std::move(u));
    }
    if (pool.size() != expected)
      throw Error(ErrorCode::parse_error, "header unit_count " + std::to_string(expected) +
                                              " but found " + std::to_string(pool.size()));
    return pool;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("pool snapshot: ") + e.what());
  }
}

}  // namespace memcl
