#include "memcl/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "memcl/error.hpp"

namespace memcl {

namespace {

using ojson = nlohmann::ordered_json;

ojson request_json(const AdapterConfig& config, const CompletionRequest& request) {
  ojson body;
  body["model"] = config.model;
  auto messages = ojson::array();
  if (!request.system_text.empty())
    messages.push_back({{"role", "system"}, {"content", request.system_text}});
  messages.push_back({{"role", "user"}, {"content", request.user_text}});
  body["messages"] = messages;
  body["max_tokens"] = request.max_tokens;
  body["temperature"] = request.temperature;
  return body;
}

std::string redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos))
    text.replace(pos, secret.size(), "[REDACTED]");
  return text;
}

std::string token_from_env(const AdapterConfig& config) {
  if (config.auth_env.empty()) return {};
  const char* v = std::getenv(config.auth_env.c_str());
  return v ? v : "";
}

}  // namespace

std::string request_body(const AdapterConfig& config, const CompletionRequest& request) {
  return request_json(config, request).dump();
}

std::string parse_completion_body(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::http_error, std::string("malformed completion body: ") + ex.what());
  }
}

std::string log_line(const AdapterConfig& config, const CompletionRequest& request,
                     std::string_view response) {
  const auto secret = token_from_env(config);
  ojson j;
  j["model"] = config.model;
  j["endpoint"] = redact(config.endpoint, secret);
  j["system"] = redact(request.system_text, secret);
  j["user"] = redact(request.user_text, secret);
  j["max_tokens"] = request.max_tokens;
  j["temperature"] = request.temperature;
  j["response"] = redact(std::string(response), secret);
  return j.dump();
}

std::string complete(const AdapterConfig& config, const CompletionRequest& request) {
  if (config.endpoint.empty())
    throw Error(ErrorCode::adapter_unavailable, "llm endpoint is not configured");
  httplib::Client client(config.endpoint);
  const auto secs = std::chrono::duration<double>(request.timeout_s);
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(secs);
  client.set_connection_timeout(us);
  client.set_read_timeout(us);
  client.set_write_timeout(us);
  httplib::Headers headers;
  const auto token = token_from_env(config);
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
  const auto body = request_body(config, request);

  std::string last_error;
  ErrorCode last_code = ErrorCode::timeout;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    if (attempt > 0 && config.backoff_s > 0.0)
      std::this_thread::sleep_for(std::chrono::duration<double>(config.backoff_s * attempt));
    auto res = client.Post(config.path, headers, body, "application/json");
    if (!res) {
      // No HTTP response at all: refused, unreachable or past the deadline.
      last_code = ErrorCode::timeout;
      last_error = "no response from " + config.endpoint + ": " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403)
      throw Error(ErrorCode::auth_error, "endpoint rejected credentials (HTTP " +
                                             std::to_string(res->status) + ")");
    if (res->status >= 500 || res->status == 429) {
      last_code = ErrorCode::http_error;
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw Error(ErrorCode::http_error, "HTTP " + std::to_string(res->status));
    auto text = parse_completion_body(res->body);
    if (!config.log_path.empty()) {
      std::ofstream log(config.log_path, std::ios::app | std::ios::binary);
      log << log_line(config, request, text) << '\n';
    }
    return text;
  }
  throw Error(last_code, last_error);
}

std::string HttpCompletionClient::complete(const CompletionRequest& request) {
  std::lock_guard lock(mutex_);
  return memcl::complete(config_, request);
}

ReplayCompletionClient::ReplayCompletionClient(std::string_view log_text) {
  std::istringstream in{std::string(log_text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CompletionRequest r;
      r.system_text = j.at("system").get<std::string>();
      r.user_text = j.at("user").get<std::string>();
      r.max_tokens = j.at("max_tokens").get<int>();
      r.temperature = j.at("temperature").get<double>();
      entries_.push_back({std::move(r), j.at("response").get<std::string>()});
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::parse_error,
                  "request log line " + std::to_string(n) + ": " + ex.what());
    }
  }
}

std::unique_ptr<ReplayCompletionClient> ReplayCompletionClient::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::adapter_unavailable, "cannot open request log " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::make_unique<ReplayCompletionClient>(ss.str());
}

std::string ReplayCompletionClient::complete(const CompletionRequest& request) {
  std::lock_guard lock(mutex_);
  for (auto& e : entries_) {
    if (e.used) continue;
    const auto& r = e.request;
    if (r.system_text == request.system_text && r.user_text == request.user_text &&
        r.max_tokens == request.max_tokens && r.temperature == request.temperature) {
      e.used = true;
      return e.response;
    }
  }
  throw Error(ErrorCode::adapter_unavailable, "request not found in replay log");
}

}  // namespace memcl
