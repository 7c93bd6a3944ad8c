#pragma once

#include <cstddef>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace memcl {

struct CompletionRequest {
  std::string system_text;
  std::string user_text;
  int max_tokens = 4096;
  double temperature = 0.5;
  double timeout_s = 60.0;
};

struct AdapterConfig {
  // Base URL, e.g. "http://localhost:8080"; requests go to `path` below it.
  std::string endpoint;
  std::string path = "/v1/chat/completions";
  std::string model;
  // Name of the environment variable holding the bearer token. The token
  // itself is read at call time and never stored.
  std::string auth_env = "MEMCL_LLM_API_KEY";
  int retries = 2;
  double backoff_s = 0.5;
  // When set, every request/response pair is appended here as JSONL.
  std::string log_path;
};

/// Anything that turns a request into completion text.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

/// The chat-completions body sent on the wire.
std::string request_body(const AdapterConfig& config, const CompletionRequest& request);

/// Extracts choices[0].message.content; throws HttpError on a malformed body.
std::string parse_completion_body(std::string_view body);

/// One logged exchange. Secrets are never part of it.
std::string log_line(const AdapterConfig& config, const CompletionRequest& request,
                     std::string_view response);

/// Single chat-style completion over HTTP. Retries 5xx and transport
/// failures `config.retries` times with linear backoff; 401/403 raise
/// AuthError immediately, other 4xx raise HttpError.
std::string complete(const AdapterConfig& config, const CompletionRequest& request);

class HttpCompletionClient final : public CompletionClient {
 public:
  explicit HttpCompletionClient(AdapterConfig config) : config_(std::move(config)) {}
  std::string complete(const CompletionRequest& request) override;

 private:
  AdapterConfig config_;
  std::mutex mutex_;
};

/// Serves responses from a request log written by complete(). Requests are
/// matched on prompt text and sampling settings, first unused entry wins; an
/// unmatched request throws AdapterUnavailable.
class ReplayCompletionClient final : public CompletionClient {
 public:
  explicit ReplayCompletionClient(std::string_view log_text);
  static std::unique_ptr<ReplayCompletionClient> from_file(const std::string& path);
  std::string complete(const CompletionRequest& request) override;

 private:
  struct Entry {
    CompletionRequest request;
    std::string response;
    bool used = false;
  };
  std::vector<Entry> entries_;
  std::mutex mutex_;
};

}  // namespace memcl
