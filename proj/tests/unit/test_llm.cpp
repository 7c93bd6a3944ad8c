#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <functional>
#include <thread>
#include <unistd.h>

#include "httplib.h"
#include "json.hpp"
#include "memcl/error.hpp"
#include "memcl/llm.hpp"

using namespace memcl;

namespace {

std::string completion_json(const std::string& text) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}}
      .dump();
}

// Local server on an ephemeral port, torn down with the fixture.
class MockServer {
 public:
  explicit MockServer(httplib::Server::Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

AdapterConfig config_for(const MockServer& s) {
  AdapterConfig c;
  c.endpoint = s.endpoint();
  c.model = "test-model";
  c.backoff_s = 0.0;
  c.auth_env = "MEMCL_TEST_TOKEN_UNSET";
  return c;
}

CompletionRequest quick(double timeout_s = 5.0) {
  CompletionRequest r;
  r.system_text = "sys";
  r.user_text = "hello";
  r.timeout_s = timeout_s;
  return r;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::parse_error;
}

}  // namespace

TEST(Llm, EchoesFixedText) {
  std::string seen_body;
  MockServer s([&](const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    res.set_content(completion_json("fixed reply"), "application/json");
  });
  EXPECT_EQ(complete(config_for(s), quick()), "fixed reply");
  const auto body = nlohmann::json::parse(seen_body);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["messages"][1]["content"], "hello");
  EXPECT_EQ(body["temperature"], 0.5);
}

TEST(Llm, RetriesServerErrors) {
  std::atomic<int> calls{0};
  MockServer s([&](const httplib::Request&, httplib::Response& res) {
    if (++calls <= 2) {
      res.status = 500;
      return;
    }
    res.set_content(completion_json("third time"), "application/json");
  });
  auto c = config_for(s);
  c.retries = 2;
  EXPECT_EQ(complete(c, quick()), "third time");
  EXPECT_EQ(calls.load(), 3);
}

TEST(Llm, RetriesExhaustedIsHttpError) {
  std::atomic<int> calls{0};
  MockServer s([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 503;
  });
  auto c = config_for(s);
  c.retries = 1;
  EXPECT_EQ(code_of([&] { complete(c, quick()); }), ErrorCode::http_error);
  EXPECT_EQ(calls.load(), 2);
}

TEST(Llm, ClientErrorNotRetried) {
  std::atomic<int> calls{0};
  MockServer s([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  EXPECT_EQ(code_of([&] { complete(config_for(s), quick()); }), ErrorCode::http_error);
  EXPECT_EQ(calls.load(), 1);
}

TEST(Llm, AuthFailure) {
  MockServer s([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
  EXPECT_EQ(code_of([&] { complete(config_for(s), quick()); }), ErrorCode::auth_error);
}

TEST(Llm, UnreachableIsTimeout) {
  AdapterConfig c;
  // Reserved port with nothing listening.
  c.endpoint = "http://127.0.0.1:9";
  c.retries = 1;
  c.backoff_s = 0.0;
  EXPECT_EQ(code_of([&] { complete(c, quick(0.5)); }), ErrorCode::timeout);
}

TEST(Llm, SlowServerIsTimeout) {
  MockServer s([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(completion_json("late"), "application/json");
  });
  auto c = config_for(s);
  c.retries = 0;
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of([&] { complete(c, quick(0.2)); }), ErrorCode::timeout);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(590));
}

TEST(Llm, NoEndpointIsUnavailable) {
  EXPECT_EQ(code_of([] { complete(AdapterConfig{}, quick()); }), ErrorCode::adapter_unavailable);
}

TEST(Llm, TokenSentButNeverLogged) {
  std::string auth;
  MockServer s([&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    res.set_content(completion_json("ok sk-test-123"), "application/json");
  });
  ::setenv("MEMCL_TEST_TOKEN", "sk-test-123", 1);
  auto c = config_for(s);
  c.auth_env = "MEMCL_TEST_TOKEN";
  c.log_path = (std::filesystem::temp_directory_path() /
                ("memcl-llm-log-" + std::to_string(::getpid()) + ".jsonl"))
                   .string();
  std::filesystem::remove(c.log_path);
  complete(c, quick());
  ::unsetenv("MEMCL_TEST_TOKEN");
  EXPECT_EQ(auth, "Bearer sk-test-123");
  std::ifstream in(c.log_path);
  const std::string logged((std::istreambuf_iterator<char>(in)), {});
  EXPECT_FALSE(logged.empty());
  EXPECT_EQ(logged.find("sk-test-123"), std::string::npos);
  std::filesystem::remove(c.log_path);
}

TEST(Llm, MalformedBodyIsHttpError) {
  EXPECT_EQ(code_of([] { parse_completion_body("{\"choices\": []}"); }), ErrorCode::http_error);
  EXPECT_EQ(code_of([] { parse_completion_body("not json"); }), ErrorCode::http_error);
  EXPECT_EQ(parse_completion_body(completion_json("x")), "x");
}

TEST(Llm, ReplayServesLoggedResponses) {
  AdapterConfig c;
  auto r = quick();
  const auto log = log_line(c, r, "first") + "\n" + log_line(c, r, "second") + "\n";
  ReplayCompletionClient replay(log);
  EXPECT_EQ(replay.complete(r), "first");
  EXPECT_EQ(replay.complete(r), "second");
  EXPECT_EQ(code_of([&] { replay.complete(r); }), ErrorCode::adapter_unavailable);
  auto other = r;
  other.user_text = "different";
  ReplayCompletionClient fresh(log);
  EXPECT_EQ(code_of([&] { fresh.complete(other); }), ErrorCode::adapter_unavailable);
}
