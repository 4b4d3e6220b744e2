#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace httplib {
class Server;
}

namespace tttbench {

/// Scripted chat-completions server for tests and offline demos.
///
/// Script JSON:
///   {"rules": [{"match": "<substring of the user message>",
///               "responses": ["...", "..."], "malformed": false}],
///    "default_response": "...", "fail_first_n": 0, "api_key": ""}
///
/// The first rule whose match occurs in the question answers. With a "seed"
/// in the request, responses[(seed - 1) % n] is returned; otherwise responses
/// are cycled per rule in arrival order.
struct MockRule {
  std::string match;
  std::vector<std::string> responses;
  bool malformed = false;
};

struct MockScript {
  std::vector<MockRule> rules;
  std::string default_response = "I cannot decide.";
  /// The first n requests get HTTP 503.
  int fail_first_n = 0;
  /// Required bearer token; empty accepts anything.
  std::string api_key;

  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::filesystem::path& path);
};

class MockEndpoint {
 public:
  explicit MockEndpoint(MockScript script);
  ~MockEndpoint();
  MockEndpoint(const MockEndpoint&) = delete;
  MockEndpoint& operator=(const MockEndpoint&) = delete;

  /// Binds to host:port (0 picks a free port) and serves on a background thread.
  void start(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

  int port() const { return port_; }
  std::string base_url() const;

  std::vector<nlohmann::json> captured_requests() const;
  std::size_t request_count() const;

 private:
  void install_routes();

  MockScript script_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> captured_;
  std::map<std::size_t, std::size_t> cursor_;
  std::size_t requests_ = 0;
};

}  // namespace tttbench
