#include "tttbench/mock_endpoint.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>

#include "tttbench/errors.hpp"

namespace tttbench {
namespace {

std::size_t word_count(const std::string& s) {
  std::istringstream in(s);
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

}  // namespace

MockScript MockScript::from_json(const nlohmann::json& j) {
  MockScript s;
  try {
    for (const auto& r : j.value("rules", nlohmann::json::array())) {
      MockRule rule;
      rule.match = r.at("match").get<std::string>();
      rule.responses = r.value("responses", std::vector<std::string>{});
      rule.malformed = r.value("malformed", false);
      if (rule.responses.empty() && !rule.malformed) {
        throw DataError("mock rule '" + rule.match + "' has no responses");
      }
      s.rules.push_back(std::move(rule));
    }
    s.default_response = j.value("default_response", s.default_response);
    s.fail_first_n = j.value("fail_first_n", 0);
    s.api_key = j.value("api_key", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed mock script: ") + e.what());
  }
  return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError(path.string() + " is not valid JSON");
  return from_json(j);
}

MockEndpoint::MockEndpoint(MockScript script)
    : script_(std::move(script)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

MockEndpoint::~MockEndpoint() { stop(); }

void MockEndpoint::install_routes() {
  server_->Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
    std::unique_lock lock(mutex_);
    const std::size_t n = ++requests_;

    if (!script_.api_key.empty() && req.get_header_value("Authorization") != "Bearer " + script_.api_key) {
      res.status = 401;
      res.set_content(R"({"error":{"message":"invalid api key"}})", "application/json");
      return;
    }
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded()) {
      res.status = 400;
      res.set_content(R"({"error":{"message":"body is not JSON"}})", "application/json");
      return;
    }
    captured_.push_back(body);
    if (static_cast<int>(n) <= script_.fail_first_n) {
      res.status = 503;
      res.set_content(R"({"error":{"message":"try again"}})", "application/json");
      return;
    }

    std::string question;
    if (body.contains("messages") && body["messages"].is_array() && !body["messages"].empty()) {
      question = body["messages"].back().value("content", std::string());
    }

    std::string content = script_.default_response;
    for (std::size_t r = 0; r < script_.rules.size(); ++r) {
      const MockRule& rule = script_.rules[r];
      if (question.find(rule.match) == std::string::npos) continue;
      if (rule.malformed) {
        res.status = 200;
        res.set_content(R"({"choices": "not what you expected")", "application/json");
        return;
      }
      std::size_t pick;
      if (body.contains("seed") && body["seed"].is_number_integer()) {
        const auto seed = body["seed"].get<long long>();
        pick = static_cast<std::size_t>(seed > 0 ? seed - 1 : 0);
      } else {
        pick = cursor_[r]++;
      }
      content = rule.responses[pick % rule.responses.size()];
      break;
    }

    const nlohmann::json reply{
        {"id", "mock-" + std::to_string(n)},
        {"object", "chat.completion"},
        {"model", body.value("model", std::string("mock"))},
        {"choices", nlohmann::json::array({{{"index", 0},
                                            {"message", {{"role", "assistant"}, {"content", content}}},
                                            {"finish_reason", "stop"}}})},
        {"usage",
         {{"prompt_tokens", word_count(question)},
          {"completion_tokens", word_count(content)},
          {"total_tokens", word_count(question) + word_count(content)}}}};
    res.status = 200;
    res.set_content(reply.dump(), "application/json");
  });
}

void MockEndpoint::start(const std::string& host, int port) {
  host_ = host;
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    if (!server_->bind_to_port(host, port)) throw IoError("mock endpoint cannot bind " + host + ":" + std::to_string(port));
    port_ = port;
  }
  if (port_ <= 0) throw IoError("mock endpoint cannot bind " + host);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void MockEndpoint::run(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) throw IoError("mock endpoint cannot listen on " + host + ":" + std::to_string(port));
}

void MockEndpoint::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockEndpoint::base_url() const { return "http://" + host_ + ":" + std::to_string(port_) + "/v1"; }

std::vector<nlohmann::json> MockEndpoint::captured_requests() const {
  std::lock_guard lock(mutex_);
  return captured_;
}

std::size_t MockEndpoint::request_count() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

}  // namespace tttbench
