#include <doctest.h>

#include <atomic>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "tttbench/errors.hpp"
#include "tttbench/evalclient.hpp"
#include "tttbench/mock_endpoint.hpp"

using namespace tttbench;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = TTTBENCH_SOURCE_DIR;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tttbench-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<BenchmarkItem> showcase() { return load_dataset(kSource / "data/showcase_items.jsonl"); }

ModelEndpointConfig fast_config(const std::string& base_url) {
  ModelEndpointConfig c;
  c.base_url = base_url;
  c.model_name = "mock-model";
  c.api_key_env = "";
  c.samples_per_item = 4;
  c.parallelism = 3;
  c.retry.backoff_base = std::chrono::milliseconds(1);
  c.timeout = std::chrono::seconds(10);
  return c;
}

std::string reply_body(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}},
                        {"usage", {{"prompt_tokens", 3}, {"completion_tokens", 5}}}}
      .dump();
}

// In-process transport: answers from a function and counts calls per question.
class FakeTransport : public Transport {
 public:
  std::function<HttpReply(const nlohmann::json&)> respond;
  std::mutex mutex;
  std::map<std::pair<std::string, int>, int> calls;
  std::atomic<int> total{0};

  HttpReply post_json(const std::string&, const std::string& body,
                      const std::vector<std::pair<std::string, std::string>>&, std::chrono::seconds) override {
    const auto j = nlohmann::json::parse(body);
    {
      std::lock_guard lock(mutex);
      calls[{j["messages"][0]["content"].get<std::string>(), j.value("seed", 0)}]++;
    }
    ++total;
    return respond(j);
  }
};

}  // namespace

TEST_CASE("endpoint config validation") {
  auto c = fast_config("http://127.0.0.1:1/v1");
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.base_url = "";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.model_name = "";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.samples_per_item = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.top_p = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.parallelism = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.base_url = "ftp://x";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("request body carries the question verbatim") {
  ModelEndpointConfig c;
  c.base_url = "http://x/v1";
  c.model_name = "m";
  const std::string q = "Alice and Bob ... \\boxed{}.\n\"quoted\"";
  const auto body = build_request(c, q, 3);
  CHECK(body["model"] == "m");
  REQUIRE(body["messages"].size() == 1);
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"] == q);
  CHECK(body["temperature"] == 0.6);
  CHECK(body["top_p"] == 0.95);
  CHECK(body["max_tokens"] == 28000);
  CHECK_FALSE(body.contains("seed"));
  c.send_sample_seed = true;
  CHECK(build_request(c, q, 3)["seed"] == 3);
}

TEST_CASE("ledger persistence and resume") {
  const auto dir = scratch_dir("ledger");
  const auto items = showcase();
  {
    auto ledger = RunLedger::open(dir);
    ledger.ensure(items, 2);
    CHECK(ledger.size() == 8);
    CHECK(ledger.count(SampleStatus::pending) == 8);
    const RunLedger::Key key{items[0].item_id, 1};
    REQUIRE(ledger.claim(key));
    CHECK_FALSE(ledger.claim(key));
    LedgerEntry e;
    e.item_id = key.first;
    e.sample_index = 1;
    e.status = SampleStatus::done;
    e.raw_response = "line one\nline \"two\" \\boxed{G} ○";
    e.completion_tokens = 12;
    CHECK(ledger.record(e));
    e.raw_response = "overwrite";
    CHECK_FALSE(ledger.record(e));
    LedgerEntry f;
    f.item_id = items[1].item_id;
    f.sample_index = 2;
    f.status = SampleStatus::failed;
    f.error = "HTTP 500";
    f.payload = "<html>";
    CHECK(ledger.record(f));
  }
  {
    auto ledger = RunLedger::open(dir);
    ledger.ensure(items, 2);
    CHECK(ledger.size() == 8);
    CHECK(ledger.count(SampleStatus::done) == 1);
    CHECK(ledger.count(SampleStatus::failed) == 1);
    CHECK(ledger.pending().size() == 6);
    const auto done = ledger.find({items[0].item_id, 1});
    REQUIRE(done);
    CHECK(done->raw_response == "line one\nline \"two\" \\boxed{G} ○");
    CHECK(done->completion_tokens == 12);
    CHECK(ledger.find({items[1].item_id, 2})->payload == "<html>");
    ledger.compact();
  }
  CHECK(fs::exists(dir / "ledger.snapshot.json"));
  CHECK(fs::file_size(dir / "ledger.events.jsonl") == 0);
  {
    // Simulate a crash in the middle of an append.
    std::ofstream(dir / "ledger.events.jsonl", std::ios::app) << "{\"item_id\":\"" << items[2].item_id << "\",\"sam";
    auto ledger = RunLedger::open(dir);
    // Pending pairs are implicit until ensure() names them.
    CHECK(ledger.size() == 2);
    ledger.ensure(items, 2);
    CHECK(ledger.size() == 8);
    CHECK(ledger.count(SampleStatus::done) == 1);
    CHECK(ledger.find({items[0].item_id, 1})->raw_response.find("\\boxed{G}") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("full benchmark ledger holds every pair") {
  std::vector<BenchmarkItem> items;
  const auto base = showcase();
  for (std::size_t i = 0; i < 412; ++i) {
    auto it = base[i % 4];
    it.item_id += "-" + std::to_string(i);
    items.push_back(std::move(it));
  }
  RunLedger ledger;
  ledger.ensure(items, 16);
  CHECK(ledger.size() == 412 * 16);
  CHECK(ledger.pending().size() == 6592);
  ledger.ensure(items, 16);
  CHECK(ledger.size() == 6592);
}

TEST_CASE("each pair is requested once under concurrency") {
  std::vector<BenchmarkItem> items;
  const auto base = showcase();
  for (std::size_t i = 0; i < 40; ++i) {
    auto it = base[i % 4];
    it.item_id += "-" + std::to_string(i);
    it.question += " #" + std::to_string(i);
    items.push_back(std::move(it));
  }
  FakeTransport t;
  t.respond = [](const nlohmann::json&) { return HttpReply{200, reply_body("\\boxed{A}"), ""}; };
  auto c = fast_config("http://fake/v1");
  c.parallelism = 8;
  c.samples_per_item = 5;
  c.send_sample_seed = true;
  RunLedger ledger;
  const auto summary = collect(items, c, ledger, t);
  CHECK(summary.done == 200);
  CHECK(t.total == 200);
  CHECK(t.calls.size() == 200);
  for (const auto& [k, n] : t.calls) CHECK(n == 1);
  // A second pass has nothing left to send.
  const auto again = collect(items, c, ledger, t);
  CHECK(again.attempted == 0);
  CHECK(t.total == 200);
}

TEST_CASE("retries, malformed bodies and auth failures") {
  const auto items = showcase();
  auto c = fast_config("http://fake/v1");
  c.samples_per_item = 1;
  c.parallelism = 1;

  SUBCASE("transient statuses are retried") {
    FakeTransport t;
    std::atomic<int> n{0};
    t.respond = [&](const nlohmann::json&) {
      const int i = n++;
      if (i == 0) return HttpReply{503, "busy", ""};
      if (i == 1) return HttpReply{429, "slow down", ""};
      if (i == 2) return HttpReply{0, "", "connection refused"};
      return HttpReply{200, reply_body("ok \\boxed{C}"), ""};
    };
    RunLedger ledger;
    const auto s = collect(items, c, ledger, t);
    CHECK(s.done == 4);
    // Pairs are claimed in key order, so the first one absorbed every retry.
    CHECK(ledger.entries().front().attempts == 4);
    CHECK(ledger.entries().back().attempts == 1);
  }
  SUBCASE("retries give up after the attempt budget") {
    FakeTransport t;
    t.respond = [](const nlohmann::json&) { return HttpReply{502, "bad gateway", ""}; };
    RunLedger ledger;
    const auto s = collect(items, c, ledger, t);
    CHECK(s.failed == 4);
    CHECK(t.total == 4 * c.retry.max_attempts);
  }
  SUBCASE("client errors are not retried") {
    FakeTransport t;
    t.respond = [](const nlohmann::json&) { return HttpReply{400, "bad request", ""}; };
    RunLedger ledger;
    collect(items, c, ledger, t);
    CHECK(t.total == 4);
    CHECK(ledger.count(SampleStatus::failed) == 4);
  }
  SUBCASE("an unreadable 200 is a failed sample with its payload kept") {
    FakeTransport t;
    t.respond = [](const nlohmann::json&) { return HttpReply{200, "{\"choices\": []}", ""}; };
    RunLedger ledger;
    collect(items, c, ledger, t);
    const auto e = ledger.find({items[0].item_id, 1});
    REQUIRE(e);
    CHECK(e->status == SampleStatus::failed);
    CHECK(e->payload == "{\"choices\": []}");
    const auto records = export_records(ledger);
    REQUIRE(records.size() == 4);
    CHECK(records[0].raw_response.empty());
  }
  SUBCASE("401 aborts the run") {
    FakeTransport t;
    t.respond = [](const nlohmann::json&) { return HttpReply{401, "no", ""}; };
    RunLedger ledger;
    CHECK_THROWS_AS(collect(items, c, ledger, t), AuthError);
    CHECK(t.total == 1);
    CHECK(ledger.count(SampleStatus::pending) == 4);
  }
  SUBCASE("a stop request ends the run cleanly") {
    FakeTransport t;
    t.respond = [](const nlohmann::json&) { return HttpReply{200, reply_body("\\boxed{A}"), ""}; };
    RunLedger ledger;
    CollectOptions o;
    o.should_stop = [&] { return t.total >= 2; };
    const auto s = collect(items, c, ledger, t, o);
    CHECK(s.stopped_early);
    CHECK(ledger.count(SampleStatus::done) == 2);
    CHECK(ledger.count(SampleStatus::pending) == 2);
  }
}

TEST_CASE("end to end against the scripted endpoint") {
  const auto dir = scratch_dir("mock-e2e");
  const auto items = showcase();
  MockEndpoint mock(MockScript::load(kSource / "data/mock_script.json"));
  mock.start();
  auto c = fast_config(mock.base_url());
  c.send_sample_seed = true;
  HttpTransport http;
  {
    auto ledger = RunLedger::open(dir / "ledger");
    ledger.ensure(items, c.samples_per_item);
    CollectOptions o;
    o.request_limit = 5;
    const auto s = collect(items, c, ledger, http, o);
    CHECK(s.attempted == 5);
    CHECK(s.stopped_early);
  }
  {
    auto ledger = RunLedger::open(dir / "ledger");
    ledger.ensure(items, c.samples_per_item);
    CHECK(ledger.pending().size() == 11);
    const auto s = collect(items, c, ledger, http);
    CHECK(s.attempted == 11);
    CHECK(ledger.count(SampleStatus::pending) == 0);
    CHECK(ledger.count(SampleStatus::failed) == 4);

    auto records = export_records(ledger);
    REQUIRE(records.size() == 16);
    CHECK(std::is_sorted(records.begin(), records.end(), [](const auto& a, const auto& b) {
      return std::tie(a.item_id, a.sample_index) < std::tie(b.item_id, b.sample_index);
    }));
    const auto report = aggregate(records, items);
    CHECK(report.per_task.at(GameId::oTTT) == doctest::Approx(0.5));
    CHECK(report.per_task.at(GameId::dTTT) == doctest::Approx(1.0));
    CHECK(report.per_task.at(GameId::cTTT) == doctest::Approx(0.0));
    CHECK(report.per_task.at(GameId::sTTT) == doctest::Approx(0.5));
  }
  // 16 pairs plus the two scripted 503s.
  CHECK(mock.request_count() == 18);
  std::set<std::string> questions;
  for (const auto& req : mock.captured_requests()) {
    REQUIRE(req["messages"].size() == 1);
    questions.insert(req["messages"][0]["content"].get<std::string>());
  }
  std::set<std::string> expected;
  for (const auto& it : items) expected.insert(it.question);
  CHECK(questions == expected);
  mock.stop();
  fs::remove_all(dir);
}

TEST_CASE("single-sample mode and bearer tokens") {
  auto script = MockScript::load(kSource / "data/mock_script.json");
  script.fail_first_n = 0;
  script.api_key = "sekret";
  MockEndpoint mock(script);
  mock.start();
  const auto items = showcase();
  auto c = fast_config(mock.base_url());
  c.samples_per_item = 1;
  HttpTransport http;
  {
    RunLedger ledger;
    c.api_key_env = "";
    CHECK_THROWS_AS(collect(items, c, ledger, http), AuthError);
  }
  ::setenv("TTTBENCH_TEST_KEY", "sekret", 1);
  c.api_key_env = "TTTBENCH_TEST_KEY";
  RunLedger ledger;
  const auto s = collect(items, c, ledger, http);
  CHECK(s.total == 4);
  CHECK(ledger.count(SampleStatus::done) == 3);
  mock.stop();
}
