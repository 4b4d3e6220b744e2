#include "tttbench/evalclient.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <thread>
#include <unordered_map>

#include <httplib.h>

#include "tttbench/errors.hpp"

namespace tttbench {
namespace {

constexpr const char* kEventsFile = "ledger.events.jsonl";
constexpr const char* kSnapshotFile = "ledger.snapshot.json";

std::string now_iso() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

std::optional<SampleStatus> parse_status(std::string_view s) {
  if (s == "pending") return SampleStatus::pending;
  if (s == "done") return SampleStatus::done;
  if (s == "failed") return SampleStatus::failed;
  return std::nullopt;
}

bool retryable(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

struct ParsedCompletion {
  std::string content;
  std::optional<std::uint64_t> prompt_tokens;
  std::optional<std::uint64_t> completion_tokens;
};

std::optional<ParsedCompletion> parse_completion(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) return std::nullopt;
  const auto& content = first["message"].value("content", nlohmann::json());
  if (!content.is_string()) return std::nullopt;
  ParsedCompletion out{content.get<std::string>(), std::nullopt, std::nullopt};
  if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
    if (usage->contains("prompt_tokens") && (*usage)["prompt_tokens"].is_number_unsigned()) {
      out.prompt_tokens = (*usage)["prompt_tokens"].get<std::uint64_t>();
    }
    if (usage->contains("completion_tokens") && (*usage)["completion_tokens"].is_number_unsigned()) {
      out.completion_tokens = (*usage)["completion_tokens"].get<std::uint64_t>();
    }
  }
  return out;
}

}  // namespace

void ModelEndpointConfig::validate() const {
  if (base_url.empty()) throw ConfigError("endpoint base_url is required (--base-url)");
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw ConfigError("base_url must start with http:// or https://, got '" + base_url + "'");
  }
  if (model_name.empty()) throw ConfigError("model name is required (--model)");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
  if (max_response_tokens < 1) throw ConfigError("max_response_tokens must be >= 1");
  if (samples_per_item < 1) throw ConfigError("samples per item (k) must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (retry.max_attempts < 1) throw ConfigError("retry max_attempts must be >= 1");
  if (retry.backoff_base.count() < 0) throw ConfigError("retry backoff must be >= 0");
}

nlohmann::json build_request(const ModelEndpointConfig& config, const std::string& question,
                             int sample_index) {
  nlohmann::json body{{"model", config.model_name},
                      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", question}}})},
                      {"temperature", config.temperature},
                      {"top_p", config.top_p},
                      {"max_tokens", config.max_response_tokens}};
  if (config.send_sample_seed) body["seed"] = sample_index;
  return body;
}

std::string_view to_string(SampleStatus s) {
  switch (s) {
    case SampleStatus::pending: return "pending";
    case SampleStatus::done: return "done";
    case SampleStatus::failed: return "failed";
  }
  return "?";
}

nlohmann::json to_json(const LedgerEntry& e) {
  nlohmann::json j{{"item_id", e.item_id},
                   {"sample_index", e.sample_index},
                   {"status", to_string(e.status)},
                   {"raw_response", e.raw_response},
                   {"attempts", e.attempts},
                   {"created_at", e.created_at},
                   {"updated_at", e.updated_at}};
  if (e.prompt_tokens) j["prompt_tokens"] = *e.prompt_tokens;
  if (e.completion_tokens) j["completion_tokens"] = *e.completion_tokens;
  if (!e.error.empty()) j["error"] = e.error;
  if (!e.payload.empty()) j["payload"] = e.payload;
  return j;
}

LedgerEntry ledger_entry_from_json(const nlohmann::json& j) {
  LedgerEntry e;
  try {
    e.item_id = j.at("item_id").get<std::string>();
    e.sample_index = j.at("sample_index").get<int>();
    const auto status = parse_status(j.at("status").get<std::string>());
    if (!status) throw DataError("unknown ledger status " + j.at("status").dump());
    e.status = *status;
    e.raw_response = j.value("raw_response", std::string());
    e.attempts = j.value("attempts", 0);
    e.created_at = j.value("created_at", std::string());
    e.updated_at = j.value("updated_at", std::string());
    if (j.contains("prompt_tokens")) e.prompt_tokens = j["prompt_tokens"].get<std::uint64_t>();
    if (j.contains("completion_tokens")) e.completion_tokens = j["completion_tokens"].get<std::uint64_t>();
    e.error = j.value("error", std::string());
    e.payload = j.value("payload", std::string());
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed ledger entry: ") + ex.what());
  }
  return e;
}

RunLedger::RunLedger(std::string run_id) : run_id_(std::move(run_id)), mutex_(std::make_unique<std::mutex>()) {}
RunLedger::RunLedger(RunLedger&&) noexcept = default;
RunLedger& RunLedger::operator=(RunLedger&&) noexcept = default;
RunLedger::~RunLedger() = default;

RunLedger RunLedger::open(const std::filesystem::path& dir, const std::string& run_id) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create ledger directory " + dir.string() + ": " + ec.message());

  RunLedger ledger(run_id);
  ledger.dir_ = dir;

  const auto snapshot = dir / kSnapshotFile;
  if (std::filesystem::exists(snapshot)) {
    std::ifstream in(snapshot, std::ios::binary);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError("corrupt ledger snapshot " + snapshot.string());
    ledger.run_id_ = j.value("run_id", run_id);
    for (const auto& e : j.value("entries", nlohmann::json::array())) ledger.apply(ledger_entry_from_json(e));
  }

  const auto events = dir / kEventsFile;
  if (std::filesystem::exists(events)) {
    std::ifstream in(events, std::ios::binary);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const auto j = nlohmann::json::parse(lines[i], nullptr, false);
      if (j.is_discarded()) {
        // A torn final line from an interrupted write is dropped.
        if (i + 1 == lines.size()) break;
        throw DataError(events.string() + ":" + std::to_string(i + 1) + ": corrupt ledger event");
      }
      ledger.apply(ledger_entry_from_json(j));
    }
  }
  ledger.events_ = std::make_unique<std::ofstream>(events, std::ios::binary | std::ios::app);
  if (!*ledger.events_) throw IoError("cannot append to " + events.string());
  return ledger;
}

void RunLedger::apply(LedgerEntry e) {
  Key key{e.item_id, e.sample_index};
  auto it = entries_.find(key);
  if (it != entries_.end() && it->second.status == SampleStatus::done) return;
  entries_[key] = std::move(e);
}

void RunLedger::append_event(const LedgerEntry& e) {
  if (!events_) return;
  *events_ << to_json(e).dump() << '\n';
  events_->flush();
  if (!*events_) throw IoError("ledger write failed");
}

void RunLedger::ensure(std::span<const BenchmarkItem> items, int k) {
  std::lock_guard lock(*mutex_);
  const std::string now = now_iso();
  for (const auto& item : items) {
    for (int i = 1; i <= k; ++i) {
      Key key{item.item_id, i};
      if (entries_.count(key)) continue;
      LedgerEntry e;
      e.item_id = item.item_id;
      e.sample_index = i;
      e.created_at = e.updated_at = now;
      entries_.emplace(std::move(key), std::move(e));
    }
  }
}

bool RunLedger::claim(const Key& key) {
  std::lock_guard lock(*mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.status != SampleStatus::pending) return false;
  return claimed_.insert(key).second;
}

bool RunLedger::record(LedgerEntry entry) {
  if (entry.status == SampleStatus::pending) throw std::invalid_argument("record() needs a terminal status");
  std::lock_guard lock(*mutex_);
  Key key{entry.item_id, entry.sample_index};
  claimed_.erase(key);
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    if (it->second.status == SampleStatus::done) return false;
    if (entry.created_at.empty()) entry.created_at = it->second.created_at;
  }
  entry.updated_at = now_iso();
  if (entry.created_at.empty()) entry.created_at = entry.updated_at;
  append_event(entry);
  entries_[key] = std::move(entry);
  return true;
}

void RunLedger::release(const Key& key) {
  std::lock_guard lock(*mutex_);
  claimed_.erase(key);
}

void RunLedger::compact() {
  std::lock_guard lock(*mutex_);
  if (!dir_) return;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [key, e] : entries_) {
    if (e.status != SampleStatus::pending) entries.push_back(to_json(e));
  }
  const nlohmann::json snap{{"run_id", run_id_}, {"entries", entries}};
  const auto target = *dir_ / kSnapshotFile;
  const auto tmp = *dir_ / (std::string(kSnapshotFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << snap.dump(1) << '\n';
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
  events_ = std::make_unique<std::ofstream>(*dir_ / kEventsFile, std::ios::binary | std::ios::trunc);
}

std::vector<LedgerEntry> RunLedger::entries() const {
  std::lock_guard lock(*mutex_);
  std::vector<LedgerEntry> out;
  out.reserve(entries_.size());
  for (const auto& [key, e] : entries_) out.push_back(e);
  return out;
}

std::optional<LedgerEntry> RunLedger::find(const Key& key) const {
  std::lock_guard lock(*mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::size_t RunLedger::size() const {
  std::lock_guard lock(*mutex_);
  return entries_.size();
}

std::size_t RunLedger::count(SampleStatus s) const {
  std::lock_guard lock(*mutex_);
  std::size_t n = 0;
  for (const auto& [key, e] : entries_) n += e.status == s;
  return n;
}

std::vector<RunLedger::Key> RunLedger::pending() const {
  std::lock_guard lock(*mutex_);
  std::vector<Key> out;
  for (const auto& [key, e] : entries_) {
    if (e.status == SampleStatus::pending) out.push_back(key);
  }
  return out;
}

HttpReply HttpTransport::post_json(const std::string& url, const std::string& body,
                                   const std::vector<std::pair<std::string, std::string>>& headers,
                                   std::chrono::seconds timeout) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return {0, "", "bad url " + url};
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(timeout);
  client.set_write_timeout(std::chrono::seconds(60));
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(path, h, body, "application/json");
  if (!res) return {0, "", httplib::to_string(res.error())};
  return {res->status, res->body, ""};
}

CollectSummary collect(std::span<const BenchmarkItem> items, const ModelEndpointConfig& config,
                       RunLedger& ledger, Transport& transport, const CollectOptions& options) {
  config.validate();
  ledger.ensure(items, config.samples_per_item);

  std::unordered_map<std::string, const BenchmarkItem*> by_id;
  for (const auto& item : items) by_id.emplace(item.item_id, &item);

  std::vector<std::pair<std::string, std::string>> headers;
  if (!config.api_key_env.empty()) {
    if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
      headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
  }
  std::string url = config.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";

  std::vector<RunLedger::Key> work;
  for (auto& key : ledger.pending()) {
    if (by_id.count(key.first)) work.push_back(std::move(key));
  }

  CollectSummary summary;
  summary.total = work.size();
  std::atomic<std::size_t> next{0}, attempted{0}, finished{0}, done{0}, failed{0};
  std::atomic<bool> abort{false}, stopped{false};
  std::mutex error_mutex;
  std::string auth_error;

  auto run_one = [&](const RunLedger::Key& key) {
    const BenchmarkItem& item = *by_id.at(key.first);
    const std::string body = build_request(config, item.question, key.second).dump();
    LedgerEntry entry;
    entry.item_id = key.first;
    entry.sample_index = key.second;
    entry.status = SampleStatus::failed;

    for (int attempt = 1; attempt <= config.retry.max_attempts; ++attempt) {
      entry.attempts = attempt;
      const HttpReply reply = transport.post_json(url, body, headers, config.timeout);
      if (reply.status == 401 || reply.status == 403) {
        std::lock_guard lock(error_mutex);
        auth_error = "endpoint rejected credentials (HTTP " + std::to_string(reply.status) + ")";
        if (!config.api_key_env.empty() && headers.empty()) {
          auth_error += "; environment variable " + config.api_key_env + " is not set";
        }
        abort = true;
        ledger.release(key);
        return;
      }
      if (reply.status == 200) {
        if (auto parsed = parse_completion(reply.body)) {
          entry.status = SampleStatus::done;
          entry.raw_response = std::move(parsed->content);
          entry.prompt_tokens = parsed->prompt_tokens;
          entry.completion_tokens = parsed->completion_tokens;
          entry.error.clear();
        } else {
          entry.error = "malformed completion response";
          entry.payload = reply.body;
        }
        break;
      }
      entry.error = reply.status == 0 ? "transport error: " + reply.error
                                      : "HTTP " + std::to_string(reply.status);
      entry.payload = reply.body;
      if (!retryable(reply.status) || attempt == config.retry.max_attempts) break;
      const auto delay = config.retry.backoff_base * (1LL << std::min(attempt - 1, 20));
      std::this_thread::sleep_for(delay);
    }
    ledger.record(entry);
    (entry.status == SampleStatus::done ? done : failed)++;
    const std::size_t f = ++finished;
    if (options.on_progress) options.on_progress(f, work.size());
  };

  auto worker = [&] {
    while (!abort) {
      if (options.should_stop && options.should_stop()) {
        stopped = true;
        return;
      }
      const std::size_t i = next++;
      if (i >= work.size()) return;
      if (!ledger.claim(work[i])) continue;
      if (attempted++ >= options.request_limit && options.request_limit) {
        ledger.release(work[i]);
        stopped = true;
        return;
      }
      run_one(work[i]);
    }
  };

  const int n_threads = std::max(1, std::min<int>(config.parallelism, static_cast<int>(work.size())));
  std::vector<std::thread> threads;
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  if (abort) throw AuthError(auth_error);
  summary.attempted = done + failed;
  summary.done = done;
  summary.failed = failed;
  summary.stopped_early = stopped && finished < work.size();
  return summary;
}

std::vector<EvalRecord> export_records(const RunLedger& ledger) {
  std::vector<EvalRecord> out;
  for (const auto& e : ledger.entries()) {
    if (e.status == SampleStatus::pending) continue;
    EvalRecord r;
    r.item_id = e.item_id;
    r.sample_index = e.sample_index;
    if (e.status == SampleStatus::done) {
      r.raw_response = e.raw_response;
      r.response_tokens = e.completion_tokens;
    }
    r.response_chars = count_characters(r.raw_response);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tttbench
