#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tttbench/dataset.hpp"
#include "tttbench/grading.hpp"

namespace tttbench {

struct RetryPolicy {
  int max_attempts = 4;
  /// Delay before retry r (1-based) is backoff_base * 2^(r-1).
  std::chrono::milliseconds backoff_base{1000};
};

struct ModelEndpointConfig {
  /// e.g. "https://api.openai.com/v1"; requests go to base_url + "/chat/completions".
  std::string base_url;
  std::string model_name;
  /// Name of the environment variable holding the API key. Empty: no auth header.
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.6;
  double top_p = 0.95;
  int max_response_tokens = 28000;
  int samples_per_item = 16;
  int parallelism = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{900};
  /// Sends "seed": sample_index with each request so reruns are repeatable
  /// where the endpoint honours it.
  bool send_sample_seed = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Chat-completions body: one user message carrying the question verbatim.
nlohmann::json build_request(const ModelEndpointConfig& config, const std::string& question,
                             int sample_index);

enum class SampleStatus { pending, done, failed };
std::string_view to_string(SampleStatus s);

struct LedgerEntry {
  std::string item_id;
  int sample_index = 1;
  SampleStatus status = SampleStatus::pending;
  std::string raw_response;
  std::optional<std::uint64_t> prompt_tokens;
  std::optional<std::uint64_t> completion_tokens;
  std::string error;
  /// Response body kept verbatim when it could not be understood.
  std::string payload;
  int attempts = 0;
  std::string created_at;
  std::string updated_at;
};

nlohmann::json to_json(const LedgerEntry& e);
LedgerEntry ledger_entry_from_json(const nlohmann::json& j);

/// Per-(item, sample) request outcomes. Directory-backed ledgers append one
/// JSON line per change to ledger.events.jsonl and can be compacted into
/// ledger.snapshot.json; reopening replays snapshot then events.
class RunLedger {
 public:
  using Key = std::pair<std::string, int>;

  explicit RunLedger(std::string run_id = "run");
  /// Creates the directory if needed and loads any previous state.
  static RunLedger open(const std::filesystem::path& dir, const std::string& run_id = "run");

  RunLedger(RunLedger&&) noexcept;
  RunLedger& operator=(RunLedger&&) noexcept;
  ~RunLedger();

  const std::string& run_id() const { return run_id_; }

  /// Adds pending entries for samples 1..k of every item that has none yet.
  void ensure(std::span<const BenchmarkItem> items, int k);

  /// Reserves a pending pair for one worker. False if it is not pending or
  /// already claimed.
  bool claim(const Key& key);
  /// Stores a terminal outcome and releases the claim. Done entries are never
  /// overwritten; returns false when the write was refused.
  bool record(LedgerEntry entry);
  void release(const Key& key);

  /// Rewrites the snapshot and truncates the event log.
  void compact();

  std::vector<LedgerEntry> entries() const;
  std::optional<LedgerEntry> find(const Key& key) const;
  std::size_t size() const;
  std::size_t count(SampleStatus s) const;
  std::vector<Key> pending() const;

 private:
  void append_event(const LedgerEntry& e);
  void apply(LedgerEntry e);

  std::string run_id_;
  std::optional<std::filesystem::path> dir_;
  std::unique_ptr<std::ofstream> events_;
  mutable std::unique_ptr<std::mutex> mutex_;
  std::map<Key, LedgerEntry> entries_;
  std::set<Key> claimed_;
};

struct HttpReply {
  /// 0 when the request never produced an HTTP status (connect error, timeout).
  int status = 0;
  std::string body;
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpReply post_json(const std::string& url, const std::string& body,
                              const std::vector<std::pair<std::string, std::string>>& headers,
                              std::chrono::seconds timeout) = 0;
};

/// cpp-httplib client; http and https URLs.
class HttpTransport : public Transport {
 public:
  HttpReply post_json(const std::string& url, const std::string& body,
                      const std::vector<std::pair<std::string, std::string>>& headers,
                      std::chrono::seconds timeout) override;
};

struct CollectOptions {
  /// Polled before each new request; true stops the run cleanly.
  std::function<bool()> should_stop;
  /// Stop after this many pairs have been attempted (0 = no limit).
  std::size_t request_limit = 0;
  /// Progress callback (finished, total).
  std::function<void(std::size_t, std::size_t)> on_progress;
};

struct CollectSummary {
  std::size_t total = 0;
  std::size_t attempted = 0;
  std::size_t done = 0;
  std::size_t failed = 0;
  bool stopped_early = false;
};

/// Requests every pending (item, sample) pair with bounded parallelism and
/// retries. Throws AuthError (after draining workers) on 401/403, ConfigError
/// on a bad config.
CollectSummary collect(std::span<const BenchmarkItem> items, const ModelEndpointConfig& config,
                       RunLedger& ledger, Transport& transport, const CollectOptions& options = {});

/// Records sorted by (item, sample); failed entries carry an empty response.
/// Pending entries are skipped.
std::vector<EvalRecord> export_records(const RunLedger& ledger);

}  // namespace tttbench
