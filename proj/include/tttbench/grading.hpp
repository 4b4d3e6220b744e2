#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tttbench/dataset.hpp"

namespace tttbench {

/// Final answer from the last \boxed{...} in a response: wrappers such as
/// \text{} and punctuation are stripped, the rest must be one letter A-Y.
std::optional<char> extract_answer(std::string_view response);

struct EvalRecord {
  std::string item_id;
  int sample_index = 1;
  std::string raw_response;
  std::optional<char> extracted_answer;
  bool correct = false;
  std::size_t response_chars = 0;
  std::optional<std::uint64_t> response_tokens;
};

nlohmann::json to_json(const EvalRecord& record);
/// Throws DataError on missing or ill-typed fields.
EvalRecord record_from_json(const nlohmann::json& j);
/// One record per line.
void write_records(std::span<const EvalRecord> records, const std::filesystem::path& path);
std::vector<EvalRecord> read_records(const std::filesystem::path& path);

/// Number of UTF-8 code points.
std::size_t count_characters(std::string_view text);

/// Fills extraction, correctness and character length of `record` against `item`.
void grade_record(EvalRecord& record, const BenchmarkItem& item);

/// Mean correctness over the item's k records. Throws std::invalid_argument
/// on k = 0 or records belonging to another item.
double score_item(const BenchmarkItem& item, std::span<const EvalRecord> records);

struct LengthStats {
  std::size_t responses = 0;
  double mean_chars = 0.0;
  double stddev_chars = 0.0;
  std::optional<double> mean_tokens;
  std::optional<double> stddev_tokens;
};

struct Report {
  std::map<std::string, double> per_item;
  std::map<GameId, double> per_task;
  std::map<std::pair<GameId, Verdict>, double> per_task_verdict;
  std::map<GameId, LengthStats> lengths;
  std::map<GameId, std::size_t> items_scored;

  nlohmann::json to_json() const;
  static Report from_json(const nlohmann::json& j);
  /// task,pass1 rows (fractions).
  std::string per_task_csv() const;
  /// task,verdict,pass1 rows (fractions).
  std::string per_verdict_csv() const;
};

/// Grades every record and macro-averages: item Pass@1 is the mean over its
/// samples, task Pass@1 the mean over its items. Items without records are
/// left out. Throws DataError for records naming unknown items.
Report aggregate(std::vector<EvalRecord>& records, std::span<const BenchmarkItem> items);

/// Scores keyed by model then benchmark, in percentage points.
using ScoreTable = std::map<std::string, std::map<std::string, double>>;

/// CSV with header model,benchmark,pass1. Throws DataError on malformed rows.
ScoreTable load_score_csv(const std::filesystem::path& path);
ScoreTable parse_score_csv(std::string_view text);

struct DeltaRow {
  std::string model;
  std::string x;
  std::string y;
  double delta = 0.0;
};

/// x - y for every model in `task_scores` and every requested (x, y) pair;
/// x is read from task_scores, y from reference. Throws DataError on a missing key.
std::vector<DeltaRow> delta_pass1(const ScoreTable& task_scores, const ScoreTable& reference,
                                  std::span<const std::pair<std::string, std::string>> pairs);

}  // namespace tttbench
