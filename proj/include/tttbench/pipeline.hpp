#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tttbench/dataset.hpp"
#include "tttbench/enumerator.hpp"
#include "tttbench/oracle.hpp"

namespace tttbench {

struct GenerateConfig {
  std::vector<GameId> games{kAllGames.begin(), kAllGames.end()};
  SamplingConfig sampling;
  std::string suffix = std::string(kDefaultAnswerSuffix);
  TemplateStyle style = TemplateStyle::prompt;
  bool symmetry_reduce = false;
  int jobs = 1;
  int fork_ply_bound = 3;
  SearchLimits limits;
};

struct ItemFailure {
  std::size_t line = 0;
  std::string item_id;
  std::string message;
};

struct GeneratedDataset {
  std::vector<BenchmarkItem> items;
  /// Pool statistics (before sampling) and the sampled distribution.
  nlohmann::ordered_json summary;
  std::vector<ItemFailure> failures;
  std::size_t inconclusive = 0;
};

/// enumerate -> sample -> order -> render -> oracle audit, per game in order.
/// Throws ConfigError when a requested pool is empty.
GeneratedDataset generate_dataset(const GenerateConfig& config,
                                  const std::function<void(const std::string&)>& log = {});

struct VerifyReport {
  std::size_t lines = 0;
  std::size_t passed = 0;
  std::size_t inconclusive = 0;
  std::vector<ItemFailure> failures;

  bool ok() const { return failures.empty() && inconclusive == 0; }
  nlohmann::ordered_json to_json() const;
};

/// Replays every line through the engine and the oracle. Unreadable files
/// throw IoError; malformed lines are reported as failures.
VerifyReport verify_dataset(const std::filesystem::path& path, int fork_ply_bound = 3,
                            const SearchLimits& limits = {});

/// Engine + oracle check of one already-parsed item; empty string when it passes.
std::string audit_item(const BenchmarkItem& item, int fork_ply_bound, const SearchLimits& limits,
                       bool* inconclusive = nullptr);

}  // namespace tttbench
