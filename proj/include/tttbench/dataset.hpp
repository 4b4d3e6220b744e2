#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tttbench/engine.hpp"
#include "tttbench/templates.hpp"

namespace tttbench {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

/// "Alice first places a white stone at A. Bob places ..." with each game's
/// frozen phrasing, followed by "Where should X play next?" and the suffix.
/// An empty suffix omits it. Throws InvalidMove on non-alternating moves.
std::string render_question(const GameSpec& spec, std::span<const Move> moves,
                            std::string_view suffix = kDefaultAnswerSuffix,
                            TemplateStyle style = TemplateStyle::prompt);

/// Labels of a winning set joined by '-': lines in board order, 4-sets walked
/// around their perimeter from the smallest label (e.g. A-C-G-E).
std::string format_winning_set(const GameSpec& spec, PositionSet set);

/// "Win with C-F-I", "Fork with A-D-G & G-H-I", "Block A-B-C".
std::string describe_justification(const GameSpec& spec, Verdict verdict,
                                   std::span<const PositionSet> sets);

struct BenchmarkItem {
  std::string item_id;
  GameId game{};
  int n_moves = 0;
  Player next_player = Player::Alice;
  std::vector<Move> moves;
  std::string question;
  PositionSet solutions;
  Verdict verdict = Verdict::Win;
  /// One human-readable string per solution move, in label order.
  std::vector<std::pair<int, std::string>> justification;
  nlohmann::ordered_json generator_metadata = nlohmann::ordered_json::object();
  /// Unknown fields from a loaded file, re-emitted after the known ones.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  const GameSpec& spec() const { return spec_for(game); }
  bool operator==(const BenchmarkItem&) const = default;
};

struct ItemOptions {
  std::string suffix = std::string(kDefaultAnswerSuffix);
  TemplateStyle style = TemplateStyle::prompt;
  std::uint64_t seed = 0;
  std::size_t sample_index = 0;
};

/// Builds an item for `state` from its computed solution.
BenchmarkItem make_item(const GameState& state, const SolutionRecord& solution,
                        const ItemOptions& options);

/// "<game>-n<N>-<alice hex>-<bob hex>-<index>".
std::string make_item_id(GameId game, const GameState& state, std::size_t sample_index);

nlohmann::ordered_json to_json(const BenchmarkItem& item);
/// Throws DataError on missing or ill-typed fields.
BenchmarkItem item_from_json(const nlohmann::ordered_json& j);

/// Checks field invariants and that replaying the moves through the engine
/// reproduces the stored solutions and verdict. Throws DataError naming the item.
void validate_item(const BenchmarkItem& item);

/// JSONL, fixed key order, one item per line. Validates the whole batch first;
/// nothing is written if any item fails. Returns the number of lines.
std::size_t emit_dataset(std::span<const BenchmarkItem> items, const std::filesystem::path& path);

struct LoadIssue {
  std::size_t line = 0;
  std::string item_id;
  std::string message;
};

struct LoadResult {
  std::vector<BenchmarkItem> items;
  std::vector<LoadIssue> issues;
};

/// Parses every line, collecting problems instead of stopping at the first.
LoadResult load_dataset_lenient(const std::filesystem::path& path);

/// Throws DataError at the first malformed line or replay mismatch.
std::vector<BenchmarkItem> load_dataset(const std::filesystem::path& path);

/// Fixed-width debug picture: grids with ○/● or the letter of an empty cell;
/// cubes as vertex lists per face.
std::string render_board_text(const GameState& state);

}  // namespace tttbench
