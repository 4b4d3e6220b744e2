#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tttbench/position_set.hpp"

namespace tttbench {

enum class GameId : std::uint8_t { oTTT, dTTT, cTTT, sTTT };

inline constexpr std::array<GameId, 4> kAllGames{GameId::oTTT, GameId::dTTT, GameId::cTTT,
                                                 GameId::sTTT};

std::string_view to_string(GameId game);
std::optional<GameId> parse_game_id(std::string_view text);

/// Integer lattice point. Grid boards use (row, col) with row 0 at the top;
/// the cube board uses (x, y, z).
struct Coordinate {
  int dims = 2;
  std::array<int, 3> v{};

  static constexpr Coordinate grid(int row, int col) { return {2, {row, col, 0}}; }
  static constexpr Coordinate space(int x, int y, int z) { return {3, {x, y, z}}; }

  bool operator==(const Coordinate&) const = default;
};

/// Immutable description of one game variant. Cell i carries label 'A' + i.
struct GameSpec {
  GameId id{};
  std::string labels;
  std::vector<Coordinate> coordinates;
  int win_size = 0;
  /// Sorted by bitmask, no duplicates.
  std::vector<PositionSet> winning_sets;
  std::vector<int> n_schedule;
  /// Rules preamble in the default question style.
  std::string rules_text;

  int total_positions() const { return static_cast<int>(labels.size()); }
  int winning_set_count() const { return static_cast<int>(winning_sets.size()); }
  PositionSet all_positions() const { return PositionSet::first_n(total_positions()); }

  char label(int cell) const { return labels.at(static_cast<std::size_t>(cell)); }
  std::optional<int> find_cell(char label) const;
  /// Throws InvalidMove for labels that are not on this board.
  int cell(char label) const;
  /// Parses a run of labels such as "AHG"; separators ',', '-', ' ' are skipped.
  PositionSet parse_positions(std::string_view letters) const;
  /// Labels in cell order, no separators.
  std::string letters(PositionSet positions) const;
};

/// Builds the full spec; geometric boards derive their winning sets.
GameSpec build_spec(GameId game);

/// Shared immutable instance, built once.
const GameSpec& spec_for(GameId game);

/// All 3-in-a-row lines of one 3x3 grid. `cells` lists the 9 cells of the grid
/// and `coords` is indexed by cell.
std::vector<PositionSet> derive_grid_lines(const std::vector<Coordinate>& coords,
                                           const std::vector<int>& cells);

/// Coplanar 4-vertex sets of two unit cubes sharing a face: cube 1 spans
/// x in {0,1} and cube 2 spans x in {1,2}, y and z in {0,1}. Throws
/// std::invalid_argument when the coordinates are not that shape.
std::vector<PositionSet> derive_cube_planes(const std::vector<Coordinate>& coords);

/// Unit squares and side-sqrt(2) diagonal squares on the 5x5 lattice. Throws
/// std::invalid_argument unless coords is exactly the 25 lattice points.
std::vector<PositionSet> derive_squares_5x5(const std::vector<Coordinate>& coords);

/// Audit export: labels, coordinates, winning sets.
nlohmann::json spec_to_json(const GameSpec& spec);

}  // namespace tttbench
