#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tttbench/engine.hpp"

namespace tttbench {

enum class Claim : std::uint8_t { win_in_1, must_block, forced_win };
enum class ProofOutcome : std::uint8_t { pass, fail, inconclusive };

std::string_view to_string(Claim c);
std::string_view to_string(ProofOutcome o);

struct SearchLimits {
  std::uint64_t node_budget = 50'000'000;
  bool use_transposition_table = true;
};

struct ProofResult {
  GameState state;
  int move = 0;
  Claim claim = Claim::win_in_1;
  ProofOutcome outcome = ProofOutcome::fail;
  int ply_bound = 1;
  std::uint64_t nodes_expanded = 0;

  bool passed() const { return outcome == ProofOutcome::pass; }
};

/// The mover completes a winning set with `move`.
ProofResult verify_win(const GameState& state, int move);

/// The opponent had an immediate winning move before `move` and has none after.
ProofResult verify_block(const GameState& state, int move);

/// After `move`, the mover wins against every defence within `ply_bound`
/// plies counted from `move` itself (3 = move, reply, winning move).
/// Exceeding the node budget yields `inconclusive`.
ProofResult verify_forced_win(const GameState& state, int move, int ply_bound,
                              const SearchLimits& limits = {});

enum class GameValue : std::uint8_t { first_player_win, second_player_win, draw };
std::string_view to_string(GameValue v);

struct ExactSolution {
  /// Empty when the node budget ran out.
  std::optional<GameValue> value;
  /// Moves that keep the game value for the player to move.
  PositionSet optimal_moves;
  std::uint64_t nodes_expanded = 0;
};

/// Full game-tree value under optimal play; a full board without a winner is a draw.
ExactSolution solve_exact(const GameState& state, const SearchLimits& limits = {});

/// Verdict-appropriate check of a claimed solution against exact search:
/// Win moves are exactly the cells passing verify_win, the Blocked move is the
/// unique cell passing verify_block, each Fork move passes verify_forced_win.
struct SolutionAudit {
  ProofOutcome outcome = ProofOutcome::pass;
  std::vector<ProofResult> proofs;
  std::string detail;
  std::uint64_t nodes_expanded = 0;

  nlohmann::json to_json() const;
};

SolutionAudit audit_solution(const GameState& state, const Classification& claimed,
                             int fork_ply_bound = 3, const SearchLimits& limits = {});

}  // namespace tttbench
