#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tttbench/position_set.hpp"
#include "tttbench/topology.hpp"

namespace tttbench {

/// Alice always moves first and plays white.
enum class Player : std::uint8_t { Alice, Bob };

constexpr Player other(Player p) { return p == Player::Alice ? Player::Bob : Player::Alice; }
std::string_view to_string(Player p);
std::optional<Player> parse_player(std::string_view text);

struct Move {
  int cell = 0;
  Player player = Player::Alice;
  bool operator==(const Move&) const = default;
};

/// Value-semantic game position: the alternating move list plus occupancy.
class GameState {
 public:
  explicit GameState(GameId game);

  /// Replays labels alternately from Alice, e.g. "ABHC".
  static GameState from_labels(GameId game, std::string_view labels);
  static GameState from_moves(GameId game, std::span<const Move> moves);

  const GameSpec& spec() const { return *spec_; }
  GameId game() const { return spec_->id; }
  const std::vector<Move>& moves() const { return moves_; }
  int move_count() const { return static_cast<int>(moves_.size()); }

  Player to_move() const { return move_count() % 2 == 0 ? Player::Alice : Player::Bob; }
  PositionSet positions_of(Player p) const { return p == Player::Alice ? alice_ : bob_; }
  /// P^c: stones of the player about to move.
  PositionSet current_positions() const { return positions_of(to_move()); }
  /// P^o: stones of the player who moved last.
  PositionSet opponent_positions() const { return positions_of(other(to_move())); }
  PositionSet available() const { return spec_->all_positions() - (alice_ | bob_); }

  /// True when either player holds a complete winning set.
  bool decided() const;
  /// Board full and nobody won.
  bool is_draw() const;

  /// Throws InvalidMove on an occupied or unknown cell, or a decided game.
  GameState apply(int cell) const;

  bool operator==(const GameState& o) const {
    return spec_ == o.spec_ && moves_ == o.moves_;
  }

 private:
  const GameSpec* spec_;
  std::vector<Move> moves_;
  PositionSet alice_;
  PositionSet bob_;
};

GameState apply_move(const GameState& state, char label);

enum class Verdict : std::uint8_t { Win, Blocked, Fork };

inline constexpr std::array<Verdict, 3> kAllVerdicts{Verdict::Win, Verdict::Blocked, Verdict::Fork};

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view text);

/// Next-best moves with the winning sets backing each one: the completed set
/// for Win, the opponent's threatened set for Blocked, the threat sets created
/// for Fork.
struct SolutionRecord {
  PositionSet moves;
  Verdict verdict = Verdict::Win;
  std::vector<std::pair<int, std::vector<PositionSet>>> justification;

  const std::vector<PositionSet>& sets_for(int cell) const;
};

/// Moves + verdict without justification; what pools store.
struct Classification {
  PositionSet moves;
  Verdict verdict = Verdict::Win;
  bool operator==(const Classification&) const = default;
};

bool check_won(PositionSet player, const GameSpec& spec);

/// Every available cell that completes a winning set for `player`.
PositionSet get_wins(PositionSet player, PositionSet available, const GameSpec& spec);

/// Every available cell a such that, with a added, at least two winning sets
/// are one stone short and their missing stone is still available.
PositionSet get_forks(PositionSet player, PositionSet available, const GameSpec& spec);

/// Winning sets that are one stone short for `player` with the last stone in
/// `available`.
std::vector<PositionSet> open_threats(PositionSet player, PositionSet available,
                                      const GameSpec& spec);

/// The last mover already has two or more immediate winning moves.
bool has_winning_fork(PositionSet last_mover, PositionSet available, const GameSpec& spec);

/// Win, then Blocked (exactly one opponent winning cell; two or more gives no
/// answer), then Fork.
std::optional<Classification> classify(PositionSet current, PositionSet opponent,
                                       PositionSet available, const GameSpec& spec);

/// Throws InvalidMove if the state is already won.
std::optional<SolutionRecord> get_solution(const GameState& state);

/// Adds justification sets to a classification of `state`.
SolutionRecord justify(const GameState& state, const Classification& result);

}  // namespace tttbench
