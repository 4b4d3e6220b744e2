#include "tttbench/engine.hpp"

#include <array>

#include "tttbench/errors.hpp"

namespace tttbench {

std::string_view to_string(Player p) { return p == Player::Alice ? "Alice" : "Bob"; }

std::optional<Player> parse_player(std::string_view text) {
  if (text == "Alice") return Player::Alice;
  if (text == "Bob") return Player::Bob;
  return std::nullopt;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Win: return "Win";
    case Verdict::Blocked: return "Blocked";
    case Verdict::Fork: return "Fork";
  }
  return "?";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  for (Verdict v : kAllVerdicts) {
    if (to_string(v) == text) return v;
  }
  return std::nullopt;
}

GameState::GameState(GameId game) : spec_(&spec_for(game)) {}

GameState GameState::from_labels(GameId game, std::string_view labels) {
  GameState state(game);
  for (char ch : labels) {
    if (ch == ',' || ch == ' ') continue;
    state = state.apply(state.spec().cell(ch));
  }
  return state;
}

GameState GameState::from_moves(GameId game, std::span<const Move> moves) {
  GameState state(game);
  for (const Move& m : moves) {
    if (m.player != state.to_move()) {
      throw InvalidMove("moves must alternate starting with Alice (move " +
                        std::to_string(state.move_count() + 1) + ")");
    }
    state = state.apply(m.cell);
  }
  return state;
}

bool GameState::decided() const {
  return check_won(alice_, *spec_) || check_won(bob_, *spec_);
}

bool GameState::is_draw() const { return available().empty() && !decided(); }

GameState GameState::apply(int cell) const {
  if (cell < 0 || cell >= spec_->total_positions()) {
    throw InvalidMove("cell " + std::to_string(cell) + " is not on the " +
                      std::string(tttbench::to_string(spec_->id)) + " board");
  }
  if (!available().contains(cell)) {
    throw InvalidMove(std::string("position ") + spec_->label(cell) + " is already occupied");
  }
  if (decided()) throw InvalidMove("the game is already decided");
  GameState next = *this;
  const Player mover = to_move();
  next.moves_.push_back({cell, mover});
  if (mover == Player::Alice) {
    next.alice_ = next.alice_.with(cell);
  } else {
    next.bob_ = next.bob_.with(cell);
  }
  return next;
}

GameState apply_move(const GameState& state, char label) {
  return state.apply(state.spec().cell(label));
}

const std::vector<PositionSet>& SolutionRecord::sets_for(int cell) const {
  for (const auto& [move, sets] : justification) {
    if (move == cell) return sets;
  }
  static const std::vector<PositionSet> kNone;
  return kNone;
}

bool check_won(PositionSet player, const GameSpec& spec) {
  for (PositionSet w : spec.winning_sets) {
    if (player.contains_all(w)) return true;
  }
  return false;
}

PositionSet get_wins(PositionSet player, PositionSet available, const GameSpec& spec) {
  // A player who already won "wins" with any move.
  if (check_won(player, spec)) return available;
  PositionSet wins;
  for (PositionSet w : spec.winning_sets) {
    const PositionSet missing = w - player;
    if (missing.size() == 1 && available.contains_all(missing)) wins |= missing;
  }
  return wins;
}

PositionSet get_forks(PositionSet player, PositionSet available, const GameSpec& spec) {
  // For a candidate a, a set counts when |W & (P+a)| = n-1 and its last cell is
  // in A-a. Sets already one short (missing m available) count for every a != m;
  // sets two short with both cells available count for those two cells.
  const int n = spec.win_size;
  std::array<int, 32> count{};
  int one_short = 0;
  for (PositionSet w : spec.winning_sets) {
    const int have = (w & player).size();
    const PositionSet missing = w - player;
    if (!available.contains_all(missing)) continue;
    if (have == n - 1) {
      ++one_short;
      --count[static_cast<std::size_t>(missing.front())];
    } else if (have == n - 2) {
      for (int m : missing) ++count[static_cast<std::size_t>(m)];
    }
  }
  PositionSet forks;
  for (int a : available) {
    if (one_short + count[static_cast<std::size_t>(a)] >= 2) forks = forks.with(a);
  }
  return forks;
}

std::vector<PositionSet> open_threats(PositionSet player, PositionSet available,
                                      const GameSpec& spec) {
  std::vector<PositionSet> threats;
  for (PositionSet w : spec.winning_sets) {
    const PositionSet missing = w - player;
    if (missing.size() == 1 && available.contains_all(missing)) threats.push_back(w);
  }
  return threats;
}

bool has_winning_fork(PositionSet last_mover, PositionSet available, const GameSpec& spec) {
  return get_wins(last_mover, available, spec).size() >= 2;
}

std::optional<Classification> classify(PositionSet current, PositionSet opponent,
                                       PositionSet available, const GameSpec& spec) {
  if (PositionSet wins = get_wins(current, available, spec); !wins.empty()) {
    return Classification{wins, Verdict::Win};
  }
  const PositionSet threats = get_wins(opponent, available, spec);
  if (threats.size() == 1) return Classification{threats, Verdict::Blocked};
  if (threats.size() >= 2) return std::nullopt;
  if (PositionSet forks = get_forks(current, available, spec); !forks.empty()) {
    return Classification{forks, Verdict::Fork};
  }
  return std::nullopt;
}

SolutionRecord justify(const GameState& state, const Classification& result) {
  const GameSpec& spec = state.spec();
  const PositionSet current = state.current_positions();
  const PositionSet opponent = state.opponent_positions();
  const PositionSet available = state.available();

  SolutionRecord record{result.moves, result.verdict, {}};
  for (int m : result.moves) {
    std::vector<PositionSet> sets;
    switch (result.verdict) {
      case Verdict::Win:
        for (PositionSet w : spec.winning_sets) {
          if (w.contains(m) && current.with(m).contains_all(w)) sets.push_back(w);
        }
        break;
      case Verdict::Blocked:
        for (PositionSet w : spec.winning_sets) {
          if (w.contains(m) && opponent.with(m).contains_all(w)) sets.push_back(w);
        }
        break;
      case Verdict::Fork:
        sets = open_threats(current.with(m), available.without(m), spec);
        break;
    }
    record.justification.emplace_back(m, std::move(sets));
  }
  return record;
}

std::optional<SolutionRecord> get_solution(const GameState& state) {
  if (state.decided()) throw InvalidMove("get_solution called on a decided game");
  auto result = classify(state.current_positions(), state.opponent_positions(),
                         state.available(), state.spec());
  if (!result) return std::nullopt;
  return justify(state, *result);
}

}  // namespace tttbench
