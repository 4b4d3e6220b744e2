#include "tttbench/oracle.hpp"

#include <stdexcept>
#include <unordered_map>

namespace tttbench {
namespace {

struct BudgetExceeded {};

enum class Bound : std::uint8_t { exact, lower, upper };

struct TableEntry {
  std::int8_t value;
  Bound bound;
};

// Depth-limited negamax over {-1, 0, +1} from the side to move: +1 means a win
// within `depth` plies, -1 a loss within `depth` plies, 0 neither (or a draw
// when the depth reaches the end of the game). Each query owns its table.
class Searcher {
 public:
  Searcher(const GameSpec& spec, const SearchLimits& limits) : spec_(spec), limits_(limits) {}

  int negamax(PositionSet me, PositionSet them, int depth, int alpha, int beta) {
    if (++nodes_ > limits_.node_budget) throw BudgetExceeded{};
    const PositionSet avail = spec_.all_positions() - me - them;
    if (avail.empty() || depth <= 0) return 0;
    if (!get_wins(me, avail, spec_).empty()) return 1;
    if (depth == 1) return 0;

    const std::uint64_t key = std::uint64_t{me.bits()} | (std::uint64_t{them.bits()} << 25) |
                              (static_cast<std::uint64_t>(depth) << 50);
    if (limits_.use_transposition_table) {
      if (auto it = table_.find(key); it != table_.end()) {
        const TableEntry& e = it->second;
        if (e.bound == Bound::exact) return e.value;
        if (e.bound == Bound::lower && e.value >= beta) return e.value;
        if (e.bound == Bound::upper && e.value <= alpha) return e.value;
      }
    }

    // With no win of our own, an opponent double threat is lost and a single
    // threat leaves exactly one move that does not lose at once.
    PositionSet candidates = avail;
    const PositionSet threats = get_wins(them, avail, spec_);
    if (threats.size() >= 2) return -1;
    if (threats.size() == 1) candidates = threats;

    const int alpha_in = alpha;
    int best = -2;
    for (int m : candidates) {
      const int v = -negamax(them, me.with(m), depth - 1, -beta, -alpha);
      if (v > best) best = v;
      if (best > alpha) alpha = best;
      if (alpha >= beta) break;
    }

    if (limits_.use_transposition_table) {
      Bound bound = Bound::exact;
      if (best <= alpha_in) bound = Bound::upper;
      else if (best >= beta) bound = Bound::lower;
      table_[key] = {static_cast<std::int8_t>(best), bound};
    }
    return best;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  const GameSpec& spec_;
  SearchLimits limits_;
  std::uint64_t nodes_ = 0;
  std::unordered_map<std::uint64_t, TableEntry> table_;
};

bool is_available(const GameState& state, int move) { return state.available().contains(move); }

void require_available(const GameState& state, int move) {
  if (!is_available(state, move)) throw std::invalid_argument("move is not an available position");
}

}  // namespace

std::string_view to_string(Claim c) {
  switch (c) {
    case Claim::win_in_1: return "win-in-1";
    case Claim::must_block: return "must-block";
    case Claim::forced_win: return "forced-win";
  }
  return "?";
}

std::string_view to_string(ProofOutcome o) {
  switch (o) {
    case ProofOutcome::pass: return "pass";
    case ProofOutcome::fail: return "fail";
    case ProofOutcome::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string_view to_string(GameValue v) {
  switch (v) {
    case GameValue::first_player_win: return "first-player-win";
    case GameValue::second_player_win: return "second-player-win";
    case GameValue::draw: return "draw";
  }
  return "?";
}

ProofResult verify_win(const GameState& state, int move) {
  require_available(state, move);
  const bool won = check_won(state.current_positions().with(move), state.spec());
  return {state, move, Claim::win_in_1, won ? ProofOutcome::pass : ProofOutcome::fail, 1, 1};
}

ProofResult verify_block(const GameState& state, int move) {
  require_available(state, move);
  const GameSpec& spec = state.spec();
  const PositionSet opp = state.opponent_positions();
  const PositionSet before = get_wins(opp, state.available(), spec);
  const PositionSet after = get_wins(opp, state.available().without(move), spec);
  const bool ok = !before.empty() && after.empty();
  return {state, move, Claim::must_block, ok ? ProofOutcome::pass : ProofOutcome::fail, 2, 1};
}

ProofResult verify_forced_win(const GameState& state, int move, int ply_bound,
                              const SearchLimits& limits) {
  require_available(state, move);
  if (ply_bound < 3) throw std::invalid_argument("forced-win proofs need ply_bound >= 3");
  ProofResult result{state, move, Claim::forced_win, ProofOutcome::fail, ply_bound, 0};
  const GameSpec& spec = state.spec();
  const PositionSet mover = state.current_positions().with(move);
  if (check_won(mover, spec)) {
    result.outcome = ProofOutcome::pass;
    return result;
  }
  Searcher search(spec, limits);
  try {
    const int v = search.negamax(state.opponent_positions(), mover, ply_bound - 1, -1, 1);
    result.outcome = v == -1 ? ProofOutcome::pass : ProofOutcome::fail;
  } catch (const BudgetExceeded&) {
    result.outcome = ProofOutcome::inconclusive;
  }
  result.nodes_expanded = search.nodes();
  return result;
}

ExactSolution solve_exact(const GameState& state, const SearchLimits& limits) {
  ExactSolution out;
  const GameSpec& spec = state.spec();
  const PositionSet me = state.current_positions();
  const PositionSet them = state.opponent_positions();
  const PositionSet avail = state.available();
  const Player mover = state.to_move();

  auto to_value = [&](int v) {
    if (v == 0) return GameValue::draw;
    const Player winner = v > 0 ? mover : other(mover);
    return winner == Player::Alice ? GameValue::first_player_win : GameValue::second_player_win;
  };

  if (check_won(them, spec)) {
    out.value = to_value(-1);
    return out;
  }
  if (avail.empty()) {
    out.value = GameValue::draw;
    return out;
  }

  Searcher search(spec, limits);
  try {
    int best = -2;
    std::vector<std::pair<int, int>> scored;
    for (int m : avail) {
      int v;
      if (check_won(me.with(m), spec)) {
        v = 1;
      } else {
        v = -search.negamax(them, me.with(m), avail.size() - 1, -1, 1);
      }
      scored.emplace_back(m, v);
      best = std::max(best, v);
    }
    for (auto [m, v] : scored) {
      if (v == best) out.optimal_moves = out.optimal_moves.with(m);
    }
    out.value = to_value(best);
  } catch (const BudgetExceeded&) {
    out.value.reset();
    out.optimal_moves = {};
  }
  out.nodes_expanded = search.nodes();
  return out;
}

nlohmann::json SolutionAudit::to_json() const {
  nlohmann::json proofs_json = nlohmann::json::array();
  for (const auto& p : proofs) {
    proofs_json.push_back({{"move", std::string(1, p.state.spec().label(p.move))},
                           {"claim", to_string(p.claim)},
                           {"outcome", to_string(p.outcome)},
                           {"ply_bound", p.ply_bound},
                           {"nodes_expanded", p.nodes_expanded}});
  }
  nlohmann::json j{{"outcome", to_string(outcome)},
                   {"nodes_expanded", nodes_expanded},
                   {"proofs", proofs_json}};
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

SolutionAudit audit_solution(const GameState& state, const Classification& claimed,
                             int fork_ply_bound, const SearchLimits& limits) {
  SolutionAudit audit;
  const GameSpec& spec = state.spec();
  auto fail = [&](std::string why) {
    if (audit.outcome != ProofOutcome::fail) audit.outcome = ProofOutcome::fail;
    if (!audit.detail.empty()) audit.detail += "; ";
    audit.detail += std::move(why);
  };

  if (claimed.moves.empty()) fail("empty solution set");
  if (!state.available().contains_all(claimed.moves)) fail("solution uses an occupied position");
  if (audit.outcome == ProofOutcome::fail) return audit;

  switch (claimed.verdict) {
    case Verdict::Win: {
      PositionSet passing;
      for (int a : state.available()) {
        auto proof = verify_win(state, a);
        if (proof.passed()) passing = passing.with(a);
        if (claimed.moves.contains(a)) audit.proofs.push_back(std::move(proof));
      }
      const PositionSet engine = get_wins(state.current_positions(), state.available(), spec);
      if (passing != claimed.moves) {
        fail("winning moves are " + spec.letters(passing) + ", claimed " + spec.letters(claimed.moves));
      }
      if (engine != passing) fail("get_wins disagrees with win-in-1 check");
      break;
    }
    case Verdict::Blocked: {
      PositionSet passing;
      for (int a : state.available()) {
        auto proof = verify_block(state, a);
        if (proof.passed()) passing = passing.with(a);
        if (claimed.moves.contains(a)) audit.proofs.push_back(std::move(proof));
      }
      if (claimed.moves.size() != 1) fail("a block must be unique");
      if (passing != claimed.moves) {
        fail("blocking moves are " + spec.letters(passing) + ", claimed " + spec.letters(claimed.moves));
      }
      break;
    }
    case Verdict::Fork: {
      for (int a : claimed.moves) {
        auto proof = verify_forced_win(state, a, fork_ply_bound, limits);
        if (proof.outcome == ProofOutcome::fail) {
          fail(std::string("no forced win after ") + spec.label(a) + " within " +
               std::to_string(fork_ply_bound) + " plies");
        } else if (proof.outcome == ProofOutcome::inconclusive &&
                   audit.outcome == ProofOutcome::pass) {
          audit.outcome = ProofOutcome::inconclusive;
        }
        audit.proofs.push_back(std::move(proof));
      }
      break;
    }
  }
  for (const auto& p : audit.proofs) audit.nodes_expanded += p.nodes_expanded;
  return audit;
}

}  // namespace tttbench
