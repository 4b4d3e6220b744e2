#include <doctest.h>

#include <random>

#include "tttbench/enumerator.hpp"
#include "tttbench/oracle.hpp"

using namespace tttbench;

namespace {

// Unpruned minimax from the mover's view: +1 win, 0 draw, -1 loss.
int plain_minimax(PositionSet me, PositionSet them, const GameSpec& spec) {
  if (check_won(them, spec)) return -1;
  const PositionSet avail = spec.all_positions() - me - them;
  if (avail.empty()) return 0;
  int best = -1;
  for (int m : avail) {
    best = std::max(best, -plain_minimax(them, me.with(m), spec));
    if (best == 1) break;
  }
  return best;
}

std::optional<GameState> random_state(GameId g, int n, std::mt19937_64& rng) {
  GameState s(g);
  for (int i = 0; i < n; ++i) {
    if (s.decided()) return std::nullopt;
    std::vector<int> avail(s.available().begin(), s.available().end());
    s = s.apply(avail[rng() % avail.size()]);
  }
  if (s.decided()) return std::nullopt;
  return s;
}

int cell(const GameState& s, char label) { return s.spec().cell(label); }

}  // namespace

TEST_CASE("one-move checks") {
  const auto s = GameState::from_labels(GameId::dTTT, "IJFLBH");
  CHECK(verify_win(s, cell(s, 'C')).passed());
  CHECK_FALSE(verify_win(s, cell(s, 'A')).passed());
  CHECK_THROWS_AS(verify_win(s, cell(s, 'I')), std::invalid_argument);

  // Bob holds B and E, so Alice must take H.
  const auto t = GameState::from_labels(GameId::oTTT, "ABCE");
  CHECK(verify_block(t, cell(t, 'H')).passed());
  CHECK_FALSE(verify_block(t, cell(t, 'I')).passed());
}

TEST_CASE("forced wins within three plies") {
  const auto s = GameState::from_labels(GameId::oTTT, "ABHC");
  CHECK(verify_forced_win(s, cell(s, 'G'), 3).passed());
  CHECK(verify_forced_win(s, cell(s, 'I'), 3).passed());
  CHECK(verify_forced_win(s, cell(s, 'E'), 3).outcome == ProofOutcome::fail);
  CHECK_THROWS_AS(verify_forced_win(s, cell(s, 'G'), 2), std::invalid_argument);
  CHECK_THROWS_AS(verify_forced_win(s, cell(s, 'A'), 3), std::invalid_argument);

  const auto l = GameState::from_labels(GameId::sTTT, "ADBKHU");
  CHECK(verify_forced_win(l, cell(l, 'F'), 3).passed());
  CHECK(verify_forced_win(l, cell(l, 'G'), 3).passed());
  CHECK(verify_forced_win(l, cell(l, 'Y'), 3).outcome == ProofOutcome::fail);
}

TEST_CASE("exhausted node budget is inconclusive, not a verdict") {
  const auto s = GameState::from_labels(GameId::sTTT, "ADBKHU");
  SearchLimits tight;
  tight.node_budget = 5;
  CHECK(verify_forced_win(s, cell(s, 'Y'), 9, tight).outcome == ProofOutcome::inconclusive);
  const auto e = solve_exact(GameState(GameId::cTTT), tight);
  CHECK_FALSE(e.value.has_value());
}

TEST_CASE("exact solver agrees with unpruned minimax on the ordinary grid") {
  const auto empty = solve_exact(GameState(GameId::oTTT));
  REQUIRE(empty.value);
  CHECK(*empty.value == GameValue::draw);
  CHECK(empty.optimal_moves == spec_for(GameId::oTTT).all_positions());

  std::mt19937_64 rng(3);
  const auto& spec = spec_for(GameId::oTTT);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto s = random_state(GameId::oTTT, static_cast<int>(rng() % 7), rng);
    if (!s) continue;
    const auto e = solve_exact(*s);
    REQUIRE(e.value);
    const int v = plain_minimax(s->current_positions(), s->opponent_positions(), spec);
    const Player winner = v > 0 ? s->to_move() : other(s->to_move());
    const GameValue expected =
        v == 0 ? GameValue::draw
               : (winner == Player::Alice ? GameValue::first_player_win : GameValue::second_player_win);
    CHECK(*e.value == expected);
    for (int m : e.optimal_moves) {
      const PositionSet me = s->current_positions().with(m);
      const int child = check_won(me, spec) ? 1 : -plain_minimax(s->opponent_positions(), me, spec);
      CHECK(child == v);
    }
    ++compared;
  }
  CHECK(compared > 200);
}

TEST_CASE("transposition table does not change results") {
  std::mt19937_64 rng(99);
  SearchLimits no_tt;
  no_tt.use_transposition_table = false;
  int compared = 0;
  for (int trial = 0; compared < 200 && trial < 2000; ++trial) {
    const GameId g = trial % 2 ? GameId::dTTT : GameId::cTTT;
    auto s = random_state(g, 4 + static_cast<int>(rng() % 4), rng);
    if (!s) continue;
    std::vector<int> avail(s->available().begin(), s->available().end());
    const int move = avail[rng() % avail.size()];
    const auto with = verify_forced_win(*s, move, 5);
    const auto without = verify_forced_win(*s, move, 5, no_tt);
    REQUIRE(with.outcome != ProofOutcome::inconclusive);
    CHECK(with.outcome == without.outcome);
    ++compared;
  }
  CHECK(compared == 200);

  for (int trial = 0; trial < 40; ++trial) {
    auto s = random_state(GameId::oTTT, static_cast<int>(rng() % 6), rng);
    if (!s) continue;
    const auto a = solve_exact(*s);
    const auto b = solve_exact(*s, no_tt);
    CHECK(a.value == b.value);
    CHECK(a.optimal_moves == b.optimal_moves);
  }
}

TEST_CASE("solution audits") {
  const auto s = GameState::from_labels(GameId::oTTT, "ABHC");
  const auto& spec = s.spec();
  CHECK(audit_solution(s, {spec.parse_positions("GI"), Verdict::Fork}).outcome == ProofOutcome::pass);
  CHECK(audit_solution(s, {spec.parse_positions("GE"), Verdict::Fork}).outcome == ProofOutcome::fail);
  CHECK(audit_solution(s, {spec.parse_positions("G"), Verdict::Win}).outcome == ProofOutcome::fail);
  CHECK(audit_solution(s, {PositionSet{}, Verdict::Fork}).outcome == ProofOutcome::fail);

  const auto w = GameState::from_labels(GameId::dTTT, "IJFLBH");
  CHECK(audit_solution(w, {w.spec().parse_positions("C"), Verdict::Win}).outcome == ProofOutcome::pass);
  // Bob completes D-E-F.
  const auto two = GameState::from_labels(GameId::oTTT, "AEBDI");
  CHECK(audit_solution(two, {two.spec().parse_positions("F"), Verdict::Win}).outcome == ProofOutcome::pass);

  const auto b = GameState::from_labels(GameId::oTTT, "ABCE");
  CHECK(audit_solution(b, {b.spec().parse_positions("H"), Verdict::Blocked}).outcome == ProofOutcome::pass);
  CHECK(audit_solution(b, {b.spec().parse_positions("HI"), Verdict::Blocked}).outcome == ProofOutcome::fail);
  const auto j = audit_solution(s, {spec.parse_positions("GI"), Verdict::Fork}).to_json();
  CHECK(j["proofs"].size() == 2);
}

TEST_CASE("oracle accepts every solution of small pools") {
  for (GameId g : {GameId::oTTT, GameId::cTTT}) {
    const auto& spec = spec_for(g);
    for (int n : spec.n_schedule) {
      for (const auto& e : enumerate_pool(spec, n).entries) {
        const auto audit = audit_solution(replay(g, e), {e.moves, e.verdict});
        REQUIRE(audit.outcome == ProofOutcome::pass);
      }
    }
  }
}
