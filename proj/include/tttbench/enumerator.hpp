#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tttbench/engine.hpp"

namespace tttbench {

/// One filtered occupancy split. `first` belongs to Alice, `second` to Bob.
struct PoolEntry {
  PositionSet first;
  PositionSet second;
  PositionSet moves;
  Verdict verdict = Verdict::Win;

  int move_count() const { return first.size() + second.size(); }
  Player to_move() const { return move_count() % 2 == 0 ? Player::Alice : Player::Bob; }
  bool operator==(const PoolEntry&) const = default;
};

struct VerdictCounts {
  std::size_t win = 0;
  std::size_t blocked = 0;
  std::size_t fork = 0;

  std::size_t& operator[](Verdict v);
  std::size_t operator[](Verdict v) const;
  std::size_t total() const { return win + blocked + fork; }
};

struct CandidatePool {
  GameId game{};
  int n_moves = 0;
  /// Number of occupancy splits visited before filtering.
  std::uint64_t splits_examined = 0;
  std::vector<PoolEntry> entries;
  VerdictCounts stats;
};

struct EnumerateOptions {
  int jobs = 1;
  /// Permit move counts outside the game's schedule.
  bool allow_off_schedule = false;
};

/// Visits every unordered split of N stones (ceil(N/2) Alice, floor(N/2) Bob),
/// keeps those where nobody has won, the last mover holds no winning fork, and
/// the player to move has a solution. Output order depends only on (game, N).
CandidatePool enumerate_pool(const GameSpec& spec, int n_moves, const EnumerateOptions& options = {});

/// Number of splits enumerate_pool will visit: C(T, ceil(N/2)) * C(T - ceil(N/2), floor(N/2)).
std::uint64_t split_count(int total_positions, int n_moves);

/// Alternating move order: each side's cells in label order, interleaved.
std::vector<Move> canonical_order(const PoolEntry& entry);
GameState replay(GameId game, const PoolEntry& entry);

enum class SamplingStrategy : std::uint8_t { uniform, stratified };
enum class Dedup : std::uint8_t { by_occupancy, none };

std::string_view to_string(SamplingStrategy s);
std::optional<SamplingStrategy> parse_sampling_strategy(std::string_view text);

struct SamplingConfig {
  std::uint64_t seed = 0;
  std::size_t per_game_target = 103;
  SamplingStrategy strategy = SamplingStrategy::stratified;
  Dedup dedup = Dedup::by_occupancy;
};

/// Splits `target` over buckets as evenly as their capacities allow; leftover
/// from small buckets spreads over the rest. Remainders go to earlier buckets.
std::vector<std::size_t> allocate_evenly(std::span<const std::size_t> capacities,
                                         std::size_t target);

/// Seeded sample of config.per_game_target entries without replacement,
/// returned in pool order. A target above the pool size yields the whole pool
/// (with a warning on stderr). Throws std::invalid_argument on an empty pool.
std::vector<PoolEntry> sample_pool(const CandidatePool& pool, const SamplingConfig& config);

/// Samples one game: the per-game target is spread evenly over the pools (one
/// per scheduled N); each pool gets an independent seed stream.
std::vector<std::pair<int, PoolEntry>> sample_game(std::span<const CandidatePool> pools,
                                                   const SamplingConfig& config);

/// Cell permutations (board automorphisms) that map winning sets onto winning
/// sets, derived from the coordinate embedding. Includes the identity.
std::vector<std::vector<int>> board_symmetries(const GameSpec& spec);

/// Keeps one representative per symmetry orbit: the entry whose (first,
/// second) occupancy is lexicographically smallest among its images.
CandidatePool symmetry_reduce(const CandidatePool& pool, const GameSpec& spec);

/// Counts per (game, verdict) and per (game, single vs multiple solutions).
struct DistributionSummary {
  struct Row {
    VerdictCounts verdicts;
    std::size_t single_solution = 0;
    std::size_t multiple_solutions = 0;
  };
  std::map<GameId, Row> per_game;
  std::map<std::pair<GameId, int>, Row> per_game_n;

  void add(GameId game, int n_moves, const PoolEntry& entry);
  nlohmann::json to_json() const;
};

DistributionSummary pool_report(std::span<const CandidatePool> pools);

}  // namespace tttbench
