#include "tttbench/enumerator.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "tttbench/errors.hpp"

namespace tttbench {
namespace {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

// All k-subsets of the first n cells in increasing bitmask order.
std::vector<PositionSet> subsets_of_size(int n, int k) {
  std::vector<PositionSet> out;
  if (k == 0) {
    out.emplace_back();
    return out;
  }
  if (k > n) return out;
  out.reserve(binomial(n, k));
  const std::uint64_t limit = std::uint64_t{1} << n;
  std::uint64_t v = (std::uint64_t{1} << k) - 1;
  while (v < limit) {
    out.emplace_back(static_cast<std::uint32_t>(v));
    const std::uint64_t t = v | (v - 1);
    v = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
  }
  return out;
}

// Subsets of `cells` with exactly k members, in lexicographic index order.
template <typename Fn>
void for_each_combination(const std::vector<int>& cells, int k, Fn&& fn) {
  const int n = static_cast<int>(cells.size());
  if (k > n) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    PositionSet set;
    for (int i : idx) set = set.with(cells[static_cast<std::size_t>(i)]);
    fn(set);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  // Rejection keeps the draw unbiased and platform independent.
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// First `count` picks of a Fisher-Yates shuffle of `indices`.
void partial_shuffle(std::vector<std::size_t>& indices, std::size_t count, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < count && i + 1 < indices.size(); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, indices.size() - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(std::min(count, indices.size()));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

PositionSet permute(PositionSet set, const std::vector<int>& perm) {
  PositionSet out;
  for (int c : set) out = out.with(perm[static_cast<std::size_t>(c)]);
  return out;
}

}  // namespace

std::size_t& VerdictCounts::operator[](Verdict v) {
  switch (v) {
    case Verdict::Win: return win;
    case Verdict::Blocked: return blocked;
    case Verdict::Fork: return fork;
  }
  return win;
}

std::size_t VerdictCounts::operator[](Verdict v) const {
  return const_cast<VerdictCounts&>(*this)[v];
}

std::uint64_t split_count(int total_positions, int n_moves) {
  const int first = (n_moves + 1) / 2;
  const int second = n_moves / 2;
  return binomial(total_positions, first) * binomial(total_positions - first, second);
}

CandidatePool enumerate_pool(const GameSpec& spec, int n_moves, const EnumerateOptions& options) {
  const int total = spec.total_positions();
  if (n_moves < 0 || n_moves > total) {
    throw ConfigError("N=" + std::to_string(n_moves) + " is outside 0.." + std::to_string(total) +
                      " for " + std::string(to_string(spec.id)));
  }
  if (!options.allow_off_schedule &&
      std::find(spec.n_schedule.begin(), spec.n_schedule.end(), n_moves) == spec.n_schedule.end()) {
    throw ConfigError("N=" + std::to_string(n_moves) + " is not scheduled for " +
                      std::string(to_string(spec.id)));
  }

  const int first_count = (n_moves + 1) / 2;
  const int second_count = n_moves / 2;
  const bool alice_to_move = n_moves % 2 == 0;
  const PositionSet board = spec.all_positions();
  const std::vector<PositionSet> first_sets = subsets_of_size(total, first_count);

  std::vector<std::vector<PoolEntry>> shards(first_sets.size());
  std::vector<std::uint64_t> visited(first_sets.size(), 0);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    std::vector<int> rest;
    for (std::size_t i = next++; i < first_sets.size(); i = next++) {
      const PositionSet alice = first_sets[i];
      if (check_won(alice, spec)) {
        visited[i] = binomial(total - first_count, second_count);
        continue;
      }
      rest.clear();
      for (int c : board - alice) rest.push_back(c);
      auto& shard = shards[i];
      std::uint64_t count = 0;
      for_each_combination(rest, second_count, [&](PositionSet bob) {
        ++count;
        if (check_won(bob, spec)) return;
        const PositionSet available = board - alice - bob;
        const PositionSet last_mover = alice_to_move ? bob : alice;
        if (has_winning_fork(last_mover, available, spec)) return;
        const PositionSet current = alice_to_move ? alice : bob;
        if (auto result = classify(current, last_mover, available, spec)) {
          shard.push_back({alice, bob, result->moves, result->verdict});
        }
      });
      visited[i] = count;
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::jthread> workers;
    for (int j = 0; j < jobs; ++j) workers.emplace_back(work);
  }

  CandidatePool pool;
  pool.game = spec.id;
  pool.n_moves = n_moves;
  std::size_t size = 0;
  for (const auto& s : shards) size += s.size();
  pool.entries.reserve(size);
  for (std::size_t i = 0; i < shards.size(); ++i) {
    pool.splits_examined += visited[i];
    for (const auto& e : shards[i]) {
      pool.entries.push_back(e);
      ++pool.stats[e.verdict];
    }
  }
  return pool;
}

std::vector<Move> canonical_order(const PoolEntry& entry) {
  std::vector<Move> moves;
  auto a = entry.first.begin();
  auto b = entry.second.begin();
  while (a != entry.first.end() || b != entry.second.end()) {
    if (a != entry.first.end()) moves.push_back({*a++, Player::Alice});
    if (b != entry.second.end()) moves.push_back({*b++, Player::Bob});
  }
  return moves;
}

GameState replay(GameId game, const PoolEntry& entry) {
  const auto moves = canonical_order(entry);
  return GameState::from_moves(game, moves);
}

std::string_view to_string(SamplingStrategy s) {
  return s == SamplingStrategy::uniform ? "uniform" : "stratified";
}

std::optional<SamplingStrategy> parse_sampling_strategy(std::string_view text) {
  if (text == "uniform") return SamplingStrategy::uniform;
  if (text == "stratified") return SamplingStrategy::stratified;
  return std::nullopt;
}

std::vector<std::size_t> allocate_evenly(std::span<const std::size_t> capacities,
                                         std::size_t target) {
  std::vector<std::size_t> alloc(capacities.size(), 0);
  std::size_t remaining = target;
  bool progressed = true;
  while (remaining > 0 && progressed) {
    progressed = false;
    for (std::size_t i = 0; i < capacities.size() && remaining > 0; ++i) {
      if (alloc[i] < capacities[i]) {
        ++alloc[i];
        --remaining;
        progressed = true;
      }
    }
  }
  return alloc;
}

std::vector<PoolEntry> sample_pool(const CandidatePool& pool, const SamplingConfig& config) {
  if (pool.entries.empty()) {
    throw std::invalid_argument("cannot sample from an empty pool (" +
                                std::string(to_string(pool.game)) + ", N=" +
                                std::to_string(pool.n_moves) + ")");
  }

  std::vector<std::size_t> candidates;
  candidates.reserve(pool.entries.size());
  if (config.dedup == Dedup::by_occupancy) {
    std::vector<std::pair<std::uint64_t, std::size_t>> keys;
    keys.reserve(pool.entries.size());
    for (std::size_t i = 0; i < pool.entries.size(); ++i) {
      const auto& e = pool.entries[i];
      keys.emplace_back((std::uint64_t{e.first.bits()} << 32) | e.second.bits(), i);
    }
    std::stable_sort(keys.begin(), keys.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (i == 0 || keys[i].first != keys[i - 1].first) candidates.push_back(keys[i].second);
    }
    std::sort(candidates.begin(), candidates.end());
  } else {
    candidates.resize(pool.entries.size());
    std::iota(candidates.begin(), candidates.end(), 0);
  }

  std::size_t target = config.per_game_target;
  if (target > candidates.size()) {
    std::cerr << "warning: " << to_string(pool.game) << " N=" << pool.n_moves << " pool holds "
              << candidates.size() << " entries, fewer than the requested " << target << "\n";
    target = candidates.size();
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> picked;
  if (config.strategy == SamplingStrategy::uniform) {
    picked = candidates;
    partial_shuffle(picked, target, rng);
  } else {
    std::array<std::vector<std::size_t>, 3> groups;
    for (std::size_t i : candidates) {
      groups[static_cast<std::size_t>(pool.entries[i].verdict)].push_back(i);
    }
    const std::array<std::size_t, 3> caps{groups[0].size(), groups[1].size(), groups[2].size()};
    const auto quota = allocate_evenly(caps, target);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      partial_shuffle(groups[g], quota[g], rng);
      picked.insert(picked.end(), groups[g].begin(), groups[g].end());
    }
  }
  std::sort(picked.begin(), picked.end());

  std::vector<PoolEntry> out;
  out.reserve(picked.size());
  for (std::size_t i : picked) out.push_back(pool.entries[i]);
  return out;
}

std::vector<std::pair<int, PoolEntry>> sample_game(std::span<const CandidatePool> pools,
                                                   const SamplingConfig& config) {
  std::vector<std::size_t> caps;
  for (const auto& p : pools) caps.push_back(p.entries.size());
  const auto quota = allocate_evenly(caps, config.per_game_target);
  const std::size_t granted = std::accumulate(quota.begin(), quota.end(), std::size_t{0});
  if (granted < config.per_game_target && !pools.empty()) {
    std::cerr << "warning: " << to_string(pools.front().game) << " pools hold only " << granted
              << " entries; requested " << config.per_game_target << "\n";
  }

  std::vector<std::pair<int, PoolEntry>> out;
  for (std::size_t i = 0; i < pools.size(); ++i) {
    if (quota[i] == 0) continue;
    SamplingConfig sub = config;
    sub.per_game_target = quota[i];
    sub.seed = splitmix64(config.seed ^ (static_cast<std::uint64_t>(pools[i].game) << 16) ^
                          static_cast<std::uint64_t>(pools[i].n_moves));
    for (auto& e : sample_pool(pools[i], sub)) out.emplace_back(pools[i].n_moves, e);
  }
  return out;
}

std::vector<std::vector<int>> board_symmetries(const GameSpec& spec) {
  const int dims = spec.coordinates.front().dims;
  const int total = spec.total_positions();
  std::array<int, 3> lo{}, hi{};
  for (int d = 0; d < dims; ++d) {
    lo[static_cast<std::size_t>(d)] = hi[static_cast<std::size_t>(d)] = spec.coordinates.front().v[static_cast<std::size_t>(d)];
    for (const auto& c : spec.coordinates) {
      lo[static_cast<std::size_t>(d)] = std::min(lo[static_cast<std::size_t>(d)], c.v[static_cast<std::size_t>(d)]);
      hi[static_cast<std::size_t>(d)] = std::max(hi[static_cast<std::size_t>(d)], c.v[static_cast<std::size_t>(d)]);
    }
  }

  std::vector<int> axes(static_cast<std::size_t>(dims));
  std::iota(axes.begin(), axes.end(), 0);
  std::vector<std::vector<int>> result;
  const std::vector<PositionSet>& sets = spec.winning_sets;
  do {
    for (int flips = 0; flips < (1 << dims); ++flips) {
      std::vector<int> perm(static_cast<std::size_t>(total), -1);
      bool ok = true;
      for (int cell = 0; cell < total && ok; ++cell) {
        const auto& src = spec.coordinates[static_cast<std::size_t>(cell)];
        Coordinate dst = src;
        for (int d = 0; d < dims; ++d) {
          const auto from = static_cast<std::size_t>(axes[static_cast<std::size_t>(d)]);
          int value = src.v[from];
          if (flips & (1 << d)) value = lo[from] + hi[from] - value;
          // Re-anchor onto axis d's range; mismatched extents fail the lookup.
          dst.v[static_cast<std::size_t>(d)] = value - lo[from] + lo[static_cast<std::size_t>(d)];
        }
        const auto it = std::find(spec.coordinates.begin(), spec.coordinates.end(), dst);
        if (it == spec.coordinates.end()) {
          ok = false;
        } else {
          perm[static_cast<std::size_t>(cell)] = static_cast<int>(it - spec.coordinates.begin());
        }
      }
      if (!ok) continue;
      for (PositionSet w : sets) {
        if (!std::binary_search(sets.begin(), sets.end(), permute(w, perm))) {
          ok = false;
          break;
        }
      }
      if (ok && std::find(result.begin(), result.end(), perm) == result.end()) {
        result.push_back(std::move(perm));
      }
    }
  } while (std::next_permutation(axes.begin(), axes.end()));
  return result;
}

CandidatePool symmetry_reduce(const CandidatePool& pool, const GameSpec& spec) {
  const auto symmetries = board_symmetries(spec);
  CandidatePool out;
  out.game = pool.game;
  out.n_moves = pool.n_moves;
  out.splits_examined = pool.splits_examined;
  for (const auto& e : pool.entries) {
    const auto key = std::pair{e.first.bits(), e.second.bits()};
    bool canonical = true;
    for (const auto& perm : symmetries) {
      const auto image = std::pair{permute(e.first, perm).bits(), permute(e.second, perm).bits()};
      if (image < key) {
        canonical = false;
        break;
      }
    }
    if (canonical) {
      out.entries.push_back(e);
      ++out.stats[e.verdict];
    }
  }
  return out;
}

void DistributionSummary::add(GameId game, int n_moves, const PoolEntry& entry) {
  for (Row* row : {&per_game[game], &per_game_n[{game, n_moves}]}) {
    ++row->verdicts[entry.verdict];
    if (entry.moves.size() == 1) {
      ++row->single_solution;
    } else {
      ++row->multiple_solutions;
    }
  }
}

nlohmann::json DistributionSummary::to_json() const {
  auto row_json = [](const Row& r) {
    return nlohmann::json{{"Win", r.verdicts.win},
                          {"Blocked", r.verdicts.blocked},
                          {"Fork", r.verdicts.fork},
                          {"single_solution", r.single_solution},
                          {"multiple_solutions", r.multiple_solutions},
                          {"total", r.verdicts.total()}};
  };
  nlohmann::json games = nlohmann::json::object();
  for (const auto& [game, row] : per_game) games[std::string(to_string(game))] = row_json(row);
  nlohmann::json by_n = nlohmann::json::object();
  for (const auto& [key, row] : per_game_n) {
    by_n[std::string(to_string(key.first))][std::to_string(key.second)] = row_json(row);
  }
  return {{"per_game", games}, {"per_game_n", by_n}};
}

DistributionSummary pool_report(std::span<const CandidatePool> pools) {
  DistributionSummary summary;
  for (const auto& pool : pools) {
    summary.per_game[pool.game];
    summary.per_game_n[{pool.game, pool.n_moves}];
    for (const auto& e : pool.entries) summary.add(pool.game, pool.n_moves, e);
  }
  return summary;
}

}  // namespace tttbench
