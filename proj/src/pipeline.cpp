#include "tttbench/pipeline.hpp"

#include "tttbench/errors.hpp"

namespace tttbench {

std::string audit_item(const BenchmarkItem& item, int fork_ply_bound, const SearchLimits& limits,
                       bool* inconclusive) {
  if (inconclusive) *inconclusive = false;
  try {
    validate_item(item);
  } catch (const DataError& e) {
    return e.what();
  }
  const GameState state = GameState::from_moves(item.game, item.moves);
  const SolutionAudit audit = audit_solution(state, {item.solutions, item.verdict}, fork_ply_bound, limits);
  if (audit.outcome == ProofOutcome::fail) return "oracle rejects " + std::string(to_string(item.verdict)) + ": " + audit.detail;
  if (audit.outcome == ProofOutcome::inconclusive && inconclusive) *inconclusive = true;
  return {};
}

GeneratedDataset generate_dataset(const GenerateConfig& config,
                                  const std::function<void(const std::string&)>& log) {
  GeneratedDataset out;
  DistributionSummary pooled, sampled;
  nlohmann::ordered_json pool_sizes = nlohmann::ordered_json::array();

  for (GameId game : config.games) {
    const GameSpec& spec = spec_for(game);
    std::vector<CandidatePool> pools;
    for (int n : spec.n_schedule) {
      CandidatePool pool = enumerate_pool(spec, n, {config.jobs, false});
      if (config.symmetry_reduce) pool = symmetry_reduce(pool, spec);
      if (pool.entries.empty()) {
        throw ConfigError("empty pool for " + std::string(to_string(game)) + " N=" + std::to_string(n));
      }
      if (log) {
        log(std::string(to_string(game)) + " N=" + std::to_string(n) + ": " +
            std::to_string(pool.splits_examined) + " splits, " + std::to_string(pool.entries.size()) +
            " candidates");
      }
      for (const auto& e : pool.entries) pooled.add(game, n, e);
      nlohmann::ordered_json row;
      row["game"] = to_string(game);
      row["n_moves"] = n;
      row["splits_examined"] = pool.splits_examined;
      row["candidates"] = pool.entries.size();
      row["Win"] = pool.stats.win;
      row["Blocked"] = pool.stats.blocked;
      row["Fork"] = pool.stats.fork;
      pool_sizes.push_back(row);
      pools.push_back(std::move(pool));
    }

    const auto chosen = sample_game(pools, config.sampling);
    pools.clear();
    std::size_t index = 0;
    for (const auto& [n, entry] : chosen) {
      const GameState state = replay(game, entry);
      const auto solution = get_solution(state);
      if (!solution) throw DataError("sampled state has no solution");
      ItemOptions opts;
      opts.suffix = config.suffix;
      opts.style = config.style;
      opts.seed = config.sampling.seed;
      opts.sample_index = index++;
      BenchmarkItem item = make_item(state, *solution, opts);
      sampled.add(game, n, entry);

      bool unsure = false;
      std::string why = audit_item(item, config.fork_ply_bound, config.limits, &unsure);
      if (!why.empty()) out.failures.push_back({out.items.size() + 1, item.item_id, why});
      if (unsure) {
        ++out.inconclusive;
        out.failures.push_back({out.items.size() + 1, item.item_id, "oracle search inconclusive"});
      }
      out.items.push_back(std::move(item));
    }
    if (log) log(std::string(to_string(game)) + ": " + std::to_string(chosen.size()) + " items");
  }

  out.summary["seed"] = config.sampling.seed;
  out.summary["strategy"] = to_string(config.sampling.strategy);
  out.summary["per_game_target"] = config.sampling.per_game_target;
  out.summary["symmetry_reduce"] = config.symmetry_reduce;
  out.summary["items"] = out.items.size();
  out.summary["pools"] = pool_sizes;
  out.summary["pool_distribution"] = pooled.to_json();
  out.summary["dataset_distribution"] = sampled.to_json();
  return out;
}

nlohmann::ordered_json VerifyReport::to_json() const {
  nlohmann::ordered_json j;
  j["lines"] = lines;
  j["passed"] = passed;
  j["failed"] = failures.size();
  j["inconclusive"] = inconclusive;
  j["failures"] = nlohmann::ordered_json::array();
  for (const auto& f : failures) {
    nlohmann::ordered_json row;
    row["line"] = f.line;
    row["item_id"] = f.item_id;
    row["message"] = f.message;
    j["failures"].push_back(row);
  }
  return j;
}

VerifyReport verify_dataset(const std::filesystem::path& path, int fork_ply_bound,
                            const SearchLimits& limits) {
  VerifyReport report;
  LoadResult loaded = load_dataset_lenient(path);
  for (const auto& issue : loaded.issues) report.failures.push_back({issue.line, issue.item_id, issue.message});
  report.lines = loaded.items.size() + loaded.issues.size();

  for (std::size_t i = 0; i < loaded.items.size(); ++i) {
    const auto& item = loaded.items[i];
    bool unsure = false;
    const std::string why = audit_item(item, fork_ply_bound, limits, &unsure);
    if (!why.empty()) {
      report.failures.push_back({0, item.item_id, why});
    } else if (unsure) {
      ++report.inconclusive;
    } else {
      ++report.passed;
    }
  }
  return report;
}

}  // namespace tttbench
