#include "tttbench/cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "tttbench/errors.hpp"
#include "tttbench/evalclient.hpp"
#include "tttbench/grading.hpp"
#include "tttbench/manifest.hpp"
#include "tttbench/pipeline.hpp"

namespace tttbench {
namespace {

namespace fs = std::filesystem;

std::atomic<bool> g_interrupted{false};
extern "C" void on_sigint(int) { g_interrupted = true; }

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::vector<GameId> parse_games(const std::vector<std::string>& names) {
  if (names.empty()) return {kAllGames.begin(), kAllGames.end()};
  std::vector<GameId> out;
  for (const auto& name : names) {
    const auto g = parse_game_id(name);
    if (!g) throw ConfigError("unknown game '" + name + "'; choose from oTTT, dTTT, cTTT, sTTT");
    if (std::find(out.begin(), out.end(), *g) == out.end()) out.push_back(*g);
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError(path.string() + " is not valid JSON");
  return j;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

nlohmann::ordered_json games_json(const std::vector<GameId>& games) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (GameId g : games) j.push_back(to_string(g));
  return j;
}

// ---- generate ----

struct GenerateArgs {
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::string> games;
  std::size_t per_game = 103;
  std::string strategy = "stratified";
  std::string suffix = std::string(kDefaultAnswerSuffix);
  bool no_suffix = false;
  std::string style = "prompt";
  bool symmetry_reduce = false;
  int jobs = default_jobs();
  std::uint64_t node_budget = SearchLimits{}.node_budget;
};

int cmd_generate(const GenerateArgs& a) {
  GenerateConfig config;
  config.games = parse_games(a.games);
  config.sampling.seed = a.seed;
  config.sampling.per_game_target = a.per_game;
  config.sampling.strategy = *parse_sampling_strategy(a.strategy);
  config.suffix = a.no_suffix ? std::string() : a.suffix;
  config.style = *parse_template_style(a.style);
  config.symmetry_reduce = a.symmetry_reduce;
  config.jobs = a.jobs;
  config.limits.node_budget = a.node_budget;

  const fs::path out = a.out;
  ensure_dir(out);
  auto result = generate_dataset(config, [](const std::string& line) { std::cerr << line << "\n"; });

  if (!result.failures.empty()) {
    for (const auto& f : result.failures) std::cerr << "FAIL " << f.item_id << ": " << f.message << "\n";
    std::cerr << result.failures.size() << " item(s) failed oracle verification; dataset not written\n";
    return kExitVerification;
  }

  const std::size_t lines = emit_dataset(result.items, out / "dataset.jsonl");
  write_text(out / "pool_summary.json", result.summary.dump(2) + "\n");

  nlohmann::ordered_json cmd;
  cmd["subcommand"] = "generate";
  cmd["seed"] = a.seed;
  cmd["games"] = games_json(config.games);
  cmd["per_game"] = a.per_game;
  cmd["strategy"] = a.strategy;
  cmd["style"] = a.style;
  cmd["suffix"] = config.suffix;
  cmd["symmetry_reduce"] = a.symmetry_reduce;
  write_manifest(out, {"dataset.jsonl", "pool_summary.json"}, cmd);
  std::cout << "wrote " << lines << " items to " << (out / "dataset.jsonl").string() << "\n";
  return kExitOk;
}

// ---- verify ----

struct VerifyArgs {
  std::string dataset;
  std::string out;
  int ply_bound = 3;
  std::uint64_t node_budget = SearchLimits{}.node_budget;
};

int cmd_verify(const VerifyArgs& a) {
  SearchLimits limits;
  limits.node_budget = a.node_budget;
  const VerifyReport report = verify_dataset(a.dataset, a.ply_bound, limits);
  for (const auto& f : report.failures) {
    std::cout << "FAIL";
    if (f.line) std::cout << " line " << f.line;
    if (!f.item_id.empty()) std::cout << " " << f.item_id;
    std::cout << ": " << f.message << "\n";
  }
  std::cout << "items: " << report.lines << "  pass: " << report.passed << "  fail: " << report.failures.size()
            << "  inconclusive: " << report.inconclusive << "\n";
  if (!a.out.empty()) {
    const fs::path out = a.out;
    ensure_dir(out);
    write_text(out / "verify_report.json", report.to_json().dump(2) + "\n");
    nlohmann::ordered_json cmd;
    cmd["subcommand"] = "verify";
    cmd["dataset"] = a.dataset;
    cmd["ply_bound"] = a.ply_bound;
    write_manifest(out, {"verify_report.json"}, cmd);
  }
  return report.ok() ? kExitOk : kExitVerification;
}

// ---- render ----

struct RenderArgs {
  std::string dataset;
  std::vector<std::string> items;
  std::string game;
  std::string moves;
  std::string suffix = std::string(kDefaultAnswerSuffix);
  bool no_suffix = false;
  std::string style = "prompt";
};

void print_item(const BenchmarkItem& item) {
  const GameState state = GameState::from_moves(item.game, item.moves);
  std::cout << "== " << item.item_id << " (" << to_string(item.game) << ", N=" << item.n_moves
            << ", " << to_string(item.next_player) << " to move)\n"
            << render_board_text(state) << "\n"
            << item.question << "\n"
            << "solutions: " << item.spec().letters(item.solutions) << " [" << to_string(item.verdict) << "]\n";
  for (const auto& [cell, text] : item.justification) {
    std::cout << "  " << item.spec().label(cell) << ": " << text << "\n";
  }
}

int cmd_render(const RenderArgs& a) {
  if (!a.game.empty()) {
    const auto game = parse_game_id(a.game);
    if (!game) throw ConfigError("unknown game '" + a.game + "'");
    const GameState state = GameState::from_labels(*game, a.moves);
    const std::string suffix = a.no_suffix ? std::string() : a.suffix;
    const auto style = *parse_template_style(a.style);
    std::cout << render_board_text(state) << "\n"
              << render_question(state.spec(), state.moves(), suffix, style) << "\n";
    if (state.decided()) {
      std::cout << "position is already decided\n";
    } else if (auto sol = get_solution(state)) {
      ItemOptions opts;
      opts.suffix = suffix;
      opts.style = style;
      const BenchmarkItem item = make_item(state, *sol, opts);
      std::cout << "solutions: " << state.spec().letters(item.solutions) << " [" << to_string(item.verdict) << "]\n";
      for (const auto& [cell, text] : item.justification) {
        std::cout << "  " << state.spec().label(cell) << ": " << text << "\n";
      }
    } else {
      std::cout << "no Win, Blocked or Fork move\n";
    }
    return kExitOk;
  }
  if (a.dataset.empty()) throw ConfigError("render needs a dataset path or --game with --moves");
  const auto items = load_dataset(a.dataset);
  const std::set<std::string> wanted(a.items.begin(), a.items.end());
  std::size_t shown = 0;
  for (const auto& item : items) {
    if (!wanted.empty() && !wanted.count(item.item_id)) continue;
    if (shown++) std::cout << "\n";
    print_item(item);
  }
  if (!wanted.empty() && shown != wanted.size()) throw DataError("some --item ids are not in " + a.dataset);
  return kExitOk;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string dataset;
  std::string out;
  ModelEndpointConfig endpoint;
  std::int64_t backoff_ms = 1000;
  std::int64_t timeout_s = 900;
  std::size_t limit = 0;
  std::string run_id = "run";
};

int cmd_evaluate(EvaluateArgs a) {
  a.endpoint.retry.backoff_base = std::chrono::milliseconds(a.backoff_ms);
  a.endpoint.timeout = std::chrono::seconds(a.timeout_s);
  a.endpoint.validate();
  const auto items = load_dataset(a.dataset);
  const fs::path out = a.out;
  ensure_dir(out);

  RunLedger ledger = RunLedger::open(out / "ledger", a.run_id);
  HttpTransport transport;
  CollectOptions options;
  options.request_limit = a.limit;
  options.should_stop = [] { return g_interrupted.load(); };
  options.on_progress = [](std::size_t done, std::size_t total) {
    if (done % 50 == 0 || done == total) std::cerr << "\r" << done << "/" << total << std::flush;
  };

  g_interrupted = false;
  auto previous = std::signal(SIGINT, on_sigint);
  CollectSummary summary;
  try {
    summary = collect(items, a.endpoint, ledger, transport, options);
  } catch (...) {
    std::signal(SIGINT, previous);
    ledger.compact();
    throw;
  }
  std::signal(SIGINT, previous);
  if (summary.total) std::cerr << "\n";
  ledger.compact();

  const auto records = export_records(ledger);
  write_records(records, out / "records.jsonl");
  nlohmann::ordered_json cmd;
  cmd["subcommand"] = "evaluate";
  cmd["dataset"] = a.dataset;
  cmd["model"] = a.endpoint.model_name;
  cmd["temperature"] = a.endpoint.temperature;
  cmd["top_p"] = a.endpoint.top_p;
  cmd["max_tokens"] = a.endpoint.max_response_tokens;
  cmd["samples"] = a.endpoint.samples_per_item;
  write_manifest(out, {"records.jsonl", "ledger/ledger.snapshot.json"}, cmd);

  const std::size_t pending = ledger.count(SampleStatus::pending);
  std::cout << "requested " << summary.attempted << " (done " << summary.done << ", failed " << summary.failed
            << "); ledger: " << ledger.count(SampleStatus::done) << " done, " << ledger.count(SampleStatus::failed)
            << " failed, " << pending << " pending\n";
  if (pending) std::cout << "run incomplete; rerun the same command to resume\n";
  if (g_interrupted) return 130;
  if (summary.attempted > 0 && summary.done == 0) {
    std::cerr << "no request in this run succeeded\n";
    return kExitNetwork;
  }
  return kExitOk;
}

// ---- grade ----

struct GradeArgs {
  std::string dataset;
  std::string records;
  std::string ledger;
  std::string out;
};

int cmd_grade(const GradeArgs& a) {
  const auto items = load_dataset(a.dataset);
  std::vector<EvalRecord> records;
  if (!a.records.empty()) {
    records = read_records(a.records);
  } else {
    if (!fs::is_directory(a.ledger)) throw IoError("no ledger directory at " + a.ledger);
    records = export_records(RunLedger::open(a.ledger));
  }
  const Report report = aggregate(records, items);

  const fs::path out = a.out;
  ensure_dir(out);
  write_text(out / "report.json", report.to_json().dump(2) + "\n");
  write_text(out / "per_task.csv", report.per_task_csv());
  write_text(out / "per_verdict.csv", report.per_verdict_csv());
  write_records(records, out / "graded_records.jsonl");
  nlohmann::ordered_json cmd;
  cmd["subcommand"] = "grade";
  cmd["dataset"] = a.dataset;
  cmd["records"] = a.records.empty() ? a.ledger : a.records;
  write_manifest(out, {"report.json", "per_task.csv", "per_verdict.csv", "graded_records.jsonl"}, cmd);

  std::size_t unparsed = 0;
  for (const auto& r : records) unparsed += !r.extracted_answer;
  for (const auto& [game, v] : report.per_task) {
    std::cout << to_string(game) << " Pass@1 " << fmt2(100.0 * v) << " over " << report.items_scored.at(game)
              << " items\n";
  }
  std::cout << records.size() << " responses graded, " << unparsed << " without a usable boxed answer\n";
  return kExitOk;
}

// ---- report ----

struct ReportArgs {
  std::string reference;
  std::vector<std::string> reports;
  std::vector<std::string> pairs;
  std::vector<std::string> models;
  std::string out;
};

int cmd_report(const ReportArgs& a) {
  const ScoreTable reference = load_score_csv(a.reference);

  std::vector<std::pair<std::string, std::string>> pairs;
  if (a.pairs.empty()) {
    for (const char* y : {"MATH500", "AIME2024"}) {
      for (GameId g : kAllGames) pairs.emplace_back(std::string(to_string(g)), y);
    }
  }
  for (const auto& p : a.pairs) {
    const auto colon = p.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == p.size()) {
      throw ConfigError("--pair expects X:Y (e.g. oTTT:MATH500), got '" + p + "'");
    }
    pairs.emplace_back(p.substr(0, colon), p.substr(colon + 1));
  }

  ScoreTable task_scores;
  std::map<std::string, Report> reports;
  for (const auto& spec : a.reports) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--report expects MODEL=path/report.json, got '" + spec + "'");
    const std::string model = spec.substr(0, eq);
    Report r = Report::from_json(read_json(spec.substr(eq + 1)));
    for (const auto& [g, v] : r.per_task) task_scores[model][std::string(to_string(g))] = 100.0 * v;
    reports.emplace(model, std::move(r));
  }
  if (a.reports.empty()) {
    std::set<std::string> xs;
    for (const auto& [x, y] : pairs) xs.insert(x);
    for (const auto& [model, row] : reference) {
      for (const auto& [bench, v] : row) {
        if (xs.count(bench)) task_scores[model][bench] = v;
      }
    }
  }
  if (!a.models.empty()) {
    ScoreTable kept;
    for (const auto& m : a.models) {
      auto it = task_scores.find(m);
      if (it == task_scores.end()) throw DataError("no scores for model '" + m + "'");
      kept.insert(*it);
    }
    task_scores = std::move(kept);
  }

  const auto deltas = delta_pass1(task_scores, reference, pairs);
  std::string delta_csv = "model,x,y,delta_pass1\n";
  for (const auto& d : deltas) {
    delta_csv += d.model + "," + d.x + "," + d.y + "," + fmt2(d.delta) + "\n";
    char signed_delta[32];
    std::snprintf(signed_delta, sizeof signed_delta, "%+.2f", d.delta);
    std::cout << d.model << "  " << d.x << " - " << d.y << " = " << signed_delta << "\n";
  }

  std::vector<std::string> columns;
  for (GameId g : kAllGames) columns.emplace_back(to_string(g));
  for (const auto& [x, y] : pairs) {
    if (std::find(columns.begin(), columns.end(), y) == columns.end()) columns.push_back(y);
  }
  std::string table4 = "model";
  for (const auto& c : columns) table4 += "," + c;
  table4 += "\n";
  for (const auto& [model, row] : task_scores) {
    table4 += model;
    const auto ref = reference.find(model);
    for (const auto& c : columns) {
      table4 += ",";
      if (auto it = row.find(c); it != row.end()) {
        table4 += fmt2(it->second);
      } else if (ref != reference.end() && ref->second.count(c)) {
        table4 += fmt2(ref->second.at(c));
      }
    }
    table4 += "\n";
  }

  std::string table5 = "model,task,Win,Blocked,Fork\n";
  for (const auto& [model, r] : reports) {
    for (GameId g : kAllGames) {
      if (!r.per_task.count(g)) continue;
      table5 += model + "," + std::string(to_string(g));
      for (Verdict v : kAllVerdicts) {
        table5 += ",";
        if (auto it = r.per_task_verdict.find({g, v}); it != r.per_task_verdict.end()) table5 += fmt2(100.0 * it->second);
      }
      table5 += "\n";
    }
  }

  if (!a.out.empty()) {
    const fs::path out = a.out;
    ensure_dir(out);
    write_text(out / "delta_pass1.csv", delta_csv);
    write_text(out / "table_tasks.csv", table4);
    std::vector<std::string> artifacts{"delta_pass1.csv", "table_tasks.csv"};
    if (!reports.empty()) {
      write_text(out / "table_verdicts.csv", table5);
      artifacts.push_back("table_verdicts.csv");
    }
    nlohmann::ordered_json cmd;
    cmd["subcommand"] = "report";
    cmd["reference_scores"] = a.reference;
    cmd["reports"] = a.reports;
    write_manifest(out, artifacts, cmd);
  }
  return kExitOk;
}

void add_suffix_flags(CLI::App* app, std::string& suffix, bool& no_suffix) {
  auto* s = app->add_option("--suffix", suffix, "Instruction appended to every question")->capture_default_str();
  auto* n = app->add_flag("--no-suffix", no_suffix, "Omit the answer-format instruction");
  s->excludes(n);
  n->excludes(s);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Generate, verify and evaluate Tic-Tac-Toe style reasoning benchmarks."};
  app.name("tttbench");
  app.set_version_flag("--version", std::string(kToolVersion));
  app.set_config("--config", "", "Read options from a key = value file ([subcommand] sections)");
  app.require_subcommand(1, 1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Enumerate, sample, verify and write a dataset");
  g->add_option("--seed", gen.seed, "Sampling seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--games", gen.games, "Subset of oTTT,dTTT,cTTT,sTTT")->delimiter(',');
  g->add_option("--per-game", gen.per_game, "Items per game")->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--strategy", gen.strategy, "uniform or stratified (by verdict)")
      ->check(CLI::IsMember({"uniform", "stratified"}))
      ->capture_default_str();
  add_suffix_flags(g, gen.suffix, gen.no_suffix);
  g->add_option("--style", gen.style, "Rules wording: prompt or showcase")
      ->check(CLI::IsMember({"prompt", "showcase"}))
      ->capture_default_str();
  g->add_flag("--symmetry-reduce", gen.symmetry_reduce, "Keep one state per board-symmetry orbit");
  g->add_option("--jobs,-j", gen.jobs, "Enumeration threads")->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--node-budget", gen.node_budget, "Search node limit per forced-win proof")->capture_default_str();

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Replay a dataset through the engine and the oracle");
  v->add_option("dataset", ver.dataset, "Dataset JSONL")->required();
  v->add_option("--out", ver.out, "Directory for verify_report.json");
  v->add_option("--ply-bound", ver.ply_bound, "Forced-win search depth")->check(CLI::Range(3, 25))->capture_default_str();
  v->add_option("--node-budget", ver.node_budget, "Search node limit per proof")->capture_default_str();

  RenderArgs ren;
  auto* r = app.add_subcommand("render", "Print boards, questions and solutions");
  r->add_option("dataset", ren.dataset, "Dataset JSONL");
  r->add_option("--item", ren.items, "Only these item ids");
  auto* rg = r->add_option("--game", ren.game, "Render an ad-hoc position of this game");
  auto* rm = r->add_option("--moves", ren.moves, "Move labels in order, e.g. ABHC");
  rg->needs(rm);
  rm->needs(rg);
  add_suffix_flags(r, ren.suffix, ren.no_suffix);
  r->add_option("--style", ren.style, "prompt or showcase")->check(CLI::IsMember({"prompt", "showcase"}));

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Collect k responses per item from a chat-completions endpoint");
  e->add_option("--dataset", ev.dataset, "Dataset JSONL")->required();
  e->add_option("--out", ev.out, "Run directory (ledger and records.jsonl)")->required();
  e->add_option("--base-url", ev.endpoint.base_url, "Endpoint base URL, e.g. http://localhost:8000/v1")
      ->envname("TTTBENCH_BASE_URL");
  e->add_option("--model", ev.endpoint.model_name, "Model name sent with each request")->envname("TTTBENCH_MODEL");
  e->add_option("--api-key-env", ev.endpoint.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  e->add_option("--temperature", ev.endpoint.temperature)->capture_default_str();
  e->add_option("--top-p", ev.endpoint.top_p)->capture_default_str();
  e->add_option("--max-tokens", ev.endpoint.max_response_tokens, "Maximum response tokens")->capture_default_str();
  e->add_option("--samples,-k", ev.endpoint.samples_per_item, "Responses per item")->capture_default_str();
  e->add_option("--parallel", ev.endpoint.parallelism, "Concurrent requests")->capture_default_str();
  e->add_option("--max-attempts", ev.endpoint.retry.max_attempts, "Attempts per request")->capture_default_str();
  e->add_option("--backoff-ms", ev.backoff_ms, "First retry delay; doubles per retry")->capture_default_str();
  e->add_option("--timeout", ev.timeout_s, "Per-request read timeout in seconds")->capture_default_str();
  e->add_flag("--request-seed", ev.endpoint.send_sample_seed, "Send the sample index as the request seed");
  e->add_option("--limit", ev.limit, "Stop after this many requests (resume later)");
  e->add_option("--run-id", ev.run_id, "Label stored in the ledger")->capture_default_str();

  GradeArgs gr;
  auto* gd = app.add_subcommand("grade", "Extract answers and compute Pass@1");
  gd->add_option("--dataset", gr.dataset, "Dataset JSONL")->required();
  auto* grr = gd->add_option("--records", gr.records, "records.jsonl from evaluate");
  auto* grl = gd->add_option("--ledger", gr.ledger, "Ledger directory from evaluate");
  grr->excludes(grl);
  grl->excludes(grr);
  gd->add_option("--out", gr.out, "Output directory")->required();

  ReportArgs rp;
  auto* rep = app.add_subcommand("report", "Delta Pass@1 and summary tables");
  rep->add_option("--reference-scores", rp.reference, "CSV with model,benchmark,pass1 (percent)")->required();
  rep->add_option("--report", rp.reports, "MODEL=path/to/report.json from grade (repeatable)");
  rep->add_option("--pair", rp.pairs, "X:Y benchmark pair (repeatable; default TTT tasks vs MATH500, AIME2024)");
  rep->add_option("--models", rp.models, "Restrict to these models")->delimiter(',');
  rep->add_option("--out", rp.out, "Output directory for CSV tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& s) {
    return app.exit(s);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitConfig;
  }
  if (gr.records.empty() && gr.ledger.empty() && *gd) {
    std::cerr << "grade: pass --records FILE or --ledger DIR\n";
    return kExitConfig;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*v) return cmd_verify(ver);
    if (*r) return cmd_render(ren);
    if (*e) return cmd_evaluate(ev);
    if (*gd) return cmd_grade(gr);
    if (*rep) return cmd_report(rp);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const NetworkError& err) {
    std::cerr << "network error: " << err.what() << "\n";
    return kExitNetwork;
  } catch (const InvalidMove& err) {
    std::cerr << "invalid position: " << err.what() << "\n";
    return kExitData;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  } catch (const IoError& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kExitIo;
  }
  return kExitConfig;
}

}  // namespace tttbench
