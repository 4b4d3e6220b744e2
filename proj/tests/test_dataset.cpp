#include <doctest.h>

#include <fstream>
#include <sstream>
#include <unistd.h>

#include "tttbench/dataset.hpp"
#include "tttbench/enumerator.hpp"
#include "tttbench/errors.hpp"

using namespace tttbench;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = TTTBENCH_SOURCE_DIR;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tttbench-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BenchmarkItem item_for(GameId g, const char* moves, const ItemOptions& opts = {}) {
  const auto s = GameState::from_labels(g, moves);
  return make_item(s, *get_solution(s), opts);
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("questions match the golden texts byte for byte") {
  std::ifstream in(kSource / "tests/fixtures/golden_questions.json");
  REQUIRE(in);
  const auto golden = nlohmann::json::parse(in);
  for (const char* style_name : {"prompt", "showcase"}) {
    const TemplateStyle style = *parse_template_style(style_name);
    // The showcase texts stop at the question; the prompt texts carry the suffix.
    const std::string suffix = style == TemplateStyle::prompt ? std::string(kDefaultAnswerSuffix) : "";
    for (const auto& [game, row] : golden[style_name].items()) {
      CAPTURE(style_name);
      CAPTURE(game);
      const auto s = GameState::from_labels(*parse_game_id(game), row["moves"].get<std::string>());
      CHECK(render_question(s.spec(), s.moves(), suffix, style) == row["question"].get<std::string>());
    }
  }
}

TEST_CASE("question structure") {
  for (GameId g : kAllGames) {
    const auto& spec = spec_for(g);
    const auto pool = enumerate_pool(spec, spec.n_schedule.front());
    for (std::size_t i = 0; i < pool.entries.size(); i += pool.entries.size() / 50 + 1) {
      const auto s = replay(g, pool.entries[i]);
      const std::string q = render_question(spec, s.moves());
      const std::string who = std::string(to_string(s.to_move()));
      const std::string tail = "Where should " + who + " play next? " + std::string(kDefaultAnswerSuffix);
      CHECK(q.size() > tail.size());
      CHECK(q.compare(q.size() - tail.size(), tail.size(), tail) == 0);
      CHECK(count(q, "Where should") == 1);
      REQUIRE(q.rfind(spec.rules_text, 0) == 0);
      // One sentence per move; the double grid abbreviates Alice's later moves.
      const std::string story = q.substr(spec.rules_text.size());
      CHECK(count(story, " places a ") + count(story, "Then Alice at ") == static_cast<std::size_t>(s.move_count()));
      const std::string bare = render_question(spec, s.moves(), "");
      CHECK(bare.substr(bare.size() - 10) == "play next?");
    }
  }
  const std::vector<Move> bad{{0, Player::Bob}};
  CHECK_THROWS_AS(render_question(spec_for(GameId::oTTT), bad), InvalidMove);
}

TEST_CASE("winning-set and justification text") {
  const auto& o = spec_for(GameId::oTTT);
  const auto& c = spec_for(GameId::cTTT);
  const auto& s = spec_for(GameId::sTTT);
  CHECK(format_winning_set(o, o.parse_positions("GAD")) == "A-D-G");
  CHECK(format_winning_set(spec_for(GameId::dTTT), spec_for(GameId::dTTT).parse_positions("IFC")) == "C-F-I");
  CHECK(format_winning_set(c, c.parse_positions("ACEG")) == "A-C-G-E");
  CHECK(format_winning_set(s, s.parse_positions("ABFG")) == "A-B-G-F");
  CHECK(format_winning_set(s, s.parse_positions("BFHL")) == "B-F-L-H");
  CHECK(format_winning_set(s, s.parse_positions("BCGH")) == "B-C-H-G");
  const std::vector<PositionSet> sets{o.parse_positions("GHI"), o.parse_positions("ADG")};
  CHECK(describe_justification(o, Verdict::Fork, sets) == "Fork with A-D-G & G-H-I");
  CHECK(describe_justification(o, Verdict::Win, {sets.begin(), 1}) == "Win with G-H-I");
  CHECK(describe_justification(o, Verdict::Blocked, {sets.begin(), 1}) == "Block G-H-I");

  const auto item = item_for(GameId::sTTT, "ADBKHU");
  REQUIRE(item.justification.size() == 2);
  CHECK(item.justification[0].second == "Fork with A-B-G-F & B-F-L-H");
  CHECK(item.justification[1].second == "Fork with A-B-G-F & B-C-H-G");
}

TEST_CASE("item ids and JSON layout") {
  const auto item = item_for(GameId::oTTT, "ABHC");
  CHECK(item.item_id == "oTTT-n4-0000081-0000006-0");
  const auto j = to_json(item);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"schema_version", "item_id", "game", "n_moves", "next_player", "moves",
                                         "question", "solutions", "verdict", "justification",
                                         "generator_metadata"});
  CHECK(j["solutions"] == nlohmann::ordered_json::array({"G", "I"}));
  CHECK(j["justification"]["G"] == "Fork with A-D-G & G-H-I");
  CHECK(j["generator_metadata"]["answer_suffix"] == std::string(kDefaultAnswerSuffix));

  auto back = item_from_json(nlohmann::ordered_json::parse(j.dump()));
  CHECK(back == item);

  auto extended = j;
  extended["reviewer_note"] = "kept";
  const auto with_extra = item_from_json(extended);
  CHECK(to_json(with_extra).dump() == extended.dump());

  auto broken = j;
  broken.erase("verdict");
  CHECK_THROWS_AS(item_from_json(broken), DataError);
  broken = j;
  broken["n_moves"] = "four";
  CHECK_THROWS_AS(item_from_json(broken), DataError);
}

TEST_CASE("emit, load and replay round trip") {
  const auto dir = scratch_dir("roundtrip");
  std::vector<BenchmarkItem> items;
  for (GameId g : kAllGames) {
    const auto& spec = spec_for(g);
    std::vector<CandidatePool> pools;
    for (int n : spec.n_schedule) pools.push_back(enumerate_pool(spec, n));
    SamplingConfig cfg;
    cfg.per_game_target = 20;
    std::size_t idx = 0;
    for (const auto& [n, e] : sample_game(pools, cfg)) {
      const auto s = replay(g, e);
      ItemOptions opts;
      opts.sample_index = idx++;
      items.push_back(make_item(s, *get_solution(s), opts));
    }
  }
  REQUIRE(items.size() == 80);
  const auto path = dir / "items.jsonl";
  CHECK(emit_dataset(items, path) == 80);
  const auto loaded = load_dataset(path);
  REQUIRE(loaded.size() == items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    CHECK(loaded[i] == items[i]);
    const auto sol = get_solution(GameState::from_moves(loaded[i].game, loaded[i].moves));
    REQUIRE(sol);
    CHECK(sol->moves == loaded[i].solutions);
    CHECK(sol->verdict == loaded[i].verdict);
  }
  const auto again = dir / "again.jsonl";
  emit_dataset(loaded, again);
  CHECK(slurp(path) == slurp(again));
  fs::remove_all(dir);
}

TEST_CASE("single-byte mutations are rejected with the item named") {
  const auto dir = scratch_dir("mutation");
  const std::string original = slurp(kSource / "data/showcase_items.jsonl");
  REQUIRE_FALSE(original.empty());
  REQUIRE(load_dataset_lenient(kSource / "data/showcase_items.jsonl").issues.empty());

  struct Mutation {
    std::string from, to, item;
  };
  const std::vector<Mutation> mutations{
      {"\"solutions\":[\"C\"]", "\"solutions\":[\"B\"]", "dTTT-n6-0000122-0000a80-0"},
      {"\"verdict\":\"Win\",\"justification\":{\"G\"", "\"verdict\":\"Fox\",\"justification\":{\"G\"",
       "cTTT-n6-0000015-0000502-0"},
      {"black stone at U.", "black stone at V.", "sTTT-n6-0000083-0100408-0"},
      {"{\"position\":\"H\",\"player\":\"Alice\"}", "{\"position\":\"I\",\"player\":\"Alice\"}",
       "oTTT-n4-0000081-0000006-0"},
  };
  for (const auto& m : mutations) {
    CAPTURE(m.from);
    const auto at = original.find(m.from);
    REQUIRE(at != std::string::npos);
    std::string mutated = original;
    mutated.replace(at, m.from.size(), m.to);
    const auto path = dir / "mutated.jsonl";
    std::ofstream(path, std::ios::binary) << mutated;
    const auto lenient = load_dataset_lenient(path);
    REQUIRE(lenient.issues.size() == 1);
    CHECK(lenient.issues[0].item_id == m.item);
    CHECK(lenient.items.size() == 3);
    try {
      load_dataset(path);
      FAIL("mutation accepted");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find(m.item) != std::string::npos);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("emit refuses a batch with an invalid item") {
  const auto dir = scratch_dir("refuse");
  auto good = item_for(GameId::oTTT, "ABHC");
  auto bad = item_for(GameId::dTTT, "IJFLBH");
  bad.solutions = spec_for(GameId::dTTT).parse_positions("A");
  const std::vector<BenchmarkItem> batch{good, bad};
  CHECK_THROWS_AS(emit_dataset(batch, dir / "x.jsonl"), DataError);
  CHECK_FALSE(fs::exists(dir / "x.jsonl"));
  fs::remove_all(dir);
}

TEST_CASE("board pictures") {
  const auto s = GameState::from_labels(GameId::oTTT, "ABHC");
  const auto text = render_board_text(s);
  CHECK(count(text, "○") == 2);
  CHECK(count(text, "●") == 2);
  CHECK(text.find('E') != std::string::npos);
  const auto cube = render_board_text(GameState::from_labels(GameId::cTTT, "ABCIEK"));
  CHECK(cube.find("cube 2 top") != std::string::npos);
}
