#include "tttbench/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tttbench/errors.hpp"

namespace tttbench {
namespace {

std::string_view color_of(Player p) { return p == Player::Alice ? "white" : "black"; }
std::string_view stone_of(Player p) { return p == Player::Alice ? "○" : "●"; }

std::string move_sentence(GameId game, std::size_t index, const Move& move, char label) {
  const std::string who(to_string(move.player));
  const std::string at = std::string(" stone at ") + label + ".";
  if (index == 0) return who + " first places a " + std::string(color_of(move.player)) + at;
  switch (game) {
    case GameId::oTTT:
      return who + " places a " + std::string(color_of(move.player)) + at;
    case GameId::dTTT:
      if (move.player == Player::Alice) return std::string("Then Alice at ") + label + ".";
      return who + " places a " + std::string(color_of(move.player)) + at;
    case GameId::cTTT:
    case GameId::sTTT:
      return "Then " + who + " places a " + std::string(color_of(move.player)) + at;
  }
  return {};
}

long distance2(const Coordinate& a, const Coordinate& b) {
  long d = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const long x = a.v[i] - b.v[i];
    d += x * x;
  }
  return d;
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%07x", v);
  return buf;
}

std::string item_label(const BenchmarkItem& item) {
  return item.item_id.empty() ? std::string("<unnamed item>") : "item " + item.item_id;
}

template <typename T>
T required(const nlohmann::ordered_json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(std::string("field '") + key + "' has the wrong type");
  }
}

constexpr std::array<const char*, 11> kKnownKeys{
    "schema_version", "item_id", "game", "n_moves", "next_player", "moves",
    "question", "solutions", "verdict", "justification", "generator_metadata"};

}  // namespace

std::string render_question(const GameSpec& spec, std::span<const Move> moves,
                            std::string_view suffix, TemplateStyle style) {
  std::string text(rules_preamble(spec.id, style));
  Player expected = Player::Alice;
  for (std::size_t i = 0; i < moves.size(); ++i) {
    if (moves[i].player != expected) {
      throw InvalidMove("moves must alternate starting with Alice (move " + std::to_string(i + 1) + ")");
    }
    text += ' ';
    text += move_sentence(spec.id, i, moves[i], spec.label(moves[i].cell));
    expected = other(expected);
  }
  text += " Where should ";
  text += to_string(expected);
  text += " play next?";
  if (!suffix.empty()) {
    text += ' ';
    text += suffix;
  }
  return text;
}

std::string format_winning_set(const GameSpec& spec, PositionSet set) {
  std::vector<int> order(set.begin(), set.end());
  const auto& coords = spec.coordinates;
  auto at = [&](int c) -> const Coordinate& { return coords[static_cast<std::size_t>(c)]; };
  if (order.size() == 3) {
    std::sort(order.begin(), order.end(), [&](int a, int b) { return at(a).v < at(b).v; });
  } else if (order.size() == 4) {
    const int start = order.front();
    const auto far = std::max_element(order.begin() + 1, order.end(), [&](int a, int b) {
      return distance2(at(start), at(a)) < distance2(at(start), at(b));
    });
    const int opposite = *far;
    std::vector<int> sides;
    for (int c : order)
      if (c != start && c != opposite) sides.push_back(c);
    order = {start, sides[0], opposite, sides[1]};
  }
  std::string out;
  for (int c : order) {
    if (!out.empty()) out += '-';
    out += spec.label(c);
  }
  return out;
}

std::string describe_justification(const GameSpec& spec, Verdict verdict,
                                   std::span<const PositionSet> sets) {
  std::vector<std::string> names;
  for (auto s : sets) names.push_back(format_winning_set(spec, s));
  std::sort(names.begin(), names.end());
  std::string out = verdict == Verdict::Win    ? "Win with "
                    : verdict == Verdict::Fork ? "Fork with "
                                               : "Block ";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += " & ";
    out += names[i];
  }
  return out;
}

std::string make_item_id(GameId game, const GameState& state, std::size_t sample_index) {
  return std::string(to_string(game)) + "-n" + std::to_string(state.move_count()) + "-" +
         hex32(state.positions_of(Player::Alice).bits()) + "-" +
         hex32(state.positions_of(Player::Bob).bits()) + "-" + std::to_string(sample_index);
}

BenchmarkItem make_item(const GameState& state, const SolutionRecord& solution,
                        const ItemOptions& options) {
  const GameSpec& spec = state.spec();
  BenchmarkItem item;
  item.item_id = make_item_id(spec.id, state, options.sample_index);
  item.game = spec.id;
  item.n_moves = state.move_count();
  item.next_player = state.to_move();
  item.moves = state.moves();
  item.question = render_question(spec, item.moves, options.suffix, options.style);
  item.solutions = solution.moves;
  item.verdict = solution.verdict;
  for (const auto& [move, sets] : solution.justification) {
    item.justification.emplace_back(move, describe_justification(spec, solution.verdict, sets));
  }
  item.generator_metadata = {{"seed", options.seed},
                             {"tool_version", kToolVersion},
                             {"template_style", to_string(options.style)},
                             {"answer_suffix", options.suffix}};
  return item;
}

nlohmann::ordered_json to_json(const BenchmarkItem& item) {
  const GameSpec& spec = item.spec();
  nlohmann::ordered_json moves = nlohmann::ordered_json::array();
  for (const auto& m : item.moves) {
    moves.push_back({{"position", std::string(1, spec.label(m.cell))},
                     {"player", to_string(m.player)}});
  }
  nlohmann::ordered_json solutions = nlohmann::ordered_json::array();
  for (int c : item.solutions) solutions.push_back(std::string(1, spec.label(c)));
  nlohmann::ordered_json justification = nlohmann::ordered_json::object();
  for (const auto& [move, text] : item.justification) {
    justification[std::string(1, spec.label(move))] = text;
  }

  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["item_id"] = item.item_id;
  j["game"] = to_string(item.game);
  j["n_moves"] = item.n_moves;
  j["next_player"] = to_string(item.next_player);
  j["moves"] = std::move(moves);
  j["question"] = item.question;
  j["solutions"] = std::move(solutions);
  j["verdict"] = to_string(item.verdict);
  j["justification"] = std::move(justification);
  j["generator_metadata"] = item.generator_metadata;
  for (const auto& [key, value] : item.extra.items()) j[key] = value;
  return j;
}

BenchmarkItem item_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw DataError("item is not a JSON object");
  BenchmarkItem item;
  const int version = required<int>(j, "schema_version");
  if (version < 1 || version > kSchemaVersion) {
    throw DataError("unsupported schema_version " + std::to_string(version));
  }
  item.item_id = required<std::string>(j, "item_id");

  const auto game_name = required<std::string>(j, "game");
  const auto game = parse_game_id(game_name);
  if (!game) throw DataError("unknown game '" + game_name + "'");
  item.game = *game;
  const GameSpec& spec = spec_for(item.game);

  auto parse_label = [&](const std::string& text) {
    if (text.size() != 1 || !spec.find_cell(text[0])) {
      throw DataError("'" + text + "' is not a position of " + game_name);
    }
    return *spec.find_cell(text[0]);
  };

  item.n_moves = required<int>(j, "n_moves");
  const auto next = parse_player(required<std::string>(j, "next_player"));
  if (!next) throw DataError("next_player must be Alice or Bob");
  item.next_player = *next;

  if (!j.contains("moves") || !j["moves"].is_array()) throw DataError("field 'moves' must be an array");
  for (const auto& m : j["moves"]) {
    if (!m.is_object()) throw DataError("each move must be an object");
    const auto player = parse_player(required<std::string>(m, "player"));
    if (!player) throw DataError("move player must be Alice or Bob");
    item.moves.push_back({parse_label(required<std::string>(m, "position")), *player});
  }
  item.question = required<std::string>(j, "question");
  for (const auto& s : required<std::vector<std::string>>(j, "solutions")) {
    item.solutions = item.solutions.with(parse_label(s));
  }
  const auto verdict = parse_verdict(required<std::string>(j, "verdict"));
  if (!verdict) throw DataError("verdict must be Win, Blocked or Fork");
  item.verdict = *verdict;

  if (!j.contains("justification") || !j["justification"].is_object()) {
    throw DataError("field 'justification' must be an object");
  }
  for (const auto& [key, value] : j["justification"].items()) {
    if (!value.is_string()) throw DataError("justification entries must be strings");
    item.justification.emplace_back(parse_label(key), value.get<std::string>());
  }
  std::sort(item.justification.begin(), item.justification.end());
  if (j.contains("generator_metadata")) item.generator_metadata = j["generator_metadata"];

  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      item.extra[key] = value;
    }
  }
  return item;
}

void validate_item(const BenchmarkItem& item) {
  const std::string who = item_label(item);
  if (item.item_id.empty()) throw DataError("item has an empty item_id");
  if (item.solutions.empty()) throw DataError(who + ": empty solution set");
  if (item.n_moves != static_cast<int>(item.moves.size())) {
    throw DataError(who + ": n_moves does not match the move list");
  }

  std::optional<GameState> state;
  try {
    state = GameState::from_moves(item.game, item.moves);
  } catch (const InvalidMove& e) {
    throw DataError(who + ": illegal move sequence: " + e.what());
  }
  if (state->to_move() != item.next_player) throw DataError(who + ": wrong next_player");

  const std::string ask = "Where should " + std::string(to_string(item.next_player)) + " play next?";
  if (item.question.find(ask) == std::string::npos) {
    throw DataError(who + ": question does not ask '" + ask + "'");
  }
  const auto& meta = item.generator_metadata;
  if (meta.contains("answer_suffix") && meta.contains("template_style")) {
    const auto style = parse_template_style(meta["template_style"].get<std::string>());
    if (!style) throw DataError(who + ": unknown template_style");
    const auto expected = render_question(item.spec(), item.moves,
                                          meta["answer_suffix"].get<std::string>(), *style);
    if (expected != item.question) throw DataError(who + ": question text does not match its moves");
  }

  if (state->decided()) throw DataError(who + ": position is already won");
  const auto solution = get_solution(*state);
  const GameSpec& spec = item.spec();
  if (!solution || solution->moves != item.solutions || solution->verdict != item.verdict) {
    std::string actual = solution ? spec.letters(solution->moves) + " " +
                                        std::string(to_string(solution->verdict))
                                  : std::string("no solution");
    throw DataError(who + ": replay mismatch: stored " + spec.letters(item.solutions) + " " +
                    std::string(to_string(item.verdict)) + ", engine gives " + actual);
  }
  PositionSet explained;
  for (const auto& [move, text] : item.justification) explained = explained.with(move);
  if (explained != item.solutions) throw DataError(who + ": justification does not cover the solutions");
}

std::size_t emit_dataset(std::span<const BenchmarkItem> items, const std::filesystem::path& path) {
  for (const auto& item : items) validate_item(item);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& item : items) out << to_json(item).dump() << '\n';
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
  return items.size();
}

LoadResult load_dataset_lenient(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  LoadResult result;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      result.issues.push_back({number, "", std::string("malformed JSON: ") + e.what()});
      continue;
    }
    BenchmarkItem item;
    try {
      item = item_from_json(j);
    } catch (const DataError& e) {
      std::string id = j.is_object() && j.contains("item_id") && j["item_id"].is_string()
                           ? j["item_id"].get<std::string>()
                           : "";
      result.issues.push_back({number, id, e.what()});
      continue;
    }
    try {
      validate_item(item);
    } catch (const DataError& e) {
      result.issues.push_back({number, item.item_id, e.what()});
      continue;
    }
    result.items.push_back(std::move(item));
  }
  return result;
}

std::vector<BenchmarkItem> load_dataset(const std::filesystem::path& path) {
  auto result = load_dataset_lenient(path);
  if (!result.issues.empty()) {
    const auto& issue = result.issues.front();
    std::string where = path.string() + " line " + std::to_string(issue.line);
    if (!issue.item_id.empty() && issue.message.find(issue.item_id) == std::string::npos) {
      where += " (item " + issue.item_id + ")";
    }
    throw DataError(where + ": " + issue.message);
  }
  return std::move(result.items);
}

std::string render_board_text(const GameState& state) {
  const GameSpec& spec = state.spec();
  const PositionSet alice = state.positions_of(Player::Alice);
  const PositionSet bob = state.positions_of(Player::Bob);
  auto mark = [&](int c) -> std::string {
    if (alice.contains(c)) return std::string(stone_of(Player::Alice));
    if (bob.contains(c)) return std::string(stone_of(Player::Bob));
    return std::string(1, spec.label(c));
  };

  std::ostringstream out;
  out << to_string(spec.id) << " after " << state.move_count() << " moves, "
      << to_string(state.to_move()) << " to move\n";
  if (spec.id == GameId::cTTT) {
    auto face = [&](const char* name, std::string_view labels) {
      out << name;
      for (char l : labels) {
        const int c = spec.cell(l);
        const bool empty = !alice.contains(c) && !bob.contains(c);
        out << ' ' << l << '=' << (empty ? std::string("-") : mark(c));
      }
      out << '\n';
    };
    face("cube 1 top:   ", "ABCD");
    face("cube 1 bottom:", "EFGH");
    face("cube 2 top:   ", "BIJC");
    face("cube 2 bottom:", "FKLG");
    return out.str();
  }
  int rows = 0, cols = 0;
  for (const auto& c : spec.coordinates) {
    rows = std::max(rows, c.v[0] + 1);
    cols = std::max(cols, c.v[1] + 1);
  }
  std::vector<std::string> grid(static_cast<std::size_t>(rows * cols), " ");
  for (int c = 0; c < spec.total_positions(); ++c) {
    const auto& p = spec.coordinates[static_cast<std::size_t>(c)];
    grid[static_cast<std::size_t>(p.v[0] * cols + p.v[1])] = mark(c);
  }
  for (int r = 0; r < rows; ++r) {
    for (int col = 0; col < cols; ++col) {
      if (col) out << ' ';
      out << grid[static_cast<std::size_t>(r * cols + col)];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace tttbench
