#include "tttbench/grading.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "tttbench/errors.hpp"

namespace tttbench {
namespace {

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Offset of the '{' opening the last \boxed argument, if any.
std::optional<std::size_t> last_box_open(std::string_view text) {
  std::size_t pos = text.size();
  while (true) {
    pos = text.rfind("\\boxed", pos == 0 ? std::string_view::npos : pos - 1);
    if (pos == std::string_view::npos) return std::nullopt;
    std::size_t i = pos + 6;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i < text.size() && text[i] == '{') return i;
    if (pos == 0) return std::nullopt;
  }
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::optional<char> extract_answer(std::string_view response) {
  const auto open = last_box_open(response);
  if (!open) return std::nullopt;

  int depth = 1;
  std::size_t i = *open + 1;
  const std::size_t start = i;
  for (; i < response.size(); ++i) {
    if (response[i] == '\\' && i + 1 < response.size() && !is_letter(response[i + 1])) {
      ++i;  // escaped brace or spacing command
      continue;
    }
    if (response[i] == '{') ++depth;
    if (response[i] == '}' && --depth == 0) break;
  }
  if (depth != 0) return std::nullopt;
  const std::string_view inner = response.substr(start, i - start);

  std::string kept;
  for (std::size_t k = 0; k < inner.size(); ++k) {
    const char c = inner[k];
    if (c == '\\') {
      // Drop the command name (\text, \mathbf, ...) or the escaped symbol.
      if (k + 1 < inner.size() && is_letter(inner[k + 1])) {
        while (k + 1 < inner.size() && is_letter(inner[k + 1])) ++k;
      } else {
        ++k;
      }
      continue;
    }
    if (std::isalnum(static_cast<unsigned char>(c))) {
      kept.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  if (kept.size() == 1 && kept[0] >= 'A' && kept[0] <= 'Y') return kept[0];
  return std::nullopt;
}

nlohmann::json to_json(const EvalRecord& record) {
  nlohmann::json j{{"item_id", record.item_id},
                   {"sample_index", record.sample_index},
                   {"raw_response", record.raw_response}};
  j["extracted_answer"] = record.extracted_answer ? nlohmann::json(std::string(1, *record.extracted_answer))
                                                  : nlohmann::json(nullptr);
  j["correct"] = record.correct;
  j["response_chars"] = record.response_chars;
  j["response_tokens"] = record.response_tokens ? nlohmann::json(*record.response_tokens) : nlohmann::json(nullptr);
  return j;
}

EvalRecord record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  try {
    r.item_id = j.at("item_id").get<std::string>();
    r.sample_index = j.at("sample_index").get<int>();
    r.raw_response = j.at("raw_response").get<std::string>();
    if (j.contains("extracted_answer") && j["extracted_answer"].is_string()) {
      const auto a = j["extracted_answer"].get<std::string>();
      if (a.size() == 1) r.extracted_answer = a[0];
    }
    r.correct = j.value("correct", false);
    r.response_chars = j.value("response_chars", std::size_t{0});
    if (j.contains("response_tokens") && j["response_tokens"].is_number()) {
      r.response_tokens = j["response_tokens"].get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed eval record: ") + e.what());
  }
  return r;
}

void write_records(std::span<const EvalRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<EvalRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

std::size_t count_characters(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

void grade_record(EvalRecord& record, const BenchmarkItem& item) {
  record.extracted_answer = extract_answer(record.raw_response);
  record.response_chars = count_characters(record.raw_response);
  record.correct = false;
  if (record.extracted_answer) {
    const auto cell = item.spec().find_cell(*record.extracted_answer);
    record.correct = cell && item.solutions.contains(*cell);
  }
}

double score_item(const BenchmarkItem& item, std::span<const EvalRecord> records) {
  if (records.empty()) throw std::invalid_argument("score_item needs k >= 1 records");
  std::size_t correct = 0;
  for (const auto& r : records) {
    if (r.item_id != item.item_id) {
      throw std::invalid_argument("record for " + r.item_id + " scored against " + item.item_id);
    }
    bool ok = false;
    if (auto answer = extract_answer(r.raw_response)) {
      const auto cell = item.spec().find_cell(*answer);
      ok = cell && item.solutions.contains(*cell);
    }
    if (ok) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

Report aggregate(std::vector<EvalRecord>& records, std::span<const BenchmarkItem> items) {
  std::unordered_map<std::string, const BenchmarkItem*> by_id;
  for (const auto& item : items) by_id.emplace(item.item_id, &item);

  std::map<std::string, std::vector<std::size_t>> grouped;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto it = by_id.find(records[i].item_id);
    if (it == by_id.end()) throw DataError("record references unknown item " + records[i].item_id);
    grade_record(records[i], *it->second);
    grouped[records[i].item_id].push_back(i);
  }

  Report report;
  std::map<GameId, std::vector<double>> task_scores;
  std::map<std::pair<GameId, Verdict>, std::vector<double>> verdict_scores;
  std::map<GameId, std::vector<const EvalRecord*>> task_records;
  for (const auto& item : items) {
    const auto g = grouped.find(item.item_id);
    if (g == grouped.end()) continue;
    std::vector<EvalRecord> mine;
    for (std::size_t i : g->second) {
      mine.push_back(records[i]);
      task_records[item.game].push_back(&records[i]);
    }
    const double s = score_item(item, mine);
    report.per_item[item.item_id] = s;
    task_scores[item.game].push_back(s);
    verdict_scores[{item.game, item.verdict}].push_back(s);
  }

  auto mean = [](const std::vector<double>& v) {
    double sum = 0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
  };
  auto stddev = [&](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double acc = 0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size()));
  };

  for (const auto& [game, scores] : task_scores) {
    report.per_task[game] = mean(scores);
    report.items_scored[game] = scores.size();
  }
  for (const auto& [key, scores] : verdict_scores) report.per_task_verdict[key] = mean(scores);
  for (const auto& [game, recs] : task_records) {
    std::vector<double> chars, tokens;
    for (const auto* r : recs) {
      chars.push_back(static_cast<double>(r->response_chars));
      if (r->response_tokens) tokens.push_back(static_cast<double>(*r->response_tokens));
    }
    LengthStats stats;
    stats.responses = recs.size();
    stats.mean_chars = mean(chars);
    stats.stddev_chars = stddev(chars);
    if (!tokens.empty()) {
      stats.mean_tokens = mean(tokens);
      stats.stddev_tokens = stddev(tokens);
    }
    report.lengths[game] = stats;
  }
  return report;
}

nlohmann::json Report::to_json() const {
  nlohmann::json tasks = nlohmann::json::object();
  for (const auto& [g, v] : per_task) tasks[std::string(to_string(g))] = v;
  nlohmann::json verdicts = nlohmann::json::object();
  for (const auto& [k, v] : per_task_verdict) {
    verdicts[std::string(to_string(k.first))][std::string(to_string(k.second))] = v;
  }
  nlohmann::json lens = nlohmann::json::object();
  for (const auto& [g, s] : lengths) {
    nlohmann::json row{{"responses", s.responses},
                       {"mean_chars", s.mean_chars},
                       {"stddev_chars", s.stddev_chars}};
    if (s.mean_tokens) {
      row["mean_tokens"] = *s.mean_tokens;
      row["stddev_tokens"] = *s.stddev_tokens;
    }
    lens[std::string(to_string(g))] = row;
  }
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [g, n] : items_scored) counts[std::string(to_string(g))] = n;
  return {{"per_task", tasks},
          {"per_task_verdict", verdicts},
          {"lengths", lens},
          {"items_scored", counts},
          {"per_item", per_item}};
}

Report Report::from_json(const nlohmann::json& j) {
  Report r;
  auto game_of = [](const std::string& name) {
    auto g = parse_game_id(name);
    if (!g) throw DataError("unknown task '" + name + "' in report");
    return *g;
  };
  try {
    for (const auto& [k, v] : j.at("per_task").items()) r.per_task[game_of(k)] = v.get<double>();
    for (const auto& [k, row] : j.at("per_task_verdict").items()) {
      for (const auto& [vk, v] : row.items()) {
        auto verdict = parse_verdict(vk);
        if (!verdict) throw DataError("unknown verdict '" + vk + "' in report");
        r.per_task_verdict[{game_of(k), *verdict}] = v.get<double>();
      }
    }
    if (j.contains("per_item")) r.per_item = j["per_item"].get<std::map<std::string, double>>();
    if (j.contains("items_scored")) {
      for (const auto& [k, v] : j["items_scored"].items()) r.items_scored[game_of(k)] = v.get<std::size_t>();
    }
    if (j.contains("lengths")) {
      for (const auto& [k, row] : j["lengths"].items()) {
        LengthStats s;
        s.responses = row.at("responses").get<std::size_t>();
        s.mean_chars = row.at("mean_chars").get<double>();
        s.stddev_chars = row.at("stddev_chars").get<double>();
        if (row.contains("mean_tokens")) {
          s.mean_tokens = row["mean_tokens"].get<double>();
          s.stddev_tokens = row["stddev_tokens"].get<double>();
        }
        r.lengths[game_of(k)] = s;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string Report::per_task_csv() const {
  std::string out = "task,pass1\n";
  for (const auto& [g, v] : per_task) out += std::string(to_string(g)) + "," + fixed(v) + "\n";
  return out;
}

std::string Report::per_verdict_csv() const {
  std::string out = "task,verdict,pass1\n";
  for (const auto& [k, v] : per_task_verdict) {
    out += std::string(to_string(k.first)) + "," + std::string(to_string(k.second)) + "," + fixed(v) + "\n";
  }
  return out;
}

ScoreTable parse_score_csv(std::string_view text) {
  ScoreTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++number;
    const std::string row = trim(line);
    if (row.empty() || row[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(row);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (header) {
      header = false;
      if (cells != std::vector<std::string>{"model", "benchmark", "pass1"}) {
        throw DataError("score table header must be model,benchmark,pass1");
      }
      continue;
    }
    if (cells.size() != 3) throw DataError("score table line " + std::to_string(number) + ": expected 3 columns");
    try {
      std::size_t used = 0;
      const double v = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("trailing text");
      table[cells[0]][cells[1]] = v;
    } catch (const std::exception&) {
      throw DataError("score table line " + std::to_string(number) + ": bad number '" + cells[2] + "'");
    }
  }
  return table;
}

ScoreTable load_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_score_csv(ss.str());
}

std::vector<DeltaRow> delta_pass1(const ScoreTable& task_scores, const ScoreTable& reference,
                                  std::span<const std::pair<std::string, std::string>> pairs) {
  std::vector<DeltaRow> rows;
  for (const auto& [model, scores] : task_scores) {
    const auto ref = reference.find(model);
    for (const auto& [x, y] : pairs) {
      const auto xv = scores.find(x);
      if (xv == scores.end()) throw DataError("no " + x + " score for " + model);
      if (ref == reference.end()) throw DataError("no reference scores for " + model);
      const auto yv = ref->second.find(y);
      if (yv == ref->second.end()) throw DataError("no reference " + y + " score for " + model);
      rows.push_back({model, x, y, xv->second - yv->second});
    }
  }
  return rows;
}

}  // namespace tttbench
