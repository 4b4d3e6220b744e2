#include <doctest.h>

#include <algorithm>
#include <array>
#include <set>
#include <string>

#include "tttbench/errors.hpp"
#include "tttbench/templates.hpp"
#include "tttbench/topology.hpp"
#include "oracles.hpp"

using namespace tttbench;
using namespace oracles;

namespace {

// Winning sets as sorted label strings, so comparisons do not depend on the
// library's cell numbering or coordinate embedding.
std::set<std::string> as_labels(const GameSpec& spec) {
  std::set<std::string> out;
  for (auto w : spec.winning_sets) out.insert(spec.letters(w));
  return out;
}

}  // namespace

TEST_CASE("game ids round-trip through their names") {
  for (GameId g : kAllGames) CHECK(parse_game_id(to_string(g)) == g);
  CHECK_FALSE(parse_game_id("qTTT").has_value());
}

TEST_CASE("winning-set counts per board") {
  CHECK(spec_for(GameId::oTTT).winning_set_count() == 8);
  CHECK(spec_for(GameId::dTTT).winning_set_count() == 15);
  CHECK(spec_for(GameId::cTTT).winning_set_count() == 23);
  CHECK(spec_for(GameId::sTTT).winning_set_count() == 25);
}

TEST_CASE("ordinary grid lines match brute-force collinearity") {
  CHECK(as_labels(spec_for(GameId::oTTT)) == grid_triples("ABCDEFGHI"));
}

TEST_CASE("double grid lines are the union of both grids' lines") {
  auto expected = grid_triples("ABCDEFGHI");
  for (const auto& t : grid_triples("CJKFLMINO")) expected.insert(t);
  CHECK(expected.size() == 15);
  CHECK(as_labels(spec_for(GameId::dTTT)) == expected);
}

TEST_CASE("cube planes match a homogeneous determinant test") {
  const auto expected = cube_planes();
  CHECK(expected.size() == 23);
  CHECK(as_labels(spec_for(GameId::cTTT)) == expected);
  CHECK(expected.count("ACEG") == 1);   // diagonal rectangle A-C-G-E
  CHECK(expected.count("BCFG") == 1);   // shared face counted once
}

TEST_CASE("lattice squares match a pairwise-distance test") {
  const auto expected = lattice_squares();
  CHECK(expected.size() == 25);
  CHECK(as_labels(spec_for(GameId::sTTT)) == expected);
  CHECK(expected.count("ABFG") == 1);
  CHECK(expected.count("BFHL") == 1);
  CHECK(expected.count("BCGH") == 1);
}

TEST_CASE("winning sets are sorted, unique and of the board's size") {
  for (GameId g : kAllGames) {
    const auto& spec = spec_for(g);
    CHECK(std::is_sorted(spec.winning_sets.begin(), spec.winning_sets.end()));
    CHECK(std::adjacent_find(spec.winning_sets.begin(), spec.winning_sets.end()) == spec.winning_sets.end());
    for (auto w : spec.winning_sets) {
      CHECK(w.size() == spec.win_size);
      CHECK(spec.all_positions().contains_all(w));
    }
  }
}

TEST_CASE("cell labels and move-count schedules") {
  CHECK(spec_for(GameId::oTTT).labels == "ABCDEFGHI");
  CHECK(spec_for(GameId::dTTT).labels == "ABCDEFGHIJKLMNO");
  CHECK(spec_for(GameId::cTTT).labels == "ABCDEFGHIJKL");
  CHECK(spec_for(GameId::sTTT).labels == "ABCDEFGHIJKLMNOPQRSTUVWXY");
  CHECK(spec_for(GameId::oTTT).n_schedule == std::vector<int>{4, 5});
  CHECK(spec_for(GameId::dTTT).n_schedule == std::vector<int>{6, 7});
  CHECK(spec_for(GameId::cTTT).n_schedule == std::vector<int>{5, 6, 7});
  CHECK(spec_for(GameId::sTTT).n_schedule == std::vector<int>{6, 7});
}

TEST_CASE("label parsing") {
  const auto& spec = spec_for(GameId::oTTT);
  CHECK(spec.letters(spec.parse_positions("A-D-G")) == "ADG");
  CHECK(spec.letters(spec.parse_positions("G, A D")) == "ADG");
  CHECK_THROWS_AS(spec.parse_positions("AZ"), InvalidMove);
  CHECK_THROWS_AS(spec.cell('J'), InvalidMove);
  CHECK(spec.find_cell('I') == 8);
}

TEST_CASE("derivations reject malformed inputs") {
  std::vector<Coordinate> grid;
  for (int i = 0; i < 9; ++i) grid.push_back(Coordinate::grid(i / 3, i % 3));
  CHECK_THROWS_AS(derive_grid_lines(grid, {0, 1, 2}), std::invalid_argument);
  CHECK(derive_grid_lines(grid, {0, 1, 2, 3, 4, 5, 6, 7, 8}).size() == 8);
  CHECK_THROWS_AS(derive_cube_planes(grid), std::invalid_argument);
  CHECK_THROWS_AS(derive_squares_5x5(grid), std::invalid_argument);
  auto cube = spec_for(GameId::cTTT).coordinates;
  cube[0] = Coordinate::space(5, 0, 0);
  CHECK_THROWS_AS(derive_cube_planes(cube), std::invalid_argument);
}

TEST_CASE("frozen rules text per style") {
  for (GameId g : kAllGames) {
    CHECK(spec_for(g).rules_text == rules_preamble(g, TemplateStyle::prompt));
    CHECK(rules_preamble(g, TemplateStyle::prompt).rfind("Alice and Bob", 0) == 0);
  }
  // Only the double-grid and cube wordings differ between styles.
  CHECK(rules_preamble(GameId::oTTT, TemplateStyle::prompt) == rules_preamble(GameId::oTTT, TemplateStyle::showcase));
  CHECK(rules_preamble(GameId::dTTT, TemplateStyle::prompt) != rules_preamble(GameId::dTTT, TemplateStyle::showcase));
  CHECK(parse_template_style("showcase") == TemplateStyle::showcase);
  CHECK_FALSE(parse_template_style("fancy").has_value());
}

TEST_CASE("spec export lists every winning set") {
  const auto j = spec_to_json(spec_for(GameId::sTTT));
  CHECK(j.dump().find("winning_sets") != std::string::npos);
}
