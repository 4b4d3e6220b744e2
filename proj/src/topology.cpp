#include "tttbench/topology.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "tttbench/errors.hpp"
#include "tttbench/templates.hpp"

namespace tttbench {
namespace {

using Vec3 = std::array<long, 3>;

Vec3 diff(const Coordinate& a, const Coordinate& b) {
  return {a.v[0] - b.v[0], a.v[1] - b.v[1], a.v[2] - b.v[2]};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

long dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

bool collinear(const Coordinate& a, const Coordinate& b, const Coordinate& c) {
  return cross(diff(b, a), diff(c, a)) == Vec3{0, 0, 0};
}

// Scalar triple product of the three edge vectors out of p[0].
bool coplanar(const std::array<Coordinate, 4>& p) {
  return dot(diff(p[1], p[0]), cross(diff(p[2], p[0]), diff(p[3], p[0]))) == 0;
}

void sort_unique(std::vector<PositionSet>& sets) {
  std::sort(sets.begin(), sets.end());
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
}

std::map<std::array<int, 3>, int> index_by_coordinate(const std::vector<Coordinate>& coords) {
  std::map<std::array<int, 3>, int> index;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!index.emplace(coords[i].v, static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate coordinate in board description");
    }
  }
  return index;
}

std::vector<Coordinate> ordinary_coordinates() {
  std::vector<Coordinate> coords;
  for (int i = 0; i < 9; ++i) coords.push_back(Coordinate::grid(i / 3, i % 3));
  return coords;
}

std::vector<Coordinate> double_coordinates() {
  // A..I: grid 1 (cols 0-2). J..O: the two right-hand columns of grid 2.
  std::vector<Coordinate> coords = ordinary_coordinates();
  const int extra[6][2] = {{0, 3}, {0, 4}, {1, 3}, {1, 4}, {2, 3}, {2, 4}};
  for (const auto& rc : extra) coords.push_back(Coordinate::grid(rc[0], rc[1]));
  return coords;
}

std::vector<Coordinate> cube_coordinates() {
  return {
      Coordinate::space(0, 0, 1),  // A
      Coordinate::space(1, 0, 1),  // B
      Coordinate::space(1, 1, 1),  // C
      Coordinate::space(0, 1, 1),  // D
      Coordinate::space(0, 0, 0),  // E
      Coordinate::space(1, 0, 0),  // F
      Coordinate::space(1, 1, 0),  // G
      Coordinate::space(0, 1, 0),  // H
      Coordinate::space(2, 0, 1),  // I
      Coordinate::space(2, 1, 1),  // J
      Coordinate::space(2, 0, 0),  // K
      Coordinate::space(2, 1, 0),  // L
  };
}

std::vector<Coordinate> square_coordinates() {
  std::vector<Coordinate> coords;
  for (int i = 0; i < 25; ++i) coords.push_back(Coordinate::grid(i / 5, i % 5));
  return coords;
}

std::string make_labels(int count) {
  std::string labels;
  for (int i = 0; i < count; ++i) labels.push_back(static_cast<char>('A' + i));
  return labels;
}

}  // namespace

std::string_view to_string(GameId game) {
  switch (game) {
    case GameId::oTTT: return "oTTT";
    case GameId::dTTT: return "dTTT";
    case GameId::cTTT: return "cTTT";
    case GameId::sTTT: return "sTTT";
  }
  return "?";
}

std::optional<GameId> parse_game_id(std::string_view text) {
  for (GameId g : kAllGames) {
    if (to_string(g) == text) return g;
  }
  return std::nullopt;
}

std::optional<int> GameSpec::find_cell(char label) const {
  const auto pos = labels.find(label);
  if (pos == std::string::npos) return std::nullopt;
  return static_cast<int>(pos);
}

int GameSpec::cell(char label) const {
  if (auto c = find_cell(label)) return *c;
  throw InvalidMove(std::string("unknown position '") + label + "' for " +
                    std::string(to_string(id)));
}

PositionSet GameSpec::parse_positions(std::string_view letters) const {
  PositionSet out;
  for (char ch : letters) {
    if (ch == ',' || ch == '-' || ch == ' ') continue;
    out = out.with(cell(ch));
  }
  return out;
}

std::string GameSpec::letters(PositionSet positions) const {
  std::string out;
  for (int c : positions) out.push_back(label(c));
  return out;
}

std::vector<PositionSet> derive_grid_lines(const std::vector<Coordinate>& coords,
                                           const std::vector<int>& cells) {
  if (cells.size() != 9) throw std::invalid_argument("a grid has 9 cells");
  std::vector<PositionSet> lines;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      for (std::size_t k = j + 1; k < cells.size(); ++k) {
        const auto& a = coords.at(static_cast<std::size_t>(cells[i]));
        const auto& b = coords.at(static_cast<std::size_t>(cells[j]));
        const auto& c = coords.at(static_cast<std::size_t>(cells[k]));
        if (collinear(a, b, c)) {
          lines.push_back(PositionSet::single(cells[i]).with(cells[j]).with(cells[k]));
        }
      }
    }
  }
  sort_unique(lines);
  return lines;
}

std::vector<PositionSet> derive_cube_planes(const std::vector<Coordinate>& coords) {
  if (coords.size() != 12) throw std::invalid_argument("two face-sharing cubes have 12 vertices");
  for (const auto& c : coords) {
    if (c.dims != 3 || c.v[0] < 0 || c.v[0] > 2 || c.v[1] < 0 || c.v[1] > 1 || c.v[2] < 0 ||
        c.v[2] > 1) {
      throw std::invalid_argument("cube vertex outside {0,1,2}x{0,1}x{0,1}");
    }
  }
  index_by_coordinate(coords);  // 12 distinct points in a 12-point box: exactly the lattice

  std::vector<PositionSet> planes;
  for (int cube = 0; cube < 2; ++cube) {
    std::vector<int> verts;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const int x = coords[i].v[0];
      if (x == cube || x == cube + 1) verts.push_back(static_cast<int>(i));
    }
    const std::size_t n = verts.size();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        for (std::size_t c = b + 1; c < n; ++c)
          for (std::size_t d = c + 1; d < n; ++d) {
            const std::array<int, 4> idx{verts[a], verts[b], verts[c], verts[d]};
            std::array<Coordinate, 4> p;
            for (int m = 0; m < 4; ++m) p[m] = coords[static_cast<std::size_t>(idx[m])];
            if (!coplanar(p)) continue;
            bool degenerate = false;
            for (int s = 0; s < 4 && !degenerate; ++s)
              for (int t = s + 1; t < 4 && !degenerate; ++t)
                for (int u = t + 1; u < 4 && !degenerate; ++u)
                  degenerate = collinear(p[s], p[t], p[u]);
            if (degenerate) continue;
            PositionSet set;
            for (int v : idx) set = set.with(v);
            planes.push_back(set);
          }
  }
  sort_unique(planes);
  return planes;
}

std::vector<PositionSet> derive_squares_5x5(const std::vector<Coordinate>& coords) {
  if (coords.size() != 25) throw std::invalid_argument("the square board has 25 points");
  for (const auto& c : coords) {
    if (c.dims != 2 || c.v[0] < 0 || c.v[0] > 4 || c.v[1] < 0 || c.v[1] > 4) {
      throw std::invalid_argument("lattice point outside the 5x5 board");
    }
  }
  const auto index = index_by_coordinate(coords);
  auto at = [&](int r, int c) { return index.at({r, c, 0}); };

  std::vector<PositionSet> squares;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      squares.push_back(PositionSet::single(at(r, c))
                            .with(at(r, c + 1))
                            .with(at(r + 1, c))
                            .with(at(r + 1, c + 1)));
  for (int r = 1; r < 4; ++r)
    for (int c = 1; c < 4; ++c)
      squares.push_back(PositionSet::single(at(r - 1, c))
                            .with(at(r, c - 1))
                            .with(at(r, c + 1))
                            .with(at(r + 1, c)));
  sort_unique(squares);
  return squares;
}

GameSpec build_spec(GameId game) {
  GameSpec spec;
  spec.id = game;
  spec.rules_text = std::string(rules_preamble(game, TemplateStyle::prompt));
  switch (game) {
    case GameId::oTTT: {
      spec.coordinates = ordinary_coordinates();
      spec.win_size = 3;
      spec.winning_sets = derive_grid_lines(spec.coordinates, {0, 1, 2, 3, 4, 5, 6, 7, 8});
      spec.n_schedule = {4, 5};
      break;
    }
    case GameId::dTTT: {
      spec.coordinates = double_coordinates();
      spec.win_size = 3;
      // Grid 2 reads C,J,K / F,L,M / I,N,O.
      auto lines = derive_grid_lines(spec.coordinates, {0, 1, 2, 3, 4, 5, 6, 7, 8});
      const auto second = derive_grid_lines(spec.coordinates, {2, 9, 10, 5, 11, 12, 8, 13, 14});
      lines.insert(lines.end(), second.begin(), second.end());
      sort_unique(lines);
      spec.winning_sets = std::move(lines);
      spec.n_schedule = {6, 7};
      break;
    }
    case GameId::cTTT: {
      spec.coordinates = cube_coordinates();
      spec.win_size = 4;
      spec.winning_sets = derive_cube_planes(spec.coordinates);
      spec.n_schedule = {5, 6, 7};
      break;
    }
    case GameId::sTTT: {
      spec.coordinates = square_coordinates();
      spec.win_size = 4;
      spec.winning_sets = derive_squares_5x5(spec.coordinates);
      spec.n_schedule = {6, 7};
      break;
    }
  }
  spec.labels = make_labels(static_cast<int>(spec.coordinates.size()));
  return spec;
}

const GameSpec& spec_for(GameId game) {
  static const std::array<GameSpec, 4> specs{build_spec(GameId::oTTT), build_spec(GameId::dTTT),
                                             build_spec(GameId::cTTT), build_spec(GameId::sTTT)};
  return specs[static_cast<std::size_t>(game)];
}

nlohmann::json spec_to_json(const GameSpec& spec) {
  nlohmann::json coords = nlohmann::json::object();
  for (int c = 0; c < spec.total_positions(); ++c) {
    const auto& coord = spec.coordinates[static_cast<std::size_t>(c)];
    nlohmann::json point = nlohmann::json::array();
    for (int d = 0; d < coord.dims; ++d) point.push_back(coord.v[static_cast<std::size_t>(d)]);
    coords[std::string(1, spec.label(c))] = point;
  }
  nlohmann::json sets = nlohmann::json::array();
  for (auto w : spec.winning_sets) sets.push_back(spec.letters(w));
  return {{"game", to_string(spec.id)},
          {"labels", spec.labels},
          {"total_positions", spec.total_positions()},
          {"win_size", spec.win_size},
          {"winning_set_count", spec.winning_set_count()},
          {"n_schedule", spec.n_schedule},
          {"coordinates", coords},
          {"winning_sets", sets},
          {"rules_text", spec.rules_text}};
}

}  // namespace tttbench
