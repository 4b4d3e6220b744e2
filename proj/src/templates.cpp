#include "tttbench/templates.hpp"

namespace tttbench {
namespace {

// Frozen byte-for-byte; tests pin a checksum of each string.

constexpr std::string_view kOrdinary =
    "Alice and Bob are playing a game on a 3x3 grid. The points on the grid are labeled top to "
    "bottom, left to right, as A,B,C,D,E,F,G,H,I. Alice plays white. Bob plays black. At each "
    "turn, the player places a stone of the corresponding color onto one of the positions that "
    "has not been occupied. Whoever has three stones in a line (horizontal, vertical, or "
    "diagonal) wins.";

constexpr std::string_view kDoublePrompt =
    "Alice and Bob are playing a game on two adjacent 3x3 grid. The points on the first grid are "
    "labeled top to bottom, left to right, as A,B,C,D,E,F,G,H,I. The points on the second grid "
    "are labeled top to bottom, left to right, as C,J,K,F,L,M,I,N,O. Note that points C,F, I are "
    "shared by the two grids. Alice plays white. Bob plays black. At each turn, the player places "
    "a stone of the corresponding color onto one of the positions that has not been occupied. "
    "Whoever has three stones in a line (horizontal, vertical, or diagonal) on either grid wins.";

constexpr std::string_view kDoubleShowcase =
    "Alice and Bob are playing a game on two adjacent 3x3 grids. The points on the first grid are "
    "labeled top to bottom, left to right, as A,B,C,D,E,F,G,H,I. The points on the second grid "
    "are labeled top to bottom, left to right, as C,J,K,F,L,M,I,N,O. Note that points C,F, I are "
    "shared by the two grids. Alice plays white. Bob plays black. At each turn, the player places "
    "a stone of the corresponding color onto one of the positions that has not been occupied. "
    "Whoever has three stones in a line (horizontal, vertical, or diagonal) on either grid wins.";

constexpr std::string_view kCubePrompt =
    "Alice and Bob are playing a game on two adjacent cubes. ABCD forms the top rectangle in the "
    "first cube and BIJC forms the top rectangle in the second cube. EFGH forms the bottom "
    "rectangle in the first cube and FKLG forms the bottom rectangle in the second cube. AE is an "
    "edge, BF is an edge, CG is an edge, DH is an edge, IK is an edge, and JL is an edge. Note "
    "that vertices B,C,G,F are shared by the two cubes. Alice and Bob plays a game where they "
    "take turns to put stickers on the vertices of the cubes that have not been occupied. Alice "
    "plays white stickers. Bob plays black stickers. The person who has four stickers on the same "
    "plane on either cube wins.";

constexpr std::string_view kCubeShowcase =
    "Alice and Bob are playing a game on two adjacent cubes. ABCD forms the top rectangle in the "
    "first cube, and BIJC forms the top rectangle in the second cube. EFGH forms the bottom "
    "rectangle in the first cube, and FKLG forms the bottom rectangle in the second cube. AE is "
    "an edge, BF is an edge, CG is an edge, DH is an edge, IK is an edge, and JL is an edge. Note "
    "that vertices B,C,G,F are shared by the two cubes. Alice and Bob play a game where they "
    "take turns to put stickers on the vertices of the cubes that have not been occupied. Alice "
    "plays white stickers. Bob plays black stickers. The person who has four stickers on the same "
    "plane on either cube wins.";

// The prompt wording carries two double spaces; they are intentional.
constexpr std::string_view kSquarePrompt =
    "Alice and Bob are playing a game on a board. There are 5 equally spaced horizontal lines "
    "where the distance between two neighboring horizontal lines is 1. Similarly, there are 5 "
    "equally spaced vertical lines, and the distance between two neighboring vertical lines is 1. "
    "There are 25 intersection points between the 5 horizontal lines and 5 vertical lines. These "
    "25 points are labeled from top to bottom, left to right, as A, B, C, D, …, Y.  Alice "
    "plays white. Bob plays black. At each turn, the player places a stone of the corresponding "
    "color onto one of the 25 points that have not been occupied. Whoever has four stones that "
    "form either a unit square (with side length of 1)  or a “"
    "diagonal square” with side length equal to the square root of 2 wins. For example, "
    "ABGF is a unit square. FBHL is a diagonal square.";

constexpr std::string_view kSquareShowcase =
    "Alice and Bob are playing a game on a board. There are 5 equally spaced horizontal lines "
    "where the distance between two neighboring horizontal lines is 1. Similarly, there are 5 "
    "equally spaced vertical lines, and the distance between two neighboring vertical lines is 1. "
    "There are 25 intersection points between the 5 horizontal lines and 5 vertical lines. These "
    "25 points are labeled from top to bottom, left to right, as A, B, C, D, …, Y. Alice "
    "plays white. Bob plays black. At each turn, the player places a stone of the corresponding "
    "color onto one of the 25 points that have not been occupied. Whoever has four stones that "
    "form either a unit square (with side length of 1) or a “"
    "diagonal square” with side length equal to the square root of 2 wins. For example, "
    "ABGF is a unit square. FBHL is a diagonal square.";

}  // namespace

std::string_view to_string(TemplateStyle style) {
  return style == TemplateStyle::prompt ? "prompt" : "showcase";
}

std::optional<TemplateStyle> parse_template_style(std::string_view text) {
  if (text == "prompt") return TemplateStyle::prompt;
  if (text == "showcase") return TemplateStyle::showcase;
  return std::nullopt;
}

std::string_view rules_preamble(GameId game, TemplateStyle style) {
  const bool prompt = style == TemplateStyle::prompt;
  switch (game) {
    case GameId::oTTT:
      return kOrdinary;
    case GameId::dTTT:
      return prompt ? kDoublePrompt : kDoubleShowcase;
    case GameId::cTTT:
      return prompt ? kCubePrompt : kCubeShowcase;
    case GameId::sTTT:
      return prompt ? kSquarePrompt : kSquareShowcase;
  }
  return {};
}

}  // namespace tttbench
