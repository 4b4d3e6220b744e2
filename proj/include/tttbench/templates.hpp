#pragma once

#include <string_view>

#include "tttbench/topology.hpp"

namespace tttbench {

/// Two frozen wordings exist for each rules preamble. `prompt` is the wording
/// sent to models during evaluation (default). `showcase` is the wording of
/// the illustrated examples; it differs only in small grammatical details.
enum class TemplateStyle : std::uint8_t { prompt, showcase };

std::string_view to_string(TemplateStyle style);
std::optional<TemplateStyle> parse_template_style(std::string_view text);

std::string_view rules_preamble(GameId game, TemplateStyle style = TemplateStyle::prompt);

inline constexpr std::string_view kDefaultAnswerSuffix =
    "Let's think step by step and output the final answer within \\boxed{}.";

}  // namespace tttbench
