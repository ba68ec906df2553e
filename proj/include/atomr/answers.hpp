#pragma once

#include "atomr/problem.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace atomr {

/// [house][attribute]; missing cells are nullopt. Values use the schema spelling.
using Grid = std::vector<std::vector<std::optional<std::string>>>;

struct McqAnswer {
    char letter = 'A';
    bool operator==(const McqAnswer&) const = default;
};

struct GridAnswer {
    Grid cells;
    bool operator==(const GridAnswer&) const = default;
};

/// Free-text or numeric answer.
struct TextAnswer {
    std::string value;
    bool operator==(const TextAnswer&) const = default;
};

using Answer = std::variant<McqAnswer, GridAnswer, TextAnswer>;

/// Last "The correct answer is (X)" with X among the first `option_count`
/// letters; otherwise the last standalone "(X)"; otherwise nullopt.
std::optional<char> extract_mcq(std::string_view text, std::size_t option_count);

/// Lowercase, '-' and '_' to space, whitespace collapsed, surrounding quotes,
/// backticks, asterisks and periods stripped.
std::string normalize_value(std::string_view value);

/// Reads the last "Solution:" block. Each "House k:" line is split on
/// parentheses, commas and semicolons; a token fills the attribute whose
/// vocabulary contains it. Two different values for one attribute on the
/// same line leave that cell missing. Never fails.
Grid parse_grid(std::string_view text, const GridSchema& schema);

/// "Solution:" block with one "House k: v1, v2, ..." line per house, values
/// in attribute order.
std::string format_grid(const Grid& grid);

/// Strips whitespace, $ and \boxed{} wrappers, a leading '+', and trailing
/// fractional zeros.
std::string normalize_numeric(std::string_view value);

/// Last \boxed{...}; else the value of the last "Answer:" line; else the
/// last number in the text.
std::optional<std::string> extract_numeric(std::string_view text);

/// Equal as exact rationals when both parse (integers, decimals, a/b,
/// \frac{a}{b}); otherwise equal as normalized strings.
bool numeric_equal(std::string_view a, std::string_view b);

/// Value of the last "Answer:" line, else the last non-blank line.
std::optional<std::string> extract_free_text(std::string_view text);

/// Schema-directed extraction. Grid extraction yields nullopt when every
/// cell is missing.
std::optional<Answer> extract_answer(std::string_view text, const AnswerSchema& schema);

/// Canonical final line for an answer ("The correct answer is (A)",
/// a Solution block, or "Answer: v").
std::string format_answer(const Answer& answer);

}  // namespace atomr
