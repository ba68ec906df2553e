#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace atomr {

struct FreeTextSchema {
    bool operator==(const FreeTextSchema&) const = default;
};

/// Options are labelled A, B, C... in order.
struct MultipleChoiceSchema {
    std::vector<std::string> options;
    bool operator==(const MultipleChoiceSchema&) const = default;
};

struct GridAttribute {
    std::string name;
    std::vector<std::string> values;
    bool operator==(const GridAttribute&) const = default;
};

/// houses x attributes. Every attribute has exactly `houses` distinct values.
struct GridSchema {
    int houses = 0;
    std::vector<GridAttribute> attributes;
    bool operator==(const GridSchema&) const = default;
};

struct NumericSchema {
    bool operator==(const NumericSchema&) const = default;
};

using AnswerSchema = std::variant<FreeTextSchema, MultipleChoiceSchema, GridSchema, NumericSchema>;

struct Problem {
    std::string id;
    std::string statement;
    std::optional<std::string> domain_hint;
    AnswerSchema schema = FreeTextSchema{};

    bool operator==(const Problem&) const = default;
};

/// Throws Error(EmptyProblem) on a blank statement and Error(InvalidProblem)
/// when the schema is degenerate.
void validate(const Problem& problem);

inline char option_letter(std::size_t index) { return static_cast<char>('A' + index); }

const char* schema_name(const AnswerSchema& schema) noexcept;

}  // namespace atomr
