#include "atomr/problem.hpp"

#include "atomr/error.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace atomr {

namespace {

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

struct SchemaValidator {
    void operator()(const FreeTextSchema&) const {}
    void operator()(const NumericSchema&) const {}
    void operator()(const MultipleChoiceSchema& s) const {
        if (s.options.size() < 2) {
            throw Error(Errc::InvalidProblem, "multiple choice needs at least two options");
        }
        if (s.options.size() > 26) {
            throw Error(Errc::InvalidProblem, "at most 26 options are supported");
        }
    }
    void operator()(const GridSchema& s) const {
        if (s.houses < 1 || s.attributes.empty()) {
            throw Error(Errc::InvalidProblem, "grid needs at least one house and one attribute");
        }
        for (const auto& attr : s.attributes) {
            if (static_cast<int>(attr.values.size()) != s.houses) {
                throw Error(Errc::InvalidProblem,
                            "attribute '" + attr.name + "' must list exactly one value per house");
            }
            std::set<std::string> seen(attr.values.begin(), attr.values.end());
            if (seen.size() != attr.values.size()) {
                throw Error(Errc::InvalidProblem, "attribute '" + attr.name + "' repeats a value");
            }
        }
    }
};

}  // namespace

void validate(const Problem& problem) {
    if (blank(problem.statement)) throw Error(Errc::EmptyProblem, "problem statement is blank");
    std::visit(SchemaValidator{}, problem.schema);
}

const char* schema_name(const AnswerSchema& schema) noexcept {
    switch (schema.index()) {
        case 0: return "free_text";
        case 1: return "mcq";
        case 2: return "grid";
        case 3: return "numeric";
    }
    return "unknown";
}

}  // namespace atomr
