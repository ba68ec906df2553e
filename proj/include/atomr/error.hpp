#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace atomr {

enum class Errc {
    // core model
    EmptyProblem,
    InvalidProblem,
    Terminated,
    AlreadyTerminated,
    MissingHypothesis,
    NodeNotOnActivePath,
    UnknownNode,
    UnknownChain,
    InvalidTransition,
    UnknownAction,
    // router / executor / checker
    NoBacktrackCandidate,
    EmptyCompletion,
    InvalidDecision,
    PreconditionFailed,
    // sop
    MissingDefault,
    // bench
    EmptySuite,
    TooLarge,
    GenerationExhausted,
    // metrics
    InvalidDistribution,
    DimensionMismatch,
    // backends
    Backend,
    // general
    ParseError,
    Io,
    Template,
};

std::string_view to_string(Errc code) noexcept;

/// Base error for the library. Carries a machine-checkable code so callers
/// (and the CLI exit-code mapping) never need to match on message text.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Parse failure with a location such as "file.sop:12" or "$.chains[1].status".
class ParseError : public Error {
public:
    ParseError(std::string location, const std::string& message)
        : Error(Errc::ParseError, location + ": " + message), location_(std::move(location)) {}

    const std::string& location() const noexcept { return location_; }

private:
    std::string location_;
};

}  // namespace atomr
