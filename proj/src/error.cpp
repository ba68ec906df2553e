#include "atomr/error.hpp"

namespace atomr {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::EmptyProblem: return "EmptyProblem";
        case Errc::InvalidProblem: return "InvalidProblem";
        case Errc::Terminated: return "Terminated";
        case Errc::AlreadyTerminated: return "AlreadyTerminated";
        case Errc::MissingHypothesis: return "MissingHypothesis";
        case Errc::NodeNotOnActivePath: return "NodeNotOnActivePath";
        case Errc::UnknownNode: return "UnknownNode";
        case Errc::UnknownChain: return "UnknownChain";
        case Errc::InvalidTransition: return "InvalidTransition";
        case Errc::UnknownAction: return "UnknownAction";
        case Errc::NoBacktrackCandidate: return "NoBacktrackCandidate";
        case Errc::EmptyCompletion: return "EmptyCompletion";
        case Errc::InvalidDecision: return "InvalidDecision";
        case Errc::PreconditionFailed: return "PreconditionFailed";
        case Errc::MissingDefault: return "MissingDefault";
        case Errc::EmptySuite: return "EmptySuite";
        case Errc::TooLarge: return "TooLarge";
        case Errc::GenerationExhausted: return "GenerationExhausted";
        case Errc::InvalidDistribution: return "InvalidDistribution";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::Backend: return "Backend";
        case Errc::ParseError: return "ParseError";
        case Errc::Io: return "Io";
        case Errc::Template: return "Template";
    }
    return "Unknown";
}

}  // namespace atomr
