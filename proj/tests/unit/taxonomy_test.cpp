#include "atomr/action.hpp"
#include "atomr/checker.hpp"
#include "atomr/error.hpp"
#include "atomr/taxonomy.hpp"

#include <gtest/gtest.h>

#include <set>

namespace atomr {
namespace {

TEST(Action, KeysRoundTrip) {
    for (Action a : kAllActions) {
        EXPECT_EQ(try_parse_action(key(a)), a);
        EXPECT_EQ(try_parse_action(footer_name(a)), a);
        EXPECT_EQ(try_parse_action(display_name(a)), a);
    }
}

TEST(Action, LenientSpellings) {
    EXPECT_EQ(try_parse_action("Premise Discovery"), Action::PremiseDiscovery);
    EXPECT_EQ(try_parse_action("summary<finished>"), Action::SummaryFinished);
    EXPECT_EQ(try_parse_action("hypothesis-verification"), Action::HypothesisVerification);
    EXPECT_FALSE(try_parse_action("BACKTRACK"));
    EXPECT_FALSE(try_parse_action(""));
    try {
        parse_action("Guessing");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnknownAction);
    }
}

TEST(Action, Categories) {
    EXPECT_EQ(category(Action::PremiseDiscovery), ActionCategory::Premise);
    EXPECT_EQ(category(Action::PremiseRetrieval), ActionCategory::Premise);
    EXPECT_EQ(category(Action::PremiseSummarization), ActionCategory::Premise);
    EXPECT_EQ(category(Action::HypothesisGeneration), ActionCategory::Reasoning);
    EXPECT_EQ(category(Action::HypothesisVerification), ActionCategory::Reasoning);
    EXPECT_EQ(category(Action::SummaryFinished), ActionCategory::Ending);
}

TEST(Taxonomy, PartitionIsThreeSixFour) {
    const std::set<ErrorKind> premise{ErrorKind::ContentConflict, ErrorKind::LogicalContradiction,
                                      ErrorKind::ExpressionInconsistency};
    const std::set<ErrorKind> reasoning{ErrorKind::CalculationError,   ErrorKind::CommonSenseError,
                                        ErrorKind::RecapitulationError, ErrorKind::IgnoringOfPremises,
                                        ErrorKind::MisusingOfPremises,  ErrorKind::ConclusionError};
    const std::set<ErrorKind> ending{ErrorKind::ResultOmission, ErrorKind::ResultsInconsistency,
                                     ErrorKind::JudgmentError, ErrorKind::SortingError};
    auto as_set = [](Action a) {
        auto v = applicable_errors(a);
        return std::set<ErrorKind>(v.begin(), v.end());
    };
    EXPECT_EQ(as_set(Action::PremiseDiscovery), premise);
    EXPECT_EQ(as_set(Action::PremiseSummarization), premise);
    EXPECT_EQ(as_set(Action::HypothesisGeneration), reasoning);
    EXPECT_EQ(as_set(Action::SummaryFinished), ending);
    EXPECT_EQ(premise.size() + reasoning.size() + ending.size(), kErrorKindCount);
}

TEST(Taxonomy, NamesParseBack) {
    for (ErrorKind k : kAllErrorKinds) {
        EXPECT_EQ(try_parse_error_kind(display_name(k)), k);
        EXPECT_EQ(try_parse_error_kind(key(k)), k);
        EXPECT_FALSE(definition(k).empty());
        EXPECT_FALSE(checking_method(k).empty());
    }
    EXPECT_EQ(try_parse_error_kind("Expression Inconsistencies"), ErrorKind::ExpressionInconsistency);
    EXPECT_EQ(try_parse_error_kind("conclusion errors"), ErrorKind::ConclusionError);
    EXPECT_FALSE(try_parse_error_kind("Spelling Error"));
    EXPECT_FALSE(try_parse_error_kind("   "));
}

}  // namespace
}  // namespace atomr
