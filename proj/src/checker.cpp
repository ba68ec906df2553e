#include "atomr/checker.hpp"

#include "atomr/error.hpp"
#include "atomr/executor.hpp"
#include "atomr/render.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace atomr {

std::string_view to_string(CheckerMode m) noexcept {
    switch (m) {
        case CheckerMode::Every: return "every";
        case CheckerMode::ReasoningOnly: return "reasoning-only";
        case CheckerMode::EndingOnly: return "ending-only";
        case CheckerMode::Off: return "off";
    }
    return "";
}

std::optional<CheckerMode> try_parse_checker_mode(std::string_view text) {
    for (auto m : {CheckerMode::Every, CheckerMode::ReasoningOnly, CheckerMode::EndingOnly, CheckerMode::Off}) {
        if (text == to_string(m)) return m;
    }
    return std::nullopt;
}

std::vector<ErrorKind> applicable_errors(Action action) {
    std::vector<ErrorKind> out;
    for (ErrorKind k : kAllErrorKinds) {
        if (category(k) == category(action)) out.push_back(k);
    }
    return out;
}

bool should_check(CheckerMode mode, Action action) noexcept {
    switch (mode) {
        case CheckerMode::Every: return true;
        case CheckerMode::ReasoningOnly: return category(action) == ActionCategory::Reasoning;
        case CheckerMode::EndingOnly: return category(action) == ActionCategory::Ending;
        case CheckerMode::Off: return false;
    }
    return false;
}

ErrorKind default_error_kind(ActionCategory c) noexcept {
    switch (c) {
        case ActionCategory::Premise: return ErrorKind::ContentConflict;
        case ActionCategory::Reasoning: return ErrorKind::ConclusionError;
        case ActionCategory::Ending: return ErrorKind::JudgmentError;
    }
    return ErrorKind::ConclusionError;
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Line without markdown emphasis and list bullets.
std::string plain(std::string_view line) {
    std::string out;
    for (char c : line) {
        if (c != '*' && c != '_' && c != '#') out.push_back(c);
    }
    out = trim(out);
    while (!out.empty() && (out.front() == '-' || out.front() == '>')) out = trim(out.substr(1));
    return out;
}

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Value after "<label>:" on the last line that starts with the label.
std::optional<std::string> last_labelled(const std::vector<std::string>& lines, std::string_view label) {
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        const std::string p = plain(*it);
        const std::string l = lower(p);
        if (l.rfind(label, 0) == 0) {
            auto rest = trim(std::string_view(p).substr(label.size()));
            if (!rest.empty() && rest.front() == ':') return trim(rest.substr(1));
        }
    }
    return std::nullopt;
}

std::optional<Verdict> parse_verdict(std::string_view value) {
    const std::string v = lower(value);
    static const std::regex no_error(R"(^\W*(no\s+errors?|none|correct|no\s+issues?)\b)");
    static const std::regex has_error(R"(^\W*(there\s+(is|are|was|were)\s+(an?\s+|some\s+)?errors?|errors?\b|incorrect))");
    if (std::regex_search(v, no_error)) return Verdict::NoError;
    if (std::regex_search(v, has_error)) return Verdict::Error;
    return std::nullopt;
}

void add_kind(std::vector<ErrorKind>& kinds, ErrorKind k) {
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
}

}  // namespace

std::optional<CheckReport> parse_check_report(std::string_view text, ActionCategory cat) {
    const auto lines = lines_of(text);
    const auto result = last_labelled(lines, "check result");
    if (!result) return std::nullopt;
    const auto verdict = parse_verdict(*result);
    if (!verdict) return std::nullopt;

    CheckReport report;
    report.verdict = *verdict;
    report.rationale = trim(text);
    if (report.verdict == Verdict::NoError) return report;

    if (auto types = last_labelled(lines, "error types")) {
        std::string item;
        auto flush = [&] {
            if (auto k = try_parse_error_kind(item)) add_kind(report.kinds, *k);
            item.clear();
        };
        const std::string s = std::regex_replace(*types, std::regex(R"(\s+and\s+)", std::regex::icase), ",");
        for (char c : s) {
            if (c == ',' || c == ';' || c == '/' || c == '|') {
                flush();
            } else {
                item.push_back(c);
            }
        }
        flush();
    }
    static const std::regex tag(R"(\[([A-Za-z _-]+)\])");
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), tag); it != std::sregex_iterator(); ++it) {
        if (auto k = try_parse_error_kind((*it)[1].str())) add_kind(report.kinds, *k);
    }
    if (report.kinds.empty()) report.kinds.push_back(default_error_kind(cat));
    if (auto sug = last_labelled(lines, "suggestion"); sug && !sug->empty()) report.suggestion = *sug;
    return report;
}

std::vector<Message> build_check_messages(const AtomicTree& tree, NodeId id, const CheckerConfig& config,
                                          const PromptCatalog& catalog) {
    const Node& n = tree.node(id);
    const auto kinds = applicable_errors(n.action);
    std::string errors;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        errors += std::to_string(i + 1) + ". **" + std::string(display_name(kinds[i])) + "**: " +
                  std::string(definition(kinds[i])) + "\n   Checking method: " + std::string(checking_method(kinds[i])) +
                  "\n";
    }
    const auto path = tree.active_path();
    auto pos = std::find(path.begin(), path.end(), id);
    std::vector<NodeId> before(path.begin(), pos);
    std::size_t step = static_cast<std::size_t>(pos - path.begin()) + 1;
    if (pos == path.end()) {
        // Node off the active path: use its own chain's ancestry.
        const auto at = tree.locate(id);
        const auto own = tree.path_to(at->chain);
        auto p = std::find(own.begin(), own.end(), id);
        before.assign(own.begin(), p);
        step = static_cast<std::size_t>(p - own.begin()) + 1;
    }
    std::string context = render_steps(tree, before);
    if (context.empty()) context = "(no earlier steps)";
    (void)config;
    return {
        {Role::System, catalog.get("checker_system").render({{"error_count", std::to_string(kinds.size())},
                                                              {"errors", errors}})},
        {Role::User, catalog.get("checker_user").render({{"problem", tree.problem().statement},
                                                         {"context", context},
                                                         {"step", std::to_string(step)},
                                                         {"action", std::string(display_name(n.action))},
                                                         {"content", n.content}})},
    };
}

CheckReport check(AtomicTree& tree, NodeId id, Backend& backend, const CheckerConfig& config,
                  const PromptCatalog& catalog) {
    const ActionCategory cat = category(tree.node(id).action);
    CompletionRequest req;
    req.tag = std::string(tags::kCheck);
    req.temperature = config.temperature;
    req.max_tokens = config.max_tokens;
    req.seed = config.seed;
    req.messages = build_check_messages(tree, id, config, catalog);

    CompletionResult r = charged_call(tree, backend, req);
    auto report = parse_check_report(r.text, cat);
    if (!report) {
        tree.add_event("checker_reask", "node " + std::to_string(id.value));
        req.messages.push_back({Role::Assistant, r.text});
        req.messages.push_back({Role::User,
                                "Your reply did not end with a verdict. Reply again and end with the line "
                                "\"Check Result: There is an error\" or \"Check Result: No error\", followed by "
                                "\"Error Types:\" and \"Suggestion:\" lines."});
        r = charged_call(tree, backend, req);
        report = parse_check_report(r.text, cat);
    }
    if (!report) {
        tree.add_event("checker_fail_open", "node " + std::to_string(id.value));
        report = CheckReport{Verdict::NoError, {}, "unparseable", std::nullopt};
    }
    tree.record_check(id, *report);
    return *report;
}

void revise(AtomicTree& tree, NodeId id, const CheckReport& report, Backend& backend, const CheckerConfig& config,
            const PromptCatalog& catalog) {
    if (report.verdict != Verdict::Error) throw Error(Errc::PreconditionFailed, "revise needs an Error report");
    const Node& n = tree.node(id);
    if (n.revisions >= config.max_revisions) {
        throw Error(Errc::PreconditionFailed, "node " + std::to_string(id.value) + " reached the revision cap");
    }
    const auto path = tree.active_path();
    const auto pos = std::find(path.begin(), path.end(), id);
    const std::size_t step = pos == path.end() ? 0 : static_cast<std::size_t>(pos - path.begin()) + 1;
    std::string kinds;
    for (ErrorKind k : report.kinds) kinds += (kinds.empty() ? "" : ", ") + std::string(display_name(k));
    CompletionRequest req;
    req.tag = std::string(tags::kSolve);
    req.temperature = config.revise_temperature;
    req.max_tokens = config.max_tokens;
    req.seed = config.seed;
    req.messages.push_back({Role::System, catalog.get("solver_system").render({})});
    req.messages.push_back({Role::User, catalog.get("revise_user").render({
                                            {"problem", tree.problem().statement},
                                            {"step", std::to_string(step)},
                                            {"action", std::string(display_name(n.action))},
                                            {"content", n.content},
                                            {"report", "Error types: " + kinds + "\n\n" + report.rationale},
                                            {"suggestion", report.suggestion.value_or("(none given)")},
                                        })});
    const CompletionResult r = charged_call_nonblank(tree, backend, req);
    tree.revise_content(id, trim(r.text));
}

ReviewOutcome review_node(AtomicTree& tree, NodeId id, Backend& checker, Backend& reviser,
                          const CheckerConfig& config, const PromptCatalog& catalog) {
    ReviewOutcome out;
    if (!should_check(config.mode, tree.node(id).action)) return out;
    while (true) {
        const CheckReport report = check(tree, id, checker, config, catalog);
        ++out.checks;
        if (report.verdict == Verdict::NoError) break;
        if (tree.node(id).revisions >= config.max_revisions) {
            tree.flag(id);
            tree.add_event("revision_cap", "node " + std::to_string(id.value));
            out.flagged = true;
            break;
        }
        revise(tree, id, report, reviser, config, catalog);
        ++out.revisions;
    }
    return out;
}

}  // namespace atomr
