#include "atomr/sop.hpp"

#include "atomr/error.hpp"
#include "atomr/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace atomr {

SopRegistry SopRegistry::minimal() {
    SopRegistry r;
    Sop d;
    d.domain = std::string(kDefaultDomain);
    r.add(std::move(d));
    return r;
}

void SopRegistry::add(Sop sop) {
    if (sop.domain.empty()) throw Error(Errc::PreconditionFailed, "SOP domain must be non-empty");
    auto it = sops_.find(sop.domain);
    if (it != sops_.end()) {
        warnings_.push_back("duplicate SOP domain '" + sop.domain + "': later definition wins");
        it->second = std::move(sop);
        return;
    }
    std::string key = sop.domain;
    sops_.emplace(std::move(key), std::move(sop));
}

const Sop& SopRegistry::get(std::string_view domain) const {
    auto it = sops_.find(domain);
    if (it == sops_.end()) throw Error(Errc::PreconditionFailed, "no SOP for domain '" + std::string(domain) + "'");
    return it->second;
}

std::vector<std::string> SopRegistry::domains() const {
    std::vector<std::string> out;
    for (const auto& [d, s] : sops_) out.push_back(d);
    return out;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string trim_blank_lines(const std::vector<std::string>& lines) {
    std::size_t b = 0, e = lines.size();
    auto blank = [](const std::string& l) { return l.find_first_not_of(" \t\r") == std::string::npos; };
    while (b < e && blank(lines[b])) ++b;
    while (e > b && blank(lines[e - 1])) --e;
    std::string out;
    for (std::size_t i = b; i < e; ++i) {
        std::string l = lines[i];
        if (!l.empty() && l.back() == '\r') l.pop_back();
        out += l;
        if (i + 1 < e) out += '\n';
    }
    return out;
}

enum class Section { None, Meta, Schedule, Action, Example };

}  // namespace

Sop parse_sop(std::string_view text, const std::string& source) {
    Sop sop;
    Section section = Section::None;
    Action current_action = Action::PremiseDiscovery;
    std::vector<std::string> body;
    SopExample example;
    std::string* continuation = nullptr;
    bool have_example = false;
    int line_no = 0;
    int section_line = 0;

    auto where = [&](int line) { return source + ":" + std::to_string(line); };

    auto close_section = [&] {
        switch (section) {
            case Section::Schedule: sop.scheduling_hints = trim_blank_lines(body); break;
            case Section::Action: sop.action_strategies[current_action] = trim_blank_lines(body); break;
            case Section::Example:
                if (example.problem_excerpt.empty() || example.worked_step.empty()) {
                    throw ParseError(where(section_line), "[example] needs both problem= and step=");
                }
                sop.examples.push_back(example);
                example = {};
                break;
            default: break;
        }
        body.clear();
        continuation = nullptr;
        have_example = false;
    };

    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.size() >= 2 && t.front() == '[' && t.back() == ']' && line.front() == '[') {
            close_section();
            const std::string name = t.substr(1, t.size() - 2);
            section_line = line_no;
            if (name == "meta") {
                section = Section::Meta;
            } else if (name == "schedule") {
                section = Section::Schedule;
            } else if (name == "example") {
                section = Section::Example;
            } else if (name.rfind("action:", 0) == 0) {
                const std::string k = name.substr(7);
                auto it = std::find_if(kAllActions.begin(), kAllActions.end(),
                                       [&](Action a) { return key(a) == k; });
                if (it == kAllActions.end()) {
                    throw ParseError(where(line_no), "unknown action key '" + k + "'");
                }
                current_action = *it;
                if (sop.action_strategies.contains(current_action)) {
                    throw ParseError(where(line_no), "action '" + k + "' defined twice");
                }
                section = Section::Action;
            } else {
                throw ParseError(where(line_no), "unknown section [" + name + "]");
            }
            continue;
        }
        switch (section) {
            case Section::None:
                if (!t.empty() && t.front() != '#') throw ParseError(where(line_no), "text before the first section");
                break;
            case Section::Schedule:
            case Section::Action:
                body.push_back(line);
                break;
            case Section::Meta:
            case Section::Example: {
                if (t.empty() || t.front() == '#') break;
                if (std::isspace(static_cast<unsigned char>(line.front())) && continuation) {
                    *continuation += "\n" + t;
                    break;
                }
                const auto eq = line.find('=');
                if (eq == std::string::npos) throw ParseError(where(line_no), "expected key = value");
                const std::string k = trim(std::string_view(line).substr(0, eq));
                const std::string v = trim(std::string_view(line).substr(eq + 1));
                if (section == Section::Meta) {
                    if (k == "domain") {
                        sop.domain = v;
                        continuation = &sop.domain;
                    } else if (k == "keywords") {
                        std::istringstream words(v);
                        std::string w;
                        while (std::getline(words, w, ',')) {
                            if (auto tw = trim(w); !tw.empty()) sop.keywords.push_back(tw);
                        }
                        continuation = nullptr;
                    } else {
                        throw ParseError(where(line_no), "unknown [meta] key '" + k + "'");
                    }
                } else {
                    if (k == "problem") {
                        example.problem_excerpt = v;
                        continuation = &example.problem_excerpt;
                    } else if (k == "step") {
                        example.worked_step = v;
                        continuation = &example.worked_step;
                    } else {
                        throw ParseError(where(line_no), "unknown [example] key '" + k + "'");
                    }
                    have_example = true;
                }
                break;
            }
        }
    }
    close_section();
    (void)have_example;
    if (sop.domain.empty()) throw ParseError(source, "missing [meta] domain");
    return sop;
}

SopRegistry load_sops(const std::filesystem::path& path) {
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec)) {
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".sop") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
    } else if (std::filesystem::is_regular_file(path, ec)) {
        files.push_back(path);
    } else {
        throw Error(Errc::Io, "SOP path not readable: " + path.string());
    }
    SopRegistry registry;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) throw Error(Errc::Io, "cannot open " + f.string());
        std::ostringstream text;
        text << in.rdbuf();
        registry.add(parse_sop(text.str(), f.string()));
    }
    if (!registry.contains(kDefaultDomain)) {
        throw Error(Errc::MissingDefault, "no SOP declares domain 'default' under " + path.string());
    }
    return registry;
}

const std::string& sop_guidance(const Sop& sop, Action action) {
    static const std::string empty;
    auto it = sop.action_strategies.find(action);
    return it == sop.action_strategies.end() ? empty : it->second;
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool keyword_hit(const std::string& haystack, const std::string& keyword) {
    const std::string k = lower(keyword);
    const bool wordy = std::all_of(k.begin(), k.end(), [](char c) { return is_word_char(c) || c == ' '; });
    std::size_t pos = 0;
    while ((pos = haystack.find(k, pos)) != std::string::npos) {
        if (!wordy) return true;
        const bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]);
        const std::size_t end = pos + k.size();
        const bool right_ok = end >= haystack.size() || !is_word_char(haystack[end]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

}  // namespace

TriageOutcome triage_problem(const Problem& problem, const SopRegistry& registry, Backend* backend) {
    TriageOutcome out;
    if (problem.domain_hint && registry.contains(*problem.domain_hint)) {
        out.domain = *problem.domain_hint;
        return out;
    }
    const std::string text = lower(problem.statement);
    std::string best;
    std::size_t best_score = 0;
    bool tie = false;
    for (const auto& domain : registry.domains()) {
        if (domain == kDefaultDomain) continue;
        std::size_t score = 0;
        for (const auto& k : registry.get(domain).keywords) score += keyword_hit(text, k) ? 1 : 0;
        if (score > best_score) {
            best = domain;
            best_score = score;
            tie = false;
        } else if (score == best_score && score > 0) {
            tie = true;
        }
    }
    if (best_score > 0 && !tie) {
        out.domain = best;
        return out;
    }
    out.domain = std::string(kDefaultDomain);
    if (backend == nullptr || registry.size() < 2) return out;

    std::string labels;
    for (const auto& d : registry.domains()) labels += (labels.empty() ? "" : ", ") + d;
    CompletionRequest req;
    req.tag = std::string(tags::kTriage);
    req.temperature = 0.0;
    req.max_tokens = 32;
    req.messages.push_back(
        {Role::User, PromptCatalog::defaults().get("triage_user").render({{"labels", labels}, {"problem", problem.statement}})});
    out.call = backend->complete(req);
    out.used_backend = true;
    // First registry label mentioned in the reply wins; longest labels are
    // tried first so "science-problem" is not shadowed by a shorter label.
    auto domains = registry.domains();
    std::stable_sort(domains.begin(), domains.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    const std::string reply = lower(out.call->text);
    std::size_t best_pos = std::string::npos;
    for (const auto& d : domains) {
        const auto pos = reply.find(lower(d));
        if (pos != std::string::npos && (best_pos == std::string::npos || pos < best_pos)) {
            best_pos = pos;
            out.domain = d;
        }
    }
    return out;
}

}  // namespace atomr
