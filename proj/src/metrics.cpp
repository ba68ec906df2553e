#include "atomr/metrics.hpp"

#include "atomr/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace atomr {

using nlohmann::json;

void validate(const DiscreteDistribution& dist) {
    if (dist.outcomes.empty()) throw Error(Errc::InvalidDistribution, "no outcomes");
    double sum = 0;
    for (const auto& [label, p] : dist.outcomes) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw Error(Errc::InvalidDistribution, "bad probability for " + label);
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw Error(Errc::InvalidDistribution, "probabilities sum to " + std::to_string(sum));
}

DiscreteDistribution from_samples(const std::vector<std::string>& samples) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : samples) ++counts[s];
    DiscreteDistribution d;
    for (const auto& [label, n] : counts) {
        d.outcomes.emplace_back(label, static_cast<double>(n) / static_cast<double>(samples.size()));
    }
    return d;
}

double entropy(const std::vector<double>& probabilities) {
    DiscreteDistribution d;
    for (double p : probabilities) d.outcomes.emplace_back("", p);
    return entropy(d);
}

double entropy(const DiscreteDistribution& dist) {
    validate(dist);
    double h = 0;
    for (const auto& [label, p] : dist.outcomes) {
        if (p > 0) h -= p * std::log2(p);
    }
    return h < 0 ? 0.0 : h;
}

double weighted_step_entropy(const std::vector<double>& r, const std::vector<double>& e) {
    if (r.size() != e.size()) {
        throw Error(Errc::DimensionMismatch,
                    "row has " + std::to_string(r.size()) + " entries, entropies " + std::to_string(e.size()));
    }
    entropy(r);  // validates r
    double sum = 0;
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (!(e[j] >= 0.0)) throw Error(Errc::InvalidDistribution, "negative per-action entropy");
        sum += r[j] * e[j];
    }
    return sum;
}

namespace {

std::vector<NodeId> final_path(const TreeState& s) {
    // Walk the active chain's ancestry; mirrors AtomicTree::path_to.
    std::vector<std::pair<const Chain*, std::size_t>> segs;
    const Chain* c = &s.chains.at(s.active);
    std::size_t take = c->nodes.size();
    while (true) {
        segs.emplace_back(c, take);
        if (!c->parent) break;
        take = c->parent->index + 1;
        c = &s.chains.at(c->parent->chain);
    }
    std::vector<NodeId> path;
    for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
        path.insert(path.end(), it->first->nodes.begin(),
                    it->first->nodes.begin() + static_cast<std::ptrdiff_t>(it->second));
    }
    return path;
}

}  // namespace

ActionSelectionProfile action_selection_profile(const std::vector<TreeState>& traces) {
    std::vector<std::array<std::size_t, kActionCount>> counts;
    for (const auto& t : traces) {
        const auto path = final_path(t);
        if (counts.size() < path.size()) counts.resize(path.size(), {});
        for (std::size_t i = 0; i < path.size(); ++i) ++counts[i][index_of(t.nodes.at(path[i]).action)];
    }
    ActionSelectionProfile p;
    for (const auto& row : counts) {
        std::size_t total = 0;
        for (auto n : row) total += n;
        std::array<double, kActionCount> r{};
        for (std::size_t j = 0; j < kActionCount; ++j) r[j] = static_cast<double>(row[j]) / static_cast<double>(total);
        p.r.push_back(r);
    }
    return p;
}

TraceStats trace_stats(const TreeState& tree) {
    TraceStats st;
    for (Action a : kAllActions) st.histogram[a] = 0;
    st.rounds = tree.nodes.size();
    for (const auto& [id, n] : tree.nodes) {
        ++st.histogram[n.action];
        if (n.action == Action::HypothesisVerification) ++st.verifications;
        st.checks += n.check_reports.size();
        for (const auto& r : n.check_reports) {
            if (r.verdict == Verdict::Error) ++st.check_errors;
        }
        st.revisions += static_cast<std::size_t>(n.revisions);
        if (n.flagged) ++st.flagged;
    }
    for (const auto& [id, c] : tree.chains) {
        if (!c.nodes.empty()) ++st.chains;
    }
    for (const auto& e : tree.events) {
        if (e.kind == "backtrack") ++st.backtracks;
    }
    st.usage = tree.usage;
    return st;
}

namespace {

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

json schema_json(const AnswerSchema& schema) {
    if (const auto* m = std::get_if<MultipleChoiceSchema>(&schema)) return {{"type", "mcq"}, {"options", m->options}};
    if (const auto* g = std::get_if<GridSchema>(&schema)) {
        json attrs = json::array();
        for (const auto& a : g->attributes) attrs.push_back({{"name", a.name}, {"values", a.values}});
        return {{"type", "grid"}, {"houses", g->houses}, {"attributes", attrs}};
    }
    if (std::holds_alternative<NumericSchema>(schema)) return {{"type", "numeric"}};
    return {{"type", "free_text"}};
}

json report_json(const CheckReport& r) {
    json kinds = json::array();
    for (auto k : r.kinds) kinds.push_back(std::string(key(k)));
    return {{"verdict", r.verdict == Verdict::Error ? "error" : "no_error"},
            {"kinds", kinds},
            {"rationale", r.rationale},
            {"suggestion", opt(r.suggestion)}};
}

json usage_json(const Usage& u) {
    return {{"calls", u.calls},
            {"prompt_tokens", u.prompt_tokens},
            {"completion_tokens", u.completion_tokens},
            {"latency_ms", u.latency_ms}};
}

// Reader that reports the JSON path of whatever it failed on.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    Reader at(const char* key) const {
        if (!j_.is_object()) fail("expected an object");
        auto it = j_.find(key);
        if (it == j_.end()) throw ParseError(path_ + "." + key, "missing field");
        return Reader(*it, path_ + "." + key);
    }
    Reader at(std::size_t i) const { return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

    std::size_t size() const {
        if (!j_.is_array()) fail("expected an array");
        return j_.size();
    }
    bool is_null() const { return j_.is_null(); }

    std::string str() const {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }
    std::optional<std::string> opt_str() const {
        if (j_.is_null()) return std::nullopt;
        return str();
    }
    std::int64_t integer() const {
        if (!j_.is_number_integer()) fail("expected an integer");
        return j_.get<std::int64_t>();
    }
    std::uint32_t id() const {
        const auto v = integer();
        if (v < 0 || v > static_cast<std::int64_t>(UINT32_MAX)) fail("id out of range");
        return static_cast<std::uint32_t>(v);
    }
    double number() const {
        if (!j_.is_number()) fail("expected a number");
        return j_.get<double>();
    }
    bool boolean() const {
        if (!j_.is_boolean()) fail("expected a boolean");
        return j_.get<bool>();
    }
    std::vector<std::string> strings() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).str());
        return out;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(path_, msg); }

private:
    const json& j_;
    std::string path_;
};

AnswerSchema read_schema(const Reader& r) {
    const std::string type = r.at("type").str();
    if (type == "mcq") return MultipleChoiceSchema{r.at("options").strings()};
    if (type == "numeric") return NumericSchema{};
    if (type == "free_text") return FreeTextSchema{};
    if (type != "grid") r.at("type").fail("unknown schema type '" + type + "'");
    GridSchema g;
    g.houses = static_cast<int>(r.at("houses").integer());
    const Reader attrs = r.at("attributes");
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        g.attributes.push_back({attrs.at(i).at("name").str(), attrs.at(i).at("values").strings()});
    }
    return g;
}

Usage read_usage(const Reader& r) {
    return Usage{r.at("calls").integer(), r.at("prompt_tokens").integer(), r.at("completion_tokens").integer(),
                 r.at("latency_ms").integer()};
}

}  // namespace

std::string serialize_trace(const TreeState& s) {
    json chains = json::array();
    for (const auto& [id, c] : s.chains) {
        json nodes = json::array();
        for (NodeId n : c.nodes) nodes.push_back(n.value);
        chains.push_back({{"id", id.value},
                          {"parent", c.parent ? json{{"chain", c.parent->chain.value}, {"index", c.parent->index}}
                                              : json(nullptr)},
                          {"nodes", nodes},
                          {"status", std::string(to_string(c.status))},
                          {"summary", opt(c.summary)}});
    }
    json nodes = json::array();
    for (const auto& [id, n] : s.nodes) {
        json reports = json::array();
        for (const auto& r : n.check_reports) reports.push_back(report_json(r));
        nodes.push_back({{"id", id.value},
                         {"action", std::string(key(n.action))},
                         {"guidance", n.guidance},
                         {"content", n.content},
                         {"check_reports", reports},
                         {"revisions", n.revisions},
                         {"flagged", n.flagged},
                         {"created_round", n.created_round}});
    }
    json events = json::array();
    for (const auto& e : s.events) events.push_back({{"round", e.round}, {"kind", e.kind}, {"detail", e.detail}});

    json doc = {
        {"format", "atomr-trace"},
        {"version", 1},
        {"problem",
         {{"id", s.problem.id},
          {"statement", s.problem.statement},
          {"domain_hint", opt(s.problem.domain_hint)},
          {"schema", schema_json(s.problem.schema)}}},
        {"chains", chains},
        {"nodes", nodes},
        {"active", s.active.value},
        {"termination", s.termination ? json{{"mode", std::string(to_string(s.termination->mode))},
                                             {"final_answer", s.termination->final_answer}}
                                      : json(nullptr)},
        {"events", events},
        {"usage", usage_json(s.usage)},
        {"evaluation", s.evaluation ? json{{"suite", s.evaluation->suite},
                                           {"correct", s.evaluation->correct},
                                           {"partial", s.evaluation->partial}}
                                    : json(nullptr)},
        {"next_node", s.next_node},
        {"next_chain", s.next_chain},
    };
    return doc.dump(2) + "\n";
}

AtomicTree deserialize_trace(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ParseError("byte " + std::to_string(e.byte), e.what());
    }
    const Reader root(doc, "$");
    if (root.at("format").str() != "atomr-trace") root.at("format").fail("not a trace document");
    if (root.at("version").integer() != 1) root.at("version").fail("unsupported version");

    TreeState s;
    const Reader p = root.at("problem");
    s.problem.id = p.at("id").str();
    s.problem.statement = p.at("statement").str();
    s.problem.domain_hint = p.at("domain_hint").opt_str();
    s.problem.schema = read_schema(p.at("schema"));

    const Reader chains = root.at("chains");
    for (std::size_t i = 0; i < chains.size(); ++i) {
        const Reader c = chains.at(i);
        Chain chain;
        chain.id = ChainId{c.at("id").id()};
        if (!c.at("parent").is_null()) {
            const Reader bp = c.at("parent");
            chain.parent = BranchPoint{ChainId{bp.at("chain").id()}, static_cast<std::size_t>(bp.at("index").id())};
        }
        const Reader ns = c.at("nodes");
        for (std::size_t k = 0; k < ns.size(); ++k) chain.nodes.push_back(NodeId{ns.at(k).id()});
        const auto status = try_parse_chain_status(c.at("status").str());
        if (!status) c.at("status").fail("unknown chain status");
        chain.status = *status;
        chain.summary = c.at("summary").opt_str();
        if (!s.chains.emplace(chain.id, chain).second) c.at("id").fail("duplicate chain id");
    }

    const Reader nodes = root.at("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Reader r = nodes.at(i);
        Node n;
        n.id = NodeId{r.at("id").id()};
        const auto action = try_parse_action(r.at("action").str());
        if (!action) r.at("action").fail("unknown action");
        n.action = *action;
        n.guidance = r.at("guidance").str();
        n.content = r.at("content").str();
        const Reader reports = r.at("check_reports");
        for (std::size_t k = 0; k < reports.size(); ++k) {
            const Reader cr = reports.at(k);
            CheckReport rep;
            const std::string v = cr.at("verdict").str();
            if (v != "error" && v != "no_error") cr.at("verdict").fail("unknown verdict");
            rep.verdict = v == "error" ? Verdict::Error : Verdict::NoError;
            const Reader kinds = cr.at("kinds");
            for (std::size_t q = 0; q < kinds.size(); ++q) {
                const auto kind = try_parse_error_kind(kinds.at(q).str());
                if (!kind) kinds.at(q).fail("unknown error kind");
                rep.kinds.push_back(*kind);
            }
            rep.rationale = cr.at("rationale").str();
            rep.suggestion = cr.at("suggestion").opt_str();
            n.check_reports.push_back(std::move(rep));
        }
        n.revisions = static_cast<int>(r.at("revisions").integer());
        n.flagged = r.at("flagged").boolean();
        n.created_round = static_cast<int>(r.at("created_round").integer());
        if (!s.nodes.emplace(n.id, n).second) r.at("id").fail("duplicate node id");
    }

    s.active = ChainId{root.at("active").id()};
    if (!root.at("termination").is_null()) {
        const Reader t = root.at("termination");
        const auto mode = try_parse_termination_mode(t.at("mode").str());
        if (!mode) t.at("mode").fail("unknown termination mode");
        s.termination = Termination{*mode, t.at("final_answer").str()};
    }
    const Reader events = root.at("events");
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Reader e = events.at(i);
        s.events.push_back({static_cast<int>(e.at("round").integer()), e.at("kind").str(), e.at("detail").str()});
    }
    s.usage = read_usage(root.at("usage"));
    if (!root.at("evaluation").is_null()) {
        const Reader e = root.at("evaluation");
        s.evaluation = Evaluation{e.at("suite").str(), e.at("correct").boolean(), e.at("partial").number()};
    }
    s.next_node = root.at("next_node").id();
    s.next_chain = root.at("next_chain").id();

    if (auto problem = check_invariants(s)) throw ParseError("$", "inconsistent tree: " + *problem);
    return AtomicTree::from_state(std::move(s));
}

AtomicTree load_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot read trace " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return deserialize_trace(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path.filename().string() + ":" + e.location(), e.what());
    }
}

void save_trace(const std::filesystem::path& path, const AtomicTree& tree) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write trace " + path.string());
    out << serialize_trace(tree);
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

std::string_view to_string(SftFilter f) noexcept { return f == SftFilter::All ? "all" : "correct_only"; }

std::optional<SftFilter> try_parse_sft_filter(std::string_view text) {
    if (text == "all") return SftFilter::All;
    if (text == "correct_only" || text == "correct-only") return SftFilter::CorrectOnly;
    return std::nullopt;
}

std::vector<SftRecord> to_sft_records(const std::vector<TreeState>& trees, const SftOptions& options) {
    std::vector<SftRecord> out;
    for (const auto& t : trees) {
        if (!t.termination) continue;
        const bool correct = t.evaluation && t.evaluation->correct;
        if (options.filter == SftFilter::CorrectOnly && !correct) continue;
        SftRecord rec;
        rec.instruction = t.problem.statement;
        std::size_t k = 0;
        for (NodeId id : final_path(t)) {
            const Node& n = t.nodes.at(id);
            if (k > 0) rec.reasoning += "\n";
            rec.reasoning += "Step " + std::to_string(++k) + " (" + std::string(display_name(n.action)) + "): " + n.content;
        }
        rec.answer = t.termination->final_answer;
        rec.meta = SftMeta{t.evaluation ? t.evaluation->suite : std::string(), t.nodes.size(), correct};
        if (rec.instruction.empty() || rec.reasoning.empty() || rec.answer.empty()) continue;
        if (options.max_chars > 0 &&
            rec.instruction.size() + rec.reasoning.size() + rec.answer.size() > options.max_chars) {
            continue;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::string sft_to_jsonl(const std::vector<SftRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        const json j = {{"instruction", r.instruction},
                        {"reasoning", r.reasoning},
                        {"answer", r.answer},
                        {"meta", {{"suite", r.meta.suite}, {"rounds", r.meta.rounds}, {"correct", r.meta.correct}}}};
        out += j.dump() + "\n";
    }
    return out;
}

void write_sft(const std::filesystem::path& path, const std::vector<SftRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << sft_to_jsonl(records);
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

}  // namespace atomr
