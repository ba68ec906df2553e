#include "atomr/prompts.hpp"

#include "atomr/error.hpp"

#include <fstream>
#include <sstream>

namespace atomr {

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
    std::size_t pos = 0;
    while ((pos = text_.find("{{", pos)) != std::string::npos) {
        const auto end = text_.find("}}", pos + 2);
        if (end == std::string::npos) throw Error(Errc::Template, "unterminated placeholder");
        std::string name = text_.substr(pos + 2, end - pos - 2);
        if (name.empty() || name.find_first_not_of("abcdefghijklmnopqrstuvwxyz_0123456789") != std::string::npos) {
            throw Error(Errc::Template, "bad placeholder name '" + name + "'");
        }
        names_.push_back(std::move(name));
        pos = end + 2;
    }
}

std::string PromptTemplate::render(const TemplateVars& vars) const {
    std::string out;
    out.reserve(text_.size());
    std::size_t pos = 0;
    while (true) {
        const auto open = text_.find("{{", pos);
        if (open == std::string::npos) {
            out.append(text_, pos, std::string::npos);
            return out;
        }
        out.append(text_, pos, open - pos);
        const auto close = text_.find("}}", open + 2);
        const std::string_view name(text_.data() + open + 2, close - open - 2);
        auto it = vars.find(name);
        if (it == vars.end()) throw Error(Errc::Template, "no value for {{" + std::string(name) + "}}");
        out += it->second;
        pos = close + 2;
    }
}

const PromptCatalog& PromptCatalog::defaults() {
    static const PromptCatalog catalog = [] {
        PromptCatalog c;
        for (const auto& [name, text] : builtin_prompt_texts()) c.templates_.emplace(name, PromptTemplate(text));
        return c;
    }();
    return catalog;
}

PromptCatalog PromptCatalog::load_dir(const std::filesystem::path& dir) {
    PromptCatalog c = defaults();
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw Error(Errc::Io, "not a directory: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        const std::string name = entry.path().stem().string();
        auto it = c.templates_.find(name);
        if (it == c.templates_.end()) throw ParseError(entry.path().string(), "unknown prompt name '" + name + "'");
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream text;
        text << in.rdbuf();
        it->second = PromptTemplate(text.str());
    }
    return c;
}

const PromptTemplate& PromptCatalog::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw Error(Errc::Template, "unknown prompt '" + std::string(name) + "'");
    return it->second;
}

std::vector<std::string> PromptCatalog::names() const {
    std::vector<std::string> out;
    for (const auto& [name, t] : templates_) out.push_back(name);
    return out;
}

}  // namespace atomr
