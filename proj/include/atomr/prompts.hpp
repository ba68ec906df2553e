#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace atomr {

using TemplateVars = std::map<std::string, std::string, std::less<>>;

/// Plain text with {{name}} placeholders.
class PromptTemplate {
public:
    PromptTemplate() = default;
    explicit PromptTemplate(std::string text);

    /// Substitutes every placeholder. Throws Error(Template) if a placeholder
    /// has no value; extra variables are ignored.
    std::string render(const TemplateVars& vars) const;

    const std::string& text() const noexcept { return text_; }
    const std::vector<std::string>& placeholders() const noexcept { return names_; }

private:
    std::string text_;
    std::vector<std::string> names_;
};

/// Named prompt templates. Built-in defaults are compiled from data/prompts;
/// a directory of <name>.txt files can override any of them.
class PromptCatalog {
public:
    static const PromptCatalog& defaults();

    /// Defaults overridden by every <name>.txt in `dir`. Unknown names are a
    /// ParseError so typos do not silently fall back to the default.
    static PromptCatalog load_dir(const std::filesystem::path& dir);

    const PromptTemplate& get(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

/// name -> text of the compiled-in defaults (generated at build time).
const std::map<std::string, std::string, std::less<>>& builtin_prompt_texts();

}  // namespace atomr
