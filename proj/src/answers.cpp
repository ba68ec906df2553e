#include "atomr/answers.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

namespace atomr {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

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

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    lines.push_back(cur);
    return lines;
}

// Leading list bullets and markdown emphasis.
std::string strip_decoration(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '-' || line[i] == '*' ||
                               line[i] == '#' || line[i] == '>')) {
        ++i;
    }
    std::string out(line.substr(i));
    out.erase(std::remove(out.begin(), out.end(), '*'), out.end());
    return trim(out);
}

}  // namespace

std::optional<char> extract_mcq(std::string_view text, std::size_t option_count) {
    if (option_count == 0) return std::nullopt;
    const char last_letter = static_cast<char>('A' + std::min<std::size_t>(option_count, 26) - 1);
    auto in_range = [&](char c) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return c >= 'A' && c <= last_letter;
    };
    static const std::regex sentence(R"(correct\s+answer\s+is[\s:*]*\(\s*([A-Za-z])\s*\))", std::regex::icase);
    std::optional<char> found;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), sentence); it != std::sregex_iterator(); ++it) {
        const char c = (*it)[1].str()[0];
        if (in_range(c)) found = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    if (found) return found;
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
        if (s[i] != '(' || s[i + 2] != ')') continue;
        const char c = s[i + 1];
        if (c < 'A' || c > last_letter) continue;
        if (i > 0 && is_alnum(s[i - 1])) continue;
        if (i + 3 < s.size() && is_alnum(s[i + 3])) continue;
        found = c;
    }
    return found;
}

std::string normalize_value(std::string_view value) {
    std::string out;
    bool space = false;
    for (char c : value) {
        if (c == '-' || c == '_' || std::isspace(static_cast<unsigned char>(c))) {
            space = true;
            continue;
        }
        if (space && !out.empty()) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    auto strip = [](char c) { return c == '"' || c == '\'' || c == '`' || c == '*' || c == '.' || c == ' '; };
    while (!out.empty() && strip(out.back())) out.pop_back();
    std::size_t b = 0;
    while (b < out.size() && strip(out[b])) ++b;
    return out.substr(b);
}

Grid parse_grid(std::string_view text, const GridSchema& schema) {
    const auto houses = static_cast<std::size_t>(std::max(schema.houses, 0));
    Grid grid(houses, std::vector<std::optional<std::string>>(schema.attributes.size()));
    const auto lines = split_lines(text);
    std::optional<std::size_t> start;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lower(strip_decoration(lines[i])).rfind("solution:", 0) == 0) start = i;
    }
    if (!start) return grid;

    static const std::regex house_line(R"(^house\s+(\d+)\s*:(.*)$)", std::regex::icase);
    std::vector<bool> seen(houses, false);
    for (std::size_t i = *start; i < lines.size(); ++i) {
        std::string line = strip_decoration(lines[i]);
        if (i == *start) line = trim(line.substr(line.find(':') + 1));
        std::smatch m;
        if (!std::regex_match(line, m, house_line)) continue;
        const auto k = std::stoul(m[1].str());
        if (k < 1 || k > houses || seen[k - 1]) continue;
        seen[k - 1] = true;

        std::vector<std::optional<std::string>> row(schema.attributes.size());
        std::vector<bool> conflict(schema.attributes.size(), false);
        std::string token;
        auto flush = [&] {
            const std::string norm = normalize_value(token);
            token.clear();
            if (norm.empty()) return;
            std::optional<std::size_t> attr;
            std::string canonical;
            int matches = 0;
            for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
                for (const auto& v : schema.attributes[a].values) {
                    if (normalize_value(v) == norm) {
                        attr = a;
                        canonical = v;
                        ++matches;
                    }
                }
            }
            if (matches != 1) return;
            if (row[*attr] && *row[*attr] != canonical) conflict[*attr] = true;
            row[*attr] = canonical;
        };
        for (char c : m[2].str()) {
            if (c == '(' || c == ')' || c == ',' || c == ';') {
                flush();
            } else {
                token.push_back(c);
            }
        }
        flush();
        for (std::size_t a = 0; a < row.size(); ++a) {
            if (!conflict[a]) grid[k - 1][a] = row[a];
        }
    }
    return grid;
}

std::string format_grid(const Grid& grid) {
    std::string out = "Solution:";
    for (std::size_t h = 0; h < grid.size(); ++h) {
        out += "\nHouse " + std::to_string(h + 1) + ":";
        for (std::size_t a = 0; a < grid[h].size(); ++a) {
            out += (a == 0 ? " " : ", ");
            out += grid[h][a].value_or("?");
        }
    }
    return out;
}

namespace {

// Content of \boxed{...} with brace matching; nullopt when absent.
std::optional<std::string> last_boxed(std::string_view text) {
    const auto pos = text.rfind("\\boxed{");
    if (pos == std::string_view::npos) return std::nullopt;
    int depth = 1;
    std::string out;
    for (std::size_t i = pos + 7; i < text.size(); ++i) {
        if (text[i] == '{') ++depth;
        if (text[i] == '}' && --depth == 0) return out;
        out.push_back(text[i]);
    }
    return std::nullopt;
}

__extension__ typedef __int128 i128;

struct Rational {
    i128 num = 0;
    i128 den = 1;
};

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

std::optional<i128> parse_int(std::string_view s) {
    if (s.empty() || s.size() > 30) return std::nullopt;
    i128 v = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        v = v * 10 + (c - '0');
    }
    return v;
}

std::optional<Rational> parse_decimal(std::string_view s) {
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        neg = s[0] == '-';
        s.remove_prefix(1);
    }
    const auto dot = s.find('.');
    std::string digits(s.substr(0, dot));
    std::size_t scale = 0;
    if (dot != std::string_view::npos) {
        const auto frac = s.substr(dot + 1);
        digits += frac;
        scale = frac.size();
        if (digits.empty() || frac.find('.') != std::string_view::npos) return std::nullopt;
    }
    const auto v = parse_int(digits);
    if (!v || scale > 30) return std::nullopt;
    Rational r{neg ? -*v : *v, 1};
    for (std::size_t i = 0; i < scale; ++i) r.den *= 10;
    return r;
}

std::optional<Rational> parse_rational(std::string_view raw) {
    std::string s = normalize_numeric(raw);
    static const std::regex frac(R"(^([-+]?)\\[dt]?frac\{([^{}]+)\}\{([^{}]+)\}$)");
    std::smatch m;
    std::optional<Rational> num, den;
    if (std::regex_match(s, m, frac)) {
        num = parse_decimal(m[1].str() + m[2].str());
        den = parse_decimal(m[3].str());
    } else if (const auto slash = s.find('/'); slash != std::string::npos) {
        num = parse_decimal(std::string_view(s).substr(0, slash));
        den = parse_decimal(std::string_view(s).substr(slash + 1));
    } else {
        return parse_decimal(s);
    }
    if (!num || !den || den->num == 0) return std::nullopt;
    Rational r{num->num * den->den, num->den * den->num};
    if (r.den < 0) {
        r.num = -r.num;
        r.den = -r.den;
    }
    return r;
}

}  // namespace

std::string normalize_numeric(std::string_view value) {
    std::string s(value);
    if (auto boxed = last_boxed(s)) s = *boxed;
    std::string out;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c)) && c != '$') out.push_back(c);
    }
    if (!out.empty() && out[0] == '+') out.erase(0, 1);
    static const std::regex decimal(R"(^-?\d*\.\d+$)");
    if (std::regex_match(out, decimal)) {
        while (out.back() == '0') out.pop_back();
        if (out.back() == '.') out.pop_back();
        if (out.empty() || out == "-") out += "0";
    }
    if (out == "-0") out = "0";
    return out;
}

std::optional<std::string> extract_numeric(std::string_view text) {
    if (auto boxed = last_boxed(text)) return normalize_numeric(*boxed);
    const auto lines = split_lines(text);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        const std::string l = strip_decoration(*it);
        if (lower(l).rfind("answer:", 0) == 0) {
            std::string v = trim(l.substr(7));
            if (!v.empty()) return normalize_numeric(v);
        }
    }
    static const std::regex number(R"([-+]?\d+(?:\.\d+)?(?:/\d+)?)");
    std::optional<std::string> last;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), number); it != std::sregex_iterator(); ++it) {
        last = it->str();
    }
    if (last) return normalize_numeric(*last);
    return std::nullopt;
}

bool numeric_equal(std::string_view a, std::string_view b) {
    const auto ra = parse_rational(a);
    const auto rb = parse_rational(b);
    if (ra && rb) {
        const i128 ga = gcd128(ra->num, ra->den), gb = gcd128(rb->num, rb->den);
        const i128 an = ga ? ra->num / ga : 0, ad = ga ? ra->den / ga : 1;
        const i128 bn = gb ? rb->num / gb : 0, bd = gb ? rb->den / gb : 1;
        return an == bn && (an == 0 || ad == bd);
    }
    return normalize_numeric(a) == normalize_numeric(b);
}

std::optional<std::string> extract_free_text(std::string_view text) {
    const auto lines = split_lines(text);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        const std::string l = strip_decoration(*it);
        if (lower(l).rfind("answer:", 0) == 0) {
            std::string v = trim(l.substr(7));
            if (!v.empty()) return v;
        }
    }
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        std::string l = trim(*it);
        if (!l.empty()) return l;
    }
    return std::nullopt;
}

std::optional<Answer> extract_answer(std::string_view text, const AnswerSchema& schema) {
    return std::visit(
        [&](const auto& s) -> std::optional<Answer> {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, MultipleChoiceSchema>) {
                if (auto c = extract_mcq(text, s.options.size())) return McqAnswer{*c};
                return std::nullopt;
            } else if constexpr (std::is_same_v<S, GridSchema>) {
                Grid g = parse_grid(text, s);
                const bool any = std::any_of(g.begin(), g.end(), [](const auto& row) {
                    return std::any_of(row.begin(), row.end(), [](const auto& c) { return c.has_value(); });
                });
                if (!any) return std::nullopt;
                return GridAnswer{std::move(g)};
            } else if constexpr (std::is_same_v<S, NumericSchema>) {
                if (auto v = extract_numeric(text)) return TextAnswer{*v};
                return std::nullopt;
            } else {
                if (auto v = extract_free_text(text)) return TextAnswer{*v};
                return std::nullopt;
            }
        },
        schema);
}

std::string format_answer(const Answer& answer) {
    return std::visit(
        [](const auto& a) -> std::string {
            using A = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<A, McqAnswer>) {
                return std::string("The correct answer is (") + a.letter + ")";
            } else if constexpr (std::is_same_v<A, GridAnswer>) {
                return format_grid(a.cells);
            } else {
                return "Answer: " + a.value;
            }
        },
        answer);
}

}  // namespace atomr
