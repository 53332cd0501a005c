#include "rulehound/text.hpp"

namespace rulehound::text {

std::string strip_comments_and_strings(std::string_view src) {
    enum class Mode { Code, LineComment, BlockComment, Str, Chr };
    std::string out(src);
    Mode mode = Mode::Code;
    const size_t n = src.size();
    for (size_t i = 0; i < n; ++i) {
        const char c = src[i];
        const char next = i + 1 < n ? src[i + 1] : '\0';
        switch (mode) {
        case Mode::Code:
            if (c == '/' && next == '/') {
                mode = Mode::LineComment;
                out[i] = ' ';
            } else if (c == '/' && next == '*') {
                mode = Mode::BlockComment;
                out[i] = ' ';
            } else if (c == '"') {
                mode = Mode::Str;
                out[i] = ' ';
            } else if (c == '\'') {
                mode = Mode::Chr;
                out[i] = ' ';
            }
            break;
        case Mode::LineComment:
            if (c == '\n') {
                // backslash-newline continues a // comment
                size_t j = i;
                while (j > 0 && (src[j - 1] == '\r')) --j;
                if (!(j > 0 && src[j - 1] == '\\')) mode = Mode::Code;
            } else {
                out[i] = ' ';
            }
            break;
        case Mode::BlockComment:
            if (c == '*' && next == '/') {
                out[i] = ' ';
                out[i + 1] = ' ';
                ++i;
                mode = Mode::Code;
            } else if (c != '\n') {
                out[i] = ' ';
            }
            break;
        case Mode::Str:
        case Mode::Chr: {
            const char delim = mode == Mode::Str ? '"' : '\'';
            if (c == '\\' && i + 1 < n && next != '\n') {
                out[i] = ' ';
                out[i + 1] = ' ';
                ++i;
            } else if (c == delim) {
                out[i] = ' ';
                mode = Mode::Code;
            } else if (c == '\n') {
                // unterminated literal; close at end of line
                mode = Mode::Code;
            } else {
                out[i] = ' ';
            }
            break;
        }
        }
    }
    return out;
}

std::string blank_preprocessor_lines(std::string_view stripped) {
    std::string out(stripped);
    const size_t n = stripped.size();
    size_t i = 0;
    while (i < n) {
        size_t line_start = i;
        size_t j = i;
        while (j < n && (stripped[j] == ' ' || stripped[j] == '\t')) ++j;
        bool directive = j < n && stripped[j] == '#';
        // advance to end of logical line, honouring continuations
        size_t k = line_start;
        while (k < n) {
            if (stripped[k] == '\n') {
                size_t b = k;
                while (b > line_start && stripped[b - 1] == '\r') --b;
                if (directive && b > line_start && stripped[b - 1] == '\\') {
                    ++k;
                    continue; // continuation, keep eating
                }
                break;
            }
            ++k;
        }
        if (directive) {
            for (size_t p = line_start; p < k && p < n; ++p) {
                if (out[p] != '\n') out[p] = ' ';
            }
        }
        i = k < n ? k + 1 : n;
    }
    return out;
}

bool is_c_identifier(std::string_view s) {
    if (s.empty() || !is_ident_start(s[0])) return false;
    for (char c : s)
        if (!is_ident_char(c)) return false;
    return true;
}

std::vector<Token> identifier_tokens(std::string_view s) {
    std::vector<Token> out;
    const size_t n = s.size();
    size_t i = 0;
    while (i < n) {
        if (is_ident_start(s[i]) && (i == 0 || !is_ident_char(s[i - 1]))) {
            size_t j = i + 1;
            while (j < n && is_ident_char(s[j])) ++j;
            out.push_back({i, j - i});
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

bool contains_identifier(std::string_view s, std::string_view ident) {
    if (ident.empty()) return false;
    size_t pos = 0;
    while ((pos = s.find(ident, pos)) != std::string_view::npos) {
        const bool left_ok = pos == 0 || !is_ident_char(s[pos - 1]);
        const size_t end = pos + ident.size();
        const bool right_ok = end >= s.size() || !is_ident_char(s[end]);
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

char next_nonspace_after(std::string_view s, size_t offset) {
    size_t i = offset;
    while (i < s.size() && is_ident_char(s[i])) ++i;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
    return i < s.size() ? s[i] : '\0';
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            std::string_view line = s.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            out.emplace_back(line);
            start = i + 1;
        }
    }
    if (!s.empty() && s.back() == '\n') out.pop_back();
    return out;
}

std::vector<size_t> line_starts(std::string_view s) {
    std::vector<size_t> starts{0};
    for (size_t i = 0; i < s.size(); ++i)
        if (s[i] == '\n') starts.push_back(i + 1);
    return starts;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace rulehound::text
