#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rulehound::text {

/// Replaces the contents of comments, string literals and character literals
/// with spaces. The result has exactly the same length as the input and
/// newlines are preserved, so byte offsets and line numbers stay valid in
/// both views.
///
/// Handled syntax: `//` (with backslash continuation), `/* */`, `"..."` and
/// `'...'` with escape sequences. An unterminated string or char literal is
/// closed at the end of its line, which bounds the damage of a stray quote
/// to a single line.
std::string strip_comments_and_strings(std::string_view src);

/// Blanks preprocessor directives (including backslash-continued lines) in an
/// already-stripped buffer. Braces and parens inside macro bodies must not
/// influence function extraction.
std::string blank_preprocessor_lines(std::string_view stripped);

inline bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
}

bool is_c_identifier(std::string_view s);

struct Token {
    size_t offset = 0;
    size_t length = 0;
};

/// All C identifier tokens in `s` (maximal runs of identifier characters that
/// do not start with a digit).
std::vector<Token> identifier_tokens(std::string_view s);

/// True if `s` contains `ident` as a word-bounded token.
bool contains_identifier(std::string_view s, std::string_view ident);

/// Offset just past the token at `offset`, skipping whitespace; returns the
/// next non-whitespace character or '\0' at end.
char next_nonspace_after(std::string_view s, size_t offset);

std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

/// Byte offset of the start of each line (line 1 starts at offset 0).
std::vector<size_t> line_starts(std::string_view s);

std::string trim(std::string_view s);

} // namespace rulehound::text
