#include "rulehound/corpus.hpp"

#include <algorithm>
#include <regex>
#include <stdexcept>

#include "rulehound/errors.hpp"
#include "rulehound/hash.hpp"
#include "rulehound/text.hpp"

namespace rulehound {

namespace {

bool glob_match(const std::string& pattern, const std::string& path) {
    // Translate a shell glob into a regex. '*' does not cross '/': use '**'
    // for that. Patterns without '/' match against the basename.
    std::string subject = path;
    if (pattern.find('/') == std::string::npos) {
        auto slash = path.find_last_of('/');
        subject = slash == std::string::npos ? path : path.substr(slash + 1);
    }
    std::string re;
    for (size_t i = 0; i < pattern.size(); ++i) {
        char c = pattern[i];
        if (c == '*') {
            if (i + 1 < pattern.size() && pattern[i + 1] == '*') {
                re += ".*";
                ++i;
            } else {
                re += "[^/]*";
            }
        } else if (c == '?') {
            re += "[^/]";
        } else if (std::string("\\^$.|+()[]{}").find(c) != std::string::npos) {
            re += '\\';
            re += c;
        } else {
            re += c;
        }
    }
    return std::regex_match(subject, std::regex(re));
}

const char* kKeywords[] = {"if", "else", "for", "while", "switch", "do", "return", "sizeof"};

bool is_keyword(std::string_view s) {
    for (const char* k : kKeywords)
        if (s == k) return true;
    return false;
}

size_t prev_nonspace(std::string_view s, size_t i) {
    // returns npos when none
    while (i != static_cast<size_t>(-1)) {
        char c = s[i];
        if (c != ' ' && c != '\t' && c != '\n' && c != '\r') return i;
        --i;
    }
    return std::string_view::npos;
}

// Matches back from the ')' at `close` to its '(' in scan text.
size_t match_paren_backwards(std::string_view s, size_t close) {
    int depth = 0;
    for (size_t i = close; i != static_cast<size_t>(-1); --i) {
        if (s[i] == ')') ++depth;
        else if (s[i] == '(') {
            --depth;
            if (depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

// Walk back from the defining identifier to the start of the declaration:
// just past the previous ';', '}', '{' or the start of file, then forward
// over whitespace.
size_t declaration_start(std::string_view s, size_t name_begin) {
    size_t i = name_begin;
    while (i > 0) {
        char c = s[i - 1];
        if (c == ';' || c == '}' || c == '{') break;
        --i;
    }
    while (i < name_begin && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
    return i;
}

struct Opener {
    size_t name_begin = 0;
    size_t name_end = 0; // one past
};

// Given a depth-0 '{' at `brace`, decide whether it opens a function body and
// if so locate the defining identifier.
bool find_function_name(std::string_view scan, size_t brace, Opener& out) {
    size_t j = prev_nonspace(scan, brace == 0 ? std::string_view::npos : brace - 1);
    if (j == std::string_view::npos || scan[j] != ')') return false;
    size_t open = match_paren_backwards(scan, j);
    while (open != std::string_view::npos) {
        size_t m = prev_nonspace(scan, open == 0 ? std::string_view::npos : open - 1);
        if (m == std::string_view::npos || !text::is_ident_char(scan[m])) return false;
        size_t name_end = m + 1;
        size_t b = m;
        while (b > 0 && text::is_ident_char(scan[b - 1])) --b;
        std::string_view name = scan.substr(b, name_end - b);
        if (name.size() >= 2 && name[0] == '_' && name[1] == '_') {
            // `ret foo(args) __attribute__((x)) {` and kernel annotations like
            // __acquires(l): when another paren group precedes a dunder
            // identifier, treat it as a trailing annotation and retry.
            size_t prev = prev_nonspace(scan, b == 0 ? std::string_view::npos : b - 1);
            if (prev != std::string_view::npos && scan[prev] == ')') {
                open = match_paren_backwards(scan, prev);
                continue;
            }
        }
        if (!text::is_ident_start(name[0]) || is_keyword(name)) return false;
        out.name_begin = b;
        out.name_end = name_end;
        return true;
    }
    return false;
}

} // namespace

std::vector<FunctionSpan> extract_functions(std::string_view file_text) {
    const std::string stripped = text::strip_comments_and_strings(file_text);
    const std::string scan = text::blank_preprocessor_lines(stripped);
    std::vector<FunctionSpan> spans;

    const size_t n = scan.size();
    int depth = 0;
    size_t i = 0;
    while (i < n) {
        char c = scan[i];
        if (c == '{') {
            Opener op;
            if (depth == 0 && find_function_name(scan, i, op)) {
                FunctionSpan span;
                span.name = std::string(scan.substr(op.name_begin, op.name_end - op.name_begin));
                span.name_offset = op.name_begin;
                span.body_open = i;
                span.start = declaration_start(scan, op.name_begin);
                // match the body forward
                int body_depth = 0;
                size_t k = i;
                for (; k < n; ++k) {
                    if (scan[k] == '{') ++body_depth;
                    else if (scan[k] == '}') {
                        --body_depth;
                        if (body_depth == 0) {
                            ++k;
                            break;
                        }
                    }
                }
                span.degraded = body_depth != 0;
                span.end = std::min(k, n);
                span.body = std::string(file_text.substr(span.start, span.end - span.start));
                span.header = text::collapse_whitespace(
                    file_text.substr(span.start, span.body_open - span.start));
                spans.push_back(std::move(span));
                i = spans.back().end;
                depth = 0;
                continue;
            }
            ++depth;
        } else if (c == '}') {
            if (depth > 0) --depth;
        }
        ++i;
    }
    return spans;
}

SourceCorpus load_corpus(const std::filesystem::path& root,
                         const std::vector<std::string>& include_globs) {
    namespace fs = std::filesystem;
    if (!fs::exists(root) || !fs::is_directory(root))
        throw ConfigError("corpus root not readable: " + root.string());

    const std::vector<std::string> globs =
        include_globs.empty() ? std::vector<std::string>{"*.c", "*.h"} : include_globs;

    SourceCorpus corpus;
    corpus.root = root;

    std::vector<std::string> paths;
    for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file()) continue;
        std::string rel = fs::relative(it->path(), root).generic_string();
        bool matched = false;
        for (const auto& g : globs)
            if (glob_match(g, rel)) {
                matched = true;
                break;
            }
        if (matched) paths.push_back(std::move(rel));
    }
    std::sort(paths.begin(), paths.end());

    for (const auto& rel : paths) {
        std::string raw;
        try {
            raw = read_text_file(root / rel);
        } catch (const std::exception& e) {
            corpus.scan_log.push_back("skipped " + rel + ": " + e.what());
            continue;
        }
        if (raw.find('\0') != std::string::npos) {
            corpus.scan_log.push_back("skipped " + rel + ": binary content");
            continue;
        }
        SourceFile f;
        f.path = rel;
        f.raw = std::move(raw);
        f.stripped = text::strip_comments_and_strings(f.raw);
        f.scan_text = text::blank_preprocessor_lines(f.stripped);
        f.functions = extract_functions(f.raw);
        for (auto& span : f.functions) span.file = f.path;
        f.lines = text::line_starts(f.raw);
        corpus.files.push_back(std::move(f));
    }

    for (size_t fi = 0; fi < corpus.files.size(); ++fi) {
        const auto& f = corpus.files[fi];
        for (const auto& tok : text::identifier_tokens(f.stripped)) {
            std::string ident = f.stripped.substr(tok.offset, tok.length);
            corpus.index[ident].push_back({fi, tok.offset});
        }
    }
    return corpus;
}

const SourceFile* SourceCorpus::find_file(const std::string& relpath) const {
    for (const auto& f : files)
        if (f.path == relpath) return &f;
    // fall back to suffix match for diff paths rooted elsewhere
    for (const auto& f : files) {
        if (f.path.size() < relpath.size()) continue;
        if (f.path.size() == relpath.size()) continue;
        if (f.path.compare(f.path.size() - relpath.size(), relpath.size(), relpath) == 0 &&
            f.path[f.path.size() - relpath.size() - 1] == '/')
            return &f;
    }
    return nullptr;
}

const FunctionSpan* SourceCorpus::enclosing_function(const SourceFile& file, size_t offset) const {
    for (const auto& span : file.functions)
        if (offset >= span.start && offset < span.end) return &span;
    return nullptr;
}

std::string to_string(MatchMode m) {
    return m == MatchMode::Call ? "call" : "bare-identifier";
}

MatchMode match_mode_from_string(const std::string& s) {
    if (s == "call") return MatchMode::Call;
    if (s == "bare-identifier" || s == "bare") return MatchMode::BareIdentifier;
    throw ConfigError("unknown match mode: " + s);
}

std::vector<CallSiteCandidate> enumerate_call_sites(const SourceCorpus& corpus,
                                                    const std::string& target,
                                                    MatchMode mode) {
    if (!text::is_c_identifier(target))
        throw ConfigError("target is not a C identifier: " + target);

    auto it = corpus.index.find(target);
    std::vector<CallSiteCandidate> out;
    if (it == corpus.index.end()) return out;

    // (file, span start) -> candidate under construction
    std::map<std::pair<size_t, size_t>, CallSiteCandidate> grouped;
    for (const auto& occ : it->second) {
        const SourceFile& f = corpus.files[occ.file_index];
        if (mode == MatchMode::Call &&
            text::next_nonspace_after(f.stripped, occ.offset) != '(')
            continue;
        const FunctionSpan* span = corpus.enclosing_function(f, occ.offset);
        if (span == nullptr) continue;            // top-level occurrence
        if (occ.offset == span->name_offset) continue; // the definition itself
        auto key = std::make_pair(occ.file_index, span->start);
        auto& cand = grouped[key];
        if (cand.offsets.empty()) {
            cand.target = target;
            cand.span = *span;
        }
        cand.offsets.push_back(occ.offset - span->start);
    }

    for (auto& [key, cand] : grouped) {
        std::sort(cand.offsets.begin(), cand.offsets.end());
        cand.id = content_id(cand.span.file + "|" + cand.span.name + "|" + cand.target + "|" +
                             std::to_string(cand.offsets.front()));
        out.push_back(std::move(cand));
    }
    // grouped map keys are (file index, span start); files are sorted by path,
    // so this is already (path, offset) order.
    return out;
}

Json candidate_to_json(const CallSiteCandidate& c) {
    Json j;
    j["id"] = c.id;
    j["file"] = c.span.file;
    j["function"] = c.span.name;
    j["target"] = c.target;
    j["offsets"] = c.offsets;
    j["body"] = c.span.body;
    return j;
}

} // namespace rulehound
