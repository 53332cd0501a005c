#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rulehound/jsonl.hpp"

namespace rulehound {

/// One recovered top-level function definition. Offsets index into the raw
/// file text; `body` is the raw slice [start, end), signature included.
struct FunctionSpan {
    std::string file;
    std::string name;
    size_t start = 0;
    size_t end = 0;
    size_t name_offset = 0; // offset of the defining identifier
    size_t body_open = 0;   // offset of the '{'
    std::string header;     // whitespace-collapsed signature
    std::string body;
    bool degraded = false; // unbalanced braces at EOF, span truncated
};

struct SourceFile {
    std::string path; // relative to corpus root, '/' separated
    std::string raw;
    std::string stripped;  // comments/strings blanked, same length as raw
    std::string scan_text; // stripped + preprocessor lines blanked
    std::vector<FunctionSpan> functions;
    std::vector<size_t> lines; // line start offsets
};

struct Occurrence {
    size_t file_index = 0;
    size_t offset = 0;
};

struct SourceCorpus {
    std::filesystem::path root;
    std::vector<SourceFile> files; // sorted by path
    std::map<std::string, std::vector<Occurrence>> index;
    std::vector<std::string> scan_log; // per-file warnings from loading

    const SourceFile* find_file(const std::string& relpath) const;
    /// Span containing byte `offset` of `file`, or nullptr.
    const FunctionSpan* enclosing_function(const SourceFile& file, size_t offset) const;
};

enum class MatchMode { Call, BareIdentifier };

std::string to_string(MatchMode m);
MatchMode match_mode_from_string(const std::string& s);

/// One enclosing function holding at least one occurrence of the target.
/// Multiple occurrences inside the same function collapse into one candidate.
struct CallSiteCandidate {
    std::string id; // hash of (file, function, first occurrence offset)
    std::string target;
    FunctionSpan span;
    std::vector<size_t> offsets; // occurrence offsets relative to span.start
};

/// Loads every file matching `include_globs` (default: *.c, *.h) under root.
/// Files with NUL bytes are skipped with a warning in the scan log.
SourceCorpus load_corpus(const std::filesystem::path& root,
                         const std::vector<std::string>& include_globs = {});

/// Recovers top-level function definitions from raw file text. Best effort:
/// brace matching on comment/string-stripped text with preprocessor lines
/// ignored; K&R definitions and macro bodies are not reported.
std::vector<FunctionSpan> extract_functions(std::string_view file_text);

std::vector<CallSiteCandidate> enumerate_call_sites(const SourceCorpus& corpus,
                                                    const std::string& target,
                                                    MatchMode mode = MatchMode::Call);

Json candidate_to_json(const CallSiteCandidate& c);

} // namespace rulehound
