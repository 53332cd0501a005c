#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rulehound/corpus.hpp"
#include "rulehound/jsonl.hpp"

namespace rulehound {

struct Hunk {
    long old_start = 0;
    long old_count = 0;
    long new_start = 0;
    long new_count = 0;
    std::string section; // text after the closing @@
    std::vector<std::string> lines; // prefixed with ' ', '+', '-' or '\'
};

struct FileDiff {
    std::string old_path; // a/-prefix stripped; empty for added files
    std::string new_path;
    bool added = false;
    bool deleted = false;
    bool binary = false;
    std::vector<Hunk> hunks;

    /// Path used to locate the pre-image file.
    const std::string& pre_image_path() const { return old_path.empty() ? new_path : old_path; }
};

struct ParsedCommit {
    std::string commit_id;
    std::string author;
    std::string date;
    std::string message; // title + body, trailers included
    std::vector<FileDiff> diffs;
};

/// Pre-image function context for one or more hunks of a seed patch.
struct SeedContext {
    std::string file;
    std::string function;
    size_t start = 0;
    size_t end = 0;
    std::string header;
    std::string body;
    bool degraded = false;
    std::vector<size_t> marked_lines; // 0-based line offsets within body
};

struct ContextlessHunk {
    std::string path;
    long old_start = 0;
};

struct SeedPatch {
    std::string commit_id;
    std::string description; // cleaned, user-written issue text only
    std::vector<FileDiff> diffs;
    std::vector<SeedContext> contexts;
    std::vector<ContextlessHunk> contextless;
};

/// Parses `git show` / `git format-patch` / plain unified diff text.
/// Throws ParseError on malformed hunk headers (naming the line) and on
/// commits with no diff content.
ParsedCommit parse_commit(const std::string& raw);

/// Strips trailers (Signed-off-by and friends), mail headers, and URLs from
/// the commit message. Falls back to the title line when nothing survives.
/// Idempotent.
std::string clean_metadata(const ParsedCommit& commit);

/// Attaches the enclosing pre-image function to every hunk. Hunks that edit
/// lines outside any function are flagged contextless, not dropped. Throws
/// ParseError when a diffed file is missing from the pre-image.
SeedPatch build_seed_patch(const ParsedCommit& commit, const SourceCorpus& pre_image);

/// The `{PATCH}` rendering used by prompts: description, unified diffs,
/// and the pre-image function contexts.
std::string render_seed_patch(const SeedPatch& seed);

std::string render_file_diff(const FileDiff& diff);

Json seed_to_json(const SeedPatch& seed);
SeedPatch seed_from_json(const Json& j);

} // namespace rulehound
