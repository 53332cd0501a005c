#pragma once

// Independent reference implementations the production code is checked
// against. Kept deliberately separate from src/: different algorithms,
// different authorship style, no shared helpers.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oracles {

/// Reference comment/string stripper (length-preserving). Written as an
/// explicit cursor machine rather than the mode switch used in production.
std::string strip_reference(const std::string& src);

/// Recursive brace matcher over stripped text. Returns true when the text
/// between [begin, end) is brace-balanced ignoring preprocessor lines.
bool brace_balanced(const std::string& stripped, size_t begin, size_t end);

/// Match offsets of `\btarget\s*\(` (call mode) or `\btarget\b` (bare mode)
/// in stripped text, via std::regex.
std::vector<size_t> find_target_occurrences(const std::string& stripped,
                                            const std::string& target, bool call_mode);

/// Eqs-style metric arithmetic on long doubles, written directly from the
/// formulas.
struct RefMetrics {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> pairwise_accuracy;
};
RefMetrics reference_metrics(long tp, long fp, long fn, long pairs_correct, long pairs_total);

/// Textbook DBSCAN over a caller-provided distance matrix, recursive
/// expansion. Returns per-point labels, -1 for noise; neighborhoods include
/// the point itself.
std::vector<int> reference_dbscan(const std::vector<std::vector<double>>& dist, double eps,
                                  size_t min_pts);

/// Compare two labelings as partitions (cluster ids may differ).
bool same_partition(const std::vector<int>& a, const std::vector<int>& b);

/// Exhaustive medoid: index minimizing summed distance to the other members.
size_t reference_medoid(const std::vector<std::vector<double>>& dist,
                        const std::vector<size_t>& members);

/// Deterministic rule-based code tokenizer used as the reference for token
/// count fixtures: identifier/number tokens (long identifiers split into
/// 8-char chunks), one token per punctuation character, whitespace free
/// except newlines.
long reference_token_count(const std::string& text);

/// Apply unified-diff hunks (old_start/lines with ' ', '+', '-' prefixes) to
/// pre-image text. Context mismatches throw.
struct RefHunk {
    long old_start;
    std::vector<std::string> lines;
};
std::string apply_hunks(const std::string& pre_image, const std::vector<RefHunk>& hunks);

} // namespace oracles
