#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rulehound/corpus.hpp"
#include "rulehound/model.hpp"
#include "rulehound/patch.hpp"
#include "rulehound/rules.hpp"

namespace rulehound {

enum class PromptConfig { Basic, Patch, HuRule, Rule, RuleNoCot, RulePatch };

std::string to_string(PromptConfig c);
PromptConfig prompt_config_from_string(const std::string& s);
const std::vector<PromptConfig>& all_prompt_configs();

bool config_needs_rule(PromptConfig c);
bool config_needs_patch(PromptConfig c);

struct Verdict {
    enum class Kind { Violation, NoViolation, Undecided };
    Kind kind = Kind::Undecided;
    std::string raw;  // full model output
    std::string note; // how the verdict was extracted
};

std::string to_string(Verdict::Kind k);

/// Byte-exact prompt for one configuration. `rule_text` is required for the
/// rule-bearing configurations and `patch_text` for the patch-bearing ones;
/// a missing requirement raises ConfigError.
std::string build_detection_prompt(PromptConfig config, const std::string& candidate_body,
                                   const std::optional<std::string>& rule_text = std::nullopt,
                                   const std::optional<std::string>& patch_text = std::nullopt);

/// Scans for standalone YES/NO tokens (case-insensitive, word-bounded,
/// quoting ignored); the last token wins. No token at all means Undecided.
Verdict extract_verdict(const std::string& completion);

struct Finding {
    std::string candidate_id;
    std::string rule_id;
    PromptConfig config = PromptConfig::Rule;
    Verdict verdict;
    TokenUsage usage;
    std::string status; // "kept" | "filtered"
    std::string reason; // non-empty iff filtered
    std::string model;
};

Json finding_to_json(const Finding& f);

/// What scan() needs to know about the rule being enforced, common to
/// generated and human rules.
struct RuleRef {
    std::string id;
    std::string text;
    std::vector<std::string> targets;
    MatchMode match_mode = MatchMode::Call;
};

RuleRef rule_ref(const SecurityRule& rule);
RuleRef rule_ref(const HumanRule& rule);

struct ScanOptions {
    size_t oversize_byte_budget = 24576; // candidates past this are skipped
    int workers = 1;
    std::optional<SeedPatch> seed;                // for Patch / RulePatch configs
    std::filesystem::path incremental_log;        // completion-order journal, optional
};

/// One finding per candidate, in candidate order. Oversize candidates are
/// filtered without a model call. Transport exhaustion aborts the scan after
/// flushing partial results to the incremental log.
std::vector<Finding> scan(const SourceCorpus& corpus, const RuleRef& rule, PromptConfig config,
                          ModelClient& client, const ScanOptions& options = {});

/// Deterministic cleanup pass: collapses duplicate (candidate, rule) findings
/// and filters kept findings whose completion only names a similarly-named
/// identifier instead of the rule target. Idempotent.
std::vector<Finding> postprocess(std::vector<Finding> findings, const RuleRef& rule);

} // namespace rulehound
