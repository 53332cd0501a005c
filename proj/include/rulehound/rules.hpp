#pragma once

#include <map>
#include <string>
#include <vector>

#include "rulehound/corpus.hpp"
#include "rulehound/jsonl.hpp"
#include "rulehound/patch.hpp"

namespace rulehound {

/// Skeleton text with {SLOT} placeholders. Template 0 is the free-form
/// escape hatch whose skeleton is just {TEXT}.
struct RuleTemplate {
    int id = 0;
    std::string skeleton;
    std::vector<std::string> required_slots;
};

/// The fourteen skeletons plus the free-form template 0.
const std::vector<RuleTemplate>& rule_templates();
const RuleTemplate& rule_template(int id);

struct SecurityRule {
    std::string id; // content hash of (template_id, sorted slots)
    int template_id = 0;
    std::map<std::string, std::string> slots;
    std::string text; // skeleton with slots substituted
    MatchMode match_mode = MatchMode::Call;
    std::string provenance; // seed commit id, "human", or "mined"
    bool low_confidence = false; // free-form rule with a heuristic TARGET

    /// Identifiers this rule can be scanned for (TARGET/TARGET1/TARGET2).
    std::vector<std::string> scan_targets() const;
};

struct HumanRule {
    std::string text;
    std::vector<std::string> targets;
    MatchMode match_mode = MatchMode::Call;

    std::string id() const;
};

std::string rule_id_for(int template_id, const std::map<std::string, std::string>& slots);

/// Substitutes slots into the template skeleton.
std::string render_rule(int template_id, const std::map<std::string, std::string>& slots);

/// The prompt that asks a model to distill a seed patch into coding rules.
std::string render_rule_generation_prompt(const SeedPatch& seed);

struct RuleParseOutcome {
    std::vector<SecurityRule> rules;
    std::vector<std::string> warnings;
};

/// Recovers templated rules from model output, one candidate rule per line.
/// Lines matching a skeleton (case-insensitive, whitespace-tolerant) become
/// templated rules; other lines degrade to free-form rules with a heuristic
/// TARGET; lines with no usable identifier are dropped with a warning.
/// Throws ParseError when nothing at all can be recovered.
RuleParseOutcome parse_rule_response(const std::string& completion,
                                     const std::string& provenance = "");

/// Empty when the rule is well-formed; otherwise human-readable violations.
std::vector<std::string> validate_rule(const SecurityRule& rule);

Json rule_to_json(const SecurityRule& rule);
SecurityRule rule_from_json(const Json& j);

std::vector<SecurityRule> load_rule_catalog(const std::filesystem::path& path);
void save_rule_catalog(const std::filesystem::path& path, const std::vector<SecurityRule>& rules);

/// Appends rules not already present (by id). Returns how many were added.
size_t append_to_catalog(const std::filesystem::path& path, const std::vector<SecurityRule>& rules);

} // namespace rulehound
