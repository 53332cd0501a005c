#include "rulehound/rules.hpp"

#include <algorithm>
#include <regex>

#include "rulehound/errors.hpp"
#include "rulehound/hash.hpp"
#include "rulehound/text.hpp"

namespace rulehound {

const std::vector<RuleTemplate>& rule_templates() {
    static const std::vector<RuleTemplate> kTemplates = {
        {0, "{TEXT}", {"TEXT"}},
        {1,
         "The function {TARGET} may fail and return {ERR_RETURN_VALUE}. Therefore, its return "
         "value must be checked before use to prevent {IMPACT}.",
         {"TARGET", "ERR_RETURN_VALUE", "IMPACT"}},
        {2,
         "Once {TARGET} succeeds, ensure that {HANDLER} is invoked in any subsequent error "
         "handling path to prevent {IMPACT}.",
         {"TARGET", "HANDLER", "IMPACT"}},
        {3, "Use {HANDLER} instead of {TARGET1} + {TARGET2} to {GOAL}.",
         {"HANDLER", "TARGET1", "TARGET2", "GOAL"}},
        {4, "Memory allocated with {TARGET} must be freed with {HANDLER}, not kfree().",
         {"TARGET", "HANDLER"}},
        {5,
         "After calling {TARGET}, the refcount is incremented regardless of success or failure, "
         "so {HANDLER} must be invoked in every error-handling path to prevent {IMPACT}.",
         {"TARGET", "HANDLER", "IMPACT"}},
        {6, "Use {HANDLER} instead of {TARGET} when {CONDITION}, to prevent buffer overflow.",
         {"HANDLER", "TARGET", "CONDITION"}},
        {7,
         "Use {HANDLER} instead of {TARGET} for Ethernet-address comparisons. This guarantees "
         "correct results and skips unnecessary bytewise memory checks.",
         {"HANDLER", "TARGET"}},
        {8, "Use {HANDLER} instead of {TARGET} for delays under 20ms.", {"HANDLER", "TARGET"}},
        {9,
         "Release the {HANDLER} before calling {TARGET} and reacquire it immediately afterward "
         "to prevent {IMPACT}.",
         {"HANDLER", "TARGET", "IMPACT"}},
        {10,
         "No need to call {TARGET} before destroying them with {HANDLER}, as it automatically "
         "drains them, thus avoiding unnecessary overhead.",
         {"TARGET", "HANDLER"}},
        {11,
         "The {TARGET} function returns an `unsigned long` value instead of 'int'. Make sure "
         "the return value is put into a variable with unsigned long type.",
         {"TARGET"}},
        {12,
         "{TARGET} returns a negative value on failure, so the return check should be irq < 0 "
         "instead of irq == 0.",
         {"TARGET"}},
        {13,
         "Instead of invoking {TARGET1} and {TARGET2} separately, use the {HANDLER} helper for "
         "iomap operations. This ensures proper resource management and avoids potential "
         "issues.",
         {"TARGET1", "TARGET2", "HANDLER"}},
        {14,
         "The third parameter passed to {TARGET} may remain uninitialized if the call fails, "
         "and since that variable might later be used by functions like {HANDLER}, it should "
         "be zeroed (e.g., with memset) before the call to prevent undefined behavior.",
         {"TARGET", "HANDLER"}},
    };
    return kTemplates;
}

const RuleTemplate& rule_template(int id) {
    for (const auto& t : rule_templates())
        if (t.id == id) return t;
    throw ConfigError("unknown rule template id: " + std::to_string(id));
}

std::string rule_id_for(int template_id, const std::map<std::string, std::string>& slots) {
    std::string canon = "rule|" + std::to_string(template_id);
    for (const auto& [k, v] : slots) canon += "|" + k + "=" + v; // std::map iterates sorted
    return content_id(canon);
}

std::string render_rule(int template_id, const std::map<std::string, std::string>& slots) {
    const RuleTemplate& t = rule_template(template_id);
    std::string out = t.skeleton;
    for (const auto& [k, v] : slots) {
        const std::string placeholder = "{" + k + "}";
        size_t pos = out.find(placeholder);
        while (pos != std::string::npos) {
            out.replace(pos, placeholder.size(), v);
            pos = out.find(placeholder, pos + v.size());
        }
    }
    return out;
}

std::vector<std::string> SecurityRule::scan_targets() const {
    std::vector<std::string> out;
    for (const char* key : {"TARGET", "TARGET1", "TARGET2"}) {
        auto it = slots.find(key);
        if (it != slots.end() && text::is_c_identifier(it->second)) out.push_back(it->second);
    }
    return out;
}

std::string HumanRule::id() const {
    std::string canon = "human|" + text;
    for (const auto& t : targets) canon += "|" + t;
    return content_id(canon);
}

// ---------------------------------------------------------------------------
// Rule generation prompt

namespace {

const char* kRuleGenHeader =
    "You are a software security expert. Your task is to generate one or more security coding "
    "rules from the given patch. Definition: A security coding rule is a concise statement that "
    "specifies the correct usage of a target API or code element. Violating this rule can "
    "introduce bugs or other issues. Use the templates below whenever they fit the patch. If "
    "none fit, write your own concise rule in a single sentence.\n"
    "[Security Coding Rule Templates]\n"
    "1. The function {TARGET} may fail and return {ERR_RETURN_VALUE}. Therefore, its return "
    "value must be checked before use to prevent {IMPACT}.\n"
    "2. Once {TARGET} succeeds, ensure that {HANDLER} is invoked in any subsequent error "
    "handling path to prevent {IMPACT}.\n"
    "3. Use {HANDLER} instead of {TARGET1} + {TARGET2} to {GOAL}.\n"
    "[END Security Coding Rule Templates]\n"
    "Output requirements:\n"
    "1. Derive rules only from evidence in the patch, do not speculate.\n"
    "2. Use identifiers as they appear in the patch.\n"
    "3. If the patch addresses multiple independent issues, output multiple rules, one per "
    "line.\n"
    "4. Do not include explanations or restate the patch.\n"
    "\n"
    "[PATCH]\n";

const char* kRuleGenFooter =
    "[END PATCH]\n"
    "Please provide the security coding rule or rules using the templates when possible. If no "
    "template fits, provide a concise custom rule.\n";

} // namespace

std::string render_rule_generation_prompt(const SeedPatch& seed) {
    std::string patch = render_seed_patch(seed);
    if (patch.empty() || patch.back() != '\n') patch += "\n";
    return std::string(kRuleGenHeader) + patch + kRuleGenFooter;
}

// ---------------------------------------------------------------------------
// Response parsing

namespace {

// Regex for one skeleton: fixed segments matched case-insensitively with
// flexible whitespace, slots captured non-greedily. The trailing period is
// optional so "rule." and "rule" both match.
struct CompiledTemplate {
    int id;
    std::regex re;
    std::vector<std::string> slot_order;
};

std::string escape_regex(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::string("\\^$.|?*+()[]{}").find(c) != std::string::npos) out += '\\';
        out += c;
    }
    return out;
}

std::vector<CompiledTemplate> compile_templates() {
    std::vector<CompiledTemplate> out;
    static const std::regex kSlot(R"(\{([A-Z0-9_]+)\})");
    for (const auto& t : rule_templates()) {
        if (t.id == 0) continue;
        std::string pattern = "^\\s*";
        std::vector<std::string> order;
        std::string rest = t.skeleton;
        std::smatch m;
        while (std::regex_search(rest, m, kSlot)) {
            std::string fixed = m.prefix();
            // collapse whitespace in the fixed part into \s+
            std::string fixed_re;
            bool in_ws = false;
            for (char c : fixed) {
                if (c == ' ') {
                    in_ws = true;
                    continue;
                }
                if (in_ws && !fixed_re.empty()) fixed_re += "\\s+";
                in_ws = false;
                fixed_re += escape_regex(std::string(1, c));
            }
            if (in_ws && !fixed_re.empty()) fixed_re += "\\s+";
            pattern += fixed_re;
            pattern += "(.+?)";
            order.push_back(m[1]);
            rest = m.suffix();
        }
        std::string tail_re;
        bool in_ws = false;
        for (char c : rest) {
            if (c == ' ') {
                in_ws = true;
                continue;
            }
            if (in_ws && !tail_re.empty()) tail_re += "\\s+";
            in_ws = false;
            tail_re += escape_regex(std::string(1, c));
        }
        // final period optional: "rule" and "rule." both match
        if (tail_re.size() >= 2 && tail_re.compare(tail_re.size() - 2, 2, "\\.") == 0)
            tail_re += "?";
        pattern += tail_re;
        pattern += "\\s*$";
        out.push_back({t.id, std::regex(pattern, std::regex::icase), std::move(order)});
    }
    return out;
}

const std::vector<CompiledTemplate>& compiled_templates() {
    static const std::vector<CompiledTemplate> kCompiled = compile_templates();
    return kCompiled;
}

std::string strip_list_marker(const std::string& line) {
    static const std::regex kMarker(R"(^\s*(?:[-*]|\d+[.)]|Rule\s*\d*:)\s*)", std::regex::icase);
    std::string out = std::regex_replace(line, kMarker, "");
    // unquote a fully quoted rule
    out = text::trim(out);
    if (out.size() >= 2 && ((out.front() == '"' && out.back() == '"') ||
                            (out.front() == '`' && out.back() == '`')))
        out = text::trim(out.substr(1, out.size() - 2));
    return out;
}

std::string strip_slot_value(std::string v) {
    v = text::trim(v);
    while (v.size() >= 2 && ((v.front() == '`' && v.back() == '`') ||
                             (v.front() == '"' && v.back() == '"') ||
                             (v.front() == '\'' && v.back() == '\'')))
        v = text::trim(v.substr(1, v.size() - 2));
    // drop a trailing call-parenthesis pair on identifier-like slots
    if (v.size() > 2 && v.compare(v.size() - 2, 2, "()") == 0 &&
        text::is_c_identifier(v.substr(0, v.size() - 2)))
        v = v.substr(0, v.size() - 2);
    return v;
}

std::string first_target_identifier(const std::string& line) {
    static const std::regex kBacktick(R"(`([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(\s*\))?`)");
    std::smatch m;
    if (std::regex_search(line, m, kBacktick)) return m[1];
    static const std::regex kCall(R"(\b([A-Za-z_][A-Za-z0-9_]*)\s*\()");
    if (std::regex_search(line, m, kCall)) return m[1];
    return "";
}

} // namespace

RuleParseOutcome parse_rule_response(const std::string& completion,
                                     const std::string& provenance) {
    RuleParseOutcome outcome;
    for (const auto& raw_line : text::split_lines(completion)) {
        const std::string line = strip_list_marker(raw_line);
        if (text::trim(line).empty()) continue;

        bool matched = false;
        for (const auto& ct : compiled_templates()) {
            std::smatch m;
            if (!std::regex_match(line, m, ct.re)) continue;
            SecurityRule rule;
            rule.template_id = ct.id;
            bool slots_ok = true;
            for (size_t i = 0; i < ct.slot_order.size(); ++i) {
                std::string v = strip_slot_value(m[i + 1]);
                if (v.empty()) slots_ok = false;
                rule.slots[ct.slot_order[i]] = v;
            }
            if (!slots_ok) continue;
            rule.text = render_rule(rule.template_id, rule.slots);
            rule.id = rule_id_for(rule.template_id, rule.slots);
            rule.provenance = provenance;
            outcome.rules.push_back(std::move(rule));
            matched = true;
            break;
        }
        if (matched) continue;

        const std::string target = first_target_identifier(line);
        if (target.empty()) {
            outcome.warnings.push_back("dropped line with no identifiable target: " + line);
            continue;
        }
        SecurityRule rule;
        rule.template_id = 0;
        rule.slots["TEXT"] = line;
        rule.slots["TARGET"] = target;
        rule.text = line;
        rule.id = rule_id_for(0, rule.slots);
        rule.provenance = provenance;
        rule.low_confidence = true;
        outcome.rules.push_back(std::move(rule));
    }
    if (outcome.rules.empty()) throw ParseError("no rule extracted");
    return outcome;
}

std::vector<std::string> validate_rule(const SecurityRule& rule) {
    std::vector<std::string> violations;
    const RuleTemplate* tmpl = nullptr;
    for (const auto& t : rule_templates())
        if (t.id == rule.template_id) tmpl = &t;
    if (tmpl == nullptr) {
        violations.push_back("unknown template id: " + std::to_string(rule.template_id));
        return violations;
    }
    for (const auto& slot : tmpl->required_slots) {
        auto it = rule.slots.find(slot);
        if (it == rule.slots.end() || it->second.empty())
            violations.push_back("missing slot: " + slot);
    }
    for (const char* key : {"TARGET", "TARGET1", "TARGET2"}) {
        auto it = rule.slots.find(key);
        if (it == rule.slots.end()) continue;
        if (rule.match_mode == MatchMode::Call || rule.match_mode == MatchMode::BareIdentifier) {
            if (!it->second.empty() && !text::is_c_identifier(it->second))
                violations.push_back(std::string(key) + " not an identifier");
        }
    }
    return violations;
}

Json rule_to_json(const SecurityRule& rule) {
    Json j;
    j["id"] = rule.id;
    j["template_id"] = rule.template_id;
    Json slots;
    for (const auto& [k, v] : rule.slots) slots[k] = v;
    j["slots"] = std::move(slots);
    j["text"] = rule.text;
    j["match_mode"] = to_string(rule.match_mode);
    j["provenance"] = rule.provenance;
    if (rule.low_confidence) j["low_confidence"] = true;
    return j;
}

SecurityRule rule_from_json(const Json& j) {
    SecurityRule rule;
    rule.template_id = j.at("template_id").get<int>();
    for (const auto& [k, v] : j.at("slots").items()) rule.slots[k] = v.get<std::string>();
    rule.text = j.at("text").get<std::string>();
    rule.match_mode = match_mode_from_string(j.at("match_mode").get<std::string>());
    rule.provenance = j.value("provenance", "");
    rule.low_confidence = j.value("low_confidence", false);
    rule.id = j.contains("id") ? j.at("id").get<std::string>()
                               : rule_id_for(rule.template_id, rule.slots);
    return rule;
}

std::vector<SecurityRule> load_rule_catalog(const std::filesystem::path& path) {
    std::vector<SecurityRule> rules;
    for (const auto& j : jsonl::read_file(path)) {
        SecurityRule rule = rule_from_json(j);
        const std::string expected = rule_id_for(rule.template_id, rule.slots);
        if (rule.id != expected)
            throw ParseError("rule id mismatch for " + rule.id + " (expected " + expected + ")");
        rules.push_back(std::move(rule));
    }
    return rules;
}

void save_rule_catalog(const std::filesystem::path& path,
                       const std::vector<SecurityRule>& rules) {
    std::vector<Json> records;
    records.reserve(rules.size());
    for (const auto& r : rules) records.push_back(rule_to_json(r));
    jsonl::write_file(path, records);
}

size_t append_to_catalog(const std::filesystem::path& path,
                         const std::vector<SecurityRule>& rules) {
    std::vector<SecurityRule> existing;
    if (std::filesystem::exists(path)) existing = load_rule_catalog(path);
    size_t added = 0;
    for (const auto& r : rules) {
        bool dup = std::any_of(existing.begin(), existing.end(),
                               [&](const SecurityRule& e) { return e.id == r.id; });
        if (dup) continue;
        existing.push_back(r);
        ++added;
    }
    if (added > 0) save_rule_catalog(path, existing);
    return added;
}

} // namespace rulehound
