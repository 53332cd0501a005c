#include "rulehound/detect.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include "rulehound/errors.hpp"
#include "rulehound/text.hpp"

namespace rulehound {

std::string to_string(PromptConfig c) {
    switch (c) {
    case PromptConfig::Basic: return "Basic";
    case PromptConfig::Patch: return "Patch";
    case PromptConfig::HuRule: return "HuRule";
    case PromptConfig::Rule: return "Rule";
    case PromptConfig::RuleNoCot: return "RuleNoCot";
    case PromptConfig::RulePatch: return "RulePatch";
    }
    return "?";
}

PromptConfig prompt_config_from_string(const std::string& s) {
    for (PromptConfig c : all_prompt_configs())
        if (to_string(c) == s) return c;
    if (s == "Rule w/o CoT") return PromptConfig::RuleNoCot;
    if (s == "Rule+Patch") return PromptConfig::RulePatch;
    throw ConfigError("unknown prompt configuration: " + s);
}

const std::vector<PromptConfig>& all_prompt_configs() {
    static const std::vector<PromptConfig> kAll = {
        PromptConfig::Basic,  PromptConfig::Patch,     PromptConfig::HuRule,
        PromptConfig::Rule,   PromptConfig::RuleNoCot, PromptConfig::RulePatch,
    };
    return kAll;
}

bool config_needs_rule(PromptConfig c) {
    return c == PromptConfig::HuRule || c == PromptConfig::Rule ||
           c == PromptConfig::RuleNoCot || c == PromptConfig::RulePatch;
}

bool config_needs_patch(PromptConfig c) {
    return c == PromptConfig::Patch || c == PromptConfig::RulePatch;
}

std::string to_string(Verdict::Kind k) {
    switch (k) {
    case Verdict::Kind::Violation: return "violation";
    case Verdict::Kind::NoViolation: return "no-violation";
    case Verdict::Kind::Undecided: return "undecided";
    }
    return "?";
}

namespace {

const char* kCotClosing =
    "Analyze the code line by line and show the analyzing steps. Finally, respond with `YES' if "
    "there must be a violation of the coding rule, or `NO' otherwise. Do not assume other "
    "situations that are not appeared in the code or not mentioned in the coding rule.\n";

const char* kNoCotClosing =
    "Respond with `YES' if there must be a violation of the coding rule, or `NO' otherwise. Do "
    "not assume other situations that are not appeared in the code or not mentioned in the "
    "coding rule.\n";

std::string code_section(const std::string& body) {
    std::string out = "[Code Snippets]\n";
    out += body;
    if (out.empty() || out.back() != '\n') out += "\n";
    out += "[end]\n";
    return out;
}

std::string patch_section(const std::string& patch) {
    std::string out = "[Patch]\n";
    out += patch;
    if (out.empty() || out.back() != '\n') out += "\n";
    out += "[end]\n";
    return out;
}

std::string rule_section(const std::string& rule) {
    std::string out = "[Security coding rule]\n";
    out += rule;
    if (out.empty() || out.back() != '\n') out += "\n";
    out += "[end]\n";
    return out;
}

} // namespace

std::string build_detection_prompt(PromptConfig config, const std::string& candidate_body,
                                   const std::optional<std::string>& rule_text,
                                   const std::optional<std::string>& patch_text) {
    if (config_needs_rule(config) && !rule_text)
        throw ConfigError(to_string(config) + " configuration requires a rule");
    if (config_needs_patch(config) && !patch_text)
        throw ConfigError(to_string(config) + " configuration requires a seed patch");

    std::string p;
    switch (config) {
    case PromptConfig::Basic:
        p = "You will be provided with a code. Your task is to analyze the code by following "
            "each code path and identify if the code contains any bugs, such as NULL "
            "dereference, memory leak, refcount leak, etc.\n";
        p += code_section(candidate_body);
        p += kCotClosing;
        break;
    case PromptConfig::Patch:
        p = "You will be provided with a patch. Afterwards, you will be shared with a code. "
            "Your task is to analyze the code by following each code path and identify if the "
            "code contains the same issue addressed by the patch.\n";
        p += patch_section(*patch_text);
        p += code_section(candidate_body);
        p += kCotClosing;
        break;
    case PromptConfig::HuRule:
    case PromptConfig::Rule:
        p = "You will be provided with a security coding rule. Afterwards, you will be shared "
            "with a code. Your task is to analyze the code by following each code path and "
            "identify if the code violate the security rule.\n";
        p += rule_section(*rule_text);
        p += code_section(candidate_body);
        p += kCotClosing;
        break;
    case PromptConfig::RuleNoCot:
        p = "You will be provided with a security coding rule. Afterwards, you will be shared "
            "with a code. Your task is to analyze the code by following each code path and "
            "identify if the code violate the security rule.\n";
        p += rule_section(*rule_text);
        p += code_section(candidate_body);
        p += kNoCotClosing;
        break;
    case PromptConfig::RulePatch:
        p = "You will be provided with a security coding rule, its related patch. Afterwards, "
            "you will be shared with a code. Your task is to analyze the code by following "
            "each code path and identify if the code violate the security rule.\n";
        p += rule_section(*rule_text);
        p += patch_section(*patch_text);
        p += code_section(candidate_body);
        p += kCotClosing;
        break;
    }
    return p;
}

Verdict extract_verdict(const std::string& completion) {
    Verdict v;
    v.raw = completion;
    // last word-bounded YES/NO wins; models conclude after their reasoning
    std::optional<bool> last;
    size_t last_pos = 0;
    for (const auto& tok : text::identifier_tokens(completion)) {
        if (tok.length != 2 && tok.length != 3) continue;
        std::string word = completion.substr(tok.offset, tok.length);
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (word == "yes") {
            last = true;
            last_pos = tok.offset;
        } else if (word == "no") {
            last = false;
            last_pos = tok.offset;
        }
    }
    if (!last.has_value()) {
        v.kind = Verdict::Kind::Undecided;
        v.note = "no YES/NO token found";
        return v;
    }
    v.kind = *last ? Verdict::Kind::Violation : Verdict::Kind::NoViolation;
    v.note = (*last ? std::string("YES") : std::string("NO")) + " token at offset " +
             std::to_string(last_pos);
    return v;
}

Json finding_to_json(const Finding& f) {
    Json j;
    j["candidate_id"] = f.candidate_id;
    j["rule_id"] = f.rule_id;
    j["config"] = to_string(f.config);
    j["verdict"] = to_string(f.verdict.kind);
    j["status"] = f.status;
    j["reason"] = f.reason;
    Json usage;
    usage["input_tokens"] = f.usage.input_tokens;
    usage["output_tokens"] = f.usage.output_tokens;
    usage["cached"] = f.usage.cached;
    j["usage"] = std::move(usage);
    j["model"] = f.model;
    return j;
}

RuleRef rule_ref(const SecurityRule& rule) {
    return {rule.id, rule.text, rule.scan_targets(), rule.match_mode};
}

RuleRef rule_ref(const HumanRule& rule) {
    return {rule.id(), rule.text, rule.targets, rule.match_mode};
}

std::vector<Finding> scan(const SourceCorpus& corpus, const RuleRef& rule, PromptConfig config,
                          ModelClient& client, const ScanOptions& options) {
    if (rule.targets.empty()) throw ConfigError("rule has no scannable target");

    // candidates across all rule targets, deterministic order
    std::vector<CallSiteCandidate> candidates;
    for (const auto& target : rule.targets) {
        auto part = enumerate_call_sites(corpus, target, rule.match_mode);
        candidates.insert(candidates.end(), part.begin(), part.end());
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const CallSiteCandidate& a, const CallSiteCandidate& b) {
                         if (a.span.file != b.span.file) return a.span.file < b.span.file;
                         if (a.span.start != b.span.start) return a.span.start < b.span.start;
                         return a.target < b.target;
                     });

    std::optional<std::string> patch_text;
    if (options.seed) patch_text = render_seed_patch(*options.seed);

    std::vector<Finding> findings(candidates.size());
    std::mutex sink_mu;
    std::atomic<size_t> next{0};
    std::atomic<bool> aborted{false};
    std::string abort_message;

    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= candidates.size() || aborted.load()) return;
            const auto& cand = candidates[i];
            Finding f;
            f.candidate_id = cand.id;
            f.rule_id = rule.id;
            f.config = config;
            f.model = client.config().model;
            if (cand.span.body.size() > options.oversize_byte_budget) {
                f.status = "filtered";
                f.reason = "oversize";
                f.verdict.kind = Verdict::Kind::Undecided;
                f.verdict.note = "skipped: candidate over byte budget";
            } else {
                try {
                    const std::string prompt = build_detection_prompt(
                        config, cand.span.body,
                        config_needs_rule(config) ? std::optional<std::string>(rule.text)
                                                  : std::nullopt,
                        patch_text);
                    auto [text, usage] = client.complete(prompt);
                    f.verdict = extract_verdict(text);
                    f.usage = usage;
                } catch (const EmptyCompletionError& e) {
                    f.verdict.kind = Verdict::Kind::Undecided;
                    f.verdict.note = std::string("empty completion: ") + e.what();
                } catch (const TransportError& e) {
                    std::lock_guard lock(sink_mu);
                    aborted.store(true);
                    abort_message = e.what();
                    return;
                }
                switch (f.verdict.kind) {
                case Verdict::Kind::Violation:
                    f.status = "kept";
                    break;
                case Verdict::Kind::NoViolation:
                    f.status = "filtered";
                    f.reason = "verdict:no";
                    break;
                case Verdict::Kind::Undecided:
                    f.status = "filtered";
                    f.reason = "verdict:undecided";
                    break;
                }
            }
            {
                std::lock_guard lock(sink_mu);
                findings[i] = f;
                if (!options.incremental_log.empty())
                    jsonl::append_record(options.incremental_log, finding_to_json(f));
            }
        }
    };

    const int workers = std::max(1, options.workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (aborted.load())
        throw TransportError("scan aborted, partial results flushed: " + abort_message);
    return findings;
}

std::vector<Finding> postprocess(std::vector<Finding> findings, const RuleRef& rule) {
    // collapse duplicates, first one survives
    std::set<std::pair<std::string, std::string>> seen;
    std::vector<Finding> out;
    out.reserve(findings.size());
    for (auto& f : findings) {
        auto key = std::make_pair(f.candidate_id, f.rule_id);
        if (seen.count(key)) continue;
        seen.insert(key);
        out.push_back(std::move(f));
    }

    // target-mismatch: the completion talks about a similarly named function
    // (clk_prepare_enable under a clk_prepare rule) and never about the
    // target itself
    for (auto& f : out) {
        if (f.status != "kept") continue;
        const std::string& completion = f.verdict.raw;
        bool mentions_target = false;
        for (const auto& target : rule.targets)
            if (text::contains_identifier(completion, target)) mentions_target = true;
        if (mentions_target) continue;
        bool mentions_similar = false;
        for (const auto& tok : text::identifier_tokens(completion)) {
            const std::string ident = completion.substr(tok.offset, tok.length);
            for (const auto& target : rule.targets) {
                if (ident.size() > target.size() &&
                    ident.find(target) != std::string::npos) {
                    mentions_similar = true;
                    break;
                }
            }
            if (mentions_similar) break;
        }
        if (mentions_similar) {
            f.status = "filtered";
            f.reason = "target-mismatch";
        }
    }
    return out;
}

} // namespace rulehound
