#include "rulehound/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rulehound/errors.hpp"

namespace rulehound {

std::vector<GroundTruthPattern> load_dataset(const std::filesystem::path& path) {
    std::vector<GroundTruthPattern> dataset;
    for (const auto& j : jsonl::read_file(path)) {
        GroundTruthPattern p;
        p.pattern_id = j.at("pattern_id").get<std::string>();
        const auto& rule = j.at("rule");
        p.rule_text = rule.at("text").get<std::string>();
        p.rule_target = rule.value("target", "");
        p.rule_match_mode = match_mode_from_string(rule.value("match_mode", "call"));
        p.seed_commit = j.at("seed_commit").get<std::string>();
        p.seed_patch_text = j.value("seed_patch", "");
        for (const auto& pj : j.at("pairs")) {
            EvalPair pair;
            pair.pair_id = pj.at("pair_id").get<std::string>();
            pair.positive = pj.at("positive").get<std::string>();
            pair.negative = pj.at("negative").get<std::string>();
            if (pair.pair_id == p.seed_commit)
                throw ParseError("pattern " + p.pattern_id + ": seed " + p.seed_commit +
                                 " listed among evaluation targets");
            if (pair.positive.empty() || pair.negative.empty())
                throw ParseError("pattern " + p.pattern_id + ", pair " + pair.pair_id +
                                 ": empty snippet");
            if (pair.positive == pair.negative)
                throw ParseError("pattern " + p.pattern_id + ", pair " + pair.pair_id +
                                 ": positive and negative snippets are identical");
            p.pairs.push_back(std::move(pair));
        }
        if (p.pairs.empty())
            throw ParseError("pattern " + p.pattern_id + " has no evaluation pairs");
        dataset.push_back(std::move(p));
    }
    return dataset;
}

DatasetAccounting dataset_accounting(const std::vector<GroundTruthPattern>& dataset) {
    DatasetAccounting acc;
    acc.patterns = dataset.size();
    for (const auto& p : dataset) acc.pairs += p.pairs.size();
    acc.snippets = 2 * acc.pairs;
    acc.implied_patches = acc.patterns + acc.pairs;
    return acc;
}

Metrics compute_metrics(const Confusion& c) {
    Metrics m;
    m.counts = c;
    if (c.tp + c.fp > 0)
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0)
        m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.pairs_total > 0)
        m.pairwise_accuracy =
            static_cast<double>(c.pairs_correct) / static_cast<double>(c.pairs_total);
    return m;
}

EvalResult evaluate(const std::vector<GroundTruthPattern>& dataset, PromptConfig config,
                    ModelClient& client) {
    EvalResult result;
    result.model = client.config().model;
    result.config = config;

    Confusion overall;
    long total_in = 0, total_out = 0;

    auto judge = [&](const GroundTruthPattern& p,
                     const std::string& snippet) -> Verdict::Kind {
        std::optional<std::string> rule_text;
        std::optional<std::string> patch_text;
        if (config_needs_rule(config)) rule_text = p.rule_text;
        if (config_needs_patch(config)) {
            if (p.seed_patch_text.empty())
                throw ConfigError("pattern " + p.pattern_id +
                                  " has no seed patch; cannot run " + to_string(config));
            patch_text = p.seed_patch_text;
        }
        const std::string prompt = build_detection_prompt(config, snippet, rule_text, patch_text);
        try {
            auto [text, usage] = client.complete(prompt);
            total_in += usage.input_tokens;
            total_out += usage.output_tokens;
            ++result.snippets;
            return extract_verdict(text).kind;
        } catch (const EmptyCompletionError&) {
            ++result.snippets;
            return Verdict::Kind::Undecided;
        }
    };

    try {
        for (const auto& p : dataset) {
            Confusion local;
            for (const auto& pair : p.pairs) {
                const Verdict::Kind pos = judge(p, pair.positive);
                const Verdict::Kind neg = judge(p, pair.negative);

                if (pos == Verdict::Kind::Violation) ++local.tp;
                else if (pos == Verdict::Kind::NoViolation) ++local.fn;
                else { ++local.fn; ++local.undecided; } // undecided scores as a miss

                if (neg == Verdict::Kind::Violation) ++local.fp;
                else if (neg == Verdict::Kind::NoViolation) ++local.tn;
                else ++local.undecided;

                ++local.pairs_total;
                if (pos == Verdict::Kind::Violation && neg == Verdict::Kind::NoViolation)
                    ++local.pairs_correct;
            }
            result.per_pattern.push_back({p.pattern_id, compute_metrics(local)});
            overall.tp += local.tp;
            overall.fp += local.fp;
            overall.fn += local.fn;
            overall.tn += local.tn;
            overall.undecided += local.undecided;
            overall.pairs_total += local.pairs_total;
            overall.pairs_correct += local.pairs_correct;
        }
    } catch (const TransportError& e) {
        result.valid = false;
        result.error = e.what();
    }

    result.overall = compute_metrics(overall);
    if (result.snippets > 0) {
        result.mean_input_tokens =
            static_cast<double>(total_in) / static_cast<double>(result.snippets);
        result.mean_output_tokens =
            static_cast<double>(total_out) / static_cast<double>(result.snippets);
    }
    return result;
}

namespace {

Json metrics_to_json(const Metrics& m) {
    Json j;
    j["tp"] = m.counts.tp;
    j["fp"] = m.counts.fp;
    j["fn"] = m.counts.fn;
    j["tn"] = m.counts.tn;
    j["undecided"] = m.counts.undecided;
    j["pairs_total"] = m.counts.pairs_total;
    j["pairs_correct"] = m.counts.pairs_correct;
    if (m.precision) j["precision"] = *m.precision; else j["precision"] = nullptr;
    if (m.recall) j["recall"] = *m.recall; else j["recall"] = nullptr;
    if (m.pairwise_accuracy) j["pairwise_accuracy"] = *m.pairwise_accuracy;
    else j["pairwise_accuracy"] = nullptr;
    return j;
}

Metrics metrics_from_json(const Json& j) {
    Confusion c;
    c.tp = j.at("tp").get<long>();
    c.fp = j.at("fp").get<long>();
    c.fn = j.at("fn").get<long>();
    c.tn = j.at("tn").get<long>();
    c.undecided = j.at("undecided").get<long>();
    c.pairs_total = j.at("pairs_total").get<long>();
    c.pairs_correct = j.at("pairs_correct").get<long>();
    return compute_metrics(c);
}

std::string pct(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", *v * 100.0);
    return buf;
}

std::string csv_num(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return buf;
}

} // namespace

Json eval_result_to_json(const EvalResult& r) {
    Json j;
    j["model"] = r.model;
    j["config"] = to_string(r.config);
    j["overall"] = metrics_to_json(r.overall);
    Json per = Json::array();
    for (const auto& p : r.per_pattern) {
        Json pj;
        pj["pattern_id"] = p.pattern_id;
        pj["metrics"] = metrics_to_json(p.metrics);
        per.push_back(std::move(pj));
    }
    j["per_pattern"] = std::move(per);
    j["mean_input_tokens"] = r.mean_input_tokens;
    j["mean_output_tokens"] = r.mean_output_tokens;
    j["snippets"] = r.snippets;
    j["valid"] = r.valid;
    j["error"] = r.error;
    return j;
}

EvalResult eval_result_from_json(const Json& j) {
    EvalResult r;
    r.model = j.at("model").get<std::string>();
    r.config = prompt_config_from_string(j.at("config").get<std::string>());
    r.overall = metrics_from_json(j.at("overall"));
    for (const auto& pj : j.at("per_pattern"))
        r.per_pattern.push_back({pj.at("pattern_id").get<std::string>(),
                                 metrics_from_json(pj.at("metrics"))});
    r.mean_input_tokens = j.at("mean_input_tokens").get<double>();
    r.mean_output_tokens = j.at("mean_output_tokens").get<double>();
    r.snippets = j.at("snippets").get<long>();
    r.valid = j.at("valid").get<bool>();
    r.error = j.value("error", "");
    return r;
}

ReportFiles report(const std::vector<EvalResult>& results, const PriceTable& prices) {
    if (results.empty()) throw ConfigError("no evaluation results to report");

    std::vector<std::string> models;
    for (const auto& r : results)
        if (std::find(models.begin(), models.end(), r.model) == models.end())
            models.push_back(r.model);
    std::sort(models.begin(), models.end());

    auto find_result = [&](PromptConfig c, const std::string& model) -> const EvalResult* {
        for (const auto& r : results)
            if (r.config == c && r.model == model) return &r;
        return nullptr;
    };

    ReportFiles files;

    // ablation table
    {
        std::ostringstream text;
        std::ostringstream csv;
        csv << "config,model,precision,recall,pairwise_accuracy,snippets,pairs,valid\n";
        text << "Setup";
        for (const auto& m : models) text << " | " << m << " (P/R/PA)";
        text << "\n";
        for (PromptConfig c : all_prompt_configs()) {
            bool any = false;
            for (const auto& m : models)
                if (find_result(c, m)) any = true;
            if (!any) continue;
            text << to_string(c);
            for (const auto& m : models) {
                const EvalResult* r = find_result(c, m);
                if (r == nullptr) {
                    text << " | -";
                    continue;
                }
                text << " | " << pct(r->overall.precision) << "/" << pct(r->overall.recall)
                     << "/" << pct(r->overall.pairwise_accuracy);
                csv << to_string(c) << "," << m << "," << csv_num(r->overall.precision) << ","
                    << csv_num(r->overall.recall) << ","
                    << csv_num(r->overall.pairwise_accuracy) << "," << r->snippets << ","
                    << r->overall.counts.pairs_total << "," << (r->valid ? "1" : "0") << "\n";
            }
            text << "\n";
        }
        files.ablation_text = text.str();
        files.ablation_csv = csv.str();
    }

    // token and cost table
    {
        std::ostringstream text;
        std::ostringstream csv;
        csv << "config,model,mean_input_tokens,mean_output_tokens,cost_per_detection\n";
        text << "Setup | model | mean in | mean out | cost/detection\n";
        for (PromptConfig c : all_prompt_configs()) {
            for (const auto& m : models) {
                const EvalResult* r = find_result(c, m);
                if (r == nullptr) continue;
                std::string cost = "n/a";
                std::string cost_csv;
                if (prices.prices.count(r->model)) {
                    TokenUsage mean_usage{static_cast<long>(r->mean_input_tokens + 0.5),
                                          static_cast<long>(r->mean_output_tokens + 0.5), false};
                    const double c_usd = estimate_cost(mean_usage, r->model, prices);
                    char buf[32];
                    std::snprintf(buf, sizeof(buf), "$%.6f", c_usd);
                    cost = buf;
                    std::snprintf(buf, sizeof(buf), "%.6f", c_usd);
                    cost_csv = buf;
                }
                char in_buf[32], out_buf[32];
                std::snprintf(in_buf, sizeof(in_buf), "%.1f", r->mean_input_tokens);
                std::snprintf(out_buf, sizeof(out_buf), "%.1f", r->mean_output_tokens);
                text << to_string(c) << " | " << m << " | " << in_buf << " | " << out_buf
                     << " | " << cost << "\n";
                csv << to_string(c) << "," << m << "," << in_buf << "," << out_buf << ","
                    << cost_csv << "\n";
            }
        }
        files.cost_text = text.str();
        files.cost_csv = csv.str();
    }
    return files;
}

OracleBackend::OracleBackend(const std::vector<GroundTruthPattern>& dataset) {
    for (const auto& p : dataset) {
        for (const auto& pair : p.pairs) {
            label_by_snippet_[pair.positive] = true;
            label_by_snippet_[pair.negative] = false;
        }
    }
}

RawCompletion OracleBackend::complete(const std::string& prompt, const ModelConfig&) {
    // the code section is the last [Code Snippets] block of every prompt
    const std::string open = "[Code Snippets]\n";
    const std::string close = "\n[end]\n";
    const size_t begin = prompt.rfind(open);
    if (begin == std::string::npos) throw TransportError("oracle: prompt has no code section");
    const size_t body_begin = begin + open.size();
    const size_t end = prompt.find(close, body_begin);
    if (end == std::string::npos) throw TransportError("oracle: unterminated code section");
    std::string snippet = prompt.substr(body_begin, end - body_begin);
    auto it = label_by_snippet_.find(snippet);
    if (it == label_by_snippet_.end())
        // prompt assembly normalizes the trailing newline away
        it = label_by_snippet_.find(snippet + "\n");
    if (it == label_by_snippet_.end())
        throw TransportError("oracle: snippet not in ground truth");
    return {it->second ? "YES" : "NO", std::nullopt, std::nullopt};
}

} // namespace rulehound
