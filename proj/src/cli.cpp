#include "rulehound/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <set>

#include "rulehound/errors.hpp"
#include "rulehound/hash.hpp"
#include "rulehound/mine.hpp"
#include "rulehound/text.hpp"

namespace rulehound::cli {

namespace {

// Exclusive lock file per output directory; concurrent runs must not share.
class OutputLock {
public:
    explicit OutputLock(const std::filesystem::path& out_dir) {
        std::filesystem::create_directories(out_dir);
        path_ = out_dir / ".lock";
        std::FILE* f = std::fopen(path_.string().c_str(), "wx");
        if (f == nullptr)
            throw ConfigError("output dir is locked by another run: " + out_dir.string());
        std::fclose(f);
    }
    ~OutputLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    std::filesystem::path path_;
};

std::shared_ptr<Backend> make_backend(const RunConfig& cfg,
                                      const std::vector<GroundTruthPattern>* dataset) {
    if (cfg.mock.enabled) {
        if (cfg.mock.mode == "scripted") {
            if (cfg.mock.script.empty())
                throw ConfigError("scripted mock requires a script file");
            return MockBackend::from_script_file(cfg.mock.script);
        }
        if (cfg.mock.mode == "random") return MockBackend::random_verdict(cfg.mock.seed);
        if (cfg.mock.mode == "constant") return MockBackend::constant(cfg.mock.constant);
        if (cfg.mock.mode == "oracle") {
            if (dataset == nullptr)
                throw ConfigError("oracle mock only applies to eval runs");
            return std::make_shared<OracleBackend>(*dataset);
        }
        throw ConfigError("unknown mock mode: " + cfg.mock.mode);
    }
    if (cfg.model.base_url.empty())
        throw ConfigError("live backend requires a base URL (or use --mock)");
    return std::make_shared<HttpBackend>(cfg.model.base_url);
}

std::unique_ptr<ModelClient> make_client(const RunConfig& cfg,
                                         const std::vector<GroundTruthPattern>* dataset = nullptr) {
    auto client = std::make_unique<ModelClient>(make_backend(cfg, dataset), cfg.model);
    if (!cfg.cache_dir.empty())
        client->set_cache(std::make_shared<ResponseCache>(cfg.cache_dir));
    if (cfg.rate_limit_per_min > 0) client->set_rate_limit(cfg.rate_limit_per_min);
    return client;
}

std::string corpus_fingerprint(const SourceCorpus& corpus) {
    std::uint64_t h = fnv1a64("corpus");
    for (const auto& f : corpus.files) {
        h = fnv1a64(f.path, h);
        h = fnv1a64(f.raw, h);
    }
    return hex64(h);
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& rule_ids,
                    const std::string& fingerprint) {
    Json j;
    j["command"] = command;
    j["config_hash"] = config_hash(cfg);
    j["rule_ids"] = rule_ids;
    j["model"] = cfg.mock.enabled ? "mock:" + cfg.mock.mode : cfg.model.model;
    j["fixtures"] = fingerprint;
    write_text_file(cfg.out_dir / "manifest.json", j.dump(2) + "\n");
}

std::vector<std::filesystem::path> collect_patch_files(const std::filesystem::path& p) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(p)) {
        for (const auto& e : std::filesystem::directory_iterator(p))
            if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(p);
    }
    return files;
}

int guard(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAnalysis;
    }
}

} // namespace

std::string config_hash(const RunConfig& cfg) {
    std::string canon;
    canon += cfg.corpus_root.string() + "|";
    for (const auto& g : cfg.include_globs) canon += g + ",";
    canon += "|" + cfg.model.model + "|" + std::to_string(cfg.model.temperature) + "|" +
             std::to_string(cfg.model.top_p) + "|" + std::to_string(cfg.model.max_output_tokens);
    canon += "|mock=" + std::string(cfg.mock.enabled ? cfg.mock.mode : "off") + ":" +
             std::to_string(cfg.mock.seed) + ":" + cfg.mock.script.string();
    canon += "|rule=" + cfg.rule_id + "|catalog=" + cfg.rule_catalog.string();
    canon += "|budget=" + std::to_string(cfg.oversize_byte_budget);
    for (const auto& c : cfg.configs) canon += "|" + c;
    return content_id(canon);
}

int run_seed(const RunConfig& cfg) {
    return guard([&]() {
        if (cfg.commit_file.empty() || !std::filesystem::exists(cfg.commit_file))
            throw ConfigError("commit file not found: " + cfg.commit_file.string());
        if (cfg.pre_image_root.empty() || !std::filesystem::exists(cfg.pre_image_root))
            throw ConfigError("pre-image root not found: " + cfg.pre_image_root.string());

        OutputLock lock(cfg.out_dir);
        SourceCorpus pre_image = load_corpus(cfg.pre_image_root, cfg.include_globs);

        std::vector<Json> records;
        for (const auto& file : collect_patch_files(cfg.commit_file)) {
            ParsedCommit commit = parse_commit(read_text_file(file));
            SeedPatch seed;
            try {
                seed = build_seed_patch(commit, pre_image);
            } catch (const ParseError& e) {
                // a diffed file absent from the pre-image tree is an IO-level
                // mismatch between inputs
                throw ConfigError(e.what());
            }
            records.push_back(seed_to_json(seed));
        }
        jsonl::write_file(cfg.out_dir / "seeds.jsonl", records);
        write_manifest(cfg, "seed", {}, corpus_fingerprint(pre_image));
        std::cout << "seeds=" << records.size() << "\n";
        return kExitOk;
    });
}

int run_rulegen(const RunConfig& cfg) {
    return guard([&]() {
        if (cfg.seed_file.empty() || !std::filesystem::exists(cfg.seed_file))
            throw ConfigError("seed file not found: " + cfg.seed_file.string());
        const auto records = jsonl::read_file(cfg.seed_file);
        if (records.empty()) throw std::runtime_error("seed file is empty");

        OutputLock lock(cfg.out_dir);
        auto client = make_client(cfg);

        std::vector<SecurityRule> rules;
        std::vector<std::string> warnings;
        for (const auto& r : records) {
            SeedPatch seed = seed_from_json(r);
            const std::string prompt = render_rule_generation_prompt(seed);
            auto [completion, usage] = client->complete(prompt);
            (void)usage;
            RuleParseOutcome outcome = parse_rule_response(completion, seed.commit_id);
            for (auto& rule : outcome.rules) rules.push_back(std::move(rule));
            warnings.insert(warnings.end(), outcome.warnings.begin(), outcome.warnings.end());
        }
        const auto catalog =
            cfg.rule_catalog.empty() ? cfg.out_dir / "rules.jsonl" : cfg.rule_catalog;
        const size_t added = append_to_catalog(catalog, rules);
        std::vector<std::string> ids;
        for (const auto& r : rules) ids.push_back(r.id);
        write_manifest(cfg, "rulegen", ids, "");
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        std::cout << "rules=" << rules.size() << " added=" << added << "\n";
        return kExitOk;
    });
}

int run_scan(const RunConfig& cfg) {
    return guard([&]() {
        if (cfg.corpus_root.empty() || !std::filesystem::exists(cfg.corpus_root))
            throw ConfigError("corpus root not found: " + cfg.corpus_root.string());

        std::vector<RuleRef> rules;
        if (!cfg.human_rule_text.empty()) {
            HumanRule hr{cfg.human_rule_text, cfg.human_rule_targets, MatchMode::Call};
            if (hr.targets.empty())
                throw ConfigError("--rule-text requires at least one --target");
            rules.push_back(rule_ref(hr));
        } else {
            if (cfg.rule_catalog.empty())
                throw ConfigError("scan requires --catalog or --rule-text");
            auto catalog = load_rule_catalog(cfg.rule_catalog);
            for (const auto& rule : catalog) {
                if (!cfg.rule_id.empty() && rule.id != cfg.rule_id) continue;
                if (rule.scan_targets().empty()) continue;
                rules.push_back(rule_ref(rule));
            }
            if (rules.empty())
                throw ConfigError(cfg.rule_id.empty() ? "catalog has no scannable rules"
                                                      : "rule not found: " + cfg.rule_id);
        }

        OutputLock lock(cfg.out_dir);
        SourceCorpus corpus = load_corpus(cfg.corpus_root, cfg.include_globs);
        auto client = make_client(cfg);

        PromptConfig config = PromptConfig::Rule;
        if (!cfg.configs.empty()) config = prompt_config_from_string(cfg.configs.front());

        ScanOptions options;
        options.oversize_byte_budget = cfg.oversize_byte_budget;
        options.workers = cfg.workers;
        options.incremental_log = cfg.out_dir / "findings.partial.jsonl";
        std::error_code ec;
        std::filesystem::remove(options.incremental_log, ec);

        std::vector<Json> out_records;
        size_t candidates = 0, kept = 0;
        std::vector<std::string> rule_ids;
        for (const auto& rule : rules) {
            rule_ids.push_back(rule.id);
            auto findings = postprocess(scan(corpus, rule, config, *client, options), rule);
            candidates += findings.size();
            for (const auto& f : findings) {
                if (f.status == "kept") ++kept;
                out_records.push_back(finding_to_json(f));
            }
        }
        jsonl::write_file(cfg.out_dir / "findings.jsonl", out_records);
        write_manifest(cfg, "scan", rule_ids, corpus_fingerprint(corpus));
        std::cout << "candidates=" << candidates << " flagged=" << kept << "\n";
        return kExitOk;
    });
}

int run_eval(const RunConfig& cfg) {
    return guard([&]() {
        if (cfg.dataset.empty() || !std::filesystem::exists(cfg.dataset))
            throw ConfigError("dataset not found: " + cfg.dataset.string());
        auto dataset = load_dataset(cfg.dataset);

        OutputLock lock(cfg.out_dir);
        auto client = make_client(cfg, &dataset);

        std::vector<std::string> config_names = cfg.configs;
        if (config_names.empty()) config_names = {"Rule"};

        std::vector<EvalResult> results;
        std::vector<Json> records;
        for (const auto& name : config_names) {
            EvalResult r = evaluate(dataset, prompt_config_from_string(name), *client);
            records.push_back(eval_result_to_json(r));
            results.push_back(std::move(r));
        }
        jsonl::write_file(cfg.out_dir / "eval_results.jsonl", records);

        PriceTable prices;
        if (!cfg.price_table.empty()) prices = load_price_table(cfg.price_table);
        ReportFiles files = report(results, prices);
        write_text_file(cfg.out_dir / "ablation.txt", files.ablation_text);
        write_text_file(cfg.out_dir / "ablation.csv", files.ablation_csv);
        write_text_file(cfg.out_dir / "cost.txt", files.cost_text);
        write_text_file(cfg.out_dir / "cost.csv", files.cost_csv);
        write_manifest(cfg, "eval", {}, "");
        std::cout << files.ablation_text;
        bool all_valid = std::all_of(results.begin(), results.end(),
                                     [](const EvalResult& r) { return r.valid; });
        if (!all_valid) {
            std::cerr << "error: evaluation aborted mid-run; partial metrics flagged invalid\n";
            return kExitAnalysis;
        }
        return kExitOk;
    });
}

int run_mine(const RunConfig& cfg) {
    return guard([&]() {
        if (cfg.patch_dir.empty() || !std::filesystem::exists(cfg.patch_dir))
            throw ConfigError("patch input not found: " + cfg.patch_dir.string());

        OutputLock lock(cfg.out_dir);
        auto client = make_client(cfg);

        // seeds arrive as JSONL records from the seed step
        std::vector<SeedPatch> seeds;
        for (const auto& file : collect_patch_files(cfg.patch_dir)) {
            if (file.extension() != ".jsonl") continue;
            for (const auto& j : jsonl::read_file(file)) seeds.push_back(seed_from_json(j));
        }
        if (seeds.empty()) throw std::runtime_error("no seed records found");

        SummarizeOutcome summaries = summarize_patches(seeds, *client);
        for (const auto& w : summaries.warnings) std::cerr << "warning: " << w << "\n";

        std::vector<std::pair<std::string, std::string>> rules;
        std::map<std::string, std::string> rule_texts;
        for (const auto& s : summaries.summaries) {
            rules.emplace_back(s.patch_id, s.rule_text);
            rule_texts[s.patch_id] = s.rule_text;
        }

        HashEmbedder embedder(16, cfg.mock.seed);
        auto embeddings = embed_rules(rules, embedder);
        ClusterOutcome clusters = cluster_rules(embeddings, cfg.mine_eps, cfg.mine_min_pts);
        auto ranked = select_top_clusters(clusters, embeddings, rule_texts, cfg.mine_top_k);

        std::vector<Json> cluster_records;
        for (const auto& rc : ranked) cluster_records.push_back(cluster_to_json(rc));
        jsonl::write_file(cfg.out_dir / "clusters.jsonl", cluster_records);

        // function-rule map from the summaries, with the corpus lexicon when
        // a corpus root is configured
        std::set<std::string> lexicon;
        if (!cfg.corpus_root.empty() && std::filesystem::exists(cfg.corpus_root)) {
            SourceCorpus corpus = load_corpus(cfg.corpus_root, cfg.include_globs);
            for (const auto& f : corpus.files)
                for (const auto& span : f.functions) lexicon.insert(span.name);
        }
        std::vector<SecurityRule> parsed_rules;
        for (const auto& s : summaries.summaries) {
            try {
                RuleParseOutcome outcome = parse_rule_response(s.rule_text, s.patch_id);
                parsed_rules.push_back(outcome.rules.front());
            } catch (const ParseError&) {
                // summary line carries no scannable identifier; map skips it
            }
        }
        FunctionRuleMap map = build_function_rule_map(parsed_rules, lexicon);
        jsonl::write_file(cfg.out_dir / "map.jsonl", map_to_json(map));

        write_manifest(cfg, "mine", {}, "");
        std::cout << "summaries=" << summaries.summaries.size()
                  << " clusters=" << ranked.size() << " noise=" << clusters.noise.size() << "\n";
        return kExitOk;
    });
}

int run_report(const RunConfig& cfg) {
    return guard([&]() {
        const auto results_path = cfg.seed_file.empty()
                                      ? cfg.out_dir / "eval_results.jsonl"
                                      : cfg.seed_file;
        if (!std::filesystem::exists(results_path))
            throw ConfigError("eval results not found: " + results_path.string());
        std::vector<EvalResult> results;
        for (const auto& j : jsonl::read_file(results_path))
            results.push_back(eval_result_from_json(j));
        PriceTable prices;
        if (!cfg.price_table.empty()) prices = load_price_table(cfg.price_table);
        ReportFiles files = report(results, prices);
        write_text_file(cfg.out_dir / "ablation.txt", files.ablation_text);
        write_text_file(cfg.out_dir / "ablation.csv", files.ablation_csv);
        write_text_file(cfg.out_dir / "cost.txt", files.cost_text);
        write_text_file(cfg.out_dir / "cost.csv", files.cost_csv);
        std::cout << files.ablation_text;
        return kExitOk;
    });
}

} // namespace rulehound::cli
