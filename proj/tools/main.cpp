#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rulehound/cli.hpp"

namespace {

using rulehound::cli::RunConfig;

void add_model_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--model", cfg.model.model, "Model name")->envname("RULEHOUND_MODEL");
    cmd->add_option("--base-url", cfg.model.base_url, "Chat-completion base URL")
        ->envname("RULEHOUND_BASE_URL");
    cmd->add_option("--api-key-env", cfg.model.api_key_env,
                    "Environment variable holding the API key");
    cmd->add_option("--temperature", cfg.model.temperature, "Sampling temperature");
    cmd->add_option("--top-p", cfg.model.top_p, "Nucleus sampling parameter");
    cmd->add_option("--max-output-tokens", cfg.model.max_output_tokens, "Completion budget");
    cmd->add_option("--retries", cfg.model.retry_count, "Transport retries");
    cmd->add_option("--cache-dir", cfg.cache_dir, "Response cache directory")
        ->envname("RULEHOUND_CACHE_DIR");
    cmd->add_option("--rate-limit", cfg.rate_limit_per_min, "Requests per minute (0 = off)");
    cmd->add_option("--workers", cfg.workers, "Worker threads");

    auto* mock = cmd->add_option("--mock", cfg.mock.script,
                                 "Mock script JSONL; swaps in the deterministic backend");
    mock->each([&cfg](const std::string&) {
        cfg.mock.enabled = true;
        cfg.mock.mode = "scripted";
    });
    cmd->add_option("--mock-mode", cfg.mock.mode, "scripted|random|constant|oracle")
        ->each([&cfg](const std::string&) { cfg.mock.enabled = true; });
    cmd->add_option("--mock-seed", cfg.mock.seed, "Seed for the random mock");
    cmd->add_option("--mock-constant", cfg.mock.constant, "Completion for the constant mock");
}

void add_io_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--out", cfg.out_dir, "Output directory");
    cmd->add_option("--prices", cfg.price_table, "Price table JSON")
        ->envname("RULEHOUND_PRICES");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Seed-patch driven security rule extraction and scanning for C corpora"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value configuration file");

    RunConfig cfg;

    auto* seed = app.add_subcommand("seed", "Build seed patches from bug-fix commits");
    seed->add_option("--commit", cfg.commit_file, "Commit/patch file or directory")->required();
    seed->add_option("--pre-image", cfg.pre_image_root, "Checked-out parent tree")->required();
    seed->add_option("--globs", cfg.include_globs, "Include globs for the pre-image");
    add_io_options(seed, cfg);

    auto* rulegen = app.add_subcommand("rulegen", "Generate security rules from seed patches");
    rulegen->add_option("--seeds", cfg.seed_file, "Seed patch JSONL")->required();
    rulegen->add_option("--catalog", cfg.rule_catalog, "Rule catalog to append to");
    add_model_options(rulegen, cfg);
    add_io_options(rulegen, cfg);

    auto* scan = app.add_subcommand("scan", "Scan a corpus for rule violations");
    scan->add_option("--corpus", cfg.corpus_root, "Corpus root")->required();
    scan->add_option("--globs", cfg.include_globs, "Include globs");
    scan->add_option("--catalog", cfg.rule_catalog, "Rule catalog JSONL");
    scan->add_option("--rule-id", cfg.rule_id, "Scan a single rule from the catalog");
    scan->add_option("--rule-text", cfg.human_rule_text, "Free-text human rule");
    scan->add_option("--target", cfg.human_rule_targets, "Target identifier for --rule-text");
    scan->add_option("--prompt-config", cfg.configs, "Prompt configuration (default Rule)");
    scan->add_option("--oversize-budget", cfg.oversize_byte_budget,
                     "Candidate byte budget before filtering");
    add_model_options(scan, cfg);
    add_io_options(scan, cfg);

    auto* eval = app.add_subcommand("eval", "Evaluate configurations on a ground-truth dataset");
    eval->add_option("--dataset", cfg.dataset, "Ground-truth JSONL")->required();
    eval->add_option("--configs", cfg.configs, "Prompt configurations to evaluate");
    add_model_options(eval, cfg);
    add_io_options(eval, cfg);

    auto* mine = app.add_subcommand("mine", "Cluster patch summaries into recurring patterns");
    mine->add_option("--patches", cfg.patch_dir, "Seed JSONL file or directory")->required();
    mine->add_option("--corpus", cfg.corpus_root, "Corpus for the function lexicon");
    mine->add_option("--top-k", cfg.mine_top_k, "Clusters to keep");
    mine->add_option("--eps", cfg.mine_eps, "DBSCAN cosine-distance radius");
    mine->add_option("--min-pts", cfg.mine_min_pts, "DBSCAN core-point threshold");
    add_model_options(mine, cfg);
    add_io_options(mine, cfg);

    auto* report = app.add_subcommand("report", "Regenerate report tables from eval results");
    report->add_option("--results", cfg.seed_file, "eval_results.jsonl path");
    add_io_options(report, cfg);

    CLI11_PARSE(app, argc, argv);

    if (seed->parsed()) return rulehound::cli::run_seed(cfg);
    if (rulegen->parsed()) return rulehound::cli::run_rulegen(cfg);
    if (scan->parsed()) return rulehound::cli::run_scan(cfg);
    if (eval->parsed()) return rulehound::cli::run_eval(cfg);
    if (mine->parsed()) return rulehound::cli::run_mine(cfg);
    if (report->parsed()) return rulehound::cli::run_report(cfg);
    return rulehound::cli::kExitConfig;
}
