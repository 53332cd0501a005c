#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rulehound/detect.hpp"
#include "rulehound/eval.hpp"
#include "rulehound/model.hpp"

namespace rulehound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAnalysis = 1; // analysis-level failure
inline constexpr int kExitConfig = 2;   // configuration / IO failure

struct MockSpec {
    bool enabled = false;
    std::string mode = "scripted"; // scripted | random | constant | oracle
    std::filesystem::path script;
    std::uint64_t seed = 0;
    std::string constant = "NO";
};

struct RunConfig {
    // corpus
    std::filesystem::path corpus_root;
    std::vector<std::string> include_globs;

    // model
    ModelConfig model;
    MockSpec mock;
    std::filesystem::path cache_dir; // empty disables the response cache
    int rate_limit_per_min = 0;
    int workers = 1;
    size_t oversize_byte_budget = 24576;

    // rules / prompts
    std::filesystem::path rule_catalog;
    std::string rule_id;              // scan a single rule when set
    std::string human_rule_text;      // HuRule input
    std::vector<std::string> human_rule_targets;
    std::vector<std::string> configs; // eval configurations

    // IO
    std::filesystem::path out_dir = "out";
    std::filesystem::path price_table;
    std::filesystem::path dataset;
    std::filesystem::path commit_file;   // file or directory of patch files
    std::filesystem::path pre_image_root;
    std::filesystem::path seed_file;     // seeds JSONL
    std::filesystem::path patch_dir;     // mining input
    size_t mine_top_k = 200;
    double mine_eps = 0.15;
    size_t mine_min_pts = 3;
};

int run_seed(const RunConfig& cfg);
int run_rulegen(const RunConfig& cfg);
int run_scan(const RunConfig& cfg);
int run_eval(const RunConfig& cfg);
int run_mine(const RunConfig& cfg);
int run_report(const RunConfig& cfg);

/// Stable hash over everything that influences outputs; recorded in the run
/// manifest for traceability.
std::string config_hash(const RunConfig& cfg);

} // namespace rulehound::cli
