#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rulehound/detect.hpp"
#include "rulehound/jsonl.hpp"
#include "rulehound/model.hpp"

namespace rulehound {

struct EvalPair {
    std::string pair_id;
    std::string positive; // unpatched snippet, label = buggy
    std::string negative; // patched snippet, label = safe
};

struct GroundTruthPattern {
    std::string pattern_id;
    std::string rule_text;
    std::string rule_target;
    MatchMode rule_match_mode = MatchMode::Call;
    std::string seed_commit;
    std::string seed_patch_text; // optional, needed by Patch/RulePatch configs
    std::vector<EvalPair> pairs;
};

struct DatasetAccounting {
    size_t patterns = 0;
    size_t pairs = 0;
    size_t snippets = 0;         // 2 * pairs
    size_t implied_patches = 0;  // patterns + pairs (one seed per pattern)
};

/// Loads and validates a ground-truth dataset. Throws ParseError when a
/// pattern violates an invariant (no pairs, seed listed among targets,
/// empty or identical snippets).
std::vector<GroundTruthPattern> load_dataset(const std::filesystem::path& path);

DatasetAccounting dataset_accounting(const std::vector<GroundTruthPattern>& dataset);

struct Confusion {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;
    long undecided = 0;
    long pairs_total = 0;
    long pairs_correct = 0;
};

struct Metrics {
    Confusion counts;
    std::optional<double> precision;          // TP / (TP + FP)
    std::optional<double> recall;             // TP / (TP + FN)
    std::optional<double> pairwise_accuracy;  // correct pairs / total pairs
};

/// Zero denominators yield an unset optional, never 0.
Metrics compute_metrics(const Confusion& counts);

struct PatternResult {
    std::string pattern_id;
    Metrics metrics;
};

struct EvalResult {
    std::string model;
    PromptConfig config = PromptConfig::Rule;
    Metrics overall;
    std::vector<PatternResult> per_pattern;
    double mean_input_tokens = 0.0;
    double mean_output_tokens = 0.0;
    long snippets = 0;
    bool valid = true;       // false when a transport abort truncated the run
    std::string error;
};

/// Judges every snippet independently under `config`. A pair counts as
/// correct only when the positive snippet is flagged and the negative one is
/// not. Undecided verdicts score as incorrect for their snippet. Transport
/// aborts mark the partial result invalid instead of throwing.
EvalResult evaluate(const std::vector<GroundTruthPattern>& dataset, PromptConfig config,
                    ModelClient& client);

Json eval_result_to_json(const EvalResult& r);
EvalResult eval_result_from_json(const Json& j);

struct ReportFiles {
    std::string ablation_text;
    std::string ablation_csv;
    std::string cost_text;
    std::string cost_csv;
};

/// Ablation table (rows = configs, columns = models, cells = P/R/PA) plus a
/// token/cost table. Models missing from the price table report no cost.
ReportFiles report(const std::vector<EvalResult>& results, const PriceTable& prices);

/// Backend that answers from the ground-truth labels by locating the snippet
/// embedded in the prompt. Used as the perfect-predictor baseline.
class OracleBackend : public Backend {
public:
    explicit OracleBackend(const std::vector<GroundTruthPattern>& dataset);
    RawCompletion complete(const std::string& prompt, const ModelConfig& cfg) override;
    std::string name() const override { return "oracle"; }

private:
    std::map<std::string, bool> label_by_snippet_; // true = buggy
};

} // namespace rulehound
