#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rulehound/model.hpp"
#include "rulehound/patch.hpp"
#include "rulehound/rules.hpp"

namespace rulehound {

struct RuleEmbedding {
    std::string rule_id;
    std::vector<double> v;
    double norm = 0.0;
};

struct Cluster {
    int cluster_id = 0;
    std::vector<std::string> members; // rule ids, input order
    std::string medoid;
    size_t size = 0;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
};

/// Deterministic embedding stand-in: a unit vector derived from the text
/// hash. Identical texts embed identically.
class HashEmbedder : public EmbeddingBackend {
public:
    explicit HashEmbedder(size_t dimension = 16, std::uint64_t seed = 0);
    std::vector<double> embed(const std::string& text) override;

private:
    size_t dim_;
    std::uint64_t seed_;
};

/// Embeddings read from a JSONL fixture: {"text": ..., "vector": [...]}.
class FixtureEmbedder : public EmbeddingBackend {
public:
    explicit FixtureEmbedder(const std::filesystem::path& path);
    std::vector<double> embed(const std::string& text) override;

private:
    std::map<std::string, std::vector<double>> by_text_;
};

struct PatchSummary {
    std::string patch_id;
    std::string rule_text;
};

struct SummarizeOutcome {
    std::vector<PatchSummary> summaries;
    std::vector<std::string> warnings;
};

/// One rule text per seed patch via the rule-generation prompt. Individual
/// failures are recorded as warnings; throws only when every patch fails.
SummarizeOutcome summarize_patches(const std::vector<SeedPatch>& patches, ModelClient& client);

/// One embedding per (rule id, text) pair; dimension mismatches across the
/// run raise ConfigError.
std::vector<RuleEmbedding> embed_rules(const std::vector<std::pair<std::string, std::string>>& rules,
                                       EmbeddingBackend& backend);

double cosine_distance(const RuleEmbedding& a, const RuleEmbedding& b);

struct ClusterOutcome {
    std::vector<Cluster> clusters; // sorted by size descending, id ascending
    std::vector<std::string> noise;
};

/// DBSCAN over cosine distance with exact neighbor sets. A point is core
/// when at least `min_pts` points (itself included) lie within `eps`.
ClusterOutcome cluster_rules(const std::vector<RuleEmbedding>& embeddings, double eps,
                             size_t min_pts);

struct RankedCluster {
    Cluster cluster;
    std::string medoid_rule_text;
};

/// Top-k clusters by size (ties by cluster id). Medoid = member minimizing
/// summed cosine distance to its co-members, verified brute force.
std::vector<RankedCluster> select_top_clusters(const ClusterOutcome& outcome,
                                               const std::vector<RuleEmbedding>& embeddings,
                                               const std::map<std::string, std::string>& rule_texts,
                                               size_t k);

struct FunctionRuleMap {
    std::map<std::string, std::set<std::string>> rules_by_identifier;
    std::map<std::string, std::set<std::string>> identifiers_by_rule;

    void add(const std::string& identifier, const std::string& rule_id);
};

/// Links every rule to the function identifiers it mentions: TARGET/HANDLER
/// slot values plus any token of the rendered text found in the lexicon.
FunctionRuleMap build_function_rule_map(const std::vector<SecurityRule>& rules,
                                        const std::set<std::string>& function_lexicon);

Json cluster_to_json(const RankedCluster& rc);
std::vector<Json> map_to_json(const FunctionRuleMap& map);

} // namespace rulehound
