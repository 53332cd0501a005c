#include "rulehound/mine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "rulehound/errors.hpp"
#include "rulehound/hash.hpp"
#include "rulehound/text.hpp"

namespace rulehound {

HashEmbedder::HashEmbedder(size_t dimension, std::uint64_t seed) : dim_(dimension), seed_(seed) {}

std::vector<double> HashEmbedder::embed(const std::string& text) {
    std::vector<double> v(dim_);
    std::uint64_t h = fnv1a64(text) ^ seed_;
    double norm_sq = 0.0;
    for (size_t i = 0; i < dim_; ++i) {
        h = mix64(h + i + 1);
        // uniform in [-1, 1)
        v[i] = static_cast<double>(h >> 11) / static_cast<double>(1ULL << 52) - 1.0;
        norm_sq += v[i] * v[i];
    }
    const double norm = std::sqrt(norm_sq);
    if (norm > 0)
        for (auto& x : v) x /= norm;
    return v;
}

FixtureEmbedder::FixtureEmbedder(const std::filesystem::path& path) {
    for (const auto& j : jsonl::read_file(path))
        by_text_[j.at("text").get<std::string>()] = j.at("vector").get<std::vector<double>>();
}

std::vector<double> FixtureEmbedder::embed(const std::string& text) {
    auto it = by_text_.find(text);
    if (it == by_text_.end()) throw ConfigError("no fixture vector for text: " + text);
    return it->second;
}

SummarizeOutcome summarize_patches(const std::vector<SeedPatch>& patches, ModelClient& client) {
    SummarizeOutcome outcome;
    for (const auto& patch : patches) {
        const std::string prompt = render_rule_generation_prompt(patch);
        try {
            auto [completion, usage] = client.complete(prompt);
            (void)usage;
            RuleParseOutcome parsed = parse_rule_response(completion, patch.commit_id);
            outcome.summaries.push_back({patch.commit_id, parsed.rules.front().text});
        } catch (const std::exception& e) {
            outcome.warnings.push_back("patch " + patch.commit_id + ": " + e.what());
        }
    }
    if (outcome.summaries.empty() && !patches.empty())
        throw TransportError("all patch summaries failed");
    return outcome;
}

std::vector<RuleEmbedding> embed_rules(
    const std::vector<std::pair<std::string, std::string>>& rules, EmbeddingBackend& backend) {
    std::vector<RuleEmbedding> out;
    size_t dim = 0;
    for (const auto& [id, text] : rules) {
        RuleEmbedding e;
        e.rule_id = id;
        e.v = backend.embed(text);
        if (dim == 0) dim = e.v.size();
        if (e.v.size() != dim)
            throw ConfigError("embedding dimension mismatch for rule " + id + ": " +
                              std::to_string(e.v.size()) + " vs " + std::to_string(dim));
        double norm_sq = 0.0;
        for (double x : e.v) {
            if (!std::isfinite(x)) throw ConfigError("non-finite embedding component");
            norm_sq += x * x;
        }
        e.norm = std::sqrt(norm_sq);
        out.push_back(std::move(e));
    }
    return out;
}

double cosine_distance(const RuleEmbedding& a, const RuleEmbedding& b) {
    if (a.v.size() != b.v.size()) throw ConfigError("dimension mismatch in cosine distance");
    if (a.norm == 0.0 || b.norm == 0.0) return 1.0;
    double dot = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) dot += a.v[i] * b.v[i];
    return 1.0 - dot / (a.norm * b.norm);
}

ClusterOutcome cluster_rules(const std::vector<RuleEmbedding>& embeddings, double eps,
                             size_t min_pts) {
    if (eps <= 0) throw ConfigError("eps must be positive");
    if (min_pts < 2) throw ConfigError("min_pts must be at least 2");

    const size_t n = embeddings.size();
    // exact neighbor sets; mining runs offline at modest point counts
    std::vector<std::vector<size_t>> neighbors(n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (cosine_distance(embeddings[i], embeddings[j]) <= eps)
                neighbors[i].push_back(j); // includes i itself
        }
    }

    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    std::vector<int> label(n, kUnvisited);
    int next_cluster = 0;

    for (size_t i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        if (neighbors[i].size() < min_pts) {
            label[i] = kNoise;
            continue;
        }
        const int cid = next_cluster++;
        label[i] = cid;
        std::deque<size_t> frontier(neighbors[i].begin(), neighbors[i].end());
        while (!frontier.empty()) {
            const size_t q = frontier.front();
            frontier.pop_front();
            if (label[q] == kNoise) label[q] = cid; // border point
            if (label[q] != kUnvisited) continue;
            label[q] = cid;
            if (neighbors[q].size() >= min_pts)
                frontier.insert(frontier.end(), neighbors[q].begin(), neighbors[q].end());
        }
    }

    ClusterOutcome outcome;
    std::map<int, Cluster> by_id;
    for (size_t i = 0; i < n; ++i) {
        if (label[i] == kNoise) {
            outcome.noise.push_back(embeddings[i].rule_id);
            continue;
        }
        Cluster& c = by_id[label[i]];
        c.cluster_id = label[i];
        c.members.push_back(embeddings[i].rule_id);
    }
    for (auto& [id, c] : by_id) {
        c.size = c.members.size();
        outcome.clusters.push_back(std::move(c));
    }
    std::sort(outcome.clusters.begin(), outcome.clusters.end(),
              [](const Cluster& a, const Cluster& b) {
                  if (a.size != b.size) return a.size > b.size;
                  return a.cluster_id < b.cluster_id;
              });
    return outcome;
}

std::vector<RankedCluster> select_top_clusters(
    const ClusterOutcome& outcome, const std::vector<RuleEmbedding>& embeddings,
    const std::map<std::string, std::string>& rule_texts, size_t k) {
    if (k < 1) throw ConfigError("k must be at least 1");

    std::map<std::string, const RuleEmbedding*> by_id;
    for (const auto& e : embeddings) by_id[e.rule_id] = &e;

    std::vector<RankedCluster> ranked;
    for (const auto& c : outcome.clusters) {
        if (ranked.size() >= k) break;
        RankedCluster rc;
        rc.cluster = c;
        // medoid: member with minimal summed distance to co-members
        double best = 0.0;
        std::string best_id;
        for (const auto& m : c.members) {
            double total = 0.0;
            for (const auto& other : c.members)
                if (m != other) total += cosine_distance(*by_id.at(m), *by_id.at(other));
            if (best_id.empty() || total < best) {
                best = total;
                best_id = m;
            }
        }
        rc.cluster.medoid = best_id;
        auto it = rule_texts.find(best_id);
        rc.medoid_rule_text = it == rule_texts.end() ? "" : it->second;
        ranked.push_back(std::move(rc));
    }
    return ranked;
}

void FunctionRuleMap::add(const std::string& identifier, const std::string& rule_id) {
    rules_by_identifier[identifier].insert(rule_id);
    identifiers_by_rule[rule_id].insert(identifier);
}

FunctionRuleMap build_function_rule_map(const std::vector<SecurityRule>& rules,
                                        const std::set<std::string>& function_lexicon) {
    FunctionRuleMap map;
    for (const auto& rule : rules) {
        for (const char* key : {"TARGET", "TARGET1", "TARGET2", "HANDLER"}) {
            auto it = rule.slots.find(key);
            if (it != rule.slots.end() && text::is_c_identifier(it->second))
                map.add(it->second, rule.id);
        }
        for (const auto& tok : text::identifier_tokens(rule.text)) {
            const std::string ident = rule.text.substr(tok.offset, tok.length);
            if (function_lexicon.count(ident)) map.add(ident, rule.id);
        }
    }
    return map;
}

Json cluster_to_json(const RankedCluster& rc) {
    Json j;
    j["cluster_id"] = rc.cluster.cluster_id;
    j["size"] = rc.cluster.size;
    j["medoid_rule"] = rc.cluster.medoid;
    j["medoid_rule_text"] = rc.medoid_rule_text;
    j["members"] = rc.cluster.members;
    return j;
}

std::vector<Json> map_to_json(const FunctionRuleMap& map) {
    std::vector<Json> records;
    for (const auto& [ident, rule_ids] : map.rules_by_identifier) {
        Json j;
        j["identifier"] = ident;
        j["rule_ids"] = std::vector<std::string>(rule_ids.begin(), rule_ids.end());
        records.push_back(std::move(j));
    }
    return records;
}

} // namespace rulehound
