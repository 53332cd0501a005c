#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "rulehound/jsonl.hpp"

namespace rulehound {

struct ModelConfig {
    std::string backend_id = "mock";
    std::string model = "mock-model";
    double temperature = 1.0;
    double top_p = 1.0;
    int n = 1;
    long max_output_tokens = 4096;
    long context_limit_tokens = 128000;
    int timeout_ms = 120000;
    int retry_count = 2;       // transport retries beyond the first attempt
    int retry_backoff_ms = 250;
    std::string base_url;      // live backend only
    std::string api_key_env = "RULEHOUND_API_KEY";

    void validate() const; // throws ConfigError on out-of-range fields
};

struct TokenUsage {
    long input_tokens = 0;
    long output_tokens = 0;
    bool cached = false;

    long billed_input() const { return cached ? 0 : input_tokens; }
    long billed_output() const { return cached ? 0 : output_tokens; }
};

struct PriceEntry {
    double input_per_1k = 0.0;
    double output_per_1k = 0.0;
};

struct PriceTable {
    std::map<std::string, PriceEntry> prices;
};

PriceTable load_price_table(const std::filesystem::path& path);

/// Deterministic size estimate: ceil(bytes / 4). Swappable via
/// ModelClient::set_token_estimator.
long count_tokens(std::string_view text);

/// in/1000 * p_in + out/1000 * p_out; cached usage bills nothing.
/// Throws ConfigError for models missing from the table.
double estimate_cost(const TokenUsage& usage, const std::string& model, const PriceTable& prices);

struct RawCompletion {
    std::string text;
    std::optional<long> input_tokens;  // backend-reported when available
    std::optional<long> output_tokens;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual RawCompletion complete(const std::string& prompt, const ModelConfig& cfg) = 0;
    virtual std::string name() const = 0;
};

/// Deterministic test backend. Entries are matched in file order; supported
/// keys per JSONL record: {"prompt_hash": h}, {"contains": s}, {"default":
/// true}, each with "completion" (or "fail": "transport"|"empty").
class MockBackend : public Backend {
public:
    struct Entry {
        std::string prompt_hash; // hex64 of the prompt bytes
        std::string contains;
        bool is_default = false;
        std::string completion;
        std::string fail; // "", "transport" or "empty"
    };

    enum class Mode { Scripted, RandomVerdict, Constant };

    static std::unique_ptr<MockBackend> scripted(std::vector<Entry> entries);
    static std::unique_ptr<MockBackend> from_script_file(const std::filesystem::path& path);
    /// Answers "YES"/"NO" with probability 1/2, keyed on hash(prompt) ^ seed,
    /// so the transcript is independent of call order.
    static std::unique_ptr<MockBackend> random_verdict(std::uint64_t seed);
    static std::unique_ptr<MockBackend> constant(std::string completion);

    RawCompletion complete(const std::string& prompt, const ModelConfig& cfg) override;
    std::string name() const override { return "mock"; }

private:
    Mode mode_ = Mode::Scripted;
    std::vector<Entry> entries_;
    std::uint64_t seed_ = 0;
    std::string constant_;
};

/// OpenAI-style chat-completion HTTP backend. The API key is read from the
/// environment variable named by ModelConfig::api_key_env; it is never read
/// from files or flags.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(std::string base_url);
    RawCompletion complete(const std::string& prompt, const ModelConfig& cfg) override;
    std::string name() const override { return "http"; }

private:
    std::string base_url_;
};

/// On-disk content-addressed response store. Key covers prompt bytes, model
/// name and sampling parameters.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    static std::string key_for(const std::string& prompt, const ModelConfig& cfg);

    struct CachedResponse {
        std::string text;
        long input_tokens = 0;
        long output_tokens = 0;
    };

    std::optional<CachedResponse> get(const std::string& key);
    void put(const std::string& key, const CachedResponse& value);

private:
    std::filesystem::path dir_;
    std::mutex mu_;
    std::map<std::string, CachedResponse> mem_;
};

/// Token-bucket request limiter (requests per minute); 0 disables it.
class RateLimiter {
public:
    explicit RateLimiter(int requests_per_minute);
    void acquire();

private:
    int rpm_;
    std::mutex mu_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
};

/// Shared client: cache lookup, in-flight deduplication, retry policy, rate
/// limiting and token accounting around a Backend. Safe to call from many
/// workers at once.
class ModelClient {
public:
    ModelClient(std::shared_ptr<Backend> backend, ModelConfig cfg);

    void set_cache(std::shared_ptr<ResponseCache> cache) { cache_ = std::move(cache); }
    void set_rate_limit(int requests_per_minute);
    void set_token_estimator(std::function<long(std::string_view)> estimator);

    /// Returns the first completion plus usage. Transient failures are
    /// retried per policy; empty completions are retried once and then
    /// surfaced as EmptyCompletionError.
    std::pair<std::string, TokenUsage> complete(const std::string& prompt);

    const ModelConfig& config() const { return cfg_; }
    long live_calls() const { return live_calls_; }

private:
    std::shared_ptr<Backend> backend_;
    ModelConfig cfg_;
    std::shared_ptr<ResponseCache> cache_;
    std::unique_ptr<RateLimiter> limiter_;
    std::function<long(std::string_view)> estimator_;

    std::mutex inflight_mu_;
    std::condition_variable inflight_cv_;
    std::map<std::string, int> inflight_;
    std::atomic<long> live_calls_{0};
};

} // namespace rulehound
