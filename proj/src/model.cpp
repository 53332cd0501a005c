#include "rulehound/model.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "rulehound/errors.hpp"
#include "rulehound/hash.hpp"

namespace rulehound {

void ModelConfig::validate() const {
    if (temperature < 0.0 || temperature > 2.0)
        throw ConfigError("temperature out of range [0,2]");
    if (top_p < 0.0 || top_p > 1.0) throw ConfigError("top_p out of range [0,1]");
    if (n != 1) throw ConfigError("the pipeline assumes a single completion (n=1)");
    if (max_output_tokens <= 0) throw ConfigError("max_output_tokens must be positive");
}

PriceTable load_price_table(const std::filesystem::path& path) {
    PriceTable table;
    const Json j = Json::parse(read_text_file(path));
    for (const auto& [model, entry] : j.items()) {
        PriceEntry p;
        p.input_per_1k = entry.at("input_per_1k").get<double>();
        p.output_per_1k = entry.at("output_per_1k").get<double>();
        if (p.input_per_1k < 0 || p.output_per_1k < 0)
            throw ConfigError("negative price for model " + model);
        table.prices[model] = p;
    }
    return table;
}

long count_tokens(std::string_view text) {
    return static_cast<long>((text.size() + 3) / 4);
}

double estimate_cost(const TokenUsage& usage, const std::string& model,
                     const PriceTable& prices) {
    auto it = prices.prices.find(model);
    if (it == prices.prices.end()) throw ConfigError("unknown model in price table: " + model);
    return static_cast<double>(usage.billed_input()) / 1000.0 * it->second.input_per_1k +
           static_cast<double>(usage.billed_output()) / 1000.0 * it->second.output_per_1k;
}

// ---------------------------------------------------------------------------
// MockBackend

std::unique_ptr<MockBackend> MockBackend::scripted(std::vector<Entry> entries) {
    auto b = std::make_unique<MockBackend>();
    b->mode_ = Mode::Scripted;
    b->entries_ = std::move(entries);
    return b;
}

std::unique_ptr<MockBackend> MockBackend::from_script_file(const std::filesystem::path& path) {
    std::vector<Entry> entries;
    for (const auto& j : jsonl::read_file(path)) {
        Entry e;
        e.prompt_hash = j.value("prompt_hash", "");
        e.contains = j.value("contains", "");
        e.is_default = j.value("default", false);
        e.completion = j.value("completion", "");
        e.fail = j.value("fail", "");
        entries.push_back(std::move(e));
    }
    return scripted(std::move(entries));
}

std::unique_ptr<MockBackend> MockBackend::random_verdict(std::uint64_t seed) {
    auto b = std::make_unique<MockBackend>();
    b->mode_ = Mode::RandomVerdict;
    b->seed_ = seed;
    return b;
}

std::unique_ptr<MockBackend> MockBackend::constant(std::string completion) {
    auto b = std::make_unique<MockBackend>();
    b->mode_ = Mode::Constant;
    b->constant_ = std::move(completion);
    return b;
}

RawCompletion MockBackend::complete(const std::string& prompt, const ModelConfig&) {
    switch (mode_) {
    case Mode::Constant:
        return {constant_, std::nullopt, std::nullopt};
    case Mode::RandomVerdict: {
        const std::uint64_t h = mix64(fnv1a64(prompt) ^ seed_);
        return {(h & 1) ? "YES" : "NO", std::nullopt, std::nullopt};
    }
    case Mode::Scripted: {
        const std::string h = content_id(prompt);
        for (const auto& e : entries_) {
            bool matches = false;
            if (!e.prompt_hash.empty())
                matches = e.prompt_hash == h;
            else if (!e.contains.empty())
                matches = prompt.find(e.contains) != std::string::npos;
            else if (e.is_default)
                matches = true;
            if (!matches) continue;
            if (e.fail == "transport") throw TransportError("scripted transport failure");
            if (e.fail == "empty") throw EmptyCompletionError("scripted empty completion");
            return {e.completion, std::nullopt, std::nullopt};
        }
        throw TransportError("mock backend has no script entry for prompt " + h);
    }
    }
    throw TransportError("unreachable");
}

// ---------------------------------------------------------------------------
// HttpBackend

HttpBackend::HttpBackend(std::string base_url) : base_url_(std::move(base_url)) {}

RawCompletion HttpBackend::complete(const std::string& prompt, const ModelConfig& cfg) {
    const char* key = nullptr;
    if (!cfg.api_key_env.empty()) key = std::getenv(cfg.api_key_env.c_str());

    Json body;
    body["model"] = cfg.model;
    body["temperature"] = cfg.temperature;
    body["top_p"] = cfg.top_p;
    body["n"] = cfg.n;
    body["max_tokens"] = cfg.max_output_tokens;
    body["messages"] = Json::array({Json{{"role", "user"}, {"content", prompt}}});

    httplib::Client client(base_url_);
    client.set_read_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
    client.set_connection_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (key != nullptr) headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post("/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransportError("backend returned status " + std::to_string(res->status));
    if (res->status != 200)
        throw ConfigError("backend rejected request with status " + std::to_string(res->status) +
                          ": " + res->body);

    Json j;
    try {
        j = Json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw TransportError(std::string("unparseable backend response: ") + e.what());
    }
    RawCompletion out;
    if (j.contains("choices") && !j["choices"].empty()) {
        const auto& choice = j["choices"][0];
        if (choice.contains("message") && choice["message"].contains("content") &&
            !choice["message"]["content"].is_null())
            out.text = choice["message"]["content"].get<std::string>();
    }
    if (j.contains("usage")) {
        const auto& u = j["usage"];
        if (u.contains("prompt_tokens")) out.input_tokens = u["prompt_tokens"].get<long>();
        if (u.contains("completion_tokens"))
            out.output_tokens = u["completion_tokens"].get<long>();
    }
    if (out.text.empty()) throw EmptyCompletionError("backend returned no completion text");
    return out;
}

// ---------------------------------------------------------------------------
// ResponseCache

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string ResponseCache::key_for(const std::string& prompt, const ModelConfig& cfg) {
    char params[128];
    std::snprintf(params, sizeof(params), "|%s|%.6g|%.6g|%ld", cfg.model.c_str(),
                  cfg.temperature, cfg.top_p, cfg.max_output_tokens);
    return hex64(fnv1a64(params, fnv1a64(prompt)));
}

std::optional<ResponseCache::CachedResponse> ResponseCache::get(const std::string& key) {
    {
        std::lock_guard lock(mu_);
        auto it = mem_.find(key);
        if (it != mem_.end()) return it->second;
    }
    const auto path = dir_ / (key + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    const Json j = Json::parse(read_text_file(path));
    CachedResponse r;
    r.text = j.at("completion").get<std::string>();
    r.input_tokens = j.at("input_tokens").get<long>();
    r.output_tokens = j.at("output_tokens").get<long>();
    {
        std::lock_guard lock(mu_);
        mem_[key] = r;
    }
    return r;
}

void ResponseCache::put(const std::string& key, const CachedResponse& value) {
    {
        std::lock_guard lock(mu_);
        mem_[key] = value;
    }
    Json j;
    j["completion"] = value.text;
    j["input_tokens"] = value.input_tokens;
    j["output_tokens"] = value.output_tokens;
    write_text_file(dir_ / (key + ".json"), j.dump());
}

// ---------------------------------------------------------------------------
// RateLimiter

RateLimiter::RateLimiter(int requests_per_minute)
    : rpm_(requests_per_minute),
      tokens_(requests_per_minute > 0 ? requests_per_minute : 0),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    if (rpm_ <= 0) return;
    std::unique_lock lock(mu_);
    for (;;) {
        const auto now = std::chrono::steady_clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        tokens_ = std::min<double>(rpm_, tokens_ + elapsed * rpm_ / 60.0);
        last_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        const double wait_s = (1.0 - tokens_) * 60.0 / rpm_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
        lock.lock();
    }
}

// ---------------------------------------------------------------------------
// ModelClient

ModelClient::ModelClient(std::shared_ptr<Backend> backend, ModelConfig cfg)
    : backend_(std::move(backend)), cfg_(std::move(cfg)), estimator_(count_tokens) {
    cfg_.validate();
}

void ModelClient::set_rate_limit(int requests_per_minute) {
    limiter_ = requests_per_minute > 0 ? std::make_unique<RateLimiter>(requests_per_minute)
                                       : nullptr;
}

void ModelClient::set_token_estimator(std::function<long(std::string_view)> estimator) {
    estimator_ = std::move(estimator);
}

std::pair<std::string, TokenUsage> ModelClient::complete(const std::string& prompt) {
    if (prompt.empty()) throw ConfigError("empty prompt");
    if (estimator_(prompt) > cfg_.context_limit_tokens)
        throw ConfigError("prompt exceeds estimated context limit");

    const std::string key = ResponseCache::key_for(prompt, cfg_);

    if (cache_) {
        // Only one live call per key: wait for an identical in-flight request
        // instead of issuing a second one.
        std::unique_lock lock(inflight_mu_);
        for (;;) {
            if (auto hit = cache_->get(key)) {
                TokenUsage usage{hit->input_tokens, hit->output_tokens, true};
                return {hit->text, usage};
            }
            if (inflight_.count(key) == 0) {
                inflight_[key] = 1;
                break;
            }
            inflight_cv_.wait(lock);
        }
    }

    auto release_inflight = [&]() {
        if (!cache_) return;
        std::lock_guard lock(inflight_mu_);
        inflight_.erase(key);
        inflight_cv_.notify_all();
    };

    try {
        RawCompletion raw;
        int empty_retries = 0;
        for (int attempt = 0;; ++attempt) {
            try {
                if (limiter_) limiter_->acquire();
                ++live_calls_;
                raw = backend_->complete(prompt, cfg_);
                break;
            } catch (const TransportError&) {
                if (attempt >= cfg_.retry_count) throw;
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(cfg_.retry_backoff_ms * (attempt + 1)));
            } catch (const EmptyCompletionError&) {
                // one retry with the identical prompt, then surface upstream
                if (empty_retries >= 1) throw;
                ++empty_retries;
            }
        }
        TokenUsage usage;
        usage.input_tokens = raw.input_tokens.value_or(estimator_(prompt));
        usage.output_tokens = raw.output_tokens.value_or(estimator_(raw.text));
        usage.cached = false;
        if (cache_) cache_->put(key, {raw.text, usage.input_tokens, usage.output_tokens});
        release_inflight();
        return {raw.text, usage};
    } catch (...) {
        release_inflight();
        throw;
    }
}

} // namespace rulehound
