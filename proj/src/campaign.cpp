#include "leakaudit/campaign.hpp"

#include <atomic>
#include <cctype>
#include <cstdio>
#include <mutex>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "leakaudit/digest.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/gateway.hpp"
#include "leakaudit/io.hpp"

namespace leakaudit {

using nlohmann::json;

const char* to_string(PromptStrategy s) {
    return s == PromptStrategy::kBos ? "BOS" : "RANDOM_WINDOW";
}

PromptStrategy prompt_strategy_from_string(const std::string& s) {
    if (s == "BOS") return PromptStrategy::kBos;
    if (s == "RANDOM_WINDOW") return PromptStrategy::kRandomWindow;
    throw UsageError("unknown prompt strategy: " + s);
}

void CampaignConfig::validate() const {
    if (n_samples < 1) throw UsageError("n_samples must be >= 1");
    if (sample_len_tokens < 1) throw UsageError("sample_len_tokens must be >= 1");
    if (top_k < 1) throw UsageError("top_k must be >= 1");
    if (!(temperature >= 0.0)) throw UsageError("temperature must be >= 0");
    if (window_tokens < 1) throw UsageError("window_tokens must be >= 1");
    if (strategy == PromptStrategy::kRandomWindow && prompt_corpus_path.empty()) {
        throw UsageError("RANDOM_WINDOW strategy requires prompt_corpus_path");
    }
    if (target_endpoint.empty()) throw UsageError("target_endpoint must be set");
}

json CampaignConfig::to_json() const {
    return {
        {"schema", "campaign_config/v1"},
        {"n_samples", n_samples},
        {"sample_len_tokens", sample_len_tokens},
        {"top_k", top_k},
        {"temperature", temperature},
        {"strategy", to_string(strategy)},
        {"prompt_corpus_path", prompt_corpus_path},
        {"window_tokens", window_tokens},
        {"seed", seed},
        {"target_endpoint", target_endpoint},
        {"workers", workers},
    };
}

CampaignConfig CampaignConfig::from_json(const json& j) {
    CampaignConfig c;
    c.n_samples = j.value("n_samples", c.n_samples);
    c.sample_len_tokens = j.value("sample_len_tokens", c.sample_len_tokens);
    c.top_k = j.value("top_k", c.top_k);
    c.temperature = j.value("temperature", c.temperature);
    if (j.contains("strategy")) c.strategy = prompt_strategy_from_string(j.at("strategy"));
    c.prompt_corpus_path = j.value("prompt_corpus_path", c.prompt_corpus_path);
    c.window_tokens = j.value("window_tokens", c.window_tokens);
    c.seed = j.value("seed", c.seed);
    c.target_endpoint = j.value("target_endpoint", c.target_endpoint);
    c.workers = j.value("workers", c.workers);
    return c;
}

std::string CampaignConfig::semantic_digest() const {
    // prompt_corpus_path identifies intent; the prompt corpus content digest
    // is recorded separately in run manifests.
    const json j = {
        {"n_samples", n_samples},
        {"sample_len_tokens", sample_len_tokens},
        {"top_k", top_k},
        {"temperature", temperature},
        {"strategy", to_string(strategy)},
        {"window_tokens", window_tokens},
        {"seed", seed},
    };
    return sha256_hex(j.dump());
}

std::string CampaignConfig::campaign_id() const {
    return "c" + semantic_digest().substr(0, 12);
}

json Sample::to_json() const {
    json j = {
        {"schema", "sample/v1"},
        {"sample_id", sample_id},
        {"strategy", strategy},
        {"prompt", prompt},
        {"text", text},
        {"tokens", tokens},
        {"logprobs", logprobs},
    };
    if (duplicate_of) j["duplicate_of"] = *duplicate_of;
    return j;
}

Sample Sample::from_json(const json& j) {
    Sample s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.strategy = j.value("strategy", std::string{});
    s.prompt = j.value("prompt", std::string{});
    s.text = j.at("text").get<std::string>();
    s.tokens = j.value("tokens", std::vector<std::string>{});
    s.logprobs = j.value("logprobs", std::vector<double>{});
    if (j.contains("duplicate_of")) s.duplicate_of = j.at("duplicate_of").get<std::string>();
    return s;
}

json CampaignManifest::to_json() const {
    json j = {
        {"schema", "campaign_manifest/v1"},
        {"campaign_id", campaign_id},
        {"config_digest", config_digest},
        {"config", config},
        {"model_id", model_id},
        {"started_at", started_at},
        {"finished_at", finished_at},
        {"incomplete", incomplete},
        {"n_samples_written", n_samples_written},
    };
    if (server_deterministic) j["server_deterministic"] = *server_deterministic;
    if (!error.empty()) j["error"] = error;
    return j;
}

namespace {

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) words.push_back(text.substr(start, i - start));
    }
    return words;
}

std::string sample_id_for(const std::string& campaign_id, size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06zu", index);
    return campaign_id + "-" + buf;
}

} // namespace

std::vector<std::string> make_prompts(const CampaignConfig& config,
                                      const std::string& prompt_corpus, Xoshiro256ss& rng) {
    if (config.strategy == PromptStrategy::kBos) {
        return std::vector<std::string>(static_cast<size_t>(config.n_samples));
    }
    const auto words = split_words(prompt_corpus);
    const size_t w = static_cast<size_t>(config.window_tokens);
    if (words.size() < w) {
        throw Error("prompt corpus has " + std::to_string(words.size()) +
                    " words, fewer than window_tokens=" + std::to_string(w));
    }
    const size_t n_windows = words.size() - w + 1;
    std::vector<std::string> prompts;
    prompts.reserve(static_cast<size_t>(config.n_samples));
    for (int i = 0; i < config.n_samples; ++i) {
        const size_t start = rng.bounded(n_windows);
        std::string prompt = words[start];
        for (size_t k = 1; k < w; ++k) {
            prompt += ' ';
            prompt += words[start + k];
        }
        prompts.push_back(std::move(prompt));
    }
    return prompts;
}

CampaignResult run_campaign(const CampaignConfig& config) {
    config.validate();

    std::string prompt_corpus;
    if (config.strategy == PromptStrategy::kRandomWindow) {
        prompt_corpus = read_file(config.prompt_corpus_path);
    }
    Xoshiro256ss prompt_rng(config.prompt_stream_seed());
    const auto prompts = make_prompts(config, prompt_corpus, prompt_rng);

    CampaignResult result;
    result.manifest.campaign_id = config.campaign_id();
    result.manifest.config_digest = config.semantic_digest();
    result.manifest.config = config.to_json();
    result.manifest.started_at = iso8601_utc_now();

    const GatewayClient client(config.target_endpoint);
    const std::string campaign_id = config.campaign_id();
    const size_t n = static_cast<size_t>(config.n_samples);

    std::vector<std::optional<Sample>> slots(n);
    std::mutex meta_mu;
    std::string first_error;
    std::string model_id;
    std::optional<bool> deterministic;

    try {
        parallel_indexed(n, config.workers, [&](size_t i) {
            CompletionRequest req;
            req.prompt = prompts[i];
            req.max_tokens = config.sample_len_tokens;
            req.top_k = config.top_k;
            req.temperature = config.temperature;
            req.seed = config.sample_seed(i);
            Completion completion = client.complete(req);

            Sample s;
            s.sample_id = sample_id_for(campaign_id, i);
            s.strategy = to_string(config.strategy);
            s.prompt = prompts[i];
            s.tokens = std::move(completion.tokens);
            s.logprobs = std::move(completion.logprobs);
            for (const auto& t : s.tokens) s.text += t;

            std::lock_guard<std::mutex> lock(meta_mu);
            if (model_id.empty()) model_id = completion.model_id;
            if (!deterministic && completion.deterministic) deterministic = completion.deterministic;
            slots[i] = std::move(s);
        });
    } catch (const Error& e) {
        first_error = e.what();
    }

    for (auto& slot : slots) {
        if (slot) result.samples.push_back(std::move(*slot));
    }

    // Exact-duplicate texts, first occurrence wins.
    std::unordered_map<std::string, std::string> first_seen;
    for (auto& s : result.samples) {
        auto [it, inserted] = first_seen.emplace(s.text, s.sample_id);
        if (!inserted) s.duplicate_of = it->second;
    }

    result.manifest.model_id = model_id;
    result.manifest.server_deterministic = deterministic;
    result.manifest.finished_at = iso8601_utc_now();
    result.manifest.incomplete = !first_error.empty();
    result.manifest.error = first_error;
    result.manifest.n_samples_written = result.samples.size();
    return result;
}

void write_samples_jsonl(const std::string& path, const std::vector<Sample>& samples) {
    std::vector<json> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) rows.push_back(s.to_json());
    write_jsonl(path, rows);
}

std::vector<Sample> read_samples_jsonl(const std::string& path) {
    std::vector<Sample> out;
    for (const auto& row : read_jsonl(path)) out.push_back(Sample::from_json(row));
    return out;
}

} // namespace leakaudit
