#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leakaudit/rng.hpp"

namespace leakaudit {

enum class PromptStrategy { kBos, kRandomWindow };

const char* to_string(PromptStrategy s);
PromptStrategy prompt_strategy_from_string(const std::string& s);

struct CampaignConfig {
    int n_samples = 2000;
    int sample_len_tokens = 256;
    int top_k = 40;
    double temperature = 1.0;
    PromptStrategy strategy = PromptStrategy::kBos;
    std::string prompt_corpus_path; // required for RANDOM_WINDOW
    int window_tokens = 10;
    uint64_t seed = 0;
    std::string target_endpoint;
    int workers = 8;

    void validate() const;
    nlohmann::json to_json() const;
    static CampaignConfig from_json(const nlohmann::json& j);

    // Digest over the sampling-relevant fields only: the endpoint and worker
    // count are deployment details and do not change what gets generated.
    std::string semantic_digest() const;
    std::string campaign_id() const;

    // Per-sample seed, as recorded in the manifest: splitmix64 derived from
    // (campaign seed, sample index).
    uint64_t sample_seed(uint64_t index) const { return derive_seed(seed, index); }
    // Seed of the prompt-selection stream (tag chosen outside any plausible
    // sample index range).
    uint64_t prompt_stream_seed() const { return derive_seed(seed, 0xFFFFFFFF00000000ull); }
};

struct Sample {
    std::string sample_id;
    std::string strategy;
    std::string prompt;
    std::string text; // generated continuation only; equals concat(tokens)
    std::vector<std::string> tokens;
    std::vector<double> logprobs;
    std::optional<std::string> duplicate_of; // earlier sample with identical text

    nlohmann::json to_json() const;
    static Sample from_json(const nlohmann::json& j);
};

struct CampaignManifest {
    std::string campaign_id;
    std::string config_digest;
    nlohmann::json config; // full echo, including endpoint and workers
    std::string model_id;
    std::optional<bool> server_deterministic;
    std::string started_at;  // timestamps live only here
    std::string finished_at;
    bool incomplete = false;
    std::string error;
    size_t n_samples_written = 0;

    nlohmann::json to_json() const;
};

struct CampaignResult {
    std::vector<Sample> samples;
    CampaignManifest manifest;
};

// Builds the prompt list. BOS: n empty prompts. RANDOM_WINDOW: uniformly
// chosen aligned windows of window_tokens consecutive whitespace-delimited
// words, joined by single spaces, drawn from `rng`.
std::vector<std::string> make_prompts(const CampaignConfig& config,
                                      const std::string& prompt_corpus, Xoshiro256ss& rng);

// Runs the full campaign against config.target_endpoint. A fatal gateway
// error aborts generation; completed samples are still returned with the
// manifest marked incomplete.
CampaignResult run_campaign(const CampaignConfig& config);

void write_samples_jsonl(const std::string& path, const std::vector<Sample>& samples);
std::vector<Sample> read_samples_jsonl(const std::string& path);

} // namespace leakaudit
