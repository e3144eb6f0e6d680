#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace leakaudit {

// Minimal completion/scoring wire protocol. Any model that speaks it can be
// audited; tokenization is owned entirely by the server.
//
//   POST /v1/complete {"prompt","max_tokens","top_k","temperature","seed"}
//     -> {"model_id","tokens","logprobs","finish_reason"}
//   POST /v1/score    {"text"} -> {"model_id","tokens","logprobs"}
//
// Errors come back as 4xx/5xx with {"error": str}. Servers may add an
// optional boolean "deterministic" field to completions; clients ignore
// fields they do not know.

struct CompletionRequest {
    std::string prompt;        // empty = begin-of-sequence prompting
    int max_tokens = 256;
    int top_k = 40;
    double temperature = 1.0;
    uint64_t seed = 0;

    void validate() const;
};

enum class FinishReason { kLength, kStop };

struct Completion {
    std::vector<std::string> tokens;
    std::vector<double> logprobs; // natural log, one per token, all <= 0
    std::string model_id;
    FinishReason finish_reason = FinishReason::kLength;
    std::optional<bool> deterministic; // server's own claim, when present

    std::string text() const;
};

struct TokenScores {
    std::string text;
    std::vector<std::string> tokens;
    std::vector<double> token_logprobs;
    std::string model_id;
};

struct GatewayOptions {
    int max_retries = 3;          // transport errors only
    int backoff_initial_ms = 100; // doubled after each retry
    int timeout_sec = 30;
    std::string bearer_token;     // optional Authorization: Bearer <token>
};

// Immutable handle; safe to share across worker threads. Each request uses
// an independent connection.
class GatewayClient {
public:
    explicit GatewayClient(std::string endpoint, GatewayOptions options = {});

    Completion complete(const CompletionRequest& request) const;
    TokenScores score(const std::string& text) const;

    const std::string& endpoint() const { return endpoint_; }

private:
    std::string post_json(const std::string& path, const std::string& body) const;

    std::string endpoint_;
    GatewayOptions options_;
};

const char* to_string(FinishReason reason);

} // namespace leakaudit
