#include "leakaudit/gateway.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "leakaudit/errors.hpp"

namespace leakaudit {

using nlohmann::json;

namespace {

std::string truncate_body(const std::string& body, size_t limit = 512) {
    if (body.size() <= limit) return body;
    return body.substr(0, limit) + "...(truncated)";
}

// Shared response checks: tokens and logprobs must be parallel string/number
// arrays, every logprob finite and <= 0. Anything else is a protocol
// violation, reported with the offending body.
void parse_tokens_logprobs(const json& j, const std::string& body, std::vector<std::string>& tokens,
                           std::vector<double>& logprobs) {
    if (!j.contains("tokens") || !j["tokens"].is_array() || !j.contains("logprobs") ||
        !j["logprobs"].is_array()) {
        throw ProtocolError("missing tokens/logprobs arrays; body: " + truncate_body(body));
    }
    for (const auto& t : j["tokens"]) {
        if (!t.is_string()) throw ProtocolError("non-string token; body: " + truncate_body(body));
        tokens.push_back(t.get<std::string>());
    }
    for (const auto& lp : j["logprobs"]) {
        if (!lp.is_number()) throw ProtocolError("non-numeric logprob; body: " + truncate_body(body));
        const double v = lp.get<double>();
        if (!std::isfinite(v) || v > 0.0) {
            throw ProtocolError("logprob out of range (must be finite and <= 0); body: " +
                                truncate_body(body));
        }
        logprobs.push_back(v);
    }
    if (tokens.size() != logprobs.size()) {
        throw ProtocolError("tokens/logprobs length mismatch; body: " + truncate_body(body));
    }
}

std::string require_model_id(const json& j, const std::string& body) {
    if (!j.contains("model_id") || !j["model_id"].is_string()) {
        throw ProtocolError("missing model_id; body: " + truncate_body(body));
    }
    return j["model_id"].get<std::string>();
}

} // namespace

const char* to_string(FinishReason reason) {
    return reason == FinishReason::kStop ? "stop" : "length";
}

void CompletionRequest::validate() const {
    if (max_tokens < 1) throw UsageError("max_tokens must be >= 1");
    if (top_k < 1) throw UsageError("top_k must be >= 1");
    if (!(temperature >= 0.0)) throw UsageError("temperature must be >= 0");
}

std::string Completion::text() const {
    std::string out;
    for (const auto& t : tokens) out += t;
    return out;
}

GatewayClient::GatewayClient(std::string endpoint, GatewayOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {
    if (endpoint_.empty()) throw UsageError("gateway endpoint must not be empty");
}

std::string GatewayClient::post_json(const std::string& path, const std::string& body) const {
    int backoff_ms = options_.backoff_initial_ms;
    std::string last_transport_error;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Client cli(endpoint_);
        cli.set_connection_timeout(options_.timeout_sec, 0);
        cli.set_read_timeout(options_.timeout_sec, 0);
        cli.set_write_timeout(options_.timeout_sec, 0);
        if (!options_.bearer_token.empty()) {
            cli.set_default_headers({{"Authorization", "Bearer " + options_.bearer_token}});
        }
        auto res = cli.Post(path, body, "application/json");
        if (!res) {
            last_transport_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            std::string message = truncate_body(res->body);
            try {
                const json j = json::parse(res->body);
                if (j.contains("error") && j["error"].is_string()) message = j["error"].get<std::string>();
            } catch (const json::parse_error&) {
                // keep the raw body
            }
            throw ServerError(res->status, message);
        }
        return res->body;
    }
    throw TransportError("transport failure after " + std::to_string(options_.max_retries + 1) +
                         " attempts to " + endpoint_ + path + ": " + last_transport_error);
}

Completion GatewayClient::complete(const CompletionRequest& request) const {
    request.validate();
    const json body = {
        {"prompt", request.prompt},   {"max_tokens", request.max_tokens},
        {"top_k", request.top_k},     {"temperature", request.temperature},
        {"seed", request.seed},
    };
    const std::string raw = post_json("/v1/complete", body.dump());

    json j;
    try {
        j = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("malformed completion response: ") + e.what() +
                            "; body: " + truncate_body(raw));
    }
    Completion out;
    out.model_id = require_model_id(j, raw);
    parse_tokens_logprobs(j, raw, out.tokens, out.logprobs);
    if (out.tokens.size() > static_cast<size_t>(request.max_tokens)) {
        throw ProtocolError("server returned more tokens than max_tokens; body: " + truncate_body(raw));
    }
    if (!j.contains("finish_reason") || !j["finish_reason"].is_string()) {
        throw ProtocolError("missing finish_reason; body: " + truncate_body(raw));
    }
    const std::string reason = j["finish_reason"].get<std::string>();
    if (reason == "length") {
        out.finish_reason = FinishReason::kLength;
    } else if (reason == "stop") {
        out.finish_reason = FinishReason::kStop;
    } else {
        throw ProtocolError("unknown finish_reason '" + reason + "'; body: " + truncate_body(raw));
    }
    if (j.contains("deterministic") && j["deterministic"].is_boolean()) {
        out.deterministic = j["deterministic"].get<bool>();
    }
    return out;
}

TokenScores GatewayClient::score(const std::string& text) const {
    if (text.empty()) throw UsageError("score: text must be non-empty");
    const json body = {{"text", text}};
    const std::string raw = post_json("/v1/score", body.dump());

    json j;
    try {
        j = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("malformed score response: ") + e.what() +
                            "; body: " + truncate_body(raw));
    }
    TokenScores out;
    out.text = text;
    out.model_id = require_model_id(j, raw);
    parse_tokens_logprobs(j, raw, out.tokens, out.token_logprobs);
    if (out.tokens.empty()) {
        throw ProtocolError("empty tokenization for non-empty text; body: " + truncate_body(raw));
    }
    return out;
}

} // namespace leakaudit
