#include "leakaudit/toy_lm_server.hpp"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "leakaudit/encoding.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/gateway.hpp"
#include "leakaudit/rng.hpp"

namespace leakaudit::toylm {

using nlohmann::json;

namespace {

void bad_request(httplib::Response& res, const std::string& message) {
    res.status = 400;
    res.set_content(json{{"error", message}}.dump(), "application/json");
}

std::string byte_token(Symbol s) {
    const char b = static_cast<char>(static_cast<unsigned char>(s));
    return bytes_to_text(std::string_view(&b, 1));
}

} // namespace

struct ToyLmServer::Impl {
    NGramModel model;
    std::string model_id;
    std::string host;
    int port = 0;
    httplib::Server server;
    std::thread thread;

    void handle_complete(const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::parse_error& e) {
            return bad_request(res, std::string("invalid JSON: ") + e.what());
        }
        if (!body.contains("prompt") || !body["prompt"].is_string()) {
            return bad_request(res, "missing string field 'prompt'");
        }
        if (!body.contains("max_tokens") || !body["max_tokens"].is_number_integer() ||
            body["max_tokens"].get<int64_t>() < 1) {
            return bad_request(res, "'max_tokens' must be a positive integer");
        }
        if (!body.contains("top_k") || !body["top_k"].is_number_integer() ||
            body["top_k"].get<int64_t>() < 1) {
            return bad_request(res, "'top_k' must be a positive integer");
        }
        double temperature = 1.0;
        if (body.contains("temperature")) {
            if (!body["temperature"].is_number() || body["temperature"].get<double>() < 0.0) {
                return bad_request(res, "'temperature' must be a non-negative number");
            }
            temperature = body["temperature"].get<double>();
        }
        uint64_t seed = 0;
        if (body.contains("seed")) {
            if (!body["seed"].is_number_unsigned() && !body["seed"].is_number_integer()) {
                return bad_request(res, "'seed' must be an integer");
            }
            seed = body["seed"].get<uint64_t>();
        }
        const auto prompt_bytes = text_to_bytes(body["prompt"].get<std::string>());
        if (!prompt_bytes) {
            return bad_request(res, "prompt contains code points above U+00FF; this server is byte-level");
        }
        const int max_tokens = static_cast<int>(body["max_tokens"].get<int64_t>());
        const int top_k = static_cast<int>(body["top_k"].get<int64_t>());

        std::vector<Symbol> ctx;
        ctx.reserve(static_cast<size_t>(model.order()));
        ctx.push_back(kBos);
        for (unsigned char b : *prompt_bytes) ctx.push_back(b);

        Xoshiro256ss rng(seed);
        json tokens = json::array();
        json logprobs = json::array();
        std::string finish = "length";
        for (int t = 0; t < max_tokens; ++t) {
            const Symbol s = model.sample_next(ctx, top_k, temperature, rng);
            if (s == kBos) {
                finish = "stop";
                break;
            }
            tokens.push_back(byte_token(s));
            logprobs.push_back(model.logprob(ctx, s));
            ctx.push_back(s);
            if (ctx.size() > static_cast<size_t>(model.order())) {
                ctx.erase(ctx.begin());
            }
        }
        const json out = {
            {"model_id", model_id},   {"tokens", tokens},           {"logprobs", logprobs},
            {"finish_reason", finish}, {"deterministic", true},
        };
        res.set_content(out.dump(), "application/json");
    }

    void handle_score(const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::parse_error& e) {
            return bad_request(res, std::string("invalid JSON: ") + e.what());
        }
        if (!body.contains("text") || !body["text"].is_string()) {
            return bad_request(res, "missing string field 'text'");
        }
        const std::string text = body["text"].get<std::string>();
        if (text.empty()) return bad_request(res, "'text' must be non-empty");
        const auto bytes = text_to_bytes(text);
        if (!bytes) {
            return bad_request(res, "text contains code points above U+00FF; this server is byte-level");
        }

        std::vector<Symbol> ctx;
        ctx.reserve(static_cast<size_t>(model.order()));
        ctx.push_back(kBos);
        json tokens = json::array();
        json logprobs = json::array();
        for (unsigned char b : *bytes) {
            tokens.push_back(byte_token(b));
            logprobs.push_back(model.logprob(ctx, b));
            ctx.push_back(b);
            if (ctx.size() > static_cast<size_t>(model.order())) {
                ctx.erase(ctx.begin());
            }
        }
        const json out = {{"model_id", model_id}, {"tokens", tokens}, {"logprobs", logprobs}};
        res.set_content(out.dump(), "application/json");
    }
};

ToyLmServer::ToyLmServer(NGramModel model, const std::string& host, int port)
    : impl_(std::make_unique<Impl>()) {
    impl_->model = std::move(model);
    impl_->model_id = impl_->model.model_id();
    impl_->host = host;

    impl_->server.Post("/v1/complete", [impl = impl_.get()](const httplib::Request& req,
                                                            httplib::Response& res) {
        impl->handle_complete(req, res);
    });
    impl_->server.Post("/v1/score", [impl = impl_.get()](const httplib::Request& req,
                                                         httplib::Response& res) {
        impl->handle_score(req, res);
    });
    impl_->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });

    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
        if (impl_->port <= 0) throw Error("toy-lm server: failed to bind " + host);
    } else {
        if (!impl_->server.bind_to_port(host, port)) {
            throw Error("toy-lm server: failed to bind " + host + ":" + std::to_string(port));
        }
        impl_->port = port;
    }
    impl_->thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

ToyLmServer::~ToyLmServer() {
    stop();
}

int ToyLmServer::port() const {
    return impl_->port;
}

std::string ToyLmServer::url() const {
    return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

void ToyLmServer::stop() {
    if (impl_ && impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

} // namespace leakaudit::toylm
