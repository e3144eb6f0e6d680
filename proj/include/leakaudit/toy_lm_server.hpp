#pragma once

#include <memory>
#include <string>

#include "leakaudit/toy_lm.hpp"

namespace leakaudit::toylm {

// Serves a trained model over the gateway HTTP protocol. Tokens are
// single-byte strings (bytes >= 0x80 are carried as code points U+0080..FF,
// see encoding.hpp); sampling the BOS symbol ends a completion with
// finish_reason "stop". BOS is prepended implicitly, so an empty prompt is
// begin-of-sequence prompting.
class ToyLmServer {
public:
    // port 0 binds an ephemeral port. Throws on bind failure. The server is
    // running once the constructor returns.
    ToyLmServer(NGramModel model, const std::string& host = "127.0.0.1", int port = 0);
    ~ToyLmServer();

    ToyLmServer(const ToyLmServer&) = delete;
    ToyLmServer& operator=(const ToyLmServer&) = delete;

    int port() const;
    std::string url() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace leakaudit::toylm
