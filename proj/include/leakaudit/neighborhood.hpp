#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "leakaudit/secrets.hpp"

namespace leakaudit {

// Embeds secret strings so "neighborhood" questions (are newly-leaking
// secrets near the initially extracted ones?) can be asked without an
// external model. Two providers: a word-vector table (one token then D
// floats per line, GloVe-style) and a self-contained character n-gram
// feature hash.
struct EmbeddingProvider {
    enum class Source { kWordVectorTable, kCharNgramHash };

    Source source = Source::kCharNgramHash;
    int dimension = 64;
    int ngram = 3;                                          // hash provider
    std::unordered_map<std::string, Eigen::VectorXd> table; // table provider

    static EmbeddingProvider char_ngram_hash(int n = 3, int dim = 64);
    static EmbeddingProvider word_vector_table(const std::string& path);
};

struct SecretEmbedding {
    std::string secret_id;
    Eigen::VectorXd vector;
    double coverage = 1.0; // fraction of sub-tokens found in the table

    nlohmann::json to_json() const;
};

// Tokenizes the secret on [._-@+] and digits; table provider averages the
// found token vectors (zero vector, coverage 0 when none found), hash
// provider sums hashed char n-gram one-hots and L2-normalizes.
SecretEmbedding embed_secret(const SecretRecord& secret, const EmbeddingProvider& provider);

struct NeighborhoodReport {
    double onion_to_extracted_nn = 0.0; // mean NN distance, normalized vectors
    double safe_to_extracted_nn = 0.0;
    double proximity_ratio = 0.0;       // < 1 means onion points sit closer

    nlohmann::json to_json() const;
};

NeighborhoodReport neighborhood_stats(const std::vector<SecretEmbedding>& extracted,
                                      const std::vector<SecretEmbedding>& onion,
                                      const std::vector<SecretEmbedding>& safe_sample);

struct Projection2d {
    std::vector<Eigen::Vector2d> points;
    bool degenerate = false; // zero-variance input, all points at the origin
};

// Projection onto the top two principal components of the centered set, with
// a deterministic sign convention (largest-magnitude coordinate of each
// component made positive).
Projection2d project_2d(const std::vector<Eigen::VectorXd>& embeddings);

} // namespace leakaudit
