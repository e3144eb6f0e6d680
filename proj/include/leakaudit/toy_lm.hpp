#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "leakaudit/rng.hpp"

namespace leakaudit::toylm {

// Symbols are bytes 0..255 plus a begin-of-sequence marker.
using Symbol = uint16_t;
inline constexpr Symbol kBos = 256;
inline constexpr int kVocabSize = 257;

struct LoadedModel;

// Byte-level fixed-order n-gram model with add-alpha smoothing. Contexts are
// exactly order-1 symbols, BOS-padded at the start of every document; there
// is no backoff. The model memorizes its corpus verbatim: a long-enough
// unique string is regenerated exactly by greedy sampling from its context.
class NGramModel {
public:
    struct ContextCounts {
        uint64_t total = 0;
        std::vector<std::pair<Symbol, uint32_t>> by_symbol; // sorted by symbol
    };
    using CountMap = std::unordered_map<std::string, ContextCounts>;

    // Exact sliding-window byte n-gram counts over every document.
    // Retraining on an edited corpus is the exact-unlearning path: there is
    // no state besides these counts.
    static NGramModel train(const std::vector<std::string>& documents, int order = 8,
                            double alpha = 0.1);

    // ln p(next | context) = ln((count + alpha) / (total + alpha * 257)).
    // The context may be any length; only the last order-1 symbols are used,
    // left-padded with BOS when shorter. Unseen contexts give ln(1/257).
    double logprob(std::span<const Symbol> context, Symbol next) const;

    // Draws from the top_k most probable symbols (ties broken by ascending
    // symbol value) after temperature scaling p^(1/T) renormalized within the
    // top-k set. T = 0 and k = 1 both degenerate to argmax.
    Symbol sample_next(std::span<const Symbol> context, int top_k, double temperature,
                       Xoshiro256ss& rng) const;

    int order() const { return order_; }
    double alpha() const { return alpha_; }
    const CountMap& counts() const { return counts_; }

    bool operator==(const NGramModel& other) const;

    // Checkpoint file: a versioned little-endian binary dump of the sorted
    // count table, carrying the digest of the corpus it was trained on.
    void save(const std::string& path, const std::string& corpus_digest) const;
    static LoadedModel load(const std::string& path);

    // Digest of the canonical serialized form (without the corpus digest);
    // identifies the model content. model_id() is the short form used on the
    // wire.
    std::string canonical_digest() const;
    std::string model_id() const;

    // Context key for the count map: last order-1 symbols of `context`,
    // BOS-padded on the left, two little-endian bytes per symbol.
    std::string context_key(std::span<const Symbol> context) const;

private:
    std::string serialize_counts() const;

    int order_ = 8;
    double alpha_ = 0.1;
    CountMap counts_;
};

struct LoadedModel {
    NGramModel model;
    std::string corpus_digest;
};

// Convenience: bytes of a string as model symbols.
std::vector<Symbol> to_symbols(std::string_view bytes);

} // namespace leakaudit::toylm
