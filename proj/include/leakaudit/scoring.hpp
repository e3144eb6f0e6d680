#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace leakaudit {

class GatewayClient;
struct Sample;

// Leakage-suspicion metrics for one sample. A record is `complete` unless
// scoring failed for that sample (gateway error, empty text); incomplete
// records carry the error and sort last under every ranking metric.
struct ScoreRecord {
    std::string sample_id;
    double ppl_target = 0.0; // exp(mean NLL) of the sample's own logprobs, >= 1
    std::optional<double> ppl_reference;
    uint64_t zlib_bytes = 0;
    // zlib_bytes / ln(ppl_target); +infinity when ppl_target <= 1 + 1e-12 so
    // near-certain samples rank first under the ratio metric.
    double ratio_zlib_logppl = 0.0;
    std::optional<double> ratio_ref_target; // ppl_reference / ppl_target
    bool complete = true;
    std::string error;

    nlohmann::json to_json() const;
    static ScoreRecord from_json(const nlohmann::json& j);
};

enum class RankMetric {
    kPplTargetAsc,
    kPplReferenceAsc,
    kZlibRatioDesc,
    kRefTargetRatioDesc,
};

RankMetric rank_metric_from_string(const std::string& s);
const char* to_string(RankMetric m);

// exp(-(1/T) * sum of logprobs). Entries must be finite and <= 0; the result
// is always >= 1.
double perplexity(std::span<const double> token_logprobs);

// Byte length of the zlib-container DEFLATE stream (RFC 1950) at compression
// level 6. Reports record the compressor identity via compressor_version().
uint64_t zlib_entropy(std::string_view text);
std::string compressor_version();

// The ratio metric, computed from the mean negative log-likelihood so that
// exact spot values (e.g. mean NLL 2, 100 bytes -> 50.0) hold exactly.
double zlib_logppl_ratio(uint64_t zlib_bytes, double mean_nll);

// One record per sample. ppl_target comes from the sample's stored logprobs;
// ppl_reference is obtained by score() against `reference` when given.
// Per-sample failures mark that record incomplete instead of aborting.
std::vector<ScoreRecord> score_samples(const std::vector<Sample>& samples,
                                       const GatewayClient* reference = nullptr, int workers = 8);

// Stable total order under the metric; ties broken by ascending sample_id;
// incomplete records last. Throws when a complete record lacks the metric's
// field.
std::vector<std::string> rank(const std::vector<ScoreRecord>& records, RankMetric metric);

void write_scores_jsonl(const std::string& path, const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> read_scores_jsonl(const std::string& path);

// CSV rows (sample_id, ppl_target, zlib_bytes, label) for external scatter
// plotting. `labels` maps sample_id -> label; unlabeled samples get "".
std::string scores_to_scatter_csv(const std::vector<ScoreRecord>& records,
                                  const std::vector<std::pair<std::string, std::string>>& labels);

} // namespace leakaudit
