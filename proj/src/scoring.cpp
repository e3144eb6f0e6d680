#include "leakaudit/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "leakaudit/campaign.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/gateway.hpp"
#include "leakaudit/io.hpp"

namespace leakaudit {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json encode_ratio(double v) {
    // JSON has no Infinity literal; the sentinel is serialized as "inf".
    if (std::isinf(v)) return json("inf");
    return json(v);
}

double decode_ratio(const json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") return kInf;
    return j.get<double>();
}

double mean_nll(std::span<const double> token_logprobs) {
    if (token_logprobs.empty()) throw Error("perplexity: empty logprob list");
    double sum = 0.0;
    for (double lp : token_logprobs) {
        if (!std::isfinite(lp)) throw Error("perplexity: non-finite logprob");
        if (lp > 0.0) throw Error("perplexity: positive logprob");
        sum += lp;
    }
    return -sum / static_cast<double>(token_logprobs.size());
}

} // namespace

RankMetric rank_metric_from_string(const std::string& s) {
    if (s == "PPL_TARGET_ASC") return RankMetric::kPplTargetAsc;
    if (s == "PPL_REFERENCE_ASC") return RankMetric::kPplReferenceAsc;
    if (s == "ZLIB_RATIO_DESC") return RankMetric::kZlibRatioDesc;
    if (s == "REF_TARGET_RATIO_DESC") return RankMetric::kRefTargetRatioDesc;
    throw UsageError("unknown rank metric: " + s);
}

const char* to_string(RankMetric m) {
    switch (m) {
        case RankMetric::kPplTargetAsc: return "PPL_TARGET_ASC";
        case RankMetric::kPplReferenceAsc: return "PPL_REFERENCE_ASC";
        case RankMetric::kZlibRatioDesc: return "ZLIB_RATIO_DESC";
        case RankMetric::kRefTargetRatioDesc: return "REF_TARGET_RATIO_DESC";
    }
    return "?";
}

double perplexity(std::span<const double> token_logprobs) {
    return std::exp(mean_nll(token_logprobs));
}

uint64_t zlib_entropy(std::string_view text) {
    uLong bound = compressBound(static_cast<uLong>(text.size()));
    std::vector<Bytef> out(bound);
    uLongf out_len = bound;
    const int rc = compress2(out.data(), &out_len, reinterpret_cast<const Bytef*>(text.data()),
                             static_cast<uLong>(text.size()), 6);
    if (rc != Z_OK) throw Error("zlib compress2 failed: " + std::to_string(rc));
    return out_len;
}

std::string compressor_version() {
    return std::string("zlib/") + zlibVersion();
}

double zlib_logppl_ratio(uint64_t zlib_bytes, double nll) {
    if (nll <= 1e-12) return kInf;
    return static_cast<double>(zlib_bytes) / nll;
}

json ScoreRecord::to_json() const {
    json j = {
        {"schema", "score/v1"},
        {"sample_id", sample_id},
        {"complete", complete},
    };
    if (complete) {
        j["ppl_target"] = ppl_target;
        j["zlib_bytes"] = zlib_bytes;
        j["ratio_zlib_logppl"] = encode_ratio(ratio_zlib_logppl);
        if (ppl_reference) j["ppl_reference"] = *ppl_reference;
        if (ratio_ref_target) j["ratio_ref_target"] = *ratio_ref_target;
    }
    if (!error.empty()) j["error"] = error;
    return j;
}

ScoreRecord ScoreRecord::from_json(const json& j) {
    ScoreRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.complete = j.value("complete", true);
    if (r.complete) {
        r.ppl_target = j.at("ppl_target").get<double>();
        r.zlib_bytes = j.at("zlib_bytes").get<uint64_t>();
        r.ratio_zlib_logppl = decode_ratio(j.at("ratio_zlib_logppl"));
        if (j.contains("ppl_reference")) r.ppl_reference = j.at("ppl_reference").get<double>();
        if (j.contains("ratio_ref_target")) r.ratio_ref_target = j.at("ratio_ref_target").get<double>();
    }
    r.error = j.value("error", std::string{});
    return r;
}

std::vector<ScoreRecord> score_samples(const std::vector<Sample>& samples,
                                       const GatewayClient* reference, int workers) {
    std::vector<ScoreRecord> records(samples.size());
    parallel_indexed(samples.size(), workers, [&](size_t i) {
        const Sample& s = samples[i];
        ScoreRecord& r = records[i];
        r.sample_id = s.sample_id;
        try {
            const double nll = mean_nll(s.logprobs);
            r.ppl_target = std::exp(nll);
            r.zlib_bytes = zlib_entropy(s.text);
            // Defined via ppl_target so the sentinel rule matches the record.
            r.ratio_zlib_logppl =
                r.ppl_target <= 1.0 + 1e-12 ? kInf : zlib_logppl_ratio(r.zlib_bytes, nll);
            if (reference != nullptr) {
                const TokenScores ts = reference->score(s.text);
                r.ppl_reference = perplexity(ts.token_logprobs);
                r.ratio_ref_target = *r.ppl_reference / r.ppl_target;
            }
        } catch (const Error& e) {
            r.complete = false;
            r.error = e.what();
        }
    });
    return records;
}

std::vector<std::string> rank(const std::vector<ScoreRecord>& records, RankMetric metric) {
    const bool needs_reference =
        metric == RankMetric::kPplReferenceAsc || metric == RankMetric::kRefTargetRatioDesc;
    for (const auto& r : records) {
        if (r.complete && needs_reference && !r.ppl_reference) {
            throw Error("rank: record " + r.sample_id + " lacks reference perplexity for metric " +
                        to_string(metric));
        }
    }

    auto key = [&](const ScoreRecord& r) -> double {
        switch (metric) {
            case RankMetric::kPplTargetAsc: return r.ppl_target;
            case RankMetric::kPplReferenceAsc: return *r.ppl_reference;
            case RankMetric::kZlibRatioDesc: return -r.ratio_zlib_logppl;
            case RankMetric::kRefTargetRatioDesc: return -*r.ratio_ref_target;
        }
        return 0.0;
    };

    std::vector<const ScoreRecord*> order;
    order.reserve(records.size());
    for (const auto& r : records) order.push_back(&r);
    std::stable_sort(order.begin(), order.end(), [&](const ScoreRecord* a, const ScoreRecord* b) {
        if (a->complete != b->complete) return a->complete; // incomplete last
        if (!a->complete) return a->sample_id < b->sample_id;
        const double ka = key(*a);
        const double kb = key(*b);
        if (ka != kb) return ka < kb;
        return a->sample_id < b->sample_id;
    });

    std::vector<std::string> ids;
    ids.reserve(order.size());
    for (const auto* r : order) ids.push_back(r->sample_id);
    return ids;
}

void write_scores_jsonl(const std::string& path, const std::vector<ScoreRecord>& records) {
    std::vector<json> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(r.to_json());
    write_jsonl(path, rows);
}

std::vector<ScoreRecord> read_scores_jsonl(const std::string& path) {
    std::vector<ScoreRecord> out;
    for (const auto& row : read_jsonl(path)) out.push_back(ScoreRecord::from_json(row));
    return out;
}

std::string scores_to_scatter_csv(const std::vector<ScoreRecord>& records,
                                  const std::vector<std::pair<std::string, std::string>>& labels) {
    std::string csv = "sample_id,ppl_target,zlib_bytes,label\r\n";
    auto label_for = [&](const std::string& id) -> std::string {
        for (const auto& [lid, label] : labels) {
            if (lid == id) return label;
        }
        return "";
    };
    char buf[64];
    for (const auto& r : records) {
        if (!r.complete) continue;
        std::snprintf(buf, sizeof(buf), "%.17g", r.ppl_target);
        csv += r.sample_id;
        csv += ',';
        csv += buf;
        csv += ',';
        csv += std::to_string(r.zlib_bytes);
        csv += ',';
        csv += label_for(r.sample_id);
        csv += "\r\n";
    }
    return csv;
}

} // namespace leakaudit
