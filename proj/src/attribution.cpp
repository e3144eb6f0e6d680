#include "leakaudit/attribution.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "leakaudit/campaign.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/io.hpp"
#include "leakaudit/scoring.hpp"
#include "leakaudit/suffix_index.hpp"

namespace leakaudit {

using nlohmann::json;

const char* to_string(AttributionLabel label) {
    switch (label) {
        case AttributionLabel::kFinetune: return "FINETUNE";
        case AttributionLabel::kPretrainRef: return "PRETRAIN_REF";
        case AttributionLabel::kBoth: return "BOTH";
        case AttributionLabel::kUnknown: return "UNKNOWN";
    }
    return "?";
}

size_t AttributedSample::labeled_bytes(AttributionLabel label) const {
    size_t n = 0;
    for (const auto& span : spans) {
        if (span.label == label) n += span.end - span.begin;
    }
    return n;
}

json AttributedSample::to_json() const {
    json spans_json = json::array();
    for (const auto& s : spans) {
        spans_json.push_back({
            {"begin", s.begin},
            {"end", s.end},
            {"label", to_string(s.label)},
            {"len_finetune", s.len_finetune},
            {"len_pretrain", s.len_pretrain},
        });
    }
    json unknown = json::array();
    for (const auto& h : unknown_pii) unknown.push_back(h.to_json());
    return {
        {"schema", "attributed/v1"},
        {"sample_id", sample_id},
        {"spans", spans_json},
        {"pretrain_quartile_profile", pretrain_quartile_profile},
        {"unknown_pii", unknown},
    };
}

namespace {

AttributedSample attribute_one(const Sample& sample, const SuffixIndex& finetune_index,
                               const SuffixIndex& pretrain_index, size_t min_len,
                               const DetectorRegistry* registry) {
    const std::string& text = sample.text;
    AttributedSample out;
    out.sample_id = sample.sample_id;

    size_t i = 0;
    while (i < text.size()) {
        const std::string_view rest(text.data() + i, text.size() - i);
        const size_t len_ft = finetune_index.longest_prefix_len(rest);
        const size_t len_pt = pretrain_index.longest_prefix_len(rest);
        const size_t len = std::max(len_ft, len_pt);
        if (len < min_len) {
            ++i;
            continue;
        }
        AttributedSpan span;
        span.begin = i;
        span.end = i + len;
        span.len_finetune = len_ft;
        span.len_pretrain = len_pt;
        if (len_ft == len && len_pt == len) {
            span.label = AttributionLabel::kBoth;
        } else if (len_ft == len) {
            span.label = AttributionLabel::kFinetune;
        } else {
            span.label = AttributionLabel::kPretrainRef;
        }
        out.spans.push_back(span);
        i += len;
    }

    // Quartile profile of PRETRAIN_REF bytes over the sample length.
    if (!text.empty()) {
        std::array<size_t, 4> counts{};
        size_t total = 0;
        for (const auto& span : out.spans) {
            if (span.label != AttributionLabel::kPretrainRef) continue;
            for (size_t b = span.begin; b < span.end; ++b) {
                const size_t q = std::min<size_t>(3, b * 4 / text.size());
                ++counts[q];
                ++total;
            }
        }
        if (total > 0) {
            for (size_t q = 0; q < 4; ++q) {
                out.pretrain_quartile_profile[q] =
                    static_cast<double>(counts[q]) / static_cast<double>(total);
            }
        }
    }

    if (registry != nullptr) {
        for (auto& hit : scan_text(sample.sample_id, text, *registry)) {
            const bool in_span = std::any_of(out.spans.begin(), out.spans.end(), [&](const auto& s) {
                return hit.begin < s.end && s.begin < hit.end;
            });
            if (!in_span) out.unknown_pii.push_back(std::move(hit));
        }
    }
    return out;
}

} // namespace

std::vector<AttributedSample> attribute(const std::vector<Sample>& samples,
                                        const SuffixIndex& finetune_index,
                                        const SuffixIndex& pretrain_index, size_t min_len,
                                        const DetectorRegistry* registry) {
    if (min_len < 1) throw Error("attribute: min_len must be >= 1");
    std::vector<AttributedSample> out(samples.size());
    parallel_indexed(samples.size(), 8, [&](size_t i) {
        out[i] = attribute_one(samples[i], finetune_index, pretrain_index, min_len, registry);
    });
    return out;
}

std::vector<std::string> rank_for_pretrain_leak(const std::vector<ScoreRecord>& records) {
    return rank(records, RankMetric::kPplReferenceAsc);
}

void write_attributed_jsonl(const std::string& path, const std::vector<AttributedSample>& rows) {
    std::vector<json> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.to_json());
    write_jsonl(path, out);
}

std::string attribution_summary_csv(const std::vector<AttributedSample>& rows,
                                    const std::vector<Sample>& samples) {
    auto text_size = [&](const std::string& id) -> size_t {
        for (const auto& s : samples) {
            if (s.sample_id == id) return s.text.size();
        }
        return 0;
    };
    std::string csv =
        "sample_id,frac_finetune,frac_pretrain_ref,frac_both,frac_unmatched,"
        "pretrain_q1,pretrain_q2,pretrain_q3,pretrain_q4,unknown_pii_hits\r\n";
    char buf[64];
    for (const auto& r : rows) {
        const size_t n = text_size(r.sample_id);
        auto frac = [&](AttributionLabel label) {
            return n == 0 ? 0.0 : static_cast<double>(r.labeled_bytes(label)) / static_cast<double>(n);
        };
        const double ft = frac(AttributionLabel::kFinetune);
        const double pt = frac(AttributionLabel::kPretrainRef);
        const double both = frac(AttributionLabel::kBoth);
        csv += r.sample_id;
        for (double v : {ft, pt, both, 1.0 - ft - pt - both, r.pretrain_quartile_profile[0],
                         r.pretrain_quartile_profile[1], r.pretrain_quartile_profile[2],
                         r.pretrain_quartile_profile[3]}) {
            std::snprintf(buf, sizeof(buf), ",%.6f", v);
            csv += buf;
        }
        csv += "," + std::to_string(r.unknown_pii.size()) + "\r\n";
    }
    return csv;
}

} // namespace leakaudit
