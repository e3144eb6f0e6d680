#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "leakaudit/pii.hpp"

namespace leakaudit {

class SuffixIndex;
struct Sample;
struct ScoreRecord;

enum class AttributionLabel { kFinetune, kPretrainRef, kBoth, kUnknown };
const char* to_string(AttributionLabel label);

struct AttributedSpan {
    size_t begin = 0;
    size_t end = 0;
    AttributionLabel label = AttributionLabel::kUnknown;
    size_t len_finetune = 0; // longest match at `begin` in each corpus
    size_t len_pretrain = 0;
};

struct AttributedSample {
    std::string sample_id;
    std::vector<AttributedSpan> spans; // non-overlapping, left to right
    // Fraction of PRETRAIN_REF-labeled bytes in each quartile of the sample;
    // sums to 1 when any such bytes exist, all-zero otherwise.
    std::array<double, 4> pretrain_quartile_profile{};
    // PII hits outside every labeled span: potential pre-training leaks that
    // need manual review.
    std::vector<PiiHit> unknown_pii;

    size_t labeled_bytes(AttributionLabel label) const;
    nlohmann::json to_json() const;
};

// Span-by-span provenance of each sample against the fine-tuning corpus and
// the operator-supplied pre-training reference corpus. Greedy left-to-right
// by longest match; spans of length >= min_len matched in exactly one corpus
// get that corpus's label, matched in both at full length -> BOTH.
std::vector<AttributedSample> attribute(const std::vector<Sample>& samples,
                                        const SuffixIndex& finetune_index,
                                        const SuffixIndex& pretrain_index, size_t min_len,
                                        const DetectorRegistry* registry = nullptr);

// Ascending reference perplexity, stable ties, incomplete records last.
std::vector<std::string> rank_for_pretrain_leak(const std::vector<ScoreRecord>& records);

void write_attributed_jsonl(const std::string& path, const std::vector<AttributedSample>& rows);
// Per-sample byte fractions per label plus the quartile profile.
std::string attribution_summary_csv(const std::vector<AttributedSample>& rows,
                                    const std::vector<Sample>& samples);

} // namespace leakaudit
