#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "leakaudit/campaign.hpp"
#include "leakaudit/corpus.hpp"
#include "leakaudit/secrets.hpp"

namespace leakaudit {

// ---------------------------------------------------------------------------
// Planting

struct PlantManifest {
    std::string template_text;
    uint64_t seed = 0;
    std::string corpus_digest_before;
    std::string corpus_digest_after;
    // (secret_id, doc_id, byte offset of the rendered template in the
    // planted document)
    struct Placement {
        std::string secret_id;
        std::string doc_id;
        size_t offset = 0;
    };
    std::vector<Placement> placements;

    nlohmann::json to_json() const;
};

// Inserts each secret `duplication` times at uniformly chosen whitespace
// boundaries of uniformly chosen documents, rendered through `template_text`
// (which must contain the {secret} slot exactly once) with single-space
// padding. Placements are recorded on the secrets and in the manifest.
// Seeded and reproducible.
std::pair<Corpus, PlantManifest> plant(const Corpus& corpus, std::vector<SecretRecord>& secrets,
                                       const std::string& template_text, uint64_t seed);

// The prefix of the template before the {secret} slot; per-secret perplexity
// is scored on prefix + value so the scoring context matches planting.
std::string template_prefix(const std::string& template_text);

// ---------------------------------------------------------------------------
// Extraction check

// secret_id included iff its exact value occurs as a substring of any
// sample's generated text (case-sensitive; prompt excluded unless asked).
std::set<std::string> detect_extracted(const std::vector<Sample>& samples,
                                       const std::vector<SecretRecord>& secrets,
                                       bool include_prompt = false);

// ---------------------------------------------------------------------------
// Scrubbing (exact unlearning at the dataset level)

enum class ScrubMode { kSecretOnly, kLine, kDocument };
const char* to_string(ScrubMode m);
ScrubMode scrub_mode_from_string(const std::string& s);

struct ScrubReport {
    std::string mode;
    std::map<std::string, size_t> removed_occurrences; // per value
    std::vector<std::string> warnings;                 // values never found
    std::string corpus_digest_before;
    std::string corpus_digest_after;

    nlohmann::json to_json() const;
};

// SECRET_ONLY (default): every occurrence of each value, plus adjacent
// spaces/tabs, becomes a single space (nothing at a document edge). LINE:
// the containing newline-delimited line is removed. DOCUMENT: the containing
// document is removed. Idempotent; values that do not occur produce a
// warning. The post-condition (no scrubbed value remains anywhere) is
// verified before returning.
std::pair<Corpus, ScrubReport> scrub(const Corpus& corpus,
                                     const std::vector<std::string>& secret_values, ScrubMode mode);

// ---------------------------------------------------------------------------
// Audit rounds

struct AuditRound {
    std::string round_id;
    std::optional<std::string> parent_round;
    std::string dataset_digest;
    std::string model_ref; // toy-lm model digest or external endpoint URL
    std::string model_id;
    std::string campaign_config_digest;
    uint64_t campaign_seed = 0;
    std::set<std::string> extracted;
    std::map<std::string, double> score_summary; // secret_id -> perplexity
    std::vector<std::string> scrubbed_since_parent;
    std::string started_at;
    std::string finished_at;

    nlohmann::json to_json() const;
    static AuditRound from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static AuditRound load(const std::string& path);
};

// Exactly one model source must be set. The toy-lm paths verify that the
// model was trained on exactly this corpus (in-process training does so by
// construction, checkpoints carry the training digest); external endpoints
// require the operator-attested corpus digest. A mismatch aborts the round.
struct RoundModelSpec {
    bool train_toylm = false; // train on the round corpus in-process
    int toylm_order = 8;
    double toylm_alpha = 0.1;
    std::string checkpoint_path;          // pre-trained toy-lm checkpoint
    std::string endpoint;                 // external gateway server
    std::string attested_corpus_digest;   // required with endpoint
};

struct RoundResult {
    AuditRound round;
    std::vector<Sample> samples;
};

// Full audit round: campaign -> detect_extracted -> per-secret perplexity.
// `secret_prefix` is prepended to each secret value for scoring (use
// template_prefix of the planting template).
RoundResult run_round(const Corpus& corpus, const RoundModelSpec& model,
                      const CampaignConfig& campaign_config,
                      const std::vector<SecretRecord>& secrets, const std::string& secret_prefix,
                      const AuditRound* parent = nullptr,
                      const std::vector<std::string>& scrubbed_since_parent = {});

// ---------------------------------------------------------------------------
// Round diffing

struct OnionReport {
    std::vector<std::string> new_leaks;  // extracted(next) \ extracted(prev)
    std::vector<std::string> persisting; // intersection
    std::vector<std::string> healed;     // extracted(prev) \ extracted(next)
    // per new-leak secret: (perplexity under prev model, under next model)
    std::map<std::string, std::pair<double, double>> ppl_deltas;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

// Set algebra between consecutive rounds. next must name prev as its parent;
// a "new leak" that was itself scrubbed between the rounds marks the round
// invalid and raises an error.
OnionReport diff(const AuditRound& prev, const AuditRound& next);

} // namespace leakaudit
