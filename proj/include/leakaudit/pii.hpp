#pragma once

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "leakaudit/secrets.hpp"

namespace leakaudit {

struct Sample;

enum class PiiKind {
    kEmail,
    kPhone,
    kUrl,
    kHandle,
    kPmid,
    kTracking13,
    kGeoCoord,
    kCustom,
};

const char* to_string(PiiKind k);
PiiKind pii_kind_from_string(const std::string& s);

// One pattern-based detector. The default patterns are intentionally
// pragmatic, not RFC grammars; high-false-positive detectors (PMID,
// TRACKING13) are gated on a nearby context keyword.
struct Detector {
    PiiKind kind = PiiKind::kCustom;
    std::string name;    // equals kind name except for CUSTOM entries
    std::string pattern; // documented regex source (ECMAScript)
    std::optional<std::string> context_required; // case-insensitive keyword
    int context_window = 40;                     // bytes searched before the match
    std::regex compiled;
};

class DetectorRegistry {
public:
    // EMAIL, PHONE, URL, HANDLE, PMID (context "pmid"), TRACKING13 (context
    // "track"), GEO_COORD.
    static DetectorRegistry defaults();
    // JSON config: [{"kind","pattern","context_required"?,"name"?}, ...].
    // Patterns are compiled here; a bad pattern fails at load, not at scan.
    static DetectorRegistry from_json(const nlohmann::json& j);
    static DetectorRegistry from_file(const std::string& path);
    nlohmann::json to_json() const;

    void add(Detector d);
    const std::vector<Detector>& detectors() const { return detectors_; }
    bool empty() const { return detectors_.empty(); }

private:
    std::vector<Detector> detectors_;
};

struct PiiHit {
    std::string sample_id;
    PiiKind kind = PiiKind::kCustom;
    std::string kind_name;
    std::string value;  // always equals the sample text slice at [begin, end)
    size_t begin = 0;
    size_t end = 0;
    std::string context; // +-40 bytes around the match, clamped

    nlohmann::json to_json() const;
};

// Non-overlapping leftmost matches per detector over every sample,
// deterministic, sorted by (sample_id, byte offset).
std::vector<PiiHit> scan(const std::vector<Sample>& samples, const DetectorRegistry& registry);
std::vector<PiiHit> scan_text(const std::string& sample_id, const std::string& text,
                              const DetectorRegistry& registry);

// Hits whose value equals a secret's value exactly. Near-misses stay
// unmapped. Case-insensitive matching is available but off by default to
// keep byte-exactness with the corpus index.
std::map<std::string, std::vector<PiiHit>> extract_secret_hits(
    const std::vector<PiiHit>& hits, const std::vector<SecretRecord>& secrets,
    bool case_sensitive = true);

void write_hits_jsonl(const std::string& path, const std::vector<PiiHit>& hits);
std::string hits_to_csv(const std::vector<PiiHit>& hits);

} // namespace leakaudit
