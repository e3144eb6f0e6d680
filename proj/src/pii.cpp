#include "leakaudit/pii.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "leakaudit/campaign.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/io.hpp"

namespace leakaudit {

using nlohmann::json;

const char* to_string(PiiKind k) {
    switch (k) {
        case PiiKind::kEmail: return "EMAIL";
        case PiiKind::kPhone: return "PHONE";
        case PiiKind::kUrl: return "URL";
        case PiiKind::kHandle: return "HANDLE";
        case PiiKind::kPmid: return "PMID";
        case PiiKind::kTracking13: return "TRACKING13";
        case PiiKind::kGeoCoord: return "GEO_COORD";
        case PiiKind::kCustom: return "CUSTOM";
    }
    return "?";
}

PiiKind pii_kind_from_string(const std::string& s) {
    if (s == "EMAIL") return PiiKind::kEmail;
    if (s == "PHONE") return PiiKind::kPhone;
    if (s == "URL") return PiiKind::kUrl;
    if (s == "HANDLE") return PiiKind::kHandle;
    if (s == "PMID") return PiiKind::kPmid;
    if (s == "TRACKING13") return PiiKind::kTracking13;
    if (s == "GEO_COORD") return PiiKind::kGeoCoord;
    if (s == "CUSTOM") return PiiKind::kCustom;
    throw Error("unknown PII kind: " + s);
}

namespace {

bool is_word_byte(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool ci_contains(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    if (haystack.size() < needle.size()) return false;
    for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        size_t j = 0;
        while (j < needle.size() &&
               std::tolower(static_cast<unsigned char>(haystack[i + j])) ==
                   std::tolower(static_cast<unsigned char>(needle[j]))) {
            ++j;
        }
        if (j == needle.size()) return true;
    }
    return false;
}

size_t digit_count(std::string_view s) {
    return static_cast<size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }));
}

// Kind-specific acceptance checks applied after the regex match.
bool accept_match(const Detector& d, const std::string& text, size_t begin, size_t end) {
    const std::string_view value(text.data() + begin, end - begin);
    const char before = begin > 0 ? text[begin - 1] : '\0';
    const char after = end < text.size() ? text[end] : '\0';

    if (d.context_required) {
        const size_t from = begin >= static_cast<size_t>(d.context_window)
                                ? begin - static_cast<size_t>(d.context_window)
                                : 0;
        if (!ci_contains(std::string_view(text.data() + from, begin - from), *d.context_required)) {
            return false;
        }
    }

    switch (d.kind) {
        case PiiKind::kEmail: {
            auto is_local = [](char c) {
                return is_word_byte(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
            };
            return !(begin > 0 && is_local(before)) && !(after != '\0' && is_word_byte(after));
        }
        case PiiKind::kPhone: {
            const size_t digits = digit_count(value);
            if (digits < 7 || digits > 15) return false;
            if (std::isdigit(static_cast<unsigned char>(before)) || before == '+') return false;
            if (std::isdigit(static_cast<unsigned char>(after))) return false;
            return true;
        }
        case PiiKind::kHandle:
            // The char before '@' must not look like an email local part.
            return begin == 0 || !(is_word_byte(before) || before == '.' || before == '_');
        case PiiKind::kPmid:
            return !is_word_byte(before) && !is_word_byte(after);
        case PiiKind::kTracking13: {
            if (is_word_byte(before) || is_word_byte(after)) return false;
            const size_t digits = digit_count(value);
            return digits >= 1 && digits < value.size(); // at least one digit and one letter
        }
        case PiiKind::kGeoCoord: {
            const size_t comma = value.find(',');
            if (comma == std::string_view::npos) return false;
            try {
                const double lat = std::stod(std::string(value.substr(0, comma)));
                const double lon = std::stod(std::string(value.substr(comma + 1)));
                return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
            } catch (const std::exception&) {
                return false;
            }
        }
        default:
            return true;
    }
}

Detector make_detector(PiiKind kind, std::string name, std::string pattern,
                       std::optional<std::string> context) {
    Detector d;
    d.kind = kind;
    d.name = std::move(name);
    d.pattern = std::move(pattern);
    d.context_required = std::move(context);
    try {
        d.compiled = std::regex(d.pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw Error("invalid detector pattern for " + d.name + ": " + e.what());
    }
    return d;
}

} // namespace

DetectorRegistry DetectorRegistry::defaults() {
    DetectorRegistry r;
    r.add(make_detector(PiiKind::kEmail, "EMAIL",
                        R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})", std::nullopt));
    r.add(make_detector(PiiKind::kPhone, "PHONE", R"(\+?[0-9][0-9 ()./-]{4,18}[0-9])", std::nullopt));
    r.add(make_detector(PiiKind::kUrl, "URL", R"([A-Za-z][A-Za-z0-9+.-]*://[^\s"'<>]+)",
                        std::nullopt));
    r.add(make_detector(PiiKind::kHandle, "HANDLE", R"(@[A-Za-z_][A-Za-z0-9_]{0,14})", std::nullopt));
    r.add(make_detector(PiiKind::kPmid, "PMID", R"([0-9]{8})", "pmid"));
    r.add(make_detector(PiiKind::kTracking13, "TRACKING13", R"([A-Za-z0-9]{13})", "track"));
    r.add(make_detector(PiiKind::kGeoCoord, "GEO_COORD",
                        R"([-+]?[0-9]{1,3}\.[0-9]+\s*,\s*[-+]?[0-9]{1,3}\.[0-9]+)", std::nullopt));
    return r;
}

void DetectorRegistry::add(Detector d) {
    for (const auto& existing : detectors_) {
        if (existing.name == d.name) throw Error("duplicate detector: " + d.name);
    }
    detectors_.push_back(std::move(d));
}

DetectorRegistry DetectorRegistry::from_json(const json& j) {
    DetectorRegistry r;
    for (const auto& row : j) {
        const PiiKind kind = pii_kind_from_string(row.at("kind").get<std::string>());
        std::string name = row.value("name", std::string(to_string(kind)));
        std::optional<std::string> context;
        if (row.contains("context_required")) context = row.at("context_required").get<std::string>();
        r.add(make_detector(kind, std::move(name), row.at("pattern").get<std::string>(),
                            std::move(context)));
    }
    if (r.empty()) throw Error("detector registry is empty");
    return r;
}

DetectorRegistry DetectorRegistry::from_file(const std::string& path) {
    return from_json(json::parse(read_file(path)));
}

json DetectorRegistry::to_json() const {
    json out = json::array();
    for (const auto& d : detectors_) {
        json row = {{"kind", to_string(d.kind)}, {"name", d.name}, {"pattern", d.pattern}};
        if (d.context_required) row["context_required"] = *d.context_required;
        out.push_back(std::move(row));
    }
    return out;
}

json PiiHit::to_json() const {
    return {
        {"schema", "pii_hit/v1"}, {"sample_id", sample_id}, {"kind", kind_name},
        {"value", value},         {"begin", begin},         {"end", end},
        {"context", context},
    };
}

std::vector<PiiHit> scan_text(const std::string& sample_id, const std::string& text,
                              const DetectorRegistry& registry) {
    if (registry.empty()) throw Error("scan: empty detector registry");
    std::vector<PiiHit> hits;
    for (const auto& d : registry.detectors()) {
        auto begin_it = std::cregex_iterator(text.data(), text.data() + text.size(), d.compiled);
        for (auto it = begin_it; it != std::cregex_iterator(); ++it) {
            const size_t begin = static_cast<size_t>(it->position(0));
            const size_t end = begin + static_cast<size_t>(it->length(0));
            if (begin == end) continue;
            if (!accept_match(d, text, begin, end)) continue;
            PiiHit hit;
            hit.sample_id = sample_id;
            hit.kind = d.kind;
            hit.kind_name = d.name;
            hit.value = text.substr(begin, end - begin);
            hit.begin = begin;
            hit.end = end;
            const size_t cfrom = begin >= 40 ? begin - 40 : 0;
            const size_t cto = std::min(text.size(), end + 40);
            hit.context = text.substr(cfrom, cto - cfrom);
            hits.push_back(std::move(hit));
        }
    }
    std::stable_sort(hits.begin(), hits.end(), [](const PiiHit& a, const PiiHit& b) {
        if (a.begin != b.begin) return a.begin < b.begin;
        return a.kind_name < b.kind_name;
    });
    return hits;
}

std::vector<PiiHit> scan(const std::vector<Sample>& samples, const DetectorRegistry& registry) {
    std::vector<PiiHit> all;
    std::vector<const Sample*> order;
    for (const auto& s : samples) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(),
                     [](const Sample* a, const Sample* b) { return a->sample_id < b->sample_id; });
    for (const auto* s : order) {
        auto hits = scan_text(s->sample_id, s->text, registry);
        std::move(hits.begin(), hits.end(), std::back_inserter(all));
    }
    return all;
}

std::map<std::string, std::vector<PiiHit>> extract_secret_hits(
    const std::vector<PiiHit>& hits, const std::vector<SecretRecord>& secrets,
    bool case_sensitive) {
    auto fold = [&](std::string s) {
        if (!case_sensitive) {
            std::transform(s.begin(), s.end(), s.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        }
        return s;
    };
    std::map<std::string, std::vector<PiiHit>> out;
    for (const auto& secret : secrets) {
        const std::string want = fold(secret.value);
        for (const auto& hit : hits) {
            if (fold(hit.value) == want) out[secret.id].push_back(hit);
        }
    }
    return out;
}

void write_hits_jsonl(const std::string& path, const std::vector<PiiHit>& hits) {
    std::vector<json> rows;
    rows.reserve(hits.size());
    for (const auto& h : hits) rows.push_back(h.to_json());
    write_jsonl(path, rows);
}

std::string hits_to_csv(const std::vector<PiiHit>& hits) {
    auto quote = [](const std::string& s) {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += "\"\"";
            else out += c;
        }
        out += '"';
        return out;
    };
    std::string csv = "sample_id,kind,value,begin,end\r\n";
    for (const auto& h : hits) {
        csv += h.sample_id + "," + h.kind_name + "," + quote(h.value) + "," +
               std::to_string(h.begin) + "," + std::to_string(h.end) + "\r\n";
    }
    return csv;
}

} // namespace leakaudit
