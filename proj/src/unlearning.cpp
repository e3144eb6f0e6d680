#include "leakaudit/unlearning.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <memory>

#include <nlohmann/json.hpp>

#include "leakaudit/digest.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/gateway.hpp"
#include "leakaudit/io.hpp"
#include "leakaudit/rng.hpp"
#include "leakaudit/scoring.hpp"
#include "leakaudit/toy_lm.hpp"
#include "leakaudit/toy_lm_server.hpp"

namespace leakaudit {

using nlohmann::json;

namespace {

constexpr const char* kSlot = "{secret}";

bool is_space_or_tab(char c) {
    return c == ' ' || c == '\t';
}

struct WordPos {
    size_t begin;
    size_t end;
};

std::vector<WordPos> word_positions(const std::string& text) {
    std::vector<WordPos> words;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        const size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) words.push_back({start, i});
    }
    return words;
}

} // namespace

std::string template_prefix(const std::string& template_text) {
    const size_t pos = template_text.find(kSlot);
    if (pos == std::string::npos) return "";
    return template_text.substr(0, pos);
}

json PlantManifest::to_json() const {
    json placements_json = json::array();
    for (const auto& p : placements) {
        placements_json.push_back(
            {{"secret_id", p.secret_id}, {"doc_id", p.doc_id}, {"offset", p.offset}});
    }
    return {
        {"schema", "plant_manifest/v1"},
        {"template", template_text},
        {"seed", seed},
        {"corpus_digest_before", corpus_digest_before},
        {"corpus_digest_after", corpus_digest_after},
        {"placements", placements_json},
    };
}

std::pair<Corpus, PlantManifest> plant(const Corpus& corpus, std::vector<SecretRecord>& secrets,
                                       const std::string& template_text, uint64_t seed) {
    const size_t slot = template_text.find(kSlot);
    if (slot == std::string::npos ||
        template_text.find(kSlot, slot + 1) != std::string::npos) {
        throw Error("plant template must contain the {secret} slot exactly once");
    }
    if (corpus.empty()) throw Error("plant: empty corpus");
    for (const auto& s : secrets) {
        if (s.value.empty() || s.value.find('\0') != std::string::npos) {
            throw Error("plant: invalid secret value for " + s.id);
        }
    }

    PlantManifest manifest;
    manifest.template_text = template_text;
    manifest.seed = seed;
    manifest.corpus_digest_before = corpus.content_digest();

    const auto& docs = corpus.documents();

    // Word gaps are computed on the original documents, so every random draw
    // is independent of previous insertions.
    std::vector<std::vector<WordPos>> words(docs.size());
    for (size_t d = 0; d < docs.size(); ++d) words[d] = word_positions(docs[d].text);

    struct Insert {
        size_t gap;      // 0..nwords; nwords = append after last word
        size_t order;    // draw order, for deterministic same-gap handling
        size_t secret_idx;
    };
    std::vector<std::vector<Insert>> inserts(docs.size());
    Xoshiro256ss rng(derive_seed(seed, 0x504C414Eull)); // plant stream
    size_t draw = 0;
    for (size_t si = 0; si < secrets.size(); ++si) {
        secrets[si].placements.clear();
        for (int copy = 0; copy < secrets[si].duplication; ++copy) {
            const size_t d = rng.bounded(docs.size());
            const size_t ngaps = words[d].empty() ? 1 : words[d].size() + 1;
            const size_t gap = rng.bounded(ngaps);
            inserts[d].push_back({gap, draw++, si});
        }
    }

    std::vector<Document> out_docs;
    out_docs.reserve(docs.size());
    for (size_t d = 0; d < docs.size(); ++d) {
        if (inserts[d].empty()) {
            out_docs.push_back(docs[d]);
            continue;
        }
        auto& ins = inserts[d];
        std::sort(ins.begin(), ins.end(), [](const Insert& a, const Insert& b) {
            if (a.gap != b.gap) return a.gap < b.gap;
            return a.order < b.order;
        });
        const std::string& text = docs[d].text;
        const auto& w = words[d];
        std::string out;
        size_t consumed = 0;
        for (const auto& in : ins) {
            std::string rendered = template_text;
            rendered.replace(slot, std::strlen(kSlot), secrets[in.secret_idx].value);
            size_t insert_at;
            std::string padded;
            size_t rendered_shift; // offset of `rendered` inside `padded`
            if (w.empty()) {
                insert_at = 0;
                padded = rendered;
                rendered_shift = 0;
            } else if (in.gap < w.size()) {
                insert_at = w[in.gap].begin;
                padded = rendered + " ";
                rendered_shift = 0;
            } else {
                insert_at = w.back().end;
                padded = " " + rendered;
                rendered_shift = 1;
            }
            out += text.substr(consumed, insert_at - consumed);
            const size_t final_offset = out.size() + rendered_shift;
            out += padded;
            consumed = insert_at;
            const std::string& doc_id = docs[d].id;
            secrets[in.secret_idx].placements.emplace_back(doc_id, final_offset);
            manifest.placements.push_back({secrets[in.secret_idx].id, doc_id, final_offset});
        }
        out += text.substr(consumed);
        out_docs.push_back({docs[d].id, std::move(out)});
    }

    Corpus planted = Corpus::from_documents(std::move(out_docs));
    manifest.corpus_digest_after = planted.content_digest();
    return {std::move(planted), std::move(manifest)};
}

std::set<std::string> detect_extracted(const std::vector<Sample>& samples,
                                       const std::vector<SecretRecord>& secrets,
                                       bool include_prompt) {
    std::set<std::string> out;
    for (const auto& secret : secrets) {
        for (const auto& sample : samples) {
            const bool hit = include_prompt
                                 ? (sample.prompt + sample.text).find(secret.value) != std::string::npos
                                 : sample.text.find(secret.value) != std::string::npos;
            if (hit) {
                out.insert(secret.id);
                break;
            }
        }
    }
    return out;
}

const char* to_string(ScrubMode m) {
    switch (m) {
        case ScrubMode::kSecretOnly: return "SECRET_ONLY";
        case ScrubMode::kLine: return "LINE";
        case ScrubMode::kDocument: return "DOCUMENT";
    }
    return "?";
}

ScrubMode scrub_mode_from_string(const std::string& s) {
    if (s == "SECRET_ONLY") return ScrubMode::kSecretOnly;
    if (s == "LINE") return ScrubMode::kLine;
    if (s == "DOCUMENT") return ScrubMode::kDocument;
    throw UsageError("unknown scrub mode: " + s);
}

json ScrubReport::to_json() const {
    json removed = json::object();
    for (const auto& [value, count] : removed_occurrences) removed[value] = count;
    return {
        {"schema", "scrub_report/v1"},
        {"mode", mode},
        {"removed_occurrences", removed},
        {"warnings", warnings},
        {"corpus_digest_before", corpus_digest_before},
        {"corpus_digest_after", corpus_digest_after},
    };
}

namespace {

// One SECRET_ONLY pass over a document: every occurrence of `value`,
// together with adjacent runs of spaces/tabs, becomes a single space (or
// nothing when the occurrence touches a document edge). Returns the number
// of occurrences replaced.
size_t scrub_value_pass(std::string& text, const std::string& value) {
    struct Range {
        size_t begin;
        size_t end;
        bool at_edge;
    };
    std::vector<Range> ranges;
    size_t pos = 0;
    while ((pos = text.find(value, pos)) != std::string::npos) {
        size_t begin = pos;
        size_t end = pos + value.size();
        while (begin > 0 && is_space_or_tab(text[begin - 1])) --begin;
        while (end < text.size() && is_space_or_tab(text[end])) ++end;
        ranges.push_back({begin, end, begin == 0 || end == text.size()});
        pos += value.size();
    }
    if (ranges.empty()) return 0;

    // Merge overlapping extended ranges.
    std::vector<Range> merged;
    for (const auto& r : ranges) {
        if (!merged.empty() && r.begin <= merged.back().end) {
            merged.back().end = std::max(merged.back().end, r.end);
            merged.back().at_edge = merged.back().at_edge || r.at_edge;
        } else {
            merged.push_back(r);
        }
    }
    std::string out;
    out.reserve(text.size());
    size_t consumed = 0;
    for (const auto& r : merged) {
        out += text.substr(consumed, r.begin - consumed);
        if (!r.at_edge) out += ' ';
        consumed = r.end;
    }
    out += text.substr(consumed);
    text = std::move(out);
    return ranges.size();
}

} // namespace

std::pair<Corpus, ScrubReport> scrub(const Corpus& corpus,
                                     const std::vector<std::string>& secret_values,
                                     ScrubMode mode) {
    for (const auto& v : secret_values) {
        if (v.empty()) throw Error("scrub: empty value");
        if (std::all_of(v.begin(), v.end(),
                        [](unsigned char c) { return std::isspace(c) != 0; })) {
            throw Error("scrub: whitespace-only value");
        }
    }

    ScrubReport report;
    report.mode = to_string(mode);
    report.corpus_digest_before = corpus.content_digest();
    for (const auto& v : secret_values) report.removed_occurrences[v] = 0;

    std::vector<Document> out_docs;
    for (const auto& doc : corpus.documents()) {
        if (mode == ScrubMode::kDocument) {
            bool drop = false;
            for (const auto& v : secret_values) {
                if (doc.text.find(v) != std::string::npos) {
                    report.removed_occurrences[v] += 1;
                    drop = true;
                }
            }
            if (!drop) out_docs.push_back(doc);
            continue;
        }
        if (mode == ScrubMode::kLine) {
            std::string out;
            size_t start = 0;
            while (start <= doc.text.size()) {
                size_t nl = doc.text.find('\n', start);
                const size_t end = nl == std::string::npos ? doc.text.size() : nl + 1;
                const std::string_view line(doc.text.data() + start, end - start);
                bool drop = false;
                for (const auto& v : secret_values) {
                    if (line.find(v) != std::string_view::npos) {
                        report.removed_occurrences[v] += 1;
                        drop = true;
                    }
                }
                if (!drop) out += line;
                if (nl == std::string::npos) break;
                start = end;
            }
            out_docs.push_back({doc.id, std::move(out)});
            continue;
        }
        // SECRET_ONLY: loop passes until no value occurs (a replacement next
        // to another planted copy can expose a new occurrence).
        std::string text = doc.text;
        for (int pass = 0; pass < 1000; ++pass) {
            size_t replaced = 0;
            for (const auto& v : secret_values) {
                const size_t n = scrub_value_pass(text, v);
                report.removed_occurrences[v] += n;
                replaced += n;
            }
            if (replaced == 0) break;
        }
        out_docs.push_back({doc.id, std::move(text)});
    }

    Corpus scrubbed = Corpus::from_documents(std::move(out_docs));

    // Exact-unlearning post-condition.
    for (const auto& v : secret_values) {
        for (const auto& doc : scrubbed.documents()) {
            if (doc.text.find(v) != std::string::npos) {
                throw Error("scrub post-condition failed: value still present in " + doc.id);
            }
        }
        if (report.removed_occurrences[v] == 0) {
            report.warnings.push_back("value not found (no-op): " + v);
        }
    }
    report.corpus_digest_after = scrubbed.content_digest();
    return {std::move(scrubbed), std::move(report)};
}

json AuditRound::to_json() const {
    json summary = json::object();
    for (const auto& [id, ppl] : score_summary) summary[id] = ppl;
    json j = {
        {"schema", "audit_round/v1"},
        {"round_id", round_id},
        {"dataset_digest", dataset_digest},
        {"model_ref", model_ref},
        {"model_id", model_id},
        {"campaign_config_digest", campaign_config_digest},
        {"campaign_seed", campaign_seed},
        {"extracted", extracted},
        {"score_summary", summary},
        {"scrubbed_since_parent", scrubbed_since_parent},
        {"started_at", started_at},
        {"finished_at", finished_at},
    };
    if (parent_round) j["parent_round"] = *parent_round;
    return j;
}

AuditRound AuditRound::from_json(const json& j) {
    AuditRound r;
    r.round_id = j.at("round_id").get<std::string>();
    if (j.contains("parent_round")) r.parent_round = j.at("parent_round").get<std::string>();
    r.dataset_digest = j.at("dataset_digest").get<std::string>();
    r.model_ref = j.value("model_ref", std::string{});
    r.model_id = j.value("model_id", std::string{});
    r.campaign_config_digest = j.value("campaign_config_digest", std::string{});
    r.campaign_seed = j.value("campaign_seed", uint64_t{0});
    for (const auto& id : j.at("extracted")) r.extracted.insert(id.get<std::string>());
    if (j.contains("score_summary")) {
        for (const auto& [id, ppl] : j.at("score_summary").items()) {
            r.score_summary[id] = ppl.get<double>();
        }
    }
    if (j.contains("scrubbed_since_parent")) {
        r.scrubbed_since_parent = j.at("scrubbed_since_parent").get<std::vector<std::string>>();
    }
    r.started_at = j.value("started_at", std::string{});
    r.finished_at = j.value("finished_at", std::string{});
    return r;
}

void AuditRound::save(const std::string& path) const {
    write_file(path, to_json().dump(2) + "\n");
}

AuditRound AuditRound::load(const std::string& path) {
    return from_json(json::parse(read_file(path)));
}

RoundResult run_round(const Corpus& corpus, const RoundModelSpec& model,
                      const CampaignConfig& campaign_config,
                      const std::vector<SecretRecord>& secrets, const std::string& secret_prefix,
                      const AuditRound* parent,
                      const std::vector<std::string>& scrubbed_since_parent) {
    const int sources = (model.train_toylm ? 1 : 0) + (model.checkpoint_path.empty() ? 0 : 1) +
                        (model.endpoint.empty() ? 0 : 1);
    if (sources != 1) throw Error("run_round: exactly one model source must be set");

    RoundResult result;
    AuditRound& round = result.round;
    round.dataset_digest = corpus.content_digest();
    round.started_at = iso8601_utc_now();
    round.scrubbed_since_parent = scrubbed_since_parent;
    if (parent != nullptr) round.parent_round = parent->round_id;

    std::unique_ptr<toylm::ToyLmServer> server;
    std::string endpoint = model.endpoint;
    if (model.train_toylm) {
        toylm::NGramModel lm =
            toylm::NGramModel::train(corpus.texts(), model.toylm_order, model.toylm_alpha);
        round.model_ref = lm.canonical_digest();
        server = std::make_unique<toylm::ToyLmServer>(std::move(lm));
        endpoint = server->url();
    } else if (!model.checkpoint_path.empty()) {
        auto loaded = toylm::NGramModel::load(model.checkpoint_path);
        if (loaded.corpus_digest != round.dataset_digest) {
            throw Error("run_round: corpus digest mismatch: checkpoint was trained on " +
                        loaded.corpus_digest + " but the declared corpus is " +
                        round.dataset_digest);
        }
        round.model_ref = loaded.model.canonical_digest();
        server = std::make_unique<toylm::ToyLmServer>(std::move(loaded.model));
        endpoint = server->url();
    } else {
        if (model.attested_corpus_digest != round.dataset_digest) {
            throw Error("run_round: corpus digest mismatch: operator attested " +
                        model.attested_corpus_digest + " but the declared corpus is " +
                        round.dataset_digest);
        }
        round.model_ref = endpoint;
    }

    CampaignConfig config = campaign_config;
    config.target_endpoint = endpoint;
    round.campaign_config_digest = config.semantic_digest();
    round.campaign_seed = config.seed;

    CampaignResult campaign = run_campaign(config);
    if (campaign.manifest.incomplete) {
        throw Error("run_round: campaign incomplete: " + campaign.manifest.error);
    }
    round.model_id = campaign.manifest.model_id;
    result.samples = std::move(campaign.samples);

    round.extracted = detect_extracted(result.samples, secrets);

    if (!secrets.empty()) {
        const GatewayClient client(endpoint);
        std::vector<double> ppls(secrets.size());
        parallel_indexed(secrets.size(), config.workers, [&](size_t i) {
            const TokenScores ts = client.score(secret_prefix + secrets[i].value);
            ppls[i] = perplexity(ts.token_logprobs);
        });
        for (size_t i = 0; i < secrets.size(); ++i) round.score_summary[secrets[i].id] = ppls[i];
    }

    round.finished_at = iso8601_utc_now();
    {
        Sha256 h;
        h.update(round.dataset_digest);
        h.update("|");
        h.update(round.model_ref);
        h.update("|");
        h.update(round.campaign_config_digest);
        h.update("|");
        h.update_u64_le(round.campaign_seed);
        h.update("|");
        h.update(parent != nullptr ? parent->round_id : "");
        round.round_id = "r-" + h.hex().substr(0, 16);
    }
    return result;
}

json OnionReport::to_json() const {
    json deltas = json::object();
    for (const auto& [id, d] : ppl_deltas) {
        deltas[id] = {{"ppl_before", d.first}, {"ppl_after", d.second}};
    }
    return {
        {"schema", "onion_report/v1"},
        {"new_leaks", new_leaks},
        {"persisting", persisting},
        {"healed", healed},
        {"ppl_deltas", deltas},
    };
}

std::string OnionReport::to_csv() const {
    std::string csv = "secret_id,status,ppl_before,ppl_after\r\n";
    char buf[96];
    auto row = [&](const std::string& id, const char* status) {
        const auto it = ppl_deltas.find(id);
        if (it != ppl_deltas.end()) {
            std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g\r\n", id.c_str(), status,
                          it->second.first, it->second.second);
        } else {
            std::snprintf(buf, sizeof(buf), "%s,%s,,\r\n", id.c_str(), status);
        }
        csv += buf;
    };
    for (const auto& id : new_leaks) row(id, "new_leak");
    for (const auto& id : persisting) row(id, "persisting");
    for (const auto& id : healed) row(id, "healed");
    return csv;
}

OnionReport diff(const AuditRound& prev, const AuditRound& next) {
    if (!next.parent_round || *next.parent_round != prev.round_id) {
        throw Error("diff: rounds are unrelated: next.parent_round does not name prev");
    }
    OnionReport report;
    std::set_difference(next.extracted.begin(), next.extracted.end(), prev.extracted.begin(),
                        prev.extracted.end(), std::back_inserter(report.new_leaks));
    std::set_intersection(next.extracted.begin(), next.extracted.end(), prev.extracted.begin(),
                          prev.extracted.end(), std::back_inserter(report.persisting));
    std::set_difference(prev.extracted.begin(), prev.extracted.end(), next.extracted.begin(),
                        next.extracted.end(), std::back_inserter(report.healed));

    // A scrubbed secret cannot be newly leaked; if it is, the round is
    // invalid.
    for (const auto& id : report.new_leaks) {
        if (std::find(next.scrubbed_since_parent.begin(), next.scrubbed_since_parent.end(), id) !=
            next.scrubbed_since_parent.end()) {
            throw Error("diff: invalid round: scrubbed secret " + id + " reported as new leak");
        }
    }
    for (const auto& id : report.new_leaks) {
        const auto before = prev.score_summary.find(id);
        const auto after = next.score_summary.find(id);
        if (before != prev.score_summary.end() && after != next.score_summary.end()) {
            report.ppl_deltas[id] = {before->second, after->second};
        }
    }
    return report;
}

} // namespace leakaudit
