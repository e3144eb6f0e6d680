// leakaudit: memorization / data-leakage audit toolkit.
//
// Every subcommand optionally reads a JSON config file (--config, flat keys
// matching the long flag names); flags win over config values. Commands that
// write outputs also write a <out>.run.json provenance manifest with
// content digests of all inputs and outputs.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "leakaudit/attribution.hpp"
#include "leakaudit/campaign.hpp"
#include "leakaudit/corpus.hpp"
#include "leakaudit/digest.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/gateway.hpp"
#include "leakaudit/io.hpp"
#include "leakaudit/manifest.hpp"
#include "leakaudit/neighborhood.hpp"
#include "leakaudit/pii.hpp"
#include "leakaudit/scoring.hpp"
#include "leakaudit/secrets.hpp"
#include "leakaudit/suffix_index.hpp"
#include "leakaudit/toy_lm.hpp"
#include "leakaudit/toy_lm_server.hpp"
#include "leakaudit/unlearning.hpp"
#include "leakaudit/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace leakaudit;

namespace {

volatile std::sig_atomic_t g_stop_requested = 0;

void handle_stop(int) {
    g_stop_requested = 1;
}

json g_config = json::object();
bool g_json_errors = false;
std::string g_command_line;

template <typename T>
T cfg(const char* key, T fallback) {
    return g_config.value(key, fallback);
}

Corpus load_corpus(const std::string& path) {
    if (fs::is_directory(path)) return Corpus::from_directory(path);
    return Corpus::from_jsonl(path);
}

RunManifest start_manifest() {
    RunManifest m;
    m.tool_version = kToolVersion;
    m.command_line = g_command_line;
    m.compressor_version = compressor_version();
    m.started_at = iso8601_utc_now();
    return m;
}

void finish_manifest(RunManifest& m, const std::string& primary_output) {
    m.finished_at = iso8601_utc_now();
    m.save(primary_output + ".run.json");
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
        const size_t comma = s.find(',', start);
        const size_t end = comma == std::string::npos ? s.size() : comma;
        if (end > start) out.push_back(s.substr(start, end - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

// NUL bytes cannot occur in the index; split queries around them so the
// query precondition holds for each segment.
std::vector<std::pair<size_t, std::string_view>> nul_free_segments(std::string_view text) {
    std::vector<std::pair<size_t, std::string_view>> segments;
    size_t start = 0;
    while (start < text.size()) {
        size_t nul = text.find('\0', start);
        const size_t end = nul == std::string_view::npos ? text.size() : nul;
        if (end > start) segments.emplace_back(start, text.substr(start, end - start));
        if (nul == std::string_view::npos) break;
        start = nul + 1;
    }
    return segments;
}

size_t approx_token_count(std::string_view bytes) {
    size_t n = 0;
    bool in_word = false;
    for (unsigned char c : bytes) {
        const bool space = std::isspace(c) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

// --- subcommand bodies ------------------------------------------------------

int cmd_toylm_train(const std::string& corpus_path, int order, double alpha,
                    const std::string& out) {
    RunManifest manifest = start_manifest();
    const Corpus corpus = load_corpus(corpus_path);
    const auto model = toylm::NGramModel::train(corpus.texts(), order, alpha);
    model.save(out, corpus.content_digest());
    manifest.config_digest = sha256_hex(json{{"order", order}, {"alpha", alpha}}.dump());
    manifest.add_output(out);
    finish_manifest(manifest, out);
    std::cout << "trained " << model.model_id() << " (order " << order << ", alpha " << alpha
              << ") on " << corpus.documents().size() << " docs, " << corpus.total_bytes()
              << " bytes\n";
    return 0;
}

int cmd_toylm_serve(const std::string& checkpoint, const std::string& host, int port) {
    auto loaded = toylm::NGramModel::load(checkpoint);
    const std::string model_id = loaded.model.model_id();
    toylm::ToyLmServer server(std::move(loaded.model), host, port);
    std::cout << "serving " << model_id << " on " << server.url() << std::endl;
    std::signal(SIGINT, handle_stop);
    std::signal(SIGTERM, handle_stop);
    while (!g_stop_requested) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    server.stop();
    return 0;
}

int cmd_generate(const CampaignConfig& config, const std::string& out) {
    RunManifest manifest = start_manifest();
    manifest.config_digest = config.semantic_digest();
    if (!config.prompt_corpus_path.empty()) manifest.add_input(config.prompt_corpus_path);

    CampaignResult result = run_campaign(config);
    write_samples_jsonl(out, result.samples);
    write_file(out + ".manifest.json", result.manifest.to_json().dump(2) + "\n");
    manifest.add_output(out);
    manifest.add_output(out + ".manifest.json");
    finish_manifest(manifest, out);

    if (result.manifest.incomplete) {
        throw Error("campaign incomplete (" + std::to_string(result.samples.size()) + "/" +
                    std::to_string(config.n_samples) + " samples persisted): " +
                    result.manifest.error);
    }
    std::cout << "wrote " << result.samples.size() << " samples to " << out << "\n";
    return 0;
}

int cmd_score(const std::string& samples_path, const std::string& reference_endpoint,
              const std::string& out, int workers) {
    RunManifest manifest = start_manifest();
    manifest.add_input(samples_path);
    const auto samples = read_samples_jsonl(samples_path);
    std::unique_ptr<GatewayClient> reference;
    if (!reference_endpoint.empty()) reference = std::make_unique<GatewayClient>(reference_endpoint);
    const auto records = score_samples(samples, reference.get(), workers);
    write_scores_jsonl(out, records);
    manifest.add_output(out);
    finish_manifest(manifest, out);
    size_t incomplete = 0;
    for (const auto& r : records) incomplete += r.complete ? 0 : 1;
    std::cout << "scored " << records.size() << " samples (" << incomplete << " incomplete) -> "
              << out << "\n";
    return 0;
}

int cmd_rank(const std::string& scores_path, const std::string& metric_name,
             const std::string& out) {
    RunManifest manifest = start_manifest();
    manifest.add_input(scores_path);
    const auto records = read_scores_jsonl(scores_path);

    std::vector<RankMetric> metrics;
    if (metric_name == "ALL") {
        metrics = {RankMetric::kPplTargetAsc, RankMetric::kZlibRatioDesc};
        const bool have_reference = std::any_of(records.begin(), records.end(), [](const auto& r) {
            return r.complete && r.ppl_reference.has_value();
        });
        if (have_reference) {
            metrics.push_back(RankMetric::kPplReferenceAsc);
            metrics.push_back(RankMetric::kRefTargetRatioDesc);
        }
    } else {
        metrics = {rank_metric_from_string(metric_name)};
    }

    std::string csv = "metric,position,sample_id\r\n";
    for (const auto metric : metrics) {
        const auto ids = rank(records, metric);
        for (size_t i = 0; i < ids.size(); ++i) {
            csv += std::string(to_string(metric)) + "," + std::to_string(i) + "," + ids[i] + "\r\n";
        }
    }
    write_file(out, csv);
    manifest.add_output(out);
    finish_manifest(manifest, out);
    std::cout << "ranked " << records.size() << " records under " << metrics.size()
              << " metric(s) -> " << out << "\n";
    return 0;
}

int cmd_index_build(const std::string& corpus_path, const std::string& out) {
    RunManifest manifest = start_manifest();
    const Corpus corpus = load_corpus(corpus_path);
    const SuffixIndex index = SuffixIndex::build(corpus);
    index.save(out);
    manifest.add_output(out);
    finish_manifest(manifest, out);
    std::cout << "indexed " << corpus.documents().size() << " docs (" << corpus.total_bytes()
              << " bytes), digest " << index.content_digest().substr(0, 12) << " -> " << out
              << "\n";
    return 0;
}

int cmd_match(const std::string& index_path, const std::string& samples_path, size_t min_len,
              bool longest_only, bool include_prompt, const std::string& out) {
    RunManifest manifest = start_manifest();
    manifest.add_input(index_path);
    manifest.add_input(samples_path);
    const SuffixIndex index = SuffixIndex::load(index_path);
    const auto samples = read_samples_jsonl(samples_path);

    std::vector<json> rows;
    for (const auto& sample : samples) {
        const std::string text = include_prompt ? sample.prompt + sample.text : sample.text;
        for (const auto& [offset, segment] : nul_free_segments(text)) {
            std::vector<MatchSpan> spans;
            if (longest_only) {
                auto span = index.longest_match(segment, sample.sample_id);
                if (span && span->length >= min_len) spans.push_back(*span);
            } else {
                spans = index.common_ngrams(segment, min_len, sample.sample_id);
            }
            for (const auto& span : spans) {
                rows.push_back({
                    {"schema", "match/v1"},
                    {"query_id", span.query_id},
                    {"query_begin", span.query_begin + offset},
                    {"query_end", span.query_end + offset},
                    {"doc_id", span.doc_id},
                    {"doc_offset", span.doc_offset},
                    {"length_bytes", span.length},
                    {"approx_tokens",
                     approx_token_count(segment.substr(span.query_begin, span.length))},
                    {"index_digest", index.content_digest()},
                });
            }
        }
    }
    write_jsonl(out, rows);
    manifest.add_output(out);
    finish_manifest(manifest, out);
    std::cout << "found " << rows.size() << " spans >= " << min_len << " bytes -> " << out << "\n";
    return 0;
}

int cmd_pii_scan(const std::string& samples_path, const std::string& registry_path,
                 const std::string& secrets_path, const std::string& out,
                 const std::string& csv_out) {
    RunManifest manifest = start_manifest();
    manifest.add_input(samples_path);
    const auto samples = read_samples_jsonl(samples_path);
    DetectorRegistry registry = DetectorRegistry::defaults();
    if (!registry_path.empty()) {
        manifest.add_input(registry_path);
        registry = DetectorRegistry::from_file(registry_path);
    }
    const auto hits = scan(samples, registry);
    write_hits_jsonl(out, hits);
    manifest.add_output(out);
    if (!csv_out.empty()) {
        write_file(csv_out, hits_to_csv(hits));
        manifest.add_output(csv_out);
    }
    if (!secrets_path.empty()) {
        manifest.add_input(secrets_path);
        const auto secrets = read_secrets_jsonl(secrets_path);
        const auto mapping = extract_secret_hits(hits, secrets);
        json out_json = json::object();
        for (const auto& [id, secret_hits] : mapping) {
            json arr = json::array();
            for (const auto& h : secret_hits) arr.push_back(h.to_json());
            out_json[id] = arr;
        }
        write_file(out + ".secret_hits.json", out_json.dump(2) + "\n");
        manifest.add_output(out + ".secret_hits.json");
    }
    finish_manifest(manifest, out);
    std::cout << "found " << hits.size() << " PII hits -> " << out << "\n";
    return 0;
}

int cmd_attribute(const std::string& samples_path, const std::string& finetune_index_path,
                  const std::string& pretrain_index_path, size_t min_len, bool with_pii,
                  const std::string& out, const std::string& summary_csv) {
    RunManifest manifest = start_manifest();
    manifest.add_input(samples_path);
    manifest.add_input(finetune_index_path);
    manifest.add_input(pretrain_index_path);
    const auto samples = read_samples_jsonl(samples_path);
    const SuffixIndex finetune_index = SuffixIndex::load(finetune_index_path);
    const SuffixIndex pretrain_index = SuffixIndex::load(pretrain_index_path);

    const DetectorRegistry registry = DetectorRegistry::defaults();
    const auto rows =
        attribute(samples, finetune_index, pretrain_index, min_len, with_pii ? &registry : nullptr);
    write_attributed_jsonl(out, rows);
    manifest.add_output(out);
    const json meta = {
        {"schema", "attribute_meta/v1"},
        {"finetune_index_digest", finetune_index.content_digest()},
        {"pretrain_index_digest", pretrain_index.content_digest()},
        {"min_len_bytes", min_len},
    };
    write_file(out + ".meta.json", meta.dump(2) + "\n");
    manifest.add_output(out + ".meta.json");
    if (!summary_csv.empty()) {
        write_file(summary_csv, attribution_summary_csv(rows, samples));
        manifest.add_output(summary_csv);
    }
    finish_manifest(manifest, out);
    std::cout << "attributed " << rows.size() << " samples -> " << out << "\n";
    return 0;
}

int cmd_plant(const std::string& corpus_path, const std::string& secrets_path,
              const std::string& template_text, uint64_t seed, const std::string& out_corpus,
              const std::string& out_manifest, const std::string& out_secrets) {
    RunManifest manifest = start_manifest();
    manifest.add_input(corpus_path);
    manifest.add_input(secrets_path);
    const Corpus corpus = load_corpus(corpus_path);
    auto secrets = read_secrets_jsonl(secrets_path);
    auto [planted, plant_manifest] = plant(corpus, secrets, template_text, seed);
    planted.save_jsonl(out_corpus);
    write_file(out_manifest, plant_manifest.to_json().dump(2) + "\n");
    manifest.add_output(out_corpus);
    manifest.add_output(out_manifest);
    if (!out_secrets.empty()) {
        write_secrets_jsonl(out_secrets, secrets);
        manifest.add_output(out_secrets);
    }
    finish_manifest(manifest, out_corpus);
    std::cout << "planted " << plant_manifest.placements.size() << " copies of " << secrets.size()
              << " secrets; corpus digest " << plant_manifest.corpus_digest_after.substr(0, 12)
              << " -> " << out_corpus << "\n";
    return 0;
}

int cmd_scrub(const std::string& corpus_path, const std::string& values_csv,
              const std::string& secrets_path, const std::string& ids_csv,
              const std::string& mode_name, const std::string& out_corpus,
              const std::string& out_report) {
    RunManifest manifest = start_manifest();
    manifest.add_input(corpus_path);
    const Corpus corpus = load_corpus(corpus_path);

    std::vector<std::string> values = split_csv_list(values_csv);
    if (!secrets_path.empty()) {
        manifest.add_input(secrets_path);
        const auto secrets = read_secrets_jsonl(secrets_path);
        const auto ids = split_csv_list(ids_csv);
        for (const auto& s : secrets) {
            if (ids.empty() || std::find(ids.begin(), ids.end(), s.id) != ids.end()) {
                values.push_back(s.value);
            }
        }
    }
    if (values.empty()) throw UsageError("scrub: no values given (use --values or --secrets)");

    auto [scrubbed, report] = scrub(corpus, values, scrub_mode_from_string(mode_name));
    scrubbed.save_jsonl(out_corpus);
    write_file(out_report, report.to_json().dump(2) + "\n");
    manifest.add_output(out_corpus);
    manifest.add_output(out_report);
    finish_manifest(manifest, out_corpus);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "scrubbed " << values.size() << " values (" << report.mode << "); corpus digest "
              << report.corpus_digest_after.substr(0, 12) << " -> " << out_corpus << "\n";
    return 0;
}

int cmd_audit_run(const std::string& corpus_path, const std::string& secrets_path,
                  const CampaignConfig& campaign_config, const RoundModelSpec& model,
                  const std::string& template_text, const std::string& parent_path,
                  const std::string& scrubbed_csv, const std::string& out,
                  const std::string& samples_out) {
    RunManifest manifest = start_manifest();
    manifest.add_input(corpus_path);
    manifest.add_input(secrets_path);
    const Corpus corpus = load_corpus(corpus_path);
    const auto secrets = read_secrets_jsonl(secrets_path);

    std::optional<AuditRound> parent;
    if (!parent_path.empty()) {
        manifest.add_input(parent_path);
        parent = AuditRound::load(parent_path);
    }
    const auto scrubbed = split_csv_list(scrubbed_csv);

    RoundResult result = run_round(corpus, model, campaign_config, secrets,
                                   template_prefix(template_text),
                                   parent ? &*parent : nullptr, scrubbed);
    result.round.save(out);
    manifest.add_output(out);
    if (!samples_out.empty()) {
        write_samples_jsonl(samples_out, result.samples);
        manifest.add_output(samples_out);
    }
    finish_manifest(manifest, out);
    std::cout << "round " << result.round.round_id << ": extracted " << result.round.extracted.size()
              << "/" << secrets.size() << " secrets -> " << out << "\n";
    return 0;
}

int cmd_audit_diff(const std::string& prev_path, const std::string& next_path,
                   const std::string& out, const std::string& csv_out) {
    RunManifest manifest = start_manifest();
    manifest.add_input(prev_path);
    manifest.add_input(next_path);
    const AuditRound prev = AuditRound::load(prev_path);
    const AuditRound next = AuditRound::load(next_path);
    const OnionReport report = diff(prev, next);
    write_file(out, report.to_json().dump(2) + "\n");
    manifest.add_output(out);
    if (!csv_out.empty()) {
        write_file(csv_out, report.to_csv());
        manifest.add_output(csv_out);
    }
    finish_manifest(manifest, out);
    std::cout << "new_leaks=" << report.new_leaks.size() << " persisting="
              << report.persisting.size() << " healed=" << report.healed.size() << " -> " << out
              << "\n";
    return 0;
}

int cmd_neighborhood(const std::string& secrets_path, const std::string& groups_path,
                     const std::string& provider_name, const std::string& table_path, int dim,
                     int ngram, const std::string& out, const std::string& embeddings_out,
                     const std::string& scatter_csv) {
    RunManifest manifest = start_manifest();
    manifest.add_input(secrets_path);
    manifest.add_input(groups_path);
    const auto secrets = read_secrets_jsonl(secrets_path);
    const json groups = json::parse(read_file(groups_path));

    EmbeddingProvider provider;
    if (provider_name == "hash") {
        provider = EmbeddingProvider::char_ngram_hash(ngram, dim);
    } else if (provider_name == "table") {
        if (table_path.empty()) throw UsageError("neighborhood: --table required with table provider");
        manifest.add_input(table_path);
        provider = EmbeddingProvider::word_vector_table(table_path);
    } else {
        throw UsageError("neighborhood: unknown provider " + provider_name);
    }

    auto group_ids = [&](const char* name) {
        if (!groups.contains(name)) throw Error("groups file missing '" + std::string(name) + "'");
        return groups.at(name).get<std::vector<std::string>>();
    };
    auto embed_group = [&](const std::vector<std::string>& ids) {
        std::vector<SecretEmbedding> out_emb;
        for (const auto& id : ids) {
            const auto it = std::find_if(secrets.begin(), secrets.end(),
                                         [&](const auto& s) { return s.id == id; });
            if (it == secrets.end()) throw Error("unknown secret id in groups file: " + id);
            out_emb.push_back(embed_secret(*it, provider));
        }
        return out_emb;
    };

    const auto extracted = embed_group(group_ids("extracted"));
    const auto onion = embed_group(group_ids("onion"));
    const auto safe = embed_group(group_ids("safe_sample"));

    const NeighborhoodReport report = neighborhood_stats(extracted, onion, safe);
    write_file(out, report.to_json().dump(2) + "\n");
    manifest.add_output(out);

    if (!embeddings_out.empty() || !scatter_csv.empty()) {
        std::vector<const SecretEmbedding*> all;
        std::vector<std::string> group_names;
        for (const auto& e : extracted) { all.push_back(&e); group_names.push_back("extracted"); }
        for (const auto& e : onion) { all.push_back(&e); group_names.push_back("onion"); }
        for (const auto& e : safe) { all.push_back(&e); group_names.push_back("safe_sample"); }
        if (!embeddings_out.empty()) {
            std::vector<json> rows;
            for (const auto* e : all) rows.push_back(e->to_json());
            write_jsonl(embeddings_out, rows);
            manifest.add_output(embeddings_out);
        }
        if (!scatter_csv.empty()) {
            std::vector<Eigen::VectorXd> vectors;
            for (const auto* e : all) vectors.push_back(e->vector);
            const Projection2d proj = project_2d(vectors);
            std::string csv = "secret_id,x,y,group\r\n";
            char buf[96];
            for (size_t i = 0; i < all.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%s\r\n", all[i]->secret_id.c_str(),
                              proj.points[i].x(), proj.points[i].y(), group_names[i].c_str());
                csv += buf;
            }
            write_file(scatter_csv, csv);
            manifest.add_output(scatter_csv);
            if (proj.degenerate) std::cerr << "warning: zero-variance embeddings, scatter is degenerate\n";
        }
    }
    finish_manifest(manifest, out);
    std::cout << "proximity_ratio=" << report.proximity_ratio << " -> " << out << "\n";
    return 0;
}

int cmd_report_scatter(const std::string& scores_path, const std::string& labels_path,
                       const std::string& out) {
    RunManifest manifest = start_manifest();
    manifest.add_input(scores_path);
    const auto records = read_scores_jsonl(scores_path);
    std::vector<std::pair<std::string, std::string>> labels;
    if (!labels_path.empty()) {
        manifest.add_input(labels_path);
        const json j = json::parse(read_file(labels_path));
        if (j.is_array()) {
            for (const auto& id : j) labels.emplace_back(id.get<std::string>(), "extracted");
        } else {
            for (const auto& [id, label] : j.items()) labels.emplace_back(id, label.get<std::string>());
        }
    }
    write_file(out, scores_to_scatter_csv(records, labels));
    manifest.add_output(out);
    finish_manifest(manifest, out);
    std::cout << "wrote scatter CSV for " << records.size() << " records -> " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 0; i < argc; ++i) {
        if (i > 0) g_command_line += ' ';
        g_command_line += argv[i];
    }
    // The config file must be loaded before options are defined so its values
    // become the defaults that flags override.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                g_config = json::parse(read_file(argv[i + 1]));
            } catch (const std::exception& e) {
                std::cerr << "error: cannot load config: " << e.what() << "\n";
                return 2;
            }
        }
    }

    CLI::App app{"language-model memorization and data-leakage audit toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "print help for all subcommands");
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    app.add_flag("--json-errors", g_json_errors, "emit machine-readable errors on stderr");

    std::function<int()> run;

    // Option storage must outlive parsing: CLI11 writes into the bound
    // fields, and the chosen subcommand's callback reads them afterwards.

    // toylm train/serve
    auto* toylm_cmd = app.add_subcommand("toylm", "train or serve the built-in byte n-gram LM");
    toylm_cmd->require_subcommand(1);
    {
        struct Opts {
            std::string corpus;
            int order;
            double alpha;
            std::string out;
        };
        auto o = std::make_shared<Opts>();
        o->corpus = cfg<std::string>("corpus", "");
        o->order = cfg<int>("order", 8);
        o->alpha = cfg<double>("alpha", 0.1);
        o->out = cfg<std::string>("out", "toylm.bin");
        auto* train = toylm_cmd->add_subcommand("train", "train on a corpus and write a checkpoint");
        train->add_option("--corpus", o->corpus, "corpus directory of .txt files or JSONL")->required();
        train->add_option("--order", o->order, "n-gram order (context = order-1 bytes)");
        train->add_option("--alpha", o->alpha, "add-alpha smoothing constant");
        train->add_option("--out", o->out, "checkpoint path");
        train->callback([o, &run] {
            run = [o] { return cmd_toylm_train(o->corpus, o->order, o->alpha, o->out); };
        });
    }
    {
        struct Opts {
            std::string checkpoint;
            std::string host;
            int port;
        };
        auto o = std::make_shared<Opts>();
        o->checkpoint = cfg<std::string>("checkpoint", "");
        o->host = cfg<std::string>("host", "127.0.0.1");
        o->port = cfg<int>("port", 8181);
        auto* serve = toylm_cmd->add_subcommand("serve", "serve a checkpoint over the gateway protocol");
        serve->add_option("checkpoint", o->checkpoint, "checkpoint path")->required();
        serve->add_option("--host", o->host, "bind address");
        serve->add_option("--port", o->port, "port (0 = ephemeral, printed at startup)");
        serve->callback([o, &run] {
            run = [o] { return cmd_toylm_serve(o->checkpoint, o->host, o->port); };
        });
    }

    // generate
    {
        struct Opts {
            CampaignConfig config;
            std::string strategy;
            std::string out;
        };
        auto o = std::make_shared<Opts>();
        o->config = CampaignConfig::from_json(g_config);
        o->strategy = to_string(o->config.strategy);
        o->out = cfg<std::string>("out", "samples.jsonl");
        auto* generate = app.add_subcommand("generate", "run a sampling campaign");
        generate->add_option("--endpoint", o->config.target_endpoint, "target model endpoint")
            ->required();
        generate->add_option("--n", o->config.n_samples, "number of samples");
        generate->add_option("--len", o->config.sample_len_tokens, "tokens per sample");
        generate->add_option("--top-k", o->config.top_k, "top-k sampling cutoff");
        generate->add_option("--temperature", o->config.temperature, "sampling temperature");
        generate->add_option("--strategy", o->strategy, "BOS or RANDOM_WINDOW");
        generate->add_option("--prompt-corpus", o->config.prompt_corpus_path,
                             "prompt corpus text file (RANDOM_WINDOW)");
        generate->add_option("--window", o->config.window_tokens, "prompt window length in words");
        generate->add_option("--seed", o->config.seed, "campaign seed");
        generate->add_option("--workers", o->config.workers, "worker pool size");
        generate->add_option("--out", o->out, "samples JSONL path");
        generate->callback([o, &run] {
            run = [o] {
                CampaignConfig config = o->config;
                config.strategy = prompt_strategy_from_string(o->strategy);
                return cmd_generate(config, o->out);
            };
        });
    }

    // score
    {
        struct Opts {
            std::string samples;
            std::string reference;
            std::string out;
            int workers;
        };
        auto o = std::make_shared<Opts>();
        o->samples = cfg<std::string>("samples", "samples.jsonl");
        o->reference = cfg<std::string>("reference_endpoint", "");
        o->out = cfg<std::string>("out", "scores.jsonl");
        o->workers = cfg<int>("workers", 8);
        auto* score = app.add_subcommand("score", "compute perplexity/zlib metrics per sample");
        score->add_option("--samples", o->samples, "samples JSONL");
        score->add_option("--reference-endpoint", o->reference,
                          "optional reference model for ppl_reference");
        score->add_option("--out", o->out, "scores JSONL path");
        score->add_option("--workers", o->workers, "worker pool size");
        score->callback([o, &run] {
            run = [o] { return cmd_score(o->samples, o->reference, o->out, o->workers); };
        });
    }

    // rank
    {
        struct Opts {
            std::string scores;
            std::string metric;
            std::string out;
        };
        auto o = std::make_shared<Opts>();
        o->scores = cfg<std::string>("scores", "scores.jsonl");
        o->metric = cfg<std::string>("metric", "ALL");
        o->out = cfg<std::string>("out", "ranked.csv");
        auto* rank_cmd = app.add_subcommand("rank", "order samples by a leakage-suspicion metric");
        rank_cmd->add_option("--scores", o->scores, "scores JSONL");
        rank_cmd->add_option("--metric", o->metric,
                             "PPL_TARGET_ASC | PPL_REFERENCE_ASC | ZLIB_RATIO_DESC | "
                             "REF_TARGET_RATIO_DESC | ALL");
        rank_cmd->add_option("--out", o->out, "ranking CSV path");
        rank_cmd->callback([o, &run] {
            run = [o] { return cmd_rank(o->scores, o->metric, o->out); };
        });
    }

    // index build
    auto* index_cmd = app.add_subcommand("index", "corpus suffix index operations");
    index_cmd->require_subcommand(1);
    {
        struct Opts {
            std::string corpus;
            std::string out;
        };
        auto o = std::make_shared<Opts>();
        o->corpus = cfg<std::string>("corpus", "");
        o->out = cfg<std::string>("out", "corpus.idx");
        auto* build = index_cmd->add_subcommand("build", "build and persist a suffix index");
        build->add_option("--corpus", o->corpus, "corpus directory or JSONL")->required();
        build->add_option("--out", o->out, "index cache path");
        build->callback([o, &run] { run = [o] { return cmd_index_build(o->corpus, o->out); }; });
    }

    // match
    {
        struct Opts {
            std::string index;
            std::string samples;
            size_t min_len;
            bool longest = false;
            bool include_prompt = false;
            std::string out;
        };
        auto o = std::make_shared<Opts>();
        o->index = cfg<std::string>("index", "corpus.idx");
        o->samples = cfg<std::string>("samples", "samples.jsonl");
        o->min_len = cfg<size_t>("min_len", 50);
        o->longest = cfg<bool>("longest", false);
        o->include_prompt = cfg<bool>("include_prompt", false);
        o->out = cfg<std::string>("out", "matches.jsonl");
        auto* match = app.add_subcommand("match", "locate memorized spans of samples in a corpus");
        match->add_option("--index", o->index, "suffix index cache");
        match->add_option("--samples", o->samples, "samples JSONL");
        match->add_option("--min-len", o->min_len, "minimum span length in bytes");
        match->add_flag("--longest", o->longest, "report only the single longest match per sample");
        match->add_flag("--include-prompt", o->include_prompt, "match against prompt+text");
        match->add_option("--out", o->out, "matches JSONL path");
        match->callback([o, &run] {
            run = [o] {
                return cmd_match(o->index, o->samples, o->min_len, o->longest, o->include_prompt,
                                 o->out);
            };
        });
    }

    // pii scan
    auto* pii_cmd = app.add_subcommand("pii", "PII detection");
    pii_cmd->require_subcommand(1);
    {
        struct Opts {
            std::string samples;
            std::string registry;
            std::string secrets;
            std::string out;
            std::string csv;
        };
        auto o = std::make_shared<Opts>();
        o->samples = cfg<std::string>("samples", "samples.jsonl");
        o->registry = cfg<std::string>("registry", "");
        o->secrets = cfg<std::string>("secrets", "");
        o->out = cfg<std::string>("out", "pii_hits.jsonl");
        o->csv = cfg<std::string>("csv", "");
        auto* scan_cmd = pii_cmd->add_subcommand("scan", "scan samples for PII patterns");
        scan_cmd->add_option("--samples", o->samples, "samples JSONL");
        scan_cmd->add_option("--registry", o->registry, "detector registry JSON (default: built-in)");
        scan_cmd->add_option("--secrets", o->secrets,
                             "secrets JSONL; also writes exact-value secret hit mapping");
        scan_cmd->add_option("--out", o->out, "hits JSONL path");
        scan_cmd->add_option("--csv", o->csv, "optional hits CSV path");
        scan_cmd->callback([o, &run] {
            run = [o] { return cmd_pii_scan(o->samples, o->registry, o->secrets, o->out, o->csv); };
        });
    }

    // attribute
    {
        struct Opts {
            std::string samples;
            std::string finetune_index;
            std::string pretrain_index;
            size_t min_len;
            bool no_pii = false;
            std::string out;
            std::string summary_csv;
        };
        auto o = std::make_shared<Opts>();
        o->samples = cfg<std::string>("samples", "samples.jsonl");
        o->finetune_index = cfg<std::string>("finetune_index", "");
        o->pretrain_index = cfg<std::string>("pretrain_index", "");
        o->min_len = cfg<size_t>("min_len", 50);
        o->no_pii = cfg<bool>("no_pii", false);
        o->out = cfg<std::string>("out", "attributed.jsonl");
        o->summary_csv = cfg<std::string>("summary_csv", "");
        auto* attr = app.add_subcommand("attribute", "label spans as fine-tune/pre-train/both/unknown");
        attr->add_option("--samples", o->samples, "samples JSONL");
        attr->add_option("--finetune-index", o->finetune_index, "fine-tuning corpus index")->required();
        attr->add_option("--pretrain-index", o->pretrain_index,
                         "pre-training reference corpus index")->required();
        attr->add_option("--min-len", o->min_len, "minimum attributable span length in bytes");
        attr->add_flag("--no-pii", o->no_pii, "skip the unknown-region PII scan");
        attr->add_option("--out", o->out, "attributed JSONL path");
        attr->add_option("--summary-csv", o->summary_csv, "optional per-sample fractions CSV");
        attr->callback([o, &run] {
            run = [o] {
                return cmd_attribute(o->samples, o->finetune_index, o->pretrain_index, o->min_len,
                                     !o->no_pii, o->out, o->summary_csv);
            };
        });
    }

    // plant
    {
        struct Opts {
            std::string corpus;
            std::string secrets;
            std::string template_text;
            uint64_t seed;
            std::string out_corpus;
            std::string out_manifest;
            std::string out_secrets;
        };
        auto o = std::make_shared<Opts>();
        o->corpus = cfg<std::string>("corpus", "");
        o->secrets = cfg<std::string>("secrets", "");
        o->template_text = cfg<std::string>("template", "{secret}");
        o->seed = cfg<uint64_t>("seed", 0);
        o->out_corpus = cfg<std::string>("out_corpus", "planted.jsonl");
        o->out_manifest = cfg<std::string>("out_manifest", "plant_manifest.json");
        o->out_secrets = cfg<std::string>("out_secrets", "");
        auto* plant_cmd = app.add_subcommand("plant", "insert secrets into a corpus");
        plant_cmd->add_option("--corpus", o->corpus, "corpus directory or JSONL")->required();
        plant_cmd->add_option("--secrets", o->secrets, "secrets JSONL")->required();
        plant_cmd->add_option("--template", o->template_text, "text with one {secret} slot");
        plant_cmd->add_option("--seed", o->seed, "placement seed");
        plant_cmd->add_option("--out-corpus", o->out_corpus, "planted corpus JSONL");
        plant_cmd->add_option("--out-manifest", o->out_manifest, "plant manifest JSON");
        plant_cmd->add_option("--out-secrets", o->out_secrets, "secrets JSONL with placements");
        plant_cmd->callback([o, &run] {
            run = [o] {
                return cmd_plant(o->corpus, o->secrets, o->template_text, o->seed, o->out_corpus,
                                 o->out_manifest, o->out_secrets);
            };
        });
    }

    // scrub
    {
        struct Opts {
            std::string corpus;
            std::string values;
            std::string secrets;
            std::string ids;
            std::string mode;
            std::string out_corpus;
            std::string out_report;
        };
        auto o = std::make_shared<Opts>();
        o->corpus = cfg<std::string>("corpus", "");
        o->values = cfg<std::string>("values", "");
        o->secrets = cfg<std::string>("secrets", "");
        o->ids = cfg<std::string>("ids", "");
        o->mode = cfg<std::string>("mode", "SECRET_ONLY");
        o->out_corpus = cfg<std::string>("out_corpus", "scrubbed.jsonl");
        o->out_report = cfg<std::string>("out_report", "scrub_report.json");
        auto* scrub_cmd = app.add_subcommand("scrub", "exactly unlearn values from a corpus");
        scrub_cmd->add_option("--corpus", o->corpus, "corpus directory or JSONL")->required();
        scrub_cmd->add_option("--values", o->values, "comma-separated literal values");
        scrub_cmd->add_option("--secrets", o->secrets, "secrets JSONL (scrub their values)");
        scrub_cmd->add_option("--ids", o->ids, "comma-separated secret ids to scrub (with --secrets)");
        scrub_cmd->add_option("--mode", o->mode, "SECRET_ONLY | LINE | DOCUMENT");
        scrub_cmd->add_option("--out-corpus", o->out_corpus, "scrubbed corpus JSONL");
        scrub_cmd->add_option("--out-report", o->out_report, "scrub report JSON");
        scrub_cmd->callback([o, &run] {
            run = [o] {
                return cmd_scrub(o->corpus, o->values, o->secrets, o->ids, o->mode, o->out_corpus,
                                 o->out_report);
            };
        });
    }

    // audit run/diff
    auto* audit_cmd = app.add_subcommand("audit", "run extraction rounds and diff them");
    audit_cmd->require_subcommand(1);
    {
        struct Opts {
            std::string corpus;
            std::string secrets;
            CampaignConfig campaign;
            std::string strategy;
            std::string template_text;
            bool train_toylm = false;
            int order;
            double alpha;
            std::string checkpoint;
            std::string endpoint;
            std::string attest;
            std::string parent;
            std::string scrubbed;
            std::string out;
            std::string samples_out;
        };
        auto o = std::make_shared<Opts>();
        o->corpus = cfg<std::string>("corpus", "");
        o->secrets = cfg<std::string>("secrets", "");
        o->campaign = CampaignConfig::from_json(g_config);
        o->strategy = to_string(o->campaign.strategy);
        o->template_text = cfg<std::string>("template", "{secret}");
        o->train_toylm = cfg<bool>("train_toylm", false);
        o->order = cfg<int>("order", 8);
        o->alpha = cfg<double>("alpha", 0.1);
        o->checkpoint = cfg<std::string>("checkpoint", "");
        o->endpoint = cfg<std::string>("endpoint", "");
        o->attest = cfg<std::string>("attest_corpus_digest", "");
        o->parent = cfg<std::string>("parent", "");
        o->scrubbed = cfg<std::string>("scrubbed", "");
        o->out = cfg<std::string>("out", "round.json");
        o->samples_out = cfg<std::string>("samples_out", "");
        auto* audit_run = audit_cmd->add_subcommand("run", "one audit round on a corpus");
        audit_run->add_option("--corpus", o->corpus, "round corpus (the model's training data)")
            ->required();
        audit_run->add_option("--secrets", o->secrets, "secrets JSONL")->required();
        audit_run->add_option("--n", o->campaign.n_samples, "number of samples");
        audit_run->add_option("--len", o->campaign.sample_len_tokens, "tokens per sample");
        audit_run->add_option("--top-k", o->campaign.top_k, "top-k sampling cutoff");
        audit_run->add_option("--temperature", o->campaign.temperature, "sampling temperature");
        audit_run->add_option("--strategy", o->strategy, "BOS or RANDOM_WINDOW");
        audit_run->add_option("--prompt-corpus", o->campaign.prompt_corpus_path, "prompt corpus file");
        audit_run->add_option("--window", o->campaign.window_tokens, "prompt window length");
        audit_run->add_option("--seed", o->campaign.seed, "campaign seed");
        audit_run->add_option("--workers", o->campaign.workers, "worker pool size");
        audit_run->add_option("--template", o->template_text,
                              "planting template (for scoring context)");
        audit_run->add_flag("--train-toylm", o->train_toylm,
                            "train the toy LM on the corpus in-process");
        audit_run->add_option("--order", o->order, "toy LM order (with --train-toylm)");
        audit_run->add_option("--alpha", o->alpha, "toy LM alpha (with --train-toylm)");
        audit_run->add_option("--checkpoint", o->checkpoint,
                              "toy LM checkpoint trained on this corpus");
        audit_run->add_option("--endpoint", o->endpoint, "external model endpoint");
        audit_run->add_option("--attest-corpus-digest", o->attest,
                              "operator attestation that the endpoint model was trained on this corpus");
        audit_run->add_option("--parent", o->parent, "parent round JSON");
        audit_run->add_option("--scrubbed", o->scrubbed, "secret ids scrubbed since the parent round");
        audit_run->add_option("--out", o->out, "round manifest JSON path");
        audit_run->add_option("--samples-out", o->samples_out, "optional samples JSONL path");
        audit_run->callback([o, &run] {
            run = [o] {
                CampaignConfig campaign = o->campaign;
                campaign.strategy = prompt_strategy_from_string(o->strategy);
                campaign.target_endpoint = "set-by-run-round";
                RoundModelSpec spec;
                spec.train_toylm = o->train_toylm;
                spec.toylm_order = o->order;
                spec.toylm_alpha = o->alpha;
                spec.checkpoint_path = o->checkpoint;
                spec.endpoint = o->endpoint;
                spec.attested_corpus_digest = o->attest;
                return cmd_audit_run(o->corpus, o->secrets, campaign, spec, o->template_text,
                                     o->parent, o->scrubbed, o->out, o->samples_out);
            };
        });
    }
    {
        struct Opts {
            std::string prev;
            std::string next;
            std::string out;
            std::string csv;
        };
        auto o = std::make_shared<Opts>();
        o->prev = cfg<std::string>("prev", "");
        o->next = cfg<std::string>("next", "");
        o->out = cfg<std::string>("out", "onion_report.json");
        o->csv = cfg<std::string>("csv", "");
        auto* audit_diff = audit_cmd->add_subcommand("diff", "onion report between two rounds");
        audit_diff->add_option("--prev", o->prev, "parent round JSON")->required();
        audit_diff->add_option("--next", o->next, "child round JSON")->required();
        audit_diff->add_option("--out", o->out, "onion report JSON path");
        audit_diff->add_option("--csv", o->csv, "optional onion report CSV path");
        audit_diff->callback([o, &run] {
            run = [o] { return cmd_audit_diff(o->prev, o->next, o->out, o->csv); };
        });
    }

    // neighborhood
    {
        struct Opts {
            std::string secrets;
            std::string groups;
            std::string provider;
            std::string table;
            int dim;
            int ngram;
            std::string out;
            std::string embeddings_out;
            std::string scatter_csv;
        };
        auto o = std::make_shared<Opts>();
        o->secrets = cfg<std::string>("secrets", "");
        o->groups = cfg<std::string>("groups", "");
        o->provider = cfg<std::string>("provider", "hash");
        o->table = cfg<std::string>("table", "");
        o->dim = cfg<int>("dim", 64);
        o->ngram = cfg<int>("ngram", 3);
        o->out = cfg<std::string>("out", "neighborhood.json");
        o->embeddings_out = cfg<std::string>("embeddings_out", "");
        o->scatter_csv = cfg<std::string>("scatter_csv", "");
        auto* nb = app.add_subcommand("neighborhood", "embedding-space proximity of secret groups");
        nb->add_option("--secrets", o->secrets, "secrets JSONL")->required();
        nb->add_option("--groups", o->groups,
                       "JSON with extracted/onion/safe_sample secret id arrays")->required();
        nb->add_option("--provider", o->provider, "hash | table");
        nb->add_option("--table", o->table, "word-vector table (token then D floats per line)");
        nb->add_option("--dim", o->dim, "hash provider dimension");
        nb->add_option("--ngram", o->ngram, "hash provider n-gram size");
        nb->add_option("--out", o->out, "report JSON path");
        nb->add_option("--embeddings-out", o->embeddings_out, "optional embeddings JSONL");
        nb->add_option("--scatter-csv", o->scatter_csv, "optional 2-D scatter CSV (PCA projection)");
        nb->callback([o, &run] {
            run = [o] {
                return cmd_neighborhood(o->secrets, o->groups, o->provider, o->table, o->dim,
                                        o->ngram, o->out, o->embeddings_out, o->scatter_csv);
            };
        });
    }

    // report scatter
    auto* report_cmd = app.add_subcommand("report", "plot-ready report exports");
    report_cmd->require_subcommand(1);
    {
        struct Opts {
            std::string scores;
            std::string labels;
            std::string out;
        };
        auto o = std::make_shared<Opts>();
        o->scores = cfg<std::string>("scores", "scores.jsonl");
        o->labels = cfg<std::string>("labels", "");
        o->out = cfg<std::string>("out", "scatter.csv");
        auto* scatter = report_cmd->add_subcommand("scatter", "scores -> scatter CSV");
        scatter->add_option("--scores", o->scores, "scores JSONL");
        scatter->add_option("--labels", o->labels,
                            "JSON: {sample_id: label} object or [sample_id] array");
        scatter->add_option("--out", o->out, "CSV path");
        scatter->callback([o, &run] {
            run = [o] { return cmd_report_scatter(o->scores, o->labels, o->out); };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            return app.exit(e); // --help
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        return run ? run() : 2;
    } catch (const UsageError& e) {
        if (g_json_errors) {
            std::cerr << json{{"error", e.what()}}.dump() << "\n";
        } else {
            std::cerr << "usage error: " << e.what() << "\n";
        }
        return 2;
    } catch (const std::exception& e) {
        if (g_json_errors) {
            std::cerr << json{{"error", e.what()}}.dump() << "\n";
        } else {
            std::cerr << "error: " << e.what() << "\n";
        }
        return 1;
    }
}
