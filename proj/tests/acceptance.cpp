// Acceptance suite: one pass/fail line per criterion. Run with no arguments
// for all criteria, or pass criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include <zlib.h>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "leakaudit/attribution.hpp"
#include "leakaudit/campaign.hpp"
#include "leakaudit/corpus.hpp"
#include "leakaudit/digest.hpp"
#include "leakaudit/gateway.hpp"
#include "leakaudit/io.hpp"
#include "leakaudit/neighborhood.hpp"
#include "leakaudit/pii.hpp"
#include "leakaudit/rng.hpp"
#include "leakaudit/scoring.hpp"
#include "leakaudit/secrets.hpp"
#include "leakaudit/suffix_index.hpp"
#include "leakaudit/toy_lm.hpp"
#include "leakaudit/toy_lm_server.hpp"
#include "leakaudit/unlearning.hpp"

namespace fs = std::filesystem;
using namespace leakaudit;

namespace {

// ---------------------------------------------------------------------------
// Harness

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& what) {
    if (!condition) throw Failure(what);
}

std::string g_detail; // set by criteria for the summary line

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path work_dir() {
    const auto dir = fs::temp_directory_path() / "leakaudit_acceptance";
    fs::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------------------
// Oracles (independent of the library implementation paths they check)

std::vector<uint32_t> naive_suffix_array(std::string_view text) {
    std::vector<uint32_t> sa(text.size());
    std::iota(sa.begin(), sa.end(), 0);
    std::sort(sa.begin(), sa.end(),
              [&](uint32_t a, uint32_t b) { return text.substr(a) < text.substr(b); });
    return sa;
}

size_t lcs_oracle(std::string_view a, std::string_view b) {
    std::vector<size_t> prev(b.size() + 1, 0);
    std::vector<size_t> cur(b.size() + 1, 0);
    size_t best = 0;
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
            best = std::max(best, cur[j]);
        }
        std::swap(prev, cur);
    }
    return best;
}

void jacobi_eigen(Eigen::MatrixXd a, Eigen::MatrixXd& vectors, Eigen::VectorXd& values) {
    const int n = static_cast<int>(a.rows());
    vectors = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n, n);
                rot(p, p) = c;
                rot(q, q) = c;
                rot(p, q) = s;
                rot(q, p) = -s;
                a = rot.transpose() * a * rot;
                vectors = vectors * rot;
            }
        }
    }
    values = a.diagonal();
}

std::string random_text(Xoshiro256ss& rng, size_t len, std::string_view alphabet) {
    std::string out;
    out.reserve(len);
    for (size_t i = 0; i < len; ++i) out.push_back(alphabet[rng.bounded(alphabet.size())]);
    return out;
}

// Spearman rank correlation with midranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        const size_t n = v.size();
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (size_t k = i; k <= j; ++k) r[order[k]] = mid;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const size_t n = x.size();
    double mx = 0.0;
    double my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double cov = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx) * (rx[i] - mx);
        vy += (ry[i] - my) * (ry[i] - my);
    }
    if (vx == 0.0 || vy == 0.0) return 0.0;
    return cov / std::sqrt(vx * vy);
}

// ---------------------------------------------------------------------------
// Constructed onion scenario (criteria 2 and 9)
//
// Secret A (x30) and secret B (x3) share the "jane." prefix and the
// "oe@corp.example" suffix, diverging at one byte. The support documents
// keep the shared n-gram windows heavily counted in both rounds (they never
// cross the divergence byte: "email: jane." ends each document), so
// scrubbing A moves B's perplexity mainly through the freed-up divergence
// byte, downwards. The same documents steer the greedy walk from
// "...example " back into "email: jane." so the full secret value appears in
// the generated continuation.

constexpr const char* kSecretA = "jane.doe@corp.example";
constexpr const char* kSecretB = "jane.roe@corp.example";
constexpr uint64_t kOnionPlantSeed = 20240;
constexpr uint64_t kOnionCampaignSeed = 31337;

struct OnionScenario {
    Corpus planted;
    Corpus scrubbed;
    std::vector<SecretRecord> secrets;
    std::string prompt_path;
    CampaignConfig campaign;
};

OnionScenario build_onion_scenario() {
    std::vector<Document> docs;
    for (int i = 0; i < 200; ++i) {
        docs.push_back({"support-" + std::to_string(i), "moe@corp.example email: jane."});
    }
    const std::vector<std::string> vocab = {"alder", "birch",  "cedar", "elmwood", "firtree",
                                            "hazel", "oakmoss", "pinecone", "rowan", "yewbark"};
    Xoshiro256ss rng(2718);
    for (int d = 0; d < 4800; ++d) {
        std::string text;
        for (int w = 0; w < 12; ++w) {
            if (w > 0) text += ' ';
            text += vocab[rng.bounded(vocab.size())];
        }
        docs.push_back({"filler-" + std::to_string(d), std::move(text)});
    }

    OnionScenario s;
    SecretRecord a;
    a.id = "A";
    a.value = kSecretA;
    a.kind = "EMAIL";
    a.duplication = 30;
    SecretRecord b;
    b.id = "B";
    b.value = kSecretB;
    b.kind = "EMAIL";
    b.duplication = 3;
    s.secrets = {a, b};

    const Corpus base = Corpus::from_documents(std::move(docs));
    auto [planted, manifest] = plant(base, s.secrets, "email: {secret}", kOnionPlantSeed);
    s.planted = std::move(planted);
    auto [scrubbed, report] = scrub(s.planted, {kSecretA}, ScrubMode::kSecretOnly);
    s.scrubbed = std::move(scrubbed);

    const auto prompt_file = work_dir() / "onion_prompt.txt";
    write_file(prompt_file.string(), "email: jane.");
    s.prompt_path = prompt_file.string();

    s.campaign.n_samples = 50;
    s.campaign.sample_len_tokens = 64;
    s.campaign.top_k = 1;
    s.campaign.temperature = 1.0;
    s.campaign.strategy = PromptStrategy::kRandomWindow;
    s.campaign.prompt_corpus_path = s.prompt_path;
    s.campaign.window_tokens = 2;
    s.campaign.seed = kOnionCampaignSeed;
    s.campaign.workers = 4;
    s.campaign.target_endpoint = "set-by-run_round";
    return s;
}

struct OnionRunArtifacts {
    AuditRound round0;
    AuditRound round1;
    OnionReport report;
    std::vector<Sample> samples0;
    std::vector<Sample> samples1;
};

OnionRunArtifacts run_onion_scenario(const OnionScenario& s) {
    RoundModelSpec model;
    model.train_toylm = true;
    model.toylm_order = 8;
    model.toylm_alpha = 0.1;

    OnionRunArtifacts out;
    RoundResult r0 = run_round(s.planted, model, s.campaign, s.secrets, "email: ");
    RoundResult r1 =
        run_round(s.scrubbed, model, s.campaign, s.secrets, "email: ", &r0.round, {"A"});
    out.report = diff(r0.round, r1.round);
    out.round0 = std::move(r0.round);
    out.round1 = std::move(r1.round);
    out.samples0 = std::move(r0.samples);
    out.samples1 = std::move(r1.samples);
    return out;
}

// ---------------------------------------------------------------------------
// Statistical extraction-vs-duplication scenario (criteria 3 and 9)

constexpr int kBuckets[] = {1, 2, 4, 8, 16, 32};
constexpr uint64_t kStatPlantSeed = 99;

struct StatScenario {
    Corpus planted;
    std::vector<SecretRecord> secrets;
    std::string prompt_path;
};

StatScenario build_stat_scenario() {
    // ~1 MiB of small-vocabulary filler: dense word-pair statistics keep the
    // top-k walk on-corpus so it reaches planted sites.
    const std::vector<std::string> vocab = {"meadow", "forest",  "stream", "pebble", "willow",
                                            "harbor", "lantern", "saddle", "timber", "orchard"};
    Xoshiro256ss rng(424242);
    std::vector<Document> docs;
    for (int d = 0; d < 100; ++d) {
        std::string text;
        for (int w = 0; w < 1700; ++w) {
            if (w > 0) text += ' ';
            text += vocab[rng.bounded(vocab.size())];
        }
        docs.push_back({"doc-" + std::to_string(d), std::move(text)});
    }

    StatScenario s;
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
    for (int i = 0; i < 120; ++i) {
        SecretRecord sec;
        sec.id = "s" + std::to_string(i);
        sec.value = std::string(1, alphabet[static_cast<size_t>(i) % 36]) +
                    std::string(1, alphabet[static_cast<size_t>(i) / 36]) + "@x.io";
        sec.kind = "EMAIL";
        sec.duplication = kBuckets[i / 20];
        s.secrets.push_back(std::move(sec));
    }

    const Corpus base = Corpus::from_documents(std::move(docs));
    auto [planted, manifest] = plant(base, s.secrets, "contact {secret}", kStatPlantSeed);
    s.planted = std::move(planted);

    std::string prompt_corpus;
    for (const auto& doc : s.planted.documents()) {
        prompt_corpus += doc.text;
        prompt_corpus += '\n';
    }
    const auto prompt_file = work_dir() / "stat_prompt.txt";
    write_file(prompt_file.string(), prompt_corpus);
    s.prompt_path = prompt_file.string();
    return s;
}

CampaignConfig stat_campaign(const StatScenario& s, uint64_t seed, const std::string& endpoint) {
    CampaignConfig c;
    c.n_samples = 2000;
    c.sample_len_tokens = 256;
    c.top_k = 40;
    c.temperature = 1.0;
    c.strategy = PromptStrategy::kRandomWindow;
    c.prompt_corpus_path = s.prompt_path;
    c.window_tokens = 10;
    c.seed = seed;
    c.workers = 8;
    c.target_endpoint = endpoint;
    return c;
}

// ---------------------------------------------------------------------------
// Criteria

void criterion1_reference_fixtures() {
    // The GPT-2 figures (44 of 6523 planted email addresses extracted, then
    // 20 onion points after exact unlearning) require fine-tuning an
    // external model and are NOT reproduced at desk scale. They are kept as
    // reference round manifests; the toy-scale scenarios below substitute.
    const std::string dir = std::string(LEAKAUDIT_FIXTURE_DIR) + "/reference_rounds";
    const AuditRound round0 = AuditRound::load(dir + "/round0.json");
    const AuditRound round1 = AuditRound::load(dir + "/round1.json");
    require(round0.extracted.size() == 44, "reference round 0 must record 44 extracted secrets");
    require(round1.scrubbed_since_parent.size() == 44, "round 1 must scrub the 44");
    const OnionReport report = diff(round0, round1);
    require(report.new_leaks.size() == 20, "reference diff must report 20 onion points");
    require(report.healed.size() == 44, "reference diff must report 44 healed");
    const auto j0 = nlohmann::json::parse(read_file(dir + "/round0.json"));
    require(j0.value("planted_secret_count", 0) == 6523,
            "reference round 0 must record 6523 planted secrets");
    g_detail = "6523 planted / 44 extracted / 20 onion preserved as fixtures; "
               "not desk-scale reproducible (external fine-tuning required)";
}

void criterion2_constructed_onion() {
    const auto t0 = std::chrono::steady_clock::now();
    const OnionScenario scenario = build_onion_scenario();
    const OnionRunArtifacts run = run_onion_scenario(scenario);

    require(run.round0.extracted == std::set<std::string>{"A"},
            "round 0 must extract exactly {A}");
    require(run.round1.extracted == std::set<std::string>{"B"},
            "round 1 must extract exactly {B}");
    require(run.report.new_leaks == std::vector<std::string>{"B"}, "new_leaks must be {B}");
    require(run.report.healed == std::vector<std::string>{"A"}, "healed must be {A}");
    const double ppl_b_before = run.round0.score_summary.at("B");
    const double ppl_b_after = run.round1.score_summary.at("B");
    require(ppl_b_after < ppl_b_before,
            "ppl(B) must decrease after unlearning A (got " + std::to_string(ppl_b_before) +
                " -> " + std::to_string(ppl_b_after) + ")");
    const double elapsed = seconds_since(t0);
    require(elapsed < 10.0, "runtime must stay under 10 s (got " + std::to_string(elapsed) + ")");

    char buf[160];
    std::snprintf(buf, sizeof(buf), "round0={A}, round1={B}, ppl(B) %.3f -> %.3f, %.1fs",
                  ppl_b_before, ppl_b_after, elapsed);
    g_detail = buf;
}

void criterion3_extraction_vs_duplication() {
    const auto t0 = std::chrono::steady_clock::now();
    const StatScenario scenario = build_stat_scenario();
    require(scenario.planted.total_bytes() >= (1u << 20), "corpus must be at least 1 MiB");

    toylm::ToyLmServer server(toylm::NGramModel::train(scenario.planted.texts(), 8, 0.1));

    int positive_seeds = 0;
    std::vector<double> rhos;
    double extracted_ppl_sum = 0.0;
    size_t extracted_ppl_n = 0;
    double all_ppl_sum = 0.0;
    size_t all_ppl_n = 0;

    for (uint64_t seed = 201; seed <= 205; ++seed) {
        const CampaignResult result =
            run_campaign(stat_campaign(scenario, seed, server.url()));
        require(!result.manifest.incomplete, "campaign must complete");
        const auto extracted = detect_extracted(result.samples, scenario.secrets);

        std::vector<double> dup;
        std::vector<double> rate;
        for (size_t b = 0; b < std::size(kBuckets); ++b) {
            int hits = 0;
            for (size_t i = b * 20; i < (b + 1) * 20; ++i) {
                hits += extracted.count(scenario.secrets[i].id) ? 1 : 0;
            }
            dup.push_back(static_cast<double>(kBuckets[b]));
            rate.push_back(hits / 20.0);
        }
        const double rho = spearman(dup, rate);
        rhos.push_back(rho);
        if (rho > 0.0) ++positive_seeds;

        // Leakage-suspicion side check: samples carrying an extracted secret
        // have lower target perplexity than the average sample.
        const auto records = score_samples(result.samples);
        for (size_t i = 0; i < result.samples.size(); ++i) {
            if (!records[i].complete) continue;
            all_ppl_sum += records[i].ppl_target;
            all_ppl_n += 1;
            for (const auto& sec : scenario.secrets) {
                if (result.samples[i].text.find(sec.value) != std::string::npos) {
                    extracted_ppl_sum += records[i].ppl_target;
                    extracted_ppl_n += 1;
                    break;
                }
            }
        }
    }
    require(positive_seeds >= 4, "Spearman > 0 required in at least 4 of 5 seeds (got " +
                                     std::to_string(positive_seeds) + ")");
    require(extracted_ppl_n > 0, "at least one secret-bearing sample expected across seeds");
    require(extracted_ppl_sum / extracted_ppl_n < all_ppl_sum / all_ppl_n,
            "secret-bearing samples must sit below the mean target perplexity");
    const double elapsed = seconds_since(t0);
    require(elapsed < 120.0, "runtime must stay under 2 min (got " + std::to_string(elapsed) + ")");

    std::ostringstream detail;
    detail << "rho per seed:";
    for (double r : rhos) detail << " " << std::fixed << std::setprecision(2) << r;
    detail << ", " << std::setprecision(0) << elapsed << "s";
    g_detail = detail.str();
}

void criterion4_metric_oracles() {
    // Perplexity of constant-logprob sequences, exact.
    const double lp8 = std::log(1.0 / 8.0);
    for (size_t t : {1u, 2u, 5u, 32u}) {
        const std::vector<double> lps(t, lp8);
        require(std::abs(perplexity(lps) - 8.0) <= 1e-12, "uniform ln(1/8) perplexity must be 8");
    }
    require(perplexity(std::vector<double>(4, 0.0)) == 1.0, "certain prediction ppl must be 1");

    // zlib entropy against the local reference compressor, exact.
    Xoshiro256ss rng(7);
    for (int i = 0; i < 100; ++i) {
        const std::string s = random_text(rng, 32 + rng.bounded(1024), "abcdefgh \n0189");
        uLong bound = compressBound(static_cast<uLong>(s.size()));
        std::vector<Bytef> buf(bound);
        uLongf out_len = bound;
        require(compress2(buf.data(), &out_len, reinterpret_cast<const Bytef*>(s.data()),
                          static_cast<uLong>(s.size()), 6) == Z_OK,
                "reference compressor failed");
        require(zlib_entropy(s) == out_len, "zlib_entropy must equal the reference compressor");
    }

    // Ratio spot check: mean NLL 2 and 100 compressed bytes -> exactly 50.
    require(zlib_logppl_ratio(100, 2.0) == 50.0, "ratio spot check must be exact");
    g_detail = "perplexity exact, 100/100 zlib oracle matches (" + compressor_version() +
               "), ratio spot check exact";
}

void criterion5_index_oracles() {
    Xoshiro256ss rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const std::string text = random_text(rng, 1 + rng.bounded(4096), "abcd");
        require(build_suffix_array(text) == naive_suffix_array(text),
                "suffix array must equal the naive oracle");
    }
    for (int trial = 0; trial < 200; ++trial) {
        const std::string corpus_text = random_text(rng, 40 + rng.bounded(300), "abc");
        const std::string query = random_text(rng, 1 + rng.bounded(120), "abc");
        const auto idx = SuffixIndex::build(Corpus::from_documents({{"d", corpus_text}}));
        const auto span = idx.longest_match(query, "q");
        const size_t expected = lcs_oracle(corpus_text, query);
        require((span.has_value() ? span->length : 0) == expected,
                "longest_match must equal the DP oracle");
    }
    {
        const std::string text = random_text(rng, 4096, "abcde");
        const auto idx = SuffixIndex::build(Corpus::from_documents({{"d", text}}));
        for (int trial = 0; trial < 1000; ++trial) {
            std::string needle;
            if (rng.bounded(2) == 0) {
                needle = text.substr(rng.bounded(text.size()), 1 + rng.bounded(12));
            } else {
                needle = random_text(rng, 1 + rng.bounded(8), "abcdef");
            }
            require(idx.contains(needle) == (text.find(needle) != std::string::npos),
                    "contains must agree with the naive scan");
        }
    }
    // Perf smoke: 1 MiB corpus, 256-byte queries, median under 10 ms.
    const std::string big = random_text(rng, 1 << 20, "abcdefghijklmnop qrstuvwxyz");
    const auto idx = SuffixIndex::build(Corpus::from_documents({{"big", big}}));
    std::vector<double> times;
    for (int trial = 0; trial < 15; ++trial) {
        std::string query = big.substr(rng.bounded(big.size() - 256), 256);
        query[17] = '!';
        const auto t0 = std::chrono::steady_clock::now();
        (void)idx.longest_match(query, "q");
        times.push_back(seconds_since(t0) * 1e3);
    }
    std::sort(times.begin(), times.end());
    require(times[times.size() / 2] < 10.0, "longest_match median must be under 10 ms");
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "SA oracle 100/100, DP oracle 200/200, contains 1000/1000, median %.2f ms",
                  times[times.size() / 2]);
    g_detail = buf;
}

void criterion6_pii_fixture() {
    const std::string text = read_file(std::string(LEAKAUDIT_FIXTURE_DIR) + "/pii_fixture.txt");
    Sample fixture;
    fixture.sample_id = "fixture";
    fixture.text = text;
    const auto hits = scan({fixture}, DetectorRegistry::defaults());
    std::map<std::string, int> counts;
    for (const auto& h : hits) ++counts[h.kind_name];
    require(counts["EMAIL"] == 10, "fixture must yield 10 EMAIL hits");
    require(counts["PHONE"] == 5, "fixture must yield 5 PHONE hits");
    require(counts["URL"] == 3, "fixture must yield 3 URL hits");
    require(counts["HANDLE"] == 1, "fixture must yield 1 HANDLE hit");
    require(counts["PMID"] == 1, "fixture must yield 1 PMID hit");

    // Near-miss secret values stay unmapped.
    std::vector<SecretRecord> near_misses(2);
    near_misses[0].id = "n0";
    near_misses[0].value = "jane.doe@corp.exampl";  // one char short
    near_misses[1].id = "n1";
    near_misses[1].value = "zoe@zoo.exemple";       // one char off
    require(extract_secret_hits(hits, near_misses).empty(),
            "near-miss secrets must produce no mappings");
    g_detail = "counts (10,5,3,1,1) exact; near-miss mappings empty";
}

void criterion7_attribution() {
    // Disjoint synthetic corpora (letters a..m vs n..z).
    Xoshiro256ss rng(2024);
    auto words_from = [&](std::string_view alphabet, size_t n_words) {
        std::string out;
        for (size_t w = 0; w < n_words; ++w) {
            if (w > 0) out += ' ';
            const size_t len = 3 + rng.bounded(6);
            for (size_t i = 0; i < len; ++i) out += alphabet[rng.bounded(alphabet.size())];
        }
        return out;
    };
    const Corpus pretrain = Corpus::from_documents({{"p0", words_from("abcdefghijklm", 150)},
                                                    {"p1", words_from("abcdefghijklm", 150)}});
    const Corpus finetune = Corpus::from_documents({{"f0", words_from("nopqrstuvwxyz", 150)},
                                                    {"f1", words_from("nopqrstuvwxyz", 150)}});
    const auto pre_idx = SuffixIndex::build(pretrain);
    const auto ft_idx = SuffixIndex::build(finetune);

    // The corpora share only the space byte; slicing so the junction is
    // letter-to-letter keeps spans from straddling it, and capping the
    // pretrain part at the finetune part's length keeps every pretrain byte
    // in the first half.
    auto slice = [&](const Corpus& corpus) {
        std::string s = corpus.documents()[rng.bounded(2)].text.substr(rng.bounded(500), 120);
        while (!s.empty() && s.front() == ' ') s.erase(s.begin());
        while (!s.empty() && s.back() == ' ') s.pop_back();
        return s;
    };
    size_t spans_total = 0;
    size_t spans_correct = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::string pre_part = slice(pretrain);
        const std::string ft_part = slice(finetune);
        if (pre_part.size() > ft_part.size()) pre_part.resize(ft_part.size());
        while (!pre_part.empty() && pre_part.back() == ' ') pre_part.pop_back();
        Sample s;
        s.sample_id = "t" + std::to_string(trial);
        s.text = pre_part + ft_part; // "pre-training first" structure
        const auto rows = attribute({s}, ft_idx, pre_idx, 32);
        require(rows.size() == 1 && !rows[0].spans.empty(), "sample must attribute");
        for (const auto& span : rows[0].spans) {
            ++spans_total;
            const bool is_pre = span.end <= pre_part.size();
            const bool is_ft = span.begin >= pre_part.size();
            if ((is_pre && span.label == AttributionLabel::kPretrainRef) ||
                (is_ft && span.label == AttributionLabel::kFinetune)) {
                ++spans_correct;
            }
        }
        // All pretrain bytes in the first half.
        const auto& profile = rows[0].pretrain_quartile_profile;
        require(std::abs(profile[0] + profile[1] - 1.0) < 1e-12,
                "pretrain bytes must all sit in the first half");
        require(profile[2] == 0.0 && profile[3] == 0.0, "no pretrain bytes in the second half");
    }
    require(spans_total > 0 && spans_correct == spans_total,
            "span labels must be 100% correct on disjoint corpora");
    g_detail = std::to_string(spans_correct) + "/" + std::to_string(spans_total) +
               " spans labeled correctly; pretrain profile fully in first half";
}

void criterion8_neighborhood() {
    // Two-cluster fixture.
    Xoshiro256ss rng(99);
    const int dim = 16;
    auto draw_near = [&](int axis) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
        v[axis] = 1.0;
        for (int i = 0; i < dim; ++i) v[i] += 0.05 * (rng.next_double() - 0.5);
        return v;
    };
    std::vector<SecretEmbedding> extracted;
    std::vector<SecretEmbedding> onion;
    std::vector<SecretEmbedding> safe;
    for (int i = 0; i < 12; ++i) extracted.push_back({"e" + std::to_string(i), draw_near(0), 1.0});
    for (int i = 0; i < 6; ++i) onion.push_back({"o" + std::to_string(i), draw_near(0), 1.0});
    for (int i = 0; i < 12; ++i) safe.push_back({"s" + std::to_string(i), draw_near(7), 1.0});
    const auto report = neighborhood_stats(extracted, onion, safe);
    require(report.proximity_ratio < 0.5,
            "two-cluster proximity ratio must be below 0.5 (got " +
                std::to_string(report.proximity_ratio) + ")");

    // Reconstruction error against the Jacobi eigensolver oracle.
    const int n = 10;
    const int d5 = 5;
    Eigen::MatrixXd x(n, d5);
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < d5; ++d) x(i, d) = rng.next_double() * 6 - 3;
    }
    Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;
    jacobi_eigen(centered.transpose() * centered, vectors, values);
    int i1 = 0;
    int i2 = 1;
    for (int i = 0; i < d5; ++i) {
        if (values[i] > values[i1]) {
            i2 = i1;
            i1 = i;
        } else if (i != i1 && values[i] > values[i2]) {
            i2 = i;
        }
    }
    Eigen::MatrixXd basis(d5, 2);
    basis.col(0) = vectors.col(i1);
    basis.col(1) = vectors.col(i2);
    const double oracle_error = (centered - centered * basis * basis.transpose()).norm();
    std::vector<Eigen::VectorXd> points;
    for (int i = 0; i < n; ++i) points.push_back(x.row(i));
    const auto proj = project_2d(points);
    Eigen::MatrixXd coords(n, 2);
    for (int i = 0; i < n; ++i) coords.row(i) = proj.points[static_cast<size_t>(i)];
    const double impl_error = std::sqrt(centered.squaredNorm() - coords.squaredNorm());
    require(std::abs(impl_error - oracle_error) <= 1e-6 * std::max(1.0, oracle_error),
            "top-2 reconstruction error must match the eigensolver oracle");

    // Full-rank 2-D input: projection preserves pairwise distances.
    std::vector<Eigen::VectorXd> flat;
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd v(2);
        v << rng.next_double() * 4 - 2, rng.next_double() * 4 - 2;
        flat.push_back(v);
    }
    const auto proj2 = project_2d(flat);
    for (size_t i = 0; i < flat.size(); ++i) {
        for (size_t j = i + 1; j < flat.size(); ++j) {
            const double before = (flat[i] - flat[j]).norm();
            const double after = (proj2.points[i] - proj2.points[j]).norm();
            require(std::abs(before - after) <= 1e-9, "2-D projection must be an isometry");
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "proximity_ratio %.3f, reconstruction |%.2e| matches oracle",
                  report.proximity_ratio, impl_error - oracle_error);
    g_detail = buf;
}

void criterion9_reproducibility() {
    // Criterion 2 pipeline twice, byte-identical artifacts.
    const OnionScenario scenario = build_onion_scenario();
    const OnionRunArtifacts a = run_onion_scenario(scenario);
    const OnionRunArtifacts b = run_onion_scenario(scenario);

    const auto dir = work_dir();
    auto dump_samples = [&](const std::vector<Sample>& samples, const std::string& name) {
        const auto path = dir / name;
        write_samples_jsonl(path.string(), samples);
        return sha256_file_hex(path.string());
    };
    require(dump_samples(a.samples0, "r0a.jsonl") == dump_samples(b.samples0, "r0b.jsonl"),
            "round-0 samples JSONL must be byte-identical");
    require(dump_samples(a.samples1, "r1a.jsonl") == dump_samples(b.samples1, "r1b.jsonl"),
            "round-1 samples JSONL must be byte-identical");

    auto manifest_without_timestamps = [](const AuditRound& r) {
        nlohmann::json j = r.to_json();
        j.erase("started_at");
        j.erase("finished_at");
        return j.dump();
    };
    require(manifest_without_timestamps(a.round0) == manifest_without_timestamps(b.round0),
            "round-0 manifests must match minus timestamps");
    require(manifest_without_timestamps(a.round1) == manifest_without_timestamps(b.round1),
            "round-1 manifests must match minus timestamps");
    require(a.report.to_json().dump() == b.report.to_json().dump(),
            "onion reports must be byte-identical");

    // One criterion-3 campaign twice with the same seed.
    const StatScenario stat = build_stat_scenario();
    toylm::ToyLmServer server(toylm::NGramModel::train(stat.planted.texts(), 8, 0.1));
    const CampaignResult c1 = run_campaign(stat_campaign(stat, 201, server.url()));
    const CampaignResult c2 = run_campaign(stat_campaign(stat, 201, server.url()));
    require(dump_samples(c1.samples, "stat_a.jsonl") == dump_samples(c2.samples, "stat_b.jsonl"),
            "campaign samples JSONL must be byte-identical across reruns");
    g_detail = "onion rounds, manifests (minus timestamps), reports, and campaign JSONL all "
               "byte-identical";
}

struct Criterion {
    int id;
    const char* name;
    std::function<void()> body;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "paper-scale figures preserved as reference fixtures", criterion1_reference_fixtures},
        {2, "constructed onion effect (deterministic)", criterion2_constructed_onion},
        {3, "statistical extraction vs duplication", criterion3_extraction_vs_duplication},
        {4, "metric oracles (perplexity, zlib, ratio)", criterion4_metric_oracles},
        {5, "index oracles and query latency", criterion5_index_oracles},
        {6, "PII fixture counts and near-miss mapping", criterion6_pii_fixture},
        {7, "attribution correctness on disjoint corpora", criterion7_attribution},
        {8, "neighborhood statistics and 2-D projection", criterion8_neighborhood},
        {9, "seeded reruns are byte-identical", criterion9_reproducibility},
    };

    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (!selected.empty() && !selected.count(criterion.id)) continue;
        g_detail.clear();
        try {
            criterion.body();
            std::printf("[PASS] criterion %d: %s%s%s\n", criterion.id, criterion.name,
                        g_detail.empty() ? "" : " -- ", g_detail.c_str());
        } catch (const std::exception& e) {
            ++failures;
            std::printf("[FAIL] criterion %d: %s -- %s\n", criterion.id, criterion.name, e.what());
        }
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
