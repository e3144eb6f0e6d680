#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "leakaudit/campaign.hpp"
#include "leakaudit/digest.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/io.hpp"
#include "leakaudit/toy_lm.hpp"
#include "leakaudit/toy_lm_server.hpp"

using namespace leakaudit;

namespace {

// Independent reimplementation of the prompt-selection stream used by the
// oracle test below: splitmix64 -> xoshiro256** -> multiply-shift bound.
struct OracleRng {
    uint64_t s[4];
    static uint64_t mix(uint64_t& state) {
        state += 0x9E3779B97F4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    explicit OracleRng(uint64_t seed) {
        uint64_t st = seed;
        for (auto& w : s) w = mix(st);
    }
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t next() {
        const uint64_t result = rotl(s[1] * 5, 7) * 9;
        const uint64_t t = s[1] << 17;
        s[2] ^= s[0]; s[3] ^= s[1]; s[1] ^= s[2]; s[0] ^= s[3]; s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }
    uint64_t bounded(uint64_t n) {
        return static_cast<uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }
};

CampaignConfig toy_config(const std::string& endpoint) {
    CampaignConfig c;
    c.n_samples = 8;
    c.sample_len_tokens = 16;
    c.top_k = 4;
    c.seed = 21;
    c.target_endpoint = endpoint;
    c.workers = 3;
    return c;
}

} // namespace

TEST_CASE("BOS strategy yields empty prompts") {
    CampaignConfig c;
    c.n_samples = 3;
    Xoshiro256ss rng(1);
    const auto prompts = make_prompts(c, "", rng);
    CHECK(prompts == std::vector<std::string>{"", "", ""});
}

TEST_CASE("a corpus of exactly window_tokens words has a single window") {
    CampaignConfig c;
    c.n_samples = 5;
    c.strategy = PromptStrategy::kRandomWindow;
    c.prompt_corpus_path = "unused";
    c.window_tokens = 10;
    Xoshiro256ss rng(1);
    const auto prompts = make_prompts(c, "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10", rng);
    for (const auto& p : prompts) CHECK(p == "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10");
}

TEST_CASE("window selection equals the PRNG-stream oracle on a 100-word corpus") {
    std::string corpus;
    std::vector<std::string> words;
    for (int i = 0; i < 100; ++i) {
        words.push_back("word" + std::to_string(i));
        if (i > 0) corpus += ' ';
        corpus += words.back();
    }
    CampaignConfig c;
    c.n_samples = 40;
    c.strategy = PromptStrategy::kRandomWindow;
    c.prompt_corpus_path = "unused";
    c.window_tokens = 10;
    c.seed = 77;

    Xoshiro256ss rng(c.prompt_stream_seed());
    const auto prompts = make_prompts(c, corpus, rng);

    // Oracle: enumerate all 91 aligned windows, index them with the same
    // derived stream.
    std::vector<std::string> windows;
    for (size_t start = 0; start + 10 <= words.size(); ++start) {
        std::string w = words[start];
        for (size_t k = 1; k < 10; ++k) w += " " + words[start + k];
        windows.push_back(w);
    }
    CHECK(windows.size() == 91);
    uint64_t state = c.seed + (0xFFFFFFFF00000000ull + 1) * 0x9E3779B97F4A7C15ull;
    OracleRng oracle(OracleRng::mix(state));
    for (size_t i = 0; i < prompts.size(); ++i) {
        CHECK(prompts[i] == windows[oracle.bounded(windows.size())]);
    }
}

TEST_CASE("window strategy rejects a too-small corpus") {
    CampaignConfig c;
    c.n_samples = 1;
    c.strategy = PromptStrategy::kRandomWindow;
    c.prompt_corpus_path = "unused";
    c.window_tokens = 10;
    Xoshiro256ss rng(1);
    CHECK_THROWS_AS(make_prompts(c, "only three words", rng), Error);
}

TEST_CASE("campaigns against the toy server are reproducible and complete") {
    toylm::ToyLmServer server(toylm::NGramModel::train(
        {"the quick brown fox jumps over the lazy dog", "pack my box with five dozen jugs"}, 5,
        0.2));
    const auto config = toy_config(server.url());

    const CampaignResult a = run_campaign(config);
    const CampaignResult b = run_campaign(config);

    REQUIRE(a.samples.size() == 8);
    CHECK_FALSE(a.manifest.incomplete);
    CHECK(a.manifest.model_id.substr(0, 6) == "toylm-");
    CHECK(a.manifest.server_deterministic.has_value());

    // Byte-identical sample files for equal seeds and configs.
    const auto path_a = std::filesystem::temp_directory_path() / "leakaudit_samples_a.jsonl";
    const auto path_b = std::filesystem::temp_directory_path() / "leakaudit_samples_b.jsonl";
    write_samples_jsonl(path_a.string(), a.samples);
    write_samples_jsonl(path_b.string(), b.samples);
    CHECK(sha256_file_hex(path_a.string()) == sha256_file_hex(path_b.string()));
    std::filesystem::remove(path_a);
    std::filesystem::remove(path_b);

    for (const auto& s : a.samples) {
        CHECK(s.tokens.size() == s.logprobs.size());
        CHECK(s.tokens.size() <= 16);
        std::string joined;
        for (const auto& t : s.tokens) joined += t;
        CHECK(s.text == joined);
    }
    // Samples are ordered by index regardless of worker completion order.
    for (size_t i = 0; i < a.samples.size(); ++i) {
        char suffix[8];
        std::snprintf(suffix, sizeof(suffix), "%06zu", i);
        const std::string& id = a.samples[i].sample_id;
        CHECK(id.substr(id.size() - 6) == suffix);
    }
}

TEST_CASE("greedy sampling on a memorizing model produces flagged duplicates") {
    toylm::ToyLmServer server(toylm::NGramModel::train({"abababababababab"}, 3, 0.1));
    CampaignConfig config = toy_config(server.url());
    config.top_k = 1;
    config.n_samples = 4;
    const CampaignResult result = run_campaign(config);
    REQUIRE(result.samples.size() == 4);
    // All greedy BOS samples are identical; later ones point at the first.
    CHECK_FALSE(result.samples[0].duplicate_of.has_value());
    for (size_t i = 1; i < result.samples.size(); ++i) {
        REQUIRE(result.samples[i].duplicate_of.has_value());
        CHECK(*result.samples[i].duplicate_of == result.samples[0].sample_id);
        CHECK(result.samples[i].text == result.samples[0].text);
    }
    // Greedy memorized loop: text continues "ababab...".
    CHECK(result.samples[0].text.substr(0, 6) == "ababab");
}

TEST_CASE("a fatal gateway error yields partial results marked incomplete") {
    CampaignConfig config = toy_config("http://127.0.0.1:1"); // nothing listens
    const CampaignResult result = run_campaign(config);
    CHECK(result.manifest.incomplete);
    CHECK_FALSE(result.manifest.error.empty());
    CHECK(result.samples.size() < 8);
}

TEST_CASE("sample JSONL round-trips") {
    Sample s;
    s.sample_id = "c1-000001";
    s.strategy = "BOS";
    s.prompt = "";
    s.tokens = {"a", "b"};
    s.logprobs = {-0.5, -1.25};
    s.text = "ab";
    s.duplicate_of = "c1-000000";
    const auto path = std::filesystem::temp_directory_path() / "leakaudit_samples_rt.jsonl";
    write_samples_jsonl(path.string(), {s});
    const auto loaded = read_samples_jsonl(path.string());
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].sample_id == s.sample_id);
    CHECK(loaded[0].tokens == s.tokens);
    CHECK(loaded[0].logprobs == s.logprobs);
    CHECK(loaded[0].duplicate_of == s.duplicate_of);
    std::filesystem::remove(path);
}

TEST_CASE("config digest ignores deployment fields") {
    CampaignConfig a = toy_config("http://host-a:1");
    CampaignConfig b = toy_config("http://host-b:2");
    b.workers = 1;
    CHECK(a.semantic_digest() == b.semantic_digest());
    b.seed = a.seed + 1;
    CHECK(a.semantic_digest() != b.semantic_digest());
}

TEST_CASE("config validation catches missing prompt corpus") {
    CampaignConfig c = toy_config("http://x:1");
    c.strategy = PromptStrategy::kRandomWindow;
    CHECK_THROWS_AS(c.validate(), UsageError);
}
