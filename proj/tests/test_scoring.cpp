#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include <zlib.h>

#include "leakaudit/campaign.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/gateway.hpp"
#include "leakaudit/rng.hpp"
#include "leakaudit/scoring.hpp"
#include "leakaudit/toy_lm.hpp"
#include "leakaudit/toy_lm_server.hpp"

using namespace leakaudit;

namespace {

Sample make_sample(const std::string& id, std::vector<double> logprobs, std::string text = "") {
    Sample s;
    s.sample_id = id;
    s.logprobs = std::move(logprobs);
    if (text.empty()) text = std::string(s.logprobs.size(), 'x');
    s.text = text;
    for (char c : s.text) s.tokens.push_back(std::string(1, c));
    return s;
}

std::string seeded_random_string(uint64_t seed, size_t len) {
    Xoshiro256ss rng(seed);
    std::string out;
    out.reserve(len);
    for (size_t i = 0; i < len; ++i) out.push_back(static_cast<char>(rng.bounded(256)));
    return out;
}

} // namespace

TEST_CASE("perplexity of constant logprobs is exact") {
    // uniform over 8 symbols
    const double lp = std::log(1.0 / 8.0);
    for (size_t t : {1u, 3u, 7u, 64u}) {
        const std::vector<double> lps(t, lp);
        CHECK(perplexity(lps) == doctest::Approx(8.0).epsilon(1e-12));
    }
    // certain prediction
    const std::vector<double> zeros(5, 0.0);
    CHECK(perplexity(zeros) == 1.0);
}

TEST_CASE("perplexity rejects bad input") {
    CHECK_THROWS_AS(perplexity({}), Error);
    CHECK_THROWS_AS(perplexity(std::vector<double>{0.5}), Error);
    CHECK_THROWS_AS(perplexity(std::vector<double>{-std::numeric_limits<double>::infinity()}),
                    Error);
    CHECK_THROWS_AS(perplexity(std::vector<double>{std::nan("")}), Error);
}

TEST_CASE("perplexity is permutation-invariant and mean-append-stable") {
    std::vector<double> lps = {-0.3, -1.7, -0.01, -2.4, -0.9};
    const double base = perplexity(lps);
    std::vector<double> shuffled = {-2.4, -0.01, -0.3, -0.9, -1.7};
    CHECK(perplexity(shuffled) == doctest::Approx(base).epsilon(1e-12));
    // Appending a token at the current mean leaves perplexity unchanged.
    double mean = 0.0;
    for (double v : lps) mean += v;
    mean /= static_cast<double>(lps.size());
    lps.push_back(mean);
    CHECK(perplexity(lps) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("perplexity of toy-lm scores matches independent recomputation") {
    toylm::ToyLmServer server(toylm::NGramModel::train({"mem mem mem mem"}, 4, 0.1));
    const GatewayClient client(server.url());
    const TokenScores ts = client.score("mem mem");
    // Independent arithmetic on the same list, accumulated in long double.
    long double total = 0.0L;
    for (double lp : ts.token_logprobs) total += static_cast<long double>(lp);
    const long double expected =
        expl(-total / static_cast<long double>(ts.token_logprobs.size()));
    CHECK(perplexity(ts.token_logprobs) ==
          doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
}

TEST_CASE("zlib_entropy equals the reference compressor on seeded random strings") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        const std::string s = seeded_random_string(seed, 64 + seed * 7 % 512);
        uLong bound = compressBound(static_cast<uLong>(s.size()));
        std::vector<Bytef> buf(bound);
        uLongf out_len = bound;
        REQUIRE(compress2(buf.data(), &out_len, reinterpret_cast<const Bytef*>(s.data()),
                          static_cast<uLong>(s.size()), 6) == Z_OK);
        CHECK(zlib_entropy(s) == out_len);
    }
}

TEST_CASE("redundant text compresses below random bytes; empty text is constant overhead") {
    const std::string redundant(1024, 'a');
    const std::string random_bytes = seeded_random_string(1, 1024);
    CHECK(zlib_entropy(redundant) < zlib_entropy(random_bytes));
    const uint64_t empty = zlib_entropy("");
    CHECK(empty > 0);
    CHECK(empty == zlib_entropy(""));
}

TEST_CASE("ratio arithmetic: mean NLL 2 with 100 bytes gives exactly 50") {
    CHECK(zlib_logppl_ratio(100, 2.0) == 50.0);
    CHECK(std::isinf(zlib_logppl_ratio(100, 0.0)));
}

TEST_CASE("score_samples computes ratios and honors the infinity sentinel") {
    // ppl_target = e^2, zlib replaced by whatever the text compresses to;
    // check the ratio against the mean NLL directly.
    const auto s = make_sample("s1", std::vector<double>(4, -2.0));
    const auto records = score_samples({s});
    REQUIRE(records.size() == 1);
    CHECK(records[0].complete);
    CHECK(records[0].ppl_target == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
    CHECK(records[0].ratio_zlib_logppl ==
          doctest::Approx(static_cast<double>(records[0].zlib_bytes) / 2.0).epsilon(1e-12));
    CHECK_FALSE(records[0].ppl_reference.has_value());

    // All-zero logprobs: ppl 1, ratio is the +inf sentinel.
    const auto certain = make_sample("s2", std::vector<double>(4, 0.0));
    const auto r2 = score_samples({certain});
    CHECK(std::isinf(r2[0].ratio_zlib_logppl));
}

TEST_CASE("empty samples become incomplete records, not batch failures") {
    Sample empty;
    empty.sample_id = "bad";
    const auto ok = make_sample("ok", {-1.0});
    const auto records = score_samples({empty, ok});
    REQUIRE(records.size() == 2);
    CHECK_FALSE(records[0].complete);
    CHECK_FALSE(records[0].error.empty());
    CHECK(records[1].complete);
}

TEST_CASE("a string only in the fine-tune corpus has ratio_ref_target > 1") {
    // Base model never saw the secret; fine-tuned model memorized it.
    const std::string secret = "zq7 secret phrase woof";
    toylm::ToyLmServer base(
        toylm::NGramModel::train({"totally unrelated reference corpus text"}, 6, 0.1));
    toylm::ToyLmServer finetuned(toylm::NGramModel::train(
        {"totally unrelated reference corpus text", secret + " " + secret + " " + secret}, 6, 0.1));

    const GatewayClient ft_client(finetuned.url());
    const TokenScores ft_scores = ft_client.score(secret);
    Sample s;
    s.sample_id = "memorized";
    s.text = secret;
    for (char c : secret) s.tokens.push_back(std::string(1, c));
    s.logprobs = ft_scores.token_logprobs;

    const GatewayClient ref(base.url());
    const auto records = score_samples({s}, &ref);
    REQUIRE(records.size() == 1);
    REQUIRE(records[0].ppl_reference.has_value());
    REQUIRE(records[0].ratio_ref_target.has_value());
    CHECK(*records[0].ratio_ref_target > 1.0);
}

TEST_CASE("rank orders, breaks ties by id, and is idempotent") {
    std::vector<ScoreRecord> records(3);
    records[0].sample_id = "s-c";
    records[0].ppl_target = 3.0;
    records[1].sample_id = "s-a";
    records[1].ppl_target = 1.0;
    records[2].sample_id = "s-b";
    records[2].ppl_target = 2.0;
    for (auto& r : records) {
        r.zlib_bytes = 10;
        r.ratio_zlib_logppl = 10.0 / std::log(r.ppl_target);
    }
    const auto order = rank(records, RankMetric::kPplTargetAsc);
    CHECK(order == std::vector<std::string>{"s-a", "s-b", "s-c"});

    // Equal values: stable (= sample_id) order.
    records[0].ppl_target = records[1].ppl_target = records[2].ppl_target = 5.0;
    const auto tied = rank(records, RankMetric::kPplTargetAsc);
    CHECK(tied == std::vector<std::string>{"s-a", "s-b", "s-c"});

    // Ranking already-ranked output is idempotent: a permutation in, the
    // same permutation out.
    std::vector<ScoreRecord> sorted_records;
    for (const auto& id : tied) {
        for (const auto& r : records) {
            if (r.sample_id == id) sorted_records.push_back(r);
        }
    }
    CHECK(rank(sorted_records, RankMetric::kPplTargetAsc) == tied);
}

TEST_CASE("incomplete records sort last under every metric") {
    std::vector<ScoreRecord> records(3);
    records[0].sample_id = "a";
    records[0].complete = false;
    records[0].error = "boom";
    records[1].sample_id = "b";
    records[1].ppl_target = 9.0;
    records[1].ratio_zlib_logppl = 1.0;
    records[2].sample_id = "c";
    records[2].ppl_target = 2.0;
    records[2].ratio_zlib_logppl = 3.0;
    CHECK(rank(records, RankMetric::kPplTargetAsc) == std::vector<std::string>{"c", "b", "a"});
    CHECK(rank(records, RankMetric::kZlibRatioDesc) == std::vector<std::string>{"c", "b", "a"});
}

TEST_CASE("rank errors when the chosen metric's field is missing") {
    std::vector<ScoreRecord> records(1);
    records[0].sample_id = "a";
    records[0].ppl_target = 2.0;
    CHECK_THROWS_AS(rank(records, RankMetric::kPplReferenceAsc), Error);
    CHECK_THROWS_AS(rank(records, RankMetric::kRefTargetRatioDesc), Error);
}

TEST_CASE("score records round-trip through JSONL, including the inf sentinel") {
    std::vector<ScoreRecord> records(2);
    records[0].sample_id = "fin";
    records[0].ppl_target = 4.5;
    records[0].zlib_bytes = 33;
    records[0].ratio_zlib_logppl = 21.9;
    records[0].ppl_reference = 9.0;
    records[0].ratio_ref_target = 2.0;
    records[1].sample_id = "inf";
    records[1].ppl_target = 1.0;
    records[1].zlib_bytes = 10;
    records[1].ratio_zlib_logppl = std::numeric_limits<double>::infinity();

    const auto path = std::filesystem::temp_directory_path() / "leakaudit_scores_rt.jsonl";
    write_scores_jsonl(path.string(), records);
    const auto loaded = read_scores_jsonl(path.string());
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].ppl_target == 4.5);
    CHECK(loaded[0].ppl_reference == 9.0);
    CHECK(std::isinf(loaded[1].ratio_zlib_logppl));
    std::filesystem::remove(path);
}

TEST_CASE("scatter CSV lists complete records with labels") {
    std::vector<ScoreRecord> records(2);
    records[0].sample_id = "a";
    records[0].ppl_target = 2.0;
    records[0].zlib_bytes = 5;
    records[1].sample_id = "b";
    records[1].complete = false;
    const auto csv = scores_to_scatter_csv(records, {{"a", "extracted"}});
    CHECK(csv.find("a,2,5,extracted") != std::string::npos);
    CHECK(csv.find("b,") == std::string::npos);
}
