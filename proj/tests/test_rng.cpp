#include <doctest.h>

#include <set>

#include "leakaudit/rng.hpp"

using namespace leakaudit;

// Reference outputs computed with an independent implementation of the
// published algorithms (splitmix64 and xoshiro256** 1.0).
TEST_CASE("splitmix64 matches reference outputs from state 0") {
    uint64_t state = 0;
    CHECK(splitmix64_next(state) == 0xE220A8397B1DCDAFull);
    CHECK(splitmix64_next(state) == 0x6E789E6AA1B965F4ull);
    CHECK(splitmix64_next(state) == 0x06C45D188009454Full);
    CHECK(splitmix64_next(state) == 0xF88BB8A8724C81ECull);
}

TEST_CASE("xoshiro256** seeded via splitmix64 matches reference outputs") {
    Xoshiro256ss rng(42);
    CHECK(rng.next() == 0x15780B2E0C2EC716ull);
    CHECK(rng.next() == 0x6104D9866D113A7Eull);
    CHECK(rng.next() == 0xAE17533239E499A1ull);
    CHECK(rng.next() == 0xECB8AD4703B360A1ull);
    CHECK(rng.next() == 0xFDE6DC7FE2EC5E64ull);
}

TEST_CASE("streams are reproducible and seed-sensitive") {
    Xoshiro256ss a(123);
    Xoshiro256ss b(123);
    Xoshiro256ss c(124);
    bool all_equal = true;
    bool any_differ = false;
    for (int i = 0; i < 100; ++i) {
        const uint64_t va = a.next();
        all_equal = all_equal && va == b.next();
        any_differ = any_differ || va != c.next();
    }
    CHECK(all_equal);
    CHECK(any_differ);
}

TEST_CASE("bounded stays in range and covers small ranges") {
    Xoshiro256ss rng(7);
    std::set<uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const uint64_t v = rng.bounded(5);
        CHECK(v < 5);
        seen.insert(v);
    }
    CHECK(seen.size() == 5);
}

TEST_CASE("next_double is in [0, 1)") {
    Xoshiro256ss rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double d = rng.next_double();
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
    }
}

TEST_CASE("derive_seed separates indices and bases") {
    std::set<uint64_t> seeds;
    for (uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(42, i));
    CHECK(seeds.size() == 1000);
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
