#include <catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "ktmask/rng.hpp"

using namespace ktmask;

TEST_CASE("counter rng is reproducible and fork-independent") {
    CounterRng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    CounterRng base(7);
    auto s1 = base.fork(1);
    auto s2 = base.fork(2);
    REQUIRE(s1.next_u64() != s2.next_u64());
    // forking does not advance the parent
    CounterRng base2(7);
    (void)base2.fork(1);
    CounterRng base3(7);
    REQUIRE(base2.next_u64() == base3.next_u64());
}

TEST_CASE("next_double stays in [0,1) and next_below in range") {
    CounterRng rng(123);
    for (int i = 0; i < 1000; ++i) {
        const double d = rng.next_double();
        REQUIRE(d >= 0.0);
        REQUIRE(d < 1.0);
        REQUIRE(rng.next_below(17) < 17);
    }
    REQUIRE_THROWS_AS(rng.next_below(0), std::invalid_argument);
}

TEST_CASE("sample_without_replacement returns distinct in-range indices") {
    CounterRng rng(5);
    auto draw = sample_without_replacement(20, 8, rng);
    REQUIRE(draw.size() == 8);
    std::set<int> seen(draw.begin(), draw.end());
    REQUIRE(seen.size() == 8);
    for (int v : draw) {
        REQUIRE(v >= 0);
        REQUIRE(v < 20);
    }
    // full draw is a permutation
    CounterRng rng2(5);
    auto all = sample_without_replacement(6, 6, rng2);
    std::set<int> perm(all.begin(), all.end());
    REQUIRE(perm.size() == 6);
    REQUIRE_THROWS_AS(sample_without_replacement(3, 4, rng), std::invalid_argument);
}

TEST_CASE("gaussian deviates have roughly unit variance") {
    CounterRng rng(99);
    double sum = 0, sumsq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.next_gaussian();
        sum += g;
        sumsq += g * g;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    REQUIRE(std::abs(mean) < 0.03);
    REQUIRE(std::abs(var - 1.0) < 0.05);
}
