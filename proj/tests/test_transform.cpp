#include <catch_amalgamated.hpp>

#include "ktmask/transform.hpp"
#include "test_support.hpp"

using namespace ktmask;
using ktest::rel_dist;
using ktest::rel_err;

TEST_CASE("forward_fft of a constant frame concentrates at DC") {
    const int n = 8;
    DynamicImage img(n, 2);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) img.at(0, y, x) = cplx{3.0, 0.0};
    auto k = forward_fft(img);
    REQUIRE(std::abs(k.at(0, 0, 0) - cplx{3.0 * n, 0.0}) < 1e-12);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (y != 0 || x != 0) REQUIRE(std::abs(k.at(0, y, x)) < 1e-12);
    // untouched second frame stays zero
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) REQUIRE(std::abs(k.at(1, y, x)) == 0.0);
}

TEST_CASE("forward_fft matches the naive unitary DFT oracle") {
    for (int n : {4, 6, 8}) { // 6 exercises the non-power-of-two path
        auto img = ktest::random_image(n, 2, 100 + static_cast<std::uint64_t>(n));
        auto k = forward_fft(img);
        auto oracle = ktest::naive_frame_dft(img);
        REQUIRE(rel_dist(k.data, oracle) < 1e-10);
    }
}

TEST_CASE("1-D kernels match the naive DFT for assorted lengths") {
    for (std::size_t n : {2u, 3u, 5u, 8u, 12u, 17u, 32u, 152u}) {
        std::vector<cplx> x(n);
        CounterRng rng(n);
        for (auto& v : x) v = cplx{rng.next_double() - 0.5, rng.next_double() - 0.5};
        auto want = ktest::naive_dft_1d(x);
        auto got = x;
        fft::dft_inplace(got.data(), n);
        REQUIRE(rel_dist(got, want) < 1e-10);
        // inverse round trip, unnormalized pair scales by n
        fft::idft_inplace(got.data(), n);
        for (std::size_t i = 0; i < n; ++i) got[i] /= static_cast<double>(n);
        REQUIRE(rel_dist(got, x) < 1e-10);
    }
}

TEST_CASE("spatial round trip and Parseval hold on random volumes") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto img = ktest::random_image(16, 3, seed);
        auto k = forward_fft(img);
        double knorm = 0.0;
        for (const auto& v : k.data) knorm += std::norm(v);
        REQUIRE(rel_err(std::sqrt(knorm), img.norm()) < 1e-10);
        auto back = inverse_fft(k);
        REQUIRE(rel_dist(back.data, img.data) < 1e-10);
    }
}

TEST_CASE("zero image transforms to zero") {
    DynamicImage img(8, 2);
    auto k = forward_fft(img);
    for (const auto& v : k.data) REQUIRE(std::abs(v) == 0.0);
}

TEST_CASE("spatial adjoint identity <Psi x, y> = <x, Psi* y>") {
    for (std::uint64_t seed : {5ull, 6ull}) {
        auto x = ktest::random_image(8, 2, seed);
        auto y = ktest::random_image(8, 2, seed + 50);
        auto lhs = ktest::inner(forward_fft(x).data, y.data);
        KSpaceVolume ky{8, 2, y.data};
        auto rhs = ktest::inner(x.data, inverse_fft(ky).data);
        REQUIRE(std::abs(lhs - rhs) / std::abs(rhs) < 1e-10);
    }
}

TEST_CASE("temporal transform: static video concentrates in the DC frame") {
    const int n = 8, t_count = 4;
    auto frame = ktest::random_image(n, 1, 9);
    DynamicImage img(n, t_count);
    for (int t = 0; t < t_count; ++t)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) img.at(t, y, x) = frame.at(0, y, x);
    auto xf = temporal_fft(img);
    double ac = 0.0;
    for (int t = 1; t < t_count; ++t)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) ac += std::norm(xf.at(t, y, x));
    REQUIRE(ac < 1e-20);
    REQUIRE(rel_err(xf.norm(), img.norm()) < 1e-10);
}

TEST_CASE("temporal transform: T=1 is identity, random volumes unitary") {
    auto single = ktest::random_image(8, 1, 13);
    auto xf1 = temporal_fft(single);
    REQUIRE(xf1.data == single.data);

    auto img = ktest::random_image(8, 5, 17);
    auto xf = temporal_fft(img);
    REQUIRE(rel_err(xf.norm(), img.norm()) < 1e-10);
    auto back = temporal_ifft(xf);
    REQUIRE(rel_dist(back.data, img.data) < 1e-10);
}

TEST_CASE("sample with the full mask preserves energy; empty mask is empty") {
    auto img = ktest::random_image(8, 2, 21);
    Mask full(img.dims());
    for (int t = 0; t < 2; ++t)
        for (int y = 0; y < 8; ++y) full.lines.push_back(Line{t, y});
    auto meas = sample(img, full);
    double e = 0.0;
    for (const auto& v : meas.values) e += std::norm(v);
    REQUIRE(rel_err(std::sqrt(e), img.norm()) < 1e-10);

    auto empty = sample(img, Mask(img.dims()));
    REQUIRE(empty.values.empty());
}

TEST_CASE("one-line sample matches the naive DFT oracle row") {
    auto img = ktest::random_image(4, 1, 33);
    const Line ln{0, 2};
    auto meas = sample(img, Mask(img.dims(), {ln}));
    auto oracle = ktest::naive_frame_dft(img);
    REQUIRE(meas.values.size() == 4);
    for (int x = 0; x < 4; ++x) {
        const cplx want = oracle[(static_cast<std::size_t>(ln.row)) * 4 + static_cast<std::size_t>(x)];
        REQUIRE(std::abs(meas.values[static_cast<std::size_t>(x)] - want) < 1e-10);
    }
}

TEST_CASE("sample rejects mismatched dims") {
    auto img = ktest::random_image(8, 2, 40);
    Mask wrong(Dims{8, 3});
    REQUIRE_THROWS_AS(sample(img, wrong), std::invalid_argument);
}

TEST_CASE("adjoint_sample: full-mask round trip and empty mask") {
    auto img = ktest::random_image(8, 2, 51);
    Mask full(img.dims());
    for (int t = 0; t < 2; ++t)
        for (int y = 0; y < 8; ++y) full.lines.push_back(Line{t, y});
    auto back = adjoint_sample(sample(img, full));
    REQUIRE(rel_dist(back.data, img.data) < 1e-10);

    Measurements none{Mask(img.dims()), {}};
    auto zero = adjoint_sample(none);
    for (const auto& v : zero.data) REQUIRE(std::abs(v) == 0.0);
}

TEST_CASE("sampling operator adjoint identity over random masks") {
    for (std::uint64_t seed : {61ull, 62ull, 63ull}) {
        auto x = ktest::random_image(8, 3, seed);
        auto mask = ktest::random_mask(Dims{8, 3}, 7, seed);
        auto bx = sample(x, mask);
        // random measurement-space vector on the same mask
        Measurements y{mask, {}};
        CounterRng rng(seed + 7);
        y.values.resize(bx.values.size());
        for (auto& v : y.values) v = cplx{rng.next_double() - 0.5, rng.next_double() - 0.5};
        const cplx lhs = ktest::inner(bx.values, y.values);
        const cplx rhs = ktest::inner(x.data, adjoint_sample(y).data);
        REQUIRE(std::abs(lhs - rhs) / std::abs(rhs) < 1e-10);
    }
}

TEST_CASE("masking is idempotent: sample(adjoint_sample(b)) = b") {
    auto img = ktest::random_image(8, 2, 71);
    auto mask = ktest::random_mask(Dims{8, 2}, 5, 72);
    auto b = sample(img, mask);
    auto again = sample(adjoint_sample(b), mask);
    REQUIRE(rel_dist(again.values, b.values) < 1e-10);
}
