#include <catch_amalgamated.hpp>

#include "ktmask/core.hpp"
#include "test_support.hpp"

using namespace ktmask;

TEST_CASE("normalize scales peak magnitude to one") {
    DynamicImage img(4, 2);
    img.at(0, 1, 2) = cplx{2.0, 0.0};
    img.at(1, 0, 0) = cplx{0.0, -1.0};
    auto res = normalize(img);
    REQUIRE(res.scale == 2.0);
    REQUIRE(res.image.at(0, 1, 2) == cplx{1.0, 0.0});
    REQUIRE(res.image.at(1, 0, 0) == cplx{0.0, -0.5});
    REQUIRE(res.image.max_magnitude() == Catch::Approx(1.0));
}

TEST_CASE("normalize is identity at unit peak and idempotent") {
    DynamicImage img(4, 1);
    img.at(0, 2, 2) = cplx{1.0, 0.0};
    img.at(0, 0, 1) = cplx{0.25, 0.25};
    auto once = normalize(img);
    REQUIRE(once.scale == 1.0);
    REQUIRE(once.image.data == img.data);

    auto rnd = ktest::random_image(8, 3, 11);
    auto n1 = normalize(rnd);
    auto n2 = normalize(n1.image);
    REQUIRE(n2.scale == Catch::Approx(1.0).margin(1e-15));
    for (std::size_t i = 0; i < n1.image.data.size(); ++i)
        REQUIRE(std::abs(n2.image.data[i] - n1.image.data[i]) < 1e-15);
}

TEST_CASE("normalize rejects the all-zero image") {
    DynamicImage img(4, 1);
    REQUIRE_THROWS_WITH(normalize(img), "degenerate image");
}

TEST_CASE("sampling_rate counts acquired lines over the k-t grid") {
    const Dims d{152, 17};
    REQUIRE(sampling_rate(Mask(d)) == 0.0);

    Mask full(d);
    for (int t = 0; t < d.frames; ++t)
        for (int y = 0; y < d.size; ++y) full.lines.push_back(Line{t, y});
    REQUIRE(sampling_rate(full) == 1.0);

    // 26 lines out of 152*17 = 2584
    Mask part(d);
    for (int y = 0; y < 26; ++y) part.lines.push_back(Line{0, y});
    REQUIRE(sampling_rate(part) == Catch::Approx(26.0 / 2584.0).epsilon(1e-14));
}

TEST_CASE("mask validation catches range and duplicate errors") {
    const Dims d{4, 2};
    REQUIRE_THROWS_AS(Mask(d, {Line{0, 4}}), std::invalid_argument);
    REQUIRE_THROWS_AS(Mask(d, {Line{2, 0}}), std::invalid_argument);
    REQUIRE_THROWS_AS(Mask(d, {Line{1, 3}, Line{1, 3}}), std::invalid_argument);
    REQUIRE_NOTHROW(Mask(d, {Line{1, 3}, Line{0, 3}}));
}

TEST_CASE("mask prefixes are valid masks and extend each other") {
    auto mask = ktest::random_mask(Dims{8, 4}, 12, 3);
    for (int i = 0; i <= mask.line_count(); ++i) {
        auto p = mask.prefix(i);
        REQUIRE_NOTHROW(p.validate());
        REQUIRE(p.line_count() == i);
        for (int j = 0; j < i; ++j) REQUIRE(p.lines[static_cast<std::size_t>(j)] == mask.lines[static_cast<std::size_t>(j)]);
    }
}

TEST_CASE("sampling distribution normalizes to the simplex") {
    const Dims d{8, 2};
    std::vector<double> raw(static_cast<std::size_t>(d.lines()), 0.0);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<double>(i % 5) + 0.5;
    SamplingDistribution f(d, raw);
    REQUIRE(std::abs(f.sum() - 1.0) <= 1e-12);
    for (double w : f.weights) REQUIRE(w >= 0.0);

    auto u = uniform_distribution(d);
    REQUIRE(std::abs(u.sum() - 1.0) <= 1e-12);
    REQUIRE(u.weight(Line{1, 3}) == Catch::Approx(1.0 / 16.0));

    REQUIRE_THROWS_AS(SamplingDistribution(d, std::vector<double>(16, 0.0)), std::invalid_argument);
    std::vector<double> neg(16, 1.0);
    neg[3] = -0.5;
    REQUIRE_THROWS_AS(SamplingDistribution(d, neg), std::invalid_argument);
}

TEST_CASE("design config validation names the offending field") {
    const Dims d{8, 2};
    DesignConfig cfg;
    cfg.budget = 17;
    REQUIRE_THROWS_WITH(cfg.validate(d, 3), Catch::Matchers::ContainsSubstring("budget"));
    cfg.budget = 4;
    cfg.sample_batch = 9;
    REQUIRE_THROWS_WITH(cfg.validate(d, 3), Catch::Matchers::ContainsSubstring("sample_batch"));
    cfg.sample_batch = 4;
    cfg.train_batch = 5;
    REQUIRE_THROWS_WITH(cfg.validate(d, 3), Catch::Matchers::ContainsSubstring("train_batch"));
    cfg.train_batch = 2;
    REQUIRE_NOTHROW(cfg.validate(d, 3));
}

TEST_CASE("lines_for_rate rounds to the nearest line count") {
    REQUIRE(lines_for_rate(0.0, Dims{8, 2}) == 0);
    REQUIRE(lines_for_rate(1.0, Dims{8, 2}) == 16);
    REQUIRE(lines_for_rate(0.1, Dims{32, 8}) == 26); // 25.6 rounds up
    REQUIRE(lines_for_rate(0.01, Dims{152, 17}) == 26);
}
