#pragma once

// Self-contained verification suite for the `check` subcommand: unitarity
// and adjointness of the sampling operators, the tiny brute-force argmax
// study, the n=1 greedy-vs-exhaustive oracle, nested prefixes, frame
// balance, and the closed-form decoder-call counts. Every check is
// deterministic, so the rendered report is byte-stable across runs.
//
// `fft_scale` exists purely for fault injection in tests: values other
// than 1 rescale the spectrum inside the unitarity check, which must then
// fail and name itself.

#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "ktmask/baselines.hpp"
#include "ktmask/core.hpp"
#include "ktmask/decoders.hpp"
#include "ktmask/io.hpp"
#include "ktmask/maskdesign.hpp"
#include "ktmask/metrics.hpp"
#include "ktmask/phantom.hpp"
#include "ktmask/rng.hpp"
#include "ktmask/transform.hpp"

namespace ktmask {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CheckOptions {
    std::uint64_t seed = 2026;
    int threads = 1;
    double fft_scale = 1.0; // fault-injection knob; 1.0 means healthy
};

namespace detail {

inline DynamicImage noise_image(Dims dims, CounterRng& rng) {
    DynamicImage img(dims.size, dims.frames);
    for (auto& v : img.data) v = {rng.next_gaussian(), rng.next_gaussian()};
    return img;
}

inline double vec_norm(const std::vector<std::complex<double>>& v) {
    double acc = 0.0;
    for (const auto& x : v) acc += std::norm(x);
    return std::sqrt(acc);
}

inline std::complex<double> dot(const std::vector<std::complex<double>>& a,
                                const std::vector<std::complex<double>>& b) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

inline CheckResult check_parseval(const CheckOptions& opts) {
    CounterRng rng(CounterRng(opts.seed).fork(0x7061, 0));
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Dims dims{4 + 4 * (trial % 3), 1 + trial % 4};
        auto img = noise_image(dims, rng);
        auto k = forward_fft(img);
        for (auto& v : k.data) v *= opts.fft_scale;
        double err = std::abs(vec_norm(k.data) - img.norm()) / img.norm();
        worst = std::max(worst, err);
        auto back = inverse_fft(k);
        double rt = 0.0, ref = 0.0;
        for (std::size_t i = 0; i < img.data.size(); ++i) {
            rt += std::norm(back.data[i] - img.data[i]);
            ref += std::norm(img.data[i]);
        }
        worst = std::max(worst, std::sqrt(rt / ref));
        auto f = temporal_fft(img);
        worst = std::max(worst, std::abs(f.norm() - img.norm()) / img.norm());
    }
    CheckResult r{"parseval", worst <= 1e-10, ""};
    r.detail = "max relative norm/round-trip error " + format_g6(worst) + ", tolerance 1e-10";
    return r;
}

inline CheckResult check_adjoint(const CheckOptions& opts) {
    CounterRng rng(CounterRng(opts.seed).fork(0x6164, 0));
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Dims dims{4 + 4 * (trial % 3), 1 + trial % 4};
        int n = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(dims.lines())));
        Mask mask(dims);
        auto order = sample_without_replacement(dims.lines(), n, rng);
        for (int idx : order) mask.lines.push_back(line_from_index(idx, dims));
        auto x = noise_image(dims, rng);
        Measurements y;
        y.mask = mask;
        y.values.resize(static_cast<std::size_t>(n) * dims.size);
        for (auto& v : y.values) v = {rng.next_gaussian(), rng.next_gaussian()};
        auto ax = sample(x, mask);
        auto aty = adjoint_sample(y);
        auto lhs = dot(ax.values, y.values);
        auto rhs = dot(x.data, aty.data);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
    CheckResult r{"adjoint", worst <= 1e-10, ""};
    r.detail = "max relative inner-product mismatch " + format_g6(worst) + ", tolerance 1e-10";
    return r;
}

inline CheckResult check_tiny_brute_force(const CheckOptions& opts) {
    Dims dims{4, 2};
    auto images = phantom_suite(dims.size, dims.frames, 2, opts.seed + 17);
    DecoderSpec spec;
    spec.id = "zf";
    Decoder dec{spec, DecoderKind::ZeroFill};
    MetricSpec metric{MetricId::Psnr, 1.0};
    SamplingDistribution pmf = uniform_distribution(dims);
    auto report = prop_check(pmf, 2, 4000, images, dec, metric, opts.seed + 18);
    CheckResult r{"tiny-brute-force", report.inequality_ok && report.degenerate_ok, ""};
    r.detail = "masks " + std::to_string(report.masks_enumerated) + ", sampled mean " + format_g6(report.mc_mean) +
               " vs best " + format_g6(report.brute_max) +
               (report.degenerate_ok ? ", concentrated draw recovers the maximum" : ", concentrated draw mismatch");
    return r;
}

inline CheckResult check_greedy_oracle(const CheckOptions& opts) {
    Dims dims{8, 2};
    auto images = phantom_suite(dims.size, dims.frames, 3, opts.seed + 29);
    DecoderSpec spec;
    spec.id = "zf";
    Decoder dec{spec, DecoderKind::ZeroFill};
    MetricSpec metric{MetricId::Psnr, 1.0};

    Line best{0, 0};
    double best_score = -std::numeric_limits<double>::infinity();
    for (int idx = 0; idx < dims.lines(); ++idx) {
        Mask mask(dims);
        mask.lines.push_back(line_from_index(idx, dims));
        std::vector<double> scores;
        for (const auto& img : images) scores.push_back(evaluate_metric(metric, img, dec.decode(sample(img, mask))));
        double score = mean_of(scores);
        if (score > best_score) {
            best_score = score;
            best = mask.lines[0];
        }
    }

    DesignConfig cfg;
    cfg.variant = Variant::G;
    cfg.training = TrainingMode::V1;
    cfg.budget = 1;
    auto res = design_mask(cfg, images, dec, metric, opts.threads);
    bool ok = res.mask.lines.size() == 1 && res.mask.lines[0] == best;
    CheckResult r{"greedy-oracle", ok, ""};
    r.detail = "exhaustive best line " + std::to_string(best.frame) + ":" + std::to_string(best.row) +
               ", greedy chose " + std::to_string(res.mask.lines[0].frame) + ":" +
               std::to_string(res.mask.lines[0].row);
    return r;
}

inline CheckResult check_nestedness(const CheckOptions& opts) {
    Dims dims{8, 2};
    auto images = phantom_suite(dims.size, dims.frames, 3, opts.seed + 37);
    DecoderSpec spec;
    spec.id = "zf";
    Decoder dec{spec, DecoderKind::ZeroFill};
    MetricSpec metric{MetricId::Psnr, 1.0};

    DesignConfig cfg;
    cfg.variant = Variant::SG;
    cfg.training = TrainingMode::V2;
    cfg.sample_batch = 3;
    cfg.train_batch = 1;
    cfg.seed = opts.seed + 38;
    cfg.budget = 8;
    auto full = design_mask(cfg, images, dec, metric, opts.threads);
    cfg.budget = 4;
    auto half = design_mask(cfg, images, dec, metric, opts.threads);

    bool nested = verify_nestedness(full.mask, full.trace);
    bool prefix = half.mask.lines == full.mask.prefix(4).lines;
    CheckResult r{"nestedness", nested && prefix, ""};
    r.detail = std::string(nested ? "trace is self-consistent" : "trace is not self-consistent") +
               (prefix ? ", shorter budget is an exact prefix" : ", shorter budget diverges");
    return r;
}

inline CheckResult check_frame_balance(const CheckOptions& opts) {
    Dims dims{8, 4};
    auto images = phantom_suite(dims.size, dims.frames, 2, opts.seed + 41);
    DecoderSpec spec;
    spec.id = "zf";
    Decoder dec{spec, DecoderKind::ZeroFill};
    MetricSpec metric{MetricId::Psnr, 1.0};

    DesignConfig cfg;
    cfg.variant = Variant::SG;
    cfg.training = TrainingMode::V1;
    cfg.sample_batch = 2;
    cfg.seed = opts.seed + 42;
    cfg.budget = 12; // multiple of the frame count, so the spread must be zero
    auto res = design_mask(cfg, images, dec, metric, opts.threads);
    int spread = frame_balance(res.mask);
    CheckResult r{"frame-balance", spread == 0, ""};
    r.detail = "per-frame line-count spread " + std::to_string(spread) + " at a budget divisible by the frame count";
    return r;
}

inline CheckResult check_call_count(const CheckOptions& opts) {
    Dims dims{8, 2};
    auto images = phantom_suite(dims.size, dims.frames, 3, opts.seed + 53);
    DecoderSpec spec;
    spec.id = "zf";
    Decoder dec{spec, DecoderKind::ZeroFill};
    MetricSpec metric{MetricId::Psnr, 1.0};

    struct Case {
        Variant variant;
        TrainingMode training;
    };
    const Case cases[] = {{Variant::G, TrainingMode::V1}, {Variant::SG, TrainingMode::V1},
                          {Variant::SG, TrainingMode::V2}};
    bool ok = true;
    std::ostringstream detail;
    for (const auto& c : cases) {
        DesignConfig cfg;
        cfg.variant = c.variant;
        cfg.training = c.training;
        cfg.sample_batch = 3;
        cfg.train_batch = 1;
        cfg.seed = opts.seed + 54;
        cfg.budget = 6;
        auto res = design_mask(cfg, images, dec, metric, opts.threads);
        auto want = predict_calls(c.variant, c.training, dims, static_cast<int>(images.size()), cfg.sample_batch,
                                  cfg.train_batch, cfg.budget);
        if (res.trace.total_calls() != want) ok = false;
        if (detail.tellp() > 0) detail << ", ";
        detail << res.trace.total_calls() << "/" << want;
    }
    CheckResult r{"call-count", ok, "measured/predicted decoder calls: " + detail.str()};
    return r;
}

} // namespace detail

inline std::vector<CheckResult> run_builtin_checks(const CheckOptions& opts = {}) {
    std::vector<CheckResult> results;
    results.push_back(detail::check_parseval(opts));
    results.push_back(detail::check_adjoint(opts));
    results.push_back(detail::check_tiny_brute_force(opts));
    results.push_back(detail::check_greedy_oracle(opts));
    results.push_back(detail::check_nestedness(opts));
    results.push_back(detail::check_frame_balance(opts));
    results.push_back(detail::check_call_count(opts));
    return results;
}

inline bool all_checks_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return true;
}

inline std::string format_check_report(const std::vector<CheckResult>& results) {
    std::ostringstream out;
    int passed = 0;
    for (const auto& r : results) {
        out << (r.passed ? "PASS" : "FAIL") << " " << r.name << ": " << r.detail << "\n";
        if (r.passed) ++passed;
    }
    out << passed << "/" << results.size() << " checks passed\n";
    if (passed != static_cast<int>(results.size())) {
        out << "failed:";
        for (const auto& r : results)
            if (!r.passed) out << " " << r.name;
        out << "\n";
    }
    return out.str();
}

} // namespace ktmask
