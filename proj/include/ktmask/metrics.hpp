#pragma once

// Reconstruction quality metrics. All metrics are oriented higher-is-better
// so the greedy argmax maximizes quality directly; NegMSE is -mse.
//
// PSNR and SSIM operate on magnitude volumes with the peak fixed at 1.0
// (inputs are normalized at ingestion). PSNR uses a single MSE over all
// frames; exact agreement returns +infinity.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ktmask/core.hpp"

namespace ktmask {

enum class MetricId { Psnr, Ssim, NegMse };

struct MetricSpec {
    MetricId id = MetricId::Psnr;
    double peak = 1.0;
};

inline MetricId parse_metric(const std::string& name) {
    if (name == "psnr") return MetricId::Psnr;
    if (name == "ssim") return MetricId::Ssim;
    if (name == "negmse") return MetricId::NegMse;
    throw std::invalid_argument("unknown metric: " + name);
}

inline std::string to_string(MetricId id) {
    switch (id) {
        case MetricId::Psnr: return "psnr";
        case MetricId::Ssim: return "ssim";
        default: return "negmse";
    }
}

namespace detail {
inline void require_same_dims(const DynamicImage& a, const DynamicImage& b) {
    if (a.size != b.size || a.frames != b.frames)
        throw std::invalid_argument("metric: image dims do not match");
}
} // namespace detail

// Mean of |x_i - xhat_i|^2 over all N^2 T complex entries.
inline double mse(const DynamicImage& x, const DynamicImage& xhat) {
    detail::require_same_dims(x, xhat);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) acc += std::norm(x.data[i] - xhat.data[i]);
    return acc / static_cast<double>(x.data.size());
}

// 10 log10(peak^2 / mse) between magnitude volumes; +inf on exact agreement.
inline double psnr(const DynamicImage& x, const DynamicImage& xhat, double peak = 1.0) {
    detail::require_same_dims(x, xhat);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double d = std::abs(x.data[i]) - std::abs(xhat.data[i]);
        acc += d * d;
    }
    const double mse_mag = acc / static_cast<double>(x.data.size());
    if (mse_mag == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse_mag);
}

// Mean SSIM between magnitude volumes: per frame, 8x8 uniform windows at
// stride 1 (fully inside the frame), C1 = (0.01 peak)^2, C2 = (0.03 peak)^2,
// averaged over every window of every frame. Windowed moments come from
// prefix-sum tables; the test oracle recomputes them per window directly.
inline double ssim(const DynamicImage& x, const DynamicImage& xhat, double peak = 1.0) {
    detail::require_same_dims(x, xhat);
    const int n = x.size;
    const int w = 8;
    if (n < w) throw std::invalid_argument("ssim: frame smaller than 8x8 window");
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    const std::size_t np = static_cast<std::size_t>(n);

    // (n+1)^2 prefix tables for a, b, a^2, b^2, ab
    const std::size_t side = np + 1;
    std::vector<double> pa(side * side), pb(side * side), paa(side * side), pbb(side * side), pab(side * side);
    auto window_sum = [&](const std::vector<double>& p, int y0, int x0) {
        return p[static_cast<std::size_t>(y0 + w) * side + static_cast<std::size_t>(x0 + w)] -
               p[static_cast<std::size_t>(y0) * side + static_cast<std::size_t>(x0 + w)] -
               p[static_cast<std::size_t>(y0 + w) * side + static_cast<std::size_t>(x0)] +
               p[static_cast<std::size_t>(y0) * side + static_cast<std::size_t>(x0)];
    };

    double total = 0.0;
    std::int64_t windows = 0;
    const double inv = 1.0 / (w * w);
    for (int t = 0; t < x.frames; ++t) {
        for (std::size_t i = 0; i < side; ++i) pa[i] = pb[i] = paa[i] = pbb[i] = pab[i] = 0.0;
        for (int y = 0; y < n; ++y) {
            const std::size_t r = static_cast<std::size_t>(y + 1) * side;
            const std::size_t rp = static_cast<std::size_t>(y) * side;
            pa[r] = pb[r] = paa[r] = pbb[r] = pab[r] = 0.0;
            for (int xx = 0; xx < n; ++xx) {
                const double a = std::abs(x.at(t, y, xx));
                const double b = std::abs(xhat.at(t, y, xx));
                const std::size_t c = static_cast<std::size_t>(xx + 1);
                pa[r + c] = pa[r + c - 1] + pa[rp + c] - pa[rp + c - 1] + a;
                pb[r + c] = pb[r + c - 1] + pb[rp + c] - pb[rp + c - 1] + b;
                paa[r + c] = paa[r + c - 1] + paa[rp + c] - paa[rp + c - 1] + a * a;
                pbb[r + c] = pbb[r + c - 1] + pbb[rp + c] - pbb[rp + c - 1] + b * b;
                pab[r + c] = pab[r + c - 1] + pab[rp + c] - pab[rp + c - 1] + a * b;
            }
        }
        for (int y0 = 0; y0 + w <= n; ++y0) {
            for (int x0 = 0; x0 + w <= n; ++x0) {
                const double mua = window_sum(pa, y0, x0) * inv;
                const double mub = window_sum(pb, y0, x0) * inv;
                const double vara = window_sum(paa, y0, x0) * inv - mua * mua;
                const double varb = window_sum(pbb, y0, x0) * inv - mub * mub;
                const double cov = window_sum(pab, y0, x0) * inv - mua * mub;
                total += ((2.0 * mua * mub + c1) * (2.0 * cov + c2)) /
                         ((mua * mua + mub * mub + c1) * (vara + varb + c2));
                ++windows;
            }
        }
    }
    return total / static_cast<double>(windows);
}

// Dispatch with higher-is-better orientation.
inline double evaluate_metric(const MetricSpec& spec, const DynamicImage& reference, const DynamicImage& estimate) {
    switch (spec.id) {
        case MetricId::Psnr: return psnr(reference, estimate, spec.peak);
        case MetricId::Ssim: return ssim(reference, estimate, spec.peak);
        default: return -mse(reference, estimate);
    }
}

} // namespace ktmask
