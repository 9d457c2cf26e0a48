#pragma once

// Synthetic dynamic volumes: a static elliptical background plus one disk on
// a circular orbit, rasterized with 4x4 supersampled coverage so shape edges
// are smooth. Generation is a pure function of the PhantomSpec, including
// the per-shape amplitude jitter drawn from its seed.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ktmask/core.hpp"
#include "ktmask/rng.hpp"
#include "ktmask/transform.hpp"

namespace ktmask {

struct Ellipse {
    double cy = 0.0, cx = 0.0; // center, pixel units
    double ay = 1.0, ax = 1.0; // semi-axes
    cplx amplitude{1.0, 0.0};
};

struct OrbitingDisk {
    double orbit_cy = 0.0, orbit_cx = 0.0;
    double orbit_radius = 0.0;
    double angular_step = 0.0; // radians per frame, angle 0 at frame 0
    double disk_radius = 1.0;
    cplx amplitude{1.0, 0.0};

    // disk center at frame t
    void center(int t, double& cy, double& cx) const {
        const double ang = angular_step * t;
        cy = orbit_cy + orbit_radius * std::sin(ang);
        cx = orbit_cx + orbit_radius * std::cos(ang);
    }
};

struct PhantomSpec {
    Dims dims;
    std::vector<Ellipse> ellipses;
    std::optional<OrbitingDisk> disk;
    double jitter = 0.0; // relative amplitude perturbation per shape
    std::uint64_t seed = 0;
};

namespace detail {

inline void require_inside(double lo_y, double hi_y, double lo_x, double hi_x, int n) {
    if (lo_y < 0.0 || hi_y > n || lo_x < 0.0 || hi_x > n)
        throw std::invalid_argument("phantom: shape out of bounds");
}

// Fraction of the 16 subpixel centers of pixel (y, x) inside the ellipse
// ((sy-cy)/ay)^2 + ((sx-cx)/ax)^2 <= 1.
inline double coverage(int y, int x, double cy, double cx, double ay, double ax) {
    int hit = 0;
    for (int i = 0; i < 4; ++i) {
        const double sy = y + (i + 0.5) / 4.0;
        const double dy = (sy - cy) / ay;
        for (int j = 0; j < 4; ++j) {
            const double sx = x + (j + 0.5) / 4.0;
            const double dx = (sx - cx) / ax;
            if (dy * dy + dx * dx <= 1.0) ++hit;
        }
    }
    return hit / 16.0;
}

inline void paint(DynamicImage& img, int t, double cy, double cx, double ay, double ax, cplx amp) {
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - ay)));
    const int y1 = std::min(img.size - 1, static_cast<int>(std::ceil(cy + ay)));
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - ax)));
    const int x1 = std::min(img.size - 1, static_cast<int>(std::ceil(cx + ax)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double c = coverage(y, x, cy, cx, ay, ax);
            if (c > 0.0) img.at(t, y, x) += amp * c;
        }
}

} // namespace detail

// Rasterizes all shapes into a normalized volume (peak magnitude 1).
inline DynamicImage generate_phantom(const PhantomSpec& spec) {
    const int n = spec.dims.size;
    const int t_count = spec.dims.frames;
    DynamicImage img(n, t_count);

    CounterRng jitter_rng = CounterRng(spec.seed).fork(0x6a69, 0); // per-shape amplitude stream
    auto jittered = [&](cplx amp) {
        const double u = 2.0 * jitter_rng.next_double() - 1.0;
        return amp * (1.0 + spec.jitter * u);
    };

    for (const auto& e : spec.ellipses) {
        detail::require_inside(e.cy - e.ay, e.cy + e.ay, e.cx - e.ax, e.cx + e.ax, n);
        const cplx amp = jittered(e.amplitude);
        for (int t = 0; t < t_count; ++t) detail::paint(img, t, e.cy, e.cx, e.ay, e.ax, amp);
    }
    if (spec.disk) {
        const auto& d = *spec.disk;
        const cplx amp = jittered(d.amplitude);
        for (int t = 0; t < t_count; ++t) {
            double cy, cx;
            d.center(t, cy, cx);
            detail::require_inside(cy - d.disk_radius, cy + d.disk_radius, cx - d.disk_radius, cx + d.disk_radius, n);
            detail::paint(img, t, cy, cx, d.disk_radius, d.disk_radius, amp);
        }
    }
    return normalize(img).image; // all-zero (no shapes) rejected here
}

// Heart-like default: layered static ellipses and one orbiting disk whose
// orbit completes a full cycle over the T frames.
inline PhantomSpec default_phantom_spec(int n, int t_count, std::uint64_t seed = 0) {
    PhantomSpec spec;
    spec.dims = {n, t_count};
    spec.seed = seed;
    spec.jitter = 0.05;
    const double c = n / 2.0;
    spec.ellipses = {
        {c, c, 0.42 * n, 0.45 * n, cplx{0.55, 0.0}},
        {c - 0.04 * n, c + 0.03 * n, 0.26 * n, 0.23 * n, cplx{0.30, 0.12}},
        {c + 0.18 * n, c - 0.16 * n, 0.10 * n, 0.08 * n, cplx{0.18, -0.15}},
    };
    OrbitingDisk disk;
    disk.orbit_cy = c;
    disk.orbit_cx = c;
    disk.orbit_radius = 0.22 * n;
    disk.angular_step = 2.0 * std::numbers::pi / t_count;
    disk.disk_radius = 0.09 * n;
    disk.amplitude = cplx{0.85, 0.0};
    spec.disk = disk;
    return spec;
}

// `count` deterministic variations of the default spec: orbit geometry, orbit
// speed and disk size differ per volume so train/test sets are not clones.
inline std::vector<DynamicImage> phantom_suite(int n, int t_count, int count, std::uint64_t seed) {
    std::vector<DynamicImage> out;
    out.reserve(static_cast<std::size_t>(count));
    CounterRng root(seed);
    for (int i = 0; i < count; ++i) {
        CounterRng rng = root.fork(0x7375, static_cast<std::uint64_t>(i));
        PhantomSpec spec = default_phantom_spec(n, t_count, seed + 1000 + static_cast<std::uint64_t>(i));
        OrbitingDisk& d = *spec.disk;
        d.orbit_radius = (0.14 + 0.10 * rng.next_double()) * n;
        d.angular_step = (0.5 + rng.next_double()) * 2.0 * std::numbers::pi / t_count;
        d.disk_radius = (0.06 + 0.05 * rng.next_double()) * n;
        out.push_back(generate_phantom(spec));
    }
    return out;
}

// Adds independent N(0, sigma^2) noise to the real and imaginary part of
// every entry (circularly symmetric complex noise). Not renormalized.
inline DynamicImage add_image_noise(const DynamicImage& image, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("add_image_noise: sigma must be >= 0");
    if (sigma == 0.0) return image;
    DynamicImage out = image;
    CounterRng rng = CounterRng(seed).fork(0x6e6f, 0);
    for (auto& v : out.data)
        v += cplx{sigma * rng.next_gaussian(), sigma * rng.next_gaussian()};
    return out;
}

struct DatasetSplit {
    std::vector<DynamicImage> train;
    std::vector<DynamicImage> test;
};

// First `train_count` volumes train, the next `test_count` test, input order.
inline DatasetSplit split_dataset(const std::vector<DynamicImage>& volumes, int train_count, int test_count) {
    if (train_count < 0 || test_count < 0 ||
        static_cast<std::size_t>(train_count) + static_cast<std::size_t>(test_count) > volumes.size())
        throw std::invalid_argument("split_dataset: insufficient volumes");
    DatasetSplit split;
    split.train.assign(volumes.begin(), volumes.begin() + train_count);
    split.test.assign(volumes.begin() + train_count, volumes.begin() + train_count + test_count);
    return split;
}

// Energy outside the temporal-DC plane, as a fraction of total energy.
// Zero for a static video, strictly positive once anything moves.
inline double temporal_ac_fraction(const DynamicImage& image) {
    const DynamicImage xf = temporal_fft(image);
    const std::size_t stride = static_cast<std::size_t>(image.size) * image.size;
    double total = 0.0, dc = 0.0;
    for (std::size_t i = 0; i < xf.data.size(); ++i) {
        total += std::norm(xf.data[i]);
        if (i < stride) dc += std::norm(xf.data[i]);
    }
    if (total == 0.0) return 0.0;
    return (total - dc) / total;
}

} // namespace ktmask
