#pragma once

// Domain types shared by every module: dynamic complex volumes, phase-encode
// lines, sampling masks, line distributions and run configuration.
//
// Conventions (fixed across the project):
//   - frames are square, N x N pixels, T frames per volume
//   - volume storage is frame-major then row-major:
//       index(t, y, x) = (t*N + y)*N + x
//   - a phase-encode line is one full k-space row, identified by (frame, row)
//   - k-space row y = 0 is DC; rows are kept in standard DFT order

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ktmask {

using cplx = std::complex<double>;

struct Dims {
    int size = 0;   // N, pixels per side
    int frames = 0; // T

    std::int64_t lines() const { return static_cast<std::int64_t>(size) * frames; }
    std::int64_t samples() const { return static_cast<std::int64_t>(size) * size * frames; }
    bool operator==(const Dims&) const = default;
};

// One phase-encode line: row `row` of frame `frame` (N k-space samples).
struct Line {
    int frame = 0;
    int row = 0;

    bool operator==(const Line&) const = default;
    auto operator<=>(const Line&) const = default; // (frame, row) lexicographic
};

inline int line_index(const Line& ln, const Dims& d) { return ln.frame * d.size + ln.row; }
inline Line line_from_index(int idx, const Dims& d) { return Line{idx / d.size, idx % d.size}; }

// Complex-valued N x N x T volume.
struct DynamicImage {
    int size = 0;
    int frames = 0;
    std::vector<cplx> data;

    DynamicImage() = default;
    DynamicImage(int n, int t) : size(n), frames(t) {
        if (n <= 0 || t <= 0) throw std::invalid_argument("DynamicImage: dims must be positive");
        data.assign(static_cast<std::size_t>(n) * n * t, cplx{});
    }

    Dims dims() const { return Dims{size, frames}; }

    cplx& at(int t, int y, int x) {
        return data[(static_cast<std::size_t>(t) * size + static_cast<std::size_t>(y)) * size + static_cast<std::size_t>(x)];
    }
    const cplx& at(int t, int y, int x) const {
        return data[(static_cast<std::size_t>(t) * size + static_cast<std::size_t>(y)) * size + static_cast<std::size_t>(x)];
    }

    double max_magnitude() const {
        double m = 0.0;
        for (const auto& v : data) m = std::max(m, std::abs(v));
        return m;
    }

    double norm() const {
        double s = 0.0;
        for (const auto& v : data) s += std::norm(v);
        return std::sqrt(s);
    }

    // Checks shape consistency and entry finiteness.
    void validate() const {
        if (size <= 0 || frames <= 0) throw std::invalid_argument("DynamicImage: dims must be positive");
        if (data.size() != static_cast<std::size_t>(dims().samples()))
            throw std::invalid_argument("DynamicImage: data length does not match dims");
        for (const auto& v : data)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument("DynamicImage: non-finite entry");
    }
};

struct NormalizeResult {
    DynamicImage image;
    double scale = 1.0; // divisor applied: image = input / scale
};

// Scales so the maximum magnitude is exactly 1. All-zero input is rejected.
inline NormalizeResult normalize(const DynamicImage& image) {
    const double peak = image.max_magnitude();
    if (peak == 0.0) throw std::invalid_argument("degenerate image");
    NormalizeResult out{image, peak};
    for (auto& v : out.image.data) v /= peak;
    return out;
}

// Ordered, duplicate-free set of acquired lines.
struct Mask {
    Dims dims;
    std::vector<Line> lines; // acquisition order

    Mask() = default;
    explicit Mask(Dims d) : dims(d) {}
    Mask(Dims d, std::vector<Line> ls) : dims(d), lines(std::move(ls)) { validate(); }

    int line_count() const { return static_cast<int>(lines.size()); }
    std::int64_t sample_count() const { return static_cast<std::int64_t>(lines.size()) * dims.size; }

    bool contains(const Line& ln) const {
        return std::find(lines.begin(), lines.end(), ln) != lines.end();
    }

    Mask prefix(int count) const {
        if (count < 0 || count > line_count()) throw std::invalid_argument("Mask::prefix: count out of range");
        Mask m(dims);
        m.lines.assign(lines.begin(), lines.begin() + count);
        return m;
    }

    void validate() const {
        if (dims.size <= 0 || dims.frames <= 0) throw std::invalid_argument("Mask: dims must be positive");
        for (const auto& ln : lines)
            if (ln.frame < 0 || ln.frame >= dims.frames || ln.row < 0 || ln.row >= dims.size)
                throw std::invalid_argument("Mask: line out of range");
        auto sorted = lines;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("Mask: duplicate line");
    }
};

// Acquired fraction of the full k-t grid.
inline double sampling_rate(const Mask& mask) {
    if (mask.dims.lines() == 0) return 0.0;
    return static_cast<double>(mask.line_count()) / static_cast<double>(mask.dims.lines());
}

inline int lines_for_rate(double rate, const Dims& d) {
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("lines_for_rate: rate outside [0, 1]");
    return static_cast<int>(std::llround(rate * static_cast<double>(d.lines())));
}

// PMF over all candidate lines, indexed by line_index.
struct SamplingDistribution {
    Dims dims;
    std::vector<double> weights;

    SamplingDistribution() = default;

    // Normalizes nonnegative raw weights to sum 1.
    SamplingDistribution(Dims d, std::vector<double> raw) : dims(d), weights(std::move(raw)) {
        if (weights.size() != static_cast<std::size_t>(d.lines()))
            throw std::invalid_argument("SamplingDistribution: weight count does not match dims");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw std::invalid_argument("SamplingDistribution: negative or NaN weight");
            sum += w;
        }
        if (sum <= 0.0) throw std::invalid_argument("SamplingDistribution: all weights zero");
        for (double& w : weights) w /= sum;
    }

    double weight(const Line& ln) const { return weights[static_cast<std::size_t>(line_index(ln, dims))]; }
    double sum() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

inline SamplingDistribution uniform_distribution(Dims d) {
    return SamplingDistribution(d, std::vector<double>(static_cast<std::size_t>(d.lines()), 1.0));
}

enum class Variant { G, SG };
enum class TrainingMode { V1, V2 };

inline std::string to_string(Variant v) { return v == Variant::G ? "g" : "sg"; }
inline std::string to_string(TrainingMode m) { return m == TrainingMode::V1 ? "v1" : "v2"; }

struct DesignConfig {
    Variant variant = Variant::SG;
    TrainingMode training = TrainingMode::V2;
    int budget = 0;       // n, lines
    int sample_batch = 1; // k
    int train_batch = 1;  // l
    std::uint64_t seed = 0;
    std::string decoder = "zf";
    std::string metric = "psnr";
    std::vector<Line> warm_start; // lines acquired before the loop starts

    // m = training set size; throws with the offending field named.
    void validate(const Dims& dims, int m) const {
        if (budget < 0 || budget > dims.lines()) throw std::invalid_argument("DesignConfig: budget exceeds N*T");
        if (sample_batch < 1 || sample_batch > dims.size)
            throw std::invalid_argument("DesignConfig: sample_batch outside [1, N]");
        if (train_batch < 1 || train_batch > m)
            throw std::invalid_argument("DesignConfig: train_batch outside [1, m]");
        Mask warm(dims, warm_start); // range + duplicate check
        if (static_cast<int>(warm_start.size()) > budget)
            throw std::invalid_argument("DesignConfig: warm_start longer than budget");
    }
};

// Evaluation record for one mask at one rate.
struct MetricReport {
    std::string mask_id;
    double rate = 0.0;
    std::vector<double> per_image;
    double mean = 0.0;
    std::string decoder_id;
    std::string metric_id;
    std::int64_t decoder_call_count = 0;
};

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean_of: empty");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace ktmask
