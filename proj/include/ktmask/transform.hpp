#pragma once

// Unitary Fourier operators and the subsampled line-acquisition operator.
//
// Normalization is unitary throughout: 1/N per 2-D frame transform, 1/sqrt(T)
// per temporal pass, in both directions. The composed acquisition operator
// (sample) therefore has operator norm 1, which fixes a safe unit step for
// proximal-gradient decoding.

#include <complex>
#include <stdexcept>
#include <vector>

#include "ktmask/core.hpp"
#include "ktmask/fft.hpp"

namespace ktmask {

// Spatial-frequency volume, same shape and layout as the image it came from.
struct KSpaceVolume {
    int size = 0;
    int frames = 0;
    std::vector<cplx> data;

    Dims dims() const { return Dims{size, frames}; }
    cplx& at(int t, int y, int x) {
        return data[(static_cast<std::size_t>(t) * size + static_cast<std::size_t>(y)) * size + static_cast<std::size_t>(x)];
    }
    const cplx& at(int t, int y, int x) const {
        return data[(static_cast<std::size_t>(t) * size + static_cast<std::size_t>(y)) * size + static_cast<std::size_t>(x)];
    }
};

// Subsampled measurements b: N samples per acquired line, ordered by mask
// acquisition order, then column.
struct Measurements {
    Mask mask;
    std::vector<cplx> values;

    void validate() const {
        mask.validate();
        if (values.size() != static_cast<std::size_t>(mask.sample_count()))
            throw std::invalid_argument("Measurements: value count does not match mask");
    }
};

namespace detail {

// Per-frame 2-D transform over the whole volume, in place. Rows are
// contiguous; columns go through a scratch buffer.
inline void spatial_pass(std::vector<cplx>& data, int n, int t_count, bool inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    std::vector<cplx> col(static_cast<std::size_t>(n));
    for (int t = 0; t < t_count; ++t) {
        cplx* frame = data.data() + static_cast<std::size_t>(t) * n * n;
        for (int y = 0; y < n; ++y) {
            cplx* row = frame + static_cast<std::size_t>(y) * n;
            if (inverse)
                fft::idft_inplace(row, static_cast<std::size_t>(n));
            else
                fft::dft_inplace(row, static_cast<std::size_t>(n));
        }
        for (int x = 0; x < n; ++x) {
            for (int y = 0; y < n; ++y) col[static_cast<std::size_t>(y)] = frame[static_cast<std::size_t>(y) * n + x];
            if (inverse)
                fft::idft_inplace(col.data(), static_cast<std::size_t>(n));
            else
                fft::dft_inplace(col.data(), static_cast<std::size_t>(n));
            for (int y = 0; y < n; ++y) frame[static_cast<std::size_t>(y) * n + x] = col[static_cast<std::size_t>(y)] * scale;
        }
    }
}

inline void temporal_pass(std::vector<cplx>& data, int n, int t_count, bool inverse) {
    if (t_count == 1) return;
    const double scale = 1.0 / std::sqrt(static_cast<double>(t_count));
    const std::size_t stride = static_cast<std::size_t>(n) * n;
    std::vector<cplx> series(static_cast<std::size_t>(t_count));
    for (std::size_t pix = 0; pix < stride; ++pix) {
        for (int t = 0; t < t_count; ++t) series[static_cast<std::size_t>(t)] = data[pix + static_cast<std::size_t>(t) * stride];
        if (inverse)
            fft::idft_inplace(series.data(), static_cast<std::size_t>(t_count));
        else
            fft::dft_inplace(series.data(), static_cast<std::size_t>(t_count));
        for (int t = 0; t < t_count; ++t) data[pix + static_cast<std::size_t>(t) * stride] = series[static_cast<std::size_t>(t)] * scale;
    }
}

} // namespace detail

// Psi: per-frame unitary 2-D DFT. Row y = 0 of each frame is DC.
inline KSpaceVolume forward_fft(const DynamicImage& image) {
    KSpaceVolume k{image.size, image.frames, image.data};
    detail::spatial_pass(k.data, k.size, k.frames, /*inverse=*/false);
    return k;
}

// Psi*: exact inverse (and adjoint) of forward_fft.
inline DynamicImage inverse_fft(const KSpaceVolume& k) {
    DynamicImage image(k.size, k.frames);
    image.data = k.data;
    detail::spatial_pass(image.data, image.size, image.frames, /*inverse=*/true);
    return image;
}

// Phi: unitary 1-D DFT along the frame axis, per pixel (x-f domain).
inline DynamicImage temporal_fft(const DynamicImage& image) {
    DynamicImage out = image;
    detail::temporal_pass(out.data, out.size, out.frames, /*inverse=*/false);
    return out;
}

inline DynamicImage temporal_ifft(const DynamicImage& image) {
    DynamicImage out = image;
    detail::temporal_pass(out.data, out.size, out.frames, /*inverse=*/true);
    return out;
}

// Gathers the acquired lines of an already-transformed volume, in mask order.
inline Measurements sample_kspace(const KSpaceVolume& k, const Mask& mask) {
    if (mask.dims != k.dims()) throw std::invalid_argument("sample: mask dims do not match volume");
    Measurements m{mask, {}};
    m.values.reserve(static_cast<std::size_t>(mask.sample_count()));
    for (const auto& ln : mask.lines) {
        const cplx* row = k.data.data() + (static_cast<std::size_t>(ln.frame) * k.size + static_cast<std::size_t>(ln.row)) * k.size;
        m.values.insert(m.values.end(), row, row + k.size);
    }
    return m;
}

// b = P_Omega Psi x (noise-free acquisition).
inline Measurements sample(const DynamicImage& image, const Mask& mask) {
    if (mask.dims != image.dims()) throw std::invalid_argument("sample: mask dims do not match image");
    return sample_kspace(forward_fft(image), mask);
}

// Psi* P_Omega* b: scatter into an empty spectrum, then invert.
inline DynamicImage adjoint_sample(const Measurements& meas) {
    meas.validate();
    const Dims d = meas.mask.dims;
    KSpaceVolume k{d.size, d.frames, std::vector<cplx>(static_cast<std::size_t>(d.samples()), cplx{})};
    const cplx* src = meas.values.data();
    for (const auto& ln : meas.mask.lines) {
        cplx* row = k.data.data() + (static_cast<std::size_t>(ln.frame) * d.size + static_cast<std::size_t>(ln.row)) * d.size;
        std::copy(src, src + d.size, row);
        src += d.size;
    }
    return inverse_fft(k);
}

} // namespace ktmask
