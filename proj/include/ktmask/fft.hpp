#pragma once

// Self-contained 1-D complex FFT kernels: iterative radix-2 for power-of-two
// lengths, Bluestein's chirp-z resampling for everything else. Unnormalized;
// callers apply their own scaling. Plans (twiddle/bit-reversal tables) are
// cached per thread, so transforms are bit-identical for identical inputs
// regardless of thread count.

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <vector>

#include "ktmask/core.hpp"

namespace ktmask::fft {

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

struct Radix2Tables {
    std::size_t n = 0;
    std::vector<std::size_t> bitrev;
    std::vector<cplx> twiddle; // e^{-2*pi*i*k/n}, k < n/2

    explicit Radix2Tables(std::size_t size) : n(size) {
        bitrev.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            bitrev[i] = r;
        }
        twiddle.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            twiddle[k] = cplx{std::cos(a), std::sin(a)};
        }
    }

    void forward(cplx* data) const {
        for (std::size_t i = 0; i < n; ++i)
            if (bitrev[i] > i) std::swap(data[i], data[bitrev[i]]);
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len / 2;
            const std::size_t step = n / len;
            for (std::size_t base = 0; base < n; base += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    const cplx w = twiddle[j * step];
                    const cplx u = data[base + j];
                    const cplx v = data[base + j + half] * w;
                    data[base + j] = u + v;
                    data[base + j + half] = u - v;
                }
            }
        }
    }
};

struct BluesteinTables {
    std::size_t n = 0;
    std::size_t m = 0;           // padded power-of-two length, >= 2n-1
    std::vector<cplx> chirp;     // e^{-i*pi*j^2/n}, j < n  (via j^2 mod 2n for accuracy)
    std::vector<cplx> kernel_ft; // forward FFT of the wrapped conjugate chirp
    std::unique_ptr<Radix2Tables> pow2;

    explicit BluesteinTables(std::size_t size) : n(size), m(next_pow2(2 * size - 1)) {
        pow2 = std::make_unique<Radix2Tables>(m);
        chirp.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t q = (j * j) % (2 * n);
            const double a = -std::numbers::pi * static_cast<double>(q) / static_cast<double>(n);
            chirp[j] = cplx{std::cos(a), std::sin(a)};
        }
        std::vector<cplx> b(m, cplx{});
        b[0] = std::conj(chirp[0]);
        for (std::size_t j = 1; j < n; ++j) {
            b[j] = std::conj(chirp[j]);
            b[m - j] = std::conj(chirp[j]);
        }
        pow2->forward(b.data());
        kernel_ft = std::move(b);
    }

    void forward(cplx* data, std::vector<cplx>& scratch) const {
        scratch.assign(m, cplx{});
        for (std::size_t j = 0; j < n; ++j) scratch[j] = data[j] * chirp[j];
        pow2->forward(scratch.data());
        // pointwise product, then inverse transform by conjugation, scale 1/m
        for (std::size_t k = 0; k < m; ++k) scratch[k] = std::conj(scratch[k] * kernel_ft[k]);
        pow2->forward(scratch.data());
        const double inv_m = 1.0 / static_cast<double>(m);
        for (std::size_t k = 0; k < n; ++k) data[k] = chirp[k] * std::conj(scratch[k]) * inv_m;
    }
};

struct Plan {
    std::unique_ptr<Radix2Tables> radix2;
    std::unique_ptr<BluesteinTables> bluestein;
    mutable std::vector<cplx> scratch;

    explicit Plan(std::size_t n) {
        if (is_pow2(n))
            radix2 = std::make_unique<Radix2Tables>(n);
        else
            bluestein = std::make_unique<BluesteinTables>(n);
    }

    void forward(cplx* data) const {
        if (radix2)
            radix2->forward(data);
        else
            bluestein->forward(data, scratch);
    }
};

inline const Plan& plan_for(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<Plan>> cache;
    thread_local const Plan* last = nullptr;
    thread_local std::size_t last_n = 0;
    if (n == last_n && last) return *last;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<Plan>(n)).first;
    last = it->second.get();
    last_n = n;
    return *last;
}

} // namespace detail

// In-place unnormalized DFT, X_k = sum_j x_j e^{-2*pi*i*j*k/n}.
inline void dft_inplace(cplx* data, std::size_t n) {
    if (n <= 1) return;
    detail::plan_for(n).forward(data);
}

// In-place unnormalized inverse DFT (sign +1, no 1/n factor).
inline void idft_inplace(cplx* data, std::size_t n) {
    if (n <= 1) return;
    for (std::size_t i = 0; i < n; ++i) data[i] = std::conj(data[i]);
    detail::plan_for(n).forward(data);
    for (std::size_t i = 0; i < n; ++i) data[i] = std::conj(data[i]);
}

} // namespace ktmask::fft
