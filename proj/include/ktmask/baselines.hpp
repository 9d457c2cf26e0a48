#pragma once

// Variable-density baselines and the sampling-theory check.
//
// Both baseline designs share one recipe: a per-frame Gaussian row density
// (DC-centered, wrap-aware), a forced band of c central rows per frame, and
// sequential weighted sampling without replacement for the rest. Coherence-VD
// picks the grid cell whose masks have the lowest mean point-spread sidelobe
// ratio; LB-VD picks the cell whose masks reconstruct the training set best.

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ktmask/core.hpp"
#include "ktmask/decoders.hpp"
#include "ktmask/fft.hpp"
#include "ktmask/io.hpp"
#include "ktmask/metrics.hpp"
#include "ktmask/parallel.hpp"
#include "ktmask/rng.hpp"
#include "ktmask/transform.hpp"

namespace ktmask {

struct VDParams {
    double width = 0.15; // Gaussian std as a fraction of N
    int central = 0;     // fully sampled low-frequency rows per frame
    double rate = 0.0;   // sampling fraction; 0 = inherit the design-level rate

    void validate(const Dims& dims) const {
        if (!(width > 0.0)) throw std::invalid_argument("VDParams: width must be > 0");
        if (central < 0 || central > dims.size) throw std::invalid_argument("VDParams: central outside [0, N]");
        if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("VDParams: rate outside [0, 1]");
        if (rate > 0.0 && static_cast<std::int64_t>(central) * dims.frames > lines_for_rate(rate, dims))
            throw std::invalid_argument("VDParams: central band exceeds the line budget");
    }
};

// DC-centered frequency distance of row y: 0 at DC, wrapping at N.
inline int row_distance(int y, int n) { return std::min(y, n - y); }

// Per-frame Gaussian row density, identical across frames, normalized over
// all N*T lines. The forced central band is handled by draw_mask, not here.
inline SamplingDistribution gaussian_vd_pmf(const VDParams& params, Dims dims) {
    if (!(params.width > 0.0)) throw std::invalid_argument("VDParams: width must be > 0");
    const double sigma = params.width * dims.size;
    std::vector<double> weights(static_cast<std::size_t>(dims.lines()));
    for (int y = 0; y < dims.size; ++y) {
        const double d = row_distance(y, dims.size);
        const double w = std::exp(-d * d / (2.0 * sigma * sigma));
        for (int t = 0; t < dims.frames; ++t)
            weights[static_cast<std::size_t>(line_index({t, y}, dims))] = w;
    }
    return SamplingDistribution(dims, std::move(weights));
}

// The c lowest-frequency rows of every frame: rows ordered by
// (distance-to-DC, row index), so the band is symmetric around row 0.
inline std::vector<Line> central_lines(int c, Dims dims) {
    if (c < 0 || c > dims.size) throw std::invalid_argument("central_lines: count outside [0, N]");
    std::vector<int> rows(static_cast<std::size_t>(dims.size));
    for (int y = 0; y < dims.size; ++y) rows[static_cast<std::size_t>(y)] = y;
    std::stable_sort(rows.begin(), rows.end(),
                     [&](int a, int b) { return row_distance(a, dims.size) < row_distance(b, dims.size); });
    std::vector<Line> out;
    out.reserve(static_cast<std::size_t>(c) * dims.frames);
    for (int t = 0; t < dims.frames; ++t)
        for (int i = 0; i < c; ++i) out.push_back({t, rows[static_cast<std::size_t>(i)]});
    return out;
}

// Forced lines first, then sequential draws without replacement with
// probability proportional to the remaining weights. If every remaining line
// has zero weight the draw falls back to uniform, so n = N*T always yields
// the full grid whatever the density.
inline Mask draw_mask(const SamplingDistribution& f, int n, const std::vector<Line>& forced, std::uint64_t seed) {
    const Dims dims = f.dims;
    if (n < 0 || n > dims.lines()) throw std::invalid_argument("draw_mask: n exceeds N*T");
    if (static_cast<int>(forced.size()) > n) throw std::invalid_argument("draw_mask: n smaller than forced set");

    Mask mask(dims, forced); // validates range and duplicates

    // packed pool of still-available lines and their weights
    std::vector<int> pool;
    std::vector<double> weight;
    {
        std::vector<char> taken(static_cast<std::size_t>(dims.lines()), 0);
        for (const auto& ln : forced) taken[static_cast<std::size_t>(line_index(ln, dims))] = 1;
        pool.reserve(static_cast<std::size_t>(dims.lines()) - forced.size());
        for (int i = 0; i < dims.lines(); ++i)
            if (!taken[static_cast<std::size_t>(i)]) {
                pool.push_back(i);
                weight.push_back(f.weights[static_cast<std::size_t>(i)]);
            }
    }

    CounterRng rng(seed);
    double total = 0.0;
    for (double w : weight) total += w;
    while (mask.line_count() < n) {
        std::size_t pick = 0;
        if (total > 0.0) {
            const double u = rng.next_double() * total;
            double acc = 0.0;
            pick = weight.size() - 1; // guard against accumulated rounding
            for (std::size_t i = 0; i < weight.size(); ++i) {
                acc += weight[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(rng.next_below(pool.size()));
        }
        mask.lines.push_back(line_from_index(pool[pick], dims));
        total -= weight[pick];
        pool[pick] = pool.back();
        weight[pick] = weight.back();
        pool.pop_back();
        weight.pop_back();
        if (total < 0.0) total = 0.0;
    }
    mask.validate();
    return mask;
}

// ---------------------------------------------------------------------------
// Coherence
// ---------------------------------------------------------------------------

// Point-spread sidelobe ratio. Per frame, the PSF of a row mask replicated
// across columns concentrates in a single column, so it reduces to the 1-D
// inverse DFT of the row indicator: coherence of the frame is
// max_{p != 0} |PSF(p)| / |PSF(0)|, and the mask's coherence is the worst
// frame. Frames with no acquired line are skipped.
inline double coherence(const Mask& mask) {
    if (mask.lines.empty()) throw std::invalid_argument("coherence: empty mask");
    const int n = mask.dims.size;
    std::vector<std::vector<char>> rows(static_cast<std::size_t>(mask.dims.frames),
                                        std::vector<char>(static_cast<std::size_t>(n), 0));
    for (const auto& ln : mask.lines) rows[static_cast<std::size_t>(ln.frame)][static_cast<std::size_t>(ln.row)] = 1;

    double worst = 0.0;
    std::vector<cplx> psf(static_cast<std::size_t>(n));
    for (int t = 0; t < mask.dims.frames; ++t) {
        int count = 0;
        for (int y = 0; y < n; ++y) {
            psf[static_cast<std::size_t>(y)] = cplx{rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(y)] ? 1.0 : 0.0, 0.0};
            count += rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(y)];
        }
        if (count == 0) continue;
        fft::idft_inplace(psf.data(), static_cast<std::size_t>(n));
        double side = 0.0;
        for (int p = 1; p < n; ++p) side = std::max(side, std::abs(psf[static_cast<std::size_t>(p)]));
        worst = std::max(worst, side / std::abs(psf[0]));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Grid designs
// ---------------------------------------------------------------------------

struct CellReport {
    VDParams params;
    bool feasible = true;
    double mean = 0.0;   // mean coherence (Coherence-VD) or mean metric (LB-VD)
    double stddev = 0.0; // over the per-draw values
    bool winner = false;
};

struct VDDesignResult {
    VDParams params; // winning cell
    Mask mask;       // representative mask drawn from the winner
    std::vector<CellReport> cells;
};

// Default search grid: 5 Gaussian widths uniformly spread in [0.05, 0.3] and
// 4 central-band sizes evenly spaced between 2 and min(18, N). Cells whose
// forced band exceeds the line budget are reported infeasible and skipped.
inline std::vector<VDParams> default_vd_grid(Dims dims) {
    std::vector<VDParams> grid;
    const int cmax = std::min(18, dims.size);
    for (int wi = 0; wi < 5; ++wi) {
        const double width = 0.05 + (0.3 - 0.05) * wi / 4.0;
        for (int ci = 0; ci < 4; ++ci) {
            const int central = 2 + (cmax - 2) * ci / 3;
            grid.push_back({width, central, 0.0});
        }
    }
    return grid;
}

namespace detail {

inline std::uint64_t derived_seed(const CounterRng& root, std::uint64_t a, std::uint64_t b) {
    CounterRng sub = root.fork(a, b);
    return sub.next_u64();
}

struct CellPlan {
    VDParams params;
    SamplingDistribution pmf;
    std::vector<Line> forced;
    int budget = 0;
};

// Resolve per-cell rate, feasibility and the forced band; shared by both
// grid designs so their cell numbering and mask draws line up.
inline std::vector<CellReport> plan_cells(double rate, Dims dims, const std::vector<VDParams>& grid,
                                          std::vector<CellPlan>& plans) {
    if (grid.empty()) throw std::invalid_argument("vd design: empty grid");
    std::vector<CellReport> reports;
    for (const auto& cell : grid) {
        VDParams p = cell;
        if (p.rate == 0.0) p.rate = rate;
        CellReport rep;
        rep.params = p;
        const int n = lines_for_rate(p.rate, dims);
        rep.feasible = p.central <= dims.size && static_cast<std::int64_t>(p.central) * dims.frames <= n && n >= 1;
        if (rep.feasible) {
            plans.push_back({p, gaussian_vd_pmf(p, dims), central_lines(p.central, dims), n});
        } else {
            plans.push_back({p, SamplingDistribution{}, {}, n});
            rep.mean = std::numeric_limits<double>::quiet_NaN();
            rep.stddev = std::numeric_limits<double>::quiet_NaN();
        }
        reports.push_back(rep);
    }
    return reports;
}

inline void mean_std(const std::vector<double>& v, double& mean, double& stddev) {
    mean = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    stddev = v.size() > 1 ? std::sqrt(acc / static_cast<double>(v.size() - 1)) : 0.0;
}

} // namespace detail

// Grid search minimizing the mean coherence of `draws` masks per cell.
inline VDDesignResult coherence_vd_design(double rate, Dims dims, const std::vector<VDParams>& grid,
                                          int draws, std::uint64_t seed) {
    if (draws < 1) throw std::invalid_argument("vd design: draws must be >= 1");
    std::vector<detail::CellPlan> plans;
    VDDesignResult res;
    res.cells = detail::plan_cells(rate, dims, grid, plans);
    const CounterRng root(seed);

    std::size_t best = plans.size();
    for (std::size_t ci = 0; ci < plans.size(); ++ci) {
        if (!res.cells[ci].feasible) continue;
        std::vector<double> values(static_cast<std::size_t>(draws));
        for (int d = 0; d < draws; ++d) {
            const Mask m = draw_mask(plans[ci].pmf, plans[ci].budget, plans[ci].forced,
                                     detail::derived_seed(root, ci, static_cast<std::uint64_t>(d)));
            values[static_cast<std::size_t>(d)] = coherence(m);
        }
        detail::mean_std(values, res.cells[ci].mean, res.cells[ci].stddev);
        if (best == plans.size() || res.cells[ci].mean < res.cells[best].mean) best = ci;
    }
    if (best == plans.size()) throw std::invalid_argument("vd design: no feasible grid cell");

    res.cells[best].winner = true;
    res.params = res.cells[best].params;
    res.mask = draw_mask(plans[best].pmf, plans[best].budget, plans[best].forced,
                         detail::derived_seed(root, 0x77696e, best));
    return res;
}

// Grid search maximizing the mean training-set metric over `draws` masks per
// cell; every mask reconstructs every training image through the decoder.
inline VDDesignResult lbvd_design(double rate, Dims dims, const std::vector<VDParams>& grid, int draws,
                                  const std::vector<DynamicImage>& training, const Decoder& decoder,
                                  const MetricSpec& metric, std::uint64_t seed, int threads = 1) {
    if (draws < 1) throw std::invalid_argument("vd design: draws must be >= 1");
    if (training.empty()) throw std::invalid_argument("vd design: no training images");
    for (const auto& img : training)
        if (img.dims() != dims) throw std::invalid_argument("vd design: training images differ in dims");

    std::vector<detail::CellPlan> plans;
    VDDesignResult res;
    res.cells = detail::plan_cells(rate, dims, grid, plans);
    const CounterRng root(seed);

    std::vector<KSpaceVolume> kspaces;
    kspaces.reserve(training.size());
    for (const auto& img : training) kspaces.push_back(forward_fft(img));

    // flatten feasible (cell, draw) pairs; each slot holds one draw's mean
    std::vector<std::size_t> slot_cell;
    std::vector<int> slot_draw;
    for (std::size_t ci = 0; ci < plans.size(); ++ci) {
        if (!res.cells[ci].feasible) continue;
        for (int d = 0; d < draws; ++d) {
            slot_cell.push_back(ci);
            slot_draw.push_back(d);
        }
    }
    std::vector<double> slot_value(slot_cell.size());
    parallel_for(static_cast<std::int64_t>(slot_cell.size()), threads, [&](std::int64_t s) {
        const std::size_t ci = slot_cell[static_cast<std::size_t>(s)];
        const int d = slot_draw[static_cast<std::size_t>(s)];
        const Mask m = draw_mask(plans[ci].pmf, plans[ci].budget, plans[ci].forced,
                                 detail::derived_seed(root, ci, static_cast<std::uint64_t>(d)));
        double sum = 0.0;
        for (std::size_t i = 0; i < training.size(); ++i) {
            const DynamicImage recon = decoder.decode(sample_kspace(kspaces[i], m));
            sum += evaluate_metric(metric, training[i], recon);
        }
        slot_value[static_cast<std::size_t>(s)] = sum / static_cast<double>(training.size());
    });

    std::size_t best = plans.size();
    std::vector<double> values;
    for (std::size_t s = 0; s < slot_cell.size();) {
        const std::size_t ci = slot_cell[s];
        values.clear();
        for (; s < slot_cell.size() && slot_cell[s] == ci; ++s) values.push_back(slot_value[s]);
        detail::mean_std(values, res.cells[ci].mean, res.cells[ci].stddev);
        if (best == plans.size() || res.cells[ci].mean > res.cells[best].mean) best = ci;
    }
    if (best == plans.size()) throw std::invalid_argument("vd design: no feasible grid cell");

    res.cells[best].winner = true;
    res.params = res.cells[best].params;
    res.mask = draw_mask(plans[best].pmf, plans[best].budget, plans[best].forced,
                         detail::derived_seed(root, 0x77696e, best));
    return res;
}

// CSV report: one row per grid cell in scan order.
inline void write_vd_report(const std::string& path, const std::vector<CellReport>& cells) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file: " + path);
    out << "width,central,feasible,mean,std,winner\n";
    for (const auto& c : cells) {
        out << format_g6(c.params.width) << "," << c.params.central << "," << (c.feasible ? 1 : 0) << ","
            << (c.feasible ? format_g6(c.mean) : "nan") << "," << (c.feasible ? format_g6(c.stddev) : "nan") << ","
            << (c.winner ? 1 : 0) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Sampling-theory check
// ---------------------------------------------------------------------------

struct PropCheckReport {
    double mc_mean = 0.0;      // Monte-Carlo estimate of E[eta] under f
    double mc_stderr = 0.0;
    double brute_max = 0.0;    // exhaustive max of eta over all n-line masks
    std::vector<Line> best_mask;
    std::int64_t masks_enumerated = 0;
    int samples = 0;
    bool inequality_ok = false; // mc_mean <= brute_max + 3 * stderr
    bool degenerate_ok = false; // uniform PMF on the argmax re-achieves the max
};

// Brute-force verification that no distribution beats the best fixed mask:
// enumerate every n-line mask, evaluate the mean metric over the images, and
// compare the Monte-Carlo expectation under f against the exhaustive max.
// The score of a mask depends only on its line set, so Monte-Carlo draws are
// looked up from the enumeration table and the degenerate-PMF equality check
// is bit-exact.
inline PropCheckReport prop_check(const SamplingDistribution& f, int n, int samples,
                                  const std::vector<DynamicImage>& images, const Decoder& decoder,
                                  const MetricSpec& metric, std::uint64_t seed) {
    const Dims dims = f.dims;
    if (dims.lines() > 20) throw std::invalid_argument("prop_check: dims too large for brute force");
    if (images.empty()) throw std::invalid_argument("prop_check: no images");
    if (n < 1 || n > dims.lines()) throw std::invalid_argument("prop_check: n outside [1, N*T]");
    if (samples < 1) throw std::invalid_argument("prop_check: samples must be >= 1");
    const int nlines = static_cast<int>(dims.lines());

    std::vector<KSpaceVolume> kspaces;
    for (const auto& img : images) kspaces.push_back(forward_fft(img));

    PropCheckReport rep;
    rep.samples = samples;
    std::vector<double> table(std::size_t{1} << nlines, std::numeric_limits<double>::quiet_NaN());
    std::uint32_t best_bits = 0;
    for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << nlines); ++bits) {
        if (std::popcount(bits) != n) continue;
        Mask mask(dims);
        for (int i = 0; i < nlines; ++i)
            if (bits & (std::uint32_t{1} << i)) mask.lines.push_back(line_from_index(i, dims));
        double sum = 0.0;
        for (std::size_t j = 0; j < images.size(); ++j)
            sum += evaluate_metric(metric, images[j], decoder.decode(sample_kspace(kspaces[j], mask)));
        const double eta = sum / static_cast<double>(images.size());
        table[bits] = eta;
        if (rep.masks_enumerated == 0 || eta > rep.brute_max) {
            rep.brute_max = eta;
            best_bits = bits;
        }
        rep.masks_enumerated += 1;
    }
    for (int i = 0; i < nlines; ++i)
        if (best_bits & (std::uint32_t{1} << i)) rep.best_mask.push_back(line_from_index(i, dims));

    const CounterRng root(seed);
    double sum = 0.0, sumsq = 0.0, first = 0.0;
    bool all_same = true;
    for (int s = 0; s < samples; ++s) {
        const Mask m = draw_mask(f, n, {}, detail::derived_seed(root, 0x6d63, static_cast<std::uint64_t>(s)));
        std::uint32_t bits = 0;
        for (const auto& ln : m.lines) bits |= std::uint32_t{1} << line_index(ln, dims);
        const double eta = table[bits];
        if (s == 0) first = eta;
        all_same = all_same && eta == first;
        sum += eta;
        sumsq += eta * eta;
    }
    if (all_same) {
        // degenerate distributions must reproduce the table value exactly
        rep.mc_mean = first;
        rep.mc_stderr = 0.0;
    } else {
        rep.mc_mean = sum / samples;
        const double var = std::max(0.0, sumsq / samples - rep.mc_mean * rep.mc_mean);
        rep.mc_stderr = std::sqrt(var / samples);
    }
    rep.inequality_ok = rep.mc_mean <= rep.brute_max + 3.0 * rep.mc_stderr;

    // a PMF concentrated on the argmax must reproduce the max exactly
    std::vector<double> degen(static_cast<std::size_t>(dims.lines()), 0.0);
    for (const auto& ln : rep.best_mask) degen[static_cast<std::size_t>(line_index(ln, dims))] = 1.0;
    const Mask dm = draw_mask(SamplingDistribution(dims, std::move(degen)), n, {},
                              detail::derived_seed(root, 0x6467, 0));
    std::uint32_t dbits = 0;
    for (const auto& ln : dm.lines) dbits |= std::uint32_t{1} << line_index(ln, dims);
    rep.degenerate_ok = dbits == best_bits && table[dbits] == rep.brute_max;
    return rep;
}

} // namespace ktmask
