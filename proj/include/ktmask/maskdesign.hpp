#pragma once

// Greedy sampling-mask optimization. Starting from an (optionally warm)
// mask, each iteration scores a set of candidate phase-encode lines by mean
// reconstruction quality over a training batch and appends the best one, so
// every prefix of the output is itself an optimized mask (nested structure).
//
// Variants:
//   G  — candidates are all unacquired lines across all frames.
//   SG — candidates are k lines drawn without replacement from one frame;
//        the frame index cycles 0, 1, ..., T-1, skipping exhausted frames.
// Training modes:
//   v1 — every candidate is scored on all m training images.
//   v2 — each iteration draws a fresh batch of l images without replacement.
//
// Determinism contract: the output depends only on (config, training set).
// Candidate and training batches are re-sorted ascending after drawing and
// per-iteration substreams are forked by iteration index, so results are
// independent of thread count and identical prefixes continue identically
// when only the budget changes.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ktmask/core.hpp"
#include "ktmask/decoders.hpp"
#include "ktmask/io.hpp"
#include "ktmask/metrics.hpp"
#include "ktmask/parallel.hpp"
#include "ktmask/rng.hpp"
#include "ktmask/transform.hpp"

namespace ktmask {

struct TraceEntry {
    int iteration = 0;
    int frame = -1;               // SG: frame drawn from; G: -1 (all frames)
    bool shrunk = false;          // SG: frame held fewer than k free lines
    std::vector<int> train_batch; // image indices scored, ascending
    std::vector<Line> candidates; // ascending
    std::vector<double> scores;   // parallel to candidates
    Line selected;
    std::int64_t calls_cumulative = 0;
};

struct DesignTrace {
    std::vector<TraceEntry> entries;

    std::int64_t total_calls() const {
        return entries.empty() ? 0 : entries.back().calls_cumulative;
    }
};

struct DesignResult {
    Mask mask;
    DesignTrace trace;
};

// ---------------------------------------------------------------------------
// Closed-form decoder-call counts
// ---------------------------------------------------------------------------

// Exact number of decoder invocations a design run performs, assuming an
// empty starting mask. SG counts simulate the frame cycle so per-frame
// shrinkage is counted with actual candidate sizes.
inline std::int64_t predict_calls(Variant variant, TrainingMode training, Dims dims,
                                  int m, int k, int l, int n) {
    if (n < 0 || n > dims.lines()) throw std::invalid_argument("predict_calls: budget exceeds N*T");
    const std::int64_t batch = training == TrainingMode::V1 ? m : l;
    if (variant == Variant::G) {
        std::int64_t total = 0;
        for (int i = 0; i < n; ++i) total += dims.lines() - i;
        return batch * total;
    }
    std::vector<int> remaining(static_cast<std::size_t>(dims.frames), dims.size);
    std::int64_t total = 0;
    int t = 0;
    for (int i = 0; i < n; ++i) {
        while (remaining[static_cast<std::size_t>(t)] == 0) t = (t + 1) % dims.frames;
        total += std::min(k, remaining[static_cast<std::size_t>(t)]);
        remaining[static_cast<std::size_t>(t)] -= 1;
        t = (t + 1) % dims.frames;
    }
    return batch * total;
}

// ---------------------------------------------------------------------------
// The design loop
// ---------------------------------------------------------------------------

inline DesignResult design_mask(const DesignConfig& cfg, const std::vector<DynamicImage>& training,
                                const Decoder& decoder, const MetricSpec& metric, int threads = 1) {
    if (training.empty()) throw std::invalid_argument("design_mask: no training images");
    const Dims dims = training[0].dims();
    for (const auto& img : training)
        if (img.dims() != dims) throw std::invalid_argument("design_mask: training images differ in dims");
    const int m = static_cast<int>(training.size());
    cfg.validate(dims, m);
    threads = resolve_threads(threads);

    // one forward transform per training image for the whole run
    std::vector<KSpaceVolume> kspaces;
    kspaces.reserve(training.size());
    for (const auto& img : training) kspaces.push_back(forward_fft(img));

    DesignResult res;
    res.mask = Mask(dims, cfg.warm_start);

    // per-frame pool of unacquired rows, ascending
    std::vector<std::vector<int>> free_rows(static_cast<std::size_t>(dims.frames));
    {
        std::vector<char> taken(static_cast<std::size_t>(dims.lines()), 0);
        for (const auto& ln : res.mask.lines) taken[static_cast<std::size_t>(line_index(ln, dims))] = 1;
        for (int t = 0; t < dims.frames; ++t)
            for (int y = 0; y < dims.size; ++y)
                if (!taken[static_cast<std::size_t>(line_index({t, y}, dims))])
                    free_rows[static_cast<std::size_t>(t)].push_back(y);
    }

    const CounterRng root(cfg.seed);
    std::int64_t calls = 0;
    int next_frame = 0;

    while (res.mask.line_count() < cfg.budget) {
        const int iter = static_cast<int>(res.trace.entries.size());
        TraceEntry entry;
        entry.iteration = iter;

        // -- candidate set ---------------------------------------------------
        if (cfg.variant == Variant::G) {
            for (int t = 0; t < dims.frames; ++t)
                for (int y : free_rows[static_cast<std::size_t>(t)]) entry.candidates.push_back({t, y});
        } else {
            while (free_rows[static_cast<std::size_t>(next_frame)].empty())
                next_frame = (next_frame + 1) % dims.frames;
            entry.frame = next_frame;
            const auto& pool = free_rows[static_cast<std::size_t>(next_frame)];
            if (cfg.sample_batch >= static_cast<int>(pool.size())) {
                entry.shrunk = cfg.sample_batch > static_cast<int>(pool.size());
                for (int y : pool) entry.candidates.push_back({next_frame, y});
            } else {
                CounterRng cand_rng = root.fork(0x63616e64, static_cast<std::uint64_t>(iter)); // "cand"
                auto picks = sample_without_replacement(static_cast<int>(pool.size()), cfg.sample_batch, cand_rng);
                std::sort(picks.begin(), picks.end());
                for (int p : picks) entry.candidates.push_back({next_frame, pool[static_cast<std::size_t>(p)]});
            }
        }

        // -- training batch --------------------------------------------------
        if (cfg.training == TrainingMode::V1 || cfg.train_batch == m) {
            entry.train_batch.resize(static_cast<std::size_t>(m));
            std::iota(entry.train_batch.begin(), entry.train_batch.end(), 0);
        } else {
            CounterRng train_rng = root.fork(0x74726e, static_cast<std::uint64_t>(iter)); // "trn"
            entry.train_batch = sample_without_replacement(m, cfg.train_batch, train_rng);
            std::sort(entry.train_batch.begin(), entry.train_batch.end());
        }

        // -- score candidates ------------------------------------------------
        const std::size_t n_cand = entry.candidates.size();
        const std::size_t n_batch = entry.train_batch.size();
        // acquired values per batch image, extended per candidate below
        std::vector<std::vector<cplx>> base_values(n_batch);
        for (std::size_t bi = 0; bi < n_batch; ++bi)
            base_values[bi] = sample_kspace(kspaces[static_cast<std::size_t>(entry.train_batch[bi])], res.mask).values;

        std::vector<double> parts(n_cand * n_batch);
        parallel_for(static_cast<std::int64_t>(parts.size()), threads, [&](std::int64_t slot) {
            const std::size_t ci = static_cast<std::size_t>(slot) / n_batch;
            const std::size_t bi = static_cast<std::size_t>(slot) % n_batch;
            const int img = entry.train_batch[bi];
            const Line cand = entry.candidates[ci];

            Measurements meas;
            meas.mask.dims = dims;
            meas.mask.lines = res.mask.lines;
            meas.mask.lines.push_back(cand);
            meas.values = base_values[bi];
            const cplx* row = kspaces[static_cast<std::size_t>(img)].data.data() +
                              (static_cast<std::size_t>(cand.frame) * dims.size + static_cast<std::size_t>(cand.row)) * dims.size;
            meas.values.insert(meas.values.end(), row, row + dims.size);

            const DynamicImage recon = decoder.decode(meas);
            parts[static_cast<std::size_t>(slot)] = evaluate_metric(metric, training[static_cast<std::size_t>(img)], recon);
        });

        entry.scores.resize(n_cand);
        for (std::size_t ci = 0; ci < n_cand; ++ci) {
            double sum = 0.0;
            for (std::size_t bi = 0; bi < n_batch; ++bi) sum += parts[ci * n_batch + bi];
            entry.scores[ci] = sum / static_cast<double>(n_batch);
        }

        // -- argmax; candidates are ascending, so the first maximum is the
        //    lexicographically lowest line among ties (+inf included)
        std::size_t best = 0;
        for (std::size_t ci = 1; ci < n_cand; ++ci)
            if (entry.scores[ci] > entry.scores[best]) best = ci;
        entry.selected = entry.candidates[best];

        calls += static_cast<std::int64_t>(n_cand) * static_cast<std::int64_t>(n_batch);
        entry.calls_cumulative = calls;

        res.mask.lines.push_back(entry.selected);
        auto& pool = free_rows[static_cast<std::size_t>(entry.selected.frame)];
        pool.erase(std::find(pool.begin(), pool.end(), entry.selected.row));
        if (cfg.variant == Variant::SG) next_frame = (entry.frame + 1) % dims.frames;

        res.trace.entries.push_back(std::move(entry));
    }
    res.mask.validate();
    return res;
}

// ---------------------------------------------------------------------------
// Post-hoc checks
// ---------------------------------------------------------------------------

// True iff the mask is exactly the warm start followed, in order, by each
// iteration's selection, and every selection is the first maximum of its
// recorded candidate scores drawn from still-unacquired lines.
inline bool verify_nestedness(const Mask& mask, const DesignTrace& trace) {
    if (trace.entries.size() > mask.lines.size()) return false;
    const std::size_t warm = mask.lines.size() - trace.entries.size();
    for (std::size_t j = 0; j < trace.entries.size(); ++j) {
        const TraceEntry& e = trace.entries[j];
        if (e.candidates.size() != e.scores.size() || e.candidates.empty()) return false;
        if (mask.lines[warm + j] != e.selected) return false;
        // candidates exclude everything already held
        for (const auto& c : e.candidates)
            for (std::size_t h = 0; h < warm + j; ++h)
                if (mask.lines[h] == c) return false;
        std::size_t best = 0;
        for (std::size_t ci = 1; ci < e.candidates.size(); ++ci)
            if (e.scores[ci] > e.scores[best]) best = ci;
        if (e.candidates[best] != e.selected) return false;
    }
    return true;
}

// max - min of per-frame line counts; the SG cycle keeps this at most 1.
inline int frame_balance(const Mask& mask) {
    std::vector<int> counts(static_cast<std::size_t>(mask.dims.frames), 0);
    for (const auto& ln : mask.lines) counts[static_cast<std::size_t>(ln.frame)] += 1;
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    return *hi - *lo;
}

// ---------------------------------------------------------------------------
// Theoretical speedup
// ---------------------------------------------------------------------------

struct Speedup {
    std::int64_t numerator = 0;   // reduced m*N*T
    std::int64_t denominator = 1; // reduced l*k
    std::int64_t calls_gv1 = 0;     // predicted decoder calls for G-v1 at n
    std::int64_t calls_variant = 0; // predicted calls for the given config at n

    double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

// (m/l)*(N*T/k) as an exact reduced rational, with the matching exact call
// counts for the configured budget.
inline Speedup speedup_estimate(const DesignConfig& cfg, int m, Dims dims) {
    if (m < 1) throw std::invalid_argument("speedup_estimate: m must be >= 1");
    Speedup s;
    s.numerator = static_cast<std::int64_t>(m) * dims.lines();
    s.denominator = static_cast<std::int64_t>(cfg.train_batch) * cfg.sample_batch;
    const std::int64_t g = std::gcd(s.numerator, s.denominator);
    s.numerator /= g;
    s.denominator /= g;
    s.calls_gv1 = predict_calls(Variant::G, TrainingMode::V1, dims, m, cfg.sample_batch, cfg.train_batch, cfg.budget);
    s.calls_variant = predict_calls(cfg.variant, cfg.training, dims, m, cfg.sample_batch, cfg.train_batch, cfg.budget);
    return s;
}

// ---------------------------------------------------------------------------
// Trace export
// ---------------------------------------------------------------------------

// One record per iteration, line-delimited key=value fields; lines are
// "frame:row" and list fields are comma-joined.
inline void write_trace(const std::string& path, const DesignTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file: " + path);
    for (const auto& e : trace.entries) {
        out << "iter=" << e.iteration << " frame=" << e.frame << " shrunk=" << (e.shrunk ? 1 : 0);
        out << " train=";
        for (std::size_t i = 0; i < e.train_batch.size(); ++i)
            out << (i ? "," : "") << e.train_batch[i];
        out << " candidates=";
        for (std::size_t i = 0; i < e.candidates.size(); ++i)
            out << (i ? "," : "") << e.candidates[i].frame << ":" << e.candidates[i].row;
        out << " scores=";
        for (std::size_t i = 0; i < e.scores.size(); ++i)
            out << (i ? "," : "") << format_g12(e.scores[i]);
        out << " selected=" << e.selected.frame << ":" << e.selected.row;
        out << " calls=" << e.calls_cumulative << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace ktmask
