#pragma once

// Batch-size study: how the stochastic-greedy candidate batch k trades
// decoder calls against reconstruction quality. One nested design run per
// (k, seed) covers a whole ladder of sampling rates via mask prefixes, and
// every row's call count is cross-checkable against the closed forms in
// predict_calls.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ktmask/core.hpp"
#include "ktmask/decoders.hpp"
#include "ktmask/io.hpp"
#include "ktmask/maskdesign.hpp"
#include "ktmask/metrics.hpp"
#include "ktmask/parallel.hpp"
#include "ktmask/transform.hpp"

namespace ktmask {

struct SweepRow {
    int k = 0;
    std::uint64_t seed = 0;
    double rate = 0.0;
    std::string metric;
    double value = 0.0;     // mean test metric of the rate prefix
    std::int64_t calls = 0; // decoder calls spent designing that prefix
};

// Mean metric of one mask over a test set; decodes run in parallel, the
// mean is accumulated in image order.
inline double evaluate_mean_metric(const Mask& mask, const std::vector<DynamicImage>& images,
                                   const Decoder& decoder, const MetricSpec& metric, int threads = 1) {
    if (images.empty()) throw std::invalid_argument("evaluate_mean_metric: no images");
    std::vector<double> values(images.size());
    parallel_for(static_cast<std::int64_t>(images.size()), threads, [&](std::int64_t i) {
        const auto& img = images[static_cast<std::size_t>(i)];
        values[static_cast<std::size_t>(i)] = evaluate_metric(metric, img, decoder.decode(sample(img, mask)));
    });
    return mean_of(values);
}

// For each (k, seed): design once to the largest rate's budget, then report
// every rate from the nested mask's prefix. Rows come out sorted by
// (k, seed, rate).
inline std::vector<SweepRow> batch_sweep(const DesignConfig& cfg_template, const std::vector<int>& k_values,
                                         const std::vector<std::uint64_t>& seeds, const std::vector<double>& rates,
                                         const std::vector<DynamicImage>& training,
                                         const std::vector<DynamicImage>& test_set, const Decoder& decoder,
                                         const MetricSpec& metric, int threads = 1) {
    if (k_values.empty() || seeds.empty() || rates.empty())
        throw std::invalid_argument("batch_sweep: k values, seeds and rates must be nonempty");
    if (training.empty() || test_set.empty())
        throw std::invalid_argument("batch_sweep: training and test sets must be nonempty");
    if (!cfg_template.warm_start.empty())
        throw std::invalid_argument("batch_sweep: warm starts are not supported here");
    const Dims dims = training[0].dims();

    std::vector<double> ladder = rates;
    std::sort(ladder.begin(), ladder.end());
    const int max_budget = lines_for_rate(ladder.back(), dims);
    if (max_budget < 1) throw std::invalid_argument("batch_sweep: largest rate rounds to zero lines");

    std::vector<SweepRow> rows;
    for (int k : k_values) {
        for (std::uint64_t seed : seeds) {
            DesignConfig cfg = cfg_template;
            cfg.variant = Variant::SG;
            cfg.sample_batch = k;
            cfg.seed = seed;
            cfg.budget = max_budget;
            auto res = design_mask(cfg, training, decoder, metric, threads);
            for (double rate : ladder) {
                const int n = lines_for_rate(rate, dims);
                SweepRow row;
                row.k = k;
                row.seed = seed;
                row.rate = rate;
                row.metric = to_string(metric.id);
                row.value = evaluate_mean_metric(res.mask.prefix(n), test_set, decoder, metric, threads);
                row.calls = n > 0 ? res.trace.entries[static_cast<std::size_t>(n) - 1].calls_cumulative : 0;
                rows.push_back(row);
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.k != b.k) return a.k < b.k;
        if (a.seed != b.seed) return a.seed < b.seed;
        return a.rate < b.rate;
    });
    return rows;
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file: " + path);
    out << "k,seed,rate,metric,value,calls\n";
    for (const auto& r : rows)
        out << r.k << "," << r.seed << "," << format_g6(r.rate) << "," << r.metric << "," << format_g6(r.value)
            << "," << r.calls << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace ktmask
