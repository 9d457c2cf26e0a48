// Command-line front end: generate phantom volumes, design masks, run
// variable-density baselines, evaluate masks, sweep methods or batch sizes,
// and run the built-in verification suite. Every command is driven by a
// config file plus a few overriding flags, and all outputs are byte-stable
// across reruns and thread counts.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ktmask/accounting.hpp"
#include "ktmask/baselines.hpp"
#include "ktmask/checks.hpp"
#include "ktmask/config.hpp"
#include "ktmask/core.hpp"
#include "ktmask/decoders.hpp"
#include "ktmask/io.hpp"
#include "ktmask/maskdesign.hpp"
#include "ktmask/metrics.hpp"
#include "ktmask/phantom.hpp"
#include "ktmask/transform.hpp"

namespace fs = std::filesystem;
using namespace ktmask;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string metric_override;
    int threads = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double fft_scale = 1.0; // `check` only
};

std::string resolve_path(const fs::path& base, const std::string& p) {
    fs::path path(p);
    if (path.is_absolute() || base.empty()) return path.string();
    return (base / path).string();
}

fs::path out_file(const CommonArgs& args, const std::string& name) {
    return fs::path(args.out_dir) / name;
}

std::vector<DynamicImage> load_volumes(const fs::path& cfg_dir, const std::vector<std::string>& paths) {
    std::vector<DynamicImage> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(read_volume(resolve_path(cfg_dir, p)));
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].dims() != out[0].dims()) throw std::runtime_error("volume dims mismatch: " + paths[i]);
    return out;
}

MetricSpec make_metric(const Config& cfg, const std::string& section, const CommonArgs& args) {
    std::string name = args.metric_override.empty() ? cfg.get_or(section, "metric", "psnr") : args.metric_override;
    MetricSpec spec;
    spec.id = parse_metric(name);
    spec.peak = cfg.get_double_or(section, "metric_peak", 1.0);
    return spec;
}

Decoder make_decoder(const Config& cfg, const std::string& section) {
    DecoderSpec spec = parse_decoder_spec(cfg.get_or(section, "decoder", "zf"));
    spec.validate();
    return Decoder{spec, kind_from_id(spec.id)};
}

std::uint64_t pick_seed(const Config& cfg, const std::string& section, const CommonArgs& args) {
    if (args.seed_given) return args.seed;
    return cfg.get_u64_or(section, "seed", 0);
}

Variant parse_variant(const std::string& section, const std::string& text) {
    if (text == "g") return Variant::G;
    if (text == "sg") return Variant::SG;
    throw std::runtime_error(section + ".variant: unknown variant: " + text);
}

TrainingMode parse_training(const std::string& section, const std::string& text) {
    if (text == "v1") return TrainingMode::V1;
    if (text == "v2") return TrainingMode::V2;
    throw std::runtime_error(section + ".training: unknown training mode: " + text);
}

std::vector<double> sorted_rates(const Config& cfg, const std::string& section) {
    auto rates = cfg.get_doubles(section, "rates");
    for (double r : rates)
        if (!(r > 0.0) || r > 1.0) throw std::runtime_error(section + ".rates: rate outside (0, 1]");
    std::sort(rates.begin(), rates.end());
    rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
    return rates;
}

// Grid cells for the variable-density searches: the default grid unless the
// config narrows the width or central-band lists.
std::vector<VDParams> build_grid(const Config& cfg, const std::string& section, Dims dims) {
    std::vector<double> widths;
    std::vector<int> centrals;
    for (const auto& cell : default_vd_grid(dims)) {
        if (std::find(widths.begin(), widths.end(), cell.width) == widths.end()) widths.push_back(cell.width);
        if (std::find(centrals.begin(), centrals.end(), cell.central) == centrals.end())
            centrals.push_back(cell.central);
    }
    if (cfg.has(section, "widths")) widths = cfg.get_doubles(section, "widths");
    if (cfg.has(section, "centrals")) centrals = cfg.get_ints(section, "centrals");
    std::vector<VDParams> grid;
    for (double w : widths)
        for (int c : centrals) {
            VDParams p;
            p.width = w;
            p.central = c;
            grid.push_back(p);
        }
    return grid;
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    CounterRng sub = CounterRng(seed).fork(a, b);
    return sub.next_u64();
}

int cmd_phantom(const Config& cfg, const fs::path& cfg_dir, const CommonArgs& args) {
    (void)cfg_dir;
    const int size = cfg.get_int("phantom", "size");
    const int frames = cfg.get_int("phantom", "frames");
    const int count = cfg.get_int_or("phantom", "count", 1);
    const double noise = cfg.get_double_or("phantom", "noise", 0.0);
    const std::uint64_t seed = pick_seed(cfg, "phantom", args);
    if (count < 1) throw std::runtime_error("phantom.count: must be >= 1");

    auto suite = phantom_suite(size, frames, count, seed);
    for (int i = 0; i < count; ++i) {
        DynamicImage img = noise > 0.0
                               ? add_image_noise(suite[static_cast<std::size_t>(i)], noise,
                                                 sub_seed(seed, 0x6e6f697a, static_cast<std::uint64_t>(i)))
                               : suite[static_cast<std::size_t>(i)];
        char name[32];
        std::snprintf(name, sizeof name, "phantom_%03d.vol", i);
        std::map<std::string, std::string> meta{{"frames", std::to_string(frames)},
                                                {"index", std::to_string(i)},
                                                {"noise", format_g6(noise)},
                                                {"seed", std::to_string(seed)},
                                                {"size", std::to_string(size)}};
        const fs::path path = out_file(args, name);
        write_volume(path.string(), img, meta);
        std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
}

int cmd_design(const Config& cfg, const fs::path& cfg_dir, const CommonArgs& args) {
    auto train = load_volumes(cfg_dir, cfg.get_list("design", "train"));
    const Dims dims = train[0].dims();

    DesignConfig dc;
    dc.variant = parse_variant("design", cfg.get_or("design", "variant", "sg"));
    dc.training = parse_training("design", cfg.get_or("design", "training", "v2"));
    dc.sample_batch = cfg.get_int_or("design", "sample_batch", 1);
    dc.train_batch = cfg.get_int_or("design", "train_batch", 1);
    dc.seed = pick_seed(cfg, "design", args);
    Decoder decoder = make_decoder(cfg, "design");
    MetricSpec metric = make_metric(cfg, "design", args);
    dc.decoder = serialize(decoder.spec);
    dc.metric = to_string(metric.id);

    std::vector<double> rates;
    std::vector<int> budgets;
    if (cfg.has("design", "rates")) {
        rates = sorted_rates(cfg, "design");
        for (double r : rates) budgets.push_back(lines_for_rate(r, dims));
        dc.budget = budgets.back();
    } else {
        dc.budget = cfg.get_int("design", "budget");
    }

    auto res = design_mask(dc, train, decoder, metric, resolve_threads(args.threads));
    write_trace(out_file(args, "trace.txt").string(), res.trace);

    std::ofstream summary(out_file(args, "design.csv"), std::ios::binary);
    if (!summary) throw std::runtime_error("cannot open file: " + out_file(args, "design.csv").string());
    summary << "file,rate,lines,calls\n";
    auto calls_at = [&](int n) -> std::int64_t {
        return n > 0 ? res.trace.entries[static_cast<std::size_t>(n) - 1].calls_cumulative : 0;
    };
    if (rates.empty()) {
        const fs::path path = out_file(args, "mask.txt");
        write_mask(path.string(), res.mask);
        summary << "mask.txt," << format_g6(sampling_rate(res.mask)) << "," << res.mask.line_count() << ","
                << calls_at(dc.budget) << "\n";
        std::cout << "wrote " << path.string() << "\n";
    } else {
        for (std::size_t i = 0; i < rates.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "mask_%02d.txt", static_cast<int>(i));
            const fs::path path = out_file(args, name);
            write_mask(path.string(), res.mask.prefix(budgets[i]));
            summary << name << "," << format_g6(rates[i]) << "," << budgets[i] << "," << calls_at(budgets[i])
                    << "\n";
            std::cout << "wrote " << path.string() << "\n";
        }
    }
    if (!summary) throw std::runtime_error("write failed: " + out_file(args, "design.csv").string());
    return 0;
}

int cmd_baseline(const Config& cfg, const fs::path& cfg_dir, const CommonArgs& args) {
    const std::string method = cfg.get("baseline", "method");
    const double rate = cfg.get_double("baseline", "rate");
    const int draws = cfg.get_int_or("baseline", "draws", 20);
    const std::uint64_t seed = pick_seed(cfg, "baseline", args);

    std::vector<DynamicImage> train;
    Dims dims;
    if (cfg.has("baseline", "train")) {
        train = load_volumes(cfg_dir, cfg.get_list("baseline", "train"));
        dims = train[0].dims();
    } else {
        dims = Dims{cfg.get_int("baseline", "size"), cfg.get_int("baseline", "frames")};
    }
    auto grid = build_grid(cfg, "baseline", dims);

    VDDesignResult res;
    if (method == "coherence-vd") {
        res = coherence_vd_design(rate, dims, grid, draws, seed);
    } else if (method == "lb-vd") {
        if (train.empty()) throw std::runtime_error("baseline.train: missing");
        Decoder decoder = make_decoder(cfg, "baseline");
        MetricSpec metric = make_metric(cfg, "baseline", args);
        res = lbvd_design(rate, dims, grid, draws, train, decoder, metric, seed, resolve_threads(args.threads));
    } else {
        throw std::runtime_error("baseline.method: unknown baseline: " + method);
    }

    write_mask(out_file(args, "mask.txt").string(), res.mask);
    write_vd_report(out_file(args, "report.csv").string(), res.cells);
    std::cout << "winner width=" << format_g6(res.params.width) << " central=" << res.params.central << " lines="
              << res.mask.line_count() << "\n";
    return 0;
}

int cmd_eval(const Config& cfg, const fs::path& cfg_dir, const CommonArgs& args) {
    Mask mask = read_mask(resolve_path(cfg_dir, cfg.get("eval", "mask")));
    auto names = cfg.get_list("eval", "volumes");
    auto volumes = load_volumes(cfg_dir, names);
    for (std::size_t i = 0; i < volumes.size(); ++i)
        if (volumes[i].dims() != mask.dims) throw std::runtime_error("eval: volume dims mismatch: " + names[i]);
    Decoder decoder = make_decoder(cfg, "eval");
    MetricSpec metric = make_metric(cfg, "eval", args);

    struct Row {
        double value = std::numeric_limits<double>::quiet_NaN();
        int calls = 0;
        std::string note;
    };
    std::vector<Row> rows(volumes.size());
    parallel_for(static_cast<std::int64_t>(volumes.size()), resolve_threads(args.threads), [&](std::int64_t i) {
        Row& row = rows[static_cast<std::size_t>(i)];
        try {
            const auto& img = volumes[static_cast<std::size_t>(i)];
            row.value = evaluate_metric(metric, img, decoder.decode(sample(img, mask)));
            row.calls = 1;
        } catch (const std::exception& e) {
            row.note = e.what();
        }
    });

    const fs::path path = out_file(args, "eval.csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file: " + path.string());
    out << "volume,metric,value,calls,note\n";
    const std::string metric_name = to_string(metric.id);
    double sum = 0.0;
    int ok = 0, calls = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << names[i] << "," << metric_name << "," << format_g6(rows[i].value) << "," << rows[i].calls << ","
            << rows[i].note << "\n";
        if (rows[i].calls > 0 && !std::isnan(rows[i].value)) {
            sum += rows[i].value;
            ++ok;
        }
        calls += rows[i].calls;
    }
    const double mean = ok > 0 ? sum / ok : std::numeric_limits<double>::quiet_NaN();
    out << "mean," << metric_name << "," << format_g6(mean) << "," << calls << ",\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_sweep(const Config& cfg, const fs::path& cfg_dir, const CommonArgs& args) {
    const std::string mode = cfg.get_or("sweep", "mode", "methods");
    auto rates = sorted_rates(cfg, "sweep");
    std::vector<std::uint64_t> seeds =
        cfg.has("sweep", "seeds") ? cfg.get_u64s("sweep", "seeds") : std::vector<std::uint64_t>{pick_seed(cfg, "sweep", args)};
    Decoder decoder = make_decoder(cfg, "sweep");
    MetricSpec metric = make_metric(cfg, "sweep", args);
    auto test = load_volumes(cfg_dir, cfg.get_list("sweep", "test"));
    const Dims dims = test[0].dims();
    const int threads = resolve_threads(args.threads);
    const fs::path path = out_file(args, "sweep.csv");

    if (mode == "batch") {
        auto train = load_volumes(cfg_dir, cfg.get_list("sweep", "train"));
        if (train[0].dims() != dims) throw std::runtime_error("sweep: train/test dims mismatch");
        DesignConfig tmpl;
        tmpl.training = parse_training("sweep", cfg.get_or("sweep", "training", "v2"));
        tmpl.train_batch = cfg.get_int_or("sweep", "train_batch", 1);
        auto ks = cfg.get_ints("sweep", "ks");
        auto rows = batch_sweep(tmpl, ks, seeds, rates, train, test, decoder, metric, threads);
        write_sweep_csv(path.string(), rows);
        std::cout << "wrote " << path.string() << "\n";
        return 0;
    }
    if (mode != "methods") throw std::runtime_error("sweep.mode: unknown mode: " + mode);

    auto methods = cfg.has("sweep", "methods")
                       ? cfg.get_list("sweep", "methods")
                       : std::vector<std::string>{"sg", "g", "coherence-vd", "lb-vd", "uniform-random"};
    for (const auto& m : methods)
        if (m != "sg" && m != "g" && m != "coherence-vd" && m != "lb-vd" && m != "uniform-random")
            throw std::runtime_error("sweep.methods: unknown method: " + m);

    const bool needs_train = std::any_of(methods.begin(), methods.end(), [](const std::string& m) {
        return m == "sg" || m == "g" || m == "lb-vd";
    });
    std::vector<DynamicImage> train;
    if (needs_train) {
        train = load_volumes(cfg_dir, cfg.get_list("sweep", "train"));
        if (train[0].dims() != dims) throw std::runtime_error("sweep: train/test dims mismatch");
    }
    const int draws = cfg.get_int_or("sweep", "draws", 20);
    auto grid = build_grid(cfg, "sweep", dims);

    std::vector<int> budgets;
    for (double r : rates) budgets.push_back(lines_for_rate(r, dims));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file: " + path.string());
    out << "method,rate,metric,value\n";
    const std::string metric_name = to_string(metric.id);
    for (const auto& method : methods) {
        std::vector<double> acc(rates.size(), 0.0);
        for (std::size_t si = 0; si < seeds.size(); ++si) {
            const std::uint64_t seed = seeds[si];
            if (method == "sg" || method == "g") {
                DesignConfig dc;
                dc.variant = method == "sg" ? Variant::SG : Variant::G;
                dc.training = parse_training("sweep", cfg.get_or("sweep", "training", "v2"));
                dc.sample_batch = cfg.get_int_or("sweep", "sample_batch", 1);
                dc.train_batch = cfg.get_int_or("sweep", "train_batch", 1);
                dc.seed = seed;
                dc.budget = budgets.back();
                auto res = design_mask(dc, train, decoder, metric, threads);
                for (std::size_t ri = 0; ri < rates.size(); ++ri)
                    acc[ri] += evaluate_mean_metric(res.mask.prefix(budgets[ri]), test, decoder, metric, threads);
            } else {
                for (std::size_t ri = 0; ri < rates.size(); ++ri) {
                    Mask mask;
                    if (method == "uniform-random") {
                        mask = draw_mask(uniform_distribution(dims), budgets[ri], {}, sub_seed(seed, 0x756e69, ri));
                    } else if (method == "coherence-vd") {
                        mask = coherence_vd_design(rates[ri], dims, grid, draws, sub_seed(seed, 0x636f68, ri)).mask;
                    } else {
                        mask = lbvd_design(rates[ri], dims, grid, draws, train, decoder, metric,
                                           sub_seed(seed, 0x6c62, ri), threads)
                                   .mask;
                    }
                    acc[ri] += evaluate_mean_metric(mask, test, decoder, metric, threads);
                }
            }
        }
        for (std::size_t ri = 0; ri < rates.size(); ++ri)
            out << method << "," << format_g6(rates[ri]) << "," << metric_name << ","
                << format_g6(acc[ri] / static_cast<double>(seeds.size())) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_check(const CommonArgs& args) {
    CheckOptions opts;
    if (args.seed_given) opts.seed = args.seed;
    opts.threads = resolve_threads(args.threads);
    opts.fft_scale = args.fft_scale;
    auto results = run_builtin_checks(opts);
    std::cout << format_check_report(results);
    return all_checks_passed(results) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-t line-mask design and evaluation toolkit"};
    app.require_subcommand(1);
    CommonArgs args;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* opt = sub->add_option("--config", args.config_path, "config file");
        if (need_config) opt->required();
        sub->add_option("--out", args.out_dir, "output directory (created if missing)");
        sub->add_option("--metric", args.metric_override, "metric override: psnr, ssim or negmse");
        sub->add_option("--threads", args.threads, "worker threads, 0 = all cores");
        sub->add_option("--seed", args.seed, "seed override");
    };

    auto* sub_phantom = app.add_subcommand("phantom", "render a phantom suite to volume files");
    auto* sub_design = app.add_subcommand("design", "greedy or stochastic-greedy mask design");
    auto* sub_baseline = app.add_subcommand("baseline", "variable-density baseline design");
    auto* sub_eval = app.add_subcommand("eval", "evaluate a mask file on volumes");
    auto* sub_sweep = app.add_subcommand("sweep", "method comparison or batch-size sweep");
    auto* sub_check = app.add_subcommand("check", "run the built-in verification suite");
    add_common(sub_phantom, true);
    add_common(sub_design, true);
    add_common(sub_baseline, true);
    add_common(sub_eval, true);
    add_common(sub_sweep, true);
    add_common(sub_check, false);
    sub_check->add_option("--fft-scale", args.fft_scale, "fault-injection scale for the unitarity check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    args.seed_given = sub->count("--seed") > 0;

    try {
        if (sub == sub_check) return cmd_check(args);
        fs::create_directories(args.out_dir);
        Config cfg = Config::load(args.config_path);
        const fs::path cfg_dir = fs::path(args.config_path).parent_path();
        if (sub == sub_phantom) return cmd_phantom(cfg, cfg_dir, args);
        if (sub == sub_design) return cmd_design(cfg, cfg_dir, args);
        if (sub == sub_baseline) return cmd_baseline(cfg, cfg_dir, args);
        if (sub == sub_eval) return cmd_eval(cfg, cfg_dir, args);
        return cmd_sweep(cfg, cfg_dir, args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
