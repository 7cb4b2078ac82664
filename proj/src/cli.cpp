#include "rtbwt/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "rtbwt/csv.hpp"
#include "rtbwt/engine.hpp"
#include "rtbwt/pgm.hpp"
#include "rtbwt/wavelet.hpp"
#include "atomic_write.hpp"

namespace rtbwt {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

// ---- config-file handling ----------------------------------------------

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string normalize_key(std::string key) {
    for (char& c : key) {
        if (c == '-') c = '_';
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return key;
}

const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "input",  "output", "report", "sigma",  "patch",   "window",
        "depth",  "threshold", "filter", "seed", "scope",  "threshold_mode",
        "signal", "points", "metric", "roundtrip", "operators_out",
        "taps_out", "n", "levels"};
    return keys;
}

std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file '" + path + "'");
    std::map<std::string, std::string> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            fail("config " + path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = normalize_key(trim(stripped.substr(0, eq)));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            fail("config " + path + ":" + std::to_string(lineno) + ": empty key");
        }
        if (!known_config_keys().count(key)) {
            fail("config " + path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        values[key] = value; // later lines win
    }
    return values;
}

long to_long(const std::string& key, const std::string& val) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(val, &used);
    } catch (const std::exception&) {
        used = std::string::npos;
    }
    if (used != val.size()) fail("bad value '" + val + "' for " + key);
    return v;
}

std::size_t to_size(const std::string& key, const std::string& val) {
    const long v = to_long(key, val);
    if (v < 0) fail("bad value '" + val + "' for " + key + " (must be nonnegative)");
    return static_cast<std::size_t>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& val) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(val, &used);
    } catch (const std::exception&) {
        used = std::string::npos;
    }
    if (used != val.size() || val.find('-') != std::string::npos) {
        fail("bad value '" + val + "' for " + key);
    }
    return v;
}

double to_double(const std::string& key, const std::string& val) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(val, &used);
    } catch (const std::exception&) {
        used = std::string::npos;
    }
    if (used != val.size()) fail("bad value '" + val + "' for " + key);
    return v;
}

bool to_bool(const std::string& key, const std::string& val) {
    if (val == "1" || val == "true" || val == "yes") return true;
    if (val == "0" || val == "false" || val == "no") return false;
    fail("bad value '" + val + "' for " + key);
}

// One config-file key wired to the variable behind a CLI option. The config
// value applies only when the option was absent from the command line.
struct ConfigBinding {
    std::string key;
    CLI::Option* opt = nullptr;
    std::function<void(const std::string&)> set;
};

void apply_config(const std::map<std::string, std::string>& values,
                  const std::vector<ConfigBinding>& bindings) {
    for (const ConfigBinding& b : bindings) {
        if (b.opt != nullptr && b.opt->count() > 0) continue;
        const auto it = values.find(b.key);
        if (it != values.end()) b.set(it->second);
    }
}

// ---- enum <-> string ------------------------------------------------------

ThresholdScope scope_from(const std::string& s) {
    if (s == "all") return ThresholdScope::all_matrices;
    if (s == "details") return ThresholdScope::details_only;
    fail("bad value '" + s + "' for scope (expected all or details)");
}

const char* scope_name(ThresholdScope s) {
    return s == ThresholdScope::all_matrices ? "all" : "details";
}

ThresholdMode mode_from(const std::string& s) {
    if (s == "column_norm") return ThresholdMode::column_norm;
    if (s == "per_coefficient") return ThresholdMode::per_coefficient;
    fail("bad value '" + s + "' for threshold_mode (expected column_norm or per_coefficient)");
}

const char* mode_name(ThresholdMode m) {
    return m == ThresholdMode::column_norm ? "column_norm" : "per_coefficient";
}

DistanceMetric metric_from(const std::string& s) {
    if (s == "euclidean") return DistanceMetric::euclidean;
    if (s == "squared_euclidean") return DistanceMetric::squared_euclidean;
    fail("bad value '" + s + "' for metric (expected euclidean or squared_euclidean)");
}

const char* metric_name(DistanceMetric m) {
    return m == DistanceMetric::euclidean ? "euclidean" : "squared_euclidean";
}

// ---- shared command helpers ------------------------------------------------

PointSet points_for_signal(const RunConfig& cfg, const std::vector<double>& signal) {
    if (!cfg.points_path.empty()) {
        PointSet points = read_point_set_csv(cfg.points_path);
        if (points.size() != signal.size()) {
            fail("point count " + std::to_string(points.size()) + " does not match signal length " +
                 std::to_string(signal.size()));
        }
        return points;
    }
    return PointSet(1, signal);
}

std::size_t resolved_tree_depth(const RunConfig& cfg, std::size_t n) {
    if (cfg.tree_depth >= 0) return static_cast<std::size_t>(cfg.tree_depth);
    return std::min<std::size_t>(3, max_feasible_depth(n));
}

std::optional<int> window_of(int w) {
    if (w > 0) return w;
    return std::nullopt;
}

// ---- commands ---------------------------------------------------------------

void run_denoise(const RunConfig& cfg, std::ostream& out) {
    if (cfg.input_path.empty()) fail("denoise: --input is required");
    if (cfg.output_path.empty()) fail("denoise: --output is required");

    const Image clean = read_pgm(cfg.input_path);
    const Image noisy = add_awgn(clean, cfg.den.sigma, cfg.den.seed);
    const DenoiseOutcome res = denoise_run(noisy, cfg.den, &clean);

    write_pgm(cfg.output_path, res.output);

    Image quantized = res.output;
    for (double& v : quantized.pixels) {
        long q = std::lround(v);
        v = static_cast<double>(q < 0 ? 0 : q > 255 ? 255 : q);
    }
    const double psnr_quantized = psnr(clean, quantized);

    std::string rep;
    rep += "command = denoise\n";
    rep += "input = " + cfg.input_path + "\n";
    rep += "output = " + cfg.output_path + "\n";
    rep += "height = " + std::to_string(clean.height) + "\n";
    rep += "width = " + std::to_string(clean.width) + "\n";
    rep += "sigma = " + fmt(cfg.den.sigma) + "\n";
    rep += "seed = " + std::to_string(cfg.den.seed) + "\n";
    rep += "patch = " + std::to_string(cfg.den.patch_side) + "\n";
    rep += "window = " + std::to_string(cfg.den.window) + "\n";
    rep += "depth = " + std::to_string(cfg.den.depth) + "\n";
    rep += "filter = " + cfg.den.filter + "\n";
    rep += "scope = " + std::string(scope_name(cfg.den.scope)) + "\n";
    rep += "threshold_mode = " + std::string(mode_name(cfg.den.mode)) + "\n";
    rep += "threshold = " + fmt(res.threshold) + "\n";
    rep += "threshold_source = " + std::string(res.threshold_was_auto ? "auto" : "explicit") + "\n";
    if (res.threshold_was_auto) {
        rep += "calibration_c = " + fmt(res.calibration_c) + "\n";
    }
    rep += "psnr_noisy = " + fmt(res.psnr_noisy) + "\n";
    rep += "psnr_output = " + fmt(res.psnr_output) + "\n";
    rep += "psnr_output_quantized = " + fmt(psnr_quantized) + "\n";
    if (std::isfinite(res.psnr_noisy)) {
        rep += "gain = " + fmt(res.psnr_output - res.psnr_noisy) + "\n";
        rep += "gain_quantized = " + fmt(psnr_quantized - res.psnr_noisy) + "\n";
    }
    rep += "distance_count = " + std::to_string(res.distance_count) + "\n";
    {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.3f", res.seconds);
        rep += "seconds = " + std::string(buf) + "\n";
    }

    out << rep;
    if (!cfg.report_path.empty()) {
        detail::write_file_atomic(cfg.report_path, rep);
    }
}

void run_transform(const RunConfig& cfg, std::ostream& out) {
    if (cfg.signal_path.empty()) fail("transform: --signal is required");
    if (cfg.output_path.empty()) fail("transform: --output is required");

    const std::vector<double> signal = read_signal_csv(cfg.signal_path);
    const PointSet points = points_for_signal(cfg, signal);
    const WaveletFilterPair filt = make_filter(cfg.den.filter);
    const std::size_t depth = resolved_tree_depth(cfg, signal.size());

    const OperatorSet ops =
        build_operators(points, depth, filt, cfg.metric, window_of(cfg.tree_window));
    const CoefficientPyramid pyr = decompose(signal, ops, filt);

    write_pyramid_csv(cfg.output_path, pyr);
    out << "samples = " << signal.size() << "\n";
    out << "depth = " << depth << "\n";
    out << "filter = " << cfg.den.filter << "\n";
    out << "metric = " << metric_name(cfg.metric) << "\n";
    out << "distance_count = " << ops.distance_count << "\n";
    out << "pyramid = " << cfg.output_path << "\n";
    if (!cfg.operators_out.empty()) {
        write_operators_csv(cfg.operators_out, ops);
        out << "operators = " << cfg.operators_out << "\n";
    }
    if (cfg.roundtrip) {
        const std::vector<double> rec = reconstruct(pyr, ops, filt);
        double err = 0.0;
        for (std::size_t i = 0; i < signal.size(); ++i) {
            err = std::max(err, std::abs(rec[i] - signal[i]));
        }
        out << "max_reconstruction_error = " << fmt(err) << "\n";
    }
}

void run_analyze(const RunConfig& cfg, std::ostream& out) {
    if (cfg.signal_path.empty()) fail("analyze: --signal is required");

    const std::vector<double> signal = read_signal_csv(cfg.signal_path);
    const PointSet points = points_for_signal(cfg, signal);
    const WaveletFilterPair filt = make_filter(cfg.den.filter);
    const std::size_t depth = resolved_tree_depth(cfg, signal.size());
    const std::size_t n = signal.size();

    const OperatorSet nn_ops =
        build_operators(points, depth, filt, cfg.metric, window_of(cfg.tree_window));
    const OperatorSet id_ops = identity_operators(n, depth);

    out << "samples = " << n << "\n";
    out << "depth = " << depth << "\n";
    out << "filter = " << cfg.den.filter << "\n";
    out << "metric = " << metric_name(cfg.metric) << "\n";

    const Permutation ident = Permutation::identity(n);
    const Permutation& nn = nn_ops.perms[0][0];
    for (int which = 0; which < 2; ++which) {
        const Permutation& perm = which == 0 ? ident : nn;
        const std::vector<double> reordered = apply_permutation(signal, perm);
        out << "ordering=" << (which == 0 ? "identity" : "nn_path")
            << " total_variation=" << fmt(total_variation(reordered))
            << " path_cost=" << fmt(path_cost(points, perm, cfg.metric)) << "\n";
    }

    const CoefficientPyramid id_pyr = decompose(signal, id_ops, filt);
    const CoefficientPyramid nn_pyr = decompose(signal, nn_ops, filt);

    double max_abs_signal = 0.0;
    for (double v : signal) max_abs_signal = std::max(max_abs_signal, std::abs(v));
    const double eps = 0.01 * max_abs_signal;

    double hi = 0.0;
    for (const CoefficientPyramid* pyr : {&id_pyr, &nn_pyr}) {
        for (const auto& row : pyr->details) {
            for (double v : row) hi = std::max(hi, std::abs(v));
        }
    }

    auto survey = [&](const CoefficientPyramid& pyr, const char* name) {
        std::size_t above = 0;
        std::vector<std::size_t> bins(10, 0);
        for (const auto& row : pyr.details) {
            for (double v : row) {
                const double a = std::abs(v);
                if (a > eps) ++above;
                std::size_t bin = 0;
                if (hi > 0.0) {
                    bin = std::min<std::size_t>(9, static_cast<std::size_t>(a / hi * 10.0));
                }
                ++bins[bin];
            }
        }
        out << "details_above_epsilon_" << name << " = " << above << "\n";
        out << "histogram_" << name << " = ";
        for (std::size_t b = 0; b < bins.size(); ++b) {
            if (b) out << ",";
            out << bins[b];
        }
        out << "\n";
    };

    out << "epsilon = " << fmt(eps) << "\n";
    out << "histogram_bin_width = " << fmt(hi / 10.0) << "\n";
    survey(id_pyr, "identity");
    survey(nn_pyr, "nn_path");

    if (!cfg.taps_out.empty()) {
        write_filter_csv(cfg.taps_out, filt);
        out << "taps = " << cfg.taps_out << "\n";
    }
}

void run_count(const RunConfig& cfg, std::ostream& out) {
    if (cfg.count_n == 0) fail("count: --n is required");
    const std::size_t n = cfg.count_n;
    const std::size_t levels = cfg.count_levels >= 1
                                   ? static_cast<std::size_t>(cfg.count_levels)
                                   : max_feasible_depth(n) + 1;

    const ClosedFormCounts closed = closed_form_counts(n, levels);
    out << "rtbwt=" << fmt(closed.rtbwt) << "\n";
    out << "gtbwt=" << fmt(closed.gtbwt) << "\n";
    out << "ratio=" << fmt(closed.ratio) << "\n";

    std::uint64_t instrumented = 0;
    if (levels >= 2) {
        std::mt19937_64 rng(12345);
        std::vector<double> coords(n);
        for (double& c : coords) {
            c = static_cast<double>(rng() >> 11) * 0x1p-53;
        }
        const PointSet points(1, std::move(coords));
        const WaveletFilterPair filt = make_filter("haar");
        const OperatorSet ops =
            build_operators(points, levels - 1, filt, DistanceMetric::squared_euclidean);
        instrumented = ops.distance_count;
    }
    out << "instrumented=" << instrumented << "\n";
    out << "gap=" << fmt(static_cast<double>(instrumented) - closed.rtbwt) << "\n";
}

} // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        switch (cfg.command) {
            case Command::denoise: run_denoise(cfg, out); break;
            case Command::transform: run_transform(cfg, out); break;
            case Command::analyze: run_analyze(cfg, out); break;
            case Command::count: run_count(cfg, out); break;
        }
        return 0;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 1;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::string threshold_str = "auto";
    std::string scope_str = "all";
    std::string mode_str = "column_norm";
    std::string metric_str = "euclidean";
    std::string config_path;

    CLI::App app{"redundant tree-based wavelet transform toolkit"};
    app.require_subcommand(1);

    // Config values must only reach the fields of the command actually run,
    // and never override a flag given on the command line — so the bindings
    // are kept per subcommand and consulted after parsing.
    std::vector<ConfigBinding> den_bindings, tr_bindings, an_bindings, cnt_bindings;
    std::vector<ConfigBinding>* active = &den_bindings;
    auto bind = [&active](const char* key, CLI::Option* opt,
                          std::function<void(const std::string&)> set) {
        active->push_back({key, opt, std::move(set)});
    };

    // denoise ---------------------------------------------------------------
    CLI::App* den = app.add_subcommand("denoise", "add noise to a clean image, then remove it");
    bind("input", den->add_option("--input", cfg.input_path, "clean input image (PGM)"),
         [&](const std::string& v) { cfg.input_path = v; });
    bind("output", den->add_option("--output", cfg.output_path, "denoised output image (PGM)"),
         [&](const std::string& v) { cfg.output_path = v; });
    bind("report", den->add_option("--report", cfg.report_path, "also write the run report to this file"),
         [&](const std::string& v) { cfg.report_path = v; });
    bind("sigma", den->add_option("--sigma", cfg.den.sigma, "noise standard deviation"),
         [&](const std::string& v) { cfg.den.sigma = to_double("sigma", v); });
    bind("patch", den->add_option("--patch", cfg.den.patch_side, "patch side length"),
         [&](const std::string& v) { cfg.den.patch_side = to_size("patch", v); });
    bind("window", den->add_option("--window", cfg.den.window, "nearest-neighbor search window in pixels (0 = global)"),
         [&](const std::string& v) { cfg.den.window = static_cast<int>(to_long("window", v)); });
    bind("depth", den->add_option("--depth", cfg.den.depth, "decomposition depth"),
         [&](const std::string& v) { cfg.den.depth = to_size("depth", v); });
    bind("threshold", den->add_option("--threshold", threshold_str, "column threshold value, or 'auto'"),
         [&](const std::string& v) { threshold_str = v; });
    bind("filter", den->add_option("--filter", cfg.den.filter, "wavelet filter (haar|sym8)"),
         [&](const std::string& v) { cfg.den.filter = v; });
    bind("seed", den->add_option("--seed", cfg.den.seed, "noise generator seed"),
         [&](const std::string& v) { cfg.den.seed = to_u64("seed", v); });
    bind("scope", den->add_option("--scope", scope_str, "threshold scope (all|details)"),
         [&](const std::string& v) { scope_str = v; });
    bind("threshold_mode", den->add_option("--threshold-mode", mode_str, "column_norm|per_coefficient"),
         [&](const std::string& v) { mode_str = v; });
    den->add_option("--config", config_path, "key = value config file");

    // transform ---------------------------------------------------------------
    active = &tr_bindings;
    CLI::App* tr = app.add_subcommand("transform", "decompose a CSV signal into a coefficient pyramid");
    bind("signal", tr->add_option("--signal", cfg.signal_path, "input signal CSV"),
         [&](const std::string& v) { cfg.signal_path = v; });
    bind("points", tr->add_option("--points", cfg.points_path, "feature point CSV (default: the signal itself)"),
         [&](const std::string& v) { cfg.points_path = v; });
    bind("output", tr->add_option("--output", cfg.output_path, "pyramid CSV out"),
         [&](const std::string& v) { cfg.output_path = v; });
    bind("operators_out", tr->add_option("--operators-out", cfg.operators_out, "also export the permutations as CSV"),
         [&](const std::string& v) { cfg.operators_out = v; });
    bind("depth", tr->add_option("--depth", cfg.tree_depth, "decomposition depth (default: min(3, feasible))"),
         [&](const std::string& v) { cfg.tree_depth = static_cast<int>(to_long("depth", v)); });
    bind("window", tr->add_option("--window", cfg.tree_window, "nearest-neighbor search window (0 = global)"),
         [&](const std::string& v) { cfg.tree_window = static_cast<int>(to_long("window", v)); });
    bind("filter", tr->add_option("--filter", cfg.den.filter, "wavelet filter (haar|sym8)"),
         [&](const std::string& v) { cfg.den.filter = v; });
    bind("metric", tr->add_option("--metric", metric_str, "euclidean|squared_euclidean"),
         [&](const std::string& v) { metric_str = v; });
    bind("roundtrip", tr->add_flag("--roundtrip", cfg.roundtrip, "reconstruct and report the max error"),
         [&](const std::string& v) { cfg.roundtrip = to_bool("roundtrip", v); });
    tr->add_option("--config", config_path, "key = value config file");

    // analyze ---------------------------------------------------------------
    active = &an_bindings;
    CLI::App* an = app.add_subcommand("analyze", "compare identity and nearest-neighbor orderings of a signal");
    bind("signal", an->add_option("--signal", cfg.signal_path, "input signal CSV"),
         [&](const std::string& v) { cfg.signal_path = v; });
    bind("points", an->add_option("--points", cfg.points_path, "feature point CSV (default: the signal itself)"),
         [&](const std::string& v) { cfg.points_path = v; });
    bind("depth", an->add_option("--depth", cfg.tree_depth, "decomposition depth (default: min(3, feasible))"),
         [&](const std::string& v) { cfg.tree_depth = static_cast<int>(to_long("depth", v)); });
    bind("window", an->add_option("--window", cfg.tree_window, "nearest-neighbor search window (0 = global)"),
         [&](const std::string& v) { cfg.tree_window = static_cast<int>(to_long("window", v)); });
    bind("filter", an->add_option("--filter", cfg.den.filter, "wavelet filter (haar|sym8)"),
         [&](const std::string& v) { cfg.den.filter = v; });
    bind("metric", an->add_option("--metric", metric_str, "euclidean|squared_euclidean"),
         [&](const std::string& v) { metric_str = v; });
    bind("taps_out", an->add_option("--taps-out", cfg.taps_out, "export the filter taps as CSV"),
         [&](const std::string& v) { cfg.taps_out = v; });
    an->add_option("--config", config_path, "key = value config file");

    // count -----------------------------------------------------------------
    active = &cnt_bindings;
    CLI::App* cnt = app.add_subcommand("count", "distance-evaluation counts: closed forms and an instrumented build");
    bind("n", cnt->add_option("--n", cfg.count_n, "signal length"),
         [&](const std::string& v) { cfg.count_n = to_size("n", v); });
    bind("levels", cnt->add_option("--levels", cfg.count_levels, "level count (default: full depth + 1)"),
         [&](const std::string& v) { cfg.count_levels = static_cast<int>(to_long("levels", v)); });
    cnt->add_option("--config", config_path, "key = value config file");

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("rtbwt");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(argv_store.size());
    for (const std::string& s : argv_store) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        const std::vector<ConfigBinding>* chosen = &cnt_bindings;
        if (app.got_subcommand(den)) {
            cfg.command = Command::denoise;
            chosen = &den_bindings;
        } else if (app.got_subcommand(tr)) {
            cfg.command = Command::transform;
            chosen = &tr_bindings;
        } else if (app.got_subcommand(an)) {
            cfg.command = Command::analyze;
            chosen = &an_bindings;
        } else {
            cfg.command = Command::count;
        }

        if (!config_path.empty()) {
            apply_config(load_config(config_path), *chosen);
        }

        if (threshold_str == "auto") {
            cfg.den.threshold_auto = true;
            cfg.den.threshold = 0.0;
        } else {
            cfg.den.threshold_auto = false;
            cfg.den.threshold = to_double("threshold", threshold_str);
        }
        cfg.den.scope = scope_from(scope_str);
        cfg.den.mode = mode_from(mode_str);
        cfg.metric = metric_from(metric_str);
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 1;
    }

    return run(cfg, out, err);
}

} // namespace rtbwt
