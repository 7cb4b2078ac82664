#include "rtbwt/denoise.hpp"
#include "rtbwt/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace rtbwt {

namespace {

void check_image(const Image& img, const char* who) {
    if (img.height == 0 || img.width == 0)
        throw std::invalid_argument(std::string(who) + ": empty image");
    if (img.pixels.size() != img.height * img.width)
        throw std::invalid_argument(std::string(who) + ": pixel buffer does not match dimensions");
}

// Whole-sample mirror: reflect about the first/last sample without
// repeating it; period 2(len-1) handles arbitrarily deep padding.
std::size_t mirror_index(long s, std::size_t len) {
    if (len == 1) return 0;
    const long period = 2 * (static_cast<long>(len) - 1);
    s %= period;
    if (s < 0) s += period;
    if (s >= static_cast<long>(len)) s = period - s;
    return static_cast<std::size_t>(s);
}

} // namespace

Image add_awgn(const Image& img, double sigma, std::uint64_t seed) {
    check_image(img, "add_awgn");
    if (sigma < 0.0) throw std::invalid_argument("add_awgn: sigma must be nonnegative");
    Image out = img;
    if (sigma == 0.0) return out;

    std::mt19937_64 rng(seed);
    // Box-Muller on top of the raw generator: the draw sequence is fixed by
    // the seed alone, independent of the standard library's distributions.
    auto uniform01 = [&rng]() {
        return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53; // (0, 1]
    };
    bool have_spare = false;
    double spare = 0.0;
    for (double& v : out.pixels) {
        double z;
        if (have_spare) {
            z = spare;
            have_spare = false;
        } else {
            const double radius = std::sqrt(-2.0 * std::log(uniform01()));
            const double angle = 2.0 * std::numbers::pi * uniform01();
            z = radius * std::cos(angle);
            spare = radius * std::sin(angle);
            have_spare = true;
        }
        v += sigma * z;
    }
    return out;
}

Image mirror_pad(const Image& img, std::size_t patch_side) {
    check_image(img, "mirror_pad");
    if (patch_side < 1) throw std::invalid_argument("mirror_pad: patch side must be positive");
    if (patch_side > 2 * img.height || patch_side > 2 * img.width)
        throw std::invalid_argument("mirror_pad: patch side exceeds twice an image dimension");

    const std::size_t pad = patch_side - 1;
    const std::size_t lead = patch_side / 2; // ceil(pad/2)
    Image out(img.height + pad, img.width + pad);
    for (std::size_t r = 0; r < out.height; ++r) {
        const std::size_t sr = mirror_index(static_cast<long>(r) - static_cast<long>(lead),
                                            img.height);
        for (std::size_t c = 0; c < out.width; ++c) {
            const std::size_t sc = mirror_index(static_cast<long>(c) - static_cast<long>(lead),
                                                img.width);
            out.at(r, c) = img.at(sr, sc);
        }
    }
    return out;
}

PatchMatrix extract_patches(const Image& padded, std::size_t patch_side,
                            std::size_t orig_height, std::size_t orig_width) {
    check_image(padded, "extract_patches");
    if (patch_side < 1) throw std::invalid_argument("extract_patches: patch side must be positive");
    if (padded.height != orig_height + patch_side - 1 ||
        padded.width != orig_width + patch_side - 1)
        throw std::invalid_argument("extract_patches: padded dimensions do not match original + patch");

    PatchMatrix pm;
    pm.patch_side = patch_side;
    pm.rows = patch_side * patch_side;
    pm.cols = orig_height * orig_width;
    pm.image_height = orig_height;
    pm.image_width = orig_width;
    pm.data.resize(pm.rows * pm.cols);
    pm.anchors.resize(pm.cols);

    for (std::size_t c = 0; c < orig_width; ++c)
        for (std::size_t r = 0; r < orig_height; ++r)
            pm.anchors[c * orig_height + r] = {static_cast<int>(r), static_cast<int>(c)};

    // row i = shift (dr, dc) = (i mod p, i div p); column j = pixel (r, c)
    // with j = c*height + r; entry = padded(r+dr, c+dc).
    for (std::size_t i = 0; i < pm.rows; ++i) {
        const std::size_t dr = i % patch_side;
        const std::size_t dc = i / patch_side;
        double* row = pm.data.data() + i * pm.cols;
        for (std::size_t c = 0; c < orig_width; ++c) {
            const double* src = padded.pixels.data() + (c + dc);
            for (std::size_t r = 0; r < orig_height; ++r)
                row[c * orig_height + r] = src[(r + dr) * padded.width];
        }
    }
    return pm;
}

PointSet patch_point_set(const PatchMatrix& pm) {
    if (pm.rows == 0 || pm.cols == 0)
        throw std::invalid_argument("patch_point_set: empty patch matrix");
    std::vector<double> flat(pm.cols * pm.rows);
    for (std::size_t j = 0; j < pm.cols; ++j)
        for (std::size_t i = 0; i < pm.rows; ++i)
            flat[j * pm.rows + i] = pm.data[i * pm.cols + j];
    return PointSet(pm.rows, std::move(flat), pm.anchors);
}

std::vector<std::vector<double>> subimage_signals(const PatchMatrix& pm) {
    std::vector<std::vector<double>> rows(pm.rows);
    for (std::size_t i = 0; i < pm.rows; ++i)
        rows[i].assign(pm.data.begin() + static_cast<std::ptrdiff_t>(i * pm.cols),
                       pm.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * pm.cols));
    return rows;
}

namespace {

void check_matrices(const StageMatrices& mats, double threshold, const char* who) {
    if (threshold < 0.0)
        throw std::invalid_argument(std::string(who) + ": threshold must be nonnegative");
    if (mats.stages.empty())
        throw std::invalid_argument(std::string(who) + ": no stage matrices");
    for (const auto& m : mats.stages)
        if (m.size() != mats.rows * mats.cols)
            throw std::invalid_argument(std::string(who) + ": matrix size mismatch");
}

} // namespace

void column_threshold(StageMatrices& mats, double threshold, ThresholdScope scope) {
    check_matrices(mats, threshold, "column_threshold");
    const std::size_t last = scope == ThresholdScope::details_only
                                 ? mats.stages.size() - 1
                                 : mats.stages.size();
    const double t2 = threshold * threshold;
    for (std::size_t s = 0; s < last; ++s) {
        std::vector<double>& m = mats.stages[s];
#pragma omp parallel for schedule(static) if (parallel_enabled())
        for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(mats.cols); ++j) {
            double norm2 = 0.0;
            for (std::size_t i = 0; i < mats.rows; ++i) {
                const double v = m[i * mats.cols + static_cast<std::size_t>(j)];
                norm2 += v * v;
            }
            if (norm2 < t2)
                for (std::size_t i = 0; i < mats.rows; ++i)
                    m[i * mats.cols + static_cast<std::size_t>(j)] = 0.0;
        }
    }
}

void hard_threshold(StageMatrices& mats, double threshold, ThresholdScope scope) {
    check_matrices(mats, threshold, "hard_threshold");
    const std::size_t last = scope == ThresholdScope::details_only
                                 ? mats.stages.size() - 1
                                 : mats.stages.size();
    for (std::size_t s = 0; s < last; ++s)
        for (double& v : mats.stages[s])
            if (std::abs(v) < threshold) v = 0.0;
}

double psnr(const Image& reference, const Image& test) {
    check_image(reference, "psnr");
    check_image(test, "psnr");
    if (reference.height != test.height || reference.width != test.width)
        throw std::invalid_argument("psnr: image dimensions differ");
    double se = 0.0;
    for (std::size_t i = 0; i < reference.pixels.size(); ++i) {
        const double d = reference.pixels[i] - test.pixels[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(reference.pixels.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

std::vector<int> averaging_counts(std::size_t height, std::size_t width,
                                  std::size_t patch_side) {
    const long p = static_cast<long>(patch_side);
    const long lead = p / 2;
    std::vector<int> counts(height * width);
    auto axis_count = [p](long padded_pos, long len) {
        const long lo = std::max<long>(0, padded_pos - len + 1);
        const long hi = std::min<long>(p - 1, padded_pos);
        return static_cast<int>(hi - lo + 1);
    };
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c)
            counts[r * width + c] =
                axis_count(static_cast<long>(r) + lead, static_cast<long>(height)) *
                axis_count(static_cast<long>(c) + lead, static_cast<long>(width));
    return counts;
}

namespace {

struct Pipeline {
    std::size_t height = 0;
    std::size_t width = 0;
    WaveletFilterPair filt;
    PatchMatrix pm;
    OperatorSet ops;
    StageMatrices mats;
};

Pipeline decompose_image(const Image& img, const DenoiseConfig& cfg, std::size_t depth) {
    Pipeline pl;
    pl.height = img.height;
    pl.width = img.width;
    pl.filt = make_filter(cfg.filter);
    const Image padded = mirror_pad(img, cfg.patch_side);
    pl.pm = extract_patches(padded, cfg.patch_side, img.height, img.width);
    const PointSet points = patch_point_set(pl.pm);
    const std::optional<int> window =
        cfg.window > 0 ? std::optional<int>(cfg.window) : std::nullopt;
    pl.ops = build_operators(points, depth, pl.filt, DistanceMetric::squared_euclidean,
                             window, StartRule{});

    const std::size_t n = pl.pm.rows;
    const std::size_t N = pl.pm.cols;
    pl.mats.rows = n;
    pl.mats.cols = N;
    pl.mats.stages.assign(depth + 1, std::vector<double>(n * N));

#pragma omp parallel for schedule(dynamic) if (parallel_enabled())
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        std::vector<std::span<double>> rows;
        rows.reserve(depth + 1);
        for (std::size_t s = 0; s <= depth; ++s)
            rows.emplace_back(pl.mats.stages[s].data() + i * N, N);
        decompose_into(std::span<const double>(pl.pm.data.data() + i * N, N), pl.ops,
                       pl.filt, rows);
    }
    return pl;
}

Image restore(const Pipeline& pl, const StageMatrices& mats) {
    const std::size_t n = pl.pm.rows;
    const std::size_t N = pl.pm.cols;
    const std::size_t p = pl.pm.patch_side;
    const std::size_t H = pl.height;
    const std::size_t W = pl.width;
    const std::size_t PW = W + p - 1;
    const std::size_t PH = H + p - 1;
    const std::size_t depth = pl.ops.depth;

    std::vector<double> recon(n * N);
#pragma omp parallel for schedule(dynamic) if (parallel_enabled())
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        std::vector<std::span<const double>> rows;
        rows.reserve(depth + 1);
        for (std::size_t s = 0; s <= depth; ++s)
            rows.emplace_back(mats.stages[s].data() + i * N, N);
        reconstruct_from(rows, pl.ops, pl.filt,
                         std::span<double>(recon.data() + i * N, N));
    }

    // Re-place every subimage at its shift and average; the accumulation
    // order over subimages is fixed, keeping the result bit-reproducible.
    std::vector<double> sum(PH * PW, 0.0);
    std::vector<int> count(PH * PW, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t dr = i % p;
        const std::size_t dc = i / p;
        const double* row = recon.data() + i * N;
        for (std::size_t c = 0; c < W; ++c)
            for (std::size_t r = 0; r < H; ++r) {
                const std::size_t at = (r + dr) * PW + (c + dc);
                sum[at] += row[c * H + r];
                ++count[at];
            }
    }
    const std::size_t lead = p / 2;
    Image out(H, W);
    for (std::size_t r = 0; r < H; ++r)
        for (std::size_t c = 0; c < W; ++c) {
            const std::size_t at = (r + lead) * PW + (c + lead);
            out.at(r, c) = sum[at] / count[at];
        }
    return out;
}

void apply_threshold(StageMatrices& mats, double threshold, const DenoiseConfig& cfg) {
    if (cfg.mode == ThresholdMode::column_norm)
        column_threshold(mats, threshold, cfg.scope);
    else
        hard_threshold(mats, threshold, cfg.scope);
}

Image crop_image(const Image& img, std::size_t r0, std::size_t c0, std::size_t h,
                 std::size_t w) {
    Image out(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) out.at(r, c) = img.at(r0 + r, c0 + c);
    return out;
}

struct Calibration {
    double c = 0.0;
    double threshold = 0.0;
    std::uint64_t distance_count = 0;
};

// Grid-search the threshold constant on a centered crop: smaller, but large
// enough that column statistics carry over to the full image.
Calibration calibrate_threshold(const Image& noisy, const Image& reference,
                                const DenoiseConfig& cfg) {
    std::size_t side = std::min<std::size_t>({64, noisy.height, noisy.width});
    side -= side % 2;
    if (side < 2)
        throw std::invalid_argument("denoise: image too small to calibrate a threshold");
    const std::size_t r0 = (noisy.height - side) / 2;
    const std::size_t c0 = (noisy.width - side) / 2;
    const Image noisy_crop = crop_image(noisy, r0, c0, side, side);
    const Image ref_crop = crop_image(reference, r0, c0, side, side);

    DenoiseConfig sub = cfg;
    sub.depth = std::min(cfg.depth, max_feasible_depth(side * side));
    const Pipeline pl = decompose_image(noisy_crop, sub, sub.depth);

    Calibration best;
    best.distance_count = pl.ops.distance_count;
    double best_psnr = -std::numeric_limits<double>::infinity();
    for (double c = 1.0; c <= 4.0 + 1e-12; c += 0.25) {
        const double t = c * cfg.sigma * static_cast<double>(cfg.patch_side);
        StageMatrices work = pl.mats;
        apply_threshold(work, t, cfg);
        const Image estimate = restore(pl, work);
        const double score = psnr(ref_crop, estimate);
        if (score > best_psnr) { // ties keep the lowest c
            best_psnr = score;
            best.c = c;
            best.threshold = t;
        }
    }
    return best;
}

} // namespace

DenoiseOutcome denoise_run(const Image& noisy, const DenoiseConfig& cfg,
                           const Image* reference) {
    check_image(noisy, "denoise");
    if (cfg.patch_side < 1) throw std::invalid_argument("denoise: patch side must be positive");
    if (cfg.depth < 1) throw std::invalid_argument("denoise: depth must be at least 1");
    if (cfg.sigma < 0.0) throw std::invalid_argument("denoise: sigma must be nonnegative");
    if (cfg.window < 0) throw std::invalid_argument("denoise: window must be nonnegative");
    if (!cfg.threshold_auto && cfg.threshold < 0.0)
        throw std::invalid_argument("denoise: threshold must be nonnegative");
    if (reference) {
        check_image(*reference, "denoise");
        if (reference->height != noisy.height || reference->width != noisy.width)
            throw std::invalid_argument("denoise: reference dimensions differ from input");
    }
    const std::size_t total = noisy.pixel_count();
    if (cfg.depth >= 8 * sizeof(std::size_t) ||
        total % (std::size_t{1} << cfg.depth) != 0)
        throw std::invalid_argument(
            "denoise: depth " + std::to_string(cfg.depth) + " needs the pixel count (" +
            std::to_string(total) + ") divisible by 2^depth; crop the image or lower "
            "the depth (max feasible here: " +
            std::to_string(max_feasible_depth(total)) + ")");

    const auto t0 = std::chrono::steady_clock::now();
    DenoiseOutcome out;

    if (cfg.threshold_auto) {
        if (!reference)
            throw std::invalid_argument(
                "denoise: automatic threshold calibration needs a reference image");
        const Calibration cal = calibrate_threshold(noisy, *reference, cfg);
        out.threshold = cal.threshold;
        out.calibration_c = cal.c;
        out.threshold_was_auto = true;
        out.distance_count += cal.distance_count;
    } else {
        out.threshold = cfg.threshold;
    }

    Pipeline pl = decompose_image(noisy, cfg, cfg.depth);
    out.distance_count += pl.ops.distance_count;
    apply_threshold(pl.mats, out.threshold, cfg);
    out.output = restore(pl, pl.mats);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.psnr_noisy = reference ? psnr(*reference, noisy) : nan;
    out.psnr_output = reference ? psnr(*reference, out.output) : nan;
    out.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

Image denoise(const Image& noisy, const DenoiseConfig& cfg, const Image* reference) {
    return denoise_run(noisy, cfg, reference).output;
}

} // namespace rtbwt
