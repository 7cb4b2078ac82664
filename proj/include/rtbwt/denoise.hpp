#pragma once

#include "rtbwt/engine.hpp"
#include "rtbwt/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rtbwt {

/// Grayscale raster, nominal range [0,255], stored row-major as doubles so
/// intermediate results keep full precision until written out.
struct Image {
    std::size_t height = 0; // N1
    std::size_t width = 0;  // N2
    std::vector<double> pixels;

    Image() = default;
    Image(std::size_t h, std::size_t w, double fill = 0.0)
        : height(h), width(w), pixels(h * w, fill) {}

    double& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }
    double at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
    std::size_t pixel_count() const { return height * width; }
};

/// The n x N patch matrix: column j is the column-stacked patch_side^2 patch
/// around pixel j (pixels enumerated column-major: j = c*height + r), and
/// row i is the column-stacked shifted subimage with shift (i mod patch_side,
/// i div patch_side) inside the padded frame. anchors[j] is pixel j's (row,
/// col) in the original image.
struct PatchMatrix {
    std::size_t patch_side = 0;
    std::size_t rows = 0; // n = patch_side^2 (subimage count)
    std::size_t cols = 0; // N = original pixel count
    std::size_t image_height = 0;
    std::size_t image_width = 0;
    std::vector<double> data; // row-major rows x cols
    std::vector<Anchor> anchors;

    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

enum class ThresholdScope { details_only, all_matrices };

/// column_norm zeroes whole n-vectors of co-located coefficients by their
/// Euclidean norm; per_coefficient is a plain elementwise hard threshold
/// kept for comparison runs.
enum class ThresholdMode { column_norm, per_coefficient };

struct DenoiseConfig {
    std::size_t patch_side = 8;
    int window = 31; // candidate-search window in pixels; 0 disables it
    std::size_t depth = 9;
    bool threshold_auto = true;
    double threshold = 0.0; // used when threshold_auto is false
    double sigma = 0.0;
    std::string filter = "sym8";
    std::uint64_t seed = 0;
    ThresholdScope scope = ThresholdScope::all_matrices;
    ThresholdMode mode = ThresholdMode::column_norm;
};

/// The depth+1 per-stage coefficient matrices of a batch decomposition.
/// stages[s] is row-major rows x cols; entry (i, j) is subimage i's stage-s
/// coefficient at position j. stages[depth] holds the approximations.
struct StageMatrices {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::vector<double>> stages;
};

/// Adds i.i.d. zero-mean Gaussian noise of standard deviation sigma, without
/// clipping. Deterministic per (seed, image dimensions).
Image add_awgn(const Image& img, double sigma, std::uint64_t seed);

/// Pads to (height+patch_side-1) x (width+patch_side-1) by whole-sample
/// mirror reflection, splitting the padding as ceil/2 leading, floor/2
/// trailing per axis.
Image mirror_pad(const Image& img, std::size_t patch_side);

PatchMatrix extract_patches(const Image& padded, std::size_t patch_side,
                            std::size_t orig_height, std::size_t orig_width);

/// The patches as an anchored point set (one point per pixel, dimension
/// patch_side^2) — the input to build_operators.
PointSet patch_point_set(const PatchMatrix& pm);

/// The n rows of the patch matrix, each a length-N subimage signal.
std::vector<std::vector<double>> subimage_signals(const PatchMatrix& pm);

/// Zeroes, in every matrix within scope, each column whose Euclidean norm is
/// strictly below T. Idempotent.
void column_threshold(StageMatrices& mats, double threshold, ThresholdScope scope);

/// Elementwise variant: zeroes coefficients with |value| strictly below T.
void hard_threshold(StageMatrices& mats, double threshold, ThresholdScope scope);

double psnr(const Image& reference, const Image& test);

/// How many subimage estimates the averaging step collects for each original
/// pixel: interior pixels get patch_side^2, border pixels fewer because
/// subimages near their shift limit do not cover the padded margin.
std::vector<int> averaging_counts(std::size_t height, std::size_t width,
                                  std::size_t patch_side);

struct DenoiseOutcome {
    Image output;
    double threshold = 0.0;     // the T actually applied
    double calibration_c = 0.0; // grid constant behind an auto T; 0 otherwise
    bool threshold_was_auto = false;
    std::uint64_t distance_count = 0;
    double psnr_noisy = 0.0;  // vs reference, NaN when no reference was given
    double psnr_output = 0.0; // vs reference pre-quantization, NaN likewise
    double seconds = 0.0;
};

/// Full pipeline: pad, extract patches, build one shared OperatorSet from
/// them (squared-Euclidean metric, windowed search), transform all
/// patch_side^2 subimage signals, threshold the stage matrices jointly,
/// invert, and average the re-placed estimates. An automatic threshold
/// (T = c * sigma * patch_side, c grid-searched on a centered calibration
/// crop) needs `reference`; explicit thresholds do not.
DenoiseOutcome denoise_run(const Image& noisy, const DenoiseConfig& cfg,
                           const Image* reference = nullptr);

Image denoise(const Image& noisy, const DenoiseConfig& cfg,
              const Image* reference = nullptr);

} // namespace rtbwt
