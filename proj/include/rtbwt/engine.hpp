#pragma once

#include "rtbwt/geometry.hpp"
#include "rtbwt/wavelet.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rtbwt {

/// Where each band's greedy path starts. `fixed` clamps `index` into the
/// band (so 0 always means "the first point"); `seeded_random` draws a start
/// per band from `seed` mixed with the band's (stage, index), which keeps
/// rebuilds reproducible.
struct StartRule {
    enum class Kind { fixed, seeded_random };
    Kind kind = Kind::fixed;
    std::size_t index = 0;
    std::uint64_t seed = 0;

    std::size_t resolve(std::size_t band_size, std::size_t stage,
                        std::size_t band) const;
};

/// The reordering operators of a depth-D transform plus the feature point
/// sets they were derived from. Stage k (0 = finest) holds 2^k permutations,
/// one per band of length n/2^k. level_point_sets has depth+1 entries; entry
/// k holds the feature sets the stage-k orderings were built from, and entry
/// depth holds the final coarsest-level sets. Read-only after construction,
/// so one set can serve any number of concurrent transforms.
struct OperatorSet {
    std::size_t n = 0;
    std::size_t depth = 0;
    std::string filter_name;
    std::vector<std::vector<Permutation>> perms;
    std::vector<std::vector<PointSet>> level_point_sets;
    std::uint64_t distance_count = 0;

    std::size_t band_count(std::size_t stage) const { return std::size_t{1} << stage; }
    std::size_t band_size(std::size_t stage) const { return n >> stage; }
};

/// Largest depth d such that 2^d divides n.
std::size_t max_feasible_depth(std::size_t n);

/// One feature-propagation round: reorder `points` by `perm`, then replace
/// each position with the weighted mean of its periodic lowpass neighborhood
/// (weights h/sum(h), same phase as analysis_step). Anchors, when present,
/// average with the same weights and round to the nearest integer pixel.
/// The output has the same point count; splitting into odd/even children is
/// positional and happens in build_operators.
PointSet propagate_features(const PointSet& points, const Permutation& perm,
                            const WaveletFilterPair& filt);

/// Builds every permutation of a depth-D transform: per stage, run a greedy
/// nearest-neighbor path on each band's feature set, propagate the features,
/// and split them into the two child bands. Accumulates the total number of
/// distance evaluations across all path searches into distance_count.
OperatorSet build_operators(const PointSet& points, std::size_t depth,
                            const WaveletFilterPair& filt, DistanceMetric metric,
                            std::optional<int> window = std::nullopt,
                            StartRule start_rule = {});

/// An operator set whose every permutation is the identity — the transform
/// then degenerates to the plain undecimated filter bank. Useful as the
/// no-reordering baseline. Carries no point sets.
OperatorSet identity_operators(std::size_t n, std::size_t depth);

/// Depth-D redundant decomposition output: `details[k]` holds stage k's
/// concatenated detail bands (length n each), `approx` the concatenated
/// coarsest approximation bands (length n). Total coefficients: (depth+1)*n.
struct CoefficientPyramid {
    std::size_t n = 0;
    std::size_t depth = 0;
    std::string filter_name;
    std::vector<std::vector<double>> details;
    std::vector<double> approx;

    /// Band `index` of stage `stage`; stage == depth reads the approximation.
    Band band(std::size_t stage, std::size_t index) const;
    std::size_t coefficient_count() const { return (depth + 1) * n; }
};

CoefficientPyramid decompose(std::span<const double> signal, const OperatorSet& ops,
                             const WaveletFilterPair& filt);

std::vector<double> reconstruct(const CoefficientPyramid& pyr, const OperatorSet& ops,
                                const WaveletFilterPair& filt);

/// Row-oriented twins used by batch callers: stage s of the decomposition is
/// written to / read from stage_rows[s] (s == depth is the approximation),
/// each a span of length ops.n owned by the caller.
void decompose_into(std::span<const double> signal, const OperatorSet& ops,
                    const WaveletFilterPair& filt,
                    std::span<const std::span<double>> stage_rows);
void reconstruct_from(std::span<const std::span<const double>> stage_rows,
                      const OperatorSet& ops, const WaveletFilterPair& filt,
                      std::span<double> out);

/// The two analytic distance-evaluation counts for an N-sample, L-level full
/// decomposition and their ratio: `rtbwt` for this transform's shared-band
/// construction, `gtbwt` for the decimated per-tree construction it is
/// compared against. The ratio approaches (2/3)L for large N.
struct ClosedFormCounts {
    double rtbwt = 0.0;
    double gtbwt = 0.0;
    double ratio = 0.0;
};

ClosedFormCounts closed_form_counts(std::size_t n, std::size_t levels);

} // namespace rtbwt
