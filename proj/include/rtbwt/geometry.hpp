#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rtbwt {

enum class DistanceMetric { squared_euclidean, euclidean };

/// Integer (row, col) position in padded-image pixel units. Used to restrict
/// nearest-neighbor searches to a square spatial window.
struct Anchor {
    int row = 0;
    int col = 0;
    friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// One point of a point set: a coordinate vector plus an optional spatial
/// anchor. All points of a set share the coordinate dimension, and anchors
/// are all-or-none across the set.
struct FeaturePoint {
    std::vector<double> coords;
    std::optional<Anchor> anchor;
};

/// Immutable ordered collection of equal-dimension points. Storage is a flat
/// row-major [size x dim] buffer so distance scans stay contiguous.
class PointSet {
public:
    explicit PointSet(const std::vector<FeaturePoint>& points);
    PointSet(std::size_t dim, std::vector<double> flat_coords,
             std::vector<Anchor> anchors = {});

    std::size_t size() const { return count_; }
    std::size_t dim() const { return dim_; }
    bool has_anchors() const { return !anchors_.empty(); }

    std::span<const double> coords(std::size_t i) const {
        return {flat_.data() + i * dim_, dim_};
    }
    const Anchor& anchor(std::size_t i) const { return anchors_[i]; }
    const std::vector<Anchor>& anchors() const { return anchors_; }
    std::span<const double> flat() const { return flat_; }

    FeaturePoint point(std::size_t i) const;

private:
    std::size_t dim_ = 0;
    std::size_t count_ = 0;
    std::vector<double> flat_;
    std::vector<Anchor> anchors_; // empty when the set carries no anchors
};

/// A bijective reordering of {0..size-1}. order[j] is the source index that
/// lands at output position j. File exports use 1-based indices; in memory
/// everything is 0-based.
struct Permutation {
    std::vector<std::uint32_t> order;

    std::size_t size() const { return order.size(); }
    static Permutation identity(std::size_t n);
    bool is_valid() const;
    friend bool operator==(const Permutation&, const Permutation&) = default;
};

/// Tally of explicit distance evaluations. Callers that run scans in
/// parallel keep one counter per worker and merge at the end.
struct DistanceCounter {
    std::uint64_t count = 0;
};

double distance(std::span<const double> a, std::span<const double> b,
                DistanceMetric metric, DistanceCounter* counter = nullptr);
double distance(const FeaturePoint& a, const FeaturePoint& b,
                DistanceMetric metric, DistanceCounter* counter = nullptr);

/// Greedy nearest-neighbor path: start at `start`, repeatedly hop to the
/// nearest unvisited point (ties broken by lowest index). When `window` is
/// set, candidates are the unvisited points whose anchor lies within
/// Chebyshev radius floor(window/2) of the current anchor; if that set is
/// empty the step falls back to the globally nearest unvisited point.
/// Every candidate comparison goes through distance() and is counted.
Permutation nn_path(const PointSet& set, std::size_t start,
                    DistanceMetric metric,
                    std::optional<int> window = std::nullopt,
                    DistanceCounter* counter = nullptr);

/// Cost of visiting the points in permuted order: sum of consecutive
/// distances along the path.
double path_cost(const PointSet& set, const Permutation& perm,
                 DistanceMetric metric, DistanceCounter* counter = nullptr);

std::vector<double> apply_permutation(std::span<const double> v,
                                      const Permutation& perm);
void apply_permutation(std::span<const double> v, const Permutation& perm,
                       std::span<double> out);

Permutation invert_permutation(const Permutation& perm);

/// Sum of absolute successive differences of a sample vector.
double total_variation(std::span<const double> v);

/// Smoothness diagnostics of a signal under a candidate ordering: the total
/// variation of the reordered samples, the Euclidean path cost through the
/// reordered points, and whether tv <= K * path_cost for the supplied
/// Lipschitz constant K.
struct SmoothnessReport {
    double tv = 0.0;
    double path_cost = 0.0;
    double lipschitz_K = 0.0;
    bool bound_holds = false;
};

SmoothnessReport smoothness_report(const PointSet& set,
                                   std::span<const double> signal,
                                   const Permutation& perm, double K);

} // namespace rtbwt
