#include "rtbwt/geometry.hpp"
#include "rtbwt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rtbwt {

PointSet::PointSet(const std::vector<FeaturePoint>& points) {
    count_ = points.size();
    if (count_ == 0) throw std::invalid_argument("point set must hold at least one point");
    dim_ = points[0].coords.size();
    if (dim_ == 0) throw std::invalid_argument("point dimension must be positive");
    const bool anchored = points[0].anchor.has_value();
    flat_.reserve(count_ * dim_);
    if (anchored) anchors_.reserve(count_);
    for (const auto& p : points) {
        if (p.coords.size() != dim_)
            throw std::invalid_argument("all points must share one dimension");
        if (p.anchor.has_value() != anchored)
            throw std::invalid_argument("anchors must be present on all points or none");
        flat_.insert(flat_.end(), p.coords.begin(), p.coords.end());
        if (anchored) anchors_.push_back(*p.anchor);
    }
}

PointSet::PointSet(std::size_t dim, std::vector<double> flat_coords,
                   std::vector<Anchor> anchors)
    : dim_(dim), flat_(std::move(flat_coords)), anchors_(std::move(anchors)) {
    if (dim_ == 0) throw std::invalid_argument("point dimension must be positive");
    if (flat_.empty()) throw std::invalid_argument("point set must hold at least one point");
    if (flat_.size() % dim_ != 0)
        throw std::invalid_argument("flat coordinate buffer length not a multiple of dim");
    count_ = flat_.size() / dim_;
    if (!anchors_.empty() && anchors_.size() != count_)
        throw std::invalid_argument("anchor count must match point count");
}

FeaturePoint PointSet::point(std::size_t i) const {
    FeaturePoint p;
    auto c = coords(i);
    p.coords.assign(c.begin(), c.end());
    if (has_anchors()) p.anchor = anchors_[i];
    return p;
}

Permutation Permutation::identity(std::size_t n) {
    Permutation p;
    p.order.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.order[i] = static_cast<std::uint32_t>(i);
    return p;
}

bool Permutation::is_valid() const {
    std::vector<char> seen(order.size(), 0);
    for (auto v : order) {
        if (v >= order.size() || seen[v]) return false;
        seen[v] = 1;
    }
    return true;
}

double distance(std::span<const double> a, std::span<const double> b,
                DistanceMetric metric, DistanceCounter* counter) {
    if (a.size() != b.size())
        throw std::invalid_argument("distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    if (counter) ++counter->count;
    return metric == DistanceMetric::squared_euclidean ? s : std::sqrt(s);
}

double distance(const FeaturePoint& a, const FeaturePoint& b,
                DistanceMetric metric, DistanceCounter* counter) {
    return distance(std::span<const double>(a.coords),
                    std::span<const double>(b.coords), metric, counter);
}

namespace {

struct Best {
    double d = std::numeric_limits<double>::infinity();
    std::uint32_t idx = std::numeric_limits<std::uint32_t>::max();
};

inline void take(Best& best, double d, std::uint32_t idx) {
    if (d < best.d || (d == best.d && idx < best.idx)) {
        best.d = d;
        best.idx = idx;
    }
}

// Scan every index in `remaining` and return the (distance, index) minimum
// against the query point, ties to the lowest index. `pos_out` receives the
// winner's position within `remaining` so the caller can swap-remove it.
Best scan_all(const PointSet& set, std::span<const double> query,
              const std::vector<std::uint32_t>& remaining, DistanceMetric metric,
              DistanceCounter* counter, std::size_t& pos_out) {
    Best best;
    std::size_t best_pos = 0;
    const std::size_t n = remaining.size();
#ifdef _OPENMP
    if (parallel_enabled() && n >= 4096) {
        const int workers = worker_count();
        std::vector<Best> local(workers);
        std::vector<std::uint64_t> local_count(workers, 0);
#pragma omp parallel num_threads(workers)
        {
            const int t = omp_get_thread_num();
            Best mine;
            std::uint64_t cnt = 0;
#pragma omp for schedule(static)
            for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
                const std::uint32_t idx = remaining[i];
                const double d = distance(set.coords(idx), query, metric, nullptr);
                ++cnt;
                take(mine, d, idx);
            }
            local[t] = mine;
            local_count[t] = cnt;
        }
        for (int t = 0; t < workers; ++t) {
            take(best, local[t].d, local[t].idx);
            if (counter) counter->count += local_count[t];
        }
        // recover the winner's slot; identity of the winner is already fixed
        for (std::size_t i = 0; i < n; ++i)
            if (remaining[i] == best.idx) { best_pos = i; break; }
        pos_out = best_pos;
        return best;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t idx = remaining[i];
        const double d = distance(set.coords(idx), query, metric, counter);
        if (d < best.d || (d == best.d && idx < best.idx)) {
            best.d = d;
            best.idx = idx;
            best_pos = i;
        }
    }
    pos_out = best_pos;
    return best;
}

// Dense bucket grid over anchor positions for windowed candidate lookup.
struct AnchorGrid {
    int row0 = 0, col0 = 0, rows = 0, cols = 0;
    std::vector<std::vector<std::uint32_t>> cells;

    explicit AnchorGrid(const PointSet& set) {
        int rmin = std::numeric_limits<int>::max(), rmax = std::numeric_limits<int>::min();
        int cmin = rmin, cmax = rmax;
        for (std::size_t i = 0; i < set.size(); ++i) {
            const Anchor& a = set.anchor(i);
            rmin = std::min(rmin, a.row); rmax = std::max(rmax, a.row);
            cmin = std::min(cmin, a.col); cmax = std::max(cmax, a.col);
        }
        row0 = rmin; col0 = cmin;
        rows = rmax - rmin + 1; cols = cmax - cmin + 1;
        cells.resize(static_cast<std::size_t>(rows) * cols);
        for (std::size_t i = 0; i < set.size(); ++i) {
            const Anchor& a = set.anchor(i);
            cell(a.row, a.col).push_back(static_cast<std::uint32_t>(i));
        }
    }

    std::vector<std::uint32_t>& cell(int r, int c) {
        return cells[static_cast<std::size_t>(r - row0) * cols + (c - col0)];
    }
};

} // namespace

Permutation nn_path(const PointSet& set, std::size_t start, DistanceMetric metric,
                    std::optional<int> window, DistanceCounter* counter) {
    const std::size_t n = set.size();
    if (n == 0) throw std::invalid_argument("nn_path: empty point set");
    if (start >= n) throw std::invalid_argument("nn_path: start index out of range");
    const bool windowed = window.has_value() && *window > 0;
    if (windowed && !set.has_anchors())
        throw std::invalid_argument("nn_path: windowed search needs anchored points");

    Permutation perm;
    perm.order.reserve(n);
    perm.order.push_back(static_cast<std::uint32_t>(start));
    if (n == 1) return perm;

    std::vector<char> visited(n, 0);
    visited[start] = 1;
    std::vector<std::uint32_t> remaining;
    remaining.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        if (i != start) remaining.push_back(static_cast<std::uint32_t>(i));

    std::optional<AnchorGrid> grid;
    if (windowed) grid.emplace(set);
    const int radius = windowed ? *window / 2 : 0;

    std::uint32_t current = static_cast<std::uint32_t>(start);
    while (!remaining.empty()) {
        Best best;
        bool found_in_window = false;
        if (windowed) {
            const Anchor& a = set.anchor(current);
            const int rlo = std::max(a.row - radius, grid->row0);
            const int rhi = std::min(a.row + radius, grid->row0 + grid->rows - 1);
            const int clo = std::max(a.col - radius, grid->col0);
            const int chi = std::min(a.col + radius, grid->col0 + grid->cols - 1);
            const auto query = set.coords(current);
            for (int r = rlo; r <= rhi; ++r) {
                for (int c = clo; c <= chi; ++c) {
                    for (std::uint32_t idx : grid->cell(r, c)) {
                        if (visited[idx]) continue;
                        const double d = distance(set.coords(idx), query, metric, counter);
                        take(best, d, idx);
                        found_in_window = true;
                    }
                }
            }
        }
        std::size_t pos = 0;
        if (!windowed || !found_in_window) {
            best = scan_all(set, set.coords(current), remaining, metric, counter, pos);
        } else {
            for (std::size_t i = 0; i < remaining.size(); ++i)
                if (remaining[i] == best.idx) { pos = i; break; }
        }
        visited[best.idx] = 1;
        remaining[pos] = remaining.back();
        remaining.pop_back();
        perm.order.push_back(best.idx);
        current = best.idx;
    }
    return perm;
}

double path_cost(const PointSet& set, const Permutation& perm,
                 DistanceMetric metric, DistanceCounter* counter) {
    if (perm.size() != set.size())
        throw std::invalid_argument("path_cost: permutation size mismatch");
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < perm.size(); ++j)
        total += distance(set.coords(perm.order[j]), set.coords(perm.order[j + 1]),
                          metric, counter);
    return total;
}

std::vector<double> apply_permutation(std::span<const double> v,
                                      const Permutation& perm) {
    std::vector<double> out(v.size());
    apply_permutation(v, perm, out);
    return out;
}

void apply_permutation(std::span<const double> v, const Permutation& perm,
                       std::span<double> out) {
    if (perm.size() != v.size() || out.size() != v.size())
        throw std::invalid_argument("apply_permutation: size mismatch");
    for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[perm.order[j]];
}

Permutation invert_permutation(const Permutation& perm) {
    if (!perm.is_valid())
        throw std::invalid_argument("invert_permutation: not a permutation");
    Permutation inv;
    inv.order.resize(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j)
        inv.order[perm.order[j]] = static_cast<std::uint32_t>(j);
    return inv;
}

double total_variation(std::span<const double> v) {
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) tv += std::abs(v[i + 1] - v[i]);
    return tv;
}

SmoothnessReport smoothness_report(const PointSet& set,
                                   std::span<const double> signal,
                                   const Permutation& perm, double K) {
    if (signal.size() != set.size())
        throw std::invalid_argument("smoothness_report: signal size mismatch");
    SmoothnessReport rep;
    rep.lipschitz_K = K;
    const auto reordered = apply_permutation(signal, perm);
    rep.tv = total_variation(reordered);
    rep.path_cost = path_cost(set, perm, DistanceMetric::euclidean, nullptr);
    // tiny slack so exact-equality cases (linear signals) stay inside
    rep.bound_holds = rep.tv <= K * rep.path_cost * (1.0 + 1e-12) + 1e-12;
    return rep;
}

} // namespace rtbwt
