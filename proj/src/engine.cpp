#include "rtbwt/engine.hpp"
#include "rtbwt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>

namespace rtbwt {

std::size_t max_feasible_depth(std::size_t n) {
    if (n == 0) return 0;
    std::size_t d = 0;
    while (n % 2 == 0) {
        n /= 2;
        ++d;
    }
    return d;
}

std::size_t StartRule::resolve(std::size_t band_size, std::size_t stage,
                               std::size_t band) const {
    if (band_size == 0) throw std::invalid_argument("StartRule: empty band");
    if (kind == Kind::fixed) return std::min(index, band_size - 1);
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (stage * 0x1000193ULL + band + 1)));
    return static_cast<std::size_t>(rng() % band_size);
}

PointSet propagate_features(const PointSet& points, const Permutation& perm,
                            const WaveletFilterPair& filt) {
    const std::size_t m = points.size();
    if (perm.size() != m)
        throw std::invalid_argument("propagate_features: permutation size mismatch");
    const std::size_t dim = points.dim();

    const double tap_sum =
        std::accumulate(filt.lowpass.begin(), filt.lowpass.end(), 0.0);
    std::vector<double> w = filt.lowpass;
    for (double& v : w) v /= tap_sum;

    std::vector<double> col(m), filtered(m), out_flat(m * dim);
    for (std::size_t d = 0; d < dim; ++d) {
        for (std::size_t j = 0; j < m; ++j) col[j] = points.coords(perm.order[j])[d];
        periodic_filter(col, w, 0, filtered);
        for (std::size_t j = 0; j < m; ++j) out_flat[j * dim + d] = filtered[j];
    }

    std::vector<Anchor> anchors;
    if (points.has_anchors()) {
        std::vector<double> rows(m), cols(m), frows(m), fcols(m);
        for (std::size_t j = 0; j < m; ++j) {
            const Anchor& a = points.anchor(perm.order[j]);
            rows[j] = a.row;
            cols[j] = a.col;
        }
        periodic_filter(rows, w, 0, frows);
        periodic_filter(cols, w, 0, fcols);
        anchors.resize(m);
        for (std::size_t j = 0; j < m; ++j)
            anchors[j] = {static_cast<int>(std::lround(frows[j])),
                          static_cast<int>(std::lround(fcols[j]))};
    }
    return PointSet(dim, std::move(out_flat), std::move(anchors));
}

namespace {

std::pair<PointSet, PointSet> split_point_set(const PointSet& s) {
    const std::size_t m = s.size();
    const std::size_t dim = s.dim();
    std::vector<double> odd_flat, even_flat;
    odd_flat.reserve(((m + 1) / 2) * dim);
    even_flat.reserve((m / 2) * dim);
    std::vector<Anchor> odd_anchors, even_anchors;
    for (std::size_t i = 0; i < m; ++i) {
        const auto c = s.coords(i);
        auto& flat = (i % 2 == 0) ? odd_flat : even_flat;
        flat.insert(flat.end(), c.begin(), c.end());
        if (s.has_anchors())
            ((i % 2 == 0) ? odd_anchors : even_anchors).push_back(s.anchor(i));
    }
    return {PointSet(dim, std::move(odd_flat), std::move(odd_anchors)),
            PointSet(dim, std::move(even_flat), std::move(even_anchors))};
}

void check_operator_shape(const OperatorSet& ops) {
    if (ops.depth == 0 || ops.n == 0)
        throw std::invalid_argument("operator set is empty");
    if (ops.n % (std::size_t{1} << ops.depth) != 0)
        throw std::invalid_argument("operator set depth does not divide its length");
    if (ops.perms.size() != ops.depth)
        throw std::invalid_argument("operator set holds wrong number of stages");
    for (std::size_t k = 0; k < ops.depth; ++k) {
        if (ops.perms[k].size() != ops.band_count(k))
            throw std::invalid_argument("operator set holds wrong band count at a stage");
        for (const Permutation& p : ops.perms[k])
            if (p.size() != ops.band_size(k) || !p.is_valid())
                throw std::invalid_argument("operator set holds an invalid permutation");
    }
}

} // namespace

OperatorSet build_operators(const PointSet& points, std::size_t depth,
                            const WaveletFilterPair& filt, DistanceMetric metric,
                            std::optional<int> window, StartRule start_rule) {
    const std::size_t n = points.size();
    if (depth < 1) throw std::invalid_argument("build_operators: depth must be at least 1");
    if (depth >= 8 * sizeof(std::size_t) || n % (std::size_t{1} << depth) != 0)
        throw std::invalid_argument(
            "build_operators: depth " + std::to_string(depth) + " infeasible for " +
            std::to_string(n) + " points; max feasible depth is " +
            std::to_string(max_feasible_depth(n)));

    OperatorSet ops;
    ops.n = n;
    ops.depth = depth;
    ops.filter_name = filt.name;
    ops.perms.resize(depth);
    ops.level_point_sets.reserve(depth + 1);
    ops.level_point_sets.push_back({points});

    std::uint64_t total = 0;
    for (std::size_t k = 0; k < depth; ++k) {
        const std::size_t bands = ops.band_count(k);
        const std::size_t m = ops.band_size(k);
        const std::vector<PointSet>& cur = ops.level_point_sets[k];
        ops.perms[k].assign(bands, Permutation{});
        std::vector<std::optional<PointSet>> next(2 * bands);
        std::vector<std::uint64_t> counts(bands, 0);

#pragma omp parallel for schedule(dynamic) if (parallel_enabled() && bands > 1)
        for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(bands); ++bi) {
            const std::size_t b = static_cast<std::size_t>(bi);
            DistanceCounter counter;
            const std::size_t start = start_rule.resolve(m, k, b);
            Permutation p = nn_path(cur[b], start, metric, window, &counter);
            PointSet propagated = propagate_features(cur[b], p, filt);
            auto children = split_point_set(propagated);
            ops.perms[k][b] = std::move(p);
            next[b] = std::move(children.first);
            next[b + bands] = std::move(children.second);
            counts[b] = counter.count;
        }

        for (std::size_t b = 0; b < bands; ++b) total += counts[b];
        std::vector<PointSet> materialized;
        materialized.reserve(2 * bands);
        for (auto& o : next) materialized.push_back(std::move(*o));
        ops.level_point_sets.push_back(std::move(materialized));
    }
    ops.distance_count = total;
    return ops;
}

OperatorSet identity_operators(std::size_t n, std::size_t depth) {
    if (depth < 1) throw std::invalid_argument("identity_operators: depth must be at least 1");
    if (depth >= 8 * sizeof(std::size_t) || n == 0 ||
        n % (std::size_t{1} << depth) != 0)
        throw std::invalid_argument(
            "identity_operators: depth " + std::to_string(depth) + " infeasible for " +
            std::to_string(n) + " samples; max feasible depth is " +
            std::to_string(max_feasible_depth(n)));
    OperatorSet ops;
    ops.n = n;
    ops.depth = depth;
    ops.perms.resize(depth);
    for (std::size_t k = 0; k < depth; ++k)
        ops.perms[k].assign(ops.band_count(k), Permutation::identity(ops.band_size(k)));
    return ops;
}

Band CoefficientPyramid::band(std::size_t stage, std::size_t index) const {
    if (stage > depth) throw std::invalid_argument("band: stage out of range");
    const std::size_t count = std::size_t{1} << stage;
    const std::size_t m = n >> stage;
    if (index >= count) throw std::invalid_argument("band: index out of range");
    const std::vector<double>& src = (stage == depth) ? approx : details[stage];
    return Band(src.begin() + static_cast<std::ptrdiff_t>(index * m),
                src.begin() + static_cast<std::ptrdiff_t>((index + 1) * m));
}

void decompose_into(std::span<const double> signal, const OperatorSet& ops,
                    const WaveletFilterPair& filt,
                    std::span<const std::span<double>> stage_rows) {
    check_operator_shape(ops);
    const std::size_t n = ops.n;
    if (signal.size() != n)
        throw std::invalid_argument("decompose: signal length does not match operator set");
    if (stage_rows.size() != ops.depth + 1)
        throw std::invalid_argument("decompose: need depth+1 stage rows");
    for (const auto& r : stage_rows)
        if (r.size() != n)
            throw std::invalid_argument("decompose: every stage row must have the signal's length");

    std::vector<double> cur(signal.begin(), signal.end());
    std::vector<double> next(n), permuted(n), low(n);

    for (std::size_t k = 0; k < ops.depth; ++k) {
        const std::size_t bands = ops.band_count(k);
        const std::size_t m = ops.band_size(k);
        const std::size_t half = m / 2;
        const std::span<double> detail_row = stage_rows[k];

#pragma omp parallel for schedule(static) if (parallel_enabled() && bands > 1)
        for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(bands); ++bi) {
            const std::size_t b = static_cast<std::size_t>(bi);
            const std::span<const double> seg(cur.data() + b * m, m);
            const std::span<double> pseg(permuted.data() + b * m, m);
            const std::span<double> lseg(low.data() + b * m, m);
            apply_permutation(seg, ops.perms[k][b], pseg);
            analysis_step(pseg, filt, lseg, detail_row.subspan(b * m, m));
            double* odd_child = next.data() + b * half;
            double* even_child = next.data() + (b + bands) * half;
            for (std::size_t j = 0; j < half; ++j) {
                odd_child[j] = lseg[2 * j];
                even_child[j] = lseg[2 * j + 1];
            }
        }
        std::swap(cur, next);
    }
    std::copy(cur.begin(), cur.end(), stage_rows[ops.depth].begin());
}

void reconstruct_from(std::span<const std::span<const double>> stage_rows,
                      const OperatorSet& ops, const WaveletFilterPair& filt,
                      std::span<double> out) {
    check_operator_shape(ops);
    const std::size_t n = ops.n;
    if (out.size() != n)
        throw std::invalid_argument("reconstruct: output length does not match operator set");
    if (stage_rows.size() != ops.depth + 1)
        throw std::invalid_argument("reconstruct: need depth+1 stage rows");
    for (const auto& r : stage_rows)
        if (r.size() != n)
            throw std::invalid_argument("reconstruct: every stage row must have the signal's length");

    std::vector<double> cur(stage_rows[ops.depth].begin(), stage_rows[ops.depth].end());
    std::vector<double> prev(n), merged(n), synth(n);

    for (std::size_t k = ops.depth; k-- > 0;) {
        const std::size_t bands = ops.band_count(k);
        const std::size_t m = ops.band_size(k);
        const std::size_t half = m / 2;
        const std::span<const double> detail_row = stage_rows[k];

#pragma omp parallel for schedule(static) if (parallel_enabled() && bands > 1)
        for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(bands); ++bi) {
            const std::size_t b = static_cast<std::size_t>(bi);
            const double* odd_child = cur.data() + b * half;
            const double* even_child = cur.data() + (b + bands) * half;
            const std::span<double> mseg(merged.data() + b * m, m);
            for (std::size_t j = 0; j < half; ++j) {
                mseg[2 * j] = odd_child[j];
                mseg[2 * j + 1] = even_child[j];
            }
            const std::span<double> sseg(synth.data() + b * m, m);
            synthesis_merge(mseg, detail_row.subspan(b * m, m), filt, sseg);
            const Permutation inv = invert_permutation(ops.perms[k][b]);
            apply_permutation(sseg, inv, std::span<double>(prev.data() + b * m, m));
        }
        std::swap(cur, prev);
    }
    std::copy(cur.begin(), cur.end(), out.begin());
}

CoefficientPyramid decompose(std::span<const double> signal, const OperatorSet& ops,
                             const WaveletFilterPair& filt) {
    CoefficientPyramid pyr;
    pyr.n = ops.n;
    pyr.depth = ops.depth;
    pyr.filter_name = filt.name;
    pyr.details.assign(ops.depth, std::vector<double>(ops.n));
    pyr.approx.assign(ops.n, 0.0);

    std::vector<std::span<double>> rows;
    rows.reserve(ops.depth + 1);
    for (auto& d : pyr.details) rows.emplace_back(d);
    rows.emplace_back(pyr.approx);
    decompose_into(signal, ops, filt, rows);
    return pyr;
}

std::vector<double> reconstruct(const CoefficientPyramid& pyr, const OperatorSet& ops,
                                const WaveletFilterPair& filt) {
    if (pyr.n != ops.n || pyr.depth != ops.depth)
        throw std::invalid_argument("reconstruct: pyramid does not match operator set");
    if (pyr.details.size() != pyr.depth || pyr.approx.size() != pyr.n)
        throw std::invalid_argument("reconstruct: malformed pyramid");

    std::vector<std::span<const double>> rows;
    rows.reserve(ops.depth + 1);
    for (const auto& d : pyr.details) {
        if (d.size() != pyr.n) throw std::invalid_argument("reconstruct: malformed pyramid");
        rows.emplace_back(d);
    }
    rows.emplace_back(pyr.approx);

    std::vector<double> out(ops.n);
    reconstruct_from(rows, ops, filt, out);
    return out;
}

ClosedFormCounts closed_form_counts(std::size_t n, std::size_t levels) {
    const double nd = static_cast<double>(n);
    const double ld = static_cast<double>(levels);
    ClosedFormCounts c;
    c.rtbwt = nd * nd - 2.0 * nd - 0.5 * nd * (ld - 1.0) + 1.0;
    // L(2N^2 - 3N - 3L + 4)/3, kept in exact integer form as long as it fits
    const double numerator = 2.0 * nd * nd - 3.0 * nd - 3.0 * ld + 4.0;
    c.gtbwt = ld * numerator / 3.0;
    c.ratio = c.gtbwt / c.rtbwt;
    return c;
}

} // namespace rtbwt
