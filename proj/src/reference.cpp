#include "rtbwt/reference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rtbwt::reference {

Permutation nn_path(const PointSet& set, std::size_t start, DistanceMetric metric,
                    std::optional<int> window, DistanceCounter* counter) {
    const std::size_t n = set.size();
    if (n == 0) throw std::invalid_argument("nn_path: empty point set");
    if (start >= n) throw std::invalid_argument("nn_path: start index out of range");
    Permutation perm;
    const bool windowed = window.has_value() && *window > 0;
    if (windowed && !set.has_anchors())
        throw std::invalid_argument("nn_path: windowed search needs anchored points");
    const int radius = windowed ? *window / 2 : 0;

    std::vector<char> visited(n, 0);
    visited[start] = 1;
    perm.order.push_back(static_cast<std::uint32_t>(start));
    std::size_t current = start;

    for (std::size_t step = 1; step < n; ++step) {
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t best_idx = n;
        bool any = false;
        if (windowed) {
            const Anchor& a = set.anchor(current);
            for (std::size_t i = 0; i < n; ++i) {
                if (visited[i]) continue;
                const Anchor& b = set.anchor(i);
                if (std::abs(b.row - a.row) > radius || std::abs(b.col - a.col) > radius)
                    continue;
                const double d = distance(set.coords(i), set.coords(current), metric, counter);
                any = true;
                if (d < best_d || (d == best_d && i < best_idx)) {
                    best_d = d;
                    best_idx = i;
                }
            }
        }
        if (!windowed || !any) {
            best_d = std::numeric_limits<double>::infinity();
            best_idx = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (visited[i]) continue;
                const double d = distance(set.coords(i), set.coords(current), metric, counter);
                if (d < best_d || (d == best_d && i < best_idx)) {
                    best_d = d;
                    best_idx = i;
                }
            }
        }
        visited[best_idx] = 1;
        perm.order.push_back(static_cast<std::uint32_t>(best_idx));
        current = best_idx;
    }
    return perm;
}

} // namespace rtbwt::reference
