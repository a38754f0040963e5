#include "offmoo/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace offmoo {

namespace {

void check_uniform(const PointSet& points, const char* what) {
    if (points.empty()) throw EmptyInputError(std::string(what) + ": empty input");
    const std::size_t m = points.front().size();
    for (const auto& p : points) {
        if (p.size() != m) throw DimensionError(std::string(what) + ": inconsistent dimensions");
    }
}

}  // namespace

ObjectiveVector NormStats::normalize(std::span<const double> y) const {
    if (y.size() != lo.size()) throw DimensionError("normalize: dimension mismatch");
    ObjectiveVector out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double range = hi[i] - lo[i];
        out[i] = range > 0.0 ? (y[i] - lo[i]) / range : 0.0;
    }
    return out;
}

ObjectiveVector NormStats::denormalize(std::span<const double> y) const {
    if (y.size() != lo.size()) throw DimensionError("denormalize: dimension mismatch");
    ObjectiveVector out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double range = hi[i] - lo[i];
        out[i] = range > 0.0 ? lo[i] + y[i] * range : lo[i];
    }
    return out;
}

PointSet NormStats::normalize(const PointSet& ys) const {
    PointSet out;
    out.reserve(ys.size());
    for (const auto& y : ys) out.push_back(normalize(y));
    return out;
}

PointSet NormStats::denormalize(const PointSet& ys) const {
    PointSet out;
    out.reserve(ys.size());
    for (const auto& y : ys) out.push_back(denormalize(y));
    return out;
}

bool dominates(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dominates: length mismatch");
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly = true;
    }
    return strictly;
}

// Efficient non-dominated sort with binary search over fronts (ENS-BS).
// After a lexicographic sort only earlier points can dominate a later one, and
// "front k holds a dominator of p" is monotone in k, so the target front can
// be found by bisection.
FrontPartition non_dominated_sort(const PointSet& points) {
    check_uniform(points, "non_dominated_sort");
    const std::size_t n = points.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a] != points[b]) return points[a] < points[b];
        return a < b;
    });

    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> ranks(n, 0);

    auto front_dominates = [&](const std::vector<std::size_t>& front, std::size_t p) {
        // Recently added members are the most likely dominators.
        for (auto it = front.rbegin(); it != front.rend(); ++it) {
            if (dominates(points[*it], points[p])) return true;
        }
        return false;
    };

    for (std::size_t p : order) {
        std::size_t lo = 0;
        std::size_t hi = fronts.size();
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (front_dominates(fronts[mid], p)) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if (lo == fronts.size()) fronts.emplace_back();
        fronts[lo].push_back(p);
        ranks[p] = lo;
    }

    for (auto& f : fronts) std::sort(f.begin(), f.end());
    return FrontPartition{std::move(ranks), std::move(fronts)};
}

std::vector<double> crowding_distance(const PointSet& front) {
    const std::size_t n = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (n == 0) return {};
    if (n <= 2) return std::vector<double>(n, inf);
    check_uniform(front, "crowding_distance");

    const std::size_t m = front.front().size();
    std::vector<double> dist(n, 0.0);
    std::vector<std::size_t> order(n);
    for (std::size_t obj = 0; obj < m; ++obj) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return front[a][obj] < front[b][obj];
        });
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        const double range = front[order.back()][obj] - front[order.front()][obj];
        if (range <= 0.0) continue;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            const std::size_t i = order[k];
            if (std::isinf(dist[i])) continue;
            dist[i] += (front[order[k + 1]][obj] - front[order[k - 1]][obj]) / range;
        }
    }
    return dist;
}

double igd(const PointSet& approx, const PointSet& true_front) {
    if (approx.empty() || true_front.empty()) throw EmptyInputError("igd: empty set");
    double total = 0.0;
    for (const auto& t : true_front) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : approx) {
            if (a.size() != t.size()) throw DimensionError("igd: dimension mismatch");
            double d2 = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double d = a[i] - t[i];
                d2 += d * d;
            }
            best = std::min(best, d2);
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(true_front.size());
}

NormStats fit_norm_stats(const PointSet& objectives) {
    check_uniform(objectives, "fit_norm_stats");
    const std::size_t m = objectives.front().size();
    NormStats stats{objectives.front(), objectives.front()};
    for (const auto& y : objectives) {
        for (std::size_t i = 0; i < m; ++i) {
            stats.lo[i] = std::min(stats.lo[i], y[i]);
            stats.hi[i] = std::max(stats.hi[i], y[i]);
        }
    }
    return stats;
}

ReferencePoint nadir_reference(const PointSet& objectives, double scale) {
    const NormStats stats = fit_norm_stats(objectives);
    ReferencePoint ref;
    ref.values.resize(stats.dim());
    for (std::size_t i = 0; i < stats.dim(); ++i) {
        const double range = stats.hi[i] - stats.lo[i];
        ref.values[i] = range > 0.0 ? stats.lo[i] + scale * range : stats.lo[i] + scale;
    }
    return ref;
}

Normalized normalize_objectives(const PointSet& objectives) {
    NormStats stats = fit_norm_stats(objectives);
    PointSet values = stats.normalize(objectives);
    return Normalized{std::move(values), std::move(stats)};
}

std::vector<std::size_t> nsga2_order(const PointSet& points) {
    if (points.empty()) return {};
    const FrontPartition part = non_dominated_sort(points);
    std::vector<std::size_t> order;
    order.reserve(points.size());
    for (const auto& front : part.fronts) {
        const std::vector<double> cd = crowding_distance(gather(points, front));
        std::vector<std::size_t> pos(front.size());
        std::iota(pos.begin(), pos.end(), std::size_t{0});
        std::sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
            if (cd[a] != cd[b]) return cd[a] > cd[b];
            return front[a] < front[b];
        });
        for (std::size_t k : pos) order.push_back(front[k]);
    }
    return order;
}

std::vector<std::size_t> nsga2_select(const PointSet& points, std::size_t n) {
    if (n > points.size()) {
        throw SizeError("nsga2_select: requested " + std::to_string(n) + " of " +
                        std::to_string(points.size()) + " points");
    }
    std::vector<std::size_t> order = nsga2_order(points);
    order.resize(n);
    return order;
}

std::size_t percentile_removed_count(std::size_t n, double percentile) {
    if (!(percentile > 0.0 && percentile <= 100.0)) {
        throw ConfigError("percentile must lie in (0, 100]");
    }
    // The tolerance absorbs representation error such as (100 - 70) * 10 / 100.
    const long double exact = (100.0L - percentile) * static_cast<long double>(n) / 100.0L;
    const auto removed = static_cast<std::size_t>(std::floor(exact + 1e-9L));
    return std::min(removed, n);
}

std::vector<std::size_t> percentile_filter(const PointSet& points, double percentile) {
    if (points.empty()) throw EmptyInputError("percentile_filter: empty input");
    const std::size_t removed = percentile_removed_count(points.size(), percentile);
    std::vector<std::size_t> order = nsga2_order(points);
    std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(removed), order.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

PointSet gather(const PointSet& points, std::span<const std::size_t> idx) {
    PointSet out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(points.at(i));
    return out;
}

}  // namespace offmoo
