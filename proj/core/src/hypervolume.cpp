#include "offmoo/pareto.hpp"

#include <algorithm>
#include <numeric>

namespace offmoo {

namespace {

constexpr std::uint64_t kFallbackSeed = 0x5eedf00dULL;

// Points strictly inside the reference box; everything else adds no volume.
PointSet inside_box(const PointSet& points, const std::vector<double>& ref) {
    PointSet out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (p.size() != ref.size()) throw DimensionError("hypervolume: dimension mismatch");
        bool inside = true;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!(p[i] < ref[i])) {
                inside = false;
                break;
            }
        }
        if (inside) out.push_back(p);
    }
    return out;
}

double hv2d(PointSet pts, double r0, double r1) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        if (a[0] != b[0]) return a[0] < b[0];
        return a[1] < b[1];
    });
    double volume = 0.0;
    double floor1 = r1;
    for (const auto& p : pts) {
        if (p[1] < floor1) {
            volume += (r0 - p[0]) * (floor1 - p[1]);
            floor1 = p[1];
        }
    }
    return volume;
}

// Drops points weakly dominated by another (duplicates keep one copy).
PointSet nondominated_only(const PointSet& pts) {
    PointSet sorted = pts;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    PointSet out;
    out.reserve(sorted.size());
    for (const auto& p : sorted) {
        bool dominated = false;
        for (const auto& q : out) {
            if (dominates(q, p)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) out.push_back(p);
    }
    return out;
}

// Slices along the last objective; each slab is the (m-1)-dimensional HV of
// the points already swept, times the slab depth.
double hv_slicing(const PointSet& pts, const std::vector<double>& ref) {
    const std::size_t m = ref.size();
    if (pts.empty()) return 0.0;
    if (m == 1) {
        double best = ref[0];
        for (const auto& p : pts) best = std::min(best, p[0]);
        return ref[0] - best;
    }
    if (m == 2) return hv2d(pts, ref[0], ref[1]);

    const std::size_t last = m - 1;
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a][last] != pts[b][last]) return pts[a][last] < pts[b][last];
        return pts[a] < pts[b];
    });

    std::vector<double> sub_ref(ref.begin(), ref.end() - 1);
    PointSet projected;
    projected.reserve(pts.size());
    double volume = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& p = pts[order[k]];
        projected.emplace_back(p.begin(), p.end() - 1);
        const double upper = k + 1 < order.size() ? pts[order[k + 1]][last] : ref[last];
        const double depth = upper - p[last];
        if (depth <= 0.0) continue;
        projected = nondominated_only(projected);
        volume += depth * hv_slicing(projected, sub_ref);
    }
    return volume;
}

}  // namespace

double hypervolume(const PointSet& points, const ReferencePoint& ref) {
    const std::size_t m = ref.values.size();
    if (m == 0) throw DimensionError("hypervolume: empty reference point");
    PointSet pts = inside_box(points, ref.values);
    if (pts.empty()) return 0.0;
    if (m > 4) return hypervolume_mc(pts, ref, kDefaultHvSamples, kFallbackSeed);
    return hv_slicing(nondominated_only(pts), ref.values);
}

double hypervolume_mc(const PointSet& points, const ReferencePoint& ref, std::uint64_t samples,
                      std::uint64_t seed) {
    if (samples == 0) throw ConfigError("hypervolume_mc: samples must be positive");
    const std::vector<double>& r = ref.values;
    const PointSet pts = inside_box(points, r);
    if (pts.empty()) return 0.0;

    const std::size_t m = r.size();
    std::vector<double> lower = pts.front();
    for (const auto& p : pts) {
        for (std::size_t i = 0; i < m; ++i) lower[i] = std::min(lower[i], p[i]);
    }
    double box = 1.0;
    for (std::size_t i = 0; i < m; ++i) box *= r[i] - lower[i];

    Rng rng(seed);
    std::vector<double> s(m);
    std::uint64_t hits = 0;
    for (std::uint64_t k = 0; k < samples; ++k) {
        for (std::size_t i = 0; i < m; ++i) s[i] = rng.uniform(lower[i], r[i]);
        for (const auto& p : pts) {
            bool covers = true;
            for (std::size_t i = 0; i < m; ++i) {
                if (p[i] > s[i]) {
                    covers = false;
                    break;
                }
            }
            if (covers) {
                ++hits;
                break;
            }
        }
    }
    return box * static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace offmoo
