#pragma once

#include "offmoo/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace offmoo {

/// Output of non-dominated sorting. fronts[r] lists the indices of rank r in
/// ascending order; ranks[i] is the front index of point i.
struct FrontPartition {
    std::vector<std::size_t> ranks;
    std::vector<std::vector<std::size_t>> fronts;
};

/// HV reference point. Every coordinate should be at least the nadir of the
/// set it scores.
struct ReferencePoint {
    std::vector<double> values;
};

/// Per-objective min/max retained so normalized values can be mapped back.
struct NormStats {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    ObjectiveVector normalize(std::span<const double> y) const;
    ObjectiveVector denormalize(std::span<const double> y) const;
    PointSet normalize(const PointSet& ys) const;
    PointSet denormalize(const PointSet& ys) const;
};

/// a dominates b: no worse everywhere, strictly better somewhere. Raw
/// comparisons, no epsilon.
bool dominates(std::span<const double> a, std::span<const double> b);

FrontPartition non_dominated_sort(const PointSet& points);

/// NSGA-II crowding distance of every member of one front.
std::vector<double> crowding_distance(const PointSet& front);

/// Exact HV for m <= 4, Monte-Carlo (default budget, fixed seed) above.
double hypervolume(const PointSet& points, const ReferencePoint& ref);

/// Monte-Carlo HV estimate: uniform samples in the box spanned by the
/// componentwise minimum of the contributing points and ref.
double hypervolume_mc(const PointSet& points, const ReferencePoint& ref, std::uint64_t samples,
                      std::uint64_t seed);

inline constexpr std::uint64_t kDefaultHvSamples = 1'000'000;

double igd(const PointSet& approx, const PointSet& true_front);

/// Per dimension r = z_min + scale * (z_max - z_min); constant dimensions get
/// r = z_min + scale.
ReferencePoint nadir_reference(const PointSet& objectives, double scale = 1.1);

NormStats fit_norm_stats(const PointSet& objectives);

struct Normalized {
    PointSet values;
    NormStats stats;
};

/// Min-max normalization per objective; constant dimensions map to 0.
Normalized normalize_objectives(const PointSet& objectives);

/// Full NSGA-II ordering: rank ascending, crowding descending, index
/// ascending.
std::vector<std::size_t> nsga2_order(const PointSet& points);

/// The first n entries of nsga2_order.
std::vector<std::size_t> nsga2_select(const PointSet& points, std::size_t n);

/// Number of points removed when keeping the P-th percentile of N points:
/// floor((1 - P/100) * N).
std::size_t percentile_removed_count(std::size_t n, double percentile);

/// Drops the best floor((1 - P/100) * N) points in nsga2_order and returns the
/// remaining indices in ascending order.
std::vector<std::size_t> percentile_filter(const PointSet& points, double percentile);

PointSet gather(const PointSet& points, std::span<const std::size_t> idx);

}  // namespace offmoo
