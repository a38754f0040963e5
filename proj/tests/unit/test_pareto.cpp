#include "offmoo/pareto.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace offmoo;

namespace {

PointSet random_points(Rng& rng, std::size_t n, std::size_t m) {
    PointSet pts(n, ObjectiveVector(m));
    for (auto& p : pts) {
        for (double& v : p) v = rng.uniform();
    }
    return pts;
}

}  // namespace

TEST_CASE("dominance basics") {
    CHECK(dominates(std::vector<double>{0, 0}, std::vector<double>{1, 1}));
    CHECK_FALSE(dominates(std::vector<double>{0, 1}, std::vector<double>{1, 0}));
    CHECK_FALSE(dominates(std::vector<double>{1, 1}, std::vector<double>{1, 1}));
    CHECK_THROWS_AS(dominates(std::vector<double>{1}, std::vector<double>{1, 2}), DimensionError);
}

TEST_CASE("dominance is a strict partial order on random triples") {
    Rng rng(11);
    for (int t = 0; t < 2000; ++t) {
        // Coarse grid values so ties and chains actually occur.
        auto draw = [&] {
            std::vector<double> v(3);
            for (double& x : v) x = static_cast<double>(rng.below(3));
            return v;
        };
        const auto a = draw(), b = draw(), c = draw();
        CHECK_FALSE(dominates(a, a));
        if (dominates(a, b)) CHECK_FALSE(dominates(b, a));
        if (dominates(a, b) && dominates(b, c)) CHECK(dominates(a, c));
    }
}

TEST_CASE("non-dominated sort small cases") {
    const FrontPartition p = non_dominated_sort({{0, 1}, {1, 0}, {2, 2}});
    REQUIRE(p.fronts.size() == 2);
    CHECK(p.fronts[0] == std::vector<std::size_t>{0, 1});
    CHECK(p.fronts[1] == std::vector<std::size_t>{2});
    CHECK(non_dominated_sort({{3, 4}}).ranks == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(non_dominated_sort({}), EmptyInputError);
}

TEST_CASE("non-dominated sort agrees with brute-force peeling") {
    Rng rng(12);
    for (int t = 0; t < 40; ++t) {
        const std::size_t m = 2 + rng.below(2);
        const std::size_t n = 1 + rng.below(300);
        PointSet pts = random_points(rng, n, m);
        if (t % 3 == 0) {
            for (auto& p : pts) {
                for (double& v : p) v = std::floor(v * 4.0);  // heavy ties
            }
        }
        const FrontPartition part = non_dominated_sort(pts);
        CHECK(part.ranks == oracle::peel_ranks(pts));
        std::size_t total = 0;
        for (const auto& f : part.fronts) {
            total += f.size();
            CHECK(std::is_sorted(f.begin(), f.end()));
        }
        CHECK(total == n);
    }
}

TEST_CASE("crowding distance") {
    const auto inf = std::numeric_limits<double>::infinity();
    CHECK(crowding_distance({{0, 1}, {1, 0}}) == std::vector<double>{inf, inf});
    CHECK(crowding_distance({{5, 5}}) == std::vector<double>{inf});
    const auto cd = crowding_distance({{0, 2}, {1, 1}, {2, 0}});
    CHECK(cd[1] == doctest::Approx(2.0));
    CHECK(cd[0] == inf);
    CHECK(cd[2] == inf);
    const auto same = crowding_distance({{1, 1}, {1, 1}, {1, 1}, {1, 1}});
    CHECK(std::count(same.begin(), same.end(), inf) >= 1);
    CHECK(std::count(same.begin(), same.end(), 0.0) >= 1);
}

TEST_CASE("hypervolume closed forms") {
    CHECK(hypervolume({{0, 0}}, {{1, 1}}) == doctest::Approx(1.0));
    CHECK(hypervolume({{0.5, 0.5}}, {{1.1, 1.1}}) == doctest::Approx(0.36));
    CHECK(hypervolume({}, {{1, 1}}) == 0.0);
    CHECK(hypervolume({{1, 0.5}, {2, 2}}, {{1, 1}}) == 0.0);  // on or outside the box
    CHECK(hypervolume({{0, 0, 0}}, {{1, 2, 3}}) == doctest::Approx(6.0));
    CHECK(hypervolume({{0, 0, 0, 0}}, {{1, 1, 1, 2}}) == doctest::Approx(2.0));
    // Two overlapping boxes in 2-D: 1*0.5 + 0.5*1 - 0.5*0.5
    CHECK(hypervolume({{0, 0.5}, {0.5, 0}}, {{1, 1}}) == doctest::Approx(0.75));
}

TEST_CASE("hypervolume matches Monte-Carlo oracle in 3-D and 4-D") {
    Rng rng(13);
    for (std::size_t m : {3u, 4u}) {
        const PointSet pts = random_points(rng, 10, m);
        const std::vector<double> ref(m, 1.1);
        const double exact = hypervolume(pts, ReferencePoint{ref});
        const double mc = oracle::mc_hypervolume(pts, ref, 400000, 7);
        CHECK(std::abs(exact - mc) / exact < 0.01);
    }
}

TEST_CASE("hypervolume monotonicity and invariances") {
    Rng rng(14);
    for (int t = 0; t < 20; ++t) {
        const std::size_t m = 2 + rng.below(2);
        PointSet pts = random_points(rng, 30, m);
        const ReferencePoint ref{std::vector<double>(m, 1.1)};
        const double hv = hypervolume(pts, ref);
        PointSet more = pts;
        more.push_back(random_points(rng, 1, m).front());
        CHECK(hypervolume(more, ref) >= hv - 1e-12);

        const FrontPartition part = non_dominated_sort(pts);
        if (part.fronts.size() > 1) {
            PointSet without;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (i != part.fronts[1].front()) without.push_back(pts[i]);
            }
            CHECK(hypervolume(without, ref) == doctest::Approx(hv).epsilon(1e-12));
        }
        PointSet shuffled = pts;
        rng.shuffle(shuffled);
        CHECK(hypervolume(shuffled, ref) == doctest::Approx(hv).epsilon(1e-12));
        PointSet rotated = pts;
        for (auto& p : rotated) std::rotate(p.begin(), p.begin() + 1, p.end());
        CHECK(hypervolume(rotated, ref) == doctest::Approx(hv).epsilon(1e-12));
    }
}

TEST_CASE("Monte-Carlo hypervolume") {
    CHECK(hypervolume_mc({}, {{1, 1}}, 1000, 1) == 0.0);
    const double v = hypervolume_mc({{0, 0}}, {{1, 1}}, 1000, 3);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(hypervolume_mc({{0.2, 0.3}}, {{1, 1}}, 100, 9) == hypervolume_mc({{0.2, 0.3}}, {{1, 1}}, 100, 9));

    Rng rng(15);
    for (int t = 0; t < 10; ++t) {
        const PointSet pts = random_points(rng, 20, 2);
        const ReferencePoint ref{{1.1, 1.1}};
        const double exact = hypervolume(pts, ref);
        const std::uint64_t n = 200000;
        const double est = hypervolume_mc(pts, ref, n, 100 + static_cast<std::uint64_t>(t));
        // Box volume times a binomial fraction; bound by 3 sigma.
        double lo0 = 1.0, lo1 = 1.0;
        for (const auto& p : pts) {
            lo0 = std::min(lo0, p[0]);
            lo1 = std::min(lo1, p[1]);
        }
        const double box = (1.1 - lo0) * (1.1 - lo1);
        const double frac = exact / box;
        const double sigma = box * std::sqrt(frac * (1 - frac) / static_cast<double>(n));
        CHECK(std::abs(est - exact) <= 3.0 * sigma + 1e-12);
    }
}

TEST_CASE("IGD") {
    const PointSet a{{0, 1}, {1, 0}};
    CHECK(igd(a, a) == 0.0);
    CHECK(igd({{1, 1}}, {{0, 0}}) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(igd({}, {{0, 0}}), EmptyInputError);
    Rng rng(16);
    for (int t = 0; t < 20; ++t) {
        const PointSet x = random_points(rng, 1 + rng.below(50), 3);
        const PointSet y = random_points(rng, 1 + rng.below(50), 3);
        CHECK(igd(x, y) == oracle::naive_igd(x, y));
    }
}

TEST_CASE("nadir reference and normalization") {
    const PointSet pts{{0, 5}, {10, 5}};
    const ReferencePoint r = nadir_reference(pts);
    CHECK(r.values[0] == doctest::Approx(11.0));
    CHECK(r.values[1] == doctest::Approx(6.1));
    CHECK(nadir_reference(pts, 1.0).values[0] == 10.0);

    Rng rng(17);
    PointSet data = random_points(rng, 50, 3);
    for (auto& p : data) p[1] = p[1] * 100 - 30;
    const Normalized n = normalize_objectives(data);
    for (std::size_t k = 0; k < 3; ++k) {
        double lo = 1, hi = 0;
        for (const auto& p : n.values) {
            lo = std::min(lo, p[k]);
            hi = std::max(hi, p[k]);
        }
        CHECK(lo == 0.0);
        CHECK(hi == doctest::Approx(1.0).epsilon(1e-15));
    }
    const PointSet back = n.stats.denormalize(n.values);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(back[i][k] - data[i][k]) <= 1e-12 * (1 + std::abs(data[i][k])));
    }
    const ObjectiveVector nr = n.stats.normalize(nadir_reference(data).values);
    for (double v : nr) CHECK(std::abs(v - 1.1) < 1e-12);
}

TEST_CASE("nsga2 selection ordering") {
    const PointSet pts{{0, 1}, {1, 0}, {2, 2}};
    auto s = nsga2_select(pts, 2);
    std::sort(s.begin(), s.end());
    CHECK(s == std::vector<std::size_t>{0, 1});
    CHECK_THROWS_AS(nsga2_select(pts, 4), SizeError);

    Rng rng(18);
    const PointSet pool = random_points(rng, 100, 2);
    const auto all = nsga2_select(pool, 100);
    auto sorted = all;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 100; ++i) CHECK(sorted[i] == i);

    const auto ranks = oracle::peel_ranks(pool);
    const auto chosen = nsga2_select(pool, 30);
    CHECK(std::equal(chosen.begin(), chosen.end(), all.begin()));  // prefix stability
    std::vector<char> in(100, 0);
    for (std::size_t i : chosen) in[i] = 1;
    // Crowding recomputed independently per front for the boundary rank.
    std::size_t worst = 0;
    for (std::size_t i : chosen) worst = std::max(worst, ranks[i]);
    PointSet boundary;
    std::vector<std::size_t> boundary_idx;
    for (std::size_t i = 0; i < 100; ++i) {
        if (ranks[i] == worst) {
            boundary.push_back(pool[i]);
            boundary_idx.push_back(i);
        }
    }
    const auto cd = crowding_distance(boundary);
    double min_in = INFINITY, max_out = -INFINITY;
    for (std::size_t k = 0; k < boundary_idx.size(); ++k) {
        if (in[boundary_idx[k]]) min_in = std::min(min_in, cd[k]);
        else max_out = std::max(max_out, cd[k]);
    }
    for (std::size_t j = 0; j < 100; ++j) {
        if (in[j]) continue;
        CHECK(ranks[j] >= worst);
    }
    CHECK(min_in >= max_out);
}

TEST_CASE("percentile filter") {
    Rng rng(19);
    const PointSet pts = random_points(rng, 256, 2);
    CHECK(percentile_filter(pts, 100).size() == 256);
    const auto half = percentile_filter(pts, 50);
    CHECK(half.size() == 128);
    const auto order = nsga2_order(pts);
    std::vector<char> removed(256, 0);
    for (std::size_t i = 0; i < 128; ++i) removed[order[i]] = 1;
    for (std::size_t i : half) CHECK_FALSE(removed[i]);
    CHECK(std::is_sorted(half.begin(), half.end()));
    CHECK(percentile_filter({{1, 1}}, 50).size() == 1);
    CHECK(percentile_removed_count(10, 70) == 3);
    CHECK(percentile_removed_count(3, 50) == 1);
    CHECK_THROWS_AS(percentile_removed_count(10, 0), ConfigError);
    CHECK_THROWS_AS(percentile_removed_count(10, 101), ConfigError);
}
