#include "offmoo/report.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace offmoo;

TEST_CASE("descending ranks with shared ties") {
    CHECK(rank_descending({3.0, 2.0, 1.0}) == std::vector<double>{1, 2, 3});
    CHECK(rank_descending({1.0, 3.0, 2.0}) == std::vector<double>{3, 1, 2});
    CHECK(rank_descending({2.0, 2.0}) == std::vector<double>{1.5, 1.5});
    CHECK(rank_descending({5.0, 1.0, 5.0, 5.0}) == std::vector<double>{2, 4, 2, 2});
}

TEST_CASE("rank table matches a direct recomputation") {
    std::vector<RunRecord> recs;
    const std::vector<std::string> methods{"a", "b", "c"};
    const std::vector<std::string> tasks{"t1", "t2"};
    double v = 0.3;
    for (const auto& m : methods) {
        for (const auto& t : tasks) {
            for (std::uint64_t s : {1u, 2u, 3u}) {
                v = std::fmod(v * 7.31 + 0.17, 1.0);
                recs.push_back({m, t, s, v});
            }
        }
    }
    const RankTable table = build_rank_table(recs);
    CHECK(table.methods == methods);
    CHECK(table.tasks == tasks);

    std::map<std::pair<std::string, std::string>, std::vector<double>> by;
    for (const auto& r : recs) by[{r.method, r.task}].push_back(r.hv);
    std::map<std::string, double> avg;
    for (const auto& t : tasks) {
        std::map<std::string, double> mean;
        for (const auto& m : methods) {
            const auto& xs = by[{m, t}];
            double s = 0;
            for (double x : xs) s += x;
            mean[m] = s / static_cast<double>(xs.size());
            double ss = 0;
            for (double x : xs) ss += (x - mean[m]) * (x - mean[m]);
            CHECK(table.cells.at({m, t}).std == doctest::Approx(std::sqrt(ss / static_cast<double>(xs.size()))));
            CHECK(table.cells.at({m, t}).mean == doctest::Approx(mean[m]));
        }
        for (const auto& m : methods) {
            double rank = 1.0;
            for (const auto& o : methods) {
                if (o != m && mean[o] > mean[m]) rank += 1.0;
                if (o != m && mean[o] == mean[m]) rank += 0.5;
            }
            CHECK(table.task_ranks.at({m, t}) == rank);
            avg[m] += rank / static_cast<double>(tasks.size());
        }
    }
    for (const auto& m : methods) CHECK(table.average_rank.at(m) == doctest::Approx(avg[m]));

    const std::string csv = rank_table_csv(table);
    CHECK(csv.rfind("method,t1_mean,t1_std,t1_rank,t2_mean,t2_std,t2_rank,average_rank\n", 0) == 0);
    CHECK(rank_table_text(table).find("average rank") != std::string::npos);
}

TEST_CASE("rank table errors") {
    CHECK_THROWS_AS(build_rank_table({{"a", "t", 1, 1.0}}), ConfigError);
    try {
        build_rank_table({{"a", "t1", 1, 1.0}, {"b", "t2", 1, 1.0}});
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("a/t2") != std::string::npos);
        CHECK(msg.find("b/t1") != std::string::npos);
    }
}

TEST_CASE("scatter SVG") {
    const std::string svg = scatter_svg({{"m1", {{0, 1}, {1, 0}}}, {"m2", {{0.5, 0.5}}}}, "zdt1");
    CHECK(svg.rfind("<svg", 0) == 0);
    std::size_t circles = 0;
    for (std::size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++circles;
    CHECK(circles == 3);
    CHECK_THROWS_AS(scatter_svg({{"m", {{1.0}}}}, "x"), DimensionError);
}
