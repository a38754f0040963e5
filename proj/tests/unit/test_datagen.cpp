#include "offmoo/datagen.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace offmoo;

TEST_CASE("amateur survival") {
    Rng rng(51);
    PointSet pool(40, ObjectiveVector(2));
    for (auto& p : pool) p = {rng.uniform(), rng.uniform()};
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng r(s);
        CHECK(amateur_survival(pool, 20, 1.0, r) == nsga2_select(pool, 20));
    }
    for (double p : {0.0, 0.3, 0.9}) {
        const auto out = amateur_survival(pool, 20, p, rng);
        CHECK(out.size() == 20);
        CHECK(std::set<std::size_t>(out.begin(), out.end()).size() == 20);
    }

    // Half of the pool sits on the front, half is strictly dominated by it.
    const std::size_t mu = 20;
    PointSet split;
    for (std::size_t i = 0; i < mu; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(mu - 1);
        split.push_back({t, 1.0 - t});
    }
    for (std::size_t i = 0; i < mu; ++i) split.push_back({split[i][0] + 2.0, split[i][1] + 2.0});
    const int trials = 2000;
    double dominated = 0.0;
    for (int t = 0; t < trials; ++t) {
        for (std::size_t i : amateur_survival(split, mu, 0.0, rng)) dominated += i >= mu ? 1.0 : 0.0;
    }
    // Each survivor slot is dominated with probability 1/2; hypergeometric
    // variance is below the binomial one, so a binomial 3 sigma bound holds.
    const double n = static_cast<double>(trials) * static_cast<double>(mu);
    CHECK(std::abs(dominated - n / 2.0) <= 3.0 * std::sqrt(n * 0.25));
}

TEST_CASE("collection with G=0 is the evaluated initial population") {
    const Problem zdt1(task_by_name("zdt1"));
    CollectionConfig cfg;
    cfg.algorithms = {Algorithm::nsga2};
    cfg.runs = 1;
    cfg.generations = 0;
    cfg.pop_size = 30;
    cfg.seed = 5;
    const OfflineDataset ds = collect_dataset(zdt1, cfg);
    Rng rng(ds.provenance.run_seeds.at(0));
    const Population init = random_population(zdt1, 30, rng);
    CHECK(ds.x == init.members);
    CHECK(ds.y_raw == init.objectives);
}

TEST_CASE("default ZDT1 collection") {
    const Problem zdt1(task_by_name("zdt1"));
    CollectionConfig cfg;
    cfg.seed = 1000;
    const OfflineDataset ds = collect_dataset(zdt1, cfg);
    CHECK(ds.size() >= 10000);
    CHECK_NOTHROW(ds.validate());

    std::set<Genotype> unique(ds.x.begin(), ds.x.end());
    CHECK(unique.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); i += 97) CHECK(zdt1.evaluate(ds.x[i]) == ds.y_raw[i]);

    const auto ranks = non_dominated_sort(ds.y_raw).ranks;
    CHECK(std::any_of(ranks.begin(), ranks.end(), [](std::size_t r) { return r > 0; }));

    const auto ref = ds.eval_stats.normalize(ds.reference.values);
    for (double v : ref) CHECK(std::abs(v - 1.1) < 1e-12);

    CHECK(ds.provenance.algorithms == std::vector<std::string>{"nsga2", "moead", "nsga3"});
    CHECK(ds.provenance.run_seeds.size() == 12);
}

TEST_CASE("collection is reproducible and max_size subsamples") {
    const Problem vl(task_by_name("vlmop2"));
    CollectionConfig cfg;
    cfg.runs = 1;
    cfg.pop_size = 20;
    cfg.generations = 5;
    cfg.seed = 9;
    const OfflineDataset a = collect_dataset(vl, cfg);
    const OfflineDataset b = collect_dataset(vl, cfg);
    CHECK(a.x == b.x);
    CHECK(a.y_raw == b.y_raw);

    cfg.max_size = 50;
    const OfflineDataset small = collect_dataset(vl, cfg);
    CHECK(small.size() == 50);
    std::set<Genotype> full(a.x.begin(), a.x.end());
    for (const auto& x : small.x) CHECK(full.count(x) == 1);

    std::vector<std::string> warnings;
    cfg.max_size = 100000;
    const OfflineDataset big = collect_dataset(vl, cfg, &warnings);
    CHECK(big.size() == a.size());
    CHECK(warnings.size() == 1);

    cfg.amateur_p = 1.5;
    CHECK_THROWS_AS(collect_dataset(vl, cfg), ConfigError);
}

TEST_CASE("training set construction") {
    const Problem zdt1(task_by_name("zdt1"));
    const OfflineDataset big = fixture::random_dataset(zdt1, 60000, 3);
    CHECK(build_training_set(big, 40).size() == 36000);

    const OfflineDataset ds = fixture::random_dataset(zdt1, 1000, 4);
    const OfflineDataset same = build_training_set(ds, 0);
    CHECK(same.x == ds.x);
    CHECK(same.y_raw == ds.y_raw);

    const OfflineDataset train = build_training_set(ds, 40);
    CHECK(train.size() == 600);
    CHECK(d_best(train).hv <= d_best(ds).hv);
    const auto order = nsga2_order(ds.y_raw);
    std::set<Genotype> kept(train.x.begin(), train.x.end());
    for (std::size_t i = 0; i < 400; ++i) CHECK(kept.count(ds.x[order[i]]) == 0);
    CHECK(train.eval_stats.lo == ds.eval_stats.lo);
    for (const auto& y : train.y_norm) {
        for (double v : y) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK_THROWS_AS(build_training_set(ds, 100), ConfigError);
}

TEST_CASE("D(best)") {
    const Problem zdt1(task_by_name("zdt1"));
    const OfflineDataset one = fixture::random_dataset(zdt1, 1, 5);
    const BestSet b1 = d_best(one);
    CHECK(b1.indices == std::vector<std::size_t>{0});

    const OfflineDataset ds = fixture::random_dataset(zdt1, 500, 6);
    const BestSet b = d_best(ds);
    CHECK(b.indices.size() == 256);
    CHECK(b.hv == hypervolume(ds.eval_stats.normalize(gather(ds.y_raw, b.indices)), ReferencePoint{{1.1, 1.1}}));
    const BestSet all = d_best(ds, 1000);
    CHECK(all.indices == nsga2_order(ds.y_raw));
}

TEST_CASE("dataset files round-trip") {
    const Problem kp(task_by_name("mo_kp_50"), generate_instance(InstanceKind::kp, 50, 7));
    CollectionConfig cfg;
    cfg.runs = 1;
    cfg.pop_size = 10;
    cfg.generations = 3;
    cfg.seed = 11;
    const OfflineDataset ds = collect_dataset(kp, cfg);
    const auto d1 = fixture::scratch_dir("ds1");
    const auto d2 = fixture::scratch_dir("ds2");
    save_dataset(ds, d1);
    const OfflineDataset back = load_dataset(d1);
    CHECK(back.x == ds.x);
    CHECK(back.y_raw == ds.y_raw);
    CHECK(back.stats.lo == ds.stats.lo);
    CHECK(back.eval_stats.hi == ds.eval_stats.hi);
    CHECK(back.reference.values == ds.reference.values);
    REQUIRE(back.instance.has_value());
    CHECK(instance_to_json(*back.instance) == instance_to_json(*ds.instance));
    save_dataset(back, d2);
    CHECK(fixture::read_file(d1 / "meta.json") == fixture::read_file(d2 / "meta.json"));
    CHECK(fixture::read_file(d1 / "data.csv") == fixture::read_file(d2 / "data.csv"));
    CHECK_THROWS(load_dataset(d1 / "missing"));
}
