#include "offmoo/moea.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace offmoo;

namespace {

bool mutually_non_dominated(const PointSet& pts) {
    for (const auto& a : pts) {
        for (const auto& b : pts) {
            if (dominates(a, b)) return false;
        }
    }
    return true;
}

PointSet first_front(const Population& pop) {
    PointSet out;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (pop.ranks[i] == 0) out.push_back(pop.objectives[i]);
    }
    return out;
}

double normalized_hv(const PointSet& pts, const NormStats& stats) {
    return hypervolume(stats.normalize(pts), ReferencePoint{std::vector<double>(stats.dim(), 1.1)});
}

}  // namespace

TEST_CASE("SBX and polynomial mutation identities") {
    CHECK(sbx_beta(0.5, 15.0) == doctest::Approx(1.0));
    const auto [c1, c2] = sbx_gene(0.2, 0.7, 0.5, 15.0);
    CHECK(std::min(c1, c2) == doctest::Approx(0.2));
    CHECK(std::max(c1, c2) == doctest::Approx(0.7));
    CHECK(pm_delta(0.5, 20.0) == doctest::Approx(0.0));

    const SearchSpace box = SearchSpace::box(std::vector<double>(5, 0.0), std::vector<double>(5, 1.0));
    OperatorConfig cfg;
    Rng rng(31);
    const Genotype p{0.1, 0.2, 0.3, 0.4, 0.5};
    const auto [a, b] = sbx_crossover(p, p, box, cfg, rng);
    CHECK(a == p);
    CHECK(b == p);
    cfg.pm_prob = 0.0;
    CHECK(pm_mutation(p, box, cfg, rng) == p);

    cfg.pm_prob = 1.0;
    for (int t = 0; t < 500; ++t) {
        Genotype x(5);
        for (double& v : x) v = rng.uniform();
        Genotype y(5);
        for (double& v : y) v = rng.uniform();
        const auto [u, w] = sbx_crossover(x, y, box, cfg, rng);
        for (const auto& g : {u, w, pm_mutation(x, box, cfg, rng)}) {
            for (double v : g) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}

TEST_CASE("permutation operators keep permutations valid") {
    const Genotype p{0, 1, 2, 3, 4, 5};
    CHECK(order_crossover(p, p, 1, 3) == p);
    const Genotype q{5, 4, 3, 2, 1, 0};
    const Genotype child = order_crossover(p, q, 1, 3);
    CHECK(child[1] == 1);
    CHECK(child[2] == 2);
    CHECK(child[3] == 3);
    CHECK(is_permutation(child));
    CHECK(inversion_mutation(p, 1, 4) == Genotype{0, 4, 3, 2, 1, 5});

    Rng rng(32);
    Genotype a(12), b(12);
    std::iota(a.begin(), a.end(), 0.0);
    std::iota(b.begin(), b.end(), 0.0);
    for (int t = 0; t < 10000; ++t) {
        rng.shuffle(a);
        rng.shuffle(b);
        const Genotype c = order_crossover(a, b, rng);
        REQUIRE(is_permutation(c));
        REQUIRE(is_permutation(inversion_mutation(c, rng)));
    }
}

TEST_CASE("decomposition helpers") {
    const PointSet w = moead_weights(2, 3);
    REQUIRE(w.size() == 3);
    std::set<std::vector<double>> got(w.begin(), w.end());
    CHECK(got == std::set<std::vector<double>>{{0, 1}, {0.5, 0.5}, {1, 0}});
    CHECK(das_dennis_count(3, 12) == 91);
    CHECK(das_dennis(3, 12).size() == 91);
    for (const auto& d : das_dennis(4, 5)) CHECK(std::accumulate(d.begin(), d.end(), 0.0) == doctest::Approx(1.0));
    CHECK(reference_directions(3, 92).size() >= 92);
    CHECK(moead_weights(3, 100).size() == 100);
    CHECK(moead_weights(2, 100).size() == 100);

    const std::vector<double> ideal{0.3, 0.7};
    Rng rng(33);
    for (int t = 0; t < 10; ++t) {
        const std::vector<double> wt{rng.uniform(), rng.uniform()};
        CHECK(tchebycheff(ideal, wt, ideal) == 0.0);
    }
}

TEST_CASE("NSGA-III association is an argmin over directions") {
    Rng rng(34);
    const PointSet dirs = das_dennis(3, 4);
    PointSet pts(40, ObjectiveVector(3));
    for (auto& p : pts) {
        for (double& v : p) v = rng.uniform();
    }
    const Association a = associate(pts, dirs);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (const auto& d : dirs) {
            double dot = 0, nn = 0;
            for (std::size_t k = 0; k < 3; ++k) {
                dot += pts[i][k] * d[k];
                nn += d[k] * d[k];
            }
            double perp = 0;
            for (std::size_t k = 0; k < 3; ++k) perp += std::pow(pts[i][k] - dot / nn * d[k], 2);
            CHECK(a.distance[i] <= std::sqrt(perp) + 1e-12);
        }
    }
    const auto sel = nsga3_survival(pts, 15, dirs, rng);
    CHECK(sel.size() == 15);
    CHECK(std::set<std::size_t>(sel.begin(), sel.end()).size() == 15);
}

TEST_CASE("G=0 returns the initial population unchanged") {
    const Problem zdt1(task_by_name("zdt1"));
    Rng rng(35);
    const Population init = random_population(zdt1, 20, rng);
    const MoeaProblem mp = make_moea_problem(zdt1);
    for (auto algo : {Algorithm::nsga2, Algorithm::moead, Algorithm::nsga3}) {
        const Population out = run_algorithm(algo, mp, init, 0, rng);
        CHECK(out.members == init.members);
        CHECK(out.objectives == init.objectives);
    }
}

TEST_CASE("every algorithm improves on random initialization on ZDT1") {
    const Problem zdt1(task_by_name("zdt1"));
    const MoeaProblem mp = make_moea_problem(zdt1);
    for (auto algo : {Algorithm::nsga2, Algorithm::moead, Algorithm::nsga3}) {
        Rng rng(36);
        const Population init = random_population(zdt1, 100, rng);
        std::size_t gens_seen = 0;
        RunHooks hooks;
        hooks.observer = [&](std::size_t, const Population& pop) {
            ++gens_seen;
            CHECK(pop.size() == 100);
            for (const auto& x : pop.members) CHECK_NOTHROW(zdt1.validate(x));
        };
        const Population out = run_algorithm(algo, mp, init, 50, rng, hooks);
        CHECK(gens_seen == 50);
        CHECK(mutually_non_dominated(first_front(out)));
        PointSet both = init.objectives;
        both.insert(both.end(), out.objectives.begin(), out.objectives.end());
        const NormStats stats = fit_norm_stats(both);
        CHECK(normalized_hv(first_front(out), stats) > normalized_hv(first_front(init), stats));
    }
}

TEST_CASE("NSGA-II keeps the best set's hypervolume non-decreasing") {
    const Problem zdt1(task_by_name("zdt1"));
    Rng rng(37);
    const Population init = random_population(zdt1, 40, rng);
    const ReferencePoint ref{{1.1, 10.0}};  // covers ZDT1's objective range
    double last = hypervolume(init.objectives, ref);
    RunHooks hooks;
    hooks.observer = [&](std::size_t, const Population& pop) {
        const double hv = hypervolume(pop.objectives, ref);
        CHECK(hv >= last - 1e-12);
        last = hv;
    };
    nsga2_run(make_moea_problem(zdt1), init, 30, rng, hooks);
}

TEST_CASE("MOEA/D subproblem values never get worse") {
    const Problem zdt1(task_by_name("zdt1"));
    Rng rng(38);
    const Population init = random_population(zdt1, 30, rng);
    // Track the running ideal over every evaluated point, as the algorithm does.
    std::vector<double> ideal = init.objectives.front();
    for (const auto& f : init.objectives) {
        for (std::size_t k = 0; k < 2; ++k) ideal[k] = std::min(ideal[k], f[k]);
    }
    MoeaProblem mp = make_moea_problem(zdt1, [&](const std::vector<Genotype>& xs) {
        PointSet ys = zdt1.evaluate_all(xs);
        for (const auto& f : ys) {
            for (std::size_t k = 0; k < 2; ++k) ideal[k] = std::min(ideal[k], f[k]);
        }
        return ys;
    });
    const PointSet weights = moead_weights(2, 30);
    PointSet prev = init.objectives;
    RunHooks hooks;
    hooks.observer = [&](std::size_t, const Population& pop) {
        for (std::size_t i = 0; i < pop.size(); ++i) {
            CHECK(tchebycheff(pop.objectives[i], weights[i], ideal) <=
                  tchebycheff(prev[i], weights[i], ideal) + 1e-15);
        }
        prev = pop.objectives;
    };
    moead_run(mp, init, 30, rng, hooks);
}

TEST_CASE("NSGA-III spreads DTLZ2 survivors over the reference directions") {
    const Problem dtlz2(task_by_name("dtlz2"));
    Rng rng(39);
    const Population init = random_population(dtlz2, 92, rng);
    const Population out = nsga3_run(make_moea_problem(dtlz2), init, 100, rng);
    const PointSet dirs = reference_directions(3, 92);
    const Association a = associate(nsga3_normalize(out.objectives), dirs);
    std::vector<double> counts(dirs.size(), 0.0);
    for (std::size_t d : a.direction) counts[d] += 1.0;
    const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(counts.size());
    double var = 0.0;
    for (double c : counts) var += (c - mean) * (c - mean);
    var /= static_cast<double>(counts.size());
    CHECK(std::sqrt(var) / mean < 1.0);
}

TEST_CASE("runs are deterministic and permutation tasks stay valid") {
    const Problem tsp(task_by_name("mo_tsp_20"), generate_instance(InstanceKind::tsp, 20, 5));
    const MoeaProblem mp = make_moea_problem(tsp);
    for (auto algo : {Algorithm::nsga2, Algorithm::moead, Algorithm::nsga3}) {
        auto run = [&] {
            Rng rng(40);
            Population init = random_population(tsp, 24, rng);
            return run_algorithm(algo, mp, init, 10, rng);
        };
        const Population a = run();
        const Population b = run();
        CHECK(a.members == b.members);
        for (const auto& x : a.members) {
            CHECK(is_permutation(x));
            CHECK(x[0] == 0.0);
        }
    }
    CHECK(algorithm_from_string("moead") == Algorithm::moead);
    CHECK_THROWS_AS(algorithm_from_string("spea2"), ConfigError);
}

TEST_CASE("survival policy hook is honoured") {
    const Problem zdt1(task_by_name("zdt1"));
    Rng rng(41);
    const Population init = random_population(zdt1, 10, rng);
    RunHooks hooks;
    std::size_t calls = 0;
    hooks.survival = [&](const PointSet& pool, std::size_t mu, Rng&) -> std::optional<std::vector<std::size_t>> {
        ++calls;
        CHECK(pool.size() == 2 * mu);
        std::vector<std::size_t> keep(mu);
        std::iota(keep.begin(), keep.end(), mu);  // always take the children
        return keep;
    };
    nsga2_run(make_moea_problem(zdt1), init, 5, rng, hooks);
    CHECK(calls == 5);
}
