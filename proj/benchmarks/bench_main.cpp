#include "offmoo/gp.hpp"
#include "offmoo/nn.hpp"
#include "offmoo/pareto.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace offmoo;

PointSet random_points(std::size_t n, std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    PointSet pts(n, ObjectiveVector(m));
    for (auto& p : pts) {
        for (double& v : p) v = rng.uniform();
    }
    return pts;
}

// Points on the simplex-like front x1 + ... + xm = 1, so every point is
// non-dominated and contributes to the hypervolume.
PointSet front_points(std::size_t n, std::size_t m, std::uint64_t seed) {
    PointSet pts = random_points(n, m, seed);
    for (auto& p : pts) {
        double s = 0.0;
        for (double v : p) s += v;
        for (double& v : p) v /= s;
    }
    return pts;
}

void BM_NonDominatedSort(benchmark::State& state) {
    const PointSet pts = random_points(static_cast<std::size_t>(state.range(0)), 3, 1);
    for (auto _ : state) benchmark::DoNotOptimize(non_dominated_sort(pts));
}
BENCHMARK(BM_NonDominatedSort)->Arg(1000)->Arg(10000);

void BM_Hypervolume(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(1));
    const PointSet pts = front_points(static_cast<std::size_t>(state.range(0)), m, 2);
    const ReferencePoint ref{std::vector<double>(m, 1.1)};
    for (auto _ : state) benchmark::DoNotOptimize(hypervolume(pts, ref));
}
BENCHMARK(BM_Hypervolume)->Args({256, 2})->Args({256, 3})->Args({100, 4});

void BM_Nsga2Order(benchmark::State& state) {
    const PointSet pts = random_points(static_cast<std::size_t>(state.range(0)), 2, 3);
    for (auto _ : state) benchmark::DoNotOptimize(nsga2_order(pts));
}
BENCHMARK(BM_Nsga2Order)->Arg(10000);

void BM_MlpForward(benchmark::State& state) {
    MlpSurrogate model(ModelKind::multiple, 30, static_cast<std::size_t>(state.range(0)), 2);
    Rng rng(4);
    model.initialize(rng);
    std::vector<Genotype> xs(256, Genotype(30));
    for (auto& x : xs) {
        for (double& v : x) v = rng.uniform();
    }
    for (auto _ : state) benchmark::DoNotOptimize(model.forward_batch(xs));
}
BENCHMARK(BM_MlpForward)->Arg(64)->Arg(256);

void BM_MlpBackward(benchmark::State& state) {
    MlpSurrogate model(ModelKind::multi_head, 30, 64, 3);
    Rng rng(5);
    model.initialize(rng);
    std::vector<Genotype> xs(32, Genotype(30));
    PointSet ys(32, ObjectiveVector(3));
    for (auto& x : xs) {
        for (double& v : x) v = rng.uniform();
    }
    for (auto& y : ys) {
        for (double& v : y) v = rng.uniform();
    }
    for (auto _ : state) benchmark::DoNotOptimize(backward(model, xs, ys));
}
BENCHMARK(BM_MlpBackward);

void BM_GpPredict(benchmark::State& state) {
    Rng rng(6);
    std::vector<Genotype> xs(100, Genotype(10));
    std::vector<double> ys(100);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (double& v : xs[i]) v = rng.uniform();
        ys[i] = rng.uniform();
    }
    const GpModel gp(xs, ys, KernelParams{KernelKind::rbf, 1.0, 1.0, 1e-4, 1.0});
    const Genotype x(10, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(gp.predict(x));
}
BENCHMARK(BM_GpPredict);

}  // namespace

BENCHMARK_MAIN();
