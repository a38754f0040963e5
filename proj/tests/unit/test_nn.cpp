#include "offmoo/nn.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace offmoo;

namespace {

std::vector<Genotype> random_inputs(Rng& rng, std::size_t n, std::size_t d) {
    std::vector<Genotype> xs(n, Genotype(d));
    for (auto& x : xs) {
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
    }
    return xs;
}

PointSet random_targets(Rng& rng, std::size_t n, std::size_t m) {
    PointSet ys(n, ObjectiveVector(m));
    for (auto& y : ys) {
        for (double& v : y) v = rng.uniform();
    }
    return ys;
}

// Affine + relu chain rebuilt with Eigen maps over the flat parameters.
Eigen::VectorXd eigen_chain(const std::vector<double>& p, const LayerChain& chain, Eigen::VectorXd h, bool relu_last) {
    for (std::size_t l = 0; l < chain.layers.size(); ++l) {
        const DenseLayer& L = chain.layers[l];
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(
            p.data() + L.w, static_cast<Eigen::Index>(L.out), static_cast<Eigen::Index>(L.in));
        Eigen::Map<const Eigen::VectorXd> b(p.data() + L.b, static_cast<Eigen::Index>(L.out));
        h = w * h + b;
        if (relu_last || l + 1 < chain.layers.size()) h = h.cwiseMax(0.0);
    }
    return h;
}

std::vector<double> eigen_forward(const MlpSurrogate& model, const Genotype& x) {
    Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    if (!model.trunk().layers.empty()) h = eigen_chain(model.params(), model.trunk(), h, true);
    std::vector<double> out;
    for (const auto& head : model.heads()) {
        const Eigen::VectorXd o = eigen_chain(model.params(), head, h, false);
        out.insert(out.end(), o.data(), o.data() + o.size());
    }
    return out;
}

double task_loss(const MlpSurrogate& model, const std::vector<Genotype>& xs, const PointSet& ys, std::size_t task) {
    double s = 0.0;
    for (std::size_t b = 0; b < xs.size(); ++b) {
        const double r = model.forward(xs[b])[task] - ys[b][task];
        s += r * r;
    }
    return s / static_cast<double>(xs.size());
}

// Worst relative disagreement between analytic and central-difference
// gradients over every parameter and task.
double fd_error(MlpSurrogate model, const std::vector<Genotype>& xs, const PointSet& ys) {
    const TaskGradients g = backward(model, xs, ys);
    constexpr double h = 1e-5;
    double worst = 0.0;
    for (std::size_t t = 0; t < model.outputs(); ++t) {
        for (std::size_t k = 0; k < model.param_count(); ++k) {
            const double keep = model.params()[k];
            model.params()[k] = keep + h;
            const double up = task_loss(model, xs, ys, t);
            model.params()[k] = keep - h;
            const double down = task_loss(model, xs, ys, t);
            model.params()[k] = keep;
            const double fd = (up - down) / (2 * h);
            const double a = g.grads[t][k];
            const double scale = std::max({std::abs(a), std::abs(fd), 1e-6});
            worst = std::max(worst, std::abs(a - fd) / scale);
        }
    }
    return worst;
}

OfflineDataset toy_dataset(std::size_t n, std::uint64_t seed) {
    return fixture::random_dataset(Problem(task_by_name("vlmop2")), n, seed);
}

}  // namespace

TEST_CASE("layouts") {
    const MlpSurrogate e(ModelKind::end_to_end, 5, 8, 3);
    CHECK(e.trunk().layers.empty());
    REQUIRE(e.heads().size() == 1);
    CHECK(e.heads()[0].layers.back().out == 3);
    CHECK(e.param_count() == (5 * 8 + 8) + (8 * 8 + 8) + (8 * 3 + 3));

    const MlpSurrogate mh(ModelKind::multi_head, 5, 8, 3);
    CHECK(mh.trunk().layers.size() == 2);
    CHECK(mh.heads().size() == 3);
    CHECK(mh.shared_layer().w == mh.trunk().layers.back().w);

    const MlpSurrogate mm(ModelKind::multiple, 5, 8, 3);
    CHECK(mm.heads().size() == 3);
    CHECK(mm.heads()[2].layers.size() == 3);
    CHECK(mm.task_location(2).first == 2);
    CHECK(model_kind_from_string("multi_head") == ModelKind::multi_head);
    CHECK_THROWS_AS(model_kind_from_string("wide"), ConfigError);
}

TEST_CASE("forward") {
    Rng rng(61);
    for (auto kind : {ModelKind::end_to_end, ModelKind::multi_head, ModelKind::multiple}) {
        MlpSurrogate model(kind, 4, 6, 2);
        const auto xs = random_inputs(rng, 10, 4);
        CHECK(model.forward(xs[0]) == ObjectiveVector{0.0, 0.0});
        model.initialize(rng);
        for (const auto& x : xs) {
            const auto got = model.forward(x);
            const auto want = eigen_forward(model, x);
            for (std::size_t k = 0; k < 2; ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
        }
        CHECK_THROWS_AS(model.forward(Genotype(3, 0.0)), DimensionError);
        const auto batched = model.forward_batch(xs)[3];
        const auto single = model.forward(xs[3]);
        for (std::size_t k = 0; k < 2; ++k) CHECK(batched[k] == doctest::Approx(single[k]).epsilon(1e-12));
    }
}

TEST_CASE("backward") {
    Rng rng(62);
    for (auto kind : {ModelKind::end_to_end, ModelKind::multi_head, ModelKind::multiple}) {
        MlpSurrogate model(kind, 5, 8, 3);
        // Random biases keep pre-activations off the relu kink.
        for (double& v : model.params()) v = rng.uniform(-1.0, 1.0);
        const auto xs = random_inputs(rng, 5, 5);
        CHECK(fd_error(model, xs, random_targets(rng, 5, 3)) < 1e-4);

        const TaskGradients zero = backward(model, xs, model.forward_batch(xs));
        for (const auto& g : zero.grads) {
            for (double v : g) CHECK(v == 0.0);
        }
        const PointSet ys = random_targets(rng, 5, 3);
        const TaskGradients tg = backward(model, xs, ys);
        CHECK(std::accumulate(tg.losses.begin(), tg.losses.end(), 0.0) ==
              doctest::Approx(total_loss(model, xs, ys)));
    }
}

TEST_CASE("adam") {
    std::vector<double> w{0.5, -2.0, 0.0};
    const std::vector<double> g{3.0, -0.1, 0.0};
    AdamState s;
    adam_step(w, g, s, 0.01);
    CHECK(w[0] == doctest::Approx(0.5 - 0.01).epsilon(1e-6));
    CHECK(w[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
    CHECK(w[2] == 0.0);

    std::vector<double> still{1.0, 2.0};
    AdamState z;
    for (int t = 0; t < 50; ++t) adam_step(still, std::vector<double>{0.0, 0.0}, z, 0.1);
    CHECK(still == std::vector<double>{1.0, 2.0});

    std::vector<double> bowl{1.0, -0.7, 0.3};
    AdamState b;
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> grad(3);
        for (std::size_t k = 0; k < 3; ++k) grad[k] = 2 * bowl[k];
        adam_step(bowl, grad, b, 0.1 * std::pow(0.99, t));
    }
    double loss = 0.0;
    for (double v : bowl) loss += v * v;
    CHECK(loss < 1e-6);
}

TEST_CASE("pcgrad") {
    Rng rng(63);
    const std::vector<double> a{1, 0}, b{0, 1};
    CHECK(pcgrad_combine({a, b}, rng) == std::vector<double>{1, 1});
    const std::vector<double> g{0.3, -1.2, 2.0};
    const std::vector<double> neg{-0.3, 1.2, -2.0};
    for (double v : pcgrad_combine({g, neg}, rng)) CHECK(v == 0.0);
    const auto c = pcgrad_combine({{1, 0}, {-1, 1}}, rng);
    CHECK(c[0] == doctest::Approx(0.5));
    CHECK(c[1] == doctest::Approx(1.5));
    const auto skip = pcgrad_combine({{1, 2}, {0, 0}}, rng);
    CHECK(skip == std::vector<double>{1, 2});
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> x(4), y(4);
        for (double& v : x) v = rng.normal();
        for (double& v : y) v = rng.normal();
        const auto out = pcgrad_combine({x, y}, rng);
        double dx = 0, dy = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            dx += out[k] * x[k];
            dy += out[k] * y[k];
        }
        CHECK(dx >= -1e-9);
        CHECK(dy >= -1e-9);
    }
}

TEST_CASE("gradnorm") {
    GradNormState s;
    s.weights = {1.0, 1.0};
    s.initial_losses = {0.5, 0.5};
    CHECK(gradnorm_update(s, std::vector<double>{2.0, 2.0}, std::vector<double>{0.4, 0.4}, 1.5, 0.01) ==
          std::vector<double>{1.0, 1.0});

    GradNormState t;
    t.weights = {1.0, 1.0};
    t.initial_losses = {1.0, 1.0};
    const auto w = gradnorm_update(t, std::vector<double>{1.0, 1.0}, std::vector<double>{0.2, 0.8}, 1.5, 0.01);
    CHECK(w[1] > 1.0);
    CHECK(w[0] + w[1] == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(gradnorm_weight_gradient(std::vector<double>{1, 1}, std::vector<double>{0, 1},
                                             std::vector<double>{1, 1}, std::vector<double>{1, 1}, 1.5),
                    NumericError);

    const OfflineDataset ds = toy_dataset(64, 64);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.hidden = 8;
    cfg.mtl = MtlKind::gradnorm;
    cfg.seed = 3;
    for (auto kind : {ModelKind::multi_head, ModelKind::end_to_end}) {
        const TrainResult r = train(kind, ds, cfg);
        REQUIRE(r.trace.gradnorm_weights.size() == 50);
        for (const auto& ws : r.trace.gradnorm_weights) {
            CHECK(ws[0] > 0.0);
            CHECK(ws[1] > 0.0);
            CHECK(std::abs(ws[0] + ws[1] - 2.0) <= 1e-9);
        }
    }
}

TEST_CASE("data pruning") {
    const OfflineDataset ds = toy_dataset(1000, 65);
    const OfflineDataset same = data_prune(ds, 1.0);
    CHECK(same.x == ds.x);
    const OfflineDataset half = data_prune(ds, 0.5);
    CHECK(half.size() == 500);
    CHECK(d_best(half).hv == doctest::Approx(d_best(ds).hv).epsilon(1e-12));
    const auto order = nsga2_order(ds.y_raw);
    std::vector<Genotype> best;
    for (std::size_t i = 0; i < 500; ++i) best.push_back(ds.x[order[i]]);
    std::sort(best.begin(), best.end());
    std::vector<Genotype> kept = half.x;
    std::sort(kept.begin(), kept.end());
    CHECK(best == kept);
    CHECK(data_prune(ds, 0.0015).size() == 2);
    CHECK_THROWS_AS(data_prune(ds, 0.0), ConfigError);
}

TEST_CASE("training") {
    const OfflineDataset tiny = toy_dataset(10, 66);
    TrainConfig cfg;
    cfg.epochs = 500;
    cfg.batch_size = 2;
    cfg.decay = 1.0;
    cfg.seed = 5;
    const TrainResult fit = train(ModelKind::end_to_end, tiny, cfg);
    CHECK(fit.trace.loss.back() < 1e-3);
    CHECK(fit.trace.loss.size() == 500);
    CHECK(fit.trace.elites_loss.size() == 500);
    CHECK(fit.trace.task_loss.size() == 500);

    const OfflineDataset ds = toy_dataset(100, 67);
    TrainConfig c2;
    c2.epochs = 5;
    c2.hidden = 16;
    c2.seed = 8;
    const TrainResult a = train(ModelKind::multi_head, ds, c2);
    const TrainResult b = train(ModelKind::multi_head, ds, c2);
    CHECK(a.model.params() == b.model.params());
    CHECK(a.trace.loss == b.trace.loss);

    c2.mtl = MtlKind::pcgrad;
    CHECK_THROWS_AS(train(ModelKind::multiple, ds, c2), ConfigError);
}

TEST_CASE("multiple models are independent single-output trainings") {
    const OfflineDataset ds = toy_dataset(80, 68);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.hidden = 8;
    cfg.seed = 21;
    const TrainResult multi = train(ModelKind::multiple, ds, cfg);
    for (std::size_t i = 0; i < 2; ++i) {
        OfflineDataset col = ds;
        for (auto& y : col.y_raw) y = {y[i]};
        col.stats = fit_norm_stats(col.y_raw);
        col.eval_stats = col.stats;
        col.y_norm = col.stats.normalize(col.y_raw);
        col.reference = nadir_reference(col.y_raw);
        TrainConfig ci = cfg;
        ci.seed = derive_seed(cfg.seed, std::uint64_t{i});
        const TrainResult single = train(ModelKind::end_to_end, col, ci);
        for (std::size_t b = 0; b < ds.size(); b += 7) {
            CHECK(multi.model.forward(ds.x[b])[i] == single.model.forward(ds.x[b])[0]);
        }
    }
}

TEST_CASE("pcgrad on a real batch") {
    Rng rng(69);
    MlpSurrogate model(ModelKind::multi_head, 3, 4, 2);
    model.initialize(rng);
    const auto xs = random_inputs(rng, 8, 3);
    const TaskGradients tg = backward(model, xs, random_targets(rng, 8, 2));
    double d = 0.0;
    for (std::size_t k = 0; k < tg.grads[0].size(); ++k) d += tg.grads[0][k] * tg.grads[1][k];
    const auto combined = pcgrad_combine(tg.grads, rng);
    if (d >= 0.0) {
        for (std::size_t k = 0; k < combined.size(); ++k) CHECK(combined[k] == tg.grads[0][k] + tg.grads[1][k]);
    }
    for (const auto& g : tg.grads) {
        double dot = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) dot += combined[k] * g[k];
        CHECK(dot >= -1e-12);
    }

    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.hidden = 8;
    cfg.seed = 4;
    cfg.mtl = MtlKind::pcgrad;
    const OfflineDataset ds = toy_dataset(60, 70);
    const TrainResult a = train(ModelKind::multi_head, ds, cfg);
    const TrainResult b = train(ModelKind::multi_head, ds, cfg);
    CHECK(a.model.params() == b.model.params());
    CHECK(a.trace.loss.back() < a.trace.loss.front());
}

TEST_CASE("checkpoints round-trip exactly") {
    const OfflineDataset ds = toy_dataset(50, 71);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.hidden = 8;
    cfg.seed = 6;
    cfg.mtl = MtlKind::gradnorm;
    const TrainResult r = train(ModelKind::multi_head, ds, cfg);
    const std::string text = checkpoint_to_json(r.model, cfg);
    TrainConfig back_cfg;
    const MlpSurrogate back = checkpoint_from_json(text, &back_cfg);
    CHECK(back.params() == r.model.params());
    CHECK(back.stats.lo == r.model.stats.lo);
    CHECK(back.task == "vlmop2");
    CHECK(back_cfg.mtl == MtlKind::gradnorm);
    CHECK(checkpoint_to_json(back, back_cfg) == text);
    CHECK_THROWS(checkpoint_from_json("{\"format\": \"other\"}"));
}
