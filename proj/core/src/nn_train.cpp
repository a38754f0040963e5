#include "offmoo/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace offmoo {

void TrainConfig::validate() const {
    if (epochs == 0 || batch_size == 0 || hidden == 0) throw ConfigError("epochs, batch_size and hidden must be positive");
    if (!(lr > 0.0) || !(decay > 0.0)) throw ConfigError("learning rate and decay must be positive");
    if (!(gradnorm_alpha >= 0.0)) throw ConfigError("gradnorm alpha must be non-negative");
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw ConfigError("keep_fraction must lie in (0, 1]");
}

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state, double lr) {
    if (grads.size() != params.size()) throw DimensionError("adam_step: gradient size mismatch");
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.t = 0;
    }
    ++state.t;
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * grads[i];
        state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
    }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> sum_grads(const std::vector<std::vector<double>>& grads) {
    std::vector<double> out(grads.front().size(), 0.0);
    for (const auto& g : grads) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += g[k];
    }
    return out;
}

}  // namespace

std::vector<double> pcgrad_combine(const std::vector<std::vector<double>>& task_grads, Rng& rng) {
    if (task_grads.empty()) throw EmptyInputError("pcgrad_combine: no task gradients");
    const std::size_t p = task_grads.front().size();
    for (const auto& g : task_grads) {
        if (g.size() != p) throw DimensionError("pcgrad_combine: gradient size mismatch");
    }
    const std::size_t m = task_grads.size();
    std::vector<double> norm2(m);
    for (std::size_t j = 0; j < m; ++j) norm2[j] = dot(task_grads[j], task_grads[j]);

    std::vector<std::vector<double>> projected = task_grads;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        auto& gi = projected[i];
        for (std::size_t j : order) {
            if (j == i || norm2[j] == 0.0) continue;
            const double d = dot(gi, task_grads[j]);
            if (d < 0.0) {
                const double c = d / norm2[j];
                for (std::size_t k = 0; k < p; ++k) gi[k] -= c * task_grads[j][k];
            }
        }
    }
    return sum_grads(projected);
}

std::vector<double> weighted_sum(const std::vector<std::vector<double>>& grads, std::span<const double> weights) {
    if (grads.empty() || weights.size() != grads.size()) throw DimensionError("weighted_sum: size mismatch");
    std::vector<double> out(grads.front().size(), 0.0);
    for (std::size_t i = 0; i < grads.size(); ++i) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += weights[i] * grads[i][k];
    }
    return out;
}

std::vector<double> gradnorm_weight_gradient(std::span<const double> shared_norms, std::span<const double> losses,
                                             std::span<const double> initial_losses,
                                             std::span<const double> weights, double alpha) {
    const std::size_t m = weights.size();
    if (shared_norms.size() != m || losses.size() != m || initial_losses.size() != m) {
        throw DimensionError("gradnorm: size mismatch");
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!(losses[i] > 0.0) || !(initial_losses[i] > 0.0)) {
            throw NumericError("gradnorm: task losses must be positive");
        }
    }
    std::vector<double> g_norm(m);
    std::vector<double> ratio(m);
    double g_mean = 0.0;
    double r_mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        g_norm[i] = weights[i] * shared_norms[i];
        ratio[i] = losses[i] / initial_losses[i];
        g_mean += g_norm[i];
        r_mean += ratio[i];
    }
    g_mean /= static_cast<double>(m);
    r_mean /= static_cast<double>(m);

    std::vector<double> grad(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double target = g_mean * std::pow(ratio[i] / r_mean, alpha);
        const double diff = g_norm[i] - target;
        const double tol = 1e-12 * std::max(std::abs(g_norm[i]), std::abs(target));
        const double sign = std::abs(diff) <= tol ? 0.0 : (diff > 0.0 ? 1.0 : -1.0);
        grad[i] = sign * shared_norms[i];
    }
    return grad;
}

std::vector<double> gradnorm_update(GradNormState& state, std::span<const double> shared_norms,
                                    std::span<const double> losses, double alpha, double lr) {
    constexpr double kFloor = 1e-6;
    const std::vector<double> g =
        gradnorm_weight_gradient(shared_norms, losses, state.initial_losses, state.weights, alpha);
    adam_step(state.weights, g, state.adam, lr);
    double sum = 0.0;
    for (double& w : state.weights) {
        w = std::max(w, kFloor);
        sum += w;
    }
    const double m = static_cast<double>(state.weights.size());
    for (double& w : state.weights) w *= m / sum;
    return state.weights;
}

OfflineDataset data_prune(const OfflineDataset& ds, double keep_fraction) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw ConfigError("keep_fraction must lie in (0, 1]");
    if (ds.size() == 0) throw EmptyInputError("data_prune: empty dataset");
    const double exact = keep_fraction * static_cast<double>(ds.size());
    auto keep = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    keep = std::clamp<std::size_t>(keep, 1, ds.size());
    std::vector<std::size_t> idx = nsga2_select(ds.y_raw, keep);
    std::sort(idx.begin(), idx.end());
    OfflineDataset out = dataset_subset(ds, idx);
    out.provenance.keep_fraction = keep_fraction;
    return out;
}

double elites_loss(const MlpSurrogate& model, const OfflineDataset& ds) {
    if (ds.size() == 0) throw EmptyInputError("elites_loss: empty dataset");
    const FrontPartition part = non_dominated_sort(ds.y_raw);
    const auto& elite = part.fronts.front();
    std::vector<Genotype> xs;
    for (std::size_t i : elite) xs.push_back(ds.x[i]);
    const PointSet pred = ds.eval_stats.normalize(model.predict_raw(xs));
    const PointSet truth = ds.eval_stats.normalize(gather(ds.y_raw, elite));
    double s = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t k = 0; k < pred[i].size(); ++k, ++count) s += (pred[i][k] - truth[i][k]) * (pred[i][k] - truth[i][k]);
    }
    return s / static_cast<double>(count);
}

namespace {

// Training state of one network.
class Trainer {
public:
    Trainer(ModelKind kind, std::size_t hidden, std::size_t outputs, std::uint64_t seed, const TrainConfig& cfg,
            const std::vector<Genotype>& x, PointSet targets)
        : model_(kind, x.front().size(), hidden, outputs),
          shuffle_rng_(derive_seed(seed, "shuffle")),
          pcgrad_rng_(derive_seed(seed, "pcgrad")),
          cfg_(cfg),
          x_(x),
          targets_(std::move(targets)) {
        Rng init(derive_seed(seed, "init"));
        model_.initialize(init);
        if (cfg.mtl == MtlKind::gradnorm) gradnorm_.weights.assign(outputs, 1.0);
    }

    MlpSurrogate& model() { return model_; }
    const std::vector<double>& gradnorm_weights() const { return gradnorm_.weights; }

    // Returns the mean task losses over the epoch.
    std::vector<double> run_epoch(std::size_t epoch) {
        const std::size_t n = x_.size();
        const std::size_t m = model_.outputs();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle_rng_.shuffle(order);
        const double lr = cfg_.lr * std::pow(cfg_.decay, static_cast<double>(epoch));

        std::vector<double> loss_sum(m, 0.0);
        std::vector<Genotype> bx;
        PointSet by;
        for (std::size_t start = 0; start < n; start += cfg_.batch_size) {
            const std::size_t end = std::min(n, start + cfg_.batch_size);
            bx.clear();
            by.clear();
            for (std::size_t k = start; k < end; ++k) {
                bx.push_back(x_[order[k]]);
                by.push_back(targets_[order[k]]);
            }
            const TaskGradients tg = backward(model_, bx, by);
            for (std::size_t i = 0; i < m; ++i) {
                if (!std::isfinite(tg.losses[i])) {
                    throw NumericError("training diverged: non-finite loss for task " + std::to_string(i) +
                                       " at epoch " + std::to_string(epoch));
                }
                loss_sum[i] += tg.losses[i] * static_cast<double>(end - start);
            }
            std::vector<double> combined;
            switch (cfg_.mtl) {
            case MtlKind::none: combined = sum_grads(tg.grads); break;
            case MtlKind::pcgrad: combined = pcgrad_combine(tg.grads, pcgrad_rng_); break;
            case MtlKind::gradnorm:
                combined = weighted_sum(tg.grads, gradnorm_.weights);
                if (!gradnorm_.initial_losses.empty()) {
                    const DenseLayer shared = model_.shared_layer();
                    std::vector<double> norms(m);
                    for (std::size_t i = 0; i < m; ++i) {
                        std::span<const double> block(tg.grads[i].data() + shared.w, shared.in * shared.out);
                        norms[i] = std::sqrt(dot(block, block));
                    }
                    gradnorm_update(gradnorm_, norms, tg.losses, cfg_.gradnorm_alpha, lr);
                }
                break;
            }
            adam_step(model_.params(), combined, adam_, lr);
        }
        for (double& l : loss_sum) l /= static_cast<double>(n);
        if (cfg_.mtl == MtlKind::gradnorm && gradnorm_.initial_losses.empty()) {
            for (double l : loss_sum) {
                if (!(l > 0.0)) throw NumericError("gradnorm: initial task loss must be positive");
            }
            gradnorm_.initial_losses = loss_sum;
        }
        return loss_sum;
    }

private:
    MlpSurrogate model_;
    AdamState adam_;
    GradNormState gradnorm_;
    Rng shuffle_rng_;
    Rng pcgrad_rng_;
    const TrainConfig& cfg_;
    const std::vector<Genotype>& x_;
    PointSet targets_;
};

}  // namespace

TrainResult train(ModelKind kind, const OfflineDataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    if (ds.size() == 0) throw EmptyInputError("train: empty dataset");
    const OfflineDataset data = cfg.keep_fraction < 1.0 ? data_prune(ds, cfg.keep_fraction) : ds;
    const std::size_t m = data.objectives();
    if (kind == ModelKind::multiple && cfg.mtl != MtlKind::none) {
        throw ConfigError("multi-task techniques need shared parameters; use end_to_end or multi_head");
    }
    if (cfg.mtl != MtlKind::none && m < 2) throw ConfigError("multi-task techniques need at least two objectives");

    std::vector<Trainer> trainers;
    trainers.reserve(m);
    if (kind == ModelKind::multiple) {
        for (std::size_t i = 0; i < m; ++i) {
            PointSet column;
            column.reserve(data.size());
            for (const auto& y : data.y_norm) column.push_back({y[i]});
            trainers.emplace_back(ModelKind::end_to_end, cfg.hidden, 1, derive_seed(cfg.seed, std::uint64_t{i}), cfg,
                                  data.x, std::move(column));
        }
    } else {
        trainers.emplace_back(kind, cfg.hidden, m, cfg.seed, cfg, data.x, data.y_norm);
    }

    MlpSurrogate model(kind, data.x.front().size(), cfg.hidden, m);
    model.stats = data.stats;
    model.task = data.task;
    auto assemble = [&]() {
        if (kind != ModelKind::multiple) {
            model.params() = trainers.front().model().params();
            return;
        }
        std::size_t off = 0;
        for (auto& t : trainers) {
            const auto& p = t.model().params();
            std::copy(p.begin(), p.end(), model.params().begin() + static_cast<std::ptrdiff_t>(off));
            off += p.size();
        }
    };

    TrainResult result;
    TrainTrace& trace = result.trace;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<double> task_loss;
        for (auto& t : trainers) {
            const std::vector<double> l = t.run_epoch(epoch);
            task_loss.insert(task_loss.end(), l.begin(), l.end());
        }
        trace.loss.push_back(std::accumulate(task_loss.begin(), task_loss.end(), 0.0) / static_cast<double>(m));
        trace.task_loss.push_back(std::move(task_loss));
        if (cfg.mtl == MtlKind::gradnorm) trace.gradnorm_weights.push_back(trainers.front().gradnorm_weights());
        assemble();
        trace.elites_loss.push_back(elites_loss(model, data));
    }
    result.model = std::move(model);
    return result;
}

}  // namespace offmoo
