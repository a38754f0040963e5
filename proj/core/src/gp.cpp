#include "offmoo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_set>

namespace offmoo {

double kernel_rbf(std::span<const double> a, std::span<const double> b, double lengthscale, double signal) {
    if (a.size() != b.size()) throw DimensionError("kernel_rbf: length mismatch");
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return signal * std::exp(-d2 / (2.0 * lengthscale * lengthscale));
}

double kernel_kendall(std::span<const double> a, std::span<const double> b, double scale) {
    if (a.size() != b.size()) throw DimensionError("kernel_kendall: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) return scale;
    long long score = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = (a[i] - a[j]) * (b[i] - b[j]);
            if (s > 0.0) ++score;
            else if (s < 0.0) --score;
        }
    }
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    return scale * static_cast<double>(score) / pairs;
}

double kernel_value(const KernelParams& k, std::span<const double> a, std::span<const double> b) {
    return k.kind == KernelKind::rbf ? kernel_rbf(a, b, k.lengthscale, k.signal) : kernel_kendall(a, b, k.scale);
}

Eigen::MatrixXd kernel_matrix(const KernelParams& k, const std::vector<Genotype>& xs) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = kernel_value(k, xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)]);
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

GpModel::GpModel(std::vector<Genotype> xs, std::vector<double> ys, KernelParams params)
    : xs_(std::move(xs)), ys_(std::move(ys)), params_(params) {
    if (xs_.empty()) throw EmptyInputError("GP: no training points");
    if (xs_.size() != ys_.size()) throw DimensionError("GP: input and target counts differ");
    if (xs_.size() > kMaxGpPoints) {
        throw SizeError("GP: " + std::to_string(xs_.size()) + " training points exceed the limit of " +
                        std::to_string(kMaxGpPoints));
    }
    const auto n = static_cast<Eigen::Index>(xs_.size());
    const Eigen::MatrixXd gram = kernel_matrix(params_, xs_);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = ys_[static_cast<std::size_t>(i)];

    double jitter = 0.0;
    for (;;) {
        Eigen::MatrixXd a = gram;
        a.diagonal().array() += params_.noise + jitter;
        llt_.compute(a);
        bool ok = llt_.info() == Eigen::Success;
        if (ok) {
            const auto diag = llt_.matrixL().toDenseMatrix().diagonal();
            ok = (diag.array() > 0.0).all() && diag.allFinite();
        }
        if (ok) break;
        jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
        if (jitter > kMaxJitter * (1.0 + 1e-9)) throw NumericError("GP: Cholesky factorization failed after jitter");
    }
    jitter_ = jitter;
    alpha_ = llt_.solve(y);

    double log_det = 0.0;
    const Eigen::MatrixXd l = llt_.matrixL();
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(l(i, i));
    lml_ = -0.5 * y.dot(alpha_) - log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

std::pair<double, double> GpModel::predict(std::span<const double> x) const {
    const auto n = static_cast<Eigen::Index>(xs_.size());
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) k(i) = kernel_value(params_, x, xs_[static_cast<std::size_t>(i)]);
    const double mean = k.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k);
    const double var = kernel_value(params_, x, x) - v.squaredNorm();
    return {mean, std::max(var, 0.0)};
}

namespace {

double median_distance(const std::vector<Genotype>& xs) {
    std::vector<double> d;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < xs[i].size(); ++k) s += (xs[i][k] - xs[j][k]) * (xs[i][k] - xs[j][k]);
            d.push_back(std::sqrt(s));
        }
    }
    if (d.empty()) return 1.0;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
    const double med = d[d.size() / 2];
    return med > 0.0 ? med : 1.0;
}

struct Bounds {
    double lo;
    double hi;
};

}  // namespace

GpModel gp_fit(const std::vector<Genotype>& xs, const std::vector<double>& ys, const KernelParams& init,
               const GpFitOptions& opts) {
    GpModel best(xs, ys, init);
    const bool rbf = init.kind == KernelKind::rbf;
    const double med = rbf ? median_distance(xs) : 1.0;

    // Search coordinates in log space: rbf (lengthscale, signal, noise);
    // kendall (noise).
    std::vector<Bounds> bounds;
    if (rbf) {
        bounds = {{std::log(1e-3 * med), std::log(1e3 * med)}, {std::log(1e-3), std::log(1e3)}, {std::log(1e-8), 0.0}};
    } else {
        bounds = {{std::log(1e-8), 0.0}};
    }
    auto to_params = [&](const std::vector<double>& z) {
        KernelParams p = init;
        if (rbf) {
            p.lengthscale = std::exp(z[0]);
            p.signal = std::exp(z[1]);
            p.noise = std::exp(z[2]);
        } else {
            p.scale = 1.0;
            p.noise = std::exp(z[0]);
        }
        return p;
    };
    auto score = [&](const std::vector<double>& z, GpModel* out) {
        try {
            GpModel g(xs, ys, to_params(z));
            const double v = g.log_marginal_likelihood();
            if (out && std::isfinite(v)) *out = std::move(g);
            return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
        } catch (const NumericError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    Rng rng(opts.seed);
    for (std::size_t s = 0; s < opts.starts; ++s) {
        std::vector<double> z(bounds.size());
        if (s == 0) {
            if (rbf) z = {std::log(init.lengthscale), std::log(init.signal), std::log(init.noise)};
            else z = {std::log(init.noise)};
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i], bounds[i].lo, bounds[i].hi);
        } else {
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.uniform(bounds[i].lo, bounds[i].hi);
            if (rbf) z[0] = std::clamp(std::log(med) + rng.uniform(-2.0, 2.0), bounds[0].lo, bounds[0].hi);
        }
        GpModel current;
        double value = score(z, &current);
        if (!std::isfinite(value)) continue;
        double step = 1.0;
        for (std::size_t sweep = 0; sweep < opts.max_sweeps && step > 1e-3; ++sweep) {
            bool improved = false;
            for (std::size_t i = 0; i < z.size(); ++i) {
                for (double dir : {1.0, -1.0}) {
                    std::vector<double> trial = z;
                    trial[i] = std::clamp(z[i] + dir * step, bounds[i].lo, bounds[i].hi);
                    if (trial[i] == z[i]) continue;
                    GpModel g;
                    const double v = score(trial, &g);
                    if (v > value) {
                        value = v;
                        z = std::move(trial);
                        current = std::move(g);
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (value > best.log_marginal_likelihood()) best = std::move(current);
    }
    return best;
}

void GpConfig::validate() const {
    if (points == 0) throw ConfigError("GP point count must be positive");
    if (points > kMaxGpPoints) throw ConfigError("GP point count exceeds " + std::to_string(kMaxGpPoints));
    if (!(beta >= 0.0)) throw ConfigError("LCB beta must be non-negative");
}

std::vector<std::size_t> select_gp_points(const OfflineDataset& ds, std::size_t k) {
    if (k == 0) throw ConfigError("select_gp_points: K must be positive");
    return nsga2_select(ds.y_raw, std::min(k, ds.size()));
}

std::pair<ObjectiveVector, ObjectiveVector> GpSurrogate::predict(std::span<const double> x) const {
    ObjectiveVector mean(models.size());
    ObjectiveVector var(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) std::tie(mean[i], var[i]) = models[i].predict(x);
    return {mean, var};
}

ObjectiveVector GpSurrogate::lcb(std::span<const double> x, double beta) const {
    if (!(beta >= 0.0)) throw ConfigError("LCB beta must be non-negative");
    auto [mean, var] = predict(x);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] -= beta * std::sqrt(var[i]);
    return mean;
}

KernelKind default_kernel_for(const TaskSpec& task) {
    return task.space.kind == SpaceKind::permutation ? KernelKind::kendall : KernelKind::rbf;
}

GpSurrogate fit_gp_surrogate(const OfflineDataset& ds, const GpConfig& cfg) {
    cfg.validate();
    if (ds.size() == 0) throw EmptyInputError("fit_gp_surrogate: empty dataset");
    std::vector<Genotype> xs;
    PointSet ys;
    std::unordered_set<std::string> seen;
    for (std::size_t i : select_gp_points(ds, cfg.points)) {
        std::string key(reinterpret_cast<const char*>(ds.x[i].data()), ds.x[i].size() * sizeof(double));
        if (!seen.insert(key).second) continue;
        xs.push_back(ds.x[i]);
        ys.push_back(ds.y_norm[i]);
    }
    GpSurrogate s;
    s.stats = ds.stats;
    s.task = ds.task;
    KernelParams init;
    init.kind = default_kernel_for(task_by_name(ds.task));
    init.lengthscale = init.kind == KernelKind::rbf ? median_distance(xs) : 1.0;
    init.signal = 1.0;
    init.noise = 1e-4;
    for (std::size_t k = 0; k < ds.objectives(); ++k) {
        std::vector<double> y(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i) y[i] = ys[i][k];
        if (cfg.optimize) {
            GpFitOptions opts = cfg.fit;
            opts.seed = derive_seed(cfg.fit.seed, std::uint64_t{k});
            s.models.push_back(gp_fit(xs, y, init, opts));
        } else {
            s.models.emplace_back(xs, y, init);
        }
    }
    return s;
}

}  // namespace offmoo
