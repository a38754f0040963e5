#pragma once

#include "offmoo/common.hpp"
#include "offmoo/datagen.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <span>
#include <vector>

namespace offmoo {

enum class KernelKind { rbf, kendall };

struct KernelParams {
    KernelKind kind = KernelKind::rbf;
    double lengthscale = 1.0;
    double signal = 1.0;   // sigma_f^2 (rbf)
    double noise = 1e-6;   // sigma_n^2
    double scale = 1.0;    // kendall
};

double kernel_rbf(std::span<const double> a, std::span<const double> b, double lengthscale, double signal);

/// scale * (concordant - discordant) / C(n, 2) over index pairs.
double kernel_kendall(std::span<const double> a, std::span<const double> b, double scale = 1.0);

double kernel_value(const KernelParams& k, std::span<const double> a, std::span<const double> b);

/// Gram matrix without the noise term.
Eigen::MatrixXd kernel_matrix(const KernelParams& k, const std::vector<Genotype>& xs);

inline constexpr std::size_t kMaxGpPoints = 400;
inline constexpr double kMaxJitter = 1e-4;

/// Exact GP regression for one output with zero prior mean.
class GpModel {
public:
    GpModel() = default;
    /// Factorizes with the given hyperparameters. Throws NumericError when
    /// the Cholesky fails even with jitter escalated to kMaxJitter.
    GpModel(std::vector<Genotype> xs, std::vector<double> ys, KernelParams params);

    const KernelParams& params() const { return params_; }
    double jitter() const { return jitter_; }
    std::size_t size() const { return xs_.size(); }
    double log_marginal_likelihood() const { return lml_; }

    /// Posterior mean and latent-function variance (clamped at 0).
    std::pair<double, double> predict(std::span<const double> x) const;

private:
    std::vector<Genotype> xs_;
    std::vector<double> ys_;
    KernelParams params_;
    double jitter_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
    double lml_ = 0.0;
};

struct GpFitOptions {
    std::size_t starts = 8;
    std::size_t max_sweeps = 60;
    std::uint64_t seed = 0;
};

/// Maximizes the log marginal likelihood by multi-start coordinate search
/// in log space. The first start is `init`, so the result never scores
/// below it. Kendall kernels keep scale 1 and only fit the noise.
GpModel gp_fit(const std::vector<Genotype>& xs, const std::vector<double>& ys, const KernelParams& init,
               const GpFitOptions& opts = {});

struct GpConfig {
    std::size_t points = 100;
    double beta = 2.0;
    bool optimize = true;
    GpFitOptions fit;

    void validate() const;
};

/// The best min(K, N) points in NSGA-II order over raw objectives.
std::vector<std::size_t> select_gp_points(const OfflineDataset& ds, std::size_t k = 100);

/// One independent GP per objective on normalized targets.
struct GpSurrogate {
    std::vector<GpModel> models;
    NormStats stats;
    std::string task;

    std::size_t outputs() const { return models.size(); }
    /// Posterior means and variances, normalized units.
    std::pair<ObjectiveVector, ObjectiveVector> predict(std::span<const double> x) const;
    /// mu_i(x) - beta * sigma_i(x), normalized units.
    ObjectiveVector lcb(std::span<const double> x, double beta) const;
};

KernelKind default_kernel_for(const TaskSpec& task);

GpSurrogate fit_gp_surrogate(const OfflineDataset& ds, const GpConfig& cfg);

}  // namespace offmoo
