#pragma once

#include "offmoo/common.hpp"
#include "offmoo/datagen.hpp"
#include "offmoo/pareto.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace offmoo {

enum class ModelKind { end_to_end, multi_head, multiple };
enum class MtlKind { none, gradnorm, pcgrad };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);
std::string to_string(MtlKind k);
MtlKind mtl_kind_from_string(const std::string& s);

/// Affine layer stored in the model's flat parameter vector. W is row-major
/// (out x in) at offset w, the bias at offset b.
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t w = 0;
    std::size_t b = 0;
};

/// A chain of affine layers with relu between consecutive layers.
struct LayerChain {
    std::vector<DenseLayer> layers;
};

/// MLP surrogate in one of three layouts, all sharing one representation:
/// an optional trunk (relu after every layer) feeding one or more heads
/// whose outputs are concatenated.
///
///   end_to_end: no trunk, one head D -> H -> H -> m
///   multi_head: trunk D -> H -> H, m heads H -> 1
///   multiple:   no trunk, m heads D -> H -> H -> 1
///
/// Outputs are normalized objectives; `stats` maps them back to raw units.
class MlpSurrogate {
public:
    MlpSurrogate() = default;
    MlpSurrogate(ModelKind kind, std::size_t input_dim, std::size_t hidden, std::size_t outputs);

    ModelKind kind() const { return kind_; }
    std::size_t input_dim() const { return input_dim_; }
    std::size_t hidden() const { return hidden_; }
    std::size_t outputs() const { return outputs_; }

    const LayerChain& trunk() const { return trunk_; }
    const std::vector<LayerChain>& heads() const { return heads_; }
    /// Head index and output column of each objective.
    std::pair<std::size_t, std::size_t> task_location(std::size_t task) const;

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t param_count() const { return params_.size(); }

    /// He-uniform weights, zero biases.
    void initialize(Rng& rng);

    /// Normalized prediction.
    ObjectiveVector forward(std::span<const double> x) const;
    PointSet forward_batch(const std::vector<Genotype>& xs) const;
    /// Prediction in raw objective units.
    PointSet predict_raw(const std::vector<Genotype>& xs) const;

    /// Layer whose task gradients GradNorm balances: the trunk's last layer
    /// for multi_head, the output layer for end_to_end.
    DenseLayer shared_layer() const;

    NormStats stats;
    std::string task;

private:
    ModelKind kind_ = ModelKind::end_to_end;
    std::size_t input_dim_ = 0;
    std::size_t hidden_ = 0;
    std::size_t outputs_ = 0;
    LayerChain trunk_;
    std::vector<LayerChain> heads_;
    std::vector<double> params_;
};

/// Per-task MSE losses and their gradients w.r.t. every parameter.
struct TaskGradients {
    std::vector<double> losses;
    std::vector<std::vector<double>> grads;
};

/// Exact gradients of L_i = mean_b (f_i(x_b) - y_bi)^2 for each task i.
/// Targets are normalized objectives.
TaskGradients backward(const MlpSurrogate& model, const std::vector<Genotype>& xs, const PointSet& targets);

/// Sum over tasks of the MSE losses.
double total_loss(const MlpSurrogate& model, const std::vector<Genotype>& xs, const PointSet& targets);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state, double lr);

/// Sum of the task gradients after removing, in random order, the
/// components of each that conflict with the others' raw gradients.
std::vector<double> pcgrad_combine(const std::vector<std::vector<double>>& task_grads, Rng& rng);

struct GradNormState {
    std::vector<double> weights;
    std::vector<double> initial_losses;
    AdamState adam;
};

/// Gradient of sum_i |G_i - mean(G) * r_i^alpha| w.r.t. the task weights,
/// with G_i = w_i * shared_norms[i] and r_i the relative inverse training
/// rate. The target term is held constant.
std::vector<double> gradnorm_weight_gradient(std::span<const double> shared_norms, std::span<const double> losses,
                                             std::span<const double> initial_losses,
                                             std::span<const double> weights, double alpha);

/// One GradNorm weight update: Adam step on the weights, positive floor,
/// renormalization to sum m. Returns the new weights.
std::vector<double> gradnorm_update(GradNormState& state, std::span<const double> shared_norms,
                                    std::span<const double> losses, double alpha, double lr);

/// sum_i w_i * g_i.
std::vector<double> weighted_sum(const std::vector<std::vector<double>>& grads, std::span<const double> weights);

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    double lr = 1e-3;
    double decay = 0.98;
    std::uint64_t seed = 0;
    std::size_t hidden = 64;
    MtlKind mtl = MtlKind::none;
    double gradnorm_alpha = 1.5;
    /// Fraction of the dataset kept by data pruning; 1 disables it.
    double keep_fraction = 1.0;

    void validate() const;
};

struct TrainTrace {
    std::vector<double> loss;                      // mean squared error over all outputs
    std::vector<double> elites_loss;               // same, rank-0 subset, evaluation scale
    std::vector<std::vector<double>> task_loss;    // per epoch, per task
    std::vector<std::vector<double>> gradnorm_weights;
};

/// Keeps the best ceil(keep_fraction * N) points in NSGA-II order.
OfflineDataset data_prune(const OfflineDataset& ds, double keep_fraction);

struct TrainResult {
    MlpSurrogate model;
    TrainTrace trace;
};

/// Trains a surrogate of the given kind. multiple trains m independent
/// single-output networks, network i seeded with derive_seed(seed, i).
TrainResult train(ModelKind kind, const OfflineDataset& ds, const TrainConfig& cfg);

/// Elites loss of a trained model: MSE over the rank-0 points of ds, both
/// sides mapped through ds.eval_stats.
double elites_loss(const MlpSurrogate& model, const OfflineDataset& ds);

// Checkpoints: JSON header plus the flat parameter array.
std::string checkpoint_to_json(const MlpSurrogate& model, const TrainConfig& cfg);
MlpSurrogate checkpoint_from_json(const std::string& text, TrainConfig* cfg = nullptr);
void save_checkpoint(const MlpSurrogate& model, const TrainConfig& cfg, const std::filesystem::path& path);
MlpSurrogate load_checkpoint(const std::filesystem::path& path, TrainConfig* cfg = nullptr);

}  // namespace offmoo
