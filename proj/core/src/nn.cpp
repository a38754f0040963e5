#include "offmoo/io.hpp"
#include "offmoo/nn.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>

namespace offmoo {

using nlohmann::json;

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMat>;
using MatMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const Eigen::RowVectorXd>;
using RowMap = Eigen::Map<Eigen::RowVectorXd>;

DenseLayer add_layer(std::size_t in, std::size_t out, std::size_t& offset) {
    DenseLayer l{in, out, offset, offset + in * out};
    offset += in * out + out;
    return l;
}

RowMat to_matrix(const std::vector<Genotype>& xs, std::size_t d) {
    RowMat a(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].size() != d) {
            throw DimensionError("surrogate expects inputs of length " + std::to_string(d) + ", got " +
                                 std::to_string(xs[i].size()));
        }
        for (std::size_t j = 0; j < d; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xs[i][j];
    }
    return a;
}

RowMat affine(const DenseLayer& l, const std::vector<double>& p, const RowMat& a) {
    ConstMatMap w(p.data() + l.w, static_cast<Eigen::Index>(l.out), static_cast<Eigen::Index>(l.in));
    ConstRowMap b(p.data() + l.b, static_cast<Eigen::Index>(l.out));
    RowMat z = a * w.transpose();
    z.rowwise() += b;
    return z;
}

RowMat relu(const RowMat& z) { return z.cwiseMax(0.0); }

// Inputs and pre-activations of every layer of a chain.
struct ChainCache {
    std::vector<RowMat> inputs;
    std::vector<RowMat> pre;
};

// relu_last: the trunk applies relu after its final layer, heads do not.
RowMat run_chain(const LayerChain& chain, const std::vector<double>& p, RowMat a, bool relu_last,
                 ChainCache* cache) {
    for (std::size_t k = 0; k < chain.layers.size(); ++k) {
        RowMat z = affine(chain.layers[k], p, a);
        const bool last = k + 1 == chain.layers.size();
        if (cache) {
            cache->inputs.push_back(std::move(a));
            cache->pre.push_back(z);
        }
        a = (last && !relu_last) ? std::move(z) : relu(z);
    }
    return a;
}

// Backpropagates dz (gradient at the pre-activation of the chain's last
// layer) and returns the gradient w.r.t. the chain's input.
RowMat backprop_chain(const LayerChain& chain, const std::vector<double>& p, const ChainCache& cache, RowMat dz,
                      std::vector<double>& g) {
    for (std::size_t k = chain.layers.size(); k-- > 0;) {
        const DenseLayer& l = chain.layers[k];
        const auto out = static_cast<Eigen::Index>(l.out);
        const auto in = static_cast<Eigen::Index>(l.in);
        MatMap(g.data() + l.w, out, in).noalias() += dz.transpose() * cache.inputs[k];
        RowMap(g.data() + l.b, out) += dz.colwise().sum();
        ConstMatMap w(p.data() + l.w, out, in);
        RowMat da = dz * w;
        if (k > 0) {
            dz = da.cwiseProduct((cache.pre[k - 1].array() > 0.0).cast<double>().matrix());
        } else {
            return da;
        }
    }
    return dz;
}

}  // namespace

std::string to_string(ModelKind k) {
    switch (k) {
    case ModelKind::end_to_end: return "end_to_end";
    case ModelKind::multi_head: return "multi_head";
    case ModelKind::multiple: return "multiple";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "end_to_end") return ModelKind::end_to_end;
    if (s == "multi_head") return ModelKind::multi_head;
    if (s == "multiple") return ModelKind::multiple;
    throw ConfigError("unknown model kind: " + s);
}

std::string to_string(MtlKind k) {
    switch (k) {
    case MtlKind::none: return "none";
    case MtlKind::gradnorm: return "gradnorm";
    case MtlKind::pcgrad: return "pcgrad";
    }
    return "?";
}

MtlKind mtl_kind_from_string(const std::string& s) {
    if (s == "none") return MtlKind::none;
    if (s == "gradnorm") return MtlKind::gradnorm;
    if (s == "pcgrad") return MtlKind::pcgrad;
    throw ConfigError("unknown multi-task technique: " + s);
}

MlpSurrogate::MlpSurrogate(ModelKind kind, std::size_t input_dim, std::size_t hidden, std::size_t outputs)
    : kind_(kind), input_dim_(input_dim), hidden_(hidden), outputs_(outputs) {
    if (input_dim == 0 || hidden == 0 || outputs == 0) throw ConfigError("MLP dimensions must be positive");
    std::size_t off = 0;
    switch (kind) {
    case ModelKind::end_to_end:
        heads_.push_back(LayerChain{{add_layer(input_dim, hidden, off), add_layer(hidden, hidden, off),
                                     add_layer(hidden, outputs, off)}});
        break;
    case ModelKind::multi_head:
        trunk_.layers = {add_layer(input_dim, hidden, off), add_layer(hidden, hidden, off)};
        for (std::size_t i = 0; i < outputs; ++i) heads_.push_back(LayerChain{{add_layer(hidden, 1, off)}});
        break;
    case ModelKind::multiple:
        for (std::size_t i = 0; i < outputs; ++i) {
            heads_.push_back(LayerChain{{add_layer(input_dim, hidden, off), add_layer(hidden, hidden, off),
                                         add_layer(hidden, 1, off)}});
        }
        break;
    }
    params_.assign(off, 0.0);
}

std::pair<std::size_t, std::size_t> MlpSurrogate::task_location(std::size_t task) const {
    if (task >= outputs_) throw DimensionError("task index out of range");
    if (kind_ == ModelKind::end_to_end) return {0, task};
    return {task, 0};
}

void MlpSurrogate::initialize(Rng& rng) {
    auto init_chain = [&](const LayerChain& chain) {
        for (const DenseLayer& l : chain.layers) {
            const double limit = std::sqrt(6.0 / static_cast<double>(l.in));
            for (std::size_t i = 0; i < l.in * l.out; ++i) params_[l.w + i] = rng.uniform(-limit, limit);
            for (std::size_t i = 0; i < l.out; ++i) params_[l.b + i] = 0.0;
        }
    };
    init_chain(trunk_);
    for (const auto& h : heads_) init_chain(h);
}

PointSet MlpSurrogate::forward_batch(const std::vector<Genotype>& xs) const {
    if (xs.empty()) return {};
    RowMat t = run_chain(trunk_, params_, to_matrix(xs, input_dim_), true, nullptr);
    PointSet out(xs.size(), ObjectiveVector(outputs_));
    std::size_t col = 0;
    for (const auto& head : heads_) {
        RowMat y = run_chain(head, params_, t, false, nullptr);
        for (Eigen::Index c = 0; c < y.cols(); ++c, ++col) {
            for (std::size_t i = 0; i < xs.size(); ++i) out[i][col] = y(static_cast<Eigen::Index>(i), c);
        }
    }
    return out;
}

ObjectiveVector MlpSurrogate::forward(std::span<const double> x) const {
    return forward_batch({Genotype(x.begin(), x.end())}).front();
}

PointSet MlpSurrogate::predict_raw(const std::vector<Genotype>& xs) const {
    return stats.denormalize(forward_batch(xs));
}

DenseLayer MlpSurrogate::shared_layer() const {
    switch (kind_) {
    case ModelKind::end_to_end: return heads_.front().layers.back();
    case ModelKind::multi_head: return trunk_.layers.back();
    case ModelKind::multiple: break;
    }
    throw CapabilityError("multiple-models surrogates share no parameters");
}

TaskGradients backward(const MlpSurrogate& model, const std::vector<Genotype>& xs, const PointSet& targets) {
    if (xs.empty()) throw EmptyInputError("backward: empty batch");
    if (targets.size() != xs.size()) throw DimensionError("backward: batch and target sizes differ");
    const std::size_t m = model.outputs();
    for (const auto& y : targets) {
        if (y.size() != m) throw DimensionError("backward: target width mismatch");
    }
    const auto& p = model.params();
    const auto b = static_cast<Eigen::Index>(xs.size());
    const double scale = 2.0 / static_cast<double>(xs.size());

    ChainCache trunk_cache;
    const bool has_trunk = !model.trunk().layers.empty();
    RowMat t = run_chain(model.trunk(), p, to_matrix(xs, model.input_dim()), true, &trunk_cache);

    std::vector<ChainCache> head_cache(model.heads().size());
    std::vector<RowMat> head_out;
    for (std::size_t h = 0; h < model.heads().size(); ++h) {
        head_out.push_back(run_chain(model.heads()[h], p, t, false, &head_cache[h]));
    }

    TaskGradients tg;
    tg.losses.assign(m, 0.0);
    tg.grads.assign(m, std::vector<double>(p.size(), 0.0));
    for (std::size_t task = 0; task < m; ++task) {
        const auto [h, c] = model.task_location(task);
        const RowMat& out = head_out[h];
        RowMat dz = RowMat::Zero(b, out.cols());
        double loss = 0.0;
        for (Eigen::Index i = 0; i < b; ++i) {
            const double r = out(i, static_cast<Eigen::Index>(c)) - targets[static_cast<std::size_t>(i)][task];
            loss += r * r;
            dz(i, static_cast<Eigen::Index>(c)) = scale * r;
        }
        tg.losses[task] = loss / static_cast<double>(xs.size());
        RowMat dt = backprop_chain(model.heads()[h], p, head_cache[h], std::move(dz), tg.grads[task]);
        if (has_trunk) {
            const RowMat& last_pre = trunk_cache.pre.back();
            RowMat dzt = dt.cwiseProduct((last_pre.array() > 0.0).cast<double>().matrix());
            backprop_chain(model.trunk(), p, trunk_cache, std::move(dzt), tg.grads[task]);
        }
    }
    return tg;
}

double total_loss(const MlpSurrogate& model, const std::vector<Genotype>& xs, const PointSet& targets) {
    if (targets.size() != xs.size()) throw DimensionError("total_loss: batch and target sizes differ");
    const PointSet pred = model.forward_batch(xs);
    double total = 0.0;
    for (std::size_t k = 0; k < model.outputs(); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) s += (pred[i][k] - targets[i][k]) * (pred[i][k] - targets[i][k]);
        total += s / static_cast<double>(xs.size());
    }
    return total;
}

std::string checkpoint_to_json(const MlpSurrogate& model, const TrainConfig& cfg) {
    json j = {
        {"format", "offmoo-mlp"},
        {"version", 1},
        {"task", model.task},
        {"kind", to_string(model.kind())},
        {"input_dim", model.input_dim()},
        {"hidden", model.hidden()},
        {"outputs", model.outputs()},
        {"stats", {{"lo", model.stats.lo}, {"hi", model.stats.hi}}},
        {"config",
         {{"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"lr", cfg.lr},
          {"decay", cfg.decay},
          {"seed", cfg.seed},
          {"hidden", cfg.hidden},
          {"mtl", to_string(cfg.mtl)},
          {"gradnorm_alpha", cfg.gradnorm_alpha},
          {"keep_fraction", cfg.keep_fraction}}},
        {"params", model.params()},
    };
    return j.dump() + "\n";
}

MlpSurrogate checkpoint_from_json(const std::string& text, TrainConfig* cfg) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "offmoo-mlp") throw SchemaError("checkpoint: unknown format");
        MlpSurrogate model(model_kind_from_string(j.at("kind").get<std::string>()), j.at("input_dim").get<std::size_t>(),
                           j.at("hidden").get<std::size_t>(), j.at("outputs").get<std::size_t>());
        auto params = j.at("params").get<std::vector<double>>();
        if (params.size() != model.param_count()) throw SchemaError("checkpoint: parameter count mismatch");
        model.params() = std::move(params);
        model.task = j.at("task").get<std::string>();
        model.stats.lo = j.at("stats").at("lo").get<std::vector<double>>();
        model.stats.hi = j.at("stats").at("hi").get<std::vector<double>>();
        if (model.stats.dim() != model.outputs() || model.stats.hi.size() != model.outputs()) {
            throw SchemaError("checkpoint: normalization stats do not match the output width");
        }
        if (cfg) {
            const json& c = j.at("config");
            cfg->epochs = c.at("epochs").get<std::size_t>();
            cfg->batch_size = c.at("batch_size").get<std::size_t>();
            cfg->lr = c.at("lr").get<double>();
            cfg->decay = c.at("decay").get<double>();
            cfg->seed = c.at("seed").get<std::uint64_t>();
            cfg->hidden = c.at("hidden").get<std::size_t>();
            cfg->mtl = mtl_kind_from_string(c.at("mtl").get<std::string>());
            cfg->gradnorm_alpha = c.at("gradnorm_alpha").get<double>();
            cfg->keep_fraction = c.at("keep_fraction").get<double>();
        }
        return model;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const MlpSurrogate& model, const TrainConfig& cfg, const std::filesystem::path& path) {
    write_text_file(path, checkpoint_to_json(model, cfg));
}

MlpSurrogate load_checkpoint(const std::filesystem::path& path, TrainConfig* cfg) {
    return checkpoint_from_json(read_text_file(path), cfg);
}

}  // namespace offmoo
