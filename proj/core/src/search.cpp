#include "offmoo/search.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <set>
#include <unordered_set>

namespace offmoo {

using nlohmann::json;

void SearchConfig::validate() const {
    if (pop_size < 2) throw ConfigError("search pop_size must be at least 2");
    ops.validate();
}

SurrogateFn nn_objectives(const MlpSurrogate& model) {
    return [&model](const std::vector<Genotype>& xs) { return model.predict_raw(xs); };
}

SurrogateFn gp_objectives(const GpSurrogate& gp, double beta) {
    if (!(beta >= 0.0)) throw ConfigError("LCB beta must be non-negative");
    return [&gp, beta](const std::vector<Genotype>& xs) {
        PointSet out;
        out.reserve(xs.size());
        for (const auto& x : xs) out.push_back(gp.lcb(x, beta));
        return out;
    };
}

SurrogateFn oracle_objectives(const Problem& problem) {
    return [&problem](const std::vector<Genotype>& xs) { return problem.evaluate_all(xs); };
}

Population init_population(const OfflineDataset& ds, std::size_t k, const SurrogateFn& surrogate,
                           std::vector<std::string>* warnings) {
    if (ds.size() == 0) throw EmptyInputError("init_population: empty dataset");
    if (k > ds.size() && warnings) {
        warnings->push_back("population size " + std::to_string(k) + " exceeds the dataset size " +
                            std::to_string(ds.size()) + "; using the whole dataset");
    }
    std::vector<Genotype> members;
    for (std::size_t i : nsga2_select(ds.y_raw, std::min(k, ds.size()))) members.push_back(ds.x[i]);
    return make_population(std::move(members), surrogate);
}

namespace {

std::string genotype_key(const Genotype& g) {
    std::string key(g.size() * sizeof(double), '\0');
    if (!g.empty()) std::memcpy(key.data(), g.data(), key.size());
    return key;
}

}  // namespace

CandidateBatch offline_search(const SurrogateFn& surrogate, const OfflineDataset& ds, const Problem& problem,
                              const SearchConfig& cfg) {
    cfg.validate();
    if (ds.size() == 0) throw EmptyInputError("offline_search: empty dataset");
    if (ds.task != problem.task().name) {
        throw ConfigError("dataset task " + ds.task + " does not match search task " + problem.task().name);
    }
    if (ds.x.front().size() != problem.task().space.dim()) {
        throw DimensionError("dataset genotypes do not match the task's search space");
    }
    const BatchEvaluator checked = [&](const std::vector<Genotype>& xs) {
        PointSet ys = surrogate(xs);
        if (ys.size() != xs.size()) throw DimensionError("surrogate returned the wrong number of predictions");
        for (const auto& y : ys) {
            if (y.size() != ds.objectives()) throw DimensionError("surrogate output width does not match the task");
        }
        return ys;
    };

    Population init = init_population(ds, cfg.pop_size, checked);
    const std::size_t k = init.size();
    const MoeaProblem moea = make_moea_problem(problem, checked, cfg.ops);
    Rng rng(cfg.seed);
    const Population final_pop = run_algorithm(cfg.algorithm, moea, std::move(init), cfg.generations, rng);

    CandidateBatch batch;
    batch.task = ds.task;
    std::unordered_set<std::string> seen;
    for (std::size_t i : nsga2_order(final_pop.objectives)) {
        if (batch.genotypes.size() >= k) break;
        Genotype g = problem.repair(final_pop.members[i]);
        if (!seen.insert(genotype_key(g)).second) continue;
        batch.genotypes.push_back(std::move(g));
    }
    batch.predicted = checked(batch.genotypes);

    const FrontPartition part = non_dominated_sort(final_pop.objectives);
    std::set<ObjectiveVector> distinct;
    for (std::size_t i : part.fronts.front()) distinct.insert(final_pop.objectives[i]);
    batch.front_size = distinct.size();
    batch.collapse = batch.front_size < kCollapseThreshold;

    batch.provenance["algorithm"] = to_string(cfg.algorithm);
    batch.provenance["pop_size"] = std::to_string(cfg.pop_size);
    batch.provenance["generations"] = std::to_string(cfg.generations);
    batch.provenance["seed"] = std::to_string(cfg.seed);
    return batch;
}

EvalReport evaluate_batch(const Problem& problem, const OfflineDataset& ds, const CandidateBatch& batch,
                          double percentile, const BatchEvaluator& oracle) {
    if (batch.genotypes.empty()) throw EmptyInputError("evaluate_batch: empty batch");
    if (percentile_removed_count(batch.genotypes.size(), percentile) > batch.genotypes.size()) {
        throw ConfigError("invalid percentile");
    }
    for (const auto& g : batch.genotypes) problem.validate(g);

    EvalReport r;
    r.task = batch.task;
    r.percentile = percentile;
    r.collapse = batch.collapse;
    r.provenance = batch.provenance;
    r.objectives = oracle(batch.genotypes);
    if (r.objectives.size() != batch.genotypes.size()) throw DimensionError("oracle returned the wrong count");

    auto hv_at = [&](double p) {
        const auto keep = percentile_filter(r.objectives, p);
        return evaluation_hv(ds, gather(r.objectives, keep));
    };
    r.hv = hv_at(percentile);
    r.hv_100 = hv_at(100.0);
    r.hv_50 = hv_at(50.0);
    r.d_best_hv = d_best(ds, 256).hv;
    if (problem.task().has_true_front) {
        const PointSet front = true_pareto_front(problem.task(), 1000);
        r.igd = igd(ds.eval_stats.normalize(r.objectives), ds.eval_stats.normalize(front));
    }
    return r;
}

EvalReport evaluate_batch(const Problem& problem, const OfflineDataset& ds, const CandidateBatch& batch,
                          double percentile) {
    return evaluate_batch(problem, ds, batch, percentile,
                          [&problem](const std::vector<Genotype>& xs) { return problem.evaluate_all(xs); });
}

std::string batch_to_json(const CandidateBatch& batch) {
    json j = {
        {"format", "offmoo-batch"},
        {"task", batch.task},
        {"provenance", batch.provenance},
        {"front_size", batch.front_size},
        {"collapse", batch.collapse},
        {"genotypes", batch.genotypes},
        {"predicted", batch.predicted},
    };
    return j.dump(1) + "\n";
}

CandidateBatch batch_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "offmoo-batch") throw SchemaError("batch: unknown format");
        CandidateBatch b;
        b.task = j.at("task").get<std::string>();
        b.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
        b.front_size = j.at("front_size").get<std::size_t>();
        b.collapse = j.at("collapse").get<bool>();
        b.genotypes = j.at("genotypes").get<std::vector<Genotype>>();
        b.predicted = j.at("predicted").get<PointSet>();
        if (b.predicted.size() != b.genotypes.size()) throw SchemaError("batch: prediction count mismatch");
        return b;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("batch: ") + e.what());
    }
}

std::string report_to_json(const EvalReport& r) {
    json j = {
        {"format", "offmoo-report"},
        {"task", r.task},
        {"provenance", r.provenance},
        {"percentile", r.percentile},
        {"hv", r.hv},
        {"hv_100", r.hv_100},
        {"hv_50", r.hv_50},
        {"igd", r.igd ? json(*r.igd) : json(nullptr)},
        {"collapse", r.collapse},
        {"d_best_hv", r.d_best_hv},
        {"objectives", r.objectives},
    };
    return j.dump(1) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "offmoo-report") throw SchemaError("report: unknown format");
        EvalReport r;
        r.task = j.at("task").get<std::string>();
        r.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
        r.percentile = j.at("percentile").get<double>();
        r.hv = j.at("hv").get<double>();
        r.hv_100 = j.at("hv_100").get<double>();
        r.hv_50 = j.at("hv_50").get<double>();
        if (!j.at("igd").is_null()) r.igd = j.at("igd").get<double>();
        r.collapse = j.at("collapse").get<bool>();
        r.d_best_hv = j.at("d_best_hv").get<double>();
        r.objectives = j.at("objectives").get<PointSet>();
        return r;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("report: ") + e.what());
    }
}

}  // namespace offmoo
