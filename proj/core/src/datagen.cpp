#include "offmoo/datagen.hpp"
#include "offmoo/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace offmoo {

using nlohmann::json;

void CollectionConfig::validate() const {
    if (algorithms.empty()) throw ConfigError("collection needs at least one algorithm");
    if (runs == 0) throw ConfigError("collection runs must be positive");
    if (pop_size < 2) throw ConfigError("collection pop_size must be at least 2");
    if (collect_every == 0) throw ConfigError("collect_every must be positive");
    if (!(amateur_p >= 0.0 && amateur_p <= 1.0)) throw ConfigError("amateur probability must lie in [0, 1]");
    ops.validate();
}

void OfflineDataset::validate() const {
    if (x.size() != y_raw.size() || x.size() != y_norm.size()) {
        throw DimensionError("dataset: X, Y_raw and Y_norm sizes differ");
    }
    const std::size_t m = objectives();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y_raw[i].size() != m || y_norm[i].size() != m) throw DimensionError("dataset: ragged objectives");
        if (!all_finite(x[i]) || !all_finite(y_raw[i]) || !all_finite(y_norm[i])) {
            throw NumericError("dataset: non-finite value in row " + std::to_string(i));
        }
    }
    if (!x.empty() && (stats.dim() != m || eval_stats.dim() != m || reference.values.size() != m)) {
        throw DimensionError("dataset: statistics do not match the objective count");
    }
}

Problem problem_for(const OfflineDataset& ds) {
    return Problem(task_by_name(ds.task), ds.instance);
}

std::vector<std::size_t> amateur_survival(const PointSet& pool, std::size_t mu, double p, Rng& rng) {
    if (mu > pool.size()) throw SizeError("amateur_survival: mu exceeds pool size");
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("amateur probability must lie in [0, 1]");
    if (p >= 1.0 || rng.uniform() < p) return nsga2_select(pool, mu);
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < mu; ++i) {
        const std::size_t j = i + rng.below(idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(mu);
    return idx;
}

SurvivalPolicy make_amateur_policy(double p) {
    return [p](const PointSet& pool, std::size_t mu, Rng& rng) -> std::optional<std::vector<std::size_t>> {
        // Elitist survival is left to the algorithm itself so that MOEA/D
        // and NSGA-III keep their own replacement schemes.
        if (p >= 1.0 || rng.uniform() < p) return std::nullopt;
        std::vector<std::size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < mu; ++i) {
            const std::size_t j = i + rng.below(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(mu);
        return idx;
    };
}

namespace {

std::string genotype_key(const Genotype& g) {
    std::string key(g.size() * sizeof(double), '\0');
    if (!g.empty()) std::memcpy(key.data(), g.data(), key.size());
    return key;
}

json stats_to_json(const NormStats& s) { return {{"lo", s.lo}, {"hi", s.hi}}; }

NormStats stats_from_json(const json& j) {
    return NormStats{j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>()};
}

void finish_collection(OfflineDataset& ds) {
    ds.stats = fit_norm_stats(ds.y_raw);
    ds.eval_stats = ds.stats;
    ds.reference = nadir_reference(ds.y_raw);
    ds.y_norm = ds.stats.normalize(ds.y_raw);
}

}  // namespace

OfflineDataset collect_dataset(const Problem& problem, const CollectionConfig& cfg,
                               std::vector<std::string>* warnings) {
    cfg.validate();
    OfflineDataset ds;
    ds.task = problem.task().name;
    ds.instance = problem.instance();
    Provenance& prov = ds.provenance;
    prov.runs = cfg.runs;
    prov.pop_size = cfg.pop_size;
    prov.generations = cfg.generations;
    prov.collect_every = cfg.collect_every;
    prov.amateur_p = cfg.amateur_p;
    prov.seed = cfg.seed;
    prov.max_size = cfg.max_size;

    std::unordered_set<std::string> seen;
    auto keep = [&](const Population& pop) {
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (seen.insert(genotype_key(pop.members[i])).second) {
                ds.x.push_back(pop.members[i]);
                ds.y_raw.push_back(pop.objectives[i]);
            }
        }
    };

    const MoeaProblem moea = make_moea_problem(problem, cfg.ops);
    RunHooks hooks;
    hooks.survival = make_amateur_policy(cfg.amateur_p);
    hooks.observer = [&](std::size_t gen, const Population& pop) {
        if (gen % cfg.collect_every == 0) keep(pop);
    };

    for (Algorithm algo : cfg.algorithms) {
        prov.algorithms.push_back(to_string(algo));
        for (std::size_t r = 0; r < cfg.runs; ++r) {
            const std::uint64_t run_seed = derive_seed(derive_seed(cfg.seed, to_string(algo)), r);
            prov.run_seeds.push_back(run_seed);
            Rng rng(run_seed);
            Population init = random_population(problem, cfg.pop_size, rng);
            keep(init);
            run_algorithm(algo, moea, std::move(init), cfg.generations, rng, hooks);
        }
    }

    if (cfg.max_size > 0) {
        if (ds.x.size() > cfg.max_size) {
            Rng rng(derive_seed(cfg.seed, "subsample"));
            std::vector<std::size_t> idx(ds.x.size());
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::size_t i = 0; i < cfg.max_size; ++i) {
                const std::size_t j = i + rng.below(idx.size() - i);
                std::swap(idx[i], idx[j]);
            }
            idx.resize(cfg.max_size);
            std::sort(idx.begin(), idx.end());
            std::vector<Genotype> x;
            PointSet y;
            for (std::size_t i : idx) {
                x.push_back(std::move(ds.x[i]));
                y.push_back(std::move(ds.y_raw[i]));
            }
            ds.x = std::move(x);
            ds.y_raw = std::move(y);
        } else if (ds.x.size() < cfg.max_size && warnings) {
            warnings->push_back("collected " + std::to_string(ds.x.size()) + " unique points, fewer than the requested " +
                                std::to_string(cfg.max_size));
        }
    }
    finish_collection(ds);
    ds.validate();
    return ds;
}

OfflineDataset dataset_subset(const OfflineDataset& ds, const std::vector<std::size_t>& idx) {
    if (idx.empty()) throw EmptyInputError("dataset subset would be empty");
    OfflineDataset out;
    out.task = ds.task;
    out.instance = ds.instance;
    out.eval_stats = ds.eval_stats;
    out.reference = ds.reference;
    out.provenance = ds.provenance;
    out.x.reserve(idx.size());
    out.y_raw.reserve(idx.size());
    for (std::size_t i : idx) {
        out.x.push_back(ds.x.at(i));
        out.y_raw.push_back(ds.y_raw.at(i));
    }
    out.stats = fit_norm_stats(out.y_raw);
    out.y_norm = out.stats.normalize(out.y_raw);
    return out;
}

OfflineDataset build_training_set(const OfflineDataset& ds, double remove_top_percent) {
    if (!(remove_top_percent >= 0.0 && remove_top_percent < 100.0)) {
        throw ConfigError("remove_top_percent must lie in [0, 100)");
    }
    if (ds.size() == 0) throw EmptyInputError("build_training_set: empty dataset");
    const std::size_t removed =
        remove_top_percent == 0.0 ? 0 : percentile_removed_count(ds.size(), 100.0 - remove_top_percent);
    const std::vector<std::size_t> order = nsga2_order(ds.y_raw);
    std::vector<std::size_t> keep(order.begin() + static_cast<std::ptrdiff_t>(removed), order.end());
    std::sort(keep.begin(), keep.end());
    OfflineDataset out = dataset_subset(ds, keep);
    out.provenance.removed_top_percent = remove_top_percent;
    return out;
}

ReferencePoint normalized_reference(std::size_t m) { return ReferencePoint{std::vector<double>(m, 1.1)}; }

double evaluation_hv(const OfflineDataset& ds, const PointSet& raw) {
    if (raw.empty()) return 0.0;
    return hypervolume(ds.eval_stats.normalize(raw), normalized_reference(ds.objectives()));
}

BestSet d_best(const OfflineDataset& ds, std::size_t n) {
    if (ds.size() == 0) throw EmptyInputError("d_best: empty dataset");
    BestSet best;
    best.indices = nsga2_select(ds.y_raw, std::min(n, ds.size()));
    best.objectives = gather(ds.y_raw, best.indices);
    best.hv = evaluation_hv(ds, best.objectives);
    return best;
}

void save_dataset(const OfflineDataset& ds, const std::filesystem::path& dir) {
    ds.validate();
    const Provenance& p = ds.provenance;
    json meta = {
        {"task", ds.task},
        {"instance", ds.instance ? json::parse(instance_to_json(*ds.instance)) : json(nullptr)},
        {"size", ds.size()},
        {"dims", ds.x.empty() ? 0 : ds.x.front().size()},
        {"objectives", ds.objectives()},
        {"provenance",
         {{"algorithms", p.algorithms},
          {"run_seeds", p.run_seeds},
          {"runs", p.runs},
          {"pop_size", p.pop_size},
          {"generations", p.generations},
          {"collect_every", p.collect_every},
          {"amateur_p", p.amateur_p},
          {"seed", p.seed},
          {"max_size", p.max_size},
          {"removed_top_percent", p.removed_top_percent},
          {"keep_fraction", p.keep_fraction}}},
        {"train_stats", stats_to_json(ds.stats)},
        {"eval_stats", stats_to_json(ds.eval_stats)},
        {"reference_point", ds.reference.values},
        {"normalized_reference_point", ds.eval_stats.normalize(ds.reference.values)},
    };

    std::string csv;
    const std::size_t d = ds.x.empty() ? 0 : ds.x.front().size();
    for (std::size_t j = 0; j < d; ++j) csv += "x" + std::to_string(j) + ",";
    for (std::size_t k = 0; k < ds.objectives(); ++k) {
        csv += "f" + std::to_string(k);
        csv += k + 1 < ds.objectives() ? "," : "\n";
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (double v : ds.x[i]) csv += format_double(v) + ",";
        for (std::size_t k = 0; k < ds.y_raw[i].size(); ++k) {
            csv += format_double(ds.y_raw[i][k]);
            csv += k + 1 < ds.y_raw[i].size() ? "," : "\n";
        }
    }
    std::filesystem::create_directories(dir);
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
    write_text_file(dir / "data.csv", csv);
}

OfflineDataset load_dataset(const std::filesystem::path& dir) {
    json meta;
    try {
        meta = json::parse(read_text_file(dir / "meta.json"));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("dataset meta.json: ") + e.what());
    }
    OfflineDataset ds;
    std::size_t d = 0;
    std::size_t m = 0;
    std::size_t n = 0;
    try {
        ds.task = meta.at("task").get<std::string>();
        if (!meta.at("instance").is_null()) ds.instance = instance_from_json(meta.at("instance").dump());
        n = meta.at("size").get<std::size_t>();
        d = meta.at("dims").get<std::size_t>();
        m = meta.at("objectives").get<std::size_t>();
        const json& p = meta.at("provenance");
        Provenance& prov = ds.provenance;
        prov.algorithms = p.at("algorithms").get<std::vector<std::string>>();
        prov.run_seeds = p.at("run_seeds").get<std::vector<std::uint64_t>>();
        prov.runs = p.at("runs").get<std::size_t>();
        prov.pop_size = p.at("pop_size").get<std::size_t>();
        prov.generations = p.at("generations").get<std::size_t>();
        prov.collect_every = p.at("collect_every").get<std::size_t>();
        prov.amateur_p = p.at("amateur_p").get<double>();
        prov.seed = p.at("seed").get<std::uint64_t>();
        prov.max_size = p.at("max_size").get<std::size_t>();
        prov.removed_top_percent = p.at("removed_top_percent").get<double>();
        prov.keep_fraction = p.at("keep_fraction").get<double>();
        ds.stats = stats_from_json(meta.at("train_stats"));
        ds.eval_stats = stats_from_json(meta.at("eval_stats"));
        ds.reference.values = meta.at("reference_point").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("dataset meta.json: ") + e.what());
    }

    std::istringstream in(read_text_file(dir / "data.csv"));
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("dataset data.csv: missing header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size()) {
                throw SchemaError("dataset data.csv: bad number '" + cell + "'");
            }
            row.push_back(v);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (row.size() != d + m) throw SchemaError("dataset data.csv: row has the wrong number of columns");
        ds.x.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(d));
        ds.y_raw.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(d), row.end());
    }
    if (ds.size() != n) throw SchemaError("dataset data.csv: row count does not match meta.json");
    ds.y_norm = ds.stats.normalize(ds.y_raw);
    ds.validate();
    return ds;
}

}  // namespace offmoo
