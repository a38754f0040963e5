#pragma once

#include "offmoo/common.hpp"
#include "offmoo/moea.hpp"
#include "offmoo/pareto.hpp"
#include "offmoo/problems.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace offmoo {

struct CollectionConfig {
    std::vector<Algorithm> algorithms{Algorithm::nsga2, Algorithm::moead, Algorithm::nsga3};
    std::size_t runs = 4;
    std::size_t pop_size = 100;
    std::size_t generations = 50;
    /// Probability of elitist survival in each generation.
    double amateur_p = 0.9;
    std::size_t collect_every = 1;
    std::uint64_t seed = 0;
    /// 0 keeps everything; otherwise a seeded subsample of this size.
    std::size_t max_size = 0;
    OperatorConfig ops;

    void validate() const;
};

struct Provenance {
    std::vector<std::string> algorithms;
    std::vector<std::uint64_t> run_seeds;
    std::size_t runs = 0;
    std::size_t pop_size = 0;
    std::size_t generations = 0;
    std::size_t collect_every = 1;
    double amateur_p = 1.0;
    std::uint64_t seed = 0;
    std::size_t max_size = 0;
    /// Percentage of best points removed when building the training set.
    double removed_top_percent = 0.0;
    /// Fraction kept by data pruning (1 when unpruned).
    double keep_fraction = 1.0;
};

struct OfflineDataset {
    std::string task;
    std::optional<CombinatorialInstance> instance;
    std::vector<Genotype> x;
    PointSet y_raw;
    PointSet y_norm;
    /// Normalization the surrogates train in; refit whenever the set shrinks.
    NormStats stats;
    /// Normalization of the full collected dataset. HV is always reported in
    /// this space, against reference (1.1, ..., 1.1).
    NormStats eval_stats;
    /// Nadir-derived reference point of the full collection, raw units.
    ReferencePoint reference;
    Provenance provenance;

    std::size_t size() const { return x.size(); }
    std::size_t objectives() const { return y_raw.empty() ? 0 : y_raw.front().size(); }
    void validate() const;
};

/// The true oracle the dataset was drawn from.
Problem problem_for(const OfflineDataset& ds);

/// With probability p the elitist nsga2_select survivors, otherwise mu
/// members sampled uniformly without replacement.
std::vector<std::size_t> amateur_survival(const PointSet& pool, std::size_t mu, double p, Rng& rng);
SurvivalPolicy make_amateur_policy(double p);

/// Runs every (algorithm, run) pair with amateur survival and keeps every
/// distinct genotype seen at the sampled generations. Messages about an
/// unreachable max_size are appended to warnings when given.
OfflineDataset collect_dataset(const Problem& problem, const CollectionConfig& cfg,
                               std::vector<std::string>* warnings = nullptr);

/// Subset in the given index order; training stats refit on the subset.
OfflineDataset dataset_subset(const OfflineDataset& ds, const std::vector<std::size_t>& idx);

/// Removes the best floor(K/100 * N) points in NSGA-II order.
OfflineDataset build_training_set(const OfflineDataset& ds, double remove_top_percent);

/// HV of raw objective vectors in the dataset's evaluation space.
double evaluation_hv(const OfflineDataset& ds, const PointSet& raw);
ReferencePoint normalized_reference(std::size_t m);

struct BestSet {
    std::vector<std::size_t> indices;
    PointSet objectives;
    double hv = 0.0;
};

/// The best n points of the dataset in NSGA-II order and their HV.
BestSet d_best(const OfflineDataset& ds, std::size_t n = 256);

// Dataset directory: meta.json + data.csv.
void save_dataset(const OfflineDataset& ds, const std::filesystem::path& dir);
OfflineDataset load_dataset(const std::filesystem::path& dir);

}  // namespace offmoo
