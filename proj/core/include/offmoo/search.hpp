#pragma once

#include "offmoo/datagen.hpp"
#include "offmoo/gp.hpp"
#include "offmoo/moea.hpp"
#include "offmoo/nn.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace offmoo {

struct SearchConfig {
    Algorithm algorithm = Algorithm::nsga2;
    std::size_t pop_size = 256;
    std::size_t generations = 50;
    OperatorConfig ops;
    std::uint64_t seed = 0;

    void validate() const;
};

inline constexpr std::size_t kNnSearchGenerations = 50;
inline constexpr std::size_t kGpSearchGenerations = 500;

/// Maps candidates to the objectives the search minimizes.
using SurrogateFn = std::function<PointSet(const std::vector<Genotype>&)>;

/// Denormalized network predictions.
SurrogateFn nn_objectives(const MlpSurrogate& model);
/// Lower confidence bounds, normalized units.
SurrogateFn gp_objectives(const GpSurrogate& gp, double beta);
/// The true oracle as a surrogate, for control experiments.
SurrogateFn oracle_objectives(const Problem& problem);

/// The best min(K, N) dataset points in NSGA-II order, scored by the
/// surrogate.
Population init_population(const OfflineDataset& ds, std::size_t k, const SurrogateFn& surrogate,
                           std::vector<std::string>* warnings = nullptr);

struct CandidateBatch {
    std::string task;
    std::vector<Genotype> genotypes;
    PointSet predicted;
    /// Distinct points on the surrogate-space first front of the final
    /// population; fewer than 3 marks a collapsed surrogate.
    std::size_t front_size = 0;
    bool collapse = false;
    std::map<std::string, std::string> provenance;
};

inline constexpr std::size_t kCollapseThreshold = 3;

/// Runs the MOEA against the surrogate only, then returns the NSGA-II best
/// distinct candidates of the final population by surrogate objectives.
CandidateBatch offline_search(const SurrogateFn& surrogate, const OfflineDataset& ds, const Problem& problem,
                              const SearchConfig& cfg);

struct EvalReport {
    std::string task;
    PointSet objectives;
    double percentile = 100.0;
    double hv = 0.0;       // at `percentile`
    double hv_100 = 0.0;
    double hv_50 = 0.0;
    std::optional<double> igd;
    bool collapse = false;
    double d_best_hv = 0.0;
    std::map<std::string, std::string> provenance;
};

/// One batched call of `oracle` on the candidates, then HV in the dataset's
/// evaluation space (reference 1.1 per objective) and IGD when the task has
/// a known front.
EvalReport evaluate_batch(const Problem& problem, const OfflineDataset& ds, const CandidateBatch& batch,
                          double percentile, const BatchEvaluator& oracle);
EvalReport evaluate_batch(const Problem& problem, const OfflineDataset& ds, const CandidateBatch& batch,
                          double percentile);

std::string batch_to_json(const CandidateBatch& batch);
CandidateBatch batch_from_json(const std::string& text);
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

}  // namespace offmoo
