#pragma once

#include "offmoo/common.hpp"
#include "offmoo/pareto.hpp"
#include "offmoo/problems.hpp"

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace offmoo {

// ---------------------------------------------------------------------------
// Genetic operators
// ---------------------------------------------------------------------------

struct OperatorConfig {
    double sbx_eta = 15.0;
    double sbx_prob = 0.9;
    double pm_eta = 20.0;
    /// Per-gene mutation probability; negative means 1/D.
    double pm_prob = -1.0;

    bool order_crossover = true;
    bool inversion_mutation = true;
    /// Apply the task repair (start-from-zero, portfolio weights) to offspring.
    bool repair = true;
    double perm_crossover_prob = 0.9;
    double perm_mutation_prob = 1.0;

    void validate() const;
};

/// SBX spread factor for a uniform draw u.
double sbx_beta(double u, double eta);

/// One gene of SBX without bounds handling.
std::pair<double, double> sbx_gene(double p1, double p2, double u, double eta);

std::pair<Genotype, Genotype> sbx_crossover(std::span<const double> p1, std::span<const double> p2,
                                            const SearchSpace& space, const OperatorConfig& cfg, Rng& rng);

/// Polynomial-mutation perturbation for a uniform draw u, in units of the
/// variable range.
double pm_delta(double u, double eta);

Genotype pm_mutation(std::span<const double> x, const SearchSpace& space, const OperatorConfig& cfg, Rng& rng);

/// OX1 with an explicit cut [first, last] copied from p1.
Genotype order_crossover(std::span<const double> p1, std::span<const double> p2, std::size_t first,
                         std::size_t last);
Genotype order_crossover(std::span<const double> p1, std::span<const double> p2, Rng& rng);

/// Reverses the segment [first, last].
Genotype inversion_mutation(std::span<const double> x, std::size_t first, std::size_t last);
Genotype inversion_mutation(std::span<const double> x, Rng& rng);

// ---------------------------------------------------------------------------
// Populations and algorithms
// ---------------------------------------------------------------------------

struct Population {
    std::vector<Genotype> members;
    PointSet objectives;
    std::vector<std::size_t> ranks;
    std::vector<double> crowding;

    std::size_t size() const { return members.size(); }
};

using BatchEvaluator = std::function<PointSet(const std::vector<Genotype>&)>;
using RepairFn = std::function<Genotype(std::span<const double>)>;

/// Returns the survivor indices into the pooled objectives, or nullopt to let
/// the algorithm run its own elitist survival.
using SurvivalPolicy =
    std::function<std::optional<std::vector<std::size_t>>(const PointSet& pool, std::size_t mu, Rng& rng)>;

using GenerationObserver = std::function<void(std::size_t generation, const Population& pop)>;

/// Everything an MOEA needs to know about the space it searches and how
/// candidates are scored (true oracle or surrogate).
struct MoeaProblem {
    SearchSpace space;
    RepairFn repair;
    BatchEvaluator evaluate;
    OperatorConfig ops;
};

MoeaProblem make_moea_problem(const Problem& problem, BatchEvaluator evaluate, OperatorConfig ops = {});
/// Evaluates with the problem's own oracle.
MoeaProblem make_moea_problem(const Problem& problem, OperatorConfig ops = {});

struct RunHooks {
    SurvivalPolicy survival;        // empty: standard elitist survival
    GenerationObserver observer;    // called after every generation
};

/// Fills ranks and crowding (crowding computed per front).
void assign_rank_crowding(Population& pop);

Population make_population(std::vector<Genotype> members, const BatchEvaluator& evaluate);
Population random_population(const Problem& problem, std::size_t mu, Rng& rng);

Population nsga2_run(const MoeaProblem& problem, Population init, std::size_t generations, Rng& rng,
                     const RunHooks& hooks = {});
Population moead_run(const MoeaProblem& problem, Population init, std::size_t generations, Rng& rng,
                     const RunHooks& hooks = {}, std::size_t neighborhood = 20);
Population nsga3_run(const MoeaProblem& problem, Population init, std::size_t generations, Rng& rng,
                     const RunHooks& hooks = {});

enum class Algorithm { nsga2, moead, nsga3 };
std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

Population run_algorithm(Algorithm algo, const MoeaProblem& problem, Population init, std::size_t generations,
                         Rng& rng, const RunHooks& hooks = {});

// ---------------------------------------------------------------------------
// Decomposition helpers
// ---------------------------------------------------------------------------

/// C(h + m - 1, m - 1).
std::size_t das_dennis_count(std::size_t m, std::size_t h);
/// All simplex-lattice weight vectors with h divisions, lexicographic order.
PointSet das_dennis(std::size_t m, std::size_t h);
/// Lattice with the fewest divisions giving at least `count` directions.
PointSet reference_directions(std::size_t m, std::size_t count);
/// Exactly mu MOEA/D weights: the smallest covering lattice thinned by
/// greedy farthest-point selection when it overshoots.
PointSet moead_weights(std::size_t m, std::size_t mu);

/// max_i w_i * |f_i - z_i|.
double tchebycheff(std::span<const double> f, std::span<const double> w, std::span<const double> ideal);

/// NSGA-III normalization of a point set by its ideal point and the
/// hyperplane through its extreme points.
PointSet nsga3_normalize(const PointSet& objectives);

struct Association {
    std::vector<std::size_t> direction;
    std::vector<double> distance;
};

/// Nearest reference direction (perpendicular distance) of each point.
Association associate(const PointSet& normalized, const PointSet& directions);

/// NSGA-III environmental selection over a pool.
std::vector<std::size_t> nsga3_survival(const PointSet& pool, std::size_t mu, const PointSet& directions,
                                        Rng& rng);

}  // namespace offmoo
