#pragma once

#include "offmoo/common.hpp"
#include "offmoo/pareto.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace offmoo {

enum class SpaceKind { continuous, permutation, simplex };

struct SearchSpace {
    SpaceKind kind = SpaceKind::continuous;
    std::vector<double> lower;  // continuous / simplex bounds
    std::vector<double> upper;
    std::size_t n = 0;          // permutation length or simplex size
    double theta = 0.0;         // simplex minimum weight

    std::size_t dim() const;
    static SearchSpace box(std::vector<double> lo, std::vector<double> hi);
    static SearchSpace permutation_of(std::size_t n);
    static SearchSpace simplex_of(std::size_t n, double theta);
};

enum class TaskFamily {
    dtlz1, dtlz2, dtlz3, dtlz4, dtlz5, dtlz6, dtlz7,
    zdt1, zdt2, zdt3, zdt4, zdt6,
    vlmop1, vlmop2, vlmop3,
    omnitest,
    mo_tsp, mo_cvrp, mo_kp, mo_portfolio,
};

struct TaskSpec {
    std::string name;
    TaskFamily family = TaskFamily::zdt1;
    std::size_t dims = 0;        // D
    std::size_t objectives = 0;  // m
    SearchSpace space;
    /// Published reference point for the task at benchmark scale. Evaluation
    /// uses the nadir-derived reference of the collected dataset instead.
    ReferencePoint reference_point;
    bool has_true_front = false;

    bool combinatorial() const;
};

/// Looks up "zdt1", "dtlz2", "mo_tsp_20", "mo_kp_50", "mo_portfolio", ...
TaskSpec task_by_name(const std::string& name);
std::vector<std::string> synthetic_task_names();
std::vector<std::string> all_task_names();

enum class InstanceKind { tsp, cvrp, kp, portfolio };

std::string to_string(InstanceKind kind);
InstanceKind instance_kind_from_string(const std::string& s);

/// Seeded problem instance for the combinatorial / portfolio tasks.
struct CombinatorialInstance {
    InstanceKind kind = InstanceKind::tsp;
    std::size_t n = 0;
    std::uint64_t seed = 0;

    // tsp: two coordinate sets, each n x 2 (row-major pairs)
    std::vector<std::array<double, 2>> coords_a;
    std::vector<std::array<double, 2>> coords_b;
    // cvrp: coords_a holds the depot at index 0 followed by n customers
    std::vector<int> demands;
    double capacity = 0.0;
    // kp
    std::vector<double> weights;
    std::vector<std::array<double, 2>> values;
    // portfolio
    std::vector<double> mean_returns;
    std::vector<std::vector<double>> covariance;
};

inline constexpr double kKnapsackCapacity = 25.0;
inline constexpr double kVehicleCapacity = 50.0;
inline constexpr double kPortfolioTheta = 0.001;

/// Deterministic given (kind, n, seed). Sizes outside the benchmark families
/// raise ConfigError unless allow_any_size is set.
CombinatorialInstance generate_instance(InstanceKind kind, std::size_t n, std::uint64_t seed,
                                        bool allow_any_size = false);

InstanceKind instance_kind_for(const TaskSpec& task);

// Instance files: {"kind", "n", "seed", "payload": {...}}.
std::string instance_to_json(const CombinatorialInstance& inst);
CombinatorialInstance instance_from_json(const std::string& text);
void save_instance(const CombinatorialInstance& inst, const std::filesystem::path& path);
CombinatorialInstance load_instance(const std::filesystem::path& path);

/// Throws DomainError unless x holds each of 0..n-1 exactly once.
std::vector<int> as_permutation(std::span<const double> x, std::size_t n);
bool is_permutation(std::span<const double> x);

ObjectiveVector mo_tsp_eval(const CombinatorialInstance& inst, std::span<const double> perm);
ObjectiveVector mo_kp_eval(const CombinatorialInstance& inst, std::span<const double> perm);
ObjectiveVector mo_cvrp_eval(const CombinatorialInstance& inst, std::span<const double> perm);
ObjectiveVector portfolio_eval(const CombinatorialInstance& inst, std::span<const double> weights);

/// Clamp entries below theta to theta, then renormalize to sum 1. The zero
/// vector repairs to uniform weights.
Genotype portfolio_repair(std::span<const double> weights, double theta = kPortfolioTheta);

/// Rotates a permutation so that element 0 comes first.
Genotype start_from_zero_repair(std::span<const double> perm);

/// Ground-truth oracle of one task (and instance, for combinatorial tasks).
class Problem {
public:
    explicit Problem(TaskSpec task, std::optional<CombinatorialInstance> instance = std::nullopt);

    const TaskSpec& task() const { return task_; }
    const std::optional<CombinatorialInstance>& instance() const { return instance_; }

    ObjectiveVector evaluate(std::span<const double> x) const;
    PointSet evaluate_all(const std::vector<Genotype>& xs) const;

    /// Task-specific repair applied to every generated candidate:
    /// start-from-zero for TSP/CVRP, portfolio weight repair, identity
    /// otherwise.
    Genotype repair(std::span<const double> x) const;

    /// Uniform random member of the search space (already repaired).
    Genotype sample(Rng& rng) const;

    /// Throws DomainError when x does not conform to the search space.
    void validate(std::span<const double> x) const;

private:
    TaskSpec task_;
    std::optional<CombinatorialInstance> instance_;
};

/// Evaluates a synthetic task at a continuous point.
ObjectiveVector synthetic_eval(const TaskSpec& task, std::span<const double> x);

/// n_points samples of the analytic Pareto front.
PointSet true_pareto_front(const TaskSpec& task, std::size_t n_points);

}  // namespace offmoo
