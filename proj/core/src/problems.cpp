#include "offmoo/problems.hpp"

#include "offmoo/moea.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

namespace offmoo {

namespace {

constexpr double pi = std::numbers::pi;

struct SyntheticRow {
    TaskFamily family;
    std::size_t dims;
    std::size_t objectives;
    double lo;
    double hi;
    std::vector<double> reference;
    bool has_front;
};

const std::map<std::string, SyntheticRow>& synthetic_table() {
    static const std::map<std::string, SyntheticRow> table = {
        {"dtlz1", {TaskFamily::dtlz1, 7, 3, 0.0, 1.0, {558.21, 552.30, 568.36}, true}},
        {"dtlz2", {TaskFamily::dtlz2, 10, 3, 0.0, 1.0, {2.77, 2.78, 2.93}, true}},
        {"dtlz3", {TaskFamily::dtlz3, 10, 3, 0.0, 1.0, {1703.72, 1605.54, 1670.48}, true}},
        {"dtlz4", {TaskFamily::dtlz4, 10, 3, 0.0, 1.0, {3.03, 2.83, 2.78}, true}},
        {"dtlz5", {TaskFamily::dtlz5, 10, 3, 0.0, 1.0, {2.65, 2.61, 2.70}, true}},
        {"dtlz6", {TaskFamily::dtlz6, 10, 3, 0.0, 1.0, {9.80, 9.78, 9.78}, true}},
        {"dtlz7", {TaskFamily::dtlz7, 10, 3, 0.0, 1.0, {1.10, 1.10, 33.43}, true}},
        {"zdt1", {TaskFamily::zdt1, 30, 2, 0.0, 1.0, {1.10, 8.58}, true}},
        {"zdt2", {TaskFamily::zdt2, 30, 2, 0.0, 1.0, {1.10, 9.59}, true}},
        {"zdt3", {TaskFamily::zdt3, 30, 2, 0.0, 1.0, {1.10, 8.74}, true}},
        {"zdt4", {TaskFamily::zdt4, 10, 2, -5.0, 5.0, {1.10, 300.42}, true}},
        {"zdt6", {TaskFamily::zdt6, 10, 2, 0.0, 1.0, {1.07, 10.27}, true}},
        {"omnitest", {TaskFamily::omnitest, 2, 2, 0.0, 6.0, {2.40, 2.40}, true}},
        {"vlmop1", {TaskFamily::vlmop1, 1, 2, -2.0, 4.0, {4.0, 4.0}, true}},
        {"vlmop2", {TaskFamily::vlmop2, 6, 2, -2.0, 2.0, {1.10, 1.10}, true}},
        {"vlmop3", {TaskFamily::vlmop3, 2, 3, -3.0, 3.0, {9.07, 66.62, 0.23}, false}},
    };
    return table;
}

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

// DTLZ2-family spherical mapping from angles to objectives.
ObjectiveVector sphere_shape(std::span<const double> theta, double radius, std::size_t m) {
    ObjectiveVector f(m, radius);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j + 1 < m - i; ++j) f[i] *= std::cos(theta[j]);
        if (i > 0) f[i] *= std::sin(theta[m - 1 - i]);
    }
    return f;
}

double dtlz1_g(std::span<const double> xm) {
    double s = 0.0;
    for (double v : xm) s += (v - 0.5) * (v - 0.5) - std::cos(20.0 * pi * (v - 0.5));
    return 100.0 * (static_cast<double>(xm.size()) + s);
}

double dtlz2_g(std::span<const double> xm) {
    double s = 0.0;
    for (double v : xm) s += (v - 0.5) * (v - 0.5);
    return s;
}

double zdt_g(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += x[i];
    return 1.0 + 9.0 * s / static_cast<double>(x.size() - 1);
}

ObjectiveVector eval_dtlz(TaskFamily fam, std::span<const double> x, std::size_t m) {
    const std::size_t k = x.size() - m + 1;
    const auto xm = x.subspan(m - 1, k);
    switch (fam) {
    case TaskFamily::dtlz1: {
        const double g = dtlz1_g(xm);
        ObjectiveVector f(m, 0.5 * (1.0 + g));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j + 1 < m - i; ++j) f[i] *= x[j];
            if (i > 0) f[i] *= 1.0 - x[m - 1 - i];
        }
        return f;
    }
    case TaskFamily::dtlz2:
    case TaskFamily::dtlz3:
    case TaskFamily::dtlz4: {
        const double g = fam == TaskFamily::dtlz3 ? dtlz1_g(xm) : dtlz2_g(xm);
        const double alpha = fam == TaskFamily::dtlz4 ? 100.0 : 1.0;
        std::vector<double> theta(m - 1);
        for (std::size_t j = 0; j + 1 < m; ++j) theta[j] = std::pow(x[j], alpha) * pi / 2.0;
        return sphere_shape(theta, 1.0 + g, m);
    }
    case TaskFamily::dtlz5:
    case TaskFamily::dtlz6: {
        double g = 0.0;
        if (fam == TaskFamily::dtlz5) {
            g = dtlz2_g(xm);
        } else {
            for (double v : xm) g += std::pow(v, 0.1);
        }
        std::vector<double> theta(m - 1);
        theta[0] = x[0] * pi / 2.0;
        for (std::size_t j = 1; j + 1 < m; ++j) {
            theta[j] = pi / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * x[j]);
        }
        return sphere_shape(theta, 1.0 + g, m);
    }
    case TaskFamily::dtlz7: {
        double s = 0.0;
        for (double v : xm) s += v;
        const double g = 1.0 + 9.0 * s / static_cast<double>(k);
        ObjectiveVector f(m);
        double h = static_cast<double>(m);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            f[i] = x[i];
            h -= f[i] / (1.0 + g) * (1.0 + std::sin(3.0 * pi * f[i]));
        }
        f[m - 1] = (1.0 + g) * h;
        return f;
    }
    default:
        throw CapabilityError("eval_dtlz: not a DTLZ family");
    }
}

// Das-Dennis simplex lattice points with the largest H whose count does not
// exceed n.
PointSet lattice_not_exceeding(std::size_t m, std::size_t n) {
    std::size_t h = 1;
    while (das_dennis_count(m, h + 1) <= n) ++h;
    return das_dennis(m, h);
}

// Sample a parametric candidate set, keep the non-dominated part, then thin it
// to n evenly spaced members.
PointSet thin_nondominated(const PointSet& candidates, std::size_t n) {
    const FrontPartition part = non_dominated_sort(candidates);
    PointSet front = gather(candidates, part.fronts.front());
    std::sort(front.begin(), front.end());
    if (front.size() <= n) return front;
    PointSet out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t idx = n == 1 ? 0 : k * (front.size() - 1) / (n - 1);
        out.push_back(front[idx]);
    }
    return out;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

double zdt6_min_f1() {
    // f1 = 1 - exp(-4x) sin^6(6 pi x) on [0, 1]: grid then golden-section polish.
    auto f = [](double x) { return 1.0 - std::exp(-4.0 * x) * std::pow(std::sin(6.0 * pi * x), 6.0); };
    double best_x = 0.0;
    double best = f(0.0);
    constexpr int grid = 20000;
    for (int i = 1; i <= grid; ++i) {
        const double x = static_cast<double>(i) / grid;
        if (f(x) < best) {
            best = f(x);
            best_x = x;
        }
    }
    double a = std::max(0.0, best_x - 1.0 / grid);
    double b = std::min(1.0, best_x + 1.0 / grid);
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 100; ++it) {
        const double c = b - r * (b - a);
        const double d = a + r * (b - a);
        if (f(c) < f(d)) {
            b = d;
        } else {
            a = c;
        }
    }
    return f(0.5 * (a + b));
}

}  // namespace

std::size_t SearchSpace::dim() const {
    return kind == SpaceKind::continuous ? lower.size() : n;
}

SearchSpace SearchSpace::box(std::vector<double> lo, std::vector<double> hi) {
    if (lo.size() != hi.size()) throw DimensionError("SearchSpace::box: bound length mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(lo[i] < hi[i])) throw ConfigError("SearchSpace::box: requires lo < hi");
    }
    SearchSpace s;
    s.kind = SpaceKind::continuous;
    s.lower = std::move(lo);
    s.upper = std::move(hi);
    return s;
}

SearchSpace SearchSpace::permutation_of(std::size_t n) {
    if (n < 2) throw ConfigError("SearchSpace::permutation_of: n must be at least 2");
    SearchSpace s;
    s.kind = SpaceKind::permutation;
    s.n = n;
    return s;
}

SearchSpace SearchSpace::simplex_of(std::size_t n, double theta) {
    if (n == 0 || theta < 0.0 || theta >= 1.0 / static_cast<double>(n)) {
        throw ConfigError("SearchSpace::simplex_of: requires theta in [0, 1/n)");
    }
    SearchSpace s;
    s.kind = SpaceKind::simplex;
    s.n = n;
    s.theta = theta;
    s.lower.assign(n, 0.0);
    s.upper.assign(n, 1.0);
    return s;
}

bool TaskSpec::combinatorial() const {
    return family == TaskFamily::mo_tsp || family == TaskFamily::mo_cvrp ||
           family == TaskFamily::mo_kp || family == TaskFamily::mo_portfolio;
}

TaskSpec task_by_name(const std::string& name) {
    const auto& table = synthetic_table();
    if (auto it = table.find(name); it != table.end()) {
        const SyntheticRow& row = it->second;
        TaskSpec t;
        t.name = name;
        t.family = row.family;
        t.dims = row.dims;
        t.objectives = row.objectives;
        std::vector<double> lo(row.dims, row.lo);
        std::vector<double> hi(row.dims, row.hi);
        if (row.family == TaskFamily::zdt4) {
            lo[0] = 0.0;
            hi[0] = 1.0;
        }
        t.space = SearchSpace::box(std::move(lo), std::move(hi));
        t.reference_point.values = row.reference;
        t.has_true_front = row.has_front;
        return t;
    }

    auto sized = [&](const std::string& prefix, TaskFamily fam, std::vector<std::size_t> sizes,
                     std::vector<double> ref) -> std::optional<TaskSpec> {
        if (name.rfind(prefix, 0) != 0) return std::nullopt;
        const std::string tail = name.substr(prefix.size());
        std::size_t n = 0;
        try {
            n = static_cast<std::size_t>(std::stoul(tail));
        } catch (const std::exception&) {
            throw ConfigError("unknown task: " + name);
        }
        if (std::find(sizes.begin(), sizes.end(), n) == sizes.end()) {
            throw ConfigError("unsupported size for " + prefix + ": " + tail);
        }
        TaskSpec t;
        t.name = name;
        t.family = fam;
        t.dims = n;
        t.objectives = 2;
        t.space = SearchSpace::permutation_of(n);
        t.reference_point.values = std::move(ref);
        return t;
    };

    if (auto t = sized("mo_tsp_", TaskFamily::mo_tsp, {20, 50, 100, 500}, {255.18, 248.44})) return *t;
    if (auto t = sized("mo_cvrp_", TaskFamily::mo_cvrp, {20, 50, 100}, {49.19, 9.58})) return *t;
    if (auto t = sized("mo_kp_", TaskFamily::mo_kp, {50, 100, 200}, {-7.85, -8.99})) return *t;
    if (name == "mo_portfolio") {
        TaskSpec t;
        t.name = name;
        t.family = TaskFamily::mo_portfolio;
        t.dims = 20;
        t.objectives = 2;
        t.space = SearchSpace::simplex_of(20, kPortfolioTheta);
        // Published as (0.29, -0.13); reordered to (-return, risk).
        t.reference_point.values = {-0.13, 0.29};
        return t;
    }
    throw ConfigError("unknown task: " + name);
}

std::vector<std::string> synthetic_task_names() {
    std::vector<std::string> names;
    for (const auto& [name, row] : synthetic_table()) names.push_back(name);
    return names;
}

std::vector<std::string> all_task_names() {
    std::vector<std::string> names = synthetic_task_names();
    for (const char* n : {"mo_tsp_20", "mo_tsp_50", "mo_tsp_100", "mo_tsp_500", "mo_cvrp_20",
                          "mo_cvrp_50", "mo_cvrp_100", "mo_kp_50", "mo_kp_100", "mo_kp_200",
                          "mo_portfolio"}) {
        names.emplace_back(n);
    }
    return names;
}

std::string to_string(InstanceKind kind) {
    switch (kind) {
    case InstanceKind::tsp: return "tsp";
    case InstanceKind::cvrp: return "cvrp";
    case InstanceKind::kp: return "kp";
    case InstanceKind::portfolio: return "portfolio";
    }
    return "?";
}

InstanceKind instance_kind_from_string(const std::string& s) {
    if (s == "tsp") return InstanceKind::tsp;
    if (s == "cvrp") return InstanceKind::cvrp;
    if (s == "kp") return InstanceKind::kp;
    if (s == "portfolio") return InstanceKind::portfolio;
    throw SchemaError("unknown instance kind: " + s);
}

InstanceKind instance_kind_for(const TaskSpec& task) {
    switch (task.family) {
    case TaskFamily::mo_tsp: return InstanceKind::tsp;
    case TaskFamily::mo_cvrp: return InstanceKind::cvrp;
    case TaskFamily::mo_kp: return InstanceKind::kp;
    case TaskFamily::mo_portfolio: return InstanceKind::portfolio;
    default: throw CapabilityError("task " + task.name + " has no instance");
    }
}

CombinatorialInstance generate_instance(InstanceKind kind, std::size_t n, std::uint64_t seed,
                                        bool allow_any_size) {
    static const std::map<InstanceKind, std::vector<std::size_t>> sizes = {
        {InstanceKind::tsp, {20, 50, 100, 500}},
        {InstanceKind::cvrp, {20, 50, 100}},
        {InstanceKind::kp, {50, 100, 200}},
        {InstanceKind::portfolio, {20}},
    };
    const auto& allowed = sizes.at(kind);
    if (!allow_any_size && std::find(allowed.begin(), allowed.end(), n) == allowed.end()) {
        throw ConfigError("generate_instance: unsupported size " + std::to_string(n) + " for " +
                          to_string(kind));
    }
    if (n < 2) throw ConfigError("generate_instance: n must be at least 2");

    CombinatorialInstance inst;
    inst.kind = kind;
    inst.n = n;
    inst.seed = seed;
    Rng rng(derive_seed(seed, to_string(kind)));
    auto point = [&] { return std::array<double, 2>{rng.uniform(), rng.uniform()}; };

    switch (kind) {
    case InstanceKind::tsp:
        for (std::size_t i = 0; i < n; ++i) inst.coords_a.push_back(point());
        for (std::size_t i = 0; i < n; ++i) inst.coords_b.push_back(point());
        break;
    case InstanceKind::cvrp:
        for (std::size_t i = 0; i <= n; ++i) inst.coords_a.push_back(point());
        for (std::size_t i = 0; i < n; ++i) inst.demands.push_back(static_cast<int>(rng.below(10)));
        inst.capacity = kVehicleCapacity;
        break;
    case InstanceKind::kp:
        for (std::size_t i = 0; i < n; ++i) inst.weights.push_back(rng.uniform());
        for (std::size_t i = 0; i < n; ++i) inst.values.push_back(point());
        inst.capacity = kKnapsackCapacity;
        break;
    case InstanceKind::portfolio: {
        // Factor model: covariance A^T A / n plus a small diagonal jitter.
        std::vector<std::vector<double>> a(n, std::vector<double>(n));
        for (auto& row : a) {
            for (auto& v : row) v = 0.1 * rng.normal();
        }
        inst.covariance.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += a[k][i] * a[k][j];
                inst.covariance[i][j] = s / static_cast<double>(n);
            }
            inst.covariance[i][i] += 1e-4;
        }
        for (std::size_t i = 0; i < n; ++i) inst.mean_returns.push_back(rng.uniform(-0.05, 0.25));
        break;
    }
    }
    return inst;
}

bool is_permutation(std::span<const double> x) {
    std::vector<char> seen(x.size(), 0);
    for (double v : x) {
        if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(x.size())) return false;
        auto i = static_cast<std::size_t>(v);
        if (seen[i]) return false;
        seen[i] = 1;
    }
    return true;
}

std::vector<int> as_permutation(std::span<const double> x, std::size_t n) {
    if (x.size() != n || !is_permutation(x)) {
        throw DomainError("malformed permutation of length " + std::to_string(x.size()));
    }
    std::vector<int> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<int>(x[i]);
    return p;
}

ObjectiveVector mo_tsp_eval(const CombinatorialInstance& inst, std::span<const double> perm) {
    const std::vector<int> p = as_permutation(perm, inst.n);
    ObjectiveVector f(2, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto a = static_cast<std::size_t>(p[i]);
        const auto b = static_cast<std::size_t>(p[(i + 1) % p.size()]);
        f[0] += dist(inst.coords_a[a], inst.coords_a[b]);
        f[1] += dist(inst.coords_b[a], inst.coords_b[b]);
    }
    return f;
}

ObjectiveVector mo_kp_eval(const CombinatorialInstance& inst, std::span<const double> perm) {
    const std::vector<int> p = as_permutation(perm, inst.n);
    double load = 0.0;
    double v0 = 0.0;
    double v1 = 0.0;
    for (int item : p) {
        const auto i = static_cast<std::size_t>(item);
        if (load + inst.weights[i] > inst.capacity) break;
        load += inst.weights[i];
        v0 += inst.values[i][0];
        v1 += inst.values[i][1];
    }
    return {-v0, -v1};
}

ObjectiveVector mo_cvrp_eval(const CombinatorialInstance& inst, std::span<const double> perm) {
    const std::vector<int> p = as_permutation(perm, inst.n);
    const auto& depot = inst.coords_a[0];
    double total = 0.0;
    double longest = 0.0;
    double route = 0.0;
    double load = 0.0;
    const std::array<double, 2>* last = &depot;
    auto close_route = [&] {
        route += dist(*last, depot);
        total += route;
        longest = std::max(longest, route);
        route = 0.0;
        load = 0.0;
        last = &depot;
    };
    for (int c : p) {
        const auto node = static_cast<std::size_t>(c) + 1;
        const double demand = inst.demands[static_cast<std::size_t>(c)];
        if (load + demand > inst.capacity) close_route();
        route += dist(*last, inst.coords_a[node]);
        load += demand;
        last = &inst.coords_a[node];
    }
    close_route();
    return {total, longest};
}

ObjectiveVector portfolio_eval(const CombinatorialInstance& inst, std::span<const double> weights) {
    if (weights.size() != inst.n) throw DomainError("portfolio_eval: weight length mismatch");
    double ret = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < inst.n; ++i) {
        ret += weights[i] * inst.mean_returns[i];
        for (std::size_t j = 0; j < inst.n; ++j) var += weights[i] * inst.covariance[i][j] * weights[j];
    }
    return {-ret, std::sqrt(std::max(var, 0.0))};
}

Genotype portfolio_repair(std::span<const double> weights, double theta) {
    const std::size_t n = weights.size();
    if (n == 0) throw DomainError("portfolio_repair: empty weight vector");
    bool all_zero = std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; });
    Genotype w(n);
    if (all_zero) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
        return w;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::max(weights[i], theta);
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

Genotype start_from_zero_repair(std::span<const double> perm) {
    if (!is_permutation(perm)) throw DomainError("start_from_zero_repair: malformed permutation");
    const auto zero = std::find(perm.begin(), perm.end(), 0.0);
    Genotype out(perm.begin(), perm.end());
    std::rotate(out.begin(), out.begin() + (zero - perm.begin()), out.end());
    return out;
}

ObjectiveVector synthetic_eval(const TaskSpec& task, std::span<const double> x) {
    const std::size_t m = task.objectives;
    switch (task.family) {
    case TaskFamily::dtlz1:
    case TaskFamily::dtlz2:
    case TaskFamily::dtlz3:
    case TaskFamily::dtlz4:
    case TaskFamily::dtlz5:
    case TaskFamily::dtlz6:
    case TaskFamily::dtlz7:
        return eval_dtlz(task.family, x, m);
    case TaskFamily::zdt1:
    case TaskFamily::zdt2:
    case TaskFamily::zdt3: {
        const double f1 = x[0];
        const double g = zdt_g(x);
        const double r = f1 / g;
        double f2 = 0.0;
        if (task.family == TaskFamily::zdt1) f2 = g * (1.0 - std::sqrt(r));
        if (task.family == TaskFamily::zdt2) f2 = g * (1.0 - r * r);
        if (task.family == TaskFamily::zdt3) f2 = g * (1.0 - std::sqrt(r) - r * std::sin(10.0 * pi * f1));
        return {f1, f2};
    }
    case TaskFamily::zdt4: {
        double s = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * x[i] - 10.0 * std::cos(4.0 * pi * x[i]);
        const double g = 1.0 + 10.0 * static_cast<double>(x.size() - 1) + s;
        return {x[0], g * (1.0 - std::sqrt(x[0] / g))};
    }
    case TaskFamily::zdt6: {
        const double f1 = 1.0 - std::exp(-4.0 * x[0]) * std::pow(std::sin(6.0 * pi * x[0]), 6.0);
        double s = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i) s += x[i];
        const double g = 1.0 + 9.0 * std::pow(s / static_cast<double>(x.size() - 1), 0.25);
        const double r = f1 / g;
        return {f1, g * (1.0 - r * r)};
    }
    case TaskFamily::omnitest: {
        double f1 = 0.0;
        double f2 = 0.0;
        for (double v : x) {
            f1 += std::sin(pi * v);
            f2 += std::cos(pi * v);
        }
        return {f1, f2};
    }
    case TaskFamily::vlmop1:
        return {x[0] * x[0], (x[0] - 2.0) * (x[0] - 2.0)};
    case TaskFamily::vlmop2: {
        const double c = 1.0 / std::sqrt(static_cast<double>(x.size()));
        double a = 0.0;
        double b = 0.0;
        for (double v : x) {
            a += (v - c) * (v - c);
            b += (v + c) * (v + c);
        }
        return {1.0 - std::exp(-a), 1.0 - std::exp(-b)};
    }
    case TaskFamily::vlmop3: {
        const double u = x[0];
        const double v = x[1];
        const double r2 = u * u + v * v;
        const double f1 = 0.5 * r2 + std::sin(r2);
        const double f2 = (3.0 * u - 2.0 * v + 4.0) * (3.0 * u - 2.0 * v + 4.0) / 8.0 +
                          (u - v + 1.0) * (u - v + 1.0) / 27.0 + 15.0;
        const double f3 = 1.0 / (r2 + 1.0) - 1.1 * std::exp(-r2);
        return {f1, f2, f3};
    }
    default:
        throw CapabilityError("synthetic_eval: " + task.name + " is not a synthetic task");
    }
}

PointSet true_pareto_front(const TaskSpec& task, std::size_t n_points) {
    if (!task.has_true_front) throw CapabilityError("no analytic Pareto front for " + task.name);
    if (n_points == 0) return {};
    const std::size_t m = task.objectives;
    PointSet front;
    switch (task.family) {
    case TaskFamily::zdt1:
    case TaskFamily::zdt4:
        // Quadratic spacing in f1 gives even spacing in f2.
        for (double s : linspace(0.0, 1.0, n_points)) front.push_back({s * s, 1.0 - s});
        return front;
    case TaskFamily::zdt2:
        for (double s : linspace(0.0, 1.0, n_points)) front.push_back({s, 1.0 - s * s});
        return front;
    case TaskFamily::zdt3: {
        PointSet cand;
        for (double s : linspace(0.0, 1.0, 40 * n_points)) {
            cand.push_back({s, 1.0 - std::sqrt(s) - s * std::sin(10.0 * pi * s)});
        }
        return thin_nondominated(cand, n_points);
    }
    case TaskFamily::zdt6: {
        for (double s : linspace(zdt6_min_f1(), 1.0, n_points)) front.push_back({s, 1.0 - s * s});
        return front;
    }
    case TaskFamily::dtlz1:
        for (auto w : lattice_not_exceeding(m, n_points)) {
            for (double& v : w) v *= 0.5;
            front.push_back(w);
        }
        return front;
    case TaskFamily::dtlz2:
    case TaskFamily::dtlz3:
    case TaskFamily::dtlz4:
        for (auto w : lattice_not_exceeding(m, n_points)) {
            double norm = 0.0;
            for (double v : w) norm += v * v;
            norm = std::sqrt(norm);
            for (double& v : w) v /= norm;
            front.push_back(w);
        }
        return front;
    case TaskFamily::dtlz5:
    case TaskFamily::dtlz6: {
        // g = 0 collapses every angle but the first to pi/4.
        for (double s : linspace(0.0, pi / 2.0, n_points)) {
            std::vector<double> theta(m - 1, pi / 4.0);
            theta[0] = s;
            front.push_back(sphere_shape(theta, 1.0, m));
        }
        return front;
    }
    case TaskFamily::dtlz7: {
        const std::size_t side = static_cast<std::size_t>(std::ceil(std::pow(40.0 * n_points, 1.0 / (m - 1))));
        PointSet cand;
        std::vector<std::size_t> idx(m - 1, 0);
        while (true) {
            ObjectiveVector f(m);
            double h = static_cast<double>(m);
            for (std::size_t i = 0; i + 1 < m; ++i) {
                f[i] = static_cast<double>(idx[i]) / static_cast<double>(side - 1);
                h -= f[i] / 2.0 * (1.0 + std::sin(3.0 * pi * f[i]));
            }
            f[m - 1] = 2.0 * h;
            cand.push_back(f);
            std::size_t d = 0;
            while (d < idx.size() && ++idx[d] == side) idx[d++] = 0;
            if (d == idx.size()) break;
        }
        return thin_nondominated(cand, n_points);
    }
    case TaskFamily::vlmop1:
        for (double s : linspace(0.0, 2.0, n_points)) front.push_back({s * s, (s - 2.0) * (s - 2.0)});
        return front;
    case TaskFamily::vlmop2: {
        const double n = static_cast<double>(task.dims);
        const double c = 1.0 / std::sqrt(n);
        for (double t : linspace(-c, c, n_points)) {
            front.push_back({1.0 - std::exp(-n * (t - c) * (t - c)), 1.0 - std::exp(-n * (t + c) * (t + c))});
        }
        return front;
    }
    case TaskFamily::omnitest: {
        const double d = static_cast<double>(task.dims);
        for (double t : linspace(1.0, 1.5, n_points)) {
            front.push_back({d * std::sin(pi * t), d * std::cos(pi * t)});
        }
        return front;
    }
    default:
        throw CapabilityError("no analytic Pareto front for " + task.name);
    }
}

Problem::Problem(TaskSpec task, std::optional<CombinatorialInstance> instance)
    : task_(std::move(task)), instance_(std::move(instance)) {
    if (task_.combinatorial()) {
        if (!instance_) throw ConfigError("task " + task_.name + " requires an instance");
        if (instance_->kind != instance_kind_for(task_)) {
            throw ConfigError("instance kind " + to_string(instance_->kind) + " does not match task " + task_.name);
        }
        if (instance_->n != task_.dims) {
            // Allow custom-size instances: the instance defines the dimension.
            task_.dims = instance_->n;
            if (task_.space.kind == SpaceKind::permutation) {
                task_.space = SearchSpace::permutation_of(instance_->n);
            } else {
                task_.space = SearchSpace::simplex_of(instance_->n, task_.space.theta);
            }
        }
    }
}

void Problem::validate(std::span<const double> x) const {
    const SearchSpace& s = task_.space;
    if (x.size() != s.dim()) {
        throw DomainError("genotype has " + std::to_string(x.size()) + " entries, task " + task_.name +
                          " expects " + std::to_string(s.dim()));
    }
    if (s.kind == SpaceKind::permutation) {
        if (!is_permutation(x)) throw DomainError("malformed permutation for task " + task_.name);
        return;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || x[i] < s.lower[i] || x[i] > s.upper[i]) {
            throw DomainError("coordinate " + std::to_string(i) + " out of bounds for task " + task_.name);
        }
    }
}

ObjectiveVector Problem::evaluate(std::span<const double> x) const {
    validate(x);
    switch (task_.family) {
    case TaskFamily::mo_tsp: return mo_tsp_eval(*instance_, x);
    case TaskFamily::mo_cvrp: return mo_cvrp_eval(*instance_, x);
    case TaskFamily::mo_kp: return mo_kp_eval(*instance_, x);
    case TaskFamily::mo_portfolio: return portfolio_eval(*instance_, x);
    default: return synthetic_eval(task_, x);
    }
}

PointSet Problem::evaluate_all(const std::vector<Genotype>& xs) const {
    PointSet out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(evaluate(x));
    return out;
}

Genotype Problem::repair(std::span<const double> x) const {
    switch (task_.family) {
    case TaskFamily::mo_tsp:
    case TaskFamily::mo_cvrp: return start_from_zero_repair(x);
    case TaskFamily::mo_portfolio: return portfolio_repair(x, task_.space.theta);
    default: return Genotype(x.begin(), x.end());
    }
}

Genotype Problem::sample(Rng& rng) const {
    const SearchSpace& s = task_.space;
    Genotype x;
    if (s.kind == SpaceKind::permutation) {
        x.resize(s.n);
        std::iota(x.begin(), x.end(), 0.0);
        rng.shuffle(x);
    } else {
        x.resize(s.dim());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(s.lower[i], s.upper[i]);
    }
    return repair(x);
}

}  // namespace offmoo
