#include "offmoo/moea.hpp"

#include <algorithm>
#include <cmath>

namespace offmoo {

void OperatorConfig::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!(sbx_eta > 0.0) || !(pm_eta > 0.0)) throw ConfigError("operator distribution indices must be positive");
    if (!prob(sbx_prob) || !prob(perm_crossover_prob) || !prob(perm_mutation_prob)) {
        throw ConfigError("operator probabilities must lie in [0, 1]");
    }
    if (pm_prob > 1.0) throw ConfigError("pm_prob must lie in [0, 1] (negative selects 1/D)");
}

double sbx_beta(double u, double eta) {
    if (u <= 0.5) return std::pow(2.0 * u, 1.0 / (eta + 1.0));
    return std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
}

std::pair<double, double> sbx_gene(double p1, double p2, double u, double eta) {
    const double beta = sbx_beta(u, eta);
    return {0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2), 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)};
}

std::pair<Genotype, Genotype> sbx_crossover(std::span<const double> p1, std::span<const double> p2,
                                            const SearchSpace& space, const OperatorConfig& cfg, Rng& rng) {
    if (p1.size() != p2.size()) throw DimensionError("sbx_crossover: parent length mismatch");
    Genotype c1(p1.begin(), p1.end());
    Genotype c2(p2.begin(), p2.end());
    if (rng.uniform() >= cfg.sbx_prob) return {c1, c2};
    for (std::size_t i = 0; i < c1.size(); ++i) {
        // Each gene crosses with probability 1/2, as in Deb's reference code.
        if (rng.uniform() >= 0.5 || std::abs(p1[i] - p2[i]) <= 1e-14) continue;
        const double u = rng.uniform();
        auto [a, b] = sbx_gene(p1[i], p2[i], u, cfg.sbx_eta);
        c1[i] = std::clamp(a, space.lower[i], space.upper[i]);
        c2[i] = std::clamp(b, space.lower[i], space.upper[i]);
    }
    return {c1, c2};
}

double pm_delta(double u, double eta) {
    if (u < 0.5) return std::pow(2.0 * u, 1.0 / (eta + 1.0)) - 1.0;
    return 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (eta + 1.0));
}

Genotype pm_mutation(std::span<const double> x, const SearchSpace& space, const OperatorConfig& cfg, Rng& rng) {
    Genotype y(x.begin(), x.end());
    if (y.empty()) return y;
    const double prob = cfg.pm_prob < 0.0 ? 1.0 / static_cast<double>(y.size()) : cfg.pm_prob;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (rng.uniform() >= prob) continue;
        const double range = space.upper[i] - space.lower[i];
        y[i] = std::clamp(y[i] + pm_delta(rng.uniform(), cfg.pm_eta) * range, space.lower[i], space.upper[i]);
    }
    return y;
}

Genotype order_crossover(std::span<const double> p1, std::span<const double> p2, std::size_t first,
                         std::size_t last) {
    const std::size_t n = p1.size();
    if (!is_permutation(p1) || !is_permutation(p2) || p2.size() != n) {
        throw DomainError("order_crossover: parents must be permutations of equal length");
    }
    if (first > last || last >= n) throw DomainError("order_crossover: invalid cut");
    Genotype child(n, -1.0);
    std::vector<char> used(n, 0);
    for (std::size_t i = first; i <= last; ++i) {
        child[i] = p1[i];
        used[static_cast<std::size_t>(p1[i])] = 1;
    }
    std::size_t pos = (last + 1) % n;
    for (std::size_t k = 0; k < n; ++k) {
        const double gene = p2[(last + 1 + k) % n];
        if (used[static_cast<std::size_t>(gene)]) continue;
        child[pos] = gene;
        pos = (pos + 1) % n;
    }
    return child;
}

Genotype order_crossover(std::span<const double> p1, std::span<const double> p2, Rng& rng) {
    const std::size_t n = p1.size();
    std::size_t a = rng.below(n);
    std::size_t b = rng.below(n);
    if (a > b) std::swap(a, b);
    return order_crossover(p1, p2, a, b);
}

Genotype inversion_mutation(std::span<const double> x, std::size_t first, std::size_t last) {
    if (!is_permutation(x)) throw DomainError("inversion_mutation: malformed permutation");
    if (first > last || last >= x.size()) throw DomainError("inversion_mutation: invalid segment");
    Genotype y(x.begin(), x.end());
    std::reverse(y.begin() + static_cast<std::ptrdiff_t>(first), y.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    return y;
}

Genotype inversion_mutation(std::span<const double> x, Rng& rng) {
    const std::size_t n = x.size();
    std::size_t a = rng.below(n);
    std::size_t b = rng.below(n);
    if (a > b) std::swap(a, b);
    return inversion_mutation(x, a, b);
}

}  // namespace offmoo
