#include "offmoo/moea.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace offmoo {

namespace {

std::vector<Genotype> make_children(const MoeaProblem& prob, const std::vector<Genotype>& members,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                    std::size_t count, Rng& rng) {
    const OperatorConfig& ops = prob.ops;
    std::vector<Genotype> children;
    children.reserve(count);
    auto finish = [&](Genotype c) {
        if (ops.repair && prob.repair) c = prob.repair(c);
        children.push_back(std::move(c));
    };
    for (const auto& [a, b] : pairs) {
        if (children.size() >= count) break;
        const Genotype& p1 = members[a];
        const Genotype& p2 = members[b];
        Genotype c1;
        Genotype c2;
        if (prob.space.kind == SpaceKind::permutation) {
            if (ops.order_crossover && rng.uniform() < ops.perm_crossover_prob) {
                c1 = order_crossover(p1, p2, rng);
                c2 = order_crossover(p2, p1, rng);
            } else {
                c1 = p1;
                c2 = p2;
            }
            if (ops.inversion_mutation && rng.uniform() < ops.perm_mutation_prob) c1 = inversion_mutation(c1, rng);
            if (ops.inversion_mutation && rng.uniform() < ops.perm_mutation_prob) c2 = inversion_mutation(c2, rng);
        } else {
            std::tie(c1, c2) = sbx_crossover(p1, p2, prob.space, ops, rng);
            c1 = pm_mutation(c1, prob.space, ops, rng);
            c2 = pm_mutation(c2, prob.space, ops, rng);
        }
        finish(std::move(c1));
        if (children.size() < count) finish(std::move(c2));
    }
    return children;
}

PointSet checked_evaluate(const MoeaProblem& prob, const std::vector<Genotype>& xs) {
    PointSet ys = prob.evaluate(xs);
    if (ys.size() != xs.size()) throw DimensionError("evaluator returned the wrong number of objective vectors");
    return ys;
}

Population take(const std::vector<Genotype>& members, const PointSet& objectives,
                const std::vector<std::size_t>& idx) {
    Population out;
    out.members.reserve(idx.size());
    out.objectives.reserve(idx.size());
    for (std::size_t i : idx) {
        out.members.push_back(members.at(i));
        out.objectives.push_back(objectives.at(i));
    }
    return out;
}

void ensure_evaluated(const MoeaProblem& prob, Population& pop) {
    if (pop.members.empty()) throw EmptyInputError("MOEA: empty initial population");
    if (pop.objectives.size() != pop.members.size()) pop.objectives = checked_evaluate(prob, pop.members);
    if (pop.ranks.size() != pop.members.size() || pop.crowding.size() != pop.members.size()) {
        assign_rank_crowding(pop);
    }
}

std::size_t binary_tournament(const Population& pop, Rng& rng) {
    const std::size_t i = rng.below(pop.size());
    const std::size_t j = rng.below(pop.size());
    if (pop.ranks[i] != pop.ranks[j]) return pop.ranks[i] < pop.ranks[j] ? i : j;
    if (pop.crowding[i] != pop.crowding[j]) return pop.crowding[i] > pop.crowding[j] ? i : j;
    return std::min(i, j);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

void das_dennis_rec(std::size_t m, std::size_t h, std::size_t left, std::vector<double>& cur, PointSet& out) {
    if (cur.size() + 1 == m) {
        cur.push_back(static_cast<double>(left) / static_cast<double>(h));
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (std::size_t i = 0; i <= left; ++i) {
        cur.push_back(static_cast<double>(i) / static_cast<double>(h));
        das_dennis_rec(m, h, left - i, cur, out);
        cur.pop_back();
    }
}

}  // namespace

MoeaProblem make_moea_problem(const Problem& problem, BatchEvaluator evaluate, OperatorConfig ops) {
    ops.validate();
    MoeaProblem p;
    p.space = problem.task().space;
    p.repair = [&problem](std::span<const double> x) { return problem.repair(x); };
    p.evaluate = std::move(evaluate);
    p.ops = ops;
    return p;
}

MoeaProblem make_moea_problem(const Problem& problem, OperatorConfig ops) {
    return make_moea_problem(problem, [&problem](const std::vector<Genotype>& xs) { return problem.evaluate_all(xs); },
                             ops);
}

void assign_rank_crowding(Population& pop) {
    pop.ranks.assign(pop.size(), 0);
    pop.crowding.assign(pop.size(), 0.0);
    if (pop.size() == 0) return;
    const FrontPartition part = non_dominated_sort(pop.objectives);
    pop.ranks = part.ranks;
    for (const auto& front : part.fronts) {
        const std::vector<double> cd = crowding_distance(gather(pop.objectives, front));
        for (std::size_t k = 0; k < front.size(); ++k) pop.crowding[front[k]] = cd[k];
    }
}

Population make_population(std::vector<Genotype> members, const BatchEvaluator& evaluate) {
    Population pop;
    pop.objectives = evaluate(members);
    if (pop.objectives.size() != members.size()) throw DimensionError("evaluator returned the wrong count");
    pop.members = std::move(members);
    assign_rank_crowding(pop);
    return pop;
}

Population random_population(const Problem& problem, std::size_t mu, Rng& rng) {
    std::vector<Genotype> members;
    members.reserve(mu);
    for (std::size_t i = 0; i < mu; ++i) members.push_back(problem.sample(rng));
    return make_population(std::move(members),
                           [&problem](const std::vector<Genotype>& xs) { return problem.evaluate_all(xs); });
}

Population nsga2_run(const MoeaProblem& problem, Population init, std::size_t generations, Rng& rng,
                     const RunHooks& hooks) {
    if (generations == 0) return init;
    Population pop = std::move(init);
    ensure_evaluated(problem, pop);
    const std::size_t mu = pop.size();

    for (std::size_t gen = 1; gen <= generations; ++gen) {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        pairs.reserve((mu + 1) / 2);
        for (std::size_t k = 0; k < (mu + 1) / 2; ++k) {
            const std::size_t a = binary_tournament(pop, rng);
            const std::size_t b = binary_tournament(pop, rng);
            pairs.emplace_back(a, b);
        }
        std::vector<Genotype> children = make_children(problem, pop.members, pairs, mu, rng);
        PointSet child_obj = checked_evaluate(problem, children);

        std::vector<Genotype> pool = pop.members;
        PointSet pool_obj = pop.objectives;
        pool.insert(pool.end(), std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));
        pool_obj.insert(pool_obj.end(), child_obj.begin(), child_obj.end());

        std::optional<std::vector<std::size_t>> chosen;
        if (hooks.survival) chosen = hooks.survival(pool_obj, mu, rng);
        if (!chosen) chosen = nsga2_select(pool_obj, mu);
        if (chosen->size() != mu) throw SizeError("survival policy returned the wrong number of survivors");

        pop = take(pool, pool_obj, *chosen);
        assign_rank_crowding(pop);
        if (hooks.observer) hooks.observer(gen, pop);
    }
    return pop;
}

Population moead_run(const MoeaProblem& problem, Population init, std::size_t generations, Rng& rng,
                     const RunHooks& hooks, std::size_t neighborhood) {
    if (generations == 0) return init;
    Population pop = std::move(init);
    ensure_evaluated(problem, pop);
    const std::size_t mu = pop.size();
    const std::size_t m = pop.objectives.front().size();
    const PointSet weights = moead_weights(m, mu);
    const std::size_t t = std::clamp<std::size_t>(neighborhood, 1, mu);
    constexpr std::size_t kMaxReplacements = 2;

    std::vector<std::vector<std::size_t>> neighbors(mu);
    for (std::size_t i = 0; i < mu; ++i) {
        std::vector<std::size_t> idx(mu);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return squared_distance(weights[i], weights[a]) < squared_distance(weights[i], weights[b]);
        });
        neighbors[i].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(t));
    }

    std::vector<double> ideal = pop.objectives.front();
    for (const auto& f : pop.objectives) {
        for (std::size_t k = 0; k < m; ++k) ideal[k] = std::min(ideal[k], f[k]);
    }

    for (std::size_t gen = 1; gen <= generations; ++gen) {
        // One child per subproblem from two neighborhood parents; the batch
        // is evaluated at once and then used for replacement.
        std::vector<Genotype> children;
        children.reserve(mu);
        for (std::size_t i = 0; i < mu; ++i) {
            const auto& nb = neighbors[i];
            const std::size_t a = nb[rng.below(nb.size())];
            std::size_t b = nb[rng.below(nb.size())];
            if (nb.size() > 1) {
                while (b == a) b = nb[rng.below(nb.size())];
            }
            std::vector<Genotype> one = make_children(problem, pop.members, {{a, b}}, 1, rng);
            children.push_back(std::move(one.front()));
        }
        PointSet child_obj = checked_evaluate(problem, children);
        for (const auto& f : child_obj) {
            for (std::size_t k = 0; k < m; ++k) ideal[k] = std::min(ideal[k], f[k]);
        }

        std::optional<std::vector<std::size_t>> chosen;
        if (hooks.survival) {
            PointSet pool_obj = pop.objectives;
            pool_obj.insert(pool_obj.end(), child_obj.begin(), child_obj.end());
            chosen = hooks.survival(pool_obj, mu, rng);
        }
        if (chosen) {
            std::vector<Genotype> pool = pop.members;
            pool.insert(pool.end(), children.begin(), children.end());
            PointSet pool_obj = pop.objectives;
            pool_obj.insert(pool_obj.end(), child_obj.begin(), child_obj.end());
            if (chosen->size() != mu) throw SizeError("survival policy returned the wrong number of survivors");
            pop = take(pool, pool_obj, *chosen);
        } else {
            for (std::size_t i = 0; i < mu; ++i) {
                std::vector<std::size_t> order = neighbors[i];
                rng.shuffle(order);
                std::size_t replaced = 0;
                for (std::size_t j : order) {
                    if (replaced >= kMaxReplacements) break;
                    if (tchebycheff(child_obj[i], weights[j], ideal) < tchebycheff(pop.objectives[j], weights[j], ideal)) {
                        pop.members[j] = children[i];
                        pop.objectives[j] = child_obj[i];
                        ++replaced;
                    }
                }
            }
        }
        assign_rank_crowding(pop);
        if (hooks.observer) hooks.observer(gen, pop);
    }
    return pop;
}

Population nsga3_run(const MoeaProblem& problem, Population init, std::size_t generations, Rng& rng,
                     const RunHooks& hooks) {
    if (generations == 0) return init;
    Population pop = std::move(init);
    ensure_evaluated(problem, pop);
    const std::size_t mu = pop.size();
    const std::size_t m = pop.objectives.front().size();
    const PointSet directions = reference_directions(m, mu);

    for (std::size_t gen = 1; gen <= generations; ++gen) {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t k = 0; k < (mu + 1) / 2; ++k) pairs.emplace_back(rng.below(mu), rng.below(mu));
        std::vector<Genotype> children = make_children(problem, pop.members, pairs, mu, rng);
        PointSet child_obj = checked_evaluate(problem, children);

        std::vector<Genotype> pool = pop.members;
        PointSet pool_obj = pop.objectives;
        pool.insert(pool.end(), std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));
        pool_obj.insert(pool_obj.end(), child_obj.begin(), child_obj.end());

        std::optional<std::vector<std::size_t>> chosen;
        if (hooks.survival) chosen = hooks.survival(pool_obj, mu, rng);
        if (!chosen) chosen = nsga3_survival(pool_obj, mu, directions, rng);
        if (chosen->size() != mu) throw SizeError("survival policy returned the wrong number of survivors");

        pop = take(pool, pool_obj, *chosen);
        assign_rank_crowding(pop);
        if (hooks.observer) hooks.observer(gen, pop);
    }
    return pop;
}

std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::nsga2: return "nsga2";
    case Algorithm::moead: return "moead";
    case Algorithm::nsga3: return "nsga3";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "nsga2") return Algorithm::nsga2;
    if (s == "moead") return Algorithm::moead;
    if (s == "nsga3") return Algorithm::nsga3;
    throw ConfigError("unknown algorithm: " + s);
}

Population run_algorithm(Algorithm algo, const MoeaProblem& problem, Population init, std::size_t generations,
                         Rng& rng, const RunHooks& hooks) {
    switch (algo) {
    case Algorithm::nsga2: return nsga2_run(problem, std::move(init), generations, rng, hooks);
    case Algorithm::moead: return moead_run(problem, std::move(init), generations, rng, hooks);
    case Algorithm::nsga3: return nsga3_run(problem, std::move(init), generations, rng, hooks);
    }
    throw ConfigError("unknown algorithm");
}

std::size_t das_dennis_count(std::size_t m, std::size_t h) {
    // C(h + m - 1, m - 1) computed incrementally; exact for the sizes we use.
    std::size_t r = 1;
    for (std::size_t i = 1; i < m; ++i) r = r * (h + i) / i;
    return r;
}

PointSet das_dennis(std::size_t m, std::size_t h) {
    if (m == 0) throw ConfigError("das_dennis: m must be positive");
    if (h == 0) {
        if (m == 1) return {{1.0}};
        throw ConfigError("das_dennis: h must be positive");
    }
    PointSet out;
    std::vector<double> cur;
    das_dennis_rec(m, h, h, cur, out);
    return out;
}

PointSet reference_directions(std::size_t m, std::size_t count) {
    if (m == 1) return {{1.0}};
    std::size_t h = 1;
    while (das_dennis_count(m, h) < count) ++h;
    return das_dennis(m, h);
}

PointSet moead_weights(std::size_t m, std::size_t mu) {
    if (mu == 0) throw ConfigError("moead_weights: mu must be positive");
    PointSet lattice = reference_directions(m, mu);
    if (lattice.size() == mu) return lattice;

    std::vector<char> chosen(lattice.size(), 0);
    std::vector<double> nearest(lattice.size(), std::numeric_limits<double>::infinity());
    std::size_t picked = 0;
    auto pick = [&](std::size_t i) {
        chosen[i] = 1;
        ++picked;
        for (std::size_t j = 0; j < lattice.size(); ++j) {
            nearest[j] = std::min(nearest[j], squared_distance(lattice[i], lattice[j]));
        }
    };
    // Corners first, then greedy max-min spreading.
    for (std::size_t i = 0; i < lattice.size() && picked < std::min(mu, m); ++i) {
        if (std::count(lattice[i].begin(), lattice[i].end(), 1.0) == 1) pick(i);
    }
    while (picked < mu) {
        std::size_t best = 0;
        double best_d = -1.0;
        for (std::size_t j = 0; j < lattice.size(); ++j) {
            if (!chosen[j] && nearest[j] > best_d) {
                best_d = nearest[j];
                best = j;
            }
        }
        pick(best);
    }
    PointSet out;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        if (chosen[i]) out.push_back(lattice[i]);
    }
    return out;
}

double tchebycheff(std::span<const double> f, std::span<const double> w, std::span<const double> ideal) {
    double v = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) v = std::max(v, w[i] * std::abs(f[i] - ideal[i]));
    return v;
}

PointSet nsga3_normalize(const PointSet& objectives) {
    if (objectives.empty()) return {};
    const std::size_t m = objectives.front().size();
    std::vector<double> ideal = objectives.front();
    for (const auto& f : objectives) {
        for (std::size_t k = 0; k < m; ++k) ideal[k] = std::min(ideal[k], f[k]);
    }
    PointSet shifted = objectives;
    for (auto& f : shifted) {
        for (std::size_t k = 0; k < m; ++k) f[k] -= ideal[k];
    }

    // Extreme point per axis: minimizer of the achievement scalarizing
    // function with weight 1 on the axis and 1e-6 elsewhere.
    Eigen::MatrixXd extremes(m, m);
    for (std::size_t axis = 0; axis < m; ++axis) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < shifted.size(); ++i) {
            double asf = 0.0;
            for (std::size_t k = 0; k < m; ++k) asf = std::max(asf, shifted[i][k] / (k == axis ? 1.0 : 1e-6));
            if (asf < best) {
                best = asf;
                arg = i;
            }
        }
        for (std::size_t k = 0; k < m; ++k) extremes(static_cast<Eigen::Index>(axis), static_cast<Eigen::Index>(k)) = shifted[arg][k];
    }

    std::vector<double> intercept(m, 0.0);
    bool ok = false;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(extremes);
    if (lu.rank() == static_cast<Eigen::Index>(m)) {
        const Eigen::VectorXd plane = lu.solve(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m)));
        ok = true;
        for (std::size_t k = 0; k < m; ++k) {
            intercept[k] = 1.0 / plane(static_cast<Eigen::Index>(k));
            if (!std::isfinite(intercept[k]) || intercept[k] <= 1e-6) ok = false;
        }
    }
    if (!ok) {
        for (std::size_t k = 0; k < m; ++k) {
            double worst = 0.0;
            for (const auto& f : shifted) worst = std::max(worst, f[k]);
            intercept[k] = worst > 1e-10 ? worst : 1.0;
        }
    }
    for (auto& f : shifted) {
        for (std::size_t k = 0; k < m; ++k) f[k] /= intercept[k];
    }
    return shifted;
}

Association associate(const PointSet& normalized, const PointSet& directions) {
    Association a;
    a.direction.resize(normalized.size());
    a.distance.resize(normalized.size());
    std::vector<double> dir_norm2(directions.size());
    for (std::size_t d = 0; d < directions.size(); ++d) {
        double s = 0.0;
        for (double v : directions[d]) s += v * v;
        dir_norm2[d] = s;
    }
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        const auto& f = normalized[i];
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t d = 0; d < directions.size(); ++d) {
            const auto& w = directions[d];
            double dot = 0.0;
            for (std::size_t k = 0; k < f.size(); ++k) dot += f[k] * w[k];
            const double t = dot / dir_norm2[d];
            double perp = 0.0;
            for (std::size_t k = 0; k < f.size(); ++k) {
                const double r = f[k] - t * w[k];
                perp += r * r;
            }
            if (perp < best) {
                best = perp;
                arg = d;
            }
        }
        a.direction[i] = arg;
        a.distance[i] = std::sqrt(best);
    }
    return a;
}

std::vector<std::size_t> nsga3_survival(const PointSet& pool, std::size_t mu, const PointSet& directions,
                                        Rng& rng) {
    if (mu > pool.size()) throw SizeError("nsga3_survival: mu exceeds pool size");
    const FrontPartition part = non_dominated_sort(pool);
    std::vector<std::size_t> selected;
    std::size_t last = 0;
    for (; last < part.fronts.size(); ++last) {
        if (selected.size() + part.fronts[last].size() > mu) break;
        selected.insert(selected.end(), part.fronts[last].begin(), part.fronts[last].end());
    }
    if (selected.size() == mu) return selected;

    const std::vector<std::size_t>& tail = part.fronts[last];
    std::vector<std::size_t> considered = selected;
    considered.insert(considered.end(), tail.begin(), tail.end());
    const PointSet normalized = nsga3_normalize(gather(pool, considered));
    const Association assoc = associate(normalized, directions);

    std::vector<std::size_t> niche(directions.size(), 0);
    for (std::size_t k = 0; k < selected.size(); ++k) ++niche[assoc.direction[k]];

    // Remaining candidates of the split front, bucketed by direction.
    std::vector<std::vector<std::size_t>> bucket(directions.size());
    for (std::size_t k = selected.size(); k < considered.size(); ++k) bucket[assoc.direction[k]].push_back(k);

    while (selected.size() < mu) {
        std::size_t min_count = std::numeric_limits<std::size_t>::max();
        for (std::size_t d = 0; d < directions.size(); ++d) {
            if (!bucket[d].empty()) min_count = std::min(min_count, niche[d]);
        }
        std::vector<std::size_t> ties;
        for (std::size_t d = 0; d < directions.size(); ++d) {
            if (!bucket[d].empty() && niche[d] == min_count) ties.push_back(d);
        }
        const std::size_t d = ties[rng.below(ties.size())];
        auto& cands = bucket[d];
        std::size_t pos = 0;
        if (niche[d] == 0) {
            for (std::size_t c = 1; c < cands.size(); ++c) {
                if (assoc.distance[cands[c]] < assoc.distance[cands[pos]]) pos = c;
            }
        } else {
            pos = rng.below(cands.size());
        }
        selected.push_back(considered[cands[pos]]);
        cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(pos));
        ++niche[d];
    }
    return selected;
}

}  // namespace offmoo
