#include "demand_frontier/portfolio.hpp"

#include "demand_frontier/error.hpp"
#include "demand_frontier/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace demand_frontier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Genome = std::vector<double>;

struct Individual {
    Genome genes;
    double objective = kInf;
    double fitness = kInf;
    double demand = 0.0;
};

std::size_t count_selected(const Genome& g) {
    return static_cast<std::size_t>(std::count_if(g.begin(), g.end(), [](double w) { return w > 0.0; }));
}

std::size_t random_index(Rng& rng, std::size_t n) {
    return std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)), n - 1);
}

/// Enforces the cardinality cap and non-emptiness. Binary genomes lose
/// random members; relaxed genomes lose their smallest weights.
void repair(Genome& g, std::size_t cap, SelectionMode mode, Rng& rng) {
    std::size_t selected = count_selected(g);
    if (selected > cap) {
        std::vector<std::size_t> on;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g[i] > 0.0) on.push_back(i);
        if (mode == SelectionMode::binary) {
            std::shuffle(on.begin(), on.end(), rng);
        } else {
            std::stable_sort(on.begin(), on.end(), [&g](std::size_t a, std::size_t b) { return g[a] < g[b]; });
        }
        for (std::size_t j = 0; j < selected - cap; ++j) g[on[j]] = 0.0;
        selected = cap;
    }
    if (selected == 0) g[random_index(rng, g.size())] = 1.0;
}

class GeneticSearch {
public:
    GeneticSearch(const ObjectiveFn& objective, const Partition& partition, std::span<const double> point_forecasts,
                  const GaConfig& config, SelectionMode mode)
        : objective_(objective), partition_(partition), yhat_(point_forecasts), config_(config), mode_(mode),
          rng_(make_rng(config.seed, mode == SelectionMode::binary ? 0xb1ULL : 0xe1ULL)) {
        config_.validate();
        if (yhat_.empty()) throw InvalidInput("ga: no households");
        if (!(partition_.upper > partition_.lower)) throw InvalidInput("ga: partition bounds are empty");
        n_ = yhat_.size();
        mutation_ = config_.mutation_probability < 0.0 ? 1.0 / static_cast<double>(n_) : config_.mutation_probability;
    }

    GaResult run(const std::vector<Genome>& seeds) {
        std::vector<Individual> pop;
        for (const Genome& s : seeds) {
            if (pop.size() >= config_.population) break;
            if (s.size() != n_) throw InvalidInput("ga: warm-start selection has the wrong length");
            Genome g = s;
            for (auto& w : g) w = std::clamp(w, 0.0, 1.0);
            repair(g, config_.cardinality_cap, mode_, rng_);
            pop.push_back({std::move(g)});
        }
        while (pop.size() < config_.population) pop.push_back({initial_genome()});
        evaluate(pop);
        set_penalty(pop);
        score(pop);

        GaResult result;
        double best = best_fitness(pop);
        result.history.push_back(best);
        int stall = 0, gen = 0;
        for (gen = 1; gen <= config_.max_generations; ++gen) {
            std::vector<Individual> next = elites(pop);
            while (next.size() < config_.population) {
                const Individual& a = tournament(pop);
                const Individual& b = tournament(pop);
                auto [c1, c2] = crossover(a.genes, b.genes);
                mutate(c1);
                repair(c1, config_.cardinality_cap, mode_, rng_);
                next.push_back({std::move(c1)});
                if (next.size() < config_.population) {
                    mutate(c2);
                    repair(c2, config_.cardinality_cap, mode_, rng_);
                    next.push_back({std::move(c2)});
                }
            }
            evaluate(next);
            score(next);
            pop = std::move(next);
            const double current = best_fitness(pop);
            result.history.push_back(current);
            if (current < best - 1e-12 * std::max(1.0, std::abs(best))) {
                best = current;
                stall = 0;
            } else if (++stall >= config_.stall_generations) {
                break;
            }
        }
        result.generations = std::min(gen, config_.max_generations);
        result.evaluations = cache_.size();
        if (!best_feasible_) {
            std::ostringstream msg;
            msg << "ga: no feasible selection found for partition " << partition_.index << " (" << partition_.lower
                << ", " << partition_.upper << ") kW; best infeasible candidate has demand " << best_infeasible_.demand
                << " kW, violation " << partition_.violation(best_infeasible_.demand) << " kW, members "
                << count_selected(best_infeasible_.genes);
            throw InfeasibleError(msg.str());
        }
        result.selection = best_feasible_->genes;
        result.objective = best_feasible_->objective;
        result.expected_demand = best_feasible_->demand;
        return result;
    }

private:
    Genome initial_genome() {
        if (auto s = sample_feasible(yhat_, partition_, config_.cardinality_cap, rng_)) return *s;
        const double total = std::accumulate(yhat_.begin(), yhat_.end(), 0.0);
        const double target = 0.5 * (partition_.lower + partition_.upper);
        const double density = std::clamp(total > 0.0 ? target / total : 0.5, 1.0 / static_cast<double>(n_), 1.0);
        Genome g(n_, 0.0);
        for (auto& w : g) w = uniform01(rng_) < density ? 1.0 : 0.0;
        repair(g, config_.cardinality_cap, mode_, rng_);
        return g;
    }

    void evaluate(std::vector<Individual>& pop) {
        std::vector<const Genome*> pending;
        for (const auto& ind : pop)
            if (!cache_.contains(ind.genes) &&
                std::none_of(pending.begin(), pending.end(), [&](const Genome* g) { return *g == ind.genes; }))
                pending.push_back(&ind.genes);
        std::vector<double> values(pending.size(), kInf);
        parallel_for(pending.size(), config_.jobs, [&](std::size_t i) {
            try {
                const double v = objective_(*pending[i]);
                values[i] = std::isfinite(v) ? v : kInf;
            } catch (const Error&) {
                values[i] = kInf;
            }
        });
        for (std::size_t i = 0; i < pending.size(); ++i) {
            const Genome& g = *pending[i];
            cache_.emplace(g, values[i]);
            track(g, values[i]);
        }
        for (auto& ind : pop) {
            ind.objective = cache_.at(ind.genes);
            ind.demand = expected_demand(yhat_, ind.genes);
        }
    }

    void track(const Genome& g, double value) {
        const double d = expected_demand(yhat_, g);
        if (partition_.contains(d) && std::isfinite(value)) {
            if (!best_feasible_ || value < best_feasible_->objective) best_feasible_ = Individual{g, value, value, d};
        } else {
            const double v = partition_.violation(d);
            if (best_infeasible_.genes.empty() || v < partition_.violation(best_infeasible_.demand))
                best_infeasible_ = Individual{g, value, kInf, d};
        }
    }

    void set_penalty(const std::vector<Individual>& pop) {
        std::vector<double> finite;
        for (const auto& ind : pop)
            if (std::isfinite(ind.objective)) finite.push_back(std::abs(ind.objective));
        double scale = 1.0;
        if (!finite.empty()) {
            std::nth_element(finite.begin(), finite.begin() + static_cast<std::ptrdiff_t>(finite.size() / 2),
                             finite.end());
            scale = finite[finite.size() / 2];
            if (!(scale > 0.0)) scale = 1.0;
        }
        penalty_ = config_.penalty_coefficient * scale / (partition_.upper - partition_.lower);
    }

    void score(std::vector<Individual>& pop) const {
        for (auto& ind : pop)
            ind.fitness = std::isfinite(ind.objective) ? ind.objective + penalty_ * partition_.violation(ind.demand)
                                                       : kInf;
    }

    static double best_fitness(const std::vector<Individual>& pop) {
        double best = kInf;
        for (const auto& ind : pop) best = std::min(best, ind.fitness);
        return best;
    }

    std::vector<Individual> elites(const std::vector<Individual>& pop) const {
        std::vector<std::size_t> order(pop.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&pop](std::size_t a, std::size_t b) { return pop[a].fitness < pop[b].fitness; });
        std::vector<Individual> out;
        for (std::size_t i = 0; i < std::min(config_.elites, pop.size()); ++i) out.push_back(pop[order[i]]);
        return out;
    }

    const Individual& tournament(const std::vector<Individual>& pop) {
        const Individual* best = &pop[random_index(rng_, pop.size())];
        for (std::size_t i = 1; i < config_.tournament_size; ++i) {
            const Individual& c = pop[random_index(rng_, pop.size())];
            if (c.fitness < best->fitness) best = &c;
        }
        return *best;
    }

    std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b) {
        Genome c1 = a, c2 = b;
        if (uniform01(rng_) >= config_.crossover_probability) return {c1, c2};
        if (mode_ == SelectionMode::binary) {
            for (std::size_t i = 0; i < n_; ++i)
                if (uniform01(rng_) < 0.5) std::swap(c1[i], c2[i]);
            return {c1, c2};
        }
        const double alpha = config_.blend_alpha;
        for (std::size_t i = 0; i < n_; ++i) {
            const double lo = std::min(a[i], b[i]), hi = std::max(a[i], b[i]);
            const double span = hi - lo;
            if (span == 0.0) continue;
            const double from = lo - alpha * span, to = hi + alpha * span;
            c1[i] = std::clamp(from + (to - from) * uniform01(rng_), 0.0, 1.0);
            c2[i] = std::clamp(from + (to - from) * uniform01(rng_), 0.0, 1.0);
        }
        return {c1, c2};
    }

    void mutate(Genome& g) {
        std::normal_distribution<double> step(0.0, config_.mutation_sigma);
        for (auto& w : g) {
            if (uniform01(rng_) >= mutation_) continue;
            if (mode_ == SelectionMode::binary)
                w = w > 0.0 ? 0.0 : 1.0;
            else
                w = std::clamp(w + step(rng_), 0.0, 1.0);
        }
        if (mode_ == SelectionMode::relaxed)
            for (auto& w : g)
                if (w < 1e-6) w = 0.0;
    }

    const ObjectiveFn& objective_;
    Partition partition_;
    std::span<const double> yhat_;
    GaConfig config_;
    SelectionMode mode_;
    Rng rng_;
    std::size_t n_ = 0;
    double mutation_ = 0.0;
    double penalty_ = 1.0;
    std::map<Genome, double> cache_;
    std::optional<Individual> best_feasible_;
    Individual best_infeasible_;
};

}  // namespace

double Partition::violation(double demand) const noexcept {
    const double v = std::max({0.0, lower - demand, demand - upper});
    if (v == 0.0 && !contains(demand)) return 1e-9 * std::max(1.0, upper - lower);
    return v;
}

std::vector<Partition> partition_demand_range(double total, std::size_t k, std::size_t lead_time) {
    if (k < 1) throw InvalidInput("partitions: K must be at least 1");
    if (!(total > 0.0) || !std::isfinite(total))
        throw InvalidInput("partitions: total forecast demand must be positive, got " + std::to_string(total));
    std::vector<Partition> out;
    const double width = total / static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i)
        out.push_back({i, lead_time, width * static_cast<double>(i), i + 1 == k ? total : width * static_cast<double>(i + 1)});
    return out;
}

double demand_ceiling(std::span<const double> point_forecasts, std::size_t cap) {
    std::vector<double> sorted(point_forecasts.begin(), point_forecasts.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double total = 0.0;
    for (std::size_t i = 0; i < std::min(cap, sorted.size()); ++i) total += std::max(sorted[i], 0.0);
    return total;
}

double expected_demand(std::span<const double> point_forecasts, std::span<const double> v) {
    detail::require(point_forecasts.size() == v.size(), "expected demand: selection length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) d += point_forecasts[i] * v[i];
    return d;
}

void GaConfig::validate() const {
    detail::require(population >= 2, "ga: population must be at least 2");
    detail::require(max_generations >= 0 && stall_generations >= 1, "ga: invalid generation limits");
    detail::require(crossover_probability >= 0.0 && crossover_probability <= 1.0,
                    "ga: crossover probability must lie in [0, 1]");
    detail::require(mutation_probability <= 1.0, "ga: mutation probability must not exceed 1");
    detail::require(tournament_size >= 1, "ga: tournament size must be positive");
    detail::require(elites < population, "ga: elites must be fewer than the population");
    detail::require(penalty_coefficient > 0.0, "ga: penalty coefficient must be positive");
    detail::require(cardinality_cap >= 1, "ga: cardinality cap must be positive");
    detail::require(blend_alpha >= 0.0 && mutation_sigma > 0.0, "ga: invalid relaxed-mode operators");
}

std::optional<SelectionVector> sample_feasible(std::span<const double> point_forecasts, const Partition& partition,
                                               std::size_t cap, Rng& rng, int attempts) {
    const std::size_t n = point_forecasts.size();
    std::vector<std::size_t> order(n);
    std::vector<double> keys(n);
    for (int a = 0; a < attempts; ++a) {
        std::iota(order.begin(), order.end(), 0);
        if (a < attempts / 2) {
            std::shuffle(order.begin(), order.end(), rng);
        } else {
            // size-biased order (Efraimidis-Spirakis keys) with a rising exponent
            const double beta = 0.5 * static_cast<double>(a - attempts / 2 + 1);
            for (std::size_t i = 0; i < n; ++i) {
                const double w = std::pow(std::max(point_forecasts[i], 1e-12), beta);
                keys[i] = std::log(std::max(uniform01(rng), 1e-300)) / w;
            }
            std::stable_sort(order.begin(), order.end(), [&keys](std::size_t x, std::size_t y) { return keys[x] > keys[y]; });
        }
        const double target = partition.lower + (partition.upper - partition.lower) * uniform01(rng);
        SelectionVector v(n, 0.0);
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i : order) {
            if (count == cap || sum >= target) break;
            if (sum + point_forecasts[i] < partition.upper) {
                v[i] = 1.0;
                sum += point_forecasts[i];
                ++count;
            }
        }
        if (count > 0 && partition.contains(sum)) return v;
    }
    return std::nullopt;
}

GaResult ga_optimize(const ObjectiveFn& objective, const Partition& partition, std::span<const double> point_forecasts,
                     const GaConfig& config, const std::vector<SelectionVector>& seeds) {
    return GeneticSearch(objective, partition, point_forecasts, config, SelectionMode::binary).run(seeds);
}

std::vector<SelectionVector> greedy_selections(std::span<const double> cost, std::span<const double> point_forecasts,
                                               const Partition& partition, std::size_t cap,
                                               std::span<const double> fill_levels) {
    const std::size_t n = point_forecasts.size();
    detail::require(cost.size() == n, "greedy selection: cost length mismatch");
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(cost[i]) && point_forecasts[i] > 0.0) usable.push_back(i);

    const auto fill = [&](const std::vector<std::size_t>& order, double target) {
        SelectionVector v(n, 0.0);
        double demand = 0.0;
        std::size_t members = 0;
        for (std::size_t i : order) {
            if (members == cap || demand >= target) break;
            if (!(demand + point_forecasts[i] < partition.upper)) continue;
            v[i] = 1.0;
            demand += point_forecasts[i];
            ++members;
        }
        return std::make_pair(std::move(v), members > 0 && partition.contains(demand));
    };

    std::vector<SelectionVector> out;
    for (double level : fill_levels) {
        const double target = partition.lower + level * (partition.upper - partition.lower);
        // when the cap binds, tilt the ranking towards larger households
        for (double tilt : {0.0, 1.0, 2.0, 4.0, 8.0}) {
            std::vector<std::size_t> order = usable;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return cost[a] / std::pow(point_forecasts[a], tilt) < cost[b] / std::pow(point_forecasts[b], tilt);
            });
            auto [v, ok] = fill(order, target);
            if (!ok) continue;
            if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
            break;
        }
    }
    return out;
}

GaResult ga_optimize_relaxed(const ObjectiveFn& objective, const Partition& partition,
                             std::span<const double> point_forecasts, const GaConfig& config,
                             const std::vector<SelectionVector>& warm_start) {
    return GeneticSearch(objective, partition, point_forecasts, config, SelectionMode::relaxed).run(warm_start);
}

}  // namespace demand_frontier
