#include "cachedse/moea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "cachedse/errors.hpp"

namespace cachedse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

double draw_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void NsgaParams::validate() const {
    if (generations < 0) throw ValidationError("nsga: generations must be >= 0");
    if (population_size < 2 || population_size % 2 != 0)
        throw ValidationError("nsga: population_size must be even and >= 2");
    if (p_crossover < 0.0 || p_crossover > 1.0)
        throw ValidationError("nsga: p_crossover must be in [0,1]");
    if (p_mutation < 0.0 || p_mutation > 1.0)
        throw ValidationError("nsga: p_mutation must be in [0,1]");
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    return a.exec_time <= b.exec_time && a.energy <= b.energy &&
           (a.exec_time < b.exec_time || a.energy < b.energy);
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<Individual>& pop) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<int> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;

    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(pop[p].objectives, pop[q].objectives))
                dominated_by[p].push_back(q);
            else if (dominates(pop[q].objectives, pop[p].objectives))
                ++domination_count[p];
        }
        if (domination_count[p] == 0) {
            pop[p].rank = 0;
            current.push_back(p);
        }
    }

    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<std::size_t> next;
        for (std::size_t p : current) {
            for (std::size_t q : dominated_by[p]) {
                if (--domination_count[q] == 0) {
                    pop[q].rank = static_cast<int>(fronts.size());
                    next.push_back(q);
                }
            }
        }
        current = std::move(next);
    }
    return fronts;
}

void crowding_distance(std::vector<Individual>& pop, std::span<const std::size_t> front) {
    for (std::size_t idx : front) pop[idx].crowding = 0.0;
    if (front.size() <= 2) {
        for (std::size_t idx : front) pop[idx].crowding = kInf;
        return;
    }

    std::vector<std::size_t> order(front.begin(), front.end());
    auto accumulate = [&](auto key) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return key(pop[a].objectives) < key(pop[b].objectives);
        });
        const double lo = key(pop[order.front()].objectives);
        const double hi = key(pop[order.back()].objectives);
        pop[order.front()].crowding = kInf;
        pop[order.back()].crowding = kInf;
        if (hi <= lo) return;  // zero-range objective contributes nothing
        for (std::size_t i = 1; i + 1 < order.size(); ++i) {
            if (pop[order[i]].crowding == kInf) continue;
            pop[order[i]].crowding += (key(pop[order[i + 1]].objectives) -
                                       key(pop[order[i - 1]].objectives)) /
                                      (hi - lo);
        }
    };
    accumulate([](const ObjectiveVector& o) { return o.exec_time; });
    accumulate([](const ObjectiveVector& o) { return o.energy; });
}

bool crowded_before(const Individual& a, const Individual& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding >= b.crowding;
}

const Individual& tournament_select(const std::vector<Individual>& pop,
                                    std::mt19937_64& rng) {
    if (pop.empty()) throw ValidationError("tournament_select: empty population");
    const Individual& a = pop[draw_below(rng, pop.size())];
    const Individual& b = pop[draw_below(rng, pop.size())];
    return crowded_before(a, b) ? a : b;
}

std::pair<Genome, Genome> crossover_at(const Genome& a, const Genome& b, int cut) {
    Genome c1 = a, c2 = b;
    for (int i = cut; i < kGenomeLength; ++i) std::swap(c1.genes[i], c2.genes[i]);
    return {c1, c2};
}

std::pair<Genome, Genome> single_point_crossover(const Genome& a, const Genome& b,
                                                 std::mt19937_64& rng) {
    const int cut = 1 + static_cast<int>(draw_below(rng, kGenomeLength - 1));
    return crossover_at(a, b, cut);
}

Genome int_flip_mutation(const Genome& g, double p_mutation, const SearchSpace& space,
                         std::mt19937_64& rng, const Restriction& restriction) {
    Genome out = g;
    for (int i = 0; i < kGenomeLength; ++i) {
        if (draw_unit(rng) >= p_mutation) continue;
        if (restriction[i]) {
            out.genes[i] = *restriction[i];
            continue;
        }
        out.genes[i] = static_cast<int>(
            draw_below(rng, static_cast<std::uint64_t>(space.table_size(i))));
    }
    return out;
}

Genome random_genome(const SearchSpace& space, std::mt19937_64& rng,
                     const Restriction& restriction) {
    Genome g;
    for (int i = 0; i < kGenomeLength; ++i) {
        g.genes[i] = restriction[i]
                         ? *restriction[i]
                         : static_cast<int>(draw_below(
                               rng, static_cast<std::uint64_t>(space.table_size(i))));
    }
    return g;
}

std::vector<std::size_t> nondominated_indices(std::span<const ObjectiveVector> objs) {
    std::vector<std::size_t> order(objs.size());
    for (std::size_t i = 0; i < objs.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (objs[a].exec_time != objs[b].exec_time)
            return objs[a].exec_time < objs[b].exec_time;
        return objs[a].energy < objs[b].energy;
    });

    // Sweep in exec_time order: a point survives iff its energy is strictly
    // below every strictly-faster point's energy and minimal within its own
    // exec_time group (equal-objective duplicates all survive).
    std::vector<std::size_t> keep;
    double best_energy_before = kInf;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        const double t = objs[order[i]].exec_time;
        double group_min = kInf;
        while (j < order.size() && objs[order[j]].exec_time == t) {
            group_min = std::min(group_min, objs[order[j]].energy);
            ++j;
        }
        if (group_min < best_energy_before) {
            for (std::size_t k = i; k < j; ++k)
                if (objs[order[k]].energy == group_min) keep.push_back(order[k]);
            best_energy_before = group_min;
        }
        i = j;
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

ParetoFront dedup_front(std::vector<Individual> members) {
    std::sort(members.begin(), members.end(), [](const Individual& a, const Individual& b) {
        if (a.objectives.exec_time != b.objectives.exec_time)
            return a.objectives.exec_time < b.objectives.exec_time;
        if (a.objectives.energy != b.objectives.energy)
            return a.objectives.energy < b.objectives.energy;
        return a.genome < b.genome;
    });
    ParetoFront front;
    std::unordered_set<std::uint64_t> seen;
    for (auto& ind : members)
        if (seen.insert(ind.genome.key()).second) front.members.push_back(std::move(ind));
    return front;
}

namespace {

void rank_and_crowd(std::vector<Individual>& pop) {
    const auto fronts = fast_nondominated_sort(pop);
    for (const auto& front : fronts) crowding_distance(pop, front);
}

std::vector<Individual> evaluate_population(const BatchEval& problem,
                                            std::vector<Genome> genomes) {
    std::vector<ObjectiveVector> objs = problem(genomes);
    if (objs.size() != genomes.size())
        throw SimulationError("evaluation returned wrong number of objective vectors");
    std::vector<Individual> pop(genomes.size());
    for (std::size_t i = 0; i < genomes.size(); ++i) {
        pop[i].genome = genomes[i];
        pop[i].objectives = objs[i];
    }
    return pop;
}

}  // namespace

EvolveResult evolve(const BatchEval& problem, const SearchSpace& space,
                    const NsgaParams& params, const Restriction& restriction,
                    const GenerationObserver& observer) {
    params.validate();
    space.validate_restriction(restriction);
    std::mt19937_64 rng(params.seed);
    const auto pop_size = static_cast<std::size_t>(params.population_size);

    std::vector<Genome> init;
    init.reserve(pop_size);
    for (std::size_t i = 0; i < pop_size; ++i)
        init.push_back(random_genome(space, rng, restriction));

    std::vector<Individual> pop = evaluate_population(problem, std::move(init));
    rank_and_crowd(pop);
    if (observer) observer(0, pop);

    for (int gen = 1; gen <= params.generations; ++gen) {
        std::vector<Genome> offspring;
        offspring.reserve(pop_size);
        while (offspring.size() < pop_size) {
            const Genome& p1 = tournament_select(pop, rng).genome;
            const Genome& p2 = tournament_select(pop, rng).genome;
            auto [c1, c2] = draw_unit(rng) < params.p_crossover
                                ? single_point_crossover(p1, p2, rng)
                                : std::make_pair(p1, p2);
            offspring.push_back(
                int_flip_mutation(c1, params.p_mutation, space, rng, restriction));
            if (offspring.size() < pop_size)
                offspring.push_back(
                    int_flip_mutation(c2, params.p_mutation, space, rng, restriction));
        }

        std::vector<Individual> children =
            evaluate_population(problem, std::move(offspring));
        std::vector<Individual> combined = std::move(pop);
        combined.insert(combined.end(), children.begin(), children.end());

        const auto fronts = fast_nondominated_sort(combined);
        for (const auto& front : fronts) crowding_distance(combined, front);

        std::vector<Individual> next;
        next.reserve(pop_size);
        for (const auto& front : fronts) {
            if (next.size() + front.size() <= pop_size) {
                for (std::size_t idx : front) next.push_back(combined[idx]);
            } else {
                std::vector<std::size_t> order(front.begin(), front.end());
                std::stable_sort(order.begin(), order.end(),
                                 [&](std::size_t a, std::size_t b) {
                                     return combined[a].crowding > combined[b].crowding;
                                 });
                for (std::size_t idx : order) {
                    if (next.size() == pop_size) break;
                    next.push_back(combined[idx]);
                }
            }
            if (next.size() == pop_size) break;
        }
        pop = std::move(next);
        rank_and_crowd(pop);
        if (observer) observer(gen, pop);
    }

    std::vector<Individual> rank0;
    for (const Individual& ind : pop)
        if (ind.rank == 0) rank0.push_back(ind);
    return {std::move(pop), dedup_front(std::move(rank0))};
}

double hypervolume_2d(std::span<const ObjectiveVector> points, const ObjectiveVector& ref,
                      std::size_t* clipped) {
    std::vector<ObjectiveVector> inside;
    inside.reserve(points.size());
    for (const auto& p : points)
        if (p.exec_time < ref.exec_time && p.energy < ref.energy) inside.push_back(p);
    if (clipped) *clipped = points.size() - inside.size();
    if (inside.empty()) return 0.0;

    std::sort(inside.begin(), inside.end(), [](const auto& a, const auto& b) {
        if (a.exec_time != b.exec_time) return a.exec_time < b.exec_time;
        return a.energy < b.energy;
    });

    // Disjoint slabs left to right; dominated points add nothing.
    double area = 0.0;
    double prev_energy = ref.energy;
    for (const auto& p : inside) {
        if (p.energy < prev_energy) {
            area += (ref.exec_time - p.exec_time) * (prev_energy - p.energy);
            prev_energy = p.energy;
        }
    }
    return area;
}

void NormalizationBounds::validate() const {
    for (double v : {time_min, time_max, energy_min, energy_max})
        if (!std::isfinite(v))
            throw ValidationError("normalization bounds must be finite");
    if (!(time_min < time_max) || !(energy_min < energy_max))
        throw ValidationError("degenerate normalization bounds (min must be < max)");
}

NormalizationBounds bounds_over(std::span<const ObjectiveVector> points) {
    NormalizationBounds b{kInf, -kInf, kInf, -kInf};
    for (const auto& p : points) {
        b.time_min = std::min(b.time_min, p.exec_time);
        b.time_max = std::max(b.time_max, p.exec_time);
        b.energy_min = std::min(b.energy_min, p.energy);
        b.energy_max = std::max(b.energy_max, p.energy);
    }
    return b;
}

double hypervolume_minus(std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                         const NormalizationBounds& bounds) {
    bounds.validate();
    std::vector<ObjectiveVector> normalized;
    normalized.reserve(front.size());
    for (const auto& p : front)
        normalized.push_back(
            {(p.exec_time - bounds.time_min) / (bounds.time_max - bounds.time_min),
             (p.energy - bounds.energy_min) / (bounds.energy_max - bounds.energy_min)});
    return -hypervolume_2d(normalized, ref) + 0.0;  // canonicalize -0
}

}  // namespace cachedse
