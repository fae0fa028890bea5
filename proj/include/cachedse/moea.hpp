#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "cachedse/cost_model.hpp"
#include "cachedse/genome.hpp"

namespace cachedse {

struct Individual {
    Genome genome;
    ObjectiveVector objectives;
    int rank = 0;
    double crowding = 0.0;
};

struct NsgaParams {
    int generations = 250;
    int population_size = 100;  // must be even and >= 2
    double p_crossover = 0.9;
    double p_mutation = 1.0 / 9.0;  // per gene
    std::uint64_t seed = 1;

    void validate() const;
};

// Rank-0 individuals, deduplicated by genome and ordered by
// (exec_time, energy, genome) for stable output.
struct ParetoFront {
    std::vector<Individual> members;
};

// Strict Pareto dominance, minimization, exact comparisons.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// Assigns ranks and returns fronts as index lists into `pop`.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<Individual>& pop);

// Assigns crowding distances to one mutually non-dominating front.
void crowding_distance(std::vector<Individual>& pop, std::span<const std::size_t> front);

// Crowded comparison: lower rank wins, then larger crowding; full ties
// resolve to `a`.
bool crowded_before(const Individual& a, const Individual& b);

// Binary tournament with replacement on the crowded comparison; the first
// individual drawn wins ties.
const Individual& tournament_select(const std::vector<Individual>& pop, std::mt19937_64& rng);

// Children swap gene suffixes at `cut` (in [1, 8]).
std::pair<Genome, Genome> crossover_at(const Genome& a, const Genome& b, int cut);
std::pair<Genome, Genome> single_point_crossover(const Genome& a, const Genome& b,
                                                 std::mt19937_64& rng);

// Each gene is independently resampled uniformly over its value table with
// probability p_mutation. Genes fixed by the restriction stay fixed.
Genome int_flip_mutation(const Genome& g, double p_mutation, const SearchSpace& space,
                         std::mt19937_64& rng, const Restriction& restriction = {});

Genome random_genome(const SearchSpace& space, std::mt19937_64& rng,
                     const Restriction& restriction = {});

// Indices of the non-dominated points of `objs`, in input order. Exact and
// O(n log n); keeps duplicate-objective entries.
std::vector<std::size_t> nondominated_indices(std::span<const ObjectiveVector> objs);

ParetoFront dedup_front(std::vector<Individual> members);

// Batch fitness evaluation; must be pure and may evaluate in parallel.
using BatchEval = std::function<std::vector<ObjectiveVector>(std::span<const Genome>)>;

// Called after the initial evaluation (generation 0) and after each
// generation's environmental selection.
using GenerationObserver = std::function<void(int generation, const std::vector<Individual>&)>;

struct EvolveResult {
    std::vector<Individual> population;
    ParetoFront front;
};

// Generational NSGA-II: binary tournaments, single-point crossover with
// p_crossover (parents copied otherwise), per-gene mutation, then elitist
// (mu+lambda) selection by rank and crowding. Deterministic for a fixed seed
// regardless of how `problem` parallelizes internally.
EvolveResult evolve(const BatchEval& problem, const SearchSpace& space,
                    const NsgaParams& params, const Restriction& restriction = {},
                    const GenerationObserver& observer = {});

// Area dominated by `points` up to `ref`; points not strictly dominating the
// reference are clipped out (count reported via `clipped` when non-null).
double hypervolume_2d(std::span<const ObjectiveVector> points, const ObjectiveVector& ref,
                      std::size_t* clipped = nullptr);

struct NormalizationBounds {
    double time_min = 0.0;
    double time_max = 0.0;
    double energy_min = 0.0;
    double energy_max = 0.0;

    void validate() const;  // finite, min < max per objective
};

NormalizationBounds bounds_over(std::span<const ObjectiveVector> points);

inline constexpr ObjectiveVector kDefaultHvReference{1.1, 1.1};

// I_H-minus: objectives are min-max normalized with `bounds`, then the
// negated hypervolume against `ref` is returned. Smaller is better.
double hypervolume_minus(std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                         const NormalizationBounds& bounds);

}  // namespace cachedse
