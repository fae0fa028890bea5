#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cachedse/cache_sim.hpp"
#include "cachedse/cost_model.hpp"
#include "cachedse/genome.hpp"
#include "cachedse/trace.hpp"

namespace cachedse {

struct Evaluation {
    SimCounters icache;
    SimCounters dcache;
    ObjectiveVector objectives;
};

// Maps genomes to simulation results for one (trace, characterization,
// miss mode, seed) context. Evaluations are pure, so results are memoized by
// genome and batches may simulate in parallel without affecting any output.
class Evaluator {
public:
    Evaluator(std::vector<AccessRecord> trace, SearchSpace space, Characterization ch,
              MissMode mode, std::uint64_t seed, int workers = 0, bool memoize = true);

    Evaluation evaluate(const Genome& genome);
    std::vector<ObjectiveVector> evaluate_batch(std::span<const Genome> genomes);
    std::vector<Evaluation> evaluate_batch_full(std::span<const Genome> genomes);

    // Count of distinct genomes simulated so far.
    std::size_t unique_evaluations() const { return seen_.size(); }

    const SearchSpace& space() const { return space_; }
    const Characterization& characterization() const { return ch_; }
    MissMode miss_mode() const { return mode_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t trace_digest() const { return trace_digest_; }
    std::size_t trace_records() const { return trace_.size(); }

private:
    Evaluation compute(const Genome& genome) const;  // pure

    std::vector<AccessRecord> trace_;
    SearchSpace space_;
    Characterization ch_;
    MissMode mode_;
    std::uint64_t seed_;
    int workers_;
    bool memoize_;
    std::uint64_t trace_digest_;
    std::unordered_map<std::uint64_t, Evaluation> memo_;
    std::unordered_set<std::uint64_t> seen_;
};

}  // namespace cachedse
