#include "cachedse/evaluator.hpp"

#include <omp.h>

#include "cachedse/rng.hpp"

namespace cachedse {

namespace {

// Replacement RNG seeds derive from the cache's own identity, not the whole
// genome: two genomes differing only in write policy must replay identical
// victim sequences, otherwise read-only traces could not reproduce their
// write-policy twins bit-for-bit.
std::uint64_t cache_rng_seed(std::uint64_t global_seed, CacheRole role,
                             const CacheConfig& cfg) {
    std::uint64_t s = mix_seed(global_seed, role == CacheRole::Instruction ? 0x49 : 0x44);
    s = mix_seed(s, cfg.total_size);
    s = mix_seed(s, cfg.line_size);
    s = mix_seed(s, cfg.ways);
    s = mix_seed(s, static_cast<std::uint64_t>(cfg.replacement));
    s = mix_seed(s, static_cast<std::uint64_t>(cfg.prefetch));
    return s;
}

}  // namespace

Evaluator::Evaluator(std::vector<AccessRecord> trace, SearchSpace space,
                     Characterization ch, MissMode mode, std::uint64_t seed, int workers,
                     bool memoize)
    : trace_(std::move(trace)),
      space_(std::move(space)),
      ch_(std::move(ch)),
      mode_(mode),
      seed_(seed),
      workers_(workers > 0 ? workers : omp_get_max_threads()),
      memoize_(memoize),
      trace_digest_(cachedse::trace_digest(trace_)) {
    ch_.require_covers(space_);
}

Evaluation Evaluator::compute(const Genome& genome) const {
    const CacheConfigPair pair = space_.decode(genome);
    const SimResult sim =
        simulate(trace_, pair.icache, pair.dcache,
                 cache_rng_seed(seed_, CacheRole::Instruction, pair.icache),
                 cache_rng_seed(seed_, CacheRole::Data, pair.dcache));
    Evaluation ev;
    ev.icache = sim.icache;
    ev.dcache = sim.dcache;
    ev.objectives =
        objectives(sim.icache, sim.dcache, pair.icache, pair.dcache, ch_, mode_);
    return ev;
}

Evaluation Evaluator::evaluate(const Genome& genome) {
    const std::uint64_t key = genome.key();
    if (memoize_) {
        if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    const Evaluation ev = compute(genome);
    seen_.insert(key);
    if (memoize_) memo_.emplace(key, ev);
    return ev;
}

std::vector<Evaluation> Evaluator::evaluate_batch_full(std::span<const Genome> genomes) {
    std::vector<Evaluation> results(genomes.size());
    std::vector<std::size_t> pending;

    if (memoize_) {
        std::unordered_map<std::uint64_t, std::size_t> first_at;
        for (std::size_t i = 0; i < genomes.size(); ++i) {
            const std::uint64_t key = genomes[i].key();
            if (memo_.contains(key)) continue;
            if (first_at.emplace(key, i).second) pending.push_back(i);
        }
    } else {
        pending.resize(genomes.size());
        for (std::size_t i = 0; i < genomes.size(); ++i) pending[i] = i;
    }

    // Validate on the serial path; an exception escaping the parallel loop
    // would terminate instead of propagating.
    for (std::size_t i : pending) space_.validate_genome(genomes[i]);

    std::vector<Evaluation> fresh(pending.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers_)
    for (std::size_t i = 0; i < pending.size(); ++i)
        fresh[i] = compute(genomes[pending[i]]);

    if (memoize_) {
        for (std::size_t i = 0; i < pending.size(); ++i) {
            const std::uint64_t key = genomes[pending[i]].key();
            seen_.insert(key);
            memo_.emplace(key, fresh[i]);
        }
        for (std::size_t i = 0; i < genomes.size(); ++i)
            results[i] = memo_.at(genomes[i].key());
    } else {
        for (std::size_t i = 0; i < pending.size(); ++i) {
            seen_.insert(genomes[pending[i]].key());
            results[pending[i]] = fresh[i];
        }
    }
    return results;
}

std::vector<ObjectiveVector> Evaluator::evaluate_batch(std::span<const Genome> genomes) {
    std::vector<Evaluation> full = evaluate_batch_full(genomes);
    std::vector<ObjectiveVector> objs(full.size());
    for (std::size_t i = 0; i < full.size(); ++i) objs[i] = full[i].objectives;
    return objs;
}

}  // namespace cachedse
