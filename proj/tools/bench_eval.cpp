// Benchmark: optimized cache simulator vs the naive reference model, and
// OpenMP-parallel population evaluation vs a single worker.

#include <omp.h>

#include <cstdio>
#include <random>
#include <vector>

#include <CLI11.hpp>

#include "cachedse/cost_model.hpp"
#include "cachedse/evaluator.hpp"
#include "cachedse/explorer.hpp"
#include "cachedse/moea.hpp"
#include "reference_cache_sim.hpp"

using namespace cachedse;

namespace {

std::vector<AccessRecord> make_trace(std::uint64_t records) {
    SynthSpec spec;
    spec.pattern = SynthSpec::Pattern::Loop;
    spec.base = 0;
    spec.working_set = 48 * 1024;
    spec.stride = 4;
    spec.mix = {0.6, 0.3, 0.1};
    return synth_trace(spec, records, 12345);
}

double now() { return omp_get_wtime(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cachedse evaluation benchmarks"};
    std::uint64_t records = 500000;
    std::size_t genomes = 64;
    int workers = omp_get_max_threads();
    app.add_option("--records", records, "trace length");
    app.add_option("--genomes", genomes, "population size for the batch benchmark");
    app.add_option("--workers", workers, "parallel worker count");
    CLI11_PARSE(app, argc, argv);

    const std::vector<AccessRecord> trace = make_trace(records);
    const SearchSpace space = SearchSpace::default_space();
    const Characterization ch = Characterization::from_json_file(
        std::filesystem::path(CACHEDSE_DATA_DIR) / "characterization_synthetic.json");

    // Simulator vs reference on one configuration pair.
    const CacheConfigPair pair = space.decode(Genome{{1, 1, 0, 1, 1, 1, 0, 1, 0}});
    double t0 = now();
    const SimResult fast = simulate(trace, pair.icache, pair.dcache, 1, 2);
    const double t_fast = now() - t0;

    t0 = now();
    const auto ref = testing::reference_simulate(trace, pair.icache, pair.dcache, 1, 2);
    const double t_ref = now() - t0;

    if (fast.icache != ref.icache || fast.dcache != ref.dcache) {
        std::fprintf(stderr, "counter mismatch between simulator and reference\n");
        return 2;
    }
    std::printf("simulator: %zu records\n", trace.size());
    std::printf("  optimized  %8.3f s  (%.1f Maccess/s)\n", t_fast,
                static_cast<double>(trace.size()) / t_fast / 1e6);
    std::printf("  reference  %8.3f s  (%.1f Maccess/s)\n", t_ref,
                static_cast<double>(trace.size()) / t_ref / 1e6);
    std::printf("  speedup    %8.2fx\n", t_ref / t_fast);

    // Population evaluation: serial vs parallel workers.
    std::mt19937_64 rng(7);
    std::vector<Genome> population;
    for (std::size_t i = 0; i < genomes; ++i)
        population.push_back(random_genome(space, rng));

    Evaluator serial(trace, space, ch, MissMode::Combined, 1, 1, false);
    t0 = now();
    const auto serial_objs = serial.evaluate_batch(population);
    const double t_serial = now() - t0;

    Evaluator parallel(trace, space, ch, MissMode::Combined, 1, workers, false);
    t0 = now();
    const auto parallel_objs = parallel.evaluate_batch(population);
    const double t_parallel = now() - t0;

    if (serial_objs != parallel_objs) {
        std::fprintf(stderr, "objective mismatch between serial and parallel runs\n");
        return 2;
    }
    std::printf("population evaluation: %zu genomes\n", genomes);
    std::printf("  1 worker   %8.3f s\n", t_serial);
    std::printf("  %d workers %8.3f s\n", workers, t_parallel);
    std::printf("  speedup    %8.2fx\n", t_serial / t_parallel);
    return 0;
}
