#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cachedse/evaluator.hpp"
#include "cachedse/moea.hpp"

namespace cachedse {

// Synthetic trace request as it appears in a spec file.
struct SynthTraceRequest {
    SynthSpec pattern;
    std::uint64_t count = 0;
    std::uint64_t seed = 0;
};

// A fully resolved experiment: trace, search space, characterization, GA
// parameters, baselines and output location. Loaded from a JSON spec file;
// CLI overrides are applied on top before running.
struct ExperimentSpec {
    std::variant<std::filesystem::path, SynthTraceRequest> trace;
    std::optional<std::filesystem::path> search_space_file;  // default space if absent
    std::filesystem::path characterization_file;
    NsgaParams nsga;
    std::vector<Genome> baselines;
    MissMode miss_mode = MissMode::Combined;
    std::optional<std::uint64_t> max_records;
    std::filesystem::path output_dir = "out";
    std::uint64_t exhaustive_budget = 64800;
    // Seeds RANDOM-replacement victim streams. Fixed per experiment, never
    // tied to the GA seed: evaluation stays a pure function of the spec, so
    // repeated GA runs with different seeds see identical objectives.
    std::uint64_t sim_seed = 0;

    // Runtime knobs; never serialized into artifacts.
    int workers = 0;  // 0 = all cores
    bool memoize = true;
    Restriction restriction{};

    static ExperimentSpec from_json_file(const std::filesystem::path& path);
};

// Validates the spec and loads everything it references before any
// simulation starts.
class Experiment {
public:
    explicit Experiment(const ExperimentSpec& spec);

    Evaluator& evaluator() { return *evaluator_; }
    const Evaluator& evaluator() const { return *evaluator_; }
    const SearchSpace& space() const { return space_; }
    const ExperimentSpec& spec() const { return spec_; }

private:
    ExperimentSpec spec_;
    SearchSpace space_;
    std::unique_ptr<Evaluator> evaluator_;
};

struct FrontRow {
    Genome genome;
    ObjectiveVector objectives;
};

// Population-mean improvement vs the first baseline at the initial
// generation, averaged over all generations, and at the final generation.
struct ImprovementSummary {
    ImprovementPct initial;
    ImprovementPct average;
    ImprovementPct final_gen;
};

struct OptimizeArtifacts {
    std::filesystem::path front_csv;
    std::filesystem::path pareto_json;
    std::filesystem::path log_csv;
    ParetoFront front;
    std::size_t unique_evaluations = 0;
    std::optional<ImprovementSummary> improvement;  // present when baselines exist
};

// Runs NSGA-II over the configured space and writes front.csv,
// pareto_set.json and log.csv into the output directory.
OptimizeArtifacts run_optimize(const ExperimentSpec& spec);

struct ExhaustiveArtifacts {
    std::filesystem::path table_csv;
    std::filesystem::path front_csv;
    std::filesystem::path pareto_json;
    std::vector<FrontRow> table;  // every genome of the (restricted) space
    ParetoFront front;
};

// Evaluates every genome of the (restricted) space once and extracts the
// exact Pareto front. Fails if the space exceeds the configured budget.
ExhaustiveArtifacts run_exhaustive(const ExperimentSpec& spec);

struct ComparePoint {
    std::size_t baseline_index = 0;
    std::size_t point_index = 0;
    ImprovementPct pct;
};

struct CompareReport {
    std::vector<ObjectiveVector> baseline_objectives;
    std::vector<ComparePoint> points;
    std::vector<ImprovementPct> front_means;  // one per baseline
    std::filesystem::path csv;
};

// Improvement of every front point over every baseline genome, plus
// per-front means, written to compare.csv.
CompareReport run_compare(const ExperimentSpec& spec,
                          const std::filesystem::path& front_csv);

// Single-configuration report; prints counters and objectives to `out`.
Evaluation run_simulate(const ExperimentSpec& spec, const Genome& genome,
                        std::ostream& out);

struct HypervolumeReport {
    std::vector<double> values;  // I_H-minus per front file
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
    NormalizationBounds bounds;
};

// Batch I_H-minus over front CSV files. Bounds default to the min/max over
// the union of the fronts; the reference point lives in normalized space.
HypervolumeReport run_hypervolume(const std::vector<std::filesystem::path>& front_files,
                                  const SearchSpace& space,
                                  std::optional<NormalizationBounds> bounds,
                                  const ObjectiveVector& ref = kDefaultHvReference,
                                  std::ostream* warnings = nullptr);

// front.csv helpers (decoded symbols in Table-style column order, then the
// two objectives at full round-trip precision).
void write_front_csv(const std::filesystem::path& path, const SearchSpace& space,
                     const std::vector<FrontRow>& rows);
std::vector<FrontRow> read_front_csv(const std::filesystem::path& path,
                                     const SearchSpace& space);

std::string format_full(double v);  // shortest exact round-trip decimal

}  // namespace cachedse
