#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cachedse/errors.hpp"
#include "cachedse/explorer.hpp"

namespace {

using namespace cachedse;

struct CommonOptions {
    std::string spec_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> sim_seed;
    std::optional<int> workers;
    std::optional<std::uint64_t> max_records;
    bool demand_only = false;
    bool no_memo = false;
    std::string restrict_expr;
    std::optional<std::string> output_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool spec_required = true) {
    auto* spec = cmd->add_option("--spec", opt.spec_file, "experiment spec JSON file");
    if (spec_required) spec->required();
    cmd->add_option("--seed", opt.seed, "override the NSGA-II seed");
    cmd->add_option("--sim-seed", opt.sim_seed,
                    "override the RANDOM-replacement simulation seed");
    cmd->add_option("--workers", opt.workers,
                    "evaluation worker threads (default: all cores)");
    cmd->add_option("--max-records", opt.max_records,
                    "read at most N trace records");
    cmd->add_flag("--demand-only", opt.demand_only,
                  "charge DRAM work for demand misses only (ignore prefetch traffic)");
    cmd->add_flag("--no-memo", opt.no_memo, "disable the evaluation cache");
    cmd->add_option("--restrict", opt.restrict_expr,
                    "fix genes, e.g. LI=0,WI=1 (names LI,WI,RI,SI,LD,WD,RD,SD,AD)");
    cmd->add_option("--out", opt.output_dir, "output directory override");
}

ExperimentSpec load_spec(const CommonOptions& opt) {
    ExperimentSpec spec = ExperimentSpec::from_json_file(opt.spec_file);
    if (opt.seed) spec.nsga.seed = *opt.seed;
    if (opt.sim_seed) spec.sim_seed = *opt.sim_seed;
    if (opt.workers) spec.workers = *opt.workers;
    if (opt.max_records) spec.max_records = *opt.max_records;
    if (opt.demand_only) spec.miss_mode = MissMode::DemandOnly;
    if (opt.no_memo) spec.memoize = false;
    if (!opt.restrict_expr.empty()) spec.restriction = parse_restriction(opt.restrict_expr);
    if (opt.output_dir) spec.output_dir = *opt.output_dir;
    return spec;
}

Genome parse_genome_arg(const std::string& text) {
    std::vector<int> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            values.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ValidationError("genome gene '" + item + "' is not an integer");
        }
    }
    if (values.size() != kGenomeLength)
        throw ValidationError("genome must have exactly 9 comma-separated genes");
    Genome g;
    std::copy(values.begin(), values.end(), g.genes.begin());
    return g;
}

std::vector<double> parse_doubles(const std::string& text, std::size_t n,
                                  const char* what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
    if (values.size() != n)
        throw ValidationError(std::string(what) + " must have " + std::to_string(n) +
                              " comma-separated values");
    return values;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Trace-driven cache design-space exploration"};
    app.require_subcommand(1);

    CommonOptions opt;

    auto* optimize = app.add_subcommand("optimize", "run NSGA-II over the search space");
    add_common(optimize, opt);

    auto* exhaustive =
        app.add_subcommand("exhaustive", "evaluate every configuration of the space");
    add_common(exhaustive, opt);
    std::optional<std::uint64_t> budget;
    exhaustive->add_option("--budget", budget, "maximum space size to evaluate");

    auto* simulate = app.add_subcommand("simulate", "simulate one configuration");
    add_common(simulate, opt);
    std::string genome_arg;
    simulate->add_option("--genome", genome_arg, "9 comma-separated gene values")
        ->required();

    auto* compare = app.add_subcommand("compare", "improvement of a front vs baselines");
    add_common(compare, opt);
    std::string front_arg;
    compare->add_option("--front", front_arg, "front.csv produced by optimize/exhaustive")
        ->required();
    std::vector<std::string> baseline_args;
    compare->add_option("--baseline", baseline_args,
                        "baseline genome override (repeatable)");

    auto* hypervolume =
        app.add_subcommand("hypervolume", "I_H-minus over one or more front files");
    add_common(hypervolume, opt, /*spec_required=*/false);
    std::vector<std::string> front_files;
    hypervolume->add_option("--front", front_files, "front CSV file (repeatable)")
        ->required();
    std::string bounds_arg;
    hypervolume->add_option(
        "--bounds", bounds_arg,
        "normalization bounds tmin,tmax,emin,emax (default: union of fronts)");
    std::string ref_arg;
    hypervolume->add_option("--ref", ref_arg,
                            "reference point in normalized space (default 1.1,1.1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // CLI usage problems are validation errors
    }

    if (optimize->parsed()) {
        const OptimizeArtifacts art = run_optimize(load_spec(opt));
        std::cout << "front: " << art.front_csv.string() << " (" << art.front.members.size()
                  << " configurations)\n"
                  << "pareto set: " << art.pareto_json.string() << "\n"
                  << "log: " << art.log_csv.string() << "\n"
                  << "unique evaluations: " << art.unique_evaluations << "\n";
        if (art.improvement) {
            auto row = [](const char* label, const ImprovementPct& p) {
                std::printf("  %-8s %8.2f%% time  %8.2f%% energy\n", label, p.time_pct,
                            p.energy_pct);
            };
            std::cout << "population-mean improvement vs baseline 0:\n";
            row("initial", art.improvement->initial);
            row("average", art.improvement->average);
            row("final", art.improvement->final_gen);
        }
        return 0;
    }

    if (exhaustive->parsed()) {
        ExperimentSpec spec = load_spec(opt);
        if (budget) spec.exhaustive_budget = *budget;
        const ExhaustiveArtifacts art = run_exhaustive(spec);
        std::cout << "objective table: " << art.table_csv.string() << " ("
                  << art.table.size() << " configurations)\n"
                  << "front: " << art.front_csv.string() << " (" << art.front.members.size()
                  << " configurations)\n"
                  << "pareto set: " << art.pareto_json.string() << "\n";
        return 0;
    }

    if (simulate->parsed()) {
        run_simulate(load_spec(opt), parse_genome_arg(genome_arg), std::cout);
        return 0;
    }

    if (compare->parsed()) {
        ExperimentSpec spec = load_spec(opt);
        if (!baseline_args.empty()) {
            spec.baselines.clear();
            for (const std::string& b : baseline_args)
                spec.baselines.push_back(parse_genome_arg(b));
        }
        const CompareReport report = run_compare(spec, front_arg);
        for (std::size_t bi = 0; bi < report.front_means.size(); ++bi)
            std::cout << "baseline " << bi << ": mean improvement "
                      << format_full(report.front_means[bi].time_pct) << "% time, "
                      << format_full(report.front_means[bi].energy_pct) << "% energy\n";
        std::cout << "report: " << report.csv.string() << "\n";
        return 0;
    }

    if (hypervolume->parsed()) {
        SearchSpace space = SearchSpace::default_space();
        if (!opt.spec_file.empty()) {
            const ExperimentSpec spec = load_spec(opt);
            if (spec.search_space_file)
                space = SearchSpace::from_json_file(*spec.search_space_file);
        }
        std::optional<NormalizationBounds> bounds;
        if (!bounds_arg.empty()) {
            const auto v = parse_doubles(bounds_arg, 4, "--bounds");
            bounds = NormalizationBounds{v[0], v[1], v[2], v[3]};
        }
        ObjectiveVector ref = kDefaultHvReference;
        if (!ref_arg.empty()) {
            const auto v = parse_doubles(ref_arg, 2, "--ref");
            ref = {v[0], v[1]};
        }
        std::vector<std::filesystem::path> paths(front_files.begin(), front_files.end());
        const HypervolumeReport report = run_hypervolume(paths, space, bounds, ref, &std::cerr);
        std::cout << "file,ihv_minus\n";
        for (std::size_t i = 0; i < paths.size(); ++i)
            std::cout << paths[i].string() << ',' << format_full(report.values[i]) << "\n";
        std::cout << "mean," << format_full(report.mean) << "\n";
        std::cout << "std," << format_full(report.stddev) << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const cachedse::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
