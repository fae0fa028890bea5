#include "cachedse/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cachedse/errors.hpp"

namespace cachedse {

using nlohmann::json;

std::string format_full(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& p) {
    return p.is_absolute() ? p : base / p;
}

SynthTraceRequest parse_synth(const json& j) {
    SynthTraceRequest req;
    const std::string pattern = j.at("pattern").get<std::string>();
    if (pattern == "stride") req.pattern.pattern = SynthSpec::Pattern::Stride;
    else if (pattern == "uniform") req.pattern.pattern = SynthSpec::Pattern::Uniform;
    else if (pattern == "loop") req.pattern.pattern = SynthSpec::Pattern::Loop;
    else throw ValidationError("synthetic trace: unknown pattern '" + pattern + "'");

    req.pattern.start = j.value("start", std::uint64_t{0});
    req.pattern.stride = j.value("stride", std::uint64_t{1});
    req.pattern.lo = j.value("lo", std::uint64_t{0});
    req.pattern.hi = j.value("hi", std::uint64_t{0});
    req.pattern.base = j.value("base", std::uint64_t{0});
    req.pattern.working_set = j.value("working_set", std::uint64_t{0});
    if (j.contains("mix")) {
        const auto& m = j.at("mix");
        req.pattern.mix.instr = m.value("instr", 0.0);
        req.pattern.mix.read = m.value("read", 0.0);
        req.pattern.mix.write = m.value("write", 0.0);
    }
    req.count = j.at("count").get<std::uint64_t>();
    req.seed = j.value("seed", std::uint64_t{0});
    return req;
}

Genome genome_from_json(const json& j) {
    const auto values = j.get<std::vector<int>>();
    if (values.size() != kGenomeLength)
        throw ValidationError("genome must have exactly 9 genes, got " +
                              std::to_string(values.size()));
    Genome g;
    std::copy(values.begin(), values.end(), g.genes.begin());
    return g;
}

json genome_to_json(const Genome& g) {
    return json(std::vector<int>(g.genes.begin(), g.genes.end()));
}

json config_to_json(const CacheConfig& cfg) {
    json j{{"total_size", cfg.total_size},
           {"line_size", cfg.line_size},
           {"ways", cfg.ways},
           {"replacement", to_string(cfg.replacement)},
           {"prefetch", to_string(cfg.prefetch)},
           {"writable", cfg.writable}};
    if (cfg.write_policy) j["write_policy"] = to_string(*cfg.write_policy);
    return j;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<AccessRecord> load_trace_records(const ExperimentSpec& spec) {
    if (const auto* path = std::get_if<std::filesystem::path>(&spec.trace))
        return read_trace(TraceSource{*path, spec.max_records});

    const auto& req = std::get<SynthTraceRequest>(spec.trace);
    if (spec.max_records && *spec.max_records == 0)
        throw ValidationError("record_limit must be > 0 when present");
    std::uint64_t count = req.count;
    if (spec.max_records && *spec.max_records < count) count = *spec.max_records;
    return synth_trace(req.pattern, count, req.seed);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimulationError("cannot write output file: " + path.string());
    out << content;
    if (!out) throw SimulationError("failed writing output file: " + path.string());
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open spec file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("spec file " + path.string() + ": " + e.what());
    }

    const std::filesystem::path base = path.parent_path();
    ExperimentSpec spec;
    try {
        const auto& trace = j.at("trace");
        if (trace.is_string()) spec.trace = resolve(base, trace.get<std::string>());
        else spec.trace = parse_synth(trace);

        if (j.contains("search_space"))
            spec.search_space_file = resolve(base, j.at("search_space").get<std::string>());
        spec.characterization_file =
            resolve(base, j.at("characterization").get<std::string>());

        if (j.contains("nsga")) {
            const auto& n = j.at("nsga");
            spec.nsga.generations = n.value("generations", spec.nsga.generations);
            spec.nsga.population_size =
                n.value("population_size", spec.nsga.population_size);
            spec.nsga.p_crossover = n.value("p_crossover", spec.nsga.p_crossover);
            spec.nsga.p_mutation = n.value("p_mutation", spec.nsga.p_mutation);
            spec.nsga.seed = n.value("seed", spec.nsga.seed);
        }

        if (j.contains("baselines"))
            for (const auto& b : j.at("baselines"))
                spec.baselines.push_back(genome_from_json(b));

        if (j.contains("miss_mode")) {
            const std::string mode = j.at("miss_mode").get<std::string>();
            if (mode == "combined") spec.miss_mode = MissMode::Combined;
            else if (mode == "demand_only") spec.miss_mode = MissMode::DemandOnly;
            else
                throw ValidationError("spec: miss_mode must be 'combined' or 'demand_only'");
        }

        if (j.contains("max_records"))
            spec.max_records = j.at("max_records").get<std::uint64_t>();
        // Inputs resolve against the spec file; the output directory is a
        // destination and stays relative to the working directory.
        if (j.contains("output_dir"))
            spec.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("exhaustive_budget"))
            spec.exhaustive_budget = j.at("exhaustive_budget").get<std::uint64_t>();
        if (j.contains("sim_seed"))
            spec.sim_seed = j.at("sim_seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("spec JSON: ") + e.what());
    }
    return spec;
}

Experiment::Experiment(const ExperimentSpec& spec)
    : spec_(spec),
      space_(spec.search_space_file ? SearchSpace::from_json_file(*spec.search_space_file)
                                    : SearchSpace::default_space()) {
    spec_.nsga.validate();
    space_.validate_restriction(spec_.restriction);

    Characterization ch = Characterization::from_json_file(spec_.characterization_file);
    ch.require_covers(space_);
    std::vector<AccessRecord> records = load_trace_records(spec_);

    for (const Genome& b : spec_.baselines) space_.decode(b);

    evaluator_ = std::make_unique<Evaluator>(std::move(records), space_, std::move(ch),
                                             spec_.miss_mode, spec_.sim_seed,
                                             spec_.workers, spec_.memoize);
}

void write_front_csv(const std::filesystem::path& path, const SearchSpace& space,
                     const std::vector<FrontRow>& rows) {
    std::string out = "LI,WI,RI,SI,LD,WD,RD,AD,SD,ExTime,Energy\n";
    for (const FrontRow& row : rows) {
        const CacheConfigPair pair = space.decode(row.genome);
        out += std::to_string(pair.icache.line_size) + ',';
        out += std::to_string(pair.icache.ways) + ',';
        out += to_string(pair.icache.replacement) + ',';
        out += to_string(pair.icache.prefetch) + ',';
        out += std::to_string(pair.dcache.line_size) + ',';
        out += std::to_string(pair.dcache.ways) + ',';
        out += to_string(pair.dcache.replacement) + ',';
        out += to_string(*pair.dcache.write_policy) + ',';
        out += to_string(pair.dcache.prefetch) + ',';
        out += format_full(row.objectives.exec_time) + ',';
        out += format_full(row.objectives.energy) + '\n';
    }
    write_text_file(path, out);
}

std::vector<FrontRow> read_front_csv(const std::filesystem::path& path,
                                     const SearchSpace& space) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open front file: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw ValidationError("front file is empty: " + path.string());
    auto split = [](const std::string& s) {
        std::vector<std::string> fields;
        std::stringstream ss(s);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        return fields;
    };
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split(line) != std::vector<std::string>{"LI", "WI", "RI", "SI", "LD", "WD", "RD",
                                                "AD", "SD", "ExTime", "Energy"})
        throw ValidationError("front file has unexpected header: " + path.string());

    std::vector<FrontRow> rows;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != 11)
            throw ParseError("front row must have 11 fields", line_number);
        try {
            CacheConfig icache;
            icache.total_size = space.i_total_size();
            icache.line_size = std::stoull(fields[0]);
            icache.ways = std::stoull(fields[1]);
            icache.replacement = replacement_from_string(fields[2]);
            icache.prefetch = prefetch_from_string(fields[3]);
            icache.writable = false;

            CacheConfig dcache;
            dcache.total_size = space.d_total_size();
            dcache.line_size = std::stoull(fields[4]);
            dcache.ways = std::stoull(fields[5]);
            dcache.replacement = replacement_from_string(fields[6]);
            dcache.write_policy = write_policy_from_string(fields[7]);
            dcache.prefetch = prefetch_from_string(fields[8]);
            dcache.writable = true;

            FrontRow row;
            row.genome = space.encode(icache, dcache);
            row.objectives.exec_time = std::strtod(fields[9].c_str(), nullptr);
            row.objectives.energy = std::strtod(fields[10].c_str(), nullptr);
            rows.push_back(row);
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(std::string("bad front row: ") + e.what(), line_number);
        }
    }
    return rows;
}

namespace {

std::vector<FrontRow> front_rows(const ParetoFront& front) {
    std::vector<FrontRow> rows;
    rows.reserve(front.members.size());
    for (const Individual& ind : front.members) rows.push_back({ind.genome, ind.objectives});
    return rows;
}

json meta_json(const Experiment& exp) {
    const ExperimentSpec& spec = exp.spec();
    return json{{"seed", spec.nsga.seed},
                {"sim_seed", spec.sim_seed},
                {"nsga",
                 {{"generations", spec.nsga.generations},
                  {"population_size", spec.nsga.population_size},
                  {"p_crossover", spec.nsga.p_crossover},
                  {"p_mutation", spec.nsga.p_mutation}}},
                {"miss_mode",
                 spec.miss_mode == MissMode::Combined ? "combined" : "demand_only"},
                {"trace_records", exp.evaluator().trace_records()},
                {"trace_digest", hex64(exp.evaluator().trace_digest())},
                {"space_digest", hex64(exp.space().digest())},
                {"characterization_digest", hex64(exp.evaluator().characterization().digest())}};
}

void write_pareto_json(const std::filesystem::path& path, const Experiment& exp,
                       const ParetoFront& front) {
    json members = json::array();
    for (const Individual& ind : front.members) {
        const CacheConfigPair pair = exp.space().decode(ind.genome);
        members.push_back({{"genome", genome_to_json(ind.genome)},
                           {"icache", config_to_json(pair.icache)},
                           {"dcache", config_to_json(pair.dcache)},
                           {"objectives",
                            {{"exec_time_s", ind.objectives.exec_time},
                             {"energy_j", ind.objectives.energy}}}});
    }
    const json doc{{"front", members}, {"meta", meta_json(exp)}};
    write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace

OptimizeArtifacts run_optimize(const ExperimentSpec& spec) {
    Experiment exp(spec);
    Evaluator& ev = exp.evaluator();

    std::optional<ObjectiveVector> baseline;
    if (!spec.baselines.empty()) baseline = ev.evaluate(spec.baselines.front()).objectives;

    std::string log = "generation,best_exec_time_s,mean_exec_time_s,best_energy_j,"
                      "mean_energy_j,mean_time_improvement_pct,mean_energy_improvement_pct\n";
    std::vector<ImprovementPct> per_generation;
    const auto observer = [&](int gen, const std::vector<Individual>& pop) {
        double best_t = pop.front().objectives.exec_time;
        double best_e = pop.front().objectives.energy;
        double sum_t = 0.0, sum_e = 0.0, sum_ti = 0.0, sum_ei = 0.0;
        for (const Individual& ind : pop) {
            best_t = std::min(best_t, ind.objectives.exec_time);
            best_e = std::min(best_e, ind.objectives.energy);
            sum_t += ind.objectives.exec_time;
            sum_e += ind.objectives.energy;
            if (baseline) {
                const ImprovementPct pct = improvement(*baseline, ind.objectives);
                sum_ti += pct.time_pct;
                sum_ei += pct.energy_pct;
            }
        }
        const auto n = static_cast<double>(pop.size());
        log += std::to_string(gen) + ',' + format_full(best_t) + ',' +
               format_full(sum_t / n) + ',' + format_full(best_e) + ',' +
               format_full(sum_e / n);
        if (baseline) {
            per_generation.push_back({sum_ti / n, sum_ei / n});
            log += ',' + format_full(sum_ti / n) + ',' + format_full(sum_ei / n) + '\n';
        } else {
            log += ",,\n";
        }
    };

    EvolveResult result = evolve([&ev](std::span<const Genome> batch) {
                                     return ev.evaluate_batch(batch);
                                 },
                                 exp.space(), spec.nsga, spec.restriction, observer);

    if (ev.unique_evaluations() > exp.space().cardinality())
        throw SimulationError("memoization bound violated: more unique evaluations than "
                              "configurations in the space");

    std::filesystem::create_directories(spec.output_dir);
    OptimizeArtifacts artifacts;
    artifacts.front = std::move(result.front);
    artifacts.unique_evaluations = ev.unique_evaluations();
    if (!per_generation.empty()) {
        ImprovementSummary summary;
        summary.initial = per_generation.front();
        summary.final_gen = per_generation.back();
        double sum_t = 0.0, sum_e = 0.0;
        for (const ImprovementPct& p : per_generation) {
            sum_t += p.time_pct;
            sum_e += p.energy_pct;
        }
        const auto n = static_cast<double>(per_generation.size());
        summary.average = {sum_t / n, sum_e / n};
        artifacts.improvement = summary;
    }
    artifacts.front_csv = spec.output_dir / "front.csv";
    artifacts.pareto_json = spec.output_dir / "pareto_set.json";
    artifacts.log_csv = spec.output_dir / "log.csv";
    write_front_csv(artifacts.front_csv, exp.space(), front_rows(artifacts.front));
    write_pareto_json(artifacts.pareto_json, exp, artifacts.front);
    write_text_file(artifacts.log_csv, log);
    return artifacts;
}

ExhaustiveArtifacts run_exhaustive(const ExperimentSpec& spec) {
    Experiment exp(spec);
    Evaluator& ev = exp.evaluator();

    const std::uint64_t size = exp.space().cardinality(spec.restriction);
    if (size > spec.exhaustive_budget)
        throw ValidationError("restricted space has " + std::to_string(size) +
                              " configurations, exceeding the exhaustive budget of " +
                              std::to_string(spec.exhaustive_budget));

    const std::vector<Genome> genomes = exp.space().enumerate(spec.restriction);
    const std::vector<ObjectiveVector> objs = ev.evaluate_batch(genomes);

    ExhaustiveArtifacts artifacts;
    artifacts.table.reserve(genomes.size());
    for (std::size_t i = 0; i < genomes.size(); ++i)
        artifacts.table.push_back({genomes[i], objs[i]});

    std::vector<Individual> front_members;
    for (std::size_t idx : nondominated_indices(objs))
        front_members.push_back({genomes[idx], objs[idx], 0, 0.0});
    artifacts.front = dedup_front(std::move(front_members));

    std::filesystem::create_directories(spec.output_dir);
    artifacts.table_csv = spec.output_dir / "objective_table.csv";
    artifacts.front_csv = spec.output_dir / "front.csv";
    artifacts.pareto_json = spec.output_dir / "pareto_set.json";
    write_front_csv(artifacts.table_csv, exp.space(), artifacts.table);
    write_front_csv(artifacts.front_csv, exp.space(), front_rows(artifacts.front));
    write_pareto_json(artifacts.pareto_json, exp, artifacts.front);
    return artifacts;
}

CompareReport run_compare(const ExperimentSpec& spec,
                          const std::filesystem::path& front_csv) {
    Experiment exp(spec);
    if (spec.baselines.empty())
        throw ValidationError("compare requires at least one baseline genome");

    const std::vector<FrontRow> rows = read_front_csv(front_csv, exp.space());
    if (rows.empty()) throw ValidationError("front file has no rows: " + front_csv.string());

    CompareReport report;
    for (const Genome& b : spec.baselines)
        report.baseline_objectives.push_back(exp.evaluator().evaluate(b).objectives);

    std::string csv = "baseline,point,time_improvement_pct,energy_improvement_pct\n";
    for (std::size_t bi = 0; bi < spec.baselines.size(); ++bi) {
        double sum_t = 0.0, sum_e = 0.0;
        for (std::size_t pi = 0; pi < rows.size(); ++pi) {
            const ImprovementPct pct =
                improvement(report.baseline_objectives[bi], rows[pi].objectives);
            report.points.push_back({bi, pi, pct});
            sum_t += pct.time_pct;
            sum_e += pct.energy_pct;
            csv += std::to_string(bi) + ',' + std::to_string(pi) + ',' +
                   format_full(pct.time_pct) + ',' + format_full(pct.energy_pct) + '\n';
        }
        const auto n = static_cast<double>(rows.size());
        report.front_means.push_back({sum_t / n, sum_e / n});
        csv += std::to_string(bi) + ",mean," + format_full(sum_t / n) + ',' +
               format_full(sum_e / n) + '\n';
    }

    std::filesystem::create_directories(spec.output_dir);
    report.csv = spec.output_dir / "compare.csv";
    write_text_file(report.csv, csv);
    return report;
}

Evaluation run_simulate(const ExperimentSpec& spec, const Genome& genome,
                        std::ostream& out) {
    Experiment exp(spec);
    exp.space().validate_genome(genome);
    const Evaluation ev = exp.evaluator().evaluate(genome);
    const CacheConfigPair pair = exp.space().decode(genome);

    auto print_cache = [&out](const char* label, const CacheConfig& cfg,
                              const SimCounters& c) {
        out << label << ": " << cfg.total_size << " B, line " << cfg.line_size << " B, "
            << cfg.ways << " ways, " << to_string(cfg.replacement) << ", "
            << to_string(cfg.prefetch);
        if (cfg.write_policy) out << ", " << to_string(*cfg.write_policy);
        out << "\n  accesses " << c.accesses << ", hits " << c.hits() << ", demand misses "
            << c.demand_misses << ", prefetch fetches " << c.prefetch_fetches
            << ", writebacks " << c.writebacks << ", writethroughs " << c.writethroughs
            << "\n";
    };
    out << "genome " << to_string(genome) << "\n";
    print_cache("icache", pair.icache, ev.icache);
    print_cache("dcache", pair.dcache, ev.dcache);
    out << "exec_time_s " << format_full(ev.objectives.exec_time) << "\n";
    out << "energy_j " << format_full(ev.objectives.energy) << "\n";
    return ev;
}

HypervolumeReport run_hypervolume(const std::vector<std::filesystem::path>& front_files,
                                  const SearchSpace& space,
                                  std::optional<NormalizationBounds> bounds,
                                  const ObjectiveVector& ref, std::ostream* warnings) {
    if (front_files.empty())
        throw ValidationError("hypervolume requires at least one front file");

    std::vector<std::vector<ObjectiveVector>> fronts;
    std::vector<ObjectiveVector> all;
    for (const auto& path : front_files) {
        std::vector<ObjectiveVector> objs;
        for (const FrontRow& row : read_front_csv(path, space)) objs.push_back(row.objectives);
        if (objs.empty())
            throw ValidationError("front file has no rows: " + path.string());
        all.insert(all.end(), objs.begin(), objs.end());
        fronts.push_back(std::move(objs));
    }

    HypervolumeReport report;
    report.bounds = bounds ? *bounds : bounds_over(all);
    report.bounds.validate();

    for (std::size_t i = 0; i < fronts.size(); ++i) {
        std::vector<ObjectiveVector> normalized;
        normalized.reserve(fronts[i].size());
        for (const auto& p : fronts[i])
            normalized.push_back({(p.exec_time - report.bounds.time_min) /
                                      (report.bounds.time_max - report.bounds.time_min),
                                  (p.energy - report.bounds.energy_min) /
                                      (report.bounds.energy_max - report.bounds.energy_min)});
        std::size_t clipped = 0;
        const double hv = hypervolume_2d(normalized, ref, &clipped);
        if (warnings && clipped == normalized.size())
            *warnings << "warning: " << front_files[i].string()
                      << ": no point dominates the reference; hypervolume is 0\n";
        else if (warnings && clipped > 0)
            *warnings << "warning: " << front_files[i].string() << ": " << clipped
                      << " point(s) do not dominate the reference and were clipped\n";
        report.values.push_back(-hv + 0.0);  // canonicalize -0
    }

    // Shifted-data variance: exact zero for identical inputs.
    const double c = report.values.front();
    double shifted_sum = 0.0;
    for (double v : report.values) shifted_sum += v - c;
    const double shifted_mean = shifted_sum / static_cast<double>(report.values.size());
    report.mean = c + shifted_mean;
    double var = 0.0;
    for (double v : report.values) {
        const double d = (v - c) - shifted_mean;
        var += d * d;
    }
    var /= static_cast<double>(report.values.size());
    report.stddev = std::sqrt(var);
    return report;
}

}  // namespace cachedse
