#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cachedse/errors.hpp"
#include "cachedse/explorer.hpp"
#include "tmpdir.hpp"

using namespace cachedse;
using cachedse::testing::slurp;
using cachedse::testing::TempDir;
using nlohmann::json;

namespace {

const std::filesystem::path kDataDir = CACHEDSE_DATA_DIR;

// Loop-pattern experiment over the default space; small enough for unit tests.
ExperimentSpec small_spec(const TempDir& tmp, std::uint64_t seed = 1) {
    ExperimentSpec spec;
    SynthTraceRequest req;
    req.pattern.pattern = SynthSpec::Pattern::Loop;
    req.pattern.base = 0;
    req.pattern.working_set = 20000;
    req.pattern.stride = 4;
    req.pattern.mix = {0.6, 0.3, 0.1};
    req.count = 5000;
    req.seed = 11;
    spec.trace = req;
    spec.characterization_file = kDataDir / "characterization_synthetic.json";
    spec.nsga.generations = 8;
    spec.nsga.population_size = 16;
    spec.nsga.seed = seed;
    spec.output_dir = tmp.path() / "out";
    return spec;
}

Restriction i_genes_fixed() {
    Restriction r{};
    r[kILineGene] = 0;
    r[kIWaysGene] = 0;
    r[kIReplGene] = 0;
    r[kIPrefetchGene] = 0;
    return r;
}

}  // namespace

TEST_CASE("spec files parse with relative path resolution") {
    TempDir tmp("spec");
    tmp.write("char.json", slurp(kDataDir / "characterization_synthetic.json"));
    const json doc{
        {"trace",
         {{"pattern", "uniform"}, {"lo", 0}, {"hi", 4096}, {"count", 100}, {"seed", 3},
          {"mix", {{"instr", 1.0}, {"read", 0.0}, {"write", 0.0}}}}},
        {"characterization", "char.json"},
        {"nsga", {{"generations", 2}, {"population_size", 4}, {"seed", 5}}},
        {"baselines", {{1, 4, 0, 0, 1, 4, 0, 0, 0}}},
        {"miss_mode", "demand_only"},
        {"max_records", 50},
        {"output_dir", "results"}};
    const auto path = tmp.write("spec.json", doc.dump());

    const ExperimentSpec spec = ExperimentSpec::from_json_file(path);
    CHECK(spec.characterization_file == tmp.path() / "char.json");
    CHECK(spec.output_dir == std::filesystem::path("results"));
    CHECK(spec.nsga.generations == 2);
    CHECK(spec.nsga.seed == 5);
    CHECK(spec.miss_mode == MissMode::DemandOnly);
    CHECK(spec.max_records == 50);
    REQUIRE(spec.baselines.size() == 1);
    CHECK(spec.baselines[0] == Genome{{1, 4, 0, 0, 1, 4, 0, 0, 0}});

    Experiment exp(spec);
    CHECK(exp.evaluator().trace_records() == 50);  // max_records respected
}

TEST_CASE("spec validation failures") {
    TempDir tmp("badspec");
    CHECK_THROWS_AS(ExperimentSpec::from_json_file(tmp.path() / "missing.json"),
                    ValidationError);
    CHECK_THROWS_AS(ExperimentSpec::from_json_file(tmp.write("bad.json", "{ nope")),
                    ValidationError);
    CHECK_THROWS_AS(
        ExperimentSpec::from_json_file(tmp.write("empty.json", "{}")),
        ValidationError);

    const json no_such_trace{{"trace", "nowhere.din"},
                             {"characterization",
                              (kDataDir / "characterization_synthetic.json").string()}};
    const ExperimentSpec spec =
        ExperimentSpec::from_json_file(tmp.write("s.json", no_such_trace.dump()));
    CHECK_THROWS_AS(Experiment{spec}, ValidationError);

    TempDir tmp2("badgenome");
    ExperimentSpec bad_baseline = small_spec(tmp2);
    bad_baseline.baselines.push_back(Genome{{9, 0, 0, 0, 0, 0, 0, 0, 0}});
    CHECK_THROWS_AS(Experiment{bad_baseline}, ValidationError);
}

TEST_CASE("run_optimize produces a mutually non-dominating front and artifacts") {
    TempDir tmp("opt");
    ExperimentSpec spec = small_spec(tmp);
    spec.baselines.push_back(Genome{{1, 4, 0, 0, 1, 4, 0, 0, 0}});
    const OptimizeArtifacts art = run_optimize(spec);

    CHECK(std::filesystem::exists(art.front_csv));
    CHECK(std::filesystem::exists(art.pareto_json));
    CHECK(std::filesystem::exists(art.log_csv));
    CHECK(art.front.members.size() >= 1);

    for (const Individual& a : art.front.members)
        for (const Individual& b : art.front.members)
            CHECK_FALSE(dominates(a.objectives, b.objectives));

    // log has one row per generation plus the initial population and header.
    std::stringstream log(slurp(art.log_csv));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(log, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 1 + 1 + static_cast<std::size_t>(spec.nsga.generations));

    const json pareto = json::parse(slurp(art.pareto_json));
    CHECK(pareto.at("front").size() == art.front.members.size());
    CHECK(pareto.at("meta").at("trace_records") == 5000);
}

TEST_CASE("optimize runs are byte-identical across reruns and worker counts") {
    TempDir tmp("det");
    ExperimentSpec spec = small_spec(tmp, 77);

    spec.workers = 1;
    spec.output_dir = tmp.path() / "w1";
    const OptimizeArtifacts a = run_optimize(spec);

    spec.workers = 8;
    spec.output_dir = tmp.path() / "w8";
    const OptimizeArtifacts b = run_optimize(spec);

    spec.workers = 8;
    spec.memoize = false;
    spec.output_dir = tmp.path() / "nomemo";
    const OptimizeArtifacts c = run_optimize(spec);

    CHECK(slurp(a.front_csv) == slurp(b.front_csv));
    CHECK(slurp(a.pareto_json) == slurp(b.pareto_json));
    CHECK(slurp(a.log_csv) == slurp(b.log_csv));
    CHECK(slurp(a.front_csv) == slurp(c.front_csv));
    CHECK(slurp(a.log_csv) == slurp(c.log_csv));
}

TEST_CASE("front CSV rows re-evaluate to the recorded objectives exactly") {
    TempDir tmp("roundtrip");
    const ExperimentSpec spec = small_spec(tmp);
    const OptimizeArtifacts art = run_optimize(spec);

    Experiment exp(spec);
    const std::vector<FrontRow> rows = read_front_csv(art.front_csv, exp.space());
    REQUIRE(rows.size() == art.front.members.size());
    for (const FrontRow& row : rows) {
        const Evaluation ev = exp.evaluator().evaluate(row.genome);
        CHECK(ev.objectives.exec_time == row.objectives.exec_time);  // 0 ulp
        CHECK(ev.objectives.energy == row.objectives.energy);
    }
}

TEST_CASE("run_exhaustive covers the restricted space and extracts the exact front") {
    TempDir tmp("exh");
    ExperimentSpec spec = small_spec(tmp);
    spec.restriction = i_genes_fixed();
    const ExhaustiveArtifacts art = run_exhaustive(spec);
    CHECK(art.table.size() == 360);
    CHECK(std::filesystem::exists(art.table_csv));

    // Front members must not be dominated by anything in the table.
    for (const Individual& member : art.front.members)
        for (const FrontRow& row : art.table)
            CHECK_FALSE(dominates(row.objectives, member.objectives));

    // Degenerate one-genome space.
    ExperimentSpec one = small_spec(tmp);
    for (int g = 0; g < kGenomeLength; ++g) one.restriction[g] = 0;
    one.output_dir = tmp.path() / "one";
    const ExhaustiveArtifacts single = run_exhaustive(one);
    CHECK(single.table.size() == 1);
    CHECK(single.front.members.size() == 1);
    CHECK(single.front.members[0].genome == Genome{});

    // Budget guard.
    ExperimentSpec over = small_spec(tmp);
    over.exhaustive_budget = 100;
    CHECK_THROWS_AS(run_exhaustive(over), ValidationError);
}

TEST_CASE("optimize finds the exhaustive front on a small restricted space") {
    TempDir tmp("gaexh");
    ExperimentSpec spec = small_spec(tmp, 3);
    spec.restriction = i_genes_fixed();
    spec.nsga.generations = 30;
    spec.nsga.population_size = 40;

    spec.output_dir = tmp.path() / "exh";
    const ExhaustiveArtifacts exact = run_exhaustive(spec);
    spec.output_dir = tmp.path() / "ga";
    const OptimizeArtifacts ga = run_optimize(spec);

    REQUIRE(ga.front.members.size() == exact.front.members.size());
    for (std::size_t i = 0; i < ga.front.members.size(); ++i) {
        CHECK(ga.front.members[i].genome == exact.front.members[i].genome);
        CHECK(ga.front.members[i].objectives == exact.front.members[i].objectives);
    }
}

TEST_CASE("run_compare reports per-point and mean improvements") {
    TempDir tmp("cmp");
    ExperimentSpec spec = small_spec(tmp);
    spec.baselines = {Genome{{1, 4, 0, 0, 1, 4, 0, 0, 0}}};
    const OptimizeArtifacts art = run_optimize(spec);
    const CompareReport report = run_compare(spec, art.front_csv);

    REQUIRE(report.baseline_objectives.size() == 1);
    REQUIRE(report.front_means.size() == 1);
    CHECK(report.points.size() == art.front.members.size());

    double sum_t = 0.0;
    for (const ComparePoint& p : report.points) {
        const ImprovementPct expect = improvement(report.baseline_objectives[0],
                                                  art.front.members[p.point_index].objectives);
        CHECK(p.pct.time_pct == expect.time_pct);
        CHECK(p.pct.energy_pct == expect.energy_pct);
        sum_t += p.pct.time_pct;
    }
    CHECK(report.front_means[0].time_pct ==
          doctest::Approx(sum_t / static_cast<double>(report.points.size())));
    CHECK(std::filesystem::exists(report.csv));

    // A baseline inside the front yields an exact 0% row.
    ExperimentSpec self = spec;
    self.baselines = {art.front.members[0].genome};
    self.output_dir = tmp.path() / "self";
    const CompareReport zero = run_compare(self, art.front_csv);
    CHECK(zero.points[0].pct.time_pct == 0.0);
    CHECK(zero.points[0].pct.energy_pct == 0.0);

    ExperimentSpec none = spec;
    none.baselines.clear();
    CHECK_THROWS_AS(run_compare(none, art.front_csv), ValidationError);
}

TEST_CASE("run_simulate is pure and prints both caches") {
    TempDir tmp("sim");
    const ExperimentSpec spec = small_spec(tmp);
    const Genome g{{1, 0, 2, 1, 0, 2, 2, 0, 1}};

    std::stringstream out_a, out_b;
    const Evaluation a = run_simulate(spec, g, out_a);
    const Evaluation b = run_simulate(spec, g, out_b);
    CHECK(a.objectives == b.objectives);
    CHECK(a.icache == b.icache);
    CHECK(a.dcache == b.dcache);
    CHECK(out_a.str() == out_b.str());
    CHECK(out_a.str().find("icache") != std::string::npos);
    CHECK(out_a.str().find("exec_time_s") != std::string::npos);

    // Empty trace: all zero.
    ExperimentSpec empty = spec;
    TempDir tmp2("simempty");
    const auto trace_path = tmp2.write("empty.din", "# nothing here\n");
    empty.trace = trace_path;
    std::stringstream ignore;
    const Evaluation z = run_simulate(empty, Genome{}, ignore);
    CHECK(z.icache == SimCounters{});
    CHECK(z.dcache == SimCounters{});
    CHECK(z.objectives == ObjectiveVector{});
}

TEST_CASE("run_hypervolume on hand-built fronts") {
    TempDir tmp("hv");
    // All-zero genome symbols with hand-set objective values.
    const std::string header = "LI,WI,RI,SI,LD,WD,RD,AD,SD,ExTime,Energy\n";
    const std::string row_prefix = "8,4,LRU,ON_DEMAND,8,4,LRU,COPY_BACK,ON_DEMAND,";
    const auto f1 = tmp.write("f1.csv", header + row_prefix + "0,0\n");
    const auto f2 = tmp.write("f2.csv", header + row_prefix + "0.6,0.6\n");

    const SearchSpace space = SearchSpace::default_space();
    const NormalizationBounds bounds{0.0, 1.0, 0.0, 1.0};
    const HypervolumeReport report = run_hypervolume({f1, f2}, space, bounds);

    REQUIRE(report.values.size() == 2);
    CHECK(report.values[0] == doctest::Approx(-1.21).epsilon(1e-12));
    CHECK(report.values[1] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(report.mean == doctest::Approx(-0.73).epsilon(1e-12));
    CHECK(report.stddev == doctest::Approx(0.48).epsilon(1e-12));

    // A single file: mean is the value, deviation is exactly zero.
    const HypervolumeReport single = run_hypervolume({f2}, space, bounds);
    CHECK(single.values.size() == 1);
    CHECK(single.mean == single.values[0]);
    CHECK(single.stddev == 0.0);

    // Identical files: deviation is exactly zero.
    const HypervolumeReport same = run_hypervolume({f1, f1, f1}, space, bounds);
    CHECK(same.stddev == 0.0);

    // Default bounds come from the union of the fronts.
    const HypervolumeReport unioned = run_hypervolume({f1, f2}, space, std::nullopt);
    CHECK(unioned.bounds.time_min == 0.0);
    CHECK(unioned.bounds.time_max == 0.6);

    CHECK_THROWS_AS(run_hypervolume({}, space, std::nullopt), ValidationError);
    CHECK_THROWS_AS(run_hypervolume({f1}, space, std::nullopt), ValidationError);
}

TEST_CASE("front CSV parser rejects malformed files") {
    TempDir tmp("badcsv");
    const SearchSpace space = SearchSpace::default_space();
    CHECK_THROWS_AS(read_front_csv(tmp.path() / "nope.csv", space), ValidationError);
    CHECK_THROWS_AS(read_front_csv(tmp.write("h.csv", "a,b,c\n"), space), ValidationError);
    const std::string header = "LI,WI,RI,SI,LD,WD,RD,AD,SD,ExTime,Energy\n";
    CHECK_THROWS_AS(
        read_front_csv(tmp.write("r.csv", header + "8,4,LRU\n"), space), ParseError);
    CHECK_THROWS_AS(
        read_front_csv(
            tmp.write("v.csv", header + "9,4,LRU,ON_DEMAND,8,4,LRU,COPY_BACK,ON_DEMAND,1,1\n"),
            space),
        ValidationError);
}
