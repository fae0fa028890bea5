#include <doctest.h>

#include <nlohmann/json.hpp>

#include "cachedse/cost_model.hpp"
#include "cachedse/errors.hpp"
#include "cachedse/genome.hpp"

#include <algorithm>
#include <cmath>

using namespace cachedse;
using nlohmann::json;

namespace {

// One entry per cache: 8 B lines, 4 ways. DRAM: 100 ns, 0.5 W, 1 GB/s.
Characterization simple_char(double i_at = 1e-9, double i_ae = 1e-10, double d_at = 2e-9,
                             double d_ae = 3e-10) {
    const json j{
        {"icache", json::array({{{"line_size", 8},
                                 {"ways", 4},
                                 {"access_time_s", i_at},
                                 {"access_energy_j", i_ae}}})},
        {"dcache", json::array({{{"line_size", 8},
                                 {"ways", 4},
                                 {"access_time_s", d_at},
                                 {"access_energy_j", d_ae}}})},
        {"dram",
         {{"access_time_s", 100e-9}, {"access_power_w", 0.5}, {"bandwidth_bps", 1e9}}}};
    return Characterization::from_json(j);
}

CacheConfig small_icache() {
    CacheConfig cfg;
    cfg.total_size = 16384;
    cfg.line_size = 8;
    cfg.ways = 4;
    cfg.writable = false;
    return cfg;
}

CacheConfig small_dcache() {
    CacheConfig cfg = small_icache();
    cfg.write_policy = WritePolicy::COPY_BACK;
    cfg.writable = true;
    return cfg;
}

SimCounters counters(std::uint64_t accesses, std::uint64_t demand,
                     std::uint64_t prefetch = 0) {
    SimCounters c;
    c.accesses = accesses;
    c.demand_misses = demand;
    c.prefetch_fetches = prefetch;
    return c;
}


bool rel_close(double a, double b, double tol = 1e-12) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_CASE("exec_time: access term only") {
    const Characterization ch = simple_char();
    const double t = exec_time(counters(1000, 0), SimCounters{}, small_icache(),
                               small_dcache(), ch);
    CHECK(rel_close(t, 1.0e-6));
}

TEST_CASE("exec_time: misses add DRAM latency and line fill") {
    const Characterization ch = simple_char();
    // 100 * 1e-9 + 10 * 100e-9 + 10 * 8 / 1e9 = 1.18e-6
    const double t = exec_time(counters(100, 10), SimCounters{}, small_icache(),
                               small_dcache(), ch);
    CHECK(rel_close(t, 1.18e-6));
}

TEST_CASE("objectives are zero on an empty trace") {
    const Characterization ch = simple_char();
    CHECK(exec_time(SimCounters{}, SimCounters{}, small_icache(), small_dcache(), ch) == 0.0);
    CHECK(energy(SimCounters{}, SimCounters{}, small_icache(), small_dcache(), ch) == 0.0);
}

TEST_CASE("energy: access term only") {
    const Characterization ch = simple_char();
    const double e =
        energy(counters(1000, 0), SimCounters{}, small_icache(), small_dcache(), ch);
    CHECK(rel_close(e, 1.0e-7));
}

TEST_CASE("energy: miss terms charge the fill and the DRAM response") {
    const Characterization ch = simple_char();
    // access: 1000 * 1e-10 = 1e-7
    // fill:   10 * 1e-10 * 8 = 8e-9
    // dram:   10 * 0.5 * (100e-9 + 8/1e9) = 5.4e-7
    const double e =
        energy(counters(1000, 10), SimCounters{}, small_icache(), small_dcache(), ch);
    CHECK(rel_close(e, 1e-7 + 8e-9 + 5.4e-7));
}

TEST_CASE("both objectives with instruction and data activity") {
    const Characterization ch = simple_char();
    const SimCounters i = counters(500, 20);
    const SimCounters d = counters(300, 7);

    const double expected_t = 500 * 1e-9 + 20 * 100e-9 + 20 * 8.0 / 1e9 +
                              300 * 2e-9 + 7 * 100e-9 + 7 * 8.0 / 1e9;
    const double expected_e = 500 * 1e-10 + 300 * 3e-10 + 20 * 1e-10 * 8 +
                              7 * 3e-10 * 8 + 20 * 0.5 * (100e-9 + 8.0 / 1e9) +
                              7 * 0.5 * (100e-9 + 8.0 / 1e9);
    const ObjectiveVector obj = objectives(i, d, small_icache(), small_dcache(), ch);
    CHECK(rel_close(obj.exec_time, expected_t));
    CHECK(rel_close(obj.energy, expected_e));
}

TEST_CASE("miss accounting mode selects which misses are charged") {
    const SimCounters c = counters(100, 10, 5);
    CHECK(model_misses(c, MissMode::Combined) == 15);
    CHECK(model_misses(c, MissMode::DemandOnly) == 10);

    const Characterization ch = simple_char();
    const double combined =
        exec_time(c, SimCounters{}, small_icache(), small_dcache(), ch, MissMode::Combined);
    const double demand = exec_time(c, SimCounters{}, small_icache(), small_dcache(), ch,
                                    MissMode::DemandOnly);
    CHECK(combined > demand);
}

TEST_CASE("objectives are linear in the counters with the analytic slopes") {
    const Characterization ch = simple_char();
    const CacheConfig icfg = small_icache();
    const CacheConfig dcfg = small_dcache();

    auto t = [&](std::uint64_t ia, std::uint64_t im, std::uint64_t da, std::uint64_t dm) {
        return exec_time(counters(ia, im), counters(da, dm), icfg, dcfg, ch);
    };
    auto e = [&](std::uint64_t ia, std::uint64_t im, std::uint64_t da, std::uint64_t dm) {
        return energy(counters(ia, im), counters(da, dm), icfg, dcfg, ch);
    };

    // d(execTime)/d(I_access) = I_access_time
    CHECK(rel_close(t(101, 5, 40, 3) - t(100, 5, 40, 3), 1e-9, 1e-9));
    // d(execTime)/d(I_miss) = DRAM_at + line / bw
    CHECK(rel_close(t(100, 6, 40, 3) - t(100, 5, 40, 3), 100e-9 + 8.0 / 1e9, 1e-9));
    // d(energy)/d(D_access) = D_access_energy
    CHECK(rel_close(e(100, 5, 41, 3) - e(100, 5, 40, 3), 3e-10, 1e-9));
    // d(energy)/d(D_miss) = D_ae * line + DRAM_power * (DRAM_at + line / bw)
    CHECK(rel_close(e(100, 5, 40, 4) - e(100, 5, 40, 3),
                    3e-10 * 8 + 0.5 * (100e-9 + 8.0 / 1e9), 1e-9));

    // Monotonicity follows from the positive slopes.
    CHECK(t(100, 6, 40, 3) > t(100, 5, 40, 3));
    CHECK(e(100, 5, 40, 4) > e(100, 5, 40, 3));
}

TEST_CASE("improvement percentages, including negative ones") {
    const auto pct = improvement({0.1, 1.0}, {0.05, 1.5});
    CHECK(pct.time_pct == doctest::Approx(50.0));
    CHECK(pct.energy_pct == doctest::Approx(-50.0));

    const auto zero = improvement({0.1, 1.0}, {0.1, 1.0});
    CHECK(zero.time_pct == 0.0);
    CHECK(zero.energy_pct == 0.0);

    CHECK_THROWS_AS(improvement({0.0, 1.0}, {0.1, 1.0}), ValidationError);
}

TEST_CASE("characterization loader validates its input") {
    CHECK_THROWS_AS(Characterization::from_json(json{{"icache", json::array()}}),
                    ValidationError);

    json bad = json{
        {"icache", json::array({{{"line_size", 8},
                                 {"ways", 4},
                                 {"access_time_s", -1e-9},
                                 {"access_energy_j", 1e-10}}})},
        {"dcache", json::array()},
        {"dram",
         {{"access_time_s", 100e-9}, {"access_power_w", 0.5}, {"bandwidth_bps", 1e9}}}};
    CHECK_THROWS_AS(Characterization::from_json(bad), ValidationError);

    const Characterization ch = simple_char();
    CHECK_THROWS_AS(ch.lookup(CacheRole::Instruction, 16, 4), ValidationError);
    CHECK(ch.lookup(CacheRole::Instruction, 8, 4).access_time == 1e-9);

    // The single-pair table cannot cover the default 20-pair space.
    CHECK_THROWS_AS(ch.require_covers(SearchSpace::default_space()), ValidationError);
}
