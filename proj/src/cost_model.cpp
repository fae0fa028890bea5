#include "cachedse/cost_model.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cachedse/errors.hpp"
#include "cachedse/genome.hpp"
#include "cachedse/rng.hpp"

namespace cachedse {

using nlohmann::json;

std::uint64_t model_misses(const SimCounters& counters, MissMode mode) {
    return mode == MissMode::Combined
               ? counters.demand_misses + counters.prefetch_fetches
               : counters.demand_misses;
}

namespace {

void check_positive(double v, const std::string& what) {
    if (!(v > 0.0))
        throw ValidationError("characterization: " + what + " must be > 0");
}

std::map<std::pair<std::uint64_t, std::uint64_t>, CacheTiming> read_cache_table(
    const json& arr, const char* label) {
    std::map<std::pair<std::uint64_t, std::uint64_t>, CacheTiming> out;
    for (const auto& item : arr) {
        const auto line = item.at("line_size").get<std::uint64_t>();
        const auto ways = item.at("ways").get<std::uint64_t>();
        CacheTiming t;
        t.access_time = item.at("access_time_s").get<double>();
        t.access_energy = item.at("access_energy_j").get<double>();
        check_positive(t.access_time, std::string(label) + " access_time_s");
        check_positive(t.access_energy, std::string(label) + " access_energy_j");
        if (!out.emplace(std::make_pair(line, ways), t).second)
            throw ValidationError("characterization: duplicate " + std::string(label) +
                                  " entry for line_size " + std::to_string(line) +
                                  ", ways " + std::to_string(ways));
    }
    return out;
}

}  // namespace

Characterization Characterization::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open characterization file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("characterization file " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

Characterization Characterization::from_json(const json& j) {
    Characterization ch;
    try {
        ch.icache_ = read_cache_table(j.at("icache"), "icache");
        ch.dcache_ = read_cache_table(j.at("dcache"), "dcache");
        const auto& dram = j.at("dram");
        ch.dram_.access_time = dram.at("access_time_s").get<double>();
        ch.dram_.access_power = dram.at("access_power_w").get<double>();
        ch.dram_.bandwidth = dram.at("bandwidth_bps").get<double>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("characterization JSON: ") + e.what());
    }
    check_positive(ch.dram_.access_time, "dram access_time_s");
    check_positive(ch.dram_.access_power, "dram access_power_w");
    check_positive(ch.dram_.bandwidth, "dram bandwidth_bps");
    return ch;
}

const CacheTiming& Characterization::lookup(CacheRole role, std::uint64_t line_size,
                                            std::uint64_t ways) const {
    const auto& table = role == CacheRole::Instruction ? icache_ : dcache_;
    const auto it = table.find({line_size, ways});
    if (it == table.end())
        throw ValidationError(std::string("characterization: no ") +
                              (role == CacheRole::Instruction ? "icache" : "dcache") +
                              " entry for line_size " + std::to_string(line_size) +
                              ", ways " + std::to_string(ways));
    return it->second;
}

void Characterization::require_covers(const SearchSpace& space) const {
    for (int line : space.table(kILineGene))
        for (int ways : space.table(kIWaysGene))
            lookup(CacheRole::Instruction, static_cast<std::uint64_t>(line),
                   static_cast<std::uint64_t>(ways));
    for (int line : space.table(kDLineGene))
        for (int ways : space.table(kDWaysGene))
            lookup(CacheRole::Data, static_cast<std::uint64_t>(line),
                   static_cast<std::uint64_t>(ways));
}

std::uint64_t Characterization::digest() const {
    Fnv1a h;
    auto update_double = [&h](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        h.update(buf, std::char_traits<char>::length(buf));
    };
    for (const auto* table : {&icache_, &dcache_}) {
        h.update_u64(table->size());
        for (const auto& [key, t] : *table) {
            h.update_u64(key.first);
            h.update_u64(key.second);
            update_double(t.access_time);
            update_double(t.access_energy);
        }
    }
    update_double(dram_.access_time);
    update_double(dram_.access_power);
    update_double(dram_.bandwidth);
    return h.value();
}

double exec_time(const SimCounters& i, const SimCounters& d, const CacheConfig& i_cfg,
                 const CacheConfig& d_cfg, const Characterization& ch, MissMode mode) {
    const CacheTiming& it = ch.lookup(CacheRole::Instruction, i_cfg.line_size, i_cfg.ways);
    const CacheTiming& dt = ch.lookup(CacheRole::Data, d_cfg.line_size, d_cfg.ways);
    const DramParams& dram = ch.dram();
    const auto i_miss = static_cast<double>(model_misses(i, mode));
    const auto d_miss = static_cast<double>(model_misses(d, mode));
    const auto i_line = static_cast<double>(i_cfg.line_size);
    const auto d_line = static_cast<double>(d_cfg.line_size);

    return static_cast<double>(i.accesses) * it.access_time +
           i_miss * dram.access_time +
           i_miss * i_line / dram.bandwidth +
           static_cast<double>(d.accesses) * dt.access_time +
           d_miss * dram.access_time +
           d_miss * d_line / dram.bandwidth;
}

double energy(const SimCounters& i, const SimCounters& d, const CacheConfig& i_cfg,
              const CacheConfig& d_cfg, const Characterization& ch, MissMode mode) {
    const CacheTiming& it = ch.lookup(CacheRole::Instruction, i_cfg.line_size, i_cfg.ways);
    const CacheTiming& dt = ch.lookup(CacheRole::Data, d_cfg.line_size, d_cfg.ways);
    const DramParams& dram = ch.dram();
    const auto i_miss = static_cast<double>(model_misses(i, mode));
    const auto d_miss = static_cast<double>(model_misses(d, mode));
    const auto i_line = static_cast<double>(i_cfg.line_size);
    const auto d_line = static_cast<double>(d_cfg.line_size);

    return static_cast<double>(i.accesses) * it.access_energy +
           static_cast<double>(d.accesses) * dt.access_energy +
           i_miss * it.access_energy * i_line +
           d_miss * dt.access_energy * d_line +
           i_miss * dram.access_power * (dram.access_time + i_line / dram.bandwidth) +
           d_miss * dram.access_power * (dram.access_time + d_line / dram.bandwidth);
}

ObjectiveVector objectives(const SimCounters& i, const SimCounters& d,
                           const CacheConfig& i_cfg, const CacheConfig& d_cfg,
                           const Characterization& ch, MissMode mode) {
    return {exec_time(i, d, i_cfg, d_cfg, ch, mode), energy(i, d, i_cfg, d_cfg, ch, mode)};
}

ImprovementPct improvement(const ObjectiveVector& baseline,
                           const ObjectiveVector& optimized) {
    if (!(baseline.exec_time > 0.0) || !(baseline.energy > 0.0))
        throw ValidationError("improvement: baseline objectives must be > 0");
    return {100.0 * (baseline.exec_time - optimized.exec_time) / baseline.exec_time,
            100.0 * (baseline.energy - optimized.energy) / baseline.energy};
}

}  // namespace cachedse
