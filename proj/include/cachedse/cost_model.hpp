#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>

#include <nlohmann/json_fwd.hpp>

#include "cachedse/cache_sim.hpp"

namespace cachedse {

class SearchSpace;

struct ObjectiveVector {
    double exec_time = 0.0;  // seconds
    double energy = 0.0;     // joules

    bool operator==(const ObjectiveVector&) const = default;
};

struct CacheTiming {
    double access_time = 0.0;    // seconds per access
    double access_energy = 0.0;  // joules per access
};

struct DramParams {
    double access_time = 0.0;   // seconds
    double access_power = 0.0;  // watts
    double bandwidth = 0.0;     // bytes/second
};

enum class CacheRole { Instruction, Data };

// Which miss count the objectives charge DRAM work for. Combined treats every
// line fill (demand or prefetch) as one DRAM access; DemandOnly ignores
// prefetch traffic.
enum class MissMode { Combined, DemandOnly };

std::uint64_t model_misses(const SimCounters& counters, MissMode mode);

// Per-(line size, ways) access timing/energy for both caches plus DRAM
// parameters; stands in for an external characterization tool.
class Characterization {
public:
    static Characterization from_json_file(const std::filesystem::path& path);
    static Characterization from_json(const nlohmann::json& j);

    const CacheTiming& lookup(CacheRole role, std::uint64_t line_size,
                              std::uint64_t ways) const;

    // Ensures every (line size, ways) pair reachable in the space is covered.
    void require_covers(const SearchSpace& space) const;

    const DramParams& dram() const { return dram_; }
    std::uint64_t digest() const;

private:
    using Key = std::pair<std::uint64_t, std::uint64_t>;
    std::map<Key, CacheTiming> icache_;
    std::map<Key, CacheTiming> dcache_;
    DramParams dram_;
};

double exec_time(const SimCounters& i, const SimCounters& d, const CacheConfig& i_cfg,
                 const CacheConfig& d_cfg, const Characterization& ch,
                 MissMode mode = MissMode::Combined);

double energy(const SimCounters& i, const SimCounters& d, const CacheConfig& i_cfg,
              const CacheConfig& d_cfg, const Characterization& ch,
              MissMode mode = MissMode::Combined);

ObjectiveVector objectives(const SimCounters& i, const SimCounters& d,
                           const CacheConfig& i_cfg, const CacheConfig& d_cfg,
                           const Characterization& ch, MissMode mode = MissMode::Combined);

struct ImprovementPct {
    double time_pct = 0.0;
    double energy_pct = 0.0;
};

// Signed percentage improvements of `optimized` over `baseline`; negative
// when the candidate is worse. Baseline components must be > 0.
ImprovementPct improvement(const ObjectiveVector& baseline, const ObjectiveVector& optimized);

}  // namespace cachedse
