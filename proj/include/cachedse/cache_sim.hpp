#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cachedse/rng.hpp"
#include "cachedse/trace.hpp"

namespace cachedse {

enum class ReplacementPolicy { LRU = 0, FIFO = 1, RANDOM = 2 };
enum class PrefetchPolicy { ON_DEMAND = 0, ALWAYS_PREFETCH = 1, MISS_PREFETCH = 2 };
enum class WritePolicy { COPY_BACK = 0, WRITE_THROUGH = 1 };

std::string to_string(ReplacementPolicy p);
std::string to_string(PrefetchPolicy p);
std::string to_string(WritePolicy p);
ReplacementPolicy replacement_from_string(std::string_view s);
PrefetchPolicy prefetch_from_string(std::string_view s);
WritePolicy write_policy_from_string(std::string_view s);

struct CacheConfig {
    std::uint64_t total_size = 0;  // bytes, power of two
    std::uint64_t line_size = 0;   // bytes, power of two
    std::uint64_t ways = 0;        // power of two
    ReplacementPolicy replacement = ReplacementPolicy::LRU;
    PrefetchPolicy prefetch = PrefetchPolicy::ON_DEMAND;
    std::optional<WritePolicy> write_policy;  // present iff writable
    bool writable = false;

    std::uint64_t sets() const { return total_size / (line_size * ways); }

    // Throws ValidationError naming the offending field.
    void validate() const;
};

struct SimCounters {
    std::uint64_t accesses = 0;
    std::uint64_t demand_misses = 0;
    std::uint64_t prefetch_fetches = 0;
    std::uint64_t writebacks = 0;
    std::uint64_t writethroughs = 0;

    std::uint64_t hits() const { return accesses - demand_misses; }
    bool operator==(const SimCounters&) const = default;
};

struct AccessOutcome {
    bool hit = false;
    unsigned lines_fetched = 0;      // demand fill + prefetch fill
    unsigned writebacks_emitted = 0;  // dirty evictions caused by this access
};

struct AddressParts {
    std::uint64_t tag = 0;
    std::uint64_t set_index = 0;
    std::uint64_t block_number = 0;
};

AddressParts decompose(const CacheConfig& config, std::uint64_t address);

// Functional model of one set-associative cache. Single-threaded; distinct
// instances may run concurrently.
class CacheState {
public:
    explicit CacheState(const CacheConfig& config, std::uint64_t rng_seed = 0);

    AccessOutcome access(const AccessRecord& record);

    const SimCounters& counters() const { return counters_; }
    const CacheConfig& config() const { return config_; }

private:
    struct Line {
        std::uint64_t tag = 0;
        std::uint64_t stamp = 0;  // LRU recency / FIFO insertion order
        bool valid = false;
        bool dirty = false;
    };

    std::span<Line> set_lines(std::uint64_t set);
    Line* find_line(std::uint64_t set, std::uint64_t tag);
    // Installs (set, tag); returns 1 if a dirty victim was written back.
    unsigned install(std::uint64_t set, std::uint64_t tag, bool dirty);

    CacheConfig config_;
    std::uint64_t sets_ = 0;
    std::uint64_t block_mask_ = 0;  // block numbers wrap modulo the 64-bit space
    std::vector<Line> lines_;       // sets_ * ways, grouped by set
    std::uint64_t clock_ = 0;
    Xorshift64Star rng_;
    SimCounters counters_;
};

struct SimResult {
    SimCounters icache;
    SimCounters dcache;
};

// Routes instruction fetches to the I-cache and data accesses to the D-cache.
// i_config must be read-only, d_config writable. Deterministic for fixed seeds.
SimResult simulate(std::span<const AccessRecord> trace, const CacheConfig& i_config,
                   const CacheConfig& d_config, std::uint64_t i_seed = 0,
                   std::uint64_t d_seed = 0);

}  // namespace cachedse
