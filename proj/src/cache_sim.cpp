#include "cachedse/cache_sim.hpp"

#include <bit>
#include <limits>

#include "cachedse/errors.hpp"

namespace cachedse {

std::string to_string(ReplacementPolicy p) {
    switch (p) {
        case ReplacementPolicy::LRU: return "LRU";
        case ReplacementPolicy::FIFO: return "FIFO";
        case ReplacementPolicy::RANDOM: return "RANDOM";
    }
    return "?";
}

std::string to_string(PrefetchPolicy p) {
    switch (p) {
        case PrefetchPolicy::ON_DEMAND: return "ON_DEMAND";
        case PrefetchPolicy::ALWAYS_PREFETCH: return "ALWAYS_PREFETCH";
        case PrefetchPolicy::MISS_PREFETCH: return "MISS_PREFETCH";
    }
    return "?";
}

std::string to_string(WritePolicy p) {
    return p == WritePolicy::COPY_BACK ? "COPY_BACK" : "WRITE_THROUGH";
}

ReplacementPolicy replacement_from_string(std::string_view s) {
    if (s == "LRU") return ReplacementPolicy::LRU;
    if (s == "FIFO") return ReplacementPolicy::FIFO;
    if (s == "RANDOM") return ReplacementPolicy::RANDOM;
    throw ValidationError("unknown replacement policy: " + std::string(s));
}

PrefetchPolicy prefetch_from_string(std::string_view s) {
    if (s == "ON_DEMAND") return PrefetchPolicy::ON_DEMAND;
    if (s == "ALWAYS_PREFETCH") return PrefetchPolicy::ALWAYS_PREFETCH;
    if (s == "MISS_PREFETCH") return PrefetchPolicy::MISS_PREFETCH;
    throw ValidationError("unknown prefetch policy: " + std::string(s));
}

WritePolicy write_policy_from_string(std::string_view s) {
    if (s == "COPY_BACK") return WritePolicy::COPY_BACK;
    if (s == "WRITE_THROUGH") return WritePolicy::WRITE_THROUGH;
    throw ValidationError("unknown write policy: " + std::string(s));
}

void CacheConfig::validate() const {
    if (total_size == 0 || !std::has_single_bit(total_size))
        throw ValidationError("cache config: total_size must be a power of two, got " +
                              std::to_string(total_size));
    if (line_size == 0 || !std::has_single_bit(line_size))
        throw ValidationError("cache config: line_size must be a power of two, got " +
                              std::to_string(line_size));
    if (ways == 0 || !std::has_single_bit(ways))
        throw ValidationError("cache config: ways must be a power of two, got " +
                              std::to_string(ways));
    if (line_size * ways > total_size)
        throw ValidationError("cache config: total_size " + std::to_string(total_size) +
                              " holds no full set of " + std::to_string(ways) + " x " +
                              std::to_string(line_size) + "-byte lines");
    if (!writable && write_policy.has_value())
        throw ValidationError("cache config: write_policy set on a read-only cache");
    if (writable && !write_policy.has_value())
        throw ValidationError("cache config: write_policy missing on a writable cache");
}

AddressParts decompose(const CacheConfig& config, std::uint64_t address) {
    AddressParts parts;
    parts.block_number = address / config.line_size;
    parts.set_index = parts.block_number % config.sets();
    parts.tag = parts.block_number / config.sets();
    return parts;
}

CacheState::CacheState(const CacheConfig& config, std::uint64_t rng_seed)
    : config_(config), rng_(rng_seed) {
    config_.validate();
    sets_ = config_.sets();
    const unsigned line_bits = std::countr_zero(config_.line_size);
    block_mask_ = (line_bits == 0) ? ~std::uint64_t{0}
                                   : (std::uint64_t{1} << (64 - line_bits)) - 1;
    lines_.assign(sets_ * config_.ways, Line{});
}

std::span<CacheState::Line> CacheState::set_lines(std::uint64_t set) {
    return {lines_.data() + set * config_.ways, config_.ways};
}

CacheState::Line* CacheState::find_line(std::uint64_t set, std::uint64_t tag) {
    for (Line& line : set_lines(set))
        if (line.valid && line.tag == tag) return &line;
    return nullptr;
}

unsigned CacheState::install(std::uint64_t set, std::uint64_t tag, bool dirty) {
    auto lines = set_lines(set);

    Line* victim = nullptr;
    for (Line& line : lines) {
        if (!line.valid) {
            victim = &line;
            break;
        }
    }
    if (!victim) {
        switch (config_.replacement) {
            case ReplacementPolicy::LRU:
            case ReplacementPolicy::FIFO: {
                victim = &lines[0];
                for (Line& line : lines)
                    if (line.stamp < victim->stamp) victim = &line;
                break;
            }
            case ReplacementPolicy::RANDOM:
                victim = &lines[rng_.next_below(config_.ways)];
                break;
        }
    }

    unsigned writebacks = 0;
    if (victim->valid && victim->dirty) {
        ++counters_.writebacks;
        writebacks = 1;
    }
    victim->tag = tag;
    victim->valid = true;
    victim->dirty = dirty;
    victim->stamp = ++clock_;
    return writebacks;
}

AccessOutcome CacheState::access(const AccessRecord& record) {
    if (record.kind == AccessKind::DataWrite && !config_.writable)
        throw SimulationError("write access to a read-only cache");

    ++counters_.accesses;
    const AddressParts parts = decompose(config_, record.address);
    const bool copy_back =
        config_.write_policy && *config_.write_policy == WritePolicy::COPY_BACK;

    AccessOutcome out;
    Line* line = find_line(parts.set_index, parts.tag);
    if (line) {
        out.hit = true;
        if (config_.replacement == ReplacementPolicy::LRU) line->stamp = ++clock_;
        if (record.kind == AccessKind::DataWrite) {
            if (copy_back) line->dirty = true;
            else ++counters_.writethroughs;
        }
    } else {
        ++counters_.demand_misses;
        if (record.kind == AccessKind::DataWrite && !copy_back) {
            // Write-through misses do not allocate; the write goes to DRAM.
            ++counters_.writethroughs;
        } else {
            const bool dirty = record.kind == AccessKind::DataWrite && copy_back;
            out.writebacks_emitted += install(parts.set_index, parts.tag, dirty);
            ++out.lines_fetched;
        }
    }

    const bool prefetch =
        config_.prefetch == PrefetchPolicy::ALWAYS_PREFETCH ||
        (config_.prefetch == PrefetchPolicy::MISS_PREFETCH && !out.hit);
    if (prefetch) {
        const std::uint64_t next_block = (parts.block_number + 1) & block_mask_;
        const std::uint64_t pf_set = next_block % sets_;
        const std::uint64_t pf_tag = next_block / sets_;
        if (!find_line(pf_set, pf_tag)) {
            ++counters_.prefetch_fetches;
            out.writebacks_emitted += install(pf_set, pf_tag, false);
            ++out.lines_fetched;
        }
    }
    return out;
}

SimResult simulate(std::span<const AccessRecord> trace, const CacheConfig& i_config,
                   const CacheConfig& d_config, std::uint64_t i_seed,
                   std::uint64_t d_seed) {
    if (i_config.writable)
        throw ValidationError("simulate: instruction cache must be read-only");
    if (!d_config.writable)
        throw ValidationError("simulate: data cache must be writable");

    CacheState icache(i_config, i_seed);
    CacheState dcache(d_config, d_seed);
    for (const AccessRecord& rec : trace) {
        if (rec.kind == AccessKind::InstrFetch) icache.access(rec);
        else dcache.access(rec);
    }
    return {icache.counters(), dcache.counters()};
}

}  // namespace cachedse
