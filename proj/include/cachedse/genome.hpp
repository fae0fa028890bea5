#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cachedse/cache_sim.hpp"

namespace cachedse {

inline constexpr int kGenomeLength = 9;

// Storage order: the I-cache block, the D-cache block, write policy last.
enum GeneIndex : int {
    kILineGene = 0,
    kIWaysGene = 1,
    kIReplGene = 2,
    kIPrefetchGene = 3,
    kDLineGene = 4,
    kDWaysGene = 5,
    kDReplGene = 6,
    kDPrefetchGene = 7,
    kDWriteGene = 8,
};

// Short gene names used in CSV headers and --restrict (SD = D prefetch,
// AD = D write policy).
extern const std::array<std::string, kGenomeLength> kGeneNames;

struct Genome {
    std::array<int, kGenomeLength> genes{};

    auto operator<=>(const Genome&) const = default;

    // Packs the genes into 4 bits each; genes never exceed 15.
    std::uint64_t key() const {
        std::uint64_t k = 0;
        for (int g : genes) k = (k << 4) | static_cast<std::uint64_t>(g);
        return k;
    }
};

std::string to_string(const Genome& g);

// Per-gene fixed values restricting initialization, mutation and enumeration
// to a sub-space. Gene values index the unrestricted tables.
using Restriction = std::array<std::optional<int>, kGenomeLength>;

Restriction parse_restriction(const std::string& text);

struct CacheConfigPair {
    CacheConfig icache;
    CacheConfig dcache;
};

// Per-gene value tables plus the fixed per-cache capacities. Tables are data,
// not constants, so alternate spaces (other sizes, fewer ways) stay loadable.
class SearchSpace {
public:
    // Line sizes 8/16/32/64, ways 4/8/16/32/64, all replacement, prefetch and
    // write policies, 16 KB per cache: 64800 configurations.
    static SearchSpace default_space();

    static SearchSpace from_json_file(const std::filesystem::path& path);
    static SearchSpace from_json(const nlohmann::json& j);

    CacheConfigPair decode(const Genome& genome) const;
    Genome encode(const CacheConfig& icache, const CacheConfig& dcache) const;

    std::vector<Genome> enumerate(const Restriction& restriction = {}) const;

    std::uint64_t cardinality(const Restriction& restriction = {}) const;

    int table_size(int gene) const { return static_cast<int>(tables_[gene].size()); }
    const std::vector<int>& table(int gene) const { return tables_[gene]; }
    std::uint64_t i_total_size() const { return i_total_size_; }
    std::uint64_t d_total_size() const { return d_total_size_; }

    void validate_genome(const Genome& genome) const;
    void validate_restriction(const Restriction& restriction) const;

    std::uint64_t digest() const;

private:
    SearchSpace() = default;
    void validate() const;

    std::array<std::vector<int>, kGenomeLength> tables_;
    std::uint64_t i_total_size_ = 0;
    std::uint64_t d_total_size_ = 0;
};

}  // namespace cachedse
