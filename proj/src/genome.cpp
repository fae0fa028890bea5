#include "cachedse/genome.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cachedse/errors.hpp"
#include "cachedse/rng.hpp"

namespace cachedse {

using nlohmann::json;

const std::array<std::string, kGenomeLength> kGeneNames = {
    "LI", "WI", "RI", "SI", "LD", "WD", "RD", "SD", "AD"};

std::string to_string(const Genome& g) {
    std::string s = "[";
    for (int i = 0; i < kGenomeLength; ++i) {
        if (i) s += ',';
        s += std::to_string(g.genes[i]);
    }
    return s + "]";
}

Restriction parse_restriction(const std::string& text) {
    Restriction r{};
    if (text.empty()) return r;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ValidationError("restriction entry '" + item + "' is not NAME=value");
        const std::string name = item.substr(0, eq);
        const auto it = std::find(kGeneNames.begin(), kGeneNames.end(), name);
        if (it == kGeneNames.end())
            throw ValidationError("unknown gene name '" + name + "' in restriction");
        const std::string value_text = item.substr(eq + 1);
        int value = 0;
        std::size_t consumed = 0;
        try {
            value = std::stoi(value_text, &consumed);
        } catch (const std::exception&) {
            throw ValidationError("restriction value in '" + item + "' is not an integer");
        }
        if (consumed != value_text.size())
            throw ValidationError("restriction value in '" + item + "' is not an integer");
        r[it - kGeneNames.begin()] = value;
    }
    return r;
}

namespace {

std::vector<int> policy_table(const json& arr,
                              int (*parse)(const std::string&)) {
    std::vector<int> out;
    for (const auto& item : arr) out.push_back(parse(item.get<std::string>()));
    return out;
}

int parse_repl(const std::string& s) {
    return static_cast<int>(replacement_from_string(s));
}
int parse_pref(const std::string& s) {
    return static_cast<int>(prefetch_from_string(s));
}
int parse_write(const std::string& s) {
    return static_cast<int>(write_policy_from_string(s));
}

}  // namespace

SearchSpace SearchSpace::default_space() {
    SearchSpace s;
    const std::vector<int> lines = {8, 16, 32, 64};
    const std::vector<int> ways = {4, 8, 16, 32, 64};
    const std::vector<int> repl = {static_cast<int>(ReplacementPolicy::LRU),
                                   static_cast<int>(ReplacementPolicy::FIFO),
                                   static_cast<int>(ReplacementPolicy::RANDOM)};
    const std::vector<int> pref = {static_cast<int>(PrefetchPolicy::ON_DEMAND),
                                   static_cast<int>(PrefetchPolicy::ALWAYS_PREFETCH),
                                   static_cast<int>(PrefetchPolicy::MISS_PREFETCH)};
    const std::vector<int> write = {static_cast<int>(WritePolicy::COPY_BACK),
                                    static_cast<int>(WritePolicy::WRITE_THROUGH)};
    s.tables_ = {lines, ways, repl, pref, lines, ways, repl, pref, write};
    s.i_total_size_ = 16 * 1024;
    s.d_total_size_ = 16 * 1024;
    s.validate();
    return s;
}

SearchSpace SearchSpace::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open search-space file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("search-space file " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

SearchSpace SearchSpace::from_json(const json& j) {
    SearchSpace s;
    try {
        s.i_total_size_ = j.at("i_total_size").get<std::uint64_t>();
        s.d_total_size_ = j.at("d_total_size").get<std::uint64_t>();
        s.tables_[kILineGene] = j.at("i_line_sizes").get<std::vector<int>>();
        s.tables_[kIWaysGene] = j.at("i_ways").get<std::vector<int>>();
        s.tables_[kIReplGene] = policy_table(j.at("i_replacement"), parse_repl);
        s.tables_[kIPrefetchGene] = policy_table(j.at("i_prefetch"), parse_pref);
        s.tables_[kDLineGene] = j.at("d_line_sizes").get<std::vector<int>>();
        s.tables_[kDWaysGene] = j.at("d_ways").get<std::vector<int>>();
        s.tables_[kDReplGene] = policy_table(j.at("d_replacement"), parse_repl);
        s.tables_[kDPrefetchGene] = policy_table(j.at("d_prefetch"), parse_pref);
        s.tables_[kDWriteGene] = policy_table(j.at("write_policies"), parse_write);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("search-space JSON: ") + e.what());
    }
    s.validate();
    return s;
}

void SearchSpace::validate() const {
    for (int g = 0; g < kGenomeLength; ++g) {
        if (tables_[g].empty())
            throw ValidationError("search space: empty table for gene " + kGeneNames[g]);
        std::set<int> distinct(tables_[g].begin(), tables_[g].end());
        if (distinct.size() != tables_[g].size())
            throw ValidationError("search space: duplicate values for gene " + kGeneNames[g]);
    }
    auto check_cache = [](std::uint64_t total, const std::vector<int>& lines,
                          const std::vector<int>& ways, const char* label) {
        if (total == 0 || !std::has_single_bit(total))
            throw ValidationError(std::string("search space: ") + label +
                                  " total size must be a power of two");
        for (int line : lines)
            for (int way : ways) {
                CacheConfig probe;
                probe.total_size = total;
                probe.line_size = static_cast<std::uint64_t>(line);
                probe.ways = static_cast<std::uint64_t>(way);
                probe.validate();
            }
    };
    check_cache(i_total_size_, tables_[kILineGene], tables_[kIWaysGene], "icache");
    check_cache(d_total_size_, tables_[kDLineGene], tables_[kDWaysGene], "dcache");
}

void SearchSpace::validate_genome(const Genome& genome) const {
    for (int g = 0; g < kGenomeLength; ++g) {
        const int v = genome.genes[g];
        if (v < 0 || v >= table_size(g))
            throw ValidationError("gene " + kGeneNames[g] + " value " + std::to_string(v) +
                                  " out of range [0," + std::to_string(table_size(g) - 1) +
                                  "]");
    }
}

void SearchSpace::validate_restriction(const Restriction& restriction) const {
    for (int g = 0; g < kGenomeLength; ++g) {
        if (!restriction[g]) continue;
        if (*restriction[g] < 0 || *restriction[g] >= table_size(g))
            throw ValidationError("restriction fixes gene " + kGeneNames[g] +
                                  " to out-of-range value " +
                                  std::to_string(*restriction[g]));
    }
}

CacheConfigPair SearchSpace::decode(const Genome& genome) const {
    validate_genome(genome);
    CacheConfigPair pair;
    pair.icache.total_size = i_total_size_;
    pair.icache.line_size = static_cast<std::uint64_t>(tables_[kILineGene][genome.genes[kILineGene]]);
    pair.icache.ways = static_cast<std::uint64_t>(tables_[kIWaysGene][genome.genes[kIWaysGene]]);
    pair.icache.replacement =
        static_cast<ReplacementPolicy>(tables_[kIReplGene][genome.genes[kIReplGene]]);
    pair.icache.prefetch =
        static_cast<PrefetchPolicy>(tables_[kIPrefetchGene][genome.genes[kIPrefetchGene]]);
    pair.icache.writable = false;

    pair.dcache.total_size = d_total_size_;
    pair.dcache.line_size = static_cast<std::uint64_t>(tables_[kDLineGene][genome.genes[kDLineGene]]);
    pair.dcache.ways = static_cast<std::uint64_t>(tables_[kDWaysGene][genome.genes[kDWaysGene]]);
    pair.dcache.replacement =
        static_cast<ReplacementPolicy>(tables_[kDReplGene][genome.genes[kDReplGene]]);
    pair.dcache.prefetch =
        static_cast<PrefetchPolicy>(tables_[kDPrefetchGene][genome.genes[kDPrefetchGene]]);
    pair.dcache.write_policy =
        static_cast<WritePolicy>(tables_[kDWriteGene][genome.genes[kDWriteGene]]);
    pair.dcache.writable = true;

    pair.icache.validate();
    pair.dcache.validate();
    return pair;
}

namespace {

int index_of(const std::vector<int>& table, int value, const std::string& gene) {
    const auto it = std::find(table.begin(), table.end(), value);
    if (it == table.end())
        throw ValidationError("value " + std::to_string(value) + " for gene " + gene +
                              " is not in the search space");
    return static_cast<int>(it - table.begin());
}

}  // namespace

Genome SearchSpace::encode(const CacheConfig& icache, const CacheConfig& dcache) const {
    if (icache.total_size != i_total_size_)
        throw ValidationError("icache total_size " + std::to_string(icache.total_size) +
                              " does not match the space (" +
                              std::to_string(i_total_size_) + ")");
    if (dcache.total_size != d_total_size_)
        throw ValidationError("dcache total_size " + std::to_string(dcache.total_size) +
                              " does not match the space (" +
                              std::to_string(d_total_size_) + ")");
    if (!dcache.write_policy)
        throw ValidationError("dcache config has no write policy");

    Genome g;
    g.genes[kILineGene] =
        index_of(tables_[kILineGene], static_cast<int>(icache.line_size), "LI");
    g.genes[kIWaysGene] = index_of(tables_[kIWaysGene], static_cast<int>(icache.ways), "WI");
    g.genes[kIReplGene] =
        index_of(tables_[kIReplGene], static_cast<int>(icache.replacement), "RI");
    g.genes[kIPrefetchGene] =
        index_of(tables_[kIPrefetchGene], static_cast<int>(icache.prefetch), "SI");
    g.genes[kDLineGene] =
        index_of(tables_[kDLineGene], static_cast<int>(dcache.line_size), "LD");
    g.genes[kDWaysGene] = index_of(tables_[kDWaysGene], static_cast<int>(dcache.ways), "WD");
    g.genes[kDReplGene] =
        index_of(tables_[kDReplGene], static_cast<int>(dcache.replacement), "RD");
    g.genes[kDPrefetchGene] =
        index_of(tables_[kDPrefetchGene], static_cast<int>(dcache.prefetch), "SD");
    g.genes[kDWriteGene] =
        index_of(tables_[kDWriteGene], static_cast<int>(*dcache.write_policy), "AD");
    return g;
}

std::vector<Genome> SearchSpace::enumerate(const Restriction& restriction) const {
    validate_restriction(restriction);
    std::vector<Genome> out;
    out.reserve(cardinality(restriction));

    Genome g;
    for (int i = 0; i < kGenomeLength; ++i) g.genes[i] = restriction[i].value_or(0);
    while (true) {
        out.push_back(g);
        // Odometer increment, last gene fastest; fixed genes are skipped.
        int pos = kGenomeLength - 1;
        for (; pos >= 0; --pos) {
            if (restriction[pos]) continue;
            if (g.genes[pos] + 1 < table_size(pos)) {
                ++g.genes[pos];
                break;
            }
            g.genes[pos] = 0;
        }
        if (pos < 0) break;
    }
    return out;
}

std::uint64_t SearchSpace::cardinality(const Restriction& restriction) const {
    std::uint64_t n = 1;
    for (int g = 0; g < kGenomeLength; ++g)
        if (!restriction[g]) n *= static_cast<std::uint64_t>(table_size(g));
    return n;
}

std::uint64_t SearchSpace::digest() const {
    Fnv1a h;
    h.update_u64(i_total_size_);
    h.update_u64(d_total_size_);
    for (const auto& table : tables_) {
        h.update_u64(table.size());
        for (int v : table) h.update_u64(static_cast<std::uint64_t>(v));
    }
    return h.value();
}

}  // namespace cachedse
