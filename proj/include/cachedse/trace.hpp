#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cachedse {

enum class AccessKind { DataRead = 0, DataWrite = 1, InstrFetch = 2 };

struct AccessRecord {
    AccessKind kind = AccessKind::DataRead;
    std::uint64_t address = 0;

    bool operator==(const AccessRecord&) const = default;
};

// One line of a Dinero-style ".din" trace: "<label> <hex-address>".
// Labels: 0 = data read, 1 = data write, 2 = instruction fetch.
AccessRecord parse_record(std::string_view line, std::size_t line_number = 0);

std::string format_record(const AccessRecord& rec);

// Kind mix for synthetic traces; ratios must sum to 1.
struct SynthMix {
    double instr = 1.0;
    double read = 0.0;
    double write = 0.0;
};

struct SynthSpec {
    enum class Pattern { Stride, Uniform, Loop };

    Pattern pattern = Pattern::Stride;
    // Stride: addresses start, start+stride, start+2*stride, ...
    std::uint64_t start = 0;
    std::uint64_t stride = 1;
    // Uniform: addresses drawn uniformly from [lo, hi).
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    // Loop: addresses cycle through base + (i*stride mod working_set).
    std::uint64_t base = 0;
    std::uint64_t working_set = 0;

    SynthMix mix;
};

// Deterministic generator: the output is a pure function of (spec, count, seed).
std::vector<AccessRecord> synth_trace(const SynthSpec& spec, std::uint64_t count,
                                      std::uint64_t seed);

struct TraceSource {
    std::variant<std::filesystem::path, std::vector<AccessRecord>> origin;
    std::optional<std::uint64_t> record_limit;  // > 0 when present
};

// Reads records in order, skipping blank lines and '#' comments, and stops
// at record_limit when set.
std::vector<AccessRecord> read_trace(const TraceSource& source);

// Content digest over (kind, address) pairs; identifies a trace for memoization.
std::uint64_t trace_digest(const std::vector<AccessRecord>& records);

}  // namespace cachedse
