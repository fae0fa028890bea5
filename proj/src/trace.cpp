#include "cachedse/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cachedse/errors.hpp"
#include "cachedse/rng.hpp"

namespace cachedse {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::string_view next_token(std::string_view& s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    std::size_t end = 0;
    while (end < s.size() && s[end] != ' ' && s[end] != '\t') ++end;
    std::string_view tok = s.substr(0, end);
    s.remove_prefix(end);
    return tok;
}

}  // namespace

AccessRecord parse_record(std::string_view line, std::size_t line_number) {
    std::string_view rest = trim(line);
    std::string_view label = next_token(rest);
    std::string_view addr_tok = next_token(rest);

    if (label.empty())
        throw ParseError("empty record", line_number);
    if (addr_tok.empty())
        throw ParseError("missing address field", line_number);

    AccessRecord rec;
    if (label == "0") rec.kind = AccessKind::DataRead;
    else if (label == "1") rec.kind = AccessKind::DataWrite;
    else if (label == "2") rec.kind = AccessKind::InstrFetch;
    else
        throw ParseError("invalid label '" + std::string(label) + "' (expected 0, 1 or 2)",
                         line_number);

    if (addr_tok.starts_with("0x") || addr_tok.starts_with("0X")) addr_tok.remove_prefix(2);
    if (addr_tok.empty())
        throw ParseError("missing address field", line_number);
    auto [ptr, ec] = std::from_chars(addr_tok.data(), addr_tok.data() + addr_tok.size(),
                                     rec.address, 16);
    if (ec != std::errc{} || ptr != addr_tok.data() + addr_tok.size())
        throw ParseError("unparsable address '" + std::string(addr_tok) + "'", line_number);

    return rec;
}

std::string format_record(const AccessRecord& rec) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%d %llx", static_cast<int>(rec.kind),
                  static_cast<unsigned long long>(rec.address));
    return buf;
}

std::vector<AccessRecord> synth_trace(const SynthSpec& spec, std::uint64_t count,
                                      std::uint64_t seed) {
    if (count == 0) throw ValidationError("synth_trace: count must be > 0");
    const double mix_sum = spec.mix.instr + spec.mix.read + spec.mix.write;
    if (spec.mix.instr < 0 || spec.mix.read < 0 || spec.mix.write < 0 ||
        std::abs(mix_sum - 1.0) > 1e-9)
        throw ValidationError("synth_trace: mix ratios must be non-negative and sum to 1");
    if (spec.pattern == SynthSpec::Pattern::Uniform && spec.hi <= spec.lo)
        throw ValidationError("synth_trace: uniform pattern requires lo < hi");
    if (spec.pattern == SynthSpec::Pattern::Loop && spec.working_set == 0)
        throw ValidationError("synth_trace: loop pattern requires working_set > 0");

    Xorshift64Star rng(seed);
    std::vector<AccessRecord> out;
    out.reserve(count);

    for (std::uint64_t i = 0; i < count; ++i) {
        AccessRecord rec;
        const double u = rng.next_unit();
        if (u < spec.mix.instr) rec.kind = AccessKind::InstrFetch;
        else if (u < spec.mix.instr + spec.mix.read) rec.kind = AccessKind::DataRead;
        else rec.kind = AccessKind::DataWrite;

        switch (spec.pattern) {
            case SynthSpec::Pattern::Stride:
                rec.address = spec.start + i * spec.stride;
                break;
            case SynthSpec::Pattern::Uniform:
                rec.address = spec.lo + rng.next_below(spec.hi - spec.lo);
                break;
            case SynthSpec::Pattern::Loop:
                rec.address = spec.base + (i * spec.stride) % spec.working_set;
                break;
        }
        out.push_back(rec);
    }
    return out;
}

std::vector<AccessRecord> read_trace(const TraceSource& source) {
    if (source.record_limit && *source.record_limit == 0)
        throw ValidationError("record_limit must be > 0 when present");

    if (const auto* mem = std::get_if<std::vector<AccessRecord>>(&source.origin)) {
        std::vector<AccessRecord> out = *mem;
        if (source.record_limit && out.size() > *source.record_limit)
            out.resize(*source.record_limit);
        return out;
    }

    const auto& path = std::get<std::filesystem::path>(source.origin);
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open trace file: " + path.string());

    std::vector<AccessRecord> out;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        out.push_back(parse_record(sv, line_number));
        if (source.record_limit && out.size() == *source.record_limit) break;
    }
    return out;
}

std::uint64_t trace_digest(const std::vector<AccessRecord>& records) {
    Fnv1a h;
    for (const auto& r : records) {
        h.update_u64(static_cast<std::uint64_t>(r.kind));
        h.update_u64(r.address);
    }
    h.update_u64(records.size());
    return h.value();
}

}  // namespace cachedse
