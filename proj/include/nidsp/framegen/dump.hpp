#ifndef NIDSP_FRAMEGEN_DUMP_HPP
#define NIDSP_FRAMEGEN_DUMP_HPP

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nidsp/framegen/frame.hpp"

namespace nidsp {

// Raw dump format: `<stem>.x.c64` and `<stem>.y.c64` hold little-endian
// interleaved float32 (re, im) pairs; `<stem>.bits` one byte (0/1) per bit;
// `<stem>.hdr` is `key=value` text with the rate and layout fields.

namespace detail {

inline void put_f32_le(std::ostream& os, float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
    char b[4];
    std::memcpy(b, &u, 4);
    os.write(b, 4);
}

inline float get_f32_le(std::istream& is) {
    char b[4];
    is.read(b, 4);
    std::uint32_t u;
    std::memcpy(&u, b, 4);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}

inline void write_c64(const std::filesystem::path& p, std::span<const cplx> v) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    for (const auto& s : v) {
        put_f32_le(os, static_cast<float>(s.real()));
        put_f32_le(os, static_cast<float>(s.imag()));
    }
}

inline cvec read_c64(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary | std::ios::ate);
    if (!is) throw std::runtime_error("cannot read " + p.string());
    const auto bytes = static_cast<std::size_t>(is.tellg());
    if (bytes % 8 != 0) throw std::runtime_error(p.string() + ": size is not a multiple of 8 bytes");
    is.seekg(0);
    cvec v(bytes / 8);
    for (auto& s : v) {
        const float re = get_f32_le(is);
        const float im = get_f32_le(is);
        s = {re, im};
    }
    return v;
}

} // namespace detail

struct DumpHeader {
    std::map<std::string, std::string> fields;

    [[nodiscard]] std::string get(const std::string& k) const {
        const auto it = fields.find(k);
        if (it == fields.end()) throw std::runtime_error("dump header: missing key '" + k + "'");
        return it->second;
    }
};

inline void write_header(const std::filesystem::path& p, const DumpHeader& h) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << "# nidsp raw dump\n";
    for (const auto& [k, v] : h.fields) os << k << '=' << v << '\n';
}

inline DumpHeader read_header(const std::filesystem::path& p) {
    std::ifstream is(p);
    if (!is) throw std::runtime_error("cannot read " + p.string());
    DumpHeader h;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error(p.string() + ": malformed line '" + line + "'");
        h.fields[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return h;
}

inline DumpHeader layout_header(const FrameLayout& l, Rational rate, std::uint64_t seed) {
    DumpHeader h;
    h.fields = {{"rate_sps", rate.str()},
                {"total_symbols", std::to_string(l.total_symbols)},
                {"ts_tone_len", std::to_string(l.ts_tone_len)},
                {"ts_sync_period", std::to_string(l.ts_sync_period)},
                {"ts_sync_repeats", std::to_string(l.ts_sync_repeats)},
                {"ts_total", std::to_string(l.ts_total)},
                {"pilot_count", std::to_string(l.pilot_count)},
                {"pilot_spacing", std::to_string(l.pilot_spacing())},
                {"payload_len", std::to_string(l.payload_len())},
                {"seed", std::to_string(seed)}};
    return h;
}

inline FrameLayout layout_from_header(const DumpHeader& h) {
    FrameLayout l;
    l.total_symbols = std::stoi(h.get("total_symbols"));
    l.ts_tone_len = std::stoi(h.get("ts_tone_len"));
    l.ts_sync_period = std::stoi(h.get("ts_sync_period"));
    l.ts_sync_repeats = std::stoi(h.get("ts_sync_repeats"));
    l.ts_total = std::stoi(h.get("ts_total"));
    l.pilot_count = std::stoi(h.get("pilot_count"));
    l.validate();
    return l;
}

/// Writes a sample block (any rate) plus sidecar header.
inline void write_block_dump(const std::filesystem::path& stem, const DualPolBlock& b, const DumpHeader& hdr) {
    detail::write_c64(stem.string() + ".x.c64", b.x);
    detail::write_c64(stem.string() + ".y.c64", b.y);
    auto h = hdr;
    h.fields["rate_sps"] = b.rate_sps.str();
    h.fields["samples"] = std::to_string(b.size());
    write_header(stem.string() + ".hdr", h);
}

inline DualPolBlock read_block_dump(const std::filesystem::path& stem, DumpHeader* hdr_out = nullptr) {
    const auto h = read_header(stem.string() + ".hdr");
    DualPolBlock b{detail::read_c64(stem.string() + ".x.c64"), detail::read_c64(stem.string() + ".y.c64"),
                   parse_rational(h.get("rate_sps"))};
    if (b.x.size() != b.y.size() || b.x.size() != std::stoul(h.get("samples"))) {
        throw std::runtime_error(stem.string() + ": sample count disagrees with header");
    }
    if (hdr_out) *hdr_out = h;
    return b;
}

/// Symbol frame dump at 1 sps: samples, bits and layout.
inline void write_frame_dump(const std::filesystem::path& stem, const SymbolFrame& f) {
    write_block_dump(stem, DualPolBlock{f.x_pol, f.y_pol, {1, 1}}, layout_header(f.layout, {1, 1}, f.seed));
    std::ofstream os(stem.string() + ".bits", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + stem.string() + ".bits");
    os.write(reinterpret_cast<const char*>(f.bit_payload.data()), static_cast<std::streamsize>(f.bit_payload.size()));
}

inline SymbolFrame read_frame_dump(const std::filesystem::path& stem) {
    DumpHeader h;
    const auto b = read_block_dump(stem, &h);
    SymbolFrame f;
    f.layout = layout_from_header(h);
    f.seed = std::stoull(h.get("seed"));
    f.x_pol = b.x;
    f.y_pol = b.y;
    std::ifstream is(stem.string() + ".bits", std::ios::binary | std::ios::ate);
    if (!is) throw std::runtime_error("cannot read " + stem.string() + ".bits");
    f.bit_payload.resize(static_cast<std::size_t>(is.tellg()));
    is.seekg(0);
    is.read(reinterpret_cast<char*>(f.bit_payload.data()), static_cast<std::streamsize>(f.bit_payload.size()));
    const auto ref = frame_reference(f.layout, f.seed);
    f.pilots_x = ref.pilots_x;
    f.pilots_y = ref.pilots_y;
    return f;
}

} // namespace nidsp

#endif // NIDSP_FRAMEGEN_DUMP_HPP
