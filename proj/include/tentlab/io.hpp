#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tentlab/grid.hpp"

namespace tentlab {

inline constexpr char kPtsfMagic[6] = {'P', 'T', 'S', 'F', '1', '\0'};

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw ValidationError("PTSF1: truncated file");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += sizeof(T);
    T v;
    std::memcpy(&v, &bits, sizeof(T));
    return v;
}

} // namespace detail

// Write bytes to path via a temporary file and rename, so readers never see a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ValidationError("cannot open " + tmp.string() + " for writing");
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os) throw ValidationError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline std::string encode_ptsf(const SpaceTimeField& traj) {
    traj.validate();
    const Grid& g = traj.grid();
    std::string out(kPtsfMagic, kPtsfMagic + 6);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.points_per_axis()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(traj.components()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(traj.size()));
    detail::put_le<double>(out, g.box_length());
    for (double t : traj.times) detail::put_le<double>(out, t);
    for (const auto& s : traj.slices)
        for (const auto& v : s.values()) {
            detail::put_le<double>(out, v.real());
            detail::put_le<double>(out, v.imag());
        }
    return out;
}

inline SpaceTimeField decode_ptsf(const std::string& bytes) {
    if (bytes.size() < 6 || std::memcmp(bytes.data(), kPtsfMagic, 6) != 0)
        throw ValidationError("PTSF1: bad magic bytes");
    std::size_t pos = 6;
    const auto n = detail::get_le<std::uint32_t>(bytes, pos);
    const auto P = detail::get_le<std::uint32_t>(bytes, pos);
    const auto N = detail::get_le<std::uint32_t>(bytes, pos);
    const auto K = detail::get_le<std::uint32_t>(bytes, pos);
    const double L = detail::get_le<double>(bytes, pos);
    if (N < 1 || K < 1 || P > (1u << 16)) throw ValidationError("PTSF1: invalid header");
    const Grid g = make_grid(static_cast<int>(n), static_cast<int>(P), L);
    const std::size_t per = static_cast<std::size_t>(N) * g.size();
    const std::size_t expect = pos + 8 * static_cast<std::size_t>(K) + 16 * per * K;
    if (bytes.size() != expect)
        throw ValidationError("PTSF1: payload size " + std::to_string(bytes.size()) + " != expected " +
                              std::to_string(expect));
    SpaceTimeField traj;
    for (std::uint32_t k = 0; k < K; ++k) traj.times.push_back(detail::get_le<double>(bytes, pos));
    for (std::uint32_t k = 0; k < K; ++k) {
        std::vector<cplx> vals(per);
        for (auto& v : vals) {
            const double re = detail::get_le<double>(bytes, pos);
            const double im = detail::get_le<double>(bytes, pos);
            v = {re, im};
        }
        traj.slices.emplace_back(g, static_cast<int>(N), std::move(vals));
        if (!traj.slices.back().all_finite()) throw ValidationError("PTSF1: non-finite values");
    }
    traj.validate();
    return traj;
}

inline void write_ptsf(const std::filesystem::path& path, const SpaceTimeField& traj) {
    atomic_write(path, encode_ptsf(traj));
}

inline void write_ptsf(const std::filesystem::path& path, const Field& f, double time = 0.0) {
    write_ptsf(path, SpaceTimeField{{time}, {f}});
}

inline SpaceTimeField read_ptsf(const std::filesystem::path& path) { return decode_ptsf(read_file(path)); }

} // namespace tentlab
