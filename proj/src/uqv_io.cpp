#include "uq/uqv_io.hpp"

#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace uq {
namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
        throw Error(Errc::FormatError, "truncated UQV1 header");
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
}

void write_header(std::ostream& out, const GridMeta& meta, uqv::DType dtype) {
    out.write(uqv::kMagic, 4);
    put_le<std::uint16_t>(out, uqv::kVersion);
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
    put_le<std::uint8_t>(out, 0);
    for (auto d : meta.dims) put_le<std::uint32_t>(out, d);
    put_le<std::uint32_t>(out, meta.channels);
    for (auto s : meta.spacing) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
}

void check_stream(const std::ostream& out) {
    if (!out) throw Error(Errc::IoFailure, "write failed");
}

std::filesystem::path temp_sibling(const std::filesystem::path& path) {
    static std::atomic<unsigned> counter{0};
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." +
           std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000) + "." +
           std::to_string(counter++);
    return tmp;
}

template <typename Writer>
void write_atomically(const std::filesystem::path& path, Writer&& writer) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw Error(Errc::IoFailure, "cannot create " + path.parent_path().string());
    }
    const auto tmp = temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::IoFailure, "cannot open " + tmp.string() + " for writing");
        writer(out);
        out.flush();
        if (!out) throw Error(Errc::IoFailure, "write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(Errc::IoFailure, "cannot rename into " + path.string());
    }
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
    return in;
}

}  // namespace

namespace uqv {

Header read_header(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4)) throw Error(Errc::FormatError, "truncated UQV1 header");
    if (std::memcmp(magic, kMagic, 4) != 0) throw Error(Errc::FormatError, "bad magic, not a UQV1 file");
    const auto version = get_le<std::uint16_t>(in);
    if (version != kVersion)
        throw Error(Errc::FormatError, "unsupported UQV1 version " + std::to_string(version));
    const auto dtype = get_le<std::uint8_t>(in);
    if (dtype > 1) throw Error(Errc::FormatError, "unknown dtype " + std::to_string(dtype));
    const auto flags = get_le<std::uint8_t>(in);
    if (flags != 0) throw Error(Errc::FormatError, "nonzero flags");
    Header h;
    h.dtype = static_cast<DType>(dtype);
    for (auto& d : h.meta.dims) d = get_le<std::uint32_t>(in);
    h.meta.channels = get_le<std::uint32_t>(in);
    for (auto& s : h.meta.spacing) s = std::bit_cast<float>(get_le<std::uint32_t>(in));
    try {
        validate(h.meta);
    } catch (const Error& e) {
        throw Error(Errc::FormatError, e.what());
    }
    return h;
}

void write(std::ostream& out, const Volume<float>& vol) {
    write_header(out, vol.meta(), DType::Float32);
    const auto& d = vol.data();
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(d.data()),
                  static_cast<std::streamsize>(d.size() * sizeof(float)));
    } else {
        for (Index i = 0; i < d.size(); ++i) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(d.data()[i]));
    }
    check_stream(out);
}

void write(std::ostream& out, const LabelVolume& vol) {
    write_header(out, vol.meta(), DType::Label8);
    const auto& d = vol.data();
    out.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size()));
    check_stream(out);
}

Volume<float> read_float(std::istream& in) {
    const auto h = read_header(in);
    if (h.dtype != DType::Float32) throw Error(Errc::FormatError, "expected float32 payload");
    Volume<float> vol(h.meta);
    auto& d = vol.data();
    const auto bytes = static_cast<std::streamsize>(d.size() * sizeof(float));
    if (!in.read(reinterpret_cast<char*>(d.data()), bytes))
        throw Error(Errc::FormatError, "truncated UQV1 payload");
    if constexpr (std::endian::native != std::endian::little) {
        for (Index i = 0; i < d.size(); ++i) {
            auto u = std::bit_cast<std::uint32_t>(d.data()[i]);
            u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
            d.data()[i] = std::bit_cast<float>(u);
        }
    }
    return vol;
}

LabelVolume read_label(std::istream& in) {
    const auto h = read_header(in);
    if (h.dtype != DType::Label8) throw Error(Errc::FormatError, "expected u8 label payload");
    LabelVolume vol(h.meta);
    auto& d = vol.data();
    if (!in.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(d.size())))
        throw Error(Errc::FormatError, "truncated UQV1 payload");
    return vol;
}

}  // namespace uqv

void write_volume(const std::filesystem::path& path, const Volume<float>& vol) {
    write_atomically(path, [&](std::ostream& out) { uqv::write(out, vol); });
}

void write_volume(const std::filesystem::path& path, const LabelVolume& vol) {
    write_atomically(path, [&](std::ostream& out) { uqv::write(out, vol); });
}

Volume<float> read_float_volume(const std::filesystem::path& path) {
    auto in = open_input(path);
    try {
        return uqv::read_float(in);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

LabelVolume read_label_volume(const std::filesystem::path& path) {
    auto in = open_input(path);
    try {
        return uqv::read_label(in);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

ProbVolume read_prob_volume(const std::filesystem::path& path) {
    auto vol = read_float_volume(path);
    try {
        validate_probabilities(vol);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
    return vol;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    write_atomically(path, [&](std::ostream& out) { out << contents; });
}

std::string read_text_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace uq
