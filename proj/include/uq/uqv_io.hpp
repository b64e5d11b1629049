#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "uq/volume.hpp"

namespace uq {

// UQV1 container, little-endian:
//   "UQV1" | u16 version=1 | u8 dtype | u8 flags=0 | u32 dims[3] | u32 channels
//   | f32 spacing[3] | payload (channel slowest, then z, y, x fastest)
namespace uqv {

inline constexpr char kMagic[4] = {'U', 'Q', 'V', '1'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 4 + 2 + 1 + 1 + 12 + 4 + 12;

enum class DType : std::uint8_t { Float32 = 0, Label8 = 1 };

struct Header {
    GridMeta meta;
    DType dtype = DType::Float32;
};

Header read_header(std::istream& in);

void write(std::ostream& out, const Volume<float>& vol);
void write(std::ostream& out, const LabelVolume& vol);
Volume<float> read_float(std::istream& in);
LabelVolume read_label(std::istream& in);

}  // namespace uqv

// File helpers. Writes go to a sibling temporary and are renamed into place.
void write_volume(const std::filesystem::path& path, const Volume<float>& vol);
void write_volume(const std::filesystem::path& path, const LabelVolume& vol);
Volume<float> read_float_volume(const std::filesystem::path& path);
LabelVolume read_label_volume(const std::filesystem::path& path);

// Reads a float volume and checks the probability invariants.
ProbVolume read_prob_volume(const std::filesystem::path& path);

// Writes `contents` atomically (temp file + rename).
void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace uq
