#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "uq/volume.hpp"

namespace uqtest {

// Scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "uqtest") {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / (tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline uq::GridMeta cube(std::uint32_t n, std::uint32_t channels) {
    uq::GridMeta m;
    m.dims = {n, n, n};
    m.channels = channels;
    return m;
}

// Random softmax probabilities.
inline uq::ProbVolume random_probs(const uq::GridMeta& meta, std::mt19937_64& rng, double scale = 2.0) {
    std::normal_distribution<double> normal(0.0, scale);
    uq::ProbVolume p(meta);
    for (uq::Index v = 0; v < p.voxels(); ++v) {
        double sum = 0.0;
        std::vector<double> e(static_cast<std::size_t>(p.channels()));
        for (auto& x : e) sum += (x = std::exp(normal(rng)));
        for (uq::Index c = 0; c < p.channels(); ++c) p(c, v) = static_cast<float>(e[static_cast<std::size_t>(c)] / sum);
    }
    return p;
}

inline uq::BinaryMask box_mask(const uq::GridMeta& meta, std::array<int, 3> lo, std::array<int, 3> hi) {
    uq::BinaryMask m(meta.with_channels(1));
    for (int z = lo[2]; z <= hi[2]; ++z)
        for (int y = lo[1]; y <= hi[1]; ++y)
            for (int x = lo[0]; x <= hi[0]; ++x) m(0, m.voxel_index(x, y, z)) = true;
    return m;
}

inline uq::Index count(const uq::BinaryMask& m) { return m.data().count(); }

}  // namespace uqtest
