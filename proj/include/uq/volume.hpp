#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uq/error.hpp"

namespace uq {

using Index = Eigen::Index;

// Absolute tolerance on the per-voxel channel sum of a probability volume.
inline constexpr double kProbSumTolerance = 1e-4;

struct GridMeta {
    std::array<std::uint32_t, 3> dims{1, 1, 1};  // x, y, z
    std::array<double, 3> spacing{1.0, 1.0, 1.0};  // mm per voxel
    std::uint32_t channels = 1;

    Index voxels() const {
        return static_cast<Index>(dims[0]) * static_cast<Index>(dims[1]) *
               static_cast<Index>(dims[2]);
    }

    GridMeta with_channels(std::uint32_t c) const {
        GridMeta m = *this;
        m.channels = c;
        return m;
    }

    bool operator==(const GridMeta&) const = default;
};

// Throws ConfigInvalid when dims or spacing are not strictly positive.
void validate(const GridMeta& meta);

// Returns a description of the first difference, or nullopt when compatible.
// Spacing is compared with 1e-6 relative tolerance.
std::optional<std::string> check_compatible(const GridMeta& a, const GridMeta& b);

// Dense channels x voxels grid. Storage is voxel-major within each channel
// (channel slowest, then z, y, x fastest), which is also the UQV1 payload order.
template <typename Scalar>
class Volume {
public:
    using Scalar_t = Scalar;
    using Storage = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

    Volume() = default;

    explicit Volume(const GridMeta& meta) : meta_(meta) {
        validate(meta_);
        data_.setZero(meta_.voxels(), meta_.channels);
    }

    Volume(const GridMeta& meta, Storage data) : meta_(meta), data_(std::move(data)) {
        validate(meta_);
        if (data_.rows() != meta_.voxels() || data_.cols() != static_cast<Index>(meta_.channels))
            throw Error(Errc::MetaMismatch, "storage shape does not match grid metadata");
    }

    const GridMeta& meta() const { return meta_; }
    Index voxels() const { return data_.rows(); }
    Index channels() const { return data_.cols(); }

    const Storage& data() const { return data_; }
    Storage& data() { return data_; }

    auto channel(Index c) { return data_.col(c); }
    auto channel(Index c) const { return data_.col(c); }

    Scalar& operator()(Index c, Index voxel) { return data_(voxel, c); }
    Scalar operator()(Index c, Index voxel) const { return data_(voxel, c); }

    Index voxel_index(Index x, Index y, Index z) const {
        return x + static_cast<Index>(meta_.dims[0]) * (y + static_cast<Index>(meta_.dims[1]) * z);
    }

private:
    GridMeta meta_;
    Storage data_;
};

using ProbVolume = Volume<float>;
using LabelVolume = Volume<std::uint8_t>;
using BinaryMask = Volume<bool>;
using RealVolume = Volume<float>;

struct OrganSet {
    std::vector<std::string> names;  // foreground organs; channel k+1 holds names[k]

    static constexpr const char* kBackground = "background";

    // Throws ConfigInvalid on empty, duplicate, or reserved names.
    explicit OrganSet(std::vector<std::string> organ_names);
    OrganSet() = default;

    Index size() const { return static_cast<Index>(names.size()); }
    std::uint32_t channels() const { return static_cast<std::uint32_t>(names.size() + 1); }

    bool operator==(const OrganSet&) const = default;
};

// Throws InvalidVolume when any value leaves [0, 1] or a voxel's channels do not
// sum to 1 within kProbSumTolerance.
template <typename Scalar>
void validate_probabilities(const Volume<Scalar>& prob, double tolerance = kProbSumTolerance) {
    const auto& d = prob.data();
    for (Index v = 0; v < d.rows(); ++v) {
        double sum = 0.0;
        for (Index c = 0; c < d.cols(); ++c) {
            const double p = static_cast<double>(d(v, c));
            if (!(p >= 0.0 && p <= 1.0))
                throw Error(Errc::InvalidVolume, "probability out of [0,1] at voxel " +
                                                     std::to_string(v) + ", channel " +
                                                     std::to_string(c));
            sum += p;
        }
        if (std::abs(sum - 1.0) > tolerance)
            throw Error(Errc::InvalidVolume, "channel sum " + std::to_string(sum) +
                                                 " at voxel " + std::to_string(v));
    }
}

template <typename Scalar>
void require_compatible(const Volume<Scalar>& reference, const GridMeta& other) {
    if (auto why = check_compatible(reference.meta(), other))
        throw Error(Errc::MetaMismatch, *why);
}

// Voxelwise, channelwise arithmetic mean. Accumulates in double.
template <typename Scalar>
Volume<Scalar> mean_prediction(std::span<const Volume<Scalar>> preds) {
    if (preds.empty())
        throw Error(Errc::EmptyEnsemble, "mean_prediction needs at least one volume");
    const auto& first = preds.front();
    Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(first.voxels(), first.channels());
    for (const auto& p : preds) {
        require_compatible(first, p.meta());
        sum += p.data().template cast<double>();
    }
    sum /= static_cast<double>(preds.size());
    return Volume<Scalar>(first.meta(), sum.cast<Scalar>());
}

// Per voxel, the index of the largest channel; ties go to the lowest index.
template <typename Scalar>
LabelVolume argmax_labels(const Volume<Scalar>& prob) {
    if (prob.channels() > 256)
        throw Error(Errc::ConfigInvalid, "label volumes hold at most 256 classes");
    LabelVolume labels(prob.meta().with_channels(1));
    const auto& d = prob.data();
    for (Index v = 0; v < d.rows(); ++v) {
        Index best = 0;
        for (Index c = 1; c < d.cols(); ++c)
            if (d(v, c) > d(v, best)) best = c;
        labels(0, v) = static_cast<std::uint8_t>(best);
    }
    return labels;
}

// Mask of voxels whose label equals `label`.
BinaryMask label_mask(const LabelVolume& labels, std::uint8_t label);

}  // namespace uq
