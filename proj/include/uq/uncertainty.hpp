#pragma once

#include <span>

#include "uq/volume.hpp"

namespace uq {

// Per-voxel, per-class unbiased sample variance across an ensemble.
struct UncertaintyMap {
    RealVolume values;
    std::size_t n_samples = 0;

    const GridMeta& meta() const { return values.meta(); }
};

// Single-pass (Welford) accumulator over ensemble members. Keeps running mean
// and sum of squared deviations in double; members are pushed one at a time so
// a whole ensemble never has to be resident.
class EnsembleAccumulator {
public:
    EnsembleAccumulator() = default;

    template <typename Scalar>
    void push(const Volume<Scalar>& member) {
        if (count_ == 0) {
            meta_ = member.meta();
            mean_.setZero(member.voxels(), member.channels());
            m2_.setZero(member.voxels(), member.channels());
        } else if (auto why = check_compatible(meta_, member.meta())) {
            throw Error(Errc::MetaMismatch, *why);
        }
        ++count_;
        const double inv_n = 1.0 / static_cast<double>(count_);
        const auto& d = member.data();
        const Index n = mean_.size();
        double* mean = mean_.data();
        double* m2 = m2_.data();
        const Scalar* x = d.data();
        for (Index i = 0; i < n; ++i) {
            const double xi = static_cast<double>(x[i]);
            const double delta = xi - mean[i];
            mean[i] += delta * inv_n;
            m2[i] += delta * (xi - mean[i]);
        }
    }

    std::size_t count() const { return count_; }
    const GridMeta& meta() const { return meta_; }

    // Ensemble mean (EmptyEnsemble if nothing was pushed).
    ProbVolume mean() const;

    // Unbiased variance; needs at least two members.
    UncertaintyMap variance() const;

private:
    GridMeta meta_;
    std::size_t count_ = 0;
    Eigen::ArrayXXd mean_;
    Eigen::ArrayXXd m2_;
};

UncertaintyMap variance_map(std::span<const ProbVolume> preds);

// Per voxel, max over foreground channels 1..M. Background is ignored.
RealVolume max_projection(const UncertaintyMap& umap);
RealVolume max_projection(const RealVolume& values);

}  // namespace uq
