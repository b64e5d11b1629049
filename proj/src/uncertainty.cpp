#include "uq/uncertainty.hpp"

namespace uq {

ProbVolume EnsembleAccumulator::mean() const {
    if (count_ == 0) throw Error(Errc::EmptyEnsemble, "no predictions accumulated");
    return ProbVolume(meta_, mean_.cast<float>());
}

UncertaintyMap EnsembleAccumulator::variance() const {
    if (count_ == 0) throw Error(Errc::EmptyEnsemble, "no predictions accumulated");
    if (count_ == 1) throw Error(Errc::SingleSample, "variance needs at least two predictions");
    Eigen::ArrayXXd var = m2_ / static_cast<double>(count_ - 1);
    // Welford can leave -0 or tiny negative residue on constant inputs.
    var = var.max(0.0);
    return UncertaintyMap{RealVolume(meta_, var.cast<float>()), count_};
}

UncertaintyMap variance_map(std::span<const ProbVolume> preds) {
    if (preds.empty()) throw Error(Errc::EmptyEnsemble, "variance_map needs predictions");
    if (preds.size() == 1) throw Error(Errc::SingleSample, "variance needs at least two predictions");
    EnsembleAccumulator acc;
    for (const auto& p : preds) acc.push(p);
    return acc.variance();
}

RealVolume max_projection(const RealVolume& values) {
    if (values.channels() < 2)
        throw Error(Errc::NoForegroundChannels, "max projection needs at least one foreground channel");
    RealVolume out(values.meta().with_channels(1));
    out.channel(0) = values.data().rightCols(values.channels() - 1).rowwise().maxCoeff();
    return out;
}

RealVolume max_projection(const UncertaintyMap& umap) { return max_projection(umap.values); }

}  // namespace uq
