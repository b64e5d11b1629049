#include "uq/scoring.hpp"

#include "uq/morphology.hpp"

namespace uq {

RealVolume suppress_boundaries(const UncertaintyMap& umap, const LabelVolume& consensus,
                               const OrganSet& organs, int radius) {
    if (radius < 0) throw Error(Errc::ConfigInvalid, "boundary radius must be non-negative");
    const auto& meta = umap.meta();
    if (meta.channels != organs.channels())
        throw Error(Errc::MetaMismatch, "uncertainty map has " + std::to_string(meta.channels) +
                                            " channels, organ set implies " +
                                            std::to_string(organs.channels()));
    if (auto why = check_compatible(meta.with_channels(1), consensus.meta()))
        throw Error(Errc::MetaMismatch, "consensus vs heatmap: " + *why);
    const auto max_label = consensus.data().maxCoeff();
    if (consensus.voxels() > 0 && max_label >= organs.channels())
        throw Error(Errc::OrganIndexOutOfRange,
                    "consensus label " + std::to_string(max_label) + " exceeds organ count");

    RealVolume out = umap.values;
    for (Index m = 1; m <= organs.size(); ++m) {
        const auto band = boundary_band(label_mask(consensus, static_cast<std::uint8_t>(m)), radius);
        out.channel(m) = band.channel(0).select(0.0f, out.channel(m));
    }
    return out;
}

ScoreVector channel_scores(const RealVolume& suppressed, const OrganSet& organs, std::string case_id) {
    if (suppressed.channels() != static_cast<Index>(organs.channels()))
        throw Error(Errc::MetaMismatch, "channel count does not match organ set");
    ScoreVector sv{std::move(case_id), Eigen::VectorXd(organs.size())};
    for (Index m = 1; m <= organs.size(); ++m)
        sv.organ_scores(m - 1) = suppressed.channel(m).cast<double>().sum();
    return sv;
}

ScoreVector suppress_and_score(const UncertaintyMap& umap, const LabelVolume& consensus,
                               const OrganSet& organs, int radius, std::string case_id) {
    return channel_scores(suppress_boundaries(umap, consensus, organs, radius), organs, std::move(case_id));
}

EnsembleScore score_ensemble(const EnsembleAccumulator& acc, const OrganSet& organs, int radius,
                             std::string case_id) {
    EnsembleScore out{acc.variance(), argmax_labels(acc.mean()), {}};
    out.scores = suppress_and_score(out.heatmap, out.consensus, organs, radius, std::move(case_id));
    return out;
}

}  // namespace uq
