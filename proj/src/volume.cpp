#include "uq/volume.hpp"

#include <set>

namespace uq {

std::string_view errc_name(Errc code) {
    switch (code) {
    case Errc::EmptyEnsemble: return "EmptyEnsemble";
    case Errc::SingleSample: return "SingleSample";
    case Errc::MetaMismatch: return "MetaMismatch";
    case Errc::InvalidVolume: return "InvalidVolume";
    case Errc::FormatError: return "FormatError";
    case Errc::NoForegroundChannels: return "NoForegroundChannels";
    case Errc::InfeasibleConfig: return "InfeasibleConfig";
    case Errc::CaseOutOfRange: return "CaseOutOfRange";
    case Errc::OrganIndexOutOfRange: return "OrganIndexOutOfRange";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFiniteScore: return "NonFiniteScore";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::LevelOutOfRange: return "LevelOutOfRange";
    case Errc::MissingHoldoutPredictions: return "MissingHoldoutPredictions";
    case Errc::OneClassOnly: return "OneClassOnly";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::MissingPlan: return "MissingPlan";
    case Errc::MissingManifest: return "MissingManifest";
    case Errc::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

void validate(const GridMeta& meta) {
    for (int a = 0; a < 3; ++a) {
        if (meta.dims[a] < 1)
            throw Error(Errc::ConfigInvalid, "grid dimension " + std::to_string(a + 1) + " is zero");
        if (!(meta.spacing[a] > 0.0) || !std::isfinite(meta.spacing[a]))
            throw Error(Errc::ConfigInvalid,
                        "grid spacing on axis " + std::to_string(a + 1) + " must be positive");
    }
    if (meta.channels < 1) throw Error(Errc::ConfigInvalid, "grid needs at least one channel");
}

std::optional<std::string> check_compatible(const GridMeta& a, const GridMeta& b) {
    for (int ax = 0; ax < 3; ++ax) {
        if (a.dims[ax] != b.dims[ax])
            return "dims differ on axis " + std::to_string(ax + 1) + " (" +
                   std::to_string(a.dims[ax]) + " vs " + std::to_string(b.dims[ax]) + ")";
    }
    for (int ax = 0; ax < 3; ++ax) {
        const double scale = std::max(std::abs(a.spacing[ax]), std::abs(b.spacing[ax]));
        if (std::abs(a.spacing[ax] - b.spacing[ax]) > 1e-6 * scale)
            return "spacing differs on axis " + std::to_string(ax + 1) + " (" +
                   std::to_string(a.spacing[ax]) + " vs " + std::to_string(b.spacing[ax]) + ")";
    }
    if (a.channels != b.channels)
        return "channels differ (" + std::to_string(a.channels) + " vs " +
               std::to_string(b.channels) + ")";
    return std::nullopt;
}

OrganSet::OrganSet(std::vector<std::string> organ_names) : names(std::move(organ_names)) {
    if (names.empty()) throw Error(Errc::ConfigInvalid, "organ set is empty");
    if (names.size() > 255) throw Error(Errc::ConfigInvalid, "at most 255 organs are supported");
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw Error(Errc::ConfigInvalid, "organ name is empty");
        if (n == kBackground)
            throw Error(Errc::ConfigInvalid, "\"background\" is reserved for channel 0");
        if (!seen.insert(n).second) throw Error(Errc::ConfigInvalid, "duplicate organ name " + n);
    }
}

BinaryMask label_mask(const LabelVolume& labels, std::uint8_t label) {
    BinaryMask mask(labels.meta().with_channels(1));
    mask.channel(0) = labels.channel(0) == label;
    return mask;
}

}  // namespace uq
