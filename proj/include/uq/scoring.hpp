#pragma once

#include <string>

#include <Eigen/Core>

#include "uq/uncertainty.hpp"
#include "uq/volume.hpp"

namespace uq {

// One non-negative uncertainty score per foreground organ, in OrganSet order.
struct ScoreVector {
    std::string case_id;
    Eigen::VectorXd organ_scores;

    Index size() const { return organ_scores.size(); }
};

// Zeroes, in each organ channel m, the voxels of the boundary band of the
// consensus mask (label == m). Channel 0 is passed through unchanged.
RealVolume suppress_boundaries(const UncertaintyMap& umap, const LabelVolume& consensus,
                               const OrganSet& organs, int radius);

// Sum of each organ channel outside its boundary band. Background never contributes.
ScoreVector suppress_and_score(const UncertaintyMap& umap, const LabelVolume& consensus,
                               const OrganSet& organs, int radius, std::string case_id = {});

// Scores computed from an already suppressed volume (channel sums 1..M).
ScoreVector channel_scores(const RealVolume& suppressed, const OrganSet& organs, std::string case_id = {});

struct EnsembleScore {
    UncertaintyMap heatmap;
    LabelVolume consensus;  // argmax of the ensemble mean
    ScoreVector scores;
};

// Variance map, consensus labels and band-suppressed organ scores of one ensemble.
EnsembleScore score_ensemble(const EnsembleAccumulator& acc, const OrganSet& organs, int radius,
                             std::string case_id = {});

}  // namespace uq
