#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace uq {

// label 0 = in-distribution, 1 = OOD; higher score means more OOD.
struct LabeledScore {
    std::string case_id;
    double score = 0.0;
    int label = 0;
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    // Cases with score >= threshold are called positive at this point.
    double threshold = std::numeric_limits<double>::infinity();
};

// Sweeps the threshold over the distinct scores, high to low. Equal scores move
// together as one step. Starts at (0,0) and ends at (1,1).
std::vector<RocPoint> roc_curve(std::span<const LabeledScore> samples);

// Trapezoidal area under a curve from roc_curve.
double trapezoid_area(std::span<const RocPoint> curve);

// Mann-Whitney: P(score_ood > score_id) + 0.5 P(equal), from exact pair counts.
double auc(std::span<const LabeledScore> samples);

struct SensSpec {
    double sensitivity = 0.0;  // fraction of OOD with score > threshold
    double specificity = 0.0;  // fraction of ID with score <= threshold
};

SensSpec sens_spec_at(std::span<const LabeledScore> samples, double threshold);

}  // namespace uq
