#include "uq/roc.hpp"

#include <algorithm>
#include <cmath>

#include "uq/error.hpp"

namespace uq {
namespace {

struct ClassCounts {
    std::size_t id = 0;
    std::size_t ood = 0;
};

ClassCounts count_classes(std::span<const LabeledScore> samples) {
    ClassCounts n;
    for (const auto& s : samples) {
        if (!std::isfinite(s.score)) throw Error(Errc::NonFiniteScore, "score of " + s.case_id + " is not finite");
        if (s.label == 1)
            ++n.ood;
        else if (s.label == 0)
            ++n.id;
        else
            throw Error(Errc::ConfigInvalid, "label of " + s.case_id + " must be 0 or 1");
    }
    if (n.id == 0 || n.ood == 0) throw Error(Errc::OneClassOnly, "need both ID and OOD samples");
    return n;
}

}  // namespace

std::vector<RocPoint> roc_curve(std::span<const LabeledScore> samples) {
    const auto n = count_classes(samples);
    std::vector<LabeledScore> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const LabeledScore& a, const LabeledScore& b) { return a.score > b.score; });

    std::vector<RocPoint> curve{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        const double s = sorted[i].score;
        for (; i < sorted.size() && sorted[i].score == s; ++i) (sorted[i].label == 1 ? tp : fp)++;
        curve.push_back({static_cast<double>(fp) / static_cast<double>(n.id),
                         static_cast<double>(tp) / static_cast<double>(n.ood), s});
    }
    curve.push_back({1.0, 1.0, -std::numeric_limits<double>::infinity()});
    return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += (curve[i].fpr - curve[i - 1].fpr) * 0.5 * (curve[i].tpr + curve[i - 1].tpr);
    return area;
}

double auc(std::span<const LabeledScore> samples) {
    const auto n = count_classes(samples);
    std::vector<double> id_scores;
    id_scores.reserve(n.id);
    for (const auto& s : samples)
        if (s.label == 0) id_scores.push_back(s.score);
    std::sort(id_scores.begin(), id_scores.end());

    // Twice the Mann-Whitney U, so ties stay integral.
    std::uint64_t twice_u = 0;
    for (const auto& s : samples) {
        if (s.label != 1) continue;
        const auto lo = std::lower_bound(id_scores.begin(), id_scores.end(), s.score);
        const auto hi = std::upper_bound(lo, id_scores.end(), s.score);
        twice_u += 2 * static_cast<std::uint64_t>(lo - id_scores.begin()) + static_cast<std::uint64_t>(hi - lo);
    }
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n.id) * static_cast<double>(n.ood));
}

SensSpec sens_spec_at(std::span<const LabeledScore> samples, double threshold) {
    const auto n = count_classes(samples);
    std::size_t flagged_ood = 0, passed_id = 0;
    for (const auto& s : samples) {
        if (s.label == 1 && s.score > threshold) ++flagged_ood;
        if (s.label == 0 && s.score <= threshold) ++passed_id;
    }
    return {static_cast<double>(flagged_ood) / static_cast<double>(n.ood),
            static_cast<double>(passed_id) / static_cast<double>(n.id)};
}

}  // namespace uq
