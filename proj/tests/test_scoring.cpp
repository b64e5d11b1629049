#include <doctest.h>

#include "support.hpp"
#include "uq/morphology.hpp"
#include "uq/scoring.hpp"

using namespace uq;
using uqtest::cube;

namespace {

// Two box organs on a 16^3 grid.
struct Scene {
    OrganSet organs{{"a", "b"}};
    GridMeta meta = cube(16, 3);
    LabelVolume consensus{meta.with_channels(1)};
    Scene() {
        auto a = uqtest::box_mask(meta, {2, 2, 2}, {6, 6, 6});
        auto b = uqtest::box_mask(meta, {8, 8, 8}, {13, 12, 11});
        for (Index v = 0; v < consensus.voxels(); ++v)
            consensus(0, v) = a(0, v) ? 1 : (b(0, v) ? 2 : 0);
    }
    BinaryMask band(int organ, int r) const { return boundary_band(label_mask(consensus, std::uint8_t(organ)), r); }
};

}  // namespace

TEST_CASE("uniform value scores u * (V - B)") {
    Scene s;
    UncertaintyMap u{RealVolume(s.meta), 32};
    u.values.data().setConstant(0.25f);
    const auto z = suppress_and_score(u, s.consensus, s.organs, 2);
    REQUIRE(z.size() == 2);
    for (int m = 1; m <= 2; ++m) {
        const auto b = uqtest::count(s.band(m, 2));
        CHECK(z.organ_scores(m - 1) == doctest::Approx(0.25 * double(s.meta.voxels() - b)));
    }
}

TEST_CASE("uncertainty only inside the bands is fully suppressed") {
    Scene s;
    UncertaintyMap u{RealVolume(s.meta), 32};
    for (int m = 1; m <= 2; ++m) {
        const auto b = s.band(m, 1);
        for (Index v = 0; v < b.voxels(); ++v)
            if (b(0, v)) u.values(m, v) = 0.7f;
    }
    u.values.channel(0).setConstant(3.0f);
    const auto z = suppress_and_score(u, s.consensus, s.organs, 1);
    CHECK(z.organ_scores.isZero());
    const auto raw = channel_scores(u.values, s.organs);
    CHECK(raw.organ_scores.minCoeff() > 0);
}

TEST_CASE("zero map gives zero scores") {
    Scene s;
    UncertaintyMap u{RealVolume(s.meta), 32};
    CHECK(suppress_and_score(u, s.consensus, s.organs, 2).organ_scores.isZero());
}

TEST_CASE("radius zero equals plain channel sums") {
    Scene s;
    std::mt19937_64 rng(4);
    UncertaintyMap u{uqtest::random_probs(s.meta, rng), 32};
    const auto z = suppress_and_score(u, s.consensus, s.organs, 0, "c");
    const auto plain = channel_scores(u.values, s.organs, "c");
    CHECK((z.organ_scores - plain.organ_scores).norm() == 0.0);
    CHECK(z.case_id == "c");
}

TEST_CASE("background channel never contributes") {
    Scene s;
    UncertaintyMap u{RealVolume(s.meta), 32};
    u.values.channel(0).setConstant(1.0f);
    CHECK(suppress_and_score(u, s.consensus, s.organs, 2).organ_scores.isZero());
    const auto sup = suppress_boundaries(u, s.consensus, s.organs, 2);
    CHECK((sup.channel(0) == 1.0f).all());
}

TEST_CASE("scoring errors") {
    Scene s;
    UncertaintyMap u{RealVolume(s.meta), 32};
    auto code = [&](const UncertaintyMap& map, const LabelVolume& labels, const OrganSet& organs) {
        try {
            suppress_and_score(map, labels, organs, 1);
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::IoFailure;
    };
    LabelVolume small(cube(8, 1));
    CHECK(code(u, small, s.organs) == Errc::MetaMismatch);
    CHECK(code(u, s.consensus, OrganSet({"a", "b", "c"})) == Errc::MetaMismatch);
    auto bad = s.consensus;
    bad(0, 0) = 5;
    CHECK(code(u, bad, s.organs) == Errc::OrganIndexOutOfRange);
}
