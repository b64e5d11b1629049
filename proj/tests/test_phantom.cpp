#include <doctest.h>

#include <set>

#include "support.hpp"
#include "uq/partition.hpp"
#include "uq/phantom.hpp"
#include "uq/scoring.hpp"
#include "uq/tables.hpp"
#include "uq/uqv_io.hpp"

using namespace uq;

namespace {

PhantomConfig small_config() {
    PhantomConfig c;
    c.dims = {32, 32, 32};
    return c;
}

ScoreVector score_all(const PhantomConfig& cfg, std::uint64_t seed) {
    EnsembleAccumulator acc;
    generate_case(cfg, seed, [&](int, int, ProbVolume&& p) { acc.push(p); });
    return score_ensemble(acc, phantom_organs(cfg.n_organs), 2).scores;
}

}  // namespace

TEST_CASE("predictions are valid probabilities and truth has every organ") {
    const auto cfg = small_config();
    const auto c = generate_case(cfg, 5);
    CHECK(c.predictions.size() == 32);
    for (const auto& p : c.predictions) {
        CHECK(p.channels() == 7);
        validate_probabilities(p);
    }
    std::set<int> labels(c.truth.data().data(), c.truth.data().data() + c.truth.voxels());
    CHECK(labels.size() == 7);
}

TEST_CASE("noiseless phantom has zero variance") {
    auto cfg = small_config();
    cfg.sigma_id = 0.0;
    const auto c = generate_case(cfg, 3);
    for (const auto& p : c.predictions) CHECK((p.data() == c.predictions[0].data()).all());
    CHECK(score_all(cfg, 3).organ_scores.isZero());
}

TEST_CASE("same seed, same bits") {
    const auto cfg = small_config();
    const auto a = generate_case(cfg, 11), b = generate_case(cfg, 11);
    CHECK((a.truth.data() == b.truth.data()).all());
    for (std::size_t i = 0; i < a.predictions.size(); ++i) CHECK((a.predictions[i].data() == b.predictions[i].data()).all());
    const auto c = generate_case(cfg, 12);
    CHECK_FALSE((c.predictions[0].data() == a.predictions[0].data()).all());
}

TEST_CASE("focal artifact raises the affected organ's score") {
    auto cfg = small_config();
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto id = score_all(cfg, seed);
        cfg.ood_mode = OodMode::FocalArtifact;
        const auto ood = score_all(cfg, seed);
        cfg.ood_mode = OodMode::None;
        CHECK((ood.organ_scores - id.organ_scores).maxCoeff() > 0);
    }
}

TEST_CASE("affected-organ score increases with strength") {
    auto cfg = small_config();
    cfg.ood_mode = OodMode::FocalArtifact;
    double prev = -1;
    for (double strength : {0.0, 1.5, 3.0}) {
        cfg.ood_strength = strength;
        double total = 0;
        for (std::uint64_t seed = 100; seed < 110; ++seed) total += score_all(cfg, seed).organ_scores.maxCoeff();
        CHECK(total > prev);
        prev = total;
    }
}

TEST_CASE("deformation adds disagreement") {
    auto cfg = small_config();
    const auto id = score_all(cfg, 21);
    cfg.ood_mode = OodMode::Deformation;
    const auto ood = score_all(cfg, 21);
    CHECK(ood.organ_scores.sum() > id.organ_scores.sum());
}

TEST_CASE("config validation") {
    PhantomConfig c;
    c.dims = {8, 64, 64};
    CHECK_THROWS_AS(c.validate(), Error);
    c = PhantomConfig{};
    c.n_organs = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = PhantomConfig{};
    c.ood_strength = -1;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_THROWS_AS(parse_ood_mode("bogus"), Error);
    CHECK(parse_ood_mode("id") == OodMode::None);
}

TEST_CASE("cohort layout") {
    uqtest::TempDir dir;
    PhantomConfig cfg;
    cfg.dims = {16, 16, 16};
    cfg.n_learners = 4;
    cfg.passes = 2;
    cfg.ood_mode = OodMode::FocalArtifact;
    const auto cohort = generate_cohort(cfg, 4, 2, 0, dir.path());
    CHECK(cohort.cases.size() == 6);
    CHECK(std::filesystem::exists(dir / "plan.json"));
    CHECK(std::filesystem::exists(dir / "cohort.json"));
    const auto labels = read_labels_csv(dir / "labels.csv");
    CHECK(labels.size() == 2);
    for (const auto& l : labels) CHECK(l.label == 0);
    CHECK(verify_plan(load_plan(dir / "plan.json")).pass());
    const auto m = load_case_manifest(cohort.cases[0].manifest);
    CHECK(m.predictions.size() == 8);

    uqtest::TempDir again;
    generate_cohort(cfg, 4, 2, 0, again.path());
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path())) {
        if (!e.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(e.path(), dir.path());
        CAPTURE(rel.string());
        CHECK(read_text_file(e.path()) == read_text_file(again.path() / rel));
    }
}
