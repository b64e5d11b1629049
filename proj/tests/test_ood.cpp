#include <doctest.h>

#include <random>

#include <Eigen/LU>

#include "support.hpp"
#include "uq/gamma.hpp"
#include "uq/ood.hpp"
#include "uq/partition.hpp"

using namespace uq;

namespace {

OrganSet organs_n(int m) {
    std::vector<std::string> names;
    for (int i = 0; i < m; ++i) names.push_back("o" + std::to_string(i));
    return OrganSet(names);
}

ScoreVector sv(std::initializer_list<double> v, std::string id = "x") {
    ScoreVector s{std::move(id), Eigen::VectorXd(static_cast<Index>(v.size()))};
    Index i = 0;
    for (double x : v) s.organ_scores(i++) = x;
    return s;
}

// Distance through an explicit inverse, for comparison only.
double explicit_inverse(const GaussianModel& m, const Eigen::VectorXd& z) {
    const Eigen::VectorXd d = z - m.mu();
    return d.dot(m.sigma().inverse() * d);
}

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::IoFailure;
}

}  // namespace

TEST_CASE("square corners fit to identity") {
    const std::vector<ScoreVector> s{sv({0, 0}), sv({2, 0}), sv({0, 2}), sv({2, 2})};
    const auto m = fit_gaussian(s, organs_n(2));
    CHECK((m.mu() - Eigen::Vector2d(1, 1)).norm() < 1e-12);
    CHECK((m.sigma() - Eigen::Matrix2d::Identity()).norm() < 1e-12);
    CHECK(m.ridge_applied() == 0.0);
    CHECK(std::abs(m.mahalanobis_sq(Eigen::Vector2d(3, 1)) - 4.0) < 1e-9);
    CHECK(m.mahalanobis_sq(m.mu()) == 0.0);
}

TEST_CASE("identity covariance in six dimensions") {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(6);
    e(0) = 1;
    const GaussianModel m(organs_n(6), Eigen::VectorXd::Zero(6), Eigen::MatrixXd::Identity(6, 6), 10);
    CHECK(m.mahalanobis_sq(e) == doctest::Approx(1.0));
}

TEST_CASE("identical vectors get a ridge") {
    std::vector<ScoreVector> s(5, sv({1, 2, 3}));
    const auto m = fit_gaussian(s, organs_n(3));
    CHECK((m.mu() - Eigen::Vector3d(1, 2, 3)).norm() < 1e-12);
    CHECK(m.ridge_applied() > 0.0);
    CHECK(m.sigma().isDiagonal());
    CHECK(m.sigma()(0, 0) == doctest::Approx(m.sigma()(2, 2)));
}

TEST_CASE("rank-deficient covariance is regularised relative to its scale") {
    std::vector<ScoreVector> s;
    for (int i = 0; i < 10; ++i) s.push_back(sv({double(i), 2.0 * i, 5.0}));
    std::vector<std::string> warnings;
    const auto m = fit_gaussian(s, organs_n(3), [&](std::string_view w) { warnings.emplace_back(w); });
    CHECK(m.ridge_applied() > 0.0);
    CHECK_FALSE(warnings.empty());
    CHECK(std::isfinite(m.mahalanobis_sq(Eigen::Vector3d(1, 1, 1))));
}

TEST_CASE("fit errors") {
    const auto organs = organs_n(2);
    CHECK(code_of([&] { std::vector<ScoreVector> one{sv({1, 2})}; fit_gaussian(one, organs); }) == Errc::TooFewSamples);
    CHECK(code_of([&] { std::vector<ScoreVector> s{sv({1, 2}), sv({1, 2, 3})}; fit_gaussian(s, organs); }) ==
          Errc::DimensionMismatch);
    CHECK(code_of([&] { std::vector<ScoreVector> s{sv({1, 2}), sv({1, NAN})}; fit_gaussian(s, organs); }) ==
          Errc::NonFiniteScore);
    const GaussianModel m(organs, Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(), 4);
    CHECK(code_of([&] { m.mahalanobis_sq(Eigen::Vector3d::Zero()); }) == Errc::DimensionMismatch);
    CHECK(error_class(Errc::SingularCovariance) == ErrorClass::Statistical);
}

TEST_CASE("small training sets warn") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    std::vector<ScoreVector> s;
    for (int i = 0; i < 12; ++i) s.push_back(sv({n(rng), n(rng), n(rng)}));
    int warned = 0;
    fit_gaussian(s, organs_n(3), [&](std::string_view) { ++warned; });
    CHECK(warned == 1);
    s.resize(20, sv({0.5, 0.1, 0.2}));
    warned = 0;
    for (auto& x : s) x.organ_scores += Eigen::Vector3d(n(rng), n(rng), n(rng));
    fit_gaussian(s, organs_n(3), [&](std::string_view) { ++warned; });
    CHECK(warned == 0);
}

TEST_CASE("triangular solve agrees with the explicit inverse") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ScoreVector> s;
        Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(6, 6, [&] { return n(rng); });
        for (int i = 0; i < 40; ++i) {
            Eigen::VectorXd z = a * Eigen::VectorXd::NullaryExpr(6, [&] { return n(rng); });
            s.push_back({"c", z});
        }
        const auto m = fit_gaussian(s, organs_n(6));
        const Eigen::VectorXd z = Eigen::VectorXd::NullaryExpr(6, [&] { return 3 * n(rng); });
        const double ref = explicit_inverse(m, z);
        CHECK(std::abs(m.mahalanobis_sq(z) - ref) < 1e-8 * std::max(1.0, ref));
        CHECK(m.mahalanobis_sq(z) >= 0.0);
    }
}

TEST_CASE("fit is invariant to training order") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    std::vector<ScoreVector> s;
    for (int i = 0; i < 30; ++i) s.push_back(sv({n(rng), n(rng), n(rng), n(rng)}));
    const auto a = fit_gaussian(s, organs_n(4));
    std::shuffle(s.begin(), s.end(), rng);
    const auto b = fit_gaussian(s, organs_n(4));
    CHECK((a.mu() - b.mu()).norm() < 1e-12);
    CHECK((a.sigma() - b.sigma()).norm() < 1e-12);
}

TEST_CASE("detect uses a strict inequality") {
    const auto organs = organs_n(6);
    const GaussianModel m(organs, Eigen::VectorXd::Zero(6), Eigen::MatrixXd::Identity(6, 6), 100);
    auto at = [](double d2) {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(6);
        z(0) = std::sqrt(d2);
        return ScoreVector{"c", z};
    };
    CHECK_FALSE(detect(m, ScoreVector{"c", Eigen::VectorXd::Zero(6)}, 0.9).is_ood);
    CHECK(detect(m, at(10.7), 0.9).is_ood);
    CHECK_FALSE(detect(m, at(10.64), 0.9).is_ood);

    const double t = chi2_quantile(0.9, 6);
    const auto v = detect(m, at(t), 0.9);
    CHECK(v.threshold == t);
    CHECK(v.d_squared <= t * (1 + 1e-15));
    CHECK_THROWS_AS(detect(m, at(1), 1.0), Error);
}

TEST_CASE("calibration on Gaussian draws") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n;
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(6, 6, [&] { return n(rng); });
    a.diagonal().array() += 3.0;
    const Eigen::VectorXd mu = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
    const GaussianModel m(organs_n(6), mu, a * a.transpose(), 1000);
    int inside = 0;
    for (int i = 0; i < 20000; ++i) {
        const Eigen::VectorXd z = mu + a * Eigen::VectorXd::NullaryExpr(6, [&] { return n(rng); });
        inside += m.mahalanobis_sq(z) <= chi2_quantile(0.9, 6);
    }
    CHECK(inside / 20000.0 == doctest::Approx(0.9).epsilon(0.01));
}

TEST_CASE("model JSON round trip keeps every bit") {
    uqtest::TempDir dir;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    std::vector<ScoreVector> s;
    for (int i = 0; i < 20; ++i) s.push_back(sv({n(rng), n(rng), n(rng)}));
    const auto m = fit_gaussian(s, organs_n(3));
    save_model(dir / "model.json", m);
    const auto back = load_model(dir / "model.json");
    CHECK(back.mu() == m.mu());
    CHECK(back.sigma() == m.sigma());
    CHECK(back.organs() == m.organs());
    CHECK(back.n_train() == 20);
    CHECK(model_to_json(back) == model_to_json(m));
}

TEST_CASE("conservative training scores use only holdout learners") {
    PartitionPlan plan;
    plan.n_cases = 2;
    plan.membership = {{0, 1, 2, 3}, {4, 5, 6, 7}};
    const OrganSet organs({"a"});
    const auto meta = uqtest::cube(4, 2);
    ProbVolume flat(meta);
    flat.channel(0).setConstant(0.5f);
    flat.channel(1).setConstant(0.5f);
    std::mt19937_64 rng(6);

    std::vector<TrainingCase> cases(2);
    for (std::size_t l = 0; l < 8; ++l) {
        // Learners 0-3 are noisy; they trained on case 0 and held out case 1.
        for (int p = 0; p < 4; ++p) {
            cases[0].predictions[l].push_back(l < 4 ? uqtest::random_probs(meta, rng) : flat);
            cases[1].predictions[l].push_back(l < 4 ? uqtest::random_probs(meta, rng) : flat);
        }
    }
    cases[0].case_id = "t0";
    cases[1].case_id = "t1";
    const auto z = conservative_training_scores(plan, cases, organs, 0);
    REQUIRE(z.size() == 2);
    CHECK(z[0].organ_scores.isZero());
    CHECK(z[1].organ_scores(0) > 0);

    std::map<std::size_t, std::size_t> passes{{4, 4}, {5, 4}, {6, 4}, {7, 4}};
    check_holdout_coverage(plan, 0, passes);
    passes.erase(7);
    CHECK(code_of([&] { check_holdout_coverage(plan, 0, passes); }) == Errc::MissingHoldoutPredictions);
    passes[7] = 3;
    CHECK(code_of([&] { check_holdout_coverage(plan, 0, passes); }) == Errc::MissingHoldoutPredictions);
    cases[1].predictions.erase(2);
    cases[1].predictions.erase(0);
    cases[0].predictions.erase(5);
    CHECK(code_of([&] { conservative_training_scores(plan, cases, organs, 1); }) == Errc::MissingHoldoutPredictions);
}
