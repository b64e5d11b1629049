#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "uq/tables.hpp"
#include "uq/uqv_io.hpp"

using namespace uq;

TEST_CASE("doubles print shortest round-trip") {
    for (double x : {0.1, 1.0 / 3.0, 10.644640675668418, 1e-300, -2.5, 0.0, 123456789.125}) {
        const auto s = format_double(x);
        CHECK(std::stod(s) == x);
    }
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("scores CSV round trip") {
    const OrganSet organs({"bladder", "rectum"});
    std::vector<ScoreVector> rows{{"a", Eigen::Vector2d(0.1, 1.0 / 3.0)}, {"b", Eigen::Vector2d(2, 1e-9)}};
    const auto text = scores_to_csv(organs, rows);
    CHECK(text.rfind("case_id,bladder,rectum\n", 0) == 0);
    const auto t = parse_scores_csv(text);
    CHECK(t.organs == organs);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1].case_id == "b");
    CHECK(t.rows[0].organ_scores == rows[0].organ_scores);
    CHECK(scores_to_csv(t.organs, t.rows) == text);
}

TEST_CASE("malformed CSV is rejected") {
    CHECK_THROWS_AS(parse_scores_csv("case_id,a\nx,1,2\n"), Error);
    CHECK_THROWS_AS(parse_scores_csv("case_id,a\nx,abc\n"), Error);
    CHECK_THROWS_AS(parse_scores_csv("id,a\nx,1\n"), Error);
    CHECK_THROWS_AS(parse_labels_csv("case_id,label\nx,2\n"), Error);
}

TEST_CASE("verdicts and labels") {
    std::vector<OodVerdict> v{{"a", 3.5, 10.6, 0.9, false}, {"b", 12.0, 10.6, 0.9, true}, {"c", 1, 10.6, 0.9, false}};
    const auto text = verdicts_to_csv(v);
    CHECK(text.find("b,12,10.6,1\n") != std::string::npos);
    const auto back = parse_verdicts_csv(text);
    REQUIRE(back.size() == 3);
    CHECK(back[1].is_ood);
    CHECK(back[0].d_squared == 3.5);

    const std::vector<CaseLabel> labels{{"a", 0}, {"b", 1}};
    CHECK(parse_labels_csv(labels_to_csv(labels)).size() == 2);
    const auto joined = join_labels(back, labels);
    REQUIRE(joined.size() == 2);
    CHECK(joined[1].label == 1);
    CHECK(joined[1].score == 12.0);
}

TEST_CASE("ROC CSV writes infinite sentinels") {
    std::vector<RocPoint> c{{0, 0, INFINITY}, {1, 1, -INFINITY}};
    const auto text = roc_to_csv(c);
    CHECK(text.find("inf") != std::string::npos);
    CHECK(text.find("-inf") != std::string::npos);
}

TEST_CASE("manifest paths resolve relative to the manifest") {
    uqtest::TempDir dir;
    std::filesystem::create_directories(dir / "case");
    CaseManifest m{"c1", {{dir / "case" / "p0.uqv", 0, 0}, {dir / "case" / "p1.uqv", 5, 1}}};
    save_case_manifest(dir / "case" / "manifest.json", m);
    CHECK(read_text_file(dir / "case" / "manifest.json").find(dir.path().string()) == std::string::npos);
    const auto back = load_case_manifest(dir / "case" / "manifest.json");
    CHECK(back.case_id == "c1");
    REQUIRE(back.predictions.size() == 2);
    CHECK(std::filesystem::equivalent(back.predictions[0].path.parent_path(), dir / "case"));
    const std::vector<std::size_t> five{5};
    CHECK(back.for_learners(five).size() == 1);
    try {
        load_case_manifest(dir / "nope.json");
        FAIL("expected MissingManifest");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MissingManifest);
    }
}

TEST_CASE("organs file") {
    uqtest::TempDir dir;
    const OrganSet organs({"x", "y", "z"});
    write_text_file(dir / "organs.json", organs_to_json(organs));
    CHECK(load_organs(dir / "organs.json") == organs);
}
