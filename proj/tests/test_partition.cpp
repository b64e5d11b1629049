#include <doctest.h>

#include <algorithm>
#include <set>

#include "support.hpp"
#include "uq/partition.hpp"

using namespace uq;

namespace {

// Straight recount of loads and pairwise overlaps from the membership lists.
struct Counts {
    std::vector<std::size_t> load;
    std::size_t max_overlap = 0;
};

Counts recount(const PartitionPlan& p) {
    Counts c;
    c.load.assign(p.n_learners, 0);
    std::vector<std::vector<std::size_t>> pair(p.n_learners, std::vector<std::size_t>(p.n_learners, 0));
    for (const auto& m : p.membership)
        for (auto a : m) {
            ++c.load[a];
            for (auto b : m)
                if (a < b) ++pair[a][b];
        }
    for (const auto& row : pair)
        for (auto v : row) c.max_overlap = std::max(c.max_overlap, v);
    return c;
}

}  // namespace

TEST_CASE("N=70 uses every 4-subset once") {
    const auto p = plan_partition(70, 8, 4, 11);
    const auto rep = verify_plan(p);
    CHECK(rep.pass());
    CHECK(rep.max_load == 35);
    CHECK(rep.max_overlap == 15);
    std::set<std::vector<std::size_t>> distinct(p.membership.begin(), p.membership.end());
    CHECK(distinct.size() == 70);
    const auto c = recount(p);
    CHECK(std::all_of(c.load.begin(), c.load.end(), [](auto l) { return l == 35; }));
    CHECK(c.max_overlap == 15);
}

TEST_CASE("single case") {
    const auto p = plan_partition(1, 8, 4, 0);
    REQUIRE(p.membership.size() == 1);
    CHECK(p.membership[0].size() == 4);
    const auto rep = verify_plan(p);
    CHECK(rep.pass());
    CHECK(rep.max_load == 1);
    CHECK(rep.max_overlap == 1);
}

TEST_CASE("cohort of 679") {
    const auto p = plan_partition(679, 8, 4, 2024);
    const auto rep = verify_plan(p);
    CHECK(rep.pass());
    const auto c = recount(p);
    CHECK(*std::max_element(c.load.begin(), c.load.end()) == rep.max_load);
    CHECK(c.max_overlap == rep.max_overlap);
    CHECK(rep.max_load <= 679 / 2 + 1);
    CHECK(rep.max_overlap <= 679 / 4 + 1);
}

TEST_CASE("bounds for 8 learners, replication 4") {
    for (std::size_t n : {0u, 1u, 7u, 70u, 679u}) {
        CHECK(load_bound(n, 8, 4) == n / 2 + 1);
        CHECK(overlap_bound(n, 8, 4) == n / 4 + 1);
    }
}

TEST_CASE("same subset for all cases fails the overlap bound") {
    PartitionPlan p;
    p.n_cases = 8;
    p.membership.assign(8, {0, 1, 2, 3});
    const auto rep = verify_plan(p);
    CHECK_FALSE(rep.pass());
    CHECK(rep.max_overlap == 8);
    CHECK(rep.overlap_limit == 3);
    CHECK(rep.membership_ok);
}

TEST_CASE("empty plan passes") {
    PartitionPlan p;
    CHECK(verify_plan(p).pass());
    CHECK(plan_partition(0, 8, 4, 1).membership.empty());
}

TEST_CASE("malformed membership is reported") {
    PartitionPlan p;
    p.n_cases = 2;
    p.membership = {{0, 1, 2}, {0, 0, 1, 9}};
    const auto rep = verify_plan(p);
    CHECK_FALSE(rep.membership_ok);
    CHECK(rep.bad_membership_cases == 2);
}

TEST_CASE("holdout is the complement") {
    PartitionPlan p;
    p.n_cases = 2;
    p.membership = {{0, 1, 2, 3}, {0, 2, 4, 6}};
    CHECK(holdout_learners(p, 0) == std::vector<std::size_t>{4, 5, 6, 7});
    CHECK(holdout_learners(p, 1) == std::vector<std::size_t>{1, 3, 5, 7});
    try {
        holdout_learners(p, 2);
        FAIL("expected CaseOutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::CaseOutOfRange);
    }
}

TEST_CASE("infeasible configurations") {
    auto code_of = [](std::size_t n, std::size_t l, std::size_t r) {
        try {
            plan_partition(n, l, r, 0);
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::IoFailure;
    };
    CHECK(code_of(5, 4, 5) == Errc::InfeasibleConfig);
    CHECK(code_of(5, 1, 1) == Errc::InfeasibleConfig);
    // Three 4-subsets of 8 learners cannot pairwise share at most one learner.
    CHECK(code_of(3, 8, 4) == Errc::InfeasibleConfig);
}

TEST_CASE("sweep of small cohorts") {
    for (std::size_t n = 1; n <= 150; ++n) {
        if (n == 3) continue;
        CAPTURE(n);
        const auto p = plan_partition(n, 8, 4, n * 7919);
        CHECK(verify_plan(p).pass());
    }
}

TEST_CASE("other learner counts") {
    for (auto [l, r] : {std::pair<std::size_t, std::size_t>{6, 3}, {5, 2}, {4, 1}, {10, 5}}) {
        for (std::size_t n : {10u, 37u, 100u}) {
            CAPTURE(l);
            CAPTURE(n);
            CHECK(verify_plan(plan_partition(n, l, r, 5)).pass());
        }
    }
}

TEST_CASE("plan is deterministic and seed dependent") {
    const auto a = plan_partition(100, 8, 4, 42);
    const auto b = plan_partition(100, 8, 4, 42);
    const auto c = plan_partition(100, 8, 4, 43);
    CHECK(a == b);
    CHECK_FALSE(a.membership == c.membership);
}

TEST_CASE("plan JSON round trip") {
    uqtest::TempDir dir;
    const auto p = plan_partition(37, 8, 4, 9);
    save_plan(dir / "plan.json", p);
    CHECK(load_plan(dir / "plan.json") == p);
    CHECK(plan_from_json(plan_to_json(p)) == p);
    try {
        load_plan(dir / "missing.json");
        FAIL("expected MissingPlan");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MissingPlan);
    }
}
