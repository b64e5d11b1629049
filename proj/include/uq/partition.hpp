#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace uq {

// Assignment of training cases to base learners. Each case is trained on by
// exactly `replication` of the `n_learners` learners.
struct PartitionPlan {
    std::size_t n_cases = 0;
    std::size_t n_learners = 8;
    std::size_t replication = 4;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::size_t>> membership;  // sorted learner indices per case

    bool operator==(const PartitionPlan&) const = default;
};

// Upper bounds enforced on a plan of n cases. For L learners and replication R:
//   learner load       <= floor(n*R/L) + 1
//   pairwise overlap   <= floor(n*R^2/L^2) + 1
// which for L=8, R=4 is floor(n/2)+1 and floor(n/4)+1.
std::size_t load_bound(std::size_t n_cases, std::size_t n_learners, std::size_t replication);
std::size_t overlap_bound(std::size_t n_cases, std::size_t n_learners, std::size_t replication);

// Whole passes over every R-subset of learners, followed by a seeded search for
// the remaining cases. The subset order comes from a seeded shuffle; for L = 2R
// complementary subsets are kept adjacent so every prefix stays load balanced.
// Throws InfeasibleConfig when replication > n_learners, n_learners < 2, or no
// assignment meets the bounds (e.g. n=3 with 8 learners and replication 4).
PartitionPlan plan_partition(std::size_t n_cases, std::size_t n_learners, std::size_t replication,
                             std::uint64_t seed);

struct PlanReport {
    bool membership_ok = true;       // every case has exactly R distinct, in-range learners
    std::size_t bad_membership_cases = 0;
    std::size_t max_load = 0;
    std::size_t load_limit = 0;
    std::size_t max_overlap = 0;
    std::size_t overlap_limit = 0;
    std::vector<std::size_t> loads;  // per learner

    bool load_ok() const { return max_load <= load_limit; }
    bool overlap_ok() const { return max_overlap <= overlap_limit; }
    bool pass() const { return membership_ok && load_ok() && overlap_ok(); }
    std::string summary() const;
};

PlanReport verify_plan(const PartitionPlan& plan);

// Learners that never saw case `case_id` (complement of its membership).
std::vector<std::size_t> holdout_learners(const PartitionPlan& plan, std::size_t case_id);

std::string plan_to_json(const PartitionPlan& plan);
PartitionPlan plan_from_json(const std::string& text);
void save_plan(const std::filesystem::path& path, const PartitionPlan& plan);
PartitionPlan load_plan(const std::filesystem::path& path);

}  // namespace uq
