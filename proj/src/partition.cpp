#include "uq/partition.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "uq/error.hpp"
#include "uq/uqv_io.hpp"

namespace uq {
namespace {

using Mask = std::uint64_t;

constexpr std::size_t kMaxSubsets = std::size_t{1} << 22;
constexpr std::size_t kSearchBudget = 20'000'000;

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::size_t result = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
        if (result > kMaxSubsets) return kMaxSubsets + 1;
    }
    return result;
}

// All R-subsets of {0..L-1} as bitmasks, lexicographic by sorted element list.
std::vector<Mask> enumerate_subsets(std::size_t learners, std::size_t replication) {
    std::vector<Mask> out;
    std::vector<std::size_t> idx(replication);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        Mask m = 0;
        for (auto i : idx) m |= Mask{1} << i;
        out.push_back(m);
        std::size_t pos = replication;
        while (pos > 0 && idx[pos - 1] == learners - replication + pos - 1) --pos;
        if (pos == 0) break;
        ++idx[pos - 1];
        for (std::size_t j = pos; j < replication; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

std::vector<std::size_t> members(Mask m) {
    std::vector<std::size_t> out;
    while (m) {
        out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
        m &= m - 1;
    }
    return out;
}

class Counters {
public:
    explicit Counters(std::size_t learners) : learners_(learners), load_(learners, 0), overlap_(learners * learners, 0) {}

    std::size_t load(std::size_t a) const { return load_[a]; }
    std::size_t overlap(std::size_t a, std::size_t b) const { return overlap_[a * learners_ + b]; }

    bool fits(Mask m, std::size_t load_cap, std::size_t overlap_cap) const {
        const auto mem = members(m);
        for (std::size_t i = 0; i < mem.size(); ++i) {
            if (load_[mem[i]] + 1 > load_cap) return false;
            for (std::size_t j = i + 1; j < mem.size(); ++j)
                if (overlap(mem[i], mem[j]) + 1 > overlap_cap) return false;
        }
        return true;
    }

    void add(Mask m, int delta) {
        const auto mem = members(m);
        for (std::size_t i = 0; i < mem.size(); ++i) {
            load_[mem[i]] += delta;
            for (std::size_t j = i + 1; j < mem.size(); ++j) {
                overlap_[mem[i] * learners_ + mem[j]] += delta;
                overlap_[mem[j] * learners_ + mem[i]] += delta;
            }
        }
    }

    std::size_t spare_capacity(std::size_t load_cap) const {
        std::size_t spare = 0;
        for (auto l : load_) spare += load_cap - std::min(load_cap, l);
        return spare;
    }

private:
    std::size_t learners_;
    std::vector<std::size_t> load_;
    std::vector<std::size_t> overlap_;
};

// Depth-first search for `count` distinct subsets (taken in `order`) that keep
// every counter within the caps.
class RemainderSearch {
public:
    RemainderSearch(const std::vector<Mask>& order, std::size_t learners, std::size_t replication,
                    std::size_t load_cap, std::size_t overlap_cap)
        : order_(order), replication_(replication), load_cap_(load_cap), overlap_cap_(overlap_cap),
          counters_(learners) {}

    std::optional<std::vector<Mask>> run(std::size_t count) {
        chosen_.clear();
        if (dfs(0, count)) return chosen_;
        return std::nullopt;
    }

private:
    bool dfs(std::size_t start, std::size_t count) {
        if (chosen_.size() == count) return true;
        const std::size_t still_needed = count - chosen_.size();
        if (counters_.spare_capacity(load_cap_) < still_needed * replication_) return false;
        for (std::size_t i = start; i + still_needed <= order_.size(); ++i) {
            if (++nodes_ > kSearchBudget)
                throw Error(Errc::InfeasibleConfig, "partition search budget exhausted");
            const Mask m = order_[i];
            if (!counters_.fits(m, load_cap_, overlap_cap_)) continue;
            counters_.add(m, +1);
            chosen_.push_back(m);
            if (dfs(i + 1, count)) return true;
            chosen_.pop_back();
            counters_.add(m, -1);
        }
        return false;
    }

    const std::vector<Mask>& order_;
    std::size_t replication_;
    std::size_t load_cap_;
    std::size_t overlap_cap_;
    Counters counters_;
    std::vector<Mask> chosen_;
    std::size_t nodes_ = 0;
};

std::vector<Mask> seeded_order(std::size_t learners, std::size_t replication, std::uint64_t seed) {
    auto subsets = enumerate_subsets(learners, replication);
    std::mt19937_64 rng(seed);
    if (learners == 2 * replication) {
        const Mask all = (learners == 64) ? ~Mask{0} : ((Mask{1} << learners) - 1);
        std::vector<std::pair<Mask, Mask>> pairs;
        for (Mask m : subsets)
            if (m & 1) pairs.emplace_back(m, all & ~m);
        std::shuffle(pairs.begin(), pairs.end(), rng);
        std::vector<Mask> order;
        order.reserve(subsets.size());
        for (auto [a, b] : pairs) {
            if (rng() & 1) std::swap(a, b);
            order.push_back(a);
            order.push_back(b);
        }
        return order;
    }
    std::shuffle(subsets.begin(), subsets.end(), rng);
    return subsets;
}

}  // namespace

std::size_t load_bound(std::size_t n_cases, std::size_t n_learners, std::size_t replication) {
    return n_cases * replication / n_learners + 1;
}

std::size_t overlap_bound(std::size_t n_cases, std::size_t n_learners, std::size_t replication) {
    return n_cases * replication * replication / (n_learners * n_learners) + 1;
}

PartitionPlan plan_partition(std::size_t n_cases, std::size_t n_learners, std::size_t replication,
                             std::uint64_t seed) {
    if (n_learners < 2) throw Error(Errc::InfeasibleConfig, "need at least two learners");
    if (n_learners > 64) throw Error(Errc::InfeasibleConfig, "at most 64 learners are supported");
    if (replication == 0 || replication > n_learners)
        throw Error(Errc::InfeasibleConfig, "replication must be in 1..n_learners");
    const std::size_t n_subsets = binomial(n_learners, replication);
    if (n_subsets > kMaxSubsets)
        throw Error(Errc::InfeasibleConfig, "too many learner subsets to enumerate");

    PartitionPlan plan{n_cases, n_learners, replication, seed, {}};
    plan.membership.reserve(n_cases);
    const auto order = seeded_order(n_learners, replication, seed);

    const std::size_t cycles = n_cases / n_subsets;
    const std::size_t rest = n_cases % n_subsets;
    for (std::size_t c = 0; c < cycles * n_subsets; ++c) plan.membership.push_back(members(order[c % n_subsets]));

    if (rest > 0) {
        // A full pass adds C(L-1,R-1) to every load and C(L-2,R-2) to every overlap.
        const std::size_t cycle_load = cycles * binomial(n_learners - 1, replication - 1);
        const std::size_t cycle_overlap = replication >= 2 ? cycles * binomial(n_learners - 2, replication - 2) : 0;
        const std::size_t load_cap = load_bound(n_cases, n_learners, replication) - cycle_load;
        const std::size_t overlap_cap = overlap_bound(n_cases, n_learners, replication) - cycle_overlap;
        RemainderSearch search(order, n_learners, replication, load_cap, overlap_cap);
        auto picked = search.run(rest);
        if (!picked)
            throw Error(Errc::InfeasibleConfig,
                        "no assignment of " + std::to_string(n_cases) + " cases to " +
                            std::to_string(n_learners) + " learners with replication " +
                            std::to_string(replication) + " meets the load/overlap bounds");
        for (Mask m : *picked) plan.membership.push_back(members(m));
    }
    return plan;
}

std::string PlanReport::summary() const {
    std::ostringstream ss;
    ss << "membership " << (membership_ok ? "ok" : "FAIL (" + std::to_string(bad_membership_cases) + " bad cases)")
       << "; max load " << max_load << " <= " << load_limit << (load_ok() ? " ok" : " FAIL")
       << "; max overlap " << max_overlap << " <= " << overlap_limit << (overlap_ok() ? " ok" : " FAIL");
    return ss.str();
}

PlanReport verify_plan(const PartitionPlan& plan) {
    PlanReport rep;
    const std::size_t L = plan.n_learners;
    rep.loads.assign(L, 0);
    rep.load_limit = L ? load_bound(plan.n_cases, L, plan.replication) : 1;
    rep.overlap_limit = L ? overlap_bound(plan.n_cases, L, plan.replication) : 1;
    if (plan.membership.size() != plan.n_cases) {
        rep.membership_ok = false;
        rep.bad_membership_cases = plan.n_cases > plan.membership.size() ? plan.n_cases - plan.membership.size()
                                                                         : plan.membership.size() - plan.n_cases;
    }
    std::vector<std::size_t> overlap(L * L, 0);
    for (const auto& mem : plan.membership) {
        std::vector<std::size_t> sorted = mem;
        std::sort(sorted.begin(), sorted.end());
        const bool distinct = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
        const bool in_range = sorted.empty() || sorted.back() < L;
        if (sorted.size() != plan.replication || !distinct || !in_range) {
            rep.membership_ok = false;
            ++rep.bad_membership_cases;
        }
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i] >= L) continue;
            ++rep.loads[sorted[i]];
            for (std::size_t j = i + 1; j < sorted.size(); ++j) {
                if (sorted[j] >= L || sorted[j] == sorted[i]) continue;
                ++overlap[sorted[i] * L + sorted[j]];
            }
        }
    }
    for (auto l : rep.loads) rep.max_load = std::max(rep.max_load, l);
    for (auto o : overlap) rep.max_overlap = std::max(rep.max_overlap, o);
    return rep;
}

std::vector<std::size_t> holdout_learners(const PartitionPlan& plan, std::size_t case_id) {
    if (case_id >= plan.n_cases || case_id >= plan.membership.size())
        throw Error(Errc::CaseOutOfRange, "case " + std::to_string(case_id) + " not in plan of " +
                                              std::to_string(plan.n_cases) + " cases");
    const auto& mem = plan.membership[case_id];
    std::vector<std::size_t> out;
    out.reserve(plan.n_learners - mem.size());
    for (std::size_t l = 0; l < plan.n_learners; ++l)
        if (std::find(mem.begin(), mem.end(), l) == mem.end()) out.push_back(l);
    return out;
}

std::string plan_to_json(const PartitionPlan& plan) {
    nlohmann::json j;
    j["n_cases"] = plan.n_cases;
    j["n_learners"] = plan.n_learners;
    j["replication"] = plan.replication;
    j["seed"] = plan.seed;
    j["membership"] = plan.membership;
    return j.dump(1) + "\n";
}

PartitionPlan plan_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        PartitionPlan plan;
        plan.n_cases = j.at("n_cases").get<std::size_t>();
        plan.n_learners = j.at("n_learners").get<std::size_t>();
        plan.replication = j.at("replication").get<std::size_t>();
        plan.seed = j.at("seed").get<std::uint64_t>();
        plan.membership = j.at("membership").get<std::vector<std::vector<std::size_t>>>();
        if (plan.membership.size() != plan.n_cases)
            throw Error(Errc::ConfigInvalid, "plan membership length differs from n_cases");
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigInvalid, std::string("malformed plan file: ") + e.what());
    }
}

void save_plan(const std::filesystem::path& path, const PartitionPlan& plan) {
    write_text_file(path, plan_to_json(plan));
}

PartitionPlan load_plan(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(Errc::MissingPlan, "no plan file at " + path.string());
    return plan_from_json(read_text_file(path));
}

}  // namespace uq
