#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uq/volume.hpp"

namespace uq {

enum class CaseRole { Train, Control, Ood };

std::string_view role_name(CaseRole role);
CaseRole parse_role(std::string_view name);

struct CohortCase {
    std::string case_id;
    CaseRole role = CaseRole::Train;
    std::string subset;                    // e.g. "focal-artifact" for OOD cases
    std::filesystem::path manifest;        // resolved against the cohort directory
    std::optional<std::size_t> plan_index; // training cases only
};

// cohort.json: index of all cases, their roles and files.
struct CohortManifest {
    OrganSet organs;
    std::uint64_t seed = 0;
    std::filesystem::path plan;    // empty when the cohort has no plan
    std::filesystem::path labels;  // empty when the cohort has no labels file
    std::vector<CohortCase> cases;

    std::vector<CohortCase> with_role(CaseRole role) const;
};

inline constexpr const char* kCohortFile = "cohort.json";

void save_cohort(const std::filesystem::path& dir, const CohortManifest& cohort);
// Throws MissingManifest when dir/cohort.json is absent.
CohortManifest load_cohort(const std::filesystem::path& dir);

}  // namespace uq
