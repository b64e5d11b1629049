#include "uq/cohort.hpp"

#include <json.hpp>

#include "uq/uqv_io.hpp"

namespace uq {
namespace {

std::string relative_to(const std::filesystem::path& p, const std::filesystem::path& base) {
    if (p.empty()) return {};
    return p.lexically_relative(base).generic_string();
}

}  // namespace

std::string_view role_name(CaseRole role) {
    switch (role) {
    case CaseRole::Train: return "train";
    case CaseRole::Control: return "control";
    case CaseRole::Ood: return "ood";
    }
    return "train";
}

CaseRole parse_role(std::string_view name) {
    if (name == "train") return CaseRole::Train;
    if (name == "control") return CaseRole::Control;
    if (name == "ood") return CaseRole::Ood;
    throw Error(Errc::ConfigInvalid, "unknown case role " + std::string(name));
}

std::vector<CohortCase> CohortManifest::with_role(CaseRole role) const {
    std::vector<CohortCase> out;
    for (const auto& c : cases)
        if (c.role == role) out.push_back(c);
    return out;
}

void save_cohort(const std::filesystem::path& dir, const CohortManifest& cohort) {
    nlohmann::ordered_json j;
    j["organs"] = cohort.organs.names;
    j["seed"] = cohort.seed;
    j["plan"] = relative_to(cohort.plan, dir);
    j["labels"] = relative_to(cohort.labels, dir);
    auto cases = nlohmann::ordered_json::array();
    for (const auto& c : cohort.cases) {
        nlohmann::ordered_json e;
        e["case_id"] = c.case_id;
        e["role"] = role_name(c.role);
        e["subset"] = c.subset;
        e["manifest"] = relative_to(c.manifest, dir);
        if (c.plan_index) e["plan_index"] = *c.plan_index;
        cases.push_back(std::move(e));
    }
    j["cases"] = std::move(cases);
    write_text_file(dir / kCohortFile, j.dump(1) + "\n");
}

CohortManifest load_cohort(const std::filesystem::path& dir) {
    const auto path = dir / kCohortFile;
    if (!std::filesystem::exists(path)) throw Error(Errc::MissingManifest, "no cohort manifest at " + path.string());
    try {
        const auto j = nlohmann::json::parse(read_text_file(path));
        CohortManifest c;
        c.organs = OrganSet(j.at("organs").get<std::vector<std::string>>());
        c.seed = j.value("seed", std::uint64_t{0});
        const auto plan = j.value("plan", std::string{});
        const auto labels = j.value("labels", std::string{});
        if (!plan.empty()) c.plan = dir / plan;
        if (!labels.empty()) c.labels = dir / labels;
        for (const auto& e : j.at("cases")) {
            CohortCase cc;
            cc.case_id = e.at("case_id").get<std::string>();
            cc.role = parse_role(e.at("role").get<std::string>());
            cc.subset = e.value("subset", std::string{});
            cc.manifest = dir / e.at("manifest").get<std::string>();
            if (e.contains("plan_index")) cc.plan_index = e.at("plan_index").get<std::size_t>();
            c.cases.push_back(std::move(cc));
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigInvalid, "malformed cohort manifest: " + std::string(e.what()));
    }
}

}  // namespace uq
