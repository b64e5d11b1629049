#include "uq/pipeline.hpp"

#include <functional>

#include <json.hpp>

#include "uq/cohort.hpp"
#include "uq/gamma.hpp"
#include "uq/parallel.hpp"
#include "uq/partition.hpp"
#include "uq/roc.hpp"
#include "uq/uqv_io.hpp"

namespace uq {
namespace {

std::filesystem::path or_default(const std::filesystem::path& p, const std::filesystem::path& fallback) {
    return p.empty() ? fallback : p;
}

std::vector<ScoreVector> score_cases(const std::vector<CohortCase>& cases, const std::filesystem::path& out,
                                     const RunConfig& config,
                                     const std::function<EnsembleScore(const CohortCase&, const CaseManifest&)>& score) {
    std::vector<ScoreVector> rows(cases.size());
    parallel_for(cases.size(), config.jobs, [&](std::size_t i) {
        const auto manifest = load_case_manifest(cases[i].manifest);
        auto scored = score(cases[i], manifest);
        scored.scores.case_id = cases[i].case_id;
        write_case_artifacts(out / "cases" / cases[i].case_id, scored);
        rows[i] = std::move(scored.scores);
    });
    return rows;
}

}  // namespace

void RunConfig::validate() const {
    if (!(level > 0.0 && level < 1.0)) throw Error(Errc::LevelOutOfRange, "level must lie in (0, 1)");
    if (boundary_radius < 1) throw Error(Errc::ConfigInvalid, "boundary radius must be >= 1");
    if (variance_estimator != "sample")
        throw Error(Errc::ConfigInvalid, "only the unbiased \"sample\" variance estimator is supported");
    if (jobs < 1) throw Error(Errc::ConfigInvalid, "jobs must be >= 1");
}

std::string RunSummary::to_json() const {
    nlohmann::ordered_json j;
    j["model"] = model_path.generic_string();
    j["level"] = level;
    j["n_organs"] = n_organs;
    j["threshold"] = threshold;
    j["variance_estimator"] = "sample";
    j["covariance_normalization"] = "1/N";
    j["ridge_applied"] = ridge_applied;
    j["n_train"] = n_train;
    j["n_control"] = n_control;
    j["n_ood"] = n_ood;
    if (auc) j["auc"] = *auc;
    if (!sensitivity.empty()) j["sensitivity"] = sensitivity;
    if (specificity) j["specificity"] = *specificity;
    return j.dump(1) + "\n";
}

EnsembleAccumulator accumulate_predictions(std::span<const PredictionEntry> entries) {
    EnsembleAccumulator acc;
    for (const auto& e : entries) acc.push(read_prob_volume(e.path));
    return acc;
}

EnsembleScore score_case_manifest(const CaseManifest& manifest, const OrganSet& organs, int radius) {
    const auto acc = accumulate_predictions(manifest.predictions);
    return score_ensemble(acc, organs, radius, manifest.case_id);
}

EnsembleScore score_training_case(const CaseManifest& manifest, const PartitionPlan& plan,
                                  std::size_t plan_index, const OrganSet& organs, int radius) {
    const auto holdout = holdout_learners(plan, plan_index);
    const auto entries = manifest.for_learners(holdout);
    std::map<std::size_t, std::size_t> passes;
    for (const auto& e : entries) ++passes[*e.learner];
    try {
        check_holdout_coverage(plan, plan_index, passes);
    } catch (const Error& e) {
        throw Error(e.code(), manifest.case_id + ": " + e.what());
    }
    const auto acc = accumulate_predictions(entries);
    return score_ensemble(acc, organs, radius, manifest.case_id);
}

void write_case_artifacts(const std::filesystem::path& case_dir, const EnsembleScore& scored) {
    write_volume(case_dir / "heatmap.uqv", scored.heatmap.values);
    write_volume(case_dir / "consensus.uqv", scored.consensus);
}

RunSummary run_pipeline(const std::filesystem::path& cohort_dir, const RunConfig& config) {
    config.validate();
    const auto cohort = load_cohort(cohort_dir);
    const auto out = or_default(config.out_dir, cohort_dir / "run");

    const auto plan_path = or_default(config.plan, cohort.plan);
    if (plan_path.empty() || !std::filesystem::exists(plan_path))
        throw Error(Errc::MissingPlan, "cohort " + cohort_dir.string() + " has no partition plan");
    const auto plan = load_plan(plan_path);

    const auto& organs = cohort.organs;
    const int radius = config.boundary_radius;

    // 1. Conservative training scores from holdout learners only.
    const auto train = cohort.with_role(CaseRole::Train);
    for (const auto& c : train)
        if (!c.plan_index || *c.plan_index >= plan.n_cases)
            throw Error(Errc::CaseOutOfRange, "training case " + c.case_id + " has no valid plan index");
    const auto train_scores = score_cases(train, out, config, [&](const CohortCase& c, const CaseManifest& m) {
        return score_training_case(m, plan, *c.plan_index, organs, radius);
    });
    write_scores_csv(or_default(config.train_scores, out / "train_scores.csv"), organs, train_scores);

    // 2-3. Reference Gaussian and threshold; nothing here sees control or OOD data.
    const auto model = fit_gaussian(train_scores, organs, config.warn);
    const auto model_path = or_default(config.model, out / "model.json");
    save_model(model_path, model);

    RunSummary summary;
    summary.model_path = model_path;
    summary.level = config.level;
    summary.n_organs = static_cast<int>(organs.size());
    summary.threshold = chi2_quantile(config.level, static_cast<int>(organs.size()));
    summary.n_train = train.size();
    summary.ridge_applied = model.ridge_applied();

    // 4. Full-ensemble scores for the test cases.
    std::vector<CohortCase> test = cohort.with_role(CaseRole::Control);
    const auto ood_cases = cohort.with_role(CaseRole::Ood);
    test.insert(test.end(), ood_cases.begin(), ood_cases.end());
    const auto test_scores = score_cases(test, out, config, [&](const CohortCase&, const CaseManifest& m) {
        return score_case_manifest(m, organs, radius);
    });
    write_scores_csv(or_default(config.test_scores, out / "test_scores.csv"), organs, test_scores);

    // 5. Verdicts and evaluation.
    std::vector<OodVerdict> verdicts;
    for (const auto& s : test_scores) verdicts.push_back(detect(model, s, config.level));
    write_verdicts_csv(or_default(config.verdicts, out / "verdicts.csv"), verdicts);

    std::vector<CaseLabel> labels;
    if (!cohort.labels.empty() && std::filesystem::exists(cohort.labels)) {
        labels = read_labels_csv(cohort.labels);
    } else {
        for (const auto& c : test) labels.push_back({c.case_id, c.role == CaseRole::Ood ? 1 : 0});
    }
    const auto labeled = join_labels(verdicts, labels);
    std::map<std::string, std::string> subset_of;
    for (const auto& c : test) subset_of[c.case_id] = c.subset;

    std::vector<LabeledScore> id_only, ood_only;
    for (const auto& s : labeled) (s.label == 1 ? ood_only : id_only).push_back(s);
    summary.n_control = id_only.size();
    summary.n_ood = ood_only.size();

    if (!id_only.empty()) {
        std::size_t passed = 0;
        for (const auto& s : id_only) passed += s.score <= summary.threshold ? 1 : 0;
        summary.specificity = static_cast<double>(passed) / static_cast<double>(id_only.size());
    }
    if (!ood_only.empty()) {
        std::map<std::string, std::pair<std::size_t, std::size_t>> per_subset;  // flagged, total
        for (const auto& s : ood_only) {
            auto& [flagged, total] = per_subset[subset_of.count(s.case_id) ? subset_of[s.case_id] : "ood"];
            flagged += s.score > summary.threshold ? 1 : 0;
            ++total;
        }
        std::size_t all_flagged = 0;
        for (const auto& [name, counts] : per_subset) {
            summary.sensitivity[name] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
            all_flagged += counts.first;
        }
        summary.sensitivity["all"] = static_cast<double>(all_flagged) / static_cast<double>(ood_only.size());
    }
    if (!id_only.empty() && !ood_only.empty()) {
        summary.auc = auc(labeled);
        write_text_file(out / "roc.csv", roc_to_csv(roc_curve(labeled)));
    }
    write_text_file(out / "summary.json", summary.to_json());
    return summary;
}

OverlayPaths export_overlays(const std::filesystem::path& case_dir, const std::filesystem::path& out_dir,
                             const OrganSet& organs, int radius) {
    const auto heatmap_path = case_dir / "heatmap.uqv";
    if (!std::filesystem::exists(heatmap_path))
        throw Error(Errc::IoFailure, "no heatmap at " + heatmap_path.string());
    const UncertaintyMap umap{read_float_volume(heatmap_path), 0};
    const auto consensus = read_label_volume(case_dir / "consensus.uqv");
    OverlayPaths paths{out_dir / "max_raw.uqv", out_dir / "max_processed.uqv"};
    write_volume(paths.raw, max_projection(umap));
    write_volume(paths.processed, max_projection(suppress_boundaries(umap, consensus, organs, radius)));
    return paths;
}

}  // namespace uq
