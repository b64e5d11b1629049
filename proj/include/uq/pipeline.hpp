#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uq/ood.hpp"
#include "uq/scoring.hpp"
#include "uq/tables.hpp"
#include "uq/uncertainty.hpp"

namespace uq {

struct RunConfig {
    int boundary_radius = 2;
    double level = 0.9;
    std::string variance_estimator = "sample";  // unbiased, n-1 denominator
    int jobs = 1;
    WarningSink warn;  // fit warnings; silent when empty

    // Empty paths default to <out_dir>/<name>; empty out_dir means <cohort>/run.
    std::filesystem::path out_dir;
    std::filesystem::path plan;
    std::filesystem::path model;
    std::filesystem::path train_scores;
    std::filesystem::path test_scores;
    std::filesystem::path verdicts;

    void validate() const;
};

struct RunSummary {
    std::filesystem::path model_path;
    double level = 0.0;
    int n_organs = 0;
    double threshold = 0.0;
    std::size_t n_train = 0;
    std::size_t n_control = 0;
    std::size_t n_ood = 0;
    double ridge_applied = 0.0;
    std::optional<double> auc;
    std::map<std::string, double> sensitivity;  // per OOD subset, plus "all"
    std::optional<double> specificity;

    std::string to_json() const;
};

// Accumulates the listed prediction files one at a time (probability
// invariants checked on load).
EnsembleAccumulator accumulate_predictions(std::span<const PredictionEntry> entries);

// Full-ensemble scoring of one case manifest.
EnsembleScore score_case_manifest(const CaseManifest& manifest, const OrganSet& organs, int radius);

// Holdout-only scoring of a training case (plan index `plan_index`).
EnsembleScore score_training_case(const CaseManifest& manifest, const PartitionPlan& plan,
                                  std::size_t plan_index, const OrganSet& organs, int radius);

// Writes heatmap.uqv and consensus.uqv for one case into case_dir.
void write_case_artifacts(const std::filesystem::path& case_dir, const EnsembleScore& scored);

// Train scores (holdout learners) -> Gaussian fit -> chi-squared threshold ->
// full-ensemble scores of control/OOD cases -> verdicts -> ROC/AUC. Writes every
// artifact plus summary.json under the output directory.
RunSummary run_pipeline(const std::filesystem::path& cohort_dir, const RunConfig& config);

// Raw and band-suppressed foreground max projections of a case written by
// run_pipeline (heatmap.uqv + consensus.uqv). Writes max_raw.uqv and
// max_processed.uqv into out_dir.
struct OverlayPaths {
    std::filesystem::path raw;
    std::filesystem::path processed;
};
OverlayPaths export_overlays(const std::filesystem::path& case_dir, const std::filesystem::path& out_dir,
                             const OrganSet& organs, int radius);

}  // namespace uq
