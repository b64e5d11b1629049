#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uq/ood.hpp"
#include "uq/roc.hpp"
#include "uq/scoring.hpp"
#include "uq/volume.hpp"

namespace uq {

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

// Scores CSV: "case_id,<organ...>" header, one row per case.
std::string scores_to_csv(const OrganSet& organs, std::span<const ScoreVector> rows);
void write_scores_csv(const std::filesystem::path& path, const OrganSet& organs,
                      std::span<const ScoreVector> rows);

struct ScoreTable {
    OrganSet organs;
    std::vector<ScoreVector> rows;
};

ScoreTable parse_scores_csv(const std::string& text);
ScoreTable read_scores_csv(const std::filesystem::path& path);

// Verdict CSV: case_id,d_squared,threshold,is_ood (is_ood as 0/1).
std::string verdicts_to_csv(std::span<const OodVerdict> verdicts);
void write_verdicts_csv(const std::filesystem::path& path, std::span<const OodVerdict> verdicts);
std::vector<OodVerdict> parse_verdicts_csv(const std::string& text);
std::vector<OodVerdict> read_verdicts_csv(const std::filesystem::path& path);

// Labels CSV: case_id,label with label 0 (ID) or 1 (OOD).
struct CaseLabel {
    std::string case_id;
    int label = 0;
};
std::string labels_to_csv(std::span<const CaseLabel> labels);
std::vector<CaseLabel> parse_labels_csv(const std::string& text);
std::vector<CaseLabel> read_labels_csv(const std::filesystem::path& path);

// ROC CSV: fpr,tpr,threshold.
std::string roc_to_csv(std::span<const RocPoint> curve);

// Joins verdicts with labels by case id; verdicts without a label are skipped.
std::vector<LabeledScore> join_labels(std::span<const OodVerdict> verdicts, std::span<const CaseLabel> labels);

// Case manifest: {"case_id": ..., "predictions": [{"path", "learner", "pass"}, ...]}.
// Paths are stored relative to the manifest and resolved on load.
struct PredictionEntry {
    std::filesystem::path path;
    std::optional<std::size_t> learner;
    std::optional<std::size_t> pass;
};

struct CaseManifest {
    std::string case_id;
    std::vector<PredictionEntry> predictions;

    // Entries of the given learners, in manifest order. Throws
    // MissingHoldoutPredictions when an entry has no learner tag.
    std::vector<PredictionEntry> for_learners(std::span<const std::size_t> learners) const;
};

std::string case_manifest_to_json(const CaseManifest& manifest);
CaseManifest load_case_manifest(const std::filesystem::path& path);
void save_case_manifest(const std::filesystem::path& path, const CaseManifest& manifest);

// organs.json: {"organs": [...foreground names...]}.
std::string organs_to_json(const OrganSet& organs);
OrganSet load_organs(const std::filesystem::path& path);

}  // namespace uq
