#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "uq/cohort.hpp"
#include "uq/volume.hpp"

namespace uq {

enum class OodMode { None, FocalArtifact, Deformation };

std::string_view ood_mode_name(OodMode mode);
OodMode parse_ood_mode(std::string_view name);  // "none"/"id", "focal-artifact", "deformation"

// Synthetic cohort generator: ellipsoid organs whose logit fields are perturbed
// by smooth per-learner and per-pass noise, then pushed through a softmax.
struct PhantomConfig {
    std::array<std::uint32_t, 3> dims{64, 64, 64};
    int n_organs = 6;
    int n_learners = 8;
    int passes = 4;
    double sigma_id = 0.5;  // logit noise amplitude, per learner and per pass
    OodMode ood_mode = OodMode::None;
    double ood_strength = 3.0;
    std::uint64_t seed = 7;

    double logit_margin = 4.0;       // |logit| far from any surface
    double edge_width = 2.0;         // voxels; tanh transition across a surface
    double learner_cell = 32.0;      // control-point spacing of per-learner noise
    double pass_cell = 8.0;          // control-point spacing of per-pass noise
    double organ_size = 0.23;        // smallest semi-axis, as a fraction of the layout cell
    double organ_size_spread = 0.04; // semi-axes drawn from organ_size + U(0, spread)
    double artifact_radius = 9.0;    // voxels
    double displacement_scale = 1.0; // voxels of warp per unit ood_strength

    void validate() const;  // ConfigInvalid on violation
};

// Default organ names for n organs (pelvic names for n = 6, organ_k otherwise).
OrganSet phantom_organs(int n_organs);

using PredictionSink = std::function<void(int learner, int pass, ProbVolume&& prediction)>;

// Streams the n_learners * passes predictions of one case (learner-major order)
// and returns the ground-truth labels. Deterministic per (config, case_seed).
LabelVolume generate_case(const PhantomConfig& config, std::uint64_t case_seed, const PredictionSink& sink);

struct PhantomCase {
    LabelVolume truth;
    std::vector<ProbVolume> predictions;  // index = learner * passes + pass
};

PhantomCase generate_case(const PhantomConfig& config, std::uint64_t case_seed);

// Same as above with the OOD mode overridden (used for ID/OOD pairs).
PhantomCase generate_case(const PhantomConfig& config, std::uint64_t case_seed, OodMode mode);

// Writes case volumes, per-case manifests, the training plan, labels.csv,
// organs.json and cohort.json under out_dir. Train and control cases are
// in-distribution; OOD cases use config.ood_mode.
CohortManifest generate_cohort(const PhantomConfig& config, std::size_t n_train, std::size_t n_control,
                               std::size_t n_ood, const std::filesystem::path& out_dir, int jobs = 1);

// Seed of the index-th case of a role, derived from the cohort seed.
std::uint64_t case_seed(std::uint64_t cohort_seed, CaseRole role, std::size_t index);

}  // namespace uq
