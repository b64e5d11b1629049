#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "uq/partition.hpp"
#include "uq/scoring.hpp"
#include "uq/volume.hpp"

namespace uq {

// In-distribution reference: per-organ means and a shared covariance, stored
// with its Cholesky factor. Immutable once built.
class GaussianModel {
public:
    // Takes sigma as given; throws SingularCovariance if it is not positive definite.
    GaussianModel(OrganSet organs, Eigen::VectorXd mu, Eigen::MatrixXd sigma, std::size_t n_train,
                  double ridge_applied = 0.0);

    const OrganSet& organs() const { return organs_; }
    const Eigen::VectorXd& mu() const { return mu_; }
    const Eigen::MatrixXd& sigma() const { return sigma_; }
    std::size_t n_train() const { return n_train_; }
    double ridge_applied() const { return ridge_applied_; }
    Index dim() const { return mu_.size(); }

    // Lower Cholesky factor L with sigma = L L^T.
    Eigen::MatrixXd cholesky_lower() const { return llt_.matrixL(); }

    // (z - mu)^T sigma^{-1} (z - mu) via a triangular solve.
    double mahalanobis_sq(const Eigen::VectorXd& z) const;

private:
    OrganSet organs_;
    Eigen::VectorXd mu_;
    Eigen::MatrixXd sigma_;
    std::size_t n_train_;
    double ridge_applied_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

using WarningSink = std::function<void(std::string_view)>;

// Maximum-likelihood fit (1/N covariance). On a failed factorization adds
// lambda * mean(diag(sigma)) to the diagonal, lambda = 1e-8, 1e-7, ..., 1e-2
// (lambda alone when the diagonal is all zero).
GaussianModel fit_gaussian(std::span<const ScoreVector> train_scores, const OrganSet& organs,
                           const WarningSink& warn = {});

double mahalanobis_sq(const GaussianModel& model, const ScoreVector& z);

struct OodVerdict {
    std::string case_id;
    double d_squared = 0.0;
    double threshold = 0.0;
    double level = 0.0;
    bool is_ood = false;
};

// threshold = chi2_quantile(level, M); is_ood iff d_squared > threshold.
OodVerdict detect(const GaussianModel& model, const ScoreVector& z, double level);

// Holdout predictions of one training case, keyed by learner index.
using LearnerPredictions = std::map<std::size_t, std::vector<ProbVolume>>;

struct TrainingCase {
    std::string case_id;
    LearnerPredictions predictions;
};

// The learner indices and pass count to draw for `case_index`; throws
// MissingHoldoutPredictions when a holdout learner is absent, empty, or the
// pass counts disagree.
void check_holdout_coverage(const PartitionPlan& plan, std::size_t case_index,
                            const std::map<std::size_t, std::size_t>& passes_per_learner);

// Scores each training case using only predictions from its holdout learners.
// cases[i] corresponds to plan case i.
std::vector<ScoreVector> conservative_training_scores(const PartitionPlan& plan,
                                                      std::span<const TrainingCase> cases,
                                                      const OrganSet& organs, int radius);

std::string model_to_json(const GaussianModel& model);
GaussianModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const GaussianModel& model);
GaussianModel load_model(const std::filesystem::path& path);

}  // namespace uq
