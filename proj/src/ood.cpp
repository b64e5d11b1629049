#include "uq/ood.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "uq/gamma.hpp"
#include "uq/uncertainty.hpp"
#include "uq/uqv_io.hpp"

namespace uq {
namespace {

bool factorizes(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return llt.info() == Eigen::Success && llt.rcond() > std::numeric_limits<double>::epsilon();
}

}  // namespace

GaussianModel::GaussianModel(OrganSet organs, Eigen::VectorXd mu, Eigen::MatrixXd sigma,
                             std::size_t n_train, double ridge_applied)
    : organs_(std::move(organs)), mu_(std::move(mu)), sigma_(std::move(sigma)), n_train_(n_train),
      ridge_applied_(ridge_applied) {
    const Index m = mu_.size();
    if (m != organs_.size() || sigma_.rows() != m || sigma_.cols() != m)
        throw Error(Errc::DimensionMismatch, "model dimensions disagree with organ count");
    if (!mu_.allFinite() || !sigma_.allFinite())
        throw Error(Errc::NonFiniteScore, "model parameters must be finite");
    const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
    if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw Error(Errc::SingularCovariance, "covariance is not symmetric");
    llt_.compute(sigma_);
    if (!factorizes(llt_)) throw Error(Errc::SingularCovariance, "covariance is not positive definite");
}

double GaussianModel::mahalanobis_sq(const Eigen::VectorXd& z) const {
    if (z.size() != dim())
        throw Error(Errc::DimensionMismatch, "score vector has " + std::to_string(z.size()) +
                                                 " entries, model expects " + std::to_string(dim()));
    const Eigen::VectorXd w = llt_.matrixL().solve(z - mu_);
    return w.squaredNorm();
}

GaussianModel fit_gaussian(std::span<const ScoreVector> train_scores, const OrganSet& organs,
                           const WarningSink& warn) {
    const Index m = organs.size();
    const auto n = static_cast<Index>(train_scores.size());
    if (n < 2) throw Error(Errc::TooFewSamples, "need at least two training score vectors");
    Eigen::MatrixXd z(n, m);
    for (Index i = 0; i < n; ++i) {
        const auto& sv = train_scores[static_cast<std::size_t>(i)];
        if (sv.size() != m)
            throw Error(Errc::DimensionMismatch, "score vector " + sv.case_id + " has " +
                                                     std::to_string(sv.size()) + " entries, expected " +
                                                     std::to_string(m));
        if (!sv.organ_scores.allFinite())
            throw Error(Errc::NonFiniteScore, "score vector " + sv.case_id + " is not finite");
        z.row(i) = sv.organ_scores.transpose();
    }
    if (warn && n < 5 * m)
        warn("fitting " + std::to_string(m) + "-D Gaussian on only " + std::to_string(n) +
             " cases; covariance will be noisy");

    const Eigen::VectorXd mu = z.colwise().mean().transpose();
    const Eigen::MatrixXd centered = z.rowwise() - mu.transpose();
    Eigen::MatrixXd sigma = (centered.transpose() * centered) / static_cast<double>(n);
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    if (!sigma.allFinite()) throw Error(Errc::SingularCovariance, "covariance overflows; rescale the scores");

    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (factorizes(llt)) return GaussianModel(organs, mu, sigma, static_cast<std::size_t>(n), 0.0);

    const double mean_diag = sigma.diagonal().mean();
    const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
    for (double lambda = 1e-8; lambda <= 1e-2 * 1.0000001; lambda *= 10.0) {
        const double ridge = lambda * scale;
        Eigen::MatrixXd regularized = sigma;
        regularized.diagonal().array() += ridge;
        llt.compute(regularized);
        if (factorizes(llt)) {
            if (warn) {
                std::ostringstream ss;
                ss << "covariance regularized with ridge " << ridge;
                warn(ss.str());
            }
            return GaussianModel(organs, mu, regularized, static_cast<std::size_t>(n), ridge);
        }
    }
    throw Error(Errc::SingularCovariance, "covariance stays singular after maximum ridge");
}

double mahalanobis_sq(const GaussianModel& model, const ScoreVector& z) {
    return model.mahalanobis_sq(z.organ_scores);
}

OodVerdict detect(const GaussianModel& model, const ScoreVector& z, double level) {
    OodVerdict v;
    v.case_id = z.case_id;
    v.level = level;
    v.threshold = chi2_quantile(level, static_cast<int>(model.dim()));
    v.d_squared = mahalanobis_sq(model, z);
    v.is_ood = v.d_squared > v.threshold;
    return v;
}

void check_holdout_coverage(const PartitionPlan& plan, std::size_t case_index,
                            const std::map<std::size_t, std::size_t>& passes_per_learner) {
    std::size_t expected_passes = 0;
    for (auto learner : holdout_learners(plan, case_index)) {
        auto it = passes_per_learner.find(learner);
        if (it == passes_per_learner.end() || it->second == 0)
            throw Error(Errc::MissingHoldoutPredictions, "case " + std::to_string(case_index) +
                                                             " lacks predictions from holdout learner " +
                                                             std::to_string(learner));
        if (expected_passes == 0) expected_passes = it->second;
        if (it->second != expected_passes)
            throw Error(Errc::MissingHoldoutPredictions,
                        "case " + std::to_string(case_index) + ": holdout learner " +
                            std::to_string(learner) + " has " + std::to_string(it->second) +
                            " passes, expected " + std::to_string(expected_passes));
    }
}

std::vector<ScoreVector> conservative_training_scores(const PartitionPlan& plan,
                                                      std::span<const TrainingCase> cases,
                                                      const OrganSet& organs, int radius) {
    if (cases.size() != plan.n_cases)
        throw Error(Errc::CaseOutOfRange, "plan covers " + std::to_string(plan.n_cases) + " cases, got " +
                                              std::to_string(cases.size()));
    std::vector<ScoreVector> out;
    out.reserve(cases.size());
    for (std::size_t c = 0; c < cases.size(); ++c) {
        std::map<std::size_t, std::size_t> passes;
        for (const auto& [learner, preds] : cases[c].predictions) passes[learner] = preds.size();
        check_holdout_coverage(plan, c, passes);
        EnsembleAccumulator acc;
        for (auto learner : holdout_learners(plan, c))
            for (const auto& p : cases[c].predictions.at(learner)) acc.push(p);
        out.push_back(score_ensemble(acc, organs, radius, cases[c].case_id).scores);
    }
    return out;
}

std::string model_to_json(const GaussianModel& model) {
    nlohmann::ordered_json j;
    j["organs"] = model.organs().names;
    j["mu"] = std::vector<double>(model.mu().data(), model.mu().data() + model.mu().size());
    std::vector<double> sigma;
    for (Index r = 0; r < model.dim(); ++r)
        for (Index c = 0; c < model.dim(); ++c) sigma.push_back(model.sigma()(r, c));
    j["sigma"] = sigma;
    j["n_train"] = model.n_train();
    j["ridge_applied"] = model.ridge_applied();
    j["normalization"] = "1/N";
    return j.dump(1) + "\n";
}

GaussianModel model_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        OrganSet organs(j.at("organs").get<std::vector<std::string>>());
        const auto mu_v = j.at("mu").get<std::vector<double>>();
        const auto sigma_v = j.at("sigma").get<std::vector<double>>();
        const auto m = static_cast<Index>(mu_v.size());
        if (static_cast<Index>(sigma_v.size()) != m * m)
            throw Error(Errc::DimensionMismatch, "sigma must have M*M entries");
        if (j.contains("normalization") && j.at("normalization").get<std::string>() != "1/N")
            throw Error(Errc::ConfigInvalid, "unsupported covariance normalization");
        Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mu_v.data(), m);
        Eigen::MatrixXd sigma =
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(sigma_v.data(), m, m);
        return GaussianModel(std::move(organs), std::move(mu), std::move(sigma),
                             j.at("n_train").get<std::size_t>(), j.at("ridge_applied").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigInvalid, std::string("malformed model file: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const GaussianModel& model) {
    write_text_file(path, model_to_json(model));
}

GaussianModel load_model(const std::filesystem::path& path) {
    return model_from_json(read_text_file(path));
}

}  // namespace uq
