// uq: ensemble uncertainty scoring and OOD detection from the command line.

#include <iostream>

#include <CLI11.hpp>

#include "uq/gamma.hpp"
#include "uq/ood.hpp"
#include "uq/partition.hpp"
#include "uq/phantom.hpp"
#include "uq/pipeline.hpp"
#include "uq/roc.hpp"
#include "uq/tables.hpp"
#include "uq/uqv_io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitStatistical = 4;

int exit_code(const uq::Error& e) {
    switch (uq::error_class(e.code())) {
    case uq::ErrorClass::Io: return kExitIo;
    case uq::ErrorClass::Statistical: return kExitStatistical;
    case uq::ErrorClass::Validation: break;
    }
    return kExitValidation;
}

void print_warning(std::string_view msg) { std::cerr << "warning: " << msg << "\n"; }

uq::OrganSet organs_for(const fs::path& organs_file, std::uint32_t channels) {
    if (!organs_file.empty()) return uq::load_organs(organs_file);
    return uq::phantom_organs(static_cast<int>(channels) - 1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ensemble uncertainty maps, organ scores and Mahalanobis OOD detection"};
    app.require_subcommand(1);

    // plan
    std::size_t plan_cases = 0, plan_learners = 8, plan_replication = 4;
    std::uint64_t plan_seed = 0;
    fs::path plan_out;
    auto* plan = app.add_subcommand("plan", "Assign training cases to base learners");
    plan->add_option("--cases", plan_cases, "Number of training cases")->required();
    plan->add_option("--learners", plan_learners, "Number of base learners");
    plan->add_option("--replication", plan_replication, "Learners per case");
    plan->add_option("--seed", plan_seed, "Shuffle seed");
    plan->add_option("--out", plan_out, "Output plan file")->required();

    // simulate
    uq::PhantomConfig sim;
    std::string sim_mode = "focal-artifact";
    std::size_t sim_train = 40, sim_control = 20, sim_ood = 15;
    std::uint32_t sim_dim = 64;
    fs::path sim_out;
    int sim_jobs = 1;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic phantom cohort");
    simulate->add_option("--mode", sim_mode, "OOD mode: id|focal-artifact|deformation");
    simulate->add_option("--train", sim_train, "Training cases");
    simulate->add_option("--control", sim_control, "In-distribution test cases");
    simulate->add_option("--ood", sim_ood, "OOD test cases");
    simulate->add_option("--seed", sim.seed, "Cohort seed");
    simulate->add_option("--dim", sim_dim, "Edge length of the cubic grid (>= 16)");
    simulate->add_option("--organs", sim.n_organs, "Foreground organs");
    simulate->add_option("--learners", sim.n_learners, "Base learners");
    simulate->add_option("--passes", sim.passes, "Stochastic passes per learner");
    simulate->add_option("--sigma", sim.sigma_id, "Logit noise amplitude");
    simulate->add_option("--strength", sim.ood_strength, "OOD strength");
    simulate->add_option("--jobs", sim_jobs, "Cases generated concurrently");
    simulate->add_option("--out", sim_out, "Output cohort directory")->required();

    // heatmap
    fs::path hm_manifest, hm_out, hm_consensus;
    auto* heatmap = app.add_subcommand("heatmap", "Variance map of one case's predictions");
    heatmap->add_option("--manifest", hm_manifest, "Case manifest")->required();
    heatmap->add_option("--out", hm_out, "Output UQV1 float volume")->required();
    heatmap->add_option("--consensus-out", hm_consensus, "Also write the consensus label volume");

    // scores
    fs::path sc_heatmap, sc_manifest, sc_consensus, sc_organs, sc_out;
    int sc_radius = 2;
    auto* scores = app.add_subcommand("scores", "Band-suppressed per-organ scores of one case");
    scores->add_option("--heatmap", sc_heatmap, "Variance map (UQV1)")->required();
    auto* sc_m = scores->add_option("--manifest", sc_manifest, "Case manifest (consensus from its predictions)");
    auto* sc_c = scores->add_option("--consensus", sc_consensus, "Precomputed consensus labels (UQV1)");
    sc_m->excludes(sc_c);
    scores->add_option("--boundary-radius", sc_radius, "Band radius in voxels");
    scores->add_option("--organs", sc_organs, "organs.json");
    scores->add_option("--out", sc_out, "Scores CSV")->required();

    // fit
    fs::path fit_scores, fit_out;
    auto* fit = app.add_subcommand("fit", "Fit the in-distribution Gaussian to training scores");
    fit->add_option("--scores", fit_scores, "Training scores CSV")->required();
    fit->add_option("--out", fit_out, "Model file")->required();

    // detect
    fs::path det_model, det_scores, det_out;
    double det_level = 0.9;
    auto* det = app.add_subcommand("detect", "Mahalanobis distances and OOD verdicts");
    det->add_option("--model", det_model, "Model file")->required();
    det->add_option("--scores", det_scores, "Test scores CSV")->required();
    det->add_option("--level", det_level, "Chi-squared level in (0,1)");
    det->add_option("--out", det_out, "Verdict CSV")->required();

    // eval
    fs::path ev_verdicts, ev_labels, ev_out;
    auto* ev = app.add_subcommand("eval", "ROC, AUC and sensitivity/specificity");
    ev->add_option("--verdicts", ev_verdicts, "Verdict CSV")->required();
    ev->add_option("--labels", ev_labels, "Labels CSV")->required();
    ev->add_option("--out", ev_out, "ROC CSV")->required();

    // run
    fs::path run_cohort;
    uq::RunConfig run_cfg;
    auto* run = app.add_subcommand("run", "Plan-aware train/fit/detect/evaluate loop over a cohort");
    run->add_option("--cohort", run_cohort, "Cohort directory")->required();
    run->add_option("--out", run_cfg.out_dir, "Output directory (default <cohort>/run)");
    run->add_option("--boundary-radius", run_cfg.boundary_radius, "Band radius in voxels");
    run->add_option("--level", run_cfg.level, "Chi-squared level in (0,1)");
    run->add_option("--plan", run_cfg.plan, "Override the cohort's plan file");
    run->add_option("--jobs", run_cfg.jobs, "Cases processed concurrently");

    // export-overlays
    fs::path ov_case, ov_out, ov_organs;
    int ov_radius = 2;
    auto* ov = app.add_subcommand("export-overlays", "Raw and processed max-uncertainty volumes");
    ov->add_option("--case-dir", ov_case, "Directory holding heatmap.uqv and consensus.uqv")->required();
    ov->add_option("--out", ov_out, "Output directory")->required();
    ov->add_option("--boundary-radius", ov_radius, "Band radius in voxels");
    ov->add_option("--organs", ov_organs, "organs.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        if (*plan) {
            const auto p = uq::plan_partition(plan_cases, plan_learners, plan_replication, plan_seed);
            const auto rep = uq::verify_plan(p);
            uq::save_plan(plan_out, p);
            std::cout << rep.summary() << "\n";
        } else if (*simulate) {
            sim.ood_mode = uq::parse_ood_mode(sim_mode);
            sim.dims = {sim_dim, sim_dim, sim_dim};
            const auto cohort = uq::generate_cohort(sim, sim_train, sim_control, sim_ood, sim_out, sim_jobs);
            std::cout << "wrote " << cohort.cases.size() << " cases to " << sim_out.string() << "\n";
        } else if (*heatmap) {
            const auto manifest = uq::load_case_manifest(hm_manifest);
            const auto acc = uq::accumulate_predictions(manifest.predictions);
            uq::write_volume(hm_out, acc.variance().values);
            if (!hm_consensus.empty()) uq::write_volume(hm_consensus, uq::argmax_labels(acc.mean()));
            std::cout << "variance over " << acc.count() << " predictions -> " << hm_out.string() << "\n";
        } else if (*scores) {
            const uq::UncertaintyMap umap{uq::read_float_volume(sc_heatmap), 0};
            const auto organs = organs_for(sc_organs, umap.meta().channels);
            uq::LabelVolume consensus;
            std::string case_id = sc_heatmap.stem().string();
            if (!sc_consensus.empty()) {
                consensus = uq::read_label_volume(sc_consensus);
            } else if (!sc_manifest.empty()) {
                const auto manifest = uq::load_case_manifest(sc_manifest);
                consensus = uq::argmax_labels(uq::accumulate_predictions(manifest.predictions).mean());
                case_id = manifest.case_id;
            } else {
                throw uq::Error(uq::Errc::ConfigInvalid, "scores needs --manifest or --consensus");
            }
            const auto sv = uq::suppress_and_score(umap, consensus, organs, sc_radius, case_id);
            uq::write_scores_csv(sc_out, organs, std::span(&sv, 1));
        } else if (*fit) {
            const auto table = uq::read_scores_csv(fit_scores);
            const auto model = uq::fit_gaussian(table.rows, table.organs, print_warning);
            uq::save_model(fit_out, model);
            std::cout << "fitted " << model.dim() << "-D Gaussian on " << model.n_train() << " cases";
            if (model.ridge_applied() > 0) std::cout << " (ridge " << model.ridge_applied() << ")";
            std::cout << "\n";
        } else if (*det) {
            const auto model = uq::load_model(det_model);
            const auto table = uq::read_scores_csv(det_scores);
            if (table.organs != model.organs())
                throw uq::Error(uq::Errc::DimensionMismatch, "score columns do not match the model's organs");
            std::vector<uq::OodVerdict> verdicts;
            std::size_t flagged = 0;
            for (const auto& row : table.rows) {
                verdicts.push_back(uq::detect(model, row, det_level));
                flagged += verdicts.back().is_ood ? 1 : 0;
            }
            uq::write_verdicts_csv(det_out, verdicts);
            std::cout << "threshold " << uq::chi2_quantile(det_level, static_cast<int>(model.dim())) << ", "
                      << flagged << "/" << verdicts.size() << " flagged OOD\n";
        } else if (*ev) {
            const auto verdicts = uq::read_verdicts_csv(ev_verdicts);
            const auto labels = uq::read_labels_csv(ev_labels);
            const auto joined = uq::join_labels(verdicts, labels);
            if (verdicts.empty()) throw uq::Error(uq::Errc::ConfigInvalid, "no verdicts to evaluate");
            const double threshold = verdicts.front().threshold;
            const auto curve = uq::roc_curve(joined);
            uq::write_text_file(ev_out, uq::roc_to_csv(curve));
            const auto ss = uq::sens_spec_at(joined, threshold);
            std::cout << "auc " << uq::format_double(uq::auc(joined)) << "\n"
                      << "threshold " << uq::format_double(threshold) << "\n"
                      << "sensitivity " << uq::format_double(ss.sensitivity) << "\n"
                      << "specificity " << uq::format_double(ss.specificity) << "\n";
        } else if (*run) {
            run_cfg.warn = print_warning;
            const auto summary = uq::run_pipeline(run_cohort, run_cfg);
            std::cout << summary.to_json();
        } else if (*ov) {
            const auto umeta = uq::read_float_volume(ov_case / "heatmap.uqv").meta();
            const auto organs = organs_for(ov_organs, umeta.channels);
            const auto paths = uq::export_overlays(ov_case, ov_out, organs, ov_radius);
            std::cout << paths.raw.string() << "\n" << paths.processed.string() << "\n";
        }
    } catch (const uq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
