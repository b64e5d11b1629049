#include "uq/phantom.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include <Eigen/Core>

#include "uq/parallel.hpp"
#include "uq/partition.hpp"
#include "uq/tables.hpp"
#include "uq/uqv_io.hpp"

namespace uq {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t case_seed, std::uint64_t a, std::uint64_t b = 0) {
    return std::mt19937_64(splitmix64(case_seed ^ splitmix64(a * 0x100000001b3ULL + b)));
}

enum Stream : std::uint64_t { kGeometry = 1, kLearnerNoise = 2, kPassNoise = 3, kArtifact = 4, kWarp = 5 };

struct Ellipsoid {
    Eigen::Vector3d center;
    Eigen::Vector3d semi;

    // Approximate signed distance, positive inside.
    double signed_distance(const Eigen::Vector3d& p) const {
        const double rho = ((p - center).array() / semi.array()).matrix().norm();
        return (1.0 - rho) * semi.minCoeff();
    }
};

std::array<int, 3> cell_layout(int n) {
    const int gx = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9));
    const int gy = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n) / gx) - 1e-9));
    const int gz = (n + gx * gy - 1) / (gx * gy);
    return {gx, gy, gz};
}

std::vector<Ellipsoid> place_organs(const PhantomConfig& cfg, std::uint64_t case_seed) {
    auto rng = stream(case_seed, kGeometry);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto layout = cell_layout(cfg.n_organs);
    std::vector<Ellipsoid> organs;
    for (int m = 0; m < cfg.n_organs; ++m) {
        const int cell[3] = {m % layout[0], (m / layout[0]) % layout[1], m / (layout[0] * layout[1])};
        Ellipsoid e;
        for (int a = 0; a < 3; ++a) {
            const double size = static_cast<double>(cfg.dims[a]) / layout[a];
            const double semi = std::max(1.5, (cfg.organ_size + cfg.organ_size_spread * unit(rng)) * size);
            const double margin = 0.5 * size - semi - 3.0;
            const double jitter = margin > 0 ? (2.0 * unit(rng) - 1.0) * margin : 0.0;
            e.semi(a) = semi;
            e.center(a) = (cell[a] + 0.5) * size - 0.5 + jitter;
        }
        organs.push_back(e);
    }
    return organs;
}

// Trilinear upsampling of iid N(0, amp^2) control points spaced `cell` voxels apart.
Eigen::ArrayXf smooth_noise(const std::array<std::uint32_t, 3>& dims, double cell, double amp,
                            std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::array<Index, 3> n{}, g{};
    for (int a = 0; a < 3; ++a) {
        n[a] = dims[a];
        g[a] = static_cast<Index>(std::floor((n[a] - 1) / cell)) + 2;
    }
    Eigen::ArrayXf coarse(g[0] * g[1] * g[2]);
    for (Index i = 0; i < coarse.size(); ++i) coarse(i) = static_cast<float>(amp * normal(rng));

    // Interpolation weights along each axis.
    auto weights = [&](int a) {
        std::vector<std::pair<Index, float>> w(static_cast<std::size_t>(n[a]));
        for (Index x = 0; x < n[a]; ++x) {
            const double u = x / cell;
            const auto i = static_cast<Index>(std::floor(u));
            w[static_cast<std::size_t>(x)] = {i, static_cast<float>(u - i)};
        }
        return w;
    };
    const auto wx = weights(0), wy = weights(1), wz = weights(2);

    // x, then y, then z; shapes (nx,gy,gz) -> (nx,ny,gz) -> (nx,ny,nz).
    Eigen::ArrayXf sx(n[0] * g[1] * g[2]);
    for (Index k = 0; k < g[1] * g[2]; ++k)
        for (Index x = 0; x < n[0]; ++x) {
            const auto [i, f] = wx[static_cast<std::size_t>(x)];
            sx(x + n[0] * k) = (1 - f) * coarse(i + g[0] * k) + f * coarse(i + 1 + g[0] * k);
        }
    Eigen::ArrayXf sy(n[0] * n[1] * g[2]);
    for (Index z = 0; z < g[2]; ++z)
        for (Index y = 0; y < n[1]; ++y) {
            const auto [j, f] = wy[static_cast<std::size_t>(y)];
            const auto lo = sx.segment(n[0] * (j + g[1] * z), n[0]);
            const auto hi = sx.segment(n[0] * (j + 1 + g[1] * z), n[0]);
            sy.segment(n[0] * (y + n[1] * z), n[0]) = (1 - f) * lo + f * hi;
        }
    const Index plane = n[0] * n[1];
    Eigen::ArrayXf out(plane * n[2]);
    for (Index z = 0; z < n[2]; ++z) {
        const auto [k, f] = wz[static_cast<std::size_t>(z)];
        out.segment(plane * z, plane) = (1 - f) * sy.segment(plane * k, plane) + f * sy.segment(plane * (k + 1), plane);
    }
    return out;
}

GridMeta case_meta(const PhantomConfig& cfg) {
    GridMeta meta;
    meta.dims = cfg.dims;
    meta.spacing = {1.0, 1.0, 1.0};
    meta.channels = static_cast<std::uint32_t>(cfg.n_organs + 1);
    return meta;
}

using Logits = Eigen::ArrayXXf;  // voxels x channels

// Class logits of the organ layout sampled at p (+margin inside, -margin outside).
template <typename Displace>
Logits organ_logits(const PhantomConfig& cfg, const std::vector<Ellipsoid>& organs, Displace&& displace) {
    const GridMeta meta = case_meta(cfg);
    Logits logits(meta.voxels(), meta.channels);
    const double k = cfg.logit_margin, w = cfg.edge_width;
    Index v = 0;
    for (Index z = 0; z < cfg.dims[2]; ++z)
        for (Index y = 0; y < cfg.dims[1]; ++y)
            for (Index x = 0; x < cfg.dims[0]; ++x, ++v) {
                const Eigen::Vector3d p = displace(v, Eigen::Vector3d(double(x), double(y), double(z)));
                double nearest = -std::numeric_limits<double>::infinity();
                for (std::size_t m = 0; m < organs.size(); ++m) {
                    const double d = organs[m].signed_distance(p);
                    nearest = std::max(nearest, d);
                    logits(v, static_cast<Index>(m + 1)) = static_cast<float>(k * std::tanh(d / w));
                }
                logits(v, 0) = static_cast<float>(-k * std::tanh(nearest / w));
            }
    return logits;
}

void softmax_into(const Logits& logits, ProbVolume& out) {
    auto& d = out.data();
    const Index channels = logits.cols();
    for (Index v = 0; v < logits.rows(); ++v) {
        float peak = logits(v, 0);
        for (Index c = 1; c < channels; ++c) peak = std::max(peak, logits(v, c));
        float sum = 0.0f;
        for (Index c = 0; c < channels; ++c) {
            const float e = std::exp(logits(v, c) - peak);
            d(v, c) = e;
            sum += e;
        }
        const float inv = 1.0f / sum;
        for (Index c = 0; c < channels; ++c) d(v, c) *= inv;
    }
}

}  // namespace

std::string_view ood_mode_name(OodMode mode) {
    switch (mode) {
    case OodMode::None: return "none";
    case OodMode::FocalArtifact: return "focal-artifact";
    case OodMode::Deformation: return "deformation";
    }
    return "none";
}

OodMode parse_ood_mode(std::string_view name) {
    if (name == "none" || name == "id") return OodMode::None;
    if (name == "focal-artifact") return OodMode::FocalArtifact;
    if (name == "deformation") return OodMode::Deformation;
    throw Error(Errc::ConfigInvalid, "unknown OOD mode " + std::string(name));
}

void PhantomConfig::validate() const {
    for (auto d : dims)
        if (d < 16) throw Error(Errc::ConfigInvalid, "phantom dims must be >= 16");
    if (n_organs < 1 || n_organs > 255) throw Error(Errc::ConfigInvalid, "n_organs must be in 1..255");
    if (n_learners < 2) throw Error(Errc::ConfigInvalid, "need at least two learners");
    if (passes < 1) throw Error(Errc::ConfigInvalid, "need at least one pass per learner");
    if (!(sigma_id >= 0.0)) throw Error(Errc::ConfigInvalid, "sigma_id must be non-negative");
    if (!(ood_strength >= 0.0)) throw Error(Errc::ConfigInvalid, "ood_strength must be non-negative");
    if (!(logit_margin > 0.0) || !(edge_width > 0.0) || !(learner_cell > 0.0) || !(pass_cell > 0.0) ||
        !(artifact_radius > 0.0) || !(displacement_scale >= 0.0))
        throw Error(Errc::ConfigInvalid, "phantom shape constants must be positive");
    if (!(organ_size > 0.0) || !(organ_size_spread >= 0.0) || organ_size + organ_size_spread > 0.45)
        throw Error(Errc::ConfigInvalid, "organ sizes must lie in (0, 0.45] of a layout cell");
}

OrganSet phantom_organs(int n_organs) {
    if (n_organs == 6)
        return OrganSet({"bladder", "prostate", "rectum", "femoral_head_left", "femoral_head_right",
                         "seminal_vesicles"});
    std::vector<std::string> names;
    for (int m = 1; m <= n_organs; ++m) names.push_back("organ_" + std::to_string(m));
    return OrganSet(std::move(names));
}

std::uint64_t case_seed(std::uint64_t cohort_seed, CaseRole role, std::size_t index) {
    return splitmix64(cohort_seed ^ splitmix64((static_cast<std::uint64_t>(role) + 1) << 40 | index));
}

LabelVolume generate_case(const PhantomConfig& cfg, std::uint64_t seed, const PredictionSink& sink) {
    cfg.validate();
    const GridMeta meta = case_meta(cfg);
    const auto organs = place_organs(cfg, seed);
    const auto identity = [](Index, const Eigen::Vector3d& p) { return p; };
    const Logits clean = organ_logits(cfg, organs, identity);
    const Index channels = meta.channels;

    LabelVolume truth(meta.with_channels(1));
    for (Index v = 0; v < clean.rows(); ++v) {
        Index best = 0;
        for (Index c = 1; c < channels; ++c)
            if (clean(v, c) > clean(v, best)) best = c;
        truth(0, v) = static_cast<std::uint8_t>(best);
    }

    // Focal artifact: a ball centred on the surface of one organ.
    Eigen::ArrayXf taper;
    if (cfg.ood_mode == OodMode::FocalArtifact) {
        auto rng = stream(seed, kArtifact);
        std::uniform_int_distribution<int> pick(0, cfg.n_organs - 1);
        std::normal_distribution<double> normal(0.0, 1.0);
        const auto& organ = organs[static_cast<std::size_t>(pick(rng))];
        Eigen::Vector3d dir(normal(rng), normal(rng), normal(rng));
        dir.normalize();
        const Eigen::Vector3d centre = organ.center + (dir.array() * organ.semi.array()).matrix();
        const double r2 = cfg.artifact_radius * cfg.artifact_radius;
        taper.setZero(meta.voxels());
        Index v = 0;
        for (Index z = 0; z < cfg.dims[2]; ++z)
            for (Index y = 0; y < cfg.dims[1]; ++y)
                for (Index x = 0; x < cfg.dims[0]; ++x, ++v) {
                    const double d2 = (Eigen::Vector3d(double(x), double(y), double(z)) - centre).squaredNorm();
                    if (d2 < r2) taper(v) = static_cast<float>(1.0 - d2 / r2);
                }
    }

    ProbVolume pred(meta);
    Logits base(clean.rows(), channels);
    for (int l = 0; l < cfg.n_learners; ++l) {
        if (cfg.ood_mode == OodMode::Deformation && cfg.ood_strength > 0.0) {
            auto rng = stream(seed, kWarp, static_cast<std::uint64_t>(l));
            const double amp = cfg.ood_strength * cfg.displacement_scale;
            std::array<Eigen::ArrayXf, 3> disp;
            for (auto& d : disp) d = smooth_noise(cfg.dims, cfg.learner_cell, amp, rng);
            base = organ_logits(cfg, organs, [&](Index v, const Eigen::Vector3d& p) {
                return Eigen::Vector3d(p.x() + disp[0](v), p.y() + disp[1](v), p.z() + disp[2](v));
            });
        } else {
            base = clean;
        }
        {
            auto rng = stream(seed, kLearnerNoise, static_cast<std::uint64_t>(l));
            for (Index c = 0; c < channels; ++c)
                base.col(c) += smooth_noise(cfg.dims, cfg.learner_cell, cfg.sigma_id, rng);
        }
        if (taper.size() > 0) {
            auto rng = stream(seed, kArtifact, static_cast<std::uint64_t>(l) + 1);
            std::normal_distribution<double> normal(0.0, cfg.ood_strength);
            for (Index c = 0; c < channels; ++c) base.col(c) += static_cast<float>(normal(rng)) * taper;
        }
        for (int p = 0; p < cfg.passes; ++p) {
            auto rng = stream(seed, kPassNoise, static_cast<std::uint64_t>(l) * 65536 + static_cast<std::uint64_t>(p));
            Logits logits = base;
            for (Index c = 0; c < channels; ++c)
                logits.col(c) += smooth_noise(cfg.dims, cfg.pass_cell, cfg.sigma_id, rng);
            softmax_into(logits, pred);
            sink(l, p, ProbVolume(pred));
        }
    }
    return truth;
}

PhantomCase generate_case(const PhantomConfig& cfg, std::uint64_t seed) {
    PhantomCase out;
    out.predictions.reserve(static_cast<std::size_t>(cfg.n_learners * cfg.passes));
    out.truth = generate_case(cfg, seed, [&](int, int, ProbVolume&& p) { out.predictions.push_back(std::move(p)); });
    return out;
}

PhantomCase generate_case(const PhantomConfig& cfg, std::uint64_t seed, OodMode mode) {
    PhantomConfig c = cfg;
    c.ood_mode = mode;
    return generate_case(c, seed);
}

CohortManifest generate_cohort(const PhantomConfig& cfg, std::size_t n_train, std::size_t n_control,
                               std::size_t n_ood, const std::filesystem::path& out_dir, int jobs) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::IoFailure, "cannot create " + out_dir.string());

    CohortManifest cohort;
    cohort.organs = phantom_organs(cfg.n_organs);
    cohort.seed = cfg.seed;

    struct Job {
        CaseRole role;
        std::size_t index;
        OodMode mode;
    };
    std::vector<Job> work;
    for (std::size_t i = 0; i < n_train; ++i) work.push_back({CaseRole::Train, i, OodMode::None});
    for (std::size_t i = 0; i < n_control; ++i) work.push_back({CaseRole::Control, i, OodMode::None});
    for (std::size_t i = 0; i < n_ood; ++i) work.push_back({CaseRole::Ood, i, cfg.ood_mode});

    auto case_id = [](const Job& j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s_%04zu", std::string(role_name(j.role)).c_str(), j.index);
        return std::string(buf);
    };

    for (const auto& j : work) {
        CohortCase c;
        c.case_id = case_id(j);
        c.role = j.role;
        c.subset = j.role == CaseRole::Ood ? std::string(ood_mode_name(j.mode)) : std::string(role_name(j.role));
        c.manifest = out_dir / "cases" / c.case_id / "manifest.json";
        if (j.role == CaseRole::Train) c.plan_index = j.index;
        cohort.cases.push_back(std::move(c));
    }

    if (n_train > 0) {
        const auto plan = plan_partition(n_train, static_cast<std::size_t>(cfg.n_learners),
                                         static_cast<std::size_t>(cfg.n_learners / 2), cfg.seed);
        cohort.plan = out_dir / "plan.json";
        save_plan(cohort.plan, plan);
    }

    parallel_for(work.size(), jobs, [&](std::size_t i) {
        const auto& job = work[i];
        const auto& entry = cohort.cases[i];
        const auto dir = entry.manifest.parent_path();
        PhantomConfig c = cfg;
        c.ood_mode = job.mode;
        CaseManifest manifest{entry.case_id, {}};
        const auto truth = generate_case(c, case_seed(cfg.seed, job.role, job.index), [&](int l, int p, ProbVolume&& pred) {
            const std::string name = "pred_l" + std::to_string(l) + "_p" + std::to_string(p) + ".uqv";
            write_volume(dir / name, pred);
            manifest.predictions.push_back({name, static_cast<std::size_t>(l), static_cast<std::size_t>(p)});
        });
        write_volume(dir / "truth.uqv", truth);
        save_case_manifest(entry.manifest, manifest);
    });

    std::vector<CaseLabel> labels;
    for (const auto& c : cohort.cases)
        if (c.role != CaseRole::Train) labels.push_back({c.case_id, c.role == CaseRole::Ood ? 1 : 0});
    cohort.labels = out_dir / "labels.csv";
    write_text_file(cohort.labels, labels_to_csv(labels));
    write_text_file(out_dir / "organs.json", organs_to_json(cohort.organs));
    save_cohort(out_dir, cohort);
    return cohort;
}

}  // namespace uq
