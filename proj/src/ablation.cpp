#include "ctlab/ablation.hpp"

#include "ctlab/analysis.hpp"
#include "ctlab/sampler.hpp"
#include "ctlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace ctlab {

const char* ablation_axis_name(AblationAxis axis) {
    switch (axis) {
        case AblationAxis::LossKind: return "loss-kind";
        case AblationAxis::NormKind: return "norm-kind";
        case AblationAxis::RThreshold: return "r-threshold";
        case AblationAxis::Coupling: return "coupling";
        case AblationAxis::CMode: return "c-mode";
    }
    return "?";
}

AblationAxis ablation_axis_from_name(const std::string& name) {
    if (name == "loss-kind") return AblationAxis::LossKind;
    if (name == "norm-kind") return AblationAxis::NormKind;
    if (name == "r-threshold") return AblationAxis::RThreshold;
    if (name == "coupling") return AblationAxis::Coupling;
    if (name == "c-mode") return AblationAxis::CMode;
    throw std::invalid_argument("unknown ablation axis: " + name);
}

RunConfig apply_variant(const RunConfig& base, AblationAxis axis, const std::string& value) {
    RunConfig cfg = base;
    switch (axis) {
        case AblationAxis::LossKind:
            cfg.loss = loss_kind_from_name(value);
            break;
        case AblationAxis::NormKind:
            cfg.norm = norm_kind_from_name(value);
            break;
        case AblationAxis::RThreshold: {
            const double r = std::stod(value);
            if (r < 0.0 || r > 1.0)
                throw std::invalid_argument("r-threshold variant outside [0, 1]: " + value);
            cfg.diffusion_r = r;
            break;
        }
        case AblationAxis::Coupling:
            cfg.coupling = coupling_mode_from_name(value);
            break;
        case AblationAxis::CMode:
            if (value == "adaptive") cfg.c_mode = CMode::Adaptive;
            else if (value == "fixed") cfg.c_mode = CMode::Fixed;
            else throw std::invalid_argument("unknown c-mode variant: " + value);
            break;
    }
    return cfg;
}

EvalResult evaluate_checkpoint(const RunConfig& cfg, const ConsistencyModel& model,
                               const EvalSettings& settings) {
    const Dataset dataset = cfg.make_dataset();
    const std::uint64_t holdout_seed = mix_seed(cfg.seed, settings.holdout_seed_stream);
    const Tensor holdout = settings.clean_holdout
                               ? dataset.sample_clean(settings.n_points, holdout_seed)
                               : dataset.sample(settings.n_points, holdout_seed);
    const std::uint64_t sample_seed = mix_seed(cfg.seed, settings.sample_seed_stream);

    SamplePlan one{1, {}, sample_seed};
    SamplePlan two{2, default_intermediate_levels(cfg, 2), sample_seed};

    EvalResult eval;
    const auto one_result = sample(model, cfg, one, settings.n_points);
    const auto two_result = sample(model, cfg, two, settings.n_points);
    eval.w2_1step = wasserstein2(one_result.points, holdout);
    eval.w2_2step = wasserstein2(two_result.points, holdout);
    if (cfg.dataset == DatasetKind::GaussianMixture8) {
        eval.coverage_1step = mode_coverage(one_result.points, dataset);
        eval.coverage_2step = mode_coverage(two_result.points, dataset);
    }
    return eval;
}

std::string ensure_run(const RunConfig& cfg, const std::string& dir, bool reuse) {
    namespace fs = std::filesystem;
    const fs::path ckpt = fs::path(dir) / "checkpoint.bin";
    if (reuse && fs::exists(ckpt)) {
        try {
            const Checkpoint ck = load_checkpoint(ckpt.string());
            if (config_digest(ck.config) == config_digest(cfg)) return dir;
        } catch (const std::exception&) {
            // fall through: retrain over the stale artifact
        }
    }
    Trainer trainer(cfg);
    trainer.run(dir);
    write_manifest(dir, cfg, {"metrics.csv", "checkpoint.bin"});
    return dir;
}

std::optional<EvalResult> AblationSummary::variant_median(const std::string& variant) const {
    std::vector<double> w1, w2, cov1, cov2;
    for (const auto& e : entries) {
        if (e.variant != variant || e.failed) continue;
        w1.push_back(e.eval.w2_1step);
        w2.push_back(e.eval.w2_2step);
        cov1.push_back(e.eval.coverage_1step);
        cov2.push_back(e.eval.coverage_2step);
    }
    if (w1.empty()) return std::nullopt;
    return EvalResult{median_of(w1), median_of(w2), median_of(cov1), median_of(cov2)};
}

double median_of(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median_of: empty");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

AblationSummary run_ablation(const AblationMatrix& matrix, const std::string& out_root,
                             bool reuse, const EvalSettings& settings) {
    if (matrix.variants.empty())
        throw std::invalid_argument("run_ablation: empty variant list");
    if (matrix.seeds.empty())
        throw std::invalid_argument("run_ablation: empty seed list");
    // validate every variant before any training starts
    for (const auto& v : matrix.variants) (void)apply_variant(matrix.base, matrix.axis, v);

    namespace fs = std::filesystem;
    fs::create_directories(out_root);

    AblationSummary summary;
    for (const auto& variant : matrix.variants) {
        for (std::uint64_t seed : matrix.seeds) {
            AblationEntry entry;
            entry.variant = variant;
            entry.seed = seed;
            entry.run_dir =
                (fs::path(out_root) / (variant + "_seed" + std::to_string(seed))).string();
            try {
                RunConfig cfg = apply_variant(matrix.base, matrix.axis, variant);
                cfg.seed = seed;
                ensure_run(cfg, entry.run_dir, reuse);
                const Checkpoint ck =
                    load_checkpoint((fs::path(entry.run_dir) / "checkpoint.bin").string());
                ConsistencyModel model(cfg.model_config());
                model.load_params(ck.params);
                entry.eval = evaluate_checkpoint(cfg, model, settings);
            } catch (const std::exception& e) {
                entry.failed = true;
                entry.error = e.what();
            }
            summary.entries.push_back(std::move(entry));
        }
    }
    return summary;
}

csv::Table ablation_table(const AblationSummary& summary) {
    csv::Table table;
    table.header = {"variant",  "seed",           "status",        "w2_1step",
                    "w2_2step", "coverage_1step", "coverage_2step"};
    std::vector<std::string> variants;
    for (const auto& e : summary.entries) {
        if (std::find(variants.begin(), variants.end(), e.variant) == variants.end())
            variants.push_back(e.variant);
        table.rows.push_back({e.variant, std::to_string(e.seed),
                              e.failed ? "failed" : "ok",
                              e.failed ? "" : csv::format_double(e.eval.w2_1step),
                              e.failed ? "" : csv::format_double(e.eval.w2_2step),
                              e.failed ? "" : csv::format_double(e.eval.coverage_1step),
                              e.failed ? "" : csv::format_double(e.eval.coverage_2step)});
    }
    for (const auto& variant : variants) {
        const auto med = summary.variant_median(variant);
        if (!med) {
            table.rows.push_back({variant, "median", "failed", "", "", "", ""});
            continue;
        }
        table.rows.push_back({variant, "median", "ok", csv::format_double(med->w2_1step),
                              csv::format_double(med->w2_2step),
                              csv::format_double(med->coverage_1step),
                              csv::format_double(med->coverage_2step)});
    }
    return table;
}

}  // namespace ctlab
