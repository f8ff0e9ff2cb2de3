#pragma once

#include "ctlab/config.hpp"
#include "ctlab/csv.hpp"

#include <optional>
#include <string>
#include <vector>

// The ablation driver: trains one run per (variant, seed), evaluates 1-step
// and 2-step sampling against held-out data, and reports per-variant medians.
// Completed runs found on disk are reused when their manifest digest matches.

namespace ctlab {

enum class AblationAxis { LossKind, NormKind, RThreshold, Coupling, CMode };

const char* ablation_axis_name(AblationAxis axis);
AblationAxis ablation_axis_from_name(const std::string& name);

struct AblationMatrix {
    RunConfig base;
    AblationAxis axis = AblationAxis::LossKind;
    std::vector<std::string> variants;
    std::vector<std::uint64_t> seeds;
};

// Every variant differs from base in exactly the swept axis.
RunConfig apply_variant(const RunConfig& base, AblationAxis axis, const std::string& value);

struct EvalSettings {
    std::size_t n_points = 512;
    std::uint64_t holdout_seed_stream = 0xE0A1;
    std::uint64_t sample_seed_stream = 0xE0A2;
    // Generation quality is measured against the clean core distribution;
    // the injected impulses are training-side contamination to survive, not
    // structure to reproduce.
    bool clean_holdout = true;
};

struct EvalResult {
    double w2_1step = 0.0;
    double w2_2step = 0.0;
    double coverage_1step = 0.0;
    double coverage_2step = 0.0;
};

EvalResult evaluate_checkpoint(const RunConfig& cfg, const ConsistencyModel& model,
                               const EvalSettings& settings = {});

struct AblationEntry {
    std::string variant;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    EvalResult eval;
    std::string run_dir;
};

struct AblationSummary {
    std::vector<AblationEntry> entries;

    // median over the non-failed seeds of one variant; empty if none finished
    std::optional<EvalResult> variant_median(const std::string& variant) const;
};

// Trains (or reuses) every variant x seed under out_root/<variant>_seed<k>.
AblationSummary run_ablation(const AblationMatrix& matrix, const std::string& out_root,
                             bool reuse, const EvalSettings& settings = {});

// Executes one configured run, reusing a matching checkpoint when allowed.
// Returns the run directory.
std::string ensure_run(const RunConfig& cfg, const std::string& dir, bool reuse);

// Per-entry rows plus one median row per variant (seed column "median").
csv::Table ablation_table(const AblationSummary& summary);

double median_of(std::vector<double> values);

}  // namespace ctlab
