#pragma once

#include "ctlab/analysis.hpp"
#include "ctlab/config.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

// The consistency-training loop: curriculum-driven grid rebuilds, timestep
// sampling, shared-noise perturbation pairs, CT loss plus the small-timestep
// diffusion regularizer, stopgrad target updates, and adaptive-moment steps.

namespace ctlab {

struct StepStats {
    double ct_loss = 0.0;
    double diff_loss = 0.0;
    bool skipped = false;
    std::vector<std::size_t> offending_samples;  // non-finite per-sample terms
    std::size_t diffusion_active_count = 0;
};

struct MetricRow {
    std::size_t k = 0;
    std::size_t nfe = 0;
    double c = 0.0;
    double ct_loss = 0.0;
    double diff_loss = 0.0;
    std::size_t skipped_steps = 0;
};

class Trainer {
public:
    explicit Trainer(const RunConfig& cfg);

    // One optimizer step on a data batch (batch x 2), then the EMA update.
    StepStats training_step(const Tensor& x0_batch);

    // theta_minus <- mu * theta_minus + (1 - mu) * theta, valuewise.
    void ema_update();

    // Full run: total_iters steps with logging, TD capture, checkpoints.
    // Writes metrics.csv, checkpoint.bin, and td_reservoir.csv (when enabled)
    // under out_dir when given.
    std::vector<MetricRow> run(const std::optional<std::string>& out_dir);

    // Evaluation-mode TD capture on the current grid; no parameters change.
    void capture_td(const Tensor& x0_batch, TDReservoir& reservoir);

    ConsistencyModel& online() { return *online_; }
    const ConsistencyModel& online() const { return *online_; }
    const ConsistencyModel& target() const { return *target_; }
    const KarrasGrid& grid() const { return grid_; }
    const RunConfig& config() const { return cfg_; }
    std::size_t iteration() const { return iter_; }
    std::size_t current_nfe() const { return nfe_; }
    double current_c_value() const { return c_; }
    std::size_t skipped_steps() const { return skipped_; }
    TDReservoir& td_reservoir() { return td_; }

private:
    void ensure_schedule();
    Tensor make_pair(const Tensor& x0, const Tensor& z,
                     const std::vector<double>& ts) const;

    RunConfig cfg_;
    Dataset dataset_;
    std::unique_ptr<ConsistencyModel> online_;
    std::unique_ptr<ConsistencyModel> target_;
    TimestepSampler sampler_;
    KarrasGrid grid_;
    std::size_t nfe_ = 0;
    double c_ = 0.0;
    std::size_t iter_ = 0;
    std::size_t skipped_ = 0;
    std::mt19937_64 dropout_rng_;

    // adaptive-moment optimizer state, one slot per parameter tensor
    struct Moments {
        std::vector<double> m, v;
    };
    std::vector<Moments> moments_;
    std::size_t adam_t_ = 0;

    TDReservoir td_;
};

// TD capture against an arbitrary interval count on a trained model pair;
// streams elementwise TD values into the reservoir tagged with n_intervals.
void capture_td_for_grid(const ConsistencyModel& online, const ConsistencyModel& target,
                         const RunConfig& cfg, std::size_t n_intervals,
                         std::size_t n_batches, std::uint64_t seed,
                         TDReservoir& reservoir);

}  // namespace ctlab
