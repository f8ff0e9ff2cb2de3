#pragma once

#include "ctlab/coupling.hpp"
#include "ctlab/data.hpp"
#include "ctlab/losses.hpp"
#include "ctlab/model.hpp"
#include "ctlab/schedules.hpp"

#include <cstdint>
#include <string>
#include <vector>

// The experiment description: a plain-text key=value document that, together
// with a seed, fully determines a run. Canonical serialization backs the
// config digest stamped into checkpoints and manifests.

namespace ctlab {

struct RunConfig {
    // dataset
    DatasetKind dataset = DatasetKind::GaussianMixture8;
    double outlier_p = 0.01;
    double outlier_amplitude = 8.0;

    // loss
    LossKind loss = LossKind::Cauchy;
    CMode c_mode = CMode::Adaptive;
    double c0 = 0.0;  // fixed-mode override; <= 0 derives 0.00054*sqrt(d)

    // coupling
    CouplingMode coupling = CouplingMode::OT;

    // diffusion regularizer
    bool diffusion_enabled = true;
    double diffusion_r = 0.25;
    double diffusion_weight = 1.0;

    // curriculum and grid
    std::size_t s0 = 10;
    std::size_t s1 = 640;
    std::size_t total_iters = 20000;
    double t_min = 0.002;
    double t_max = 80.0;
    double rho = 7.0;

    // timestep sampling
    TimestepMode timestep_mode = TimestepMode::DiscreteLognormal;
    double p_mean = -1.1;
    double p_std = 2.0;

    // network
    std::size_t hidden = 256;
    std::size_t blocks = 4;
    std::size_t time_freqs = 16;
    double time_scale = 0.02;
    NormKind norm = NormKind::NonScalingLayerNorm;
    std::size_t gn_groups = 8;
    std::size_t in_channels = 16;
    double norm_eps = 1e-5;
    double dropout = 0.0;
    double sigma_data = 1.0;

    // optimizer
    double learning_rate = 1e-4;
    std::size_t batch_size = 256;
    double ema_mu = 0.0;

    // bookkeeping
    std::uint64_t seed = 1;
    std::size_t td_capture_every = 0;  // 0 = off
    std::size_t log_every = 100;
    std::size_t checkpoint_every = 0;  // 0 = final checkpoint only

    Dataset make_dataset() const;
    ModelConfig model_config() const;  // init seed derived from the run seed
    Curriculum curriculum() const;
    CScheduler c_scheduler() const;
    LossSpec loss_spec() const;
    DiffusionRegularizer diffusion() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& cfg);

std::uint64_t config_digest(const RunConfig& cfg);
std::string hex64(std::uint64_t v);

// Versioned checkpoint: magic, version, config digest, embedded canonical
// config text, then the flat parameter payload in enumeration order.
void save_checkpoint(const std::string& path, const RunConfig& cfg,
                     const ConsistencyModel& model);

struct Checkpoint {
    RunConfig config;
    std::vector<double> params;
};

Checkpoint load_checkpoint(const std::string& path);

// FNV-1a over raw bytes.
std::uint64_t bytes_hash(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull);
std::uint64_t file_hash(const std::string& path);

// manifest.txt: config digest, seed, and a hash per artifact.
void write_manifest(const std::string& dir, const RunConfig& cfg,
                    const std::vector<std::string>& artifacts);
void write_manifest(const std::string& dir, std::uint64_t digest, std::uint64_t seed,
                    const std::vector<std::string>& artifacts);

}  // namespace ctlab
