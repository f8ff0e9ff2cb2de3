#include "ctlab/trainer.hpp"

#include "ctlab/csv.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace ctlab {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// sub-stream ids for seed derivation
enum SeedStream : std::uint64_t {
    kStreamModelInit = 3,
    kStreamNoise = 4,
    kStreamData = 5,
    kStreamDropout = 6,
    kStreamEvalTimestep = 7,
    kStreamEvalNoise = 8,
    kStreamEvalData = 9,
    kStreamTimestep = 10,
};

}  // namespace

Trainer::Trainer(const RunConfig& cfg)
    : cfg_(cfg),
      dataset_(cfg.make_dataset()),
      sampler_(cfg.timestep_mode, mix_seed(cfg.seed, kStreamTimestep), cfg.p_mean, cfg.p_std),
      dropout_rng_(mix_seed(cfg.seed, kStreamDropout)),
      td_(1000000, mix_seed(cfg.seed, 99)) {
    if (cfg_.ema_mu < 0.0 || cfg_.ema_mu >= 1.0)
        throw std::invalid_argument("Trainer: ema_mu outside [0, 1)");
    online_ = std::make_unique<ConsistencyModel>(cfg_.model_config());
    target_ = std::make_unique<ConsistencyModel>(cfg_.model_config());
    target_->copy_params_from(*online_);
    moments_.resize(online_->params().size());
    for (std::size_t i = 0; i < moments_.size(); ++i) {
        moments_[i].m.assign(online_->params()[i].size(), 0.0);
        moments_[i].v.assign(online_->params()[i].size(), 0.0);
    }
    ensure_schedule();
}

void Trainer::ensure_schedule() {
    const std::size_t probe = std::min(iter_, cfg_.total_iters - 1);
    const std::size_t nfe = nfe_at(cfg_.curriculum(), probe);
    if (nfe != nfe_) {
        nfe_ = nfe;
        grid_ = build_grid(cfg_.t_min, cfg_.t_max, cfg_.rho, nfe_);
    }
    c_ = current_c(cfg_.c_scheduler(), nfe_, Dataset::kDim);
}

Tensor Trainer::make_pair(const Tensor& x0, const Tensor& z,
                          const std::vector<double>& ts) const {
    return perturb_rows(x0, z, ts);
}

StepStats Trainer::training_step(const Tensor& x0) {
    if (iter_ >= cfg_.total_iters)
        throw std::out_of_range("training_step: run already completed");
    if (x0.shape().size() != 2 || x0.shape()[1] != Dataset::kDim)
        throw std::invalid_argument("training_step: batch must be (B x 2)");
    ensure_schedule();

    const std::size_t batch = x0.shape()[0];
    std::vector<std::size_t> idx(batch);
    std::vector<double> t_lo(batch), t_hi(batch), lam(batch);
    for (std::size_t r = 0; r < batch; ++r) {
        idx[r] = sampler_.sample(grid_);
        t_lo[r] = grid_.level(idx[r]);
        t_hi[r] = grid_.level(idx[r] + 1);
        lam[r] = weight(grid_, idx[r]);
    }

    Tensor z = gaussian_batch(batch, Dataset::kDim,
                              mix_seed(mix_seed(cfg_.seed, kStreamNoise), iter_));
    z = couple_batch(x0, z, cfg_.coupling);

    // one shared z per pair
    Tensor x_lo = make_pair(x0, z, t_lo);
    Tensor x_hi = make_pair(x0, z, t_hi);

    // target branch runs off-tape: gradients cannot reach theta_minus
    Tensor target_out = target_->forward(x_lo, t_lo);

    const DiffusionRegularizer reg = cfg_.diffusion();
    std::vector<std::size_t> active;
    if (reg.enabled)
        for (std::size_t r = 0; r < batch; ++r)
            if (diffusion_active(idx[r], nfe_, reg.r)) active.push_back(r);

    StepStats stats;
    stats.diffusion_active_count = active.size();

    Tape tape;
    Tensor ct, diff, total;
    Tensor d_vec, diff_vec;
    {
        Tape::Scope scope(tape);
        Tensor online_out = online_->forward(x_hi, t_hi, &dropout_rng_);
        d_vec = metric_rowwise(cfg_.loss_spec(), online_out, target_out, c_);
        Tensor weighted = mul(d_vec, Tensor({batch}, lam));
        ct = mean(weighted);
        total = ct;
        if (!active.empty()) {
            std::vector<double> ts_act(active.size());
            for (std::size_t a = 0; a < active.size(); ++a) ts_act[a] = t_lo[active[a]];
            Tensor out_act = online_->forward(take_rows(x_lo, active), ts_act, &dropout_rng_);
            diff_vec = rowwise_square_norm(sub(out_act, take_rows(x0, active)));
            diff = scale(sum(diff_vec), cfg_.diffusion_weight / (double)batch);
            total = add(ct, diff);
        }
    }

    stats.ct_loss = ct.item();
    stats.diff_loss = diff.defined() ? diff.item() : 0.0;
    const double total_val = total.item();
    if (!std::isfinite(total_val)) {
        for (std::size_t r = 0; r < batch; ++r)
            if (!std::isfinite(lam[r] * d_vec.data()[r])) stats.offending_samples.push_back(r);
        if (diff_vec.defined())
            for (std::size_t a = 0; a < diff_vec.size(); ++a)
                if (!std::isfinite(diff_vec.data()[a]))
                    stats.offending_samples.push_back(active[a]);
        std::sort(stats.offending_samples.begin(), stats.offending_samples.end());
        stats.offending_samples.erase(
            std::unique(stats.offending_samples.begin(), stats.offending_samples.end()),
            stats.offending_samples.end());
        stats.skipped = true;
        ++skipped_;
        tape.clear();
        ++iter_;
        ema_update();
        return stats;
    }

    for (auto& p : online_->params()) p.zero_grad();
    tape.backward(total);

    ++adam_t_;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, (double)adam_t_);
    const double bc2 = 1.0 - std::pow(kAdamBeta2, (double)adam_t_);
    auto& params = online_->params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i].ensure_grad();
        const auto& g = params[i].grad();
        auto& m = moments_[i].m;
        auto& v = moments_[i].v;
        auto& w = params[i].data();
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = kAdamBeta1 * m[j] + (1.0 - kAdamBeta1) * g[j];
            v[j] = kAdamBeta2 * v[j] + (1.0 - kAdamBeta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            w[j] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + kAdamEps);
        }
    }

    ++iter_;
    ema_update();
    return stats;
}

void Trainer::ema_update() {
    const double mu = cfg_.ema_mu;
    if (mu < 0.0 || mu >= 1.0)
        throw std::invalid_argument("ema_update: mu outside [0, 1)");
    auto& src = online_->params();
    auto& dst = target_->params();
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (mu == 0.0) {
            dst[i].data() = src[i].data();
            continue;
        }
        auto& d = dst[i].data();
        const auto& s = src[i].data();
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = mu * d[j] + (1.0 - mu) * s[j];
    }
}

void Trainer::capture_td(const Tensor& x0, TDReservoir& reservoir) {
    ensure_schedule();
    const std::size_t batch = x0.shape()[0];
    TimestepSampler eval_sampler(cfg_.timestep_mode,
                                 mix_seed(mix_seed(cfg_.seed, kStreamEvalTimestep), iter_),
                                 cfg_.p_mean, cfg_.p_std);
    std::vector<double> t_lo(batch), t_hi(batch);
    for (std::size_t r = 0; r < batch; ++r) {
        const std::size_t i = eval_sampler.sample(grid_);
        t_lo[r] = grid_.level(i);
        t_hi[r] = grid_.level(i + 1);
    }
    Tensor z = gaussian_batch(batch, Dataset::kDim,
                              mix_seed(mix_seed(cfg_.seed, kStreamEvalNoise), iter_));
    Tensor x_lo = make_pair(x0, z, t_lo);
    Tensor x_hi = make_pair(x0, z, t_hi);
    Tensor td = sub(online_->forward(x_hi, t_hi), target_->forward(x_lo, t_lo));
    reservoir.add_batch(nfe_ - 1, td.data());
}

std::vector<MetricRow> Trainer::run(const std::optional<std::string>& out_dir) {
    namespace fs = std::filesystem;
    if (out_dir) fs::create_directories(*out_dir);

    std::vector<MetricRow> rows;
    for (std::size_t k = 0; k < cfg_.total_iters; ++k) {
        Tensor x0 = dataset_.sample(cfg_.batch_size,
                                    mix_seed(mix_seed(cfg_.seed, kStreamData), k));
        StepStats stats = training_step(x0);

        if (cfg_.td_capture_every > 0 && k % cfg_.td_capture_every == 0) {
            Tensor x0_eval = dataset_.sample(
                cfg_.batch_size, mix_seed(mix_seed(cfg_.seed, kStreamEvalData), k));
            capture_td(x0_eval, td_);
        }

        if (k % cfg_.log_every == 0 || k + 1 == cfg_.total_iters)
            rows.push_back({k, nfe_, c_, stats.ct_loss, stats.diff_loss, skipped_});

        if (out_dir && cfg_.checkpoint_every > 0 && k > 0 &&
            k % cfg_.checkpoint_every == 0) {
            try {
                save_checkpoint((fs::path(*out_dir) / ("ckpt_" + std::to_string(k) + ".bin")).string(),
                                cfg_, *online_);
            } catch (const std::exception& e) {
                throw std::runtime_error("iteration " + std::to_string(k) + ": " + e.what());
            }
        }
    }

    if (out_dir) {
        try {
            csv::Table table;
            table.header = {"k", "nfe", "c", "ct_loss", "diff_loss", "skipped_steps"};
            for (const auto& row : rows)
                table.rows.push_back({std::to_string(row.k), std::to_string(row.nfe),
                                      csv::format_double(row.c), csv::format_double(row.ct_loss),
                                      csv::format_double(row.diff_loss),
                                      std::to_string(row.skipped_steps)});
            csv::write((fs::path(*out_dir) / "metrics.csv").string(), table);
            save_checkpoint((fs::path(*out_dir) / "checkpoint.bin").string(), cfg_, *online_);
            if (!td_.empty())
                td_.save_csv((fs::path(*out_dir) / "td_reservoir.csv").string());
        } catch (const std::exception& e) {
            throw std::runtime_error("iteration " + std::to_string(cfg_.total_iters) +
                                     " (finalize): " + e.what());
        }
    }
    return rows;
}

void capture_td_for_grid(const ConsistencyModel& online, const ConsistencyModel& target,
                         const RunConfig& cfg, std::size_t n_intervals,
                         std::size_t n_batches, std::uint64_t seed,
                         TDReservoir& reservoir) {
    const KarrasGrid grid = build_grid(cfg.t_min, cfg.t_max, cfg.rho, n_intervals + 1);
    TimestepSampler sampler(cfg.timestep_mode, mix_seed(seed, 11), cfg.p_mean, cfg.p_std);
    const Dataset dataset = cfg.make_dataset();
    const std::size_t batch = cfg.batch_size;
    for (std::size_t b = 0; b < n_batches; ++b) {
        Tensor x0 = dataset.sample(batch, mix_seed(mix_seed(seed, 12), b));
        Tensor z = gaussian_batch(batch, Dataset::kDim, mix_seed(mix_seed(seed, 13), b));
        std::vector<double> t_lo(batch), t_hi(batch);
        for (std::size_t r = 0; r < batch; ++r) {
            const std::size_t i = sampler.sample(grid);
            t_lo[r] = grid.level(i);
            t_hi[r] = grid.level(i + 1);
        }
        Tensor td = sub(online.forward(perturb_rows(x0, z, t_hi), t_hi),
                        target.forward(perturb_rows(x0, z, t_lo), t_lo));
        reservoir.add_batch(n_intervals, td.data());
    }
}

}  // namespace ctlab
