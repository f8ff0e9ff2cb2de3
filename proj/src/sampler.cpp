#include "ctlab/sampler.hpp"

#include "ctlab/data.hpp"
#include "ctlab/schedules.hpp"

#include <cmath>
#include <stdexcept>

namespace ctlab {

std::mt19937_64 sample_noise_stream(std::uint64_t seed, std::size_t index) {
    return std::mt19937_64(mix_seed(seed, 0x5A4D50ull + index));
}

std::vector<double> default_intermediate_levels(const RunConfig& cfg, std::size_t steps) {
    if (steps <= 1) return {};
    if (steps == 2) {
        const KarrasGrid final_grid = build_grid(cfg.t_min, cfg.t_max, cfg.rho, cfg.s1 + 1);
        const double target = std::sqrt(cfg.t_min * cfg.t_max);
        double best = final_grid.levels[1];
        for (double level : final_grid.levels)
            if (level > cfg.t_min && level < cfg.t_max &&
                std::abs(level - target) < std::abs(best - target))
                best = level;
        return {best};
    }
    const KarrasGrid grid = build_grid(cfg.t_min, cfg.t_max, cfg.rho, steps + 1);
    std::vector<double> levels;
    for (std::size_t i = grid.n_levels - 1; i-- > 1;) levels.push_back(grid.levels[i]);
    return levels;
}

SampleResult sample(const ConsistencyModel& model, const RunConfig& cfg,
                    const SamplePlan& plan, std::size_t n) {
    if (n < 1) throw std::invalid_argument("sample: need n >= 1");
    if (plan.steps < 1) throw std::invalid_argument("sample: need at least one step");
    if (plan.intermediate_levels.size() != plan.steps - 1)
        throw std::invalid_argument("sample: plan needs exactly steps-1 intermediate levels");
    const double sigma_min = cfg.t_min, sigma_max = cfg.t_max;
    double prev = sigma_max;
    for (double level : plan.intermediate_levels) {
        if (!(level > sigma_min) || !(level < sigma_max) || !(level < prev))
            throw std::invalid_argument(
                "sample: intermediate levels must strictly decrease within "
                "(sigma_min, sigma_max)");
        prev = level;
    }

    const std::size_t dim = model.config().data_dim;
    std::vector<std::mt19937_64> streams;
    streams.reserve(n);
    for (std::size_t i = 0; i < n; ++i) streams.push_back(sample_noise_stream(plan.seed, i));
    std::normal_distribution<double> normal(0.0, 1.0);

    // x = sigma_max * z
    std::vector<double> x(n * dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < dim; ++c) x[i * dim + c] = sigma_max * normal(streams[i]);

    SampleResult result;
    Tensor x0_hat = model.forward(Tensor({n, dim}, std::move(x)),
                                  std::vector<double>(n, sigma_max));
    ++result.nfe;

    for (double level : plan.intermediate_levels) {
        // re-noise the current estimate with fresh noise
        const double amount = std::sqrt(level * level - sigma_min * sigma_min);
        std::vector<double> renoised(n * dim);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < dim; ++c)
                renoised[i * dim + c] =
                    x0_hat.data()[i * dim + c] + amount * normal(streams[i]);
        x0_hat = model.forward(Tensor({n, dim}, std::move(renoised)),
                               std::vector<double>(n, level));
        ++result.nfe;
    }

    for (double v : x0_hat.data())
        if (!std::isfinite(v))
            throw std::runtime_error("sample: non-finite output; checkpoint unusable");
    result.points = std::move(x0_hat);
    return result;
}

}  // namespace ctlab
