#include "ctlab/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ctlab {

double KarrasGrid::level(std::size_t i) const {
    if (i < 1 || i > n_levels)
        throw std::out_of_range("KarrasGrid::level: index " + std::to_string(i) +
                                " outside [1, " + std::to_string(n_levels) + "]");
    return levels[i - 1];
}

KarrasGrid build_grid(double t_min, double t_max, double rho, std::size_t n) {
    if (!(t_min > 0.0) || !(t_min < t_max))
        throw std::invalid_argument("build_grid: need 0 < t_min < t_max");
    if (rho < 1.0) throw std::invalid_argument("build_grid: need rho >= 1");
    if (n < 2) throw std::invalid_argument("build_grid: need at least 2 levels");

    KarrasGrid grid;
    grid.t_min = t_min;
    grid.t_max = t_max;
    grid.rho = rho;
    grid.n_levels = n;
    grid.levels.resize(n);

    const double lo = std::pow(t_min, 1.0 / rho);
    const double hi = std::pow(t_max, 1.0 / rho);
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(n - 1);
        grid.levels[i] = std::pow(lo + frac * (hi - lo), rho);
    }
    // endpoints are exact by contract
    grid.levels.front() = t_min;
    grid.levels.back() = t_max;
    return grid;
}

std::size_t Curriculum::epoch_len() const {
    if (s0 == 0 || s1 < s0) throw std::invalid_argument("Curriculum: need 0 < s0 <= s1");
    if (total_iters == 0) throw std::invalid_argument("Curriculum: total_iters unset");
    const std::size_t doublings =
        static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(s1 / s0))));
    return total_iters / (doublings + 1);
}

std::size_t nfe_at(const Curriculum& cur, std::size_t k) {
    if (k >= cur.total_iters)
        throw std::out_of_range("nfe_at: iteration " + std::to_string(k) +
                                " outside [0, " + std::to_string(cur.total_iters) + ")");
    const std::size_t kp = cur.epoch_len();
    const std::size_t stage = k / kp;
    std::size_t steps = cur.s0;
    for (std::size_t j = 0; j < stage && steps < cur.s1; ++j) steps *= 2;
    return std::min(steps, cur.s1) + 1;
}

std::vector<double> lognormal_pmf(const KarrasGrid& grid, double p_mean, double p_std) {
    const std::size_t n = grid.n_levels;
    std::vector<double> pmf(n - 1);
    const double denom = std::sqrt(2.0) * p_std;
    double total = 0.0;
    for (std::size_t i = 0; i < n - 1; ++i) {
        const double hi = std::erf((std::log(grid.levels[i + 1]) - p_mean) / denom);
        const double lo = std::erf((std::log(grid.levels[i]) - p_mean) / denom);
        pmf[i] = hi - lo;
        total += pmf[i];
    }
    for (double& p : pmf) p /= total;
    return pmf;
}

TimestepSampler::TimestepSampler(TimestepMode mode, std::uint64_t seed,
                                 double p_mean, double p_std)
    : mode_(mode), p_mean_(p_mean), p_std_(p_std), rng_(seed) {}

std::size_t TimestepSampler::sample(const KarrasGrid& grid) {
    const std::size_t n = grid.n_levels;
    if (n < 2) throw std::invalid_argument("sample_timestep: grid has fewer than 2 levels");
    if (mode_ == TimestepMode::Uniform) {
        std::uniform_int_distribution<std::size_t> dist(1, n - 1);
        return dist(rng_);
    }
    if (cached_levels_ != grid.levels) {
        cached_levels_ = grid.levels;
        const auto pmf = lognormal_pmf(grid, p_mean_, p_std_);
        cdf_.resize(pmf.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < pmf.size(); ++i) {
            acc += pmf[i];
            cdf_[i] = acc;
        }
        cdf_.back() = 1.0;
    }
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double u = u01(rng_);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::size_t>(it - cdf_.begin()) + 1;
}

double weight(const KarrasGrid& grid, std::size_t i) {
    if (i < 1 || i >= grid.n_levels)
        throw std::out_of_range("weight: interval index " + std::to_string(i) +
                                " outside [1, " + std::to_string(grid.n_levels - 1) + "]");
    return 1.0 / (grid.levels[i] - grid.levels[i - 1]);
}

CScheduler CScheduler::fixed(double c0_value) {
    if (!(c0_value > 0.0)) throw std::invalid_argument("CScheduler::fixed: need c0 > 0");
    return CScheduler{CMode::Fixed, c0_value};
}

CScheduler CScheduler::fixed_default() { return CScheduler{CMode::Fixed, 0.0}; }

CScheduler CScheduler::adaptive() { return CScheduler{CMode::Adaptive, 0.0}; }

double current_c(const CScheduler& sched, std::size_t nfe, std::size_t data_dim) {
    if (nfe < 2) throw std::invalid_argument("current_c: need nfe >= 2");
    if (data_dim < 1) throw std::invalid_argument("current_c: need data_dim >= 1");
    if (sched.mode == CMode::Fixed) {
        return sched.c0 > 0.0 ? sched.c0
                              : 0.00054 * std::sqrt(static_cast<double>(data_dim));
    }
    return std::exp(-1.18 * std::log(static_cast<double>(nfe - 1)) - 0.72);
}

}  // namespace ctlab
