#pragma once

#include <cstdint>
#include <random>
#include <vector>

// Time-axis machinery: the Karras noise-level grid, the exponential
// discretization curriculum, timestep sampling, interval weighting, and the
// scaling-c scheduler. Levels follow the 1-based t_1..t_N convention of the
// training procedure; levels[k] stores t_{k+1}.

namespace ctlab {

struct KarrasGrid {
    double t_min = 0.002;
    double t_max = 80.0;
    double rho = 7.0;
    std::size_t n_levels = 0;      // N
    std::vector<double> levels;    // ascending, levels.front()==t_min, back()==t_max

    double level(std::size_t i) const;  // t_i, 1-based, i in [1, N]
};

// N >= 2 levels between t_min and t_max with curvature exponent rho.
KarrasGrid build_grid(double t_min, double t_max, double rho, std::size_t n);

struct Curriculum {
    std::size_t s0 = 10;
    std::size_t s1 = 640;
    std::size_t total_iters = 0;  // K

    std::size_t epoch_len() const;  // K'
};

// min(s0 * 2^floor(k/K'), s1) + 1 for 0 <= k < K.
std::size_t nfe_at(const Curriculum& cur, std::size_t k);

enum class TimestepMode { Uniform, DiscreteLognormal };

// Analytic interval probabilities p(i), i = 1..N-1, for the discrete
// lognormal rule; sums to 1.
std::vector<double> lognormal_pmf(const KarrasGrid& grid, double p_mean, double p_std);

class TimestepSampler {
public:
    TimestepSampler(TimestepMode mode, std::uint64_t seed,
                    double p_mean = -1.1, double p_std = 2.0);

    // Draws an interval index i in [1, N-1].
    std::size_t sample(const KarrasGrid& grid);

    TimestepMode mode() const { return mode_; }
    double p_mean() const { return p_mean_; }
    double p_std() const { return p_std_; }

private:
    TimestepMode mode_;
    double p_mean_;
    double p_std_;
    std::mt19937_64 rng_;
    std::vector<double> cached_levels_;
    std::vector<double> cdf_;
};

// lambda(t_i) = 1 / (t_{i+1} - t_i), 1-based i in [1, N-1].
double weight(const KarrasGrid& grid, std::size_t i);

enum class CMode { Fixed, Adaptive };

struct CScheduler {
    CMode mode = CMode::Adaptive;
    double c0 = 0.0;  // fixed mode; <= 0 derives 0.00054 * sqrt(data_dim)

    static CScheduler fixed(double c0_value);
    static CScheduler fixed_default();  // derive from data_dim at query time
    static CScheduler adaptive();
};

// Fixed mode returns c0 (or the dimension-derived default); adaptive mode
// returns exp(-1.18 * ln(nfe - 1) - 0.72). Requires nfe >= 2, data_dim >= 1.
double current_c(const CScheduler& sched, std::size_t nfe, std::size_t data_dim);

}  // namespace ctlab
