#pragma once

#include "ctlab/config.hpp"
#include "ctlab/model.hpp"

#include <cstdint>
#include <vector>

// One-step, two-step, and multistep stochastic consistency sampling. Each
// sample owns an RNG stream derived from (seed, index), so results do not
// depend on batch composition and generation parallelizes trivially.

namespace ctlab {

struct SamplePlan {
    std::size_t steps = 1;
    std::vector<double> intermediate_levels;  // strictly decreasing, in (sigma_min, sigma_max)
    std::uint64_t seed = 1;
};

// Two-step default: the level of the final (s1-interval) grid nearest
// sqrt(sigma_min * sigma_max). Deeper plans subsample a Karras grid with
// steps+1 levels, descending, endpoints excluded.
std::vector<double> default_intermediate_levels(const RunConfig& cfg, std::size_t steps);

struct SampleResult {
    Tensor points;        // (n x dim)
    std::size_t nfe = 0;  // network evaluations per sample
};

SampleResult sample(const ConsistencyModel& model, const RunConfig& cfg,
                    const SamplePlan& plan, std::size_t n);

// The per-sample noise stream; exposed so callers can reproduce draws.
std::mt19937_64 sample_noise_stream(std::uint64_t seed, std::size_t index);

}  // namespace ctlab
