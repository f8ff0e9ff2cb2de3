#pragma once

#include "ctlab/tensor.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

// Toy 2-D data sources. Clean marginals are standardized against a fixed
// reference sample; impulsive outliers are injected after normalization so
// the clean core stays unit-scale while the tails become latent-like.

namespace ctlab {

enum class DatasetKind { GaussianMixture8, Checkerboard, SwissRoll };

const char* dataset_kind_name(DatasetKind kind);
DatasetKind dataset_kind_from_name(const std::string& name);

struct OutlierSpec {
    double p = 0.0;        // per-coordinate amplification probability
    double amplitude = 8.0;
};

// Deterministic seed derivation for independent sub-streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

class Dataset {
public:
    static constexpr std::size_t kDim = 2;

    explicit Dataset(DatasetKind kind, OutlierSpec outliers = {});

    // n normalized points, outliers injected per spec; deterministic per seed.
    Tensor sample(std::size_t n, std::uint64_t seed) const;
    // Same points with the outlier pass skipped (aligned coordinate-for-coordinate).
    Tensor sample_clean(std::size_t n, std::uint64_t seed) const;

    DatasetKind kind() const { return kind_; }
    const OutlierSpec& outlier_spec() const { return outliers_; }
    const std::array<double, kDim>& mean() const { return mean_; }
    const std::array<double, kDim>& stddev() const { return std_; }

    // Mixture structure in normalized coordinates (GaussianMixture8 only).
    std::vector<std::array<double, kDim>> mixture_centers() const;
    std::array<double, kDim> mixture_component_std() const;

private:
    void draw_raw(double* out, std::size_t n, std::uint64_t seed) const;

    DatasetKind kind_;
    OutlierSpec outliers_;
    std::array<double, kDim> mean_{};
    std::array<double, kDim> std_{};
};

// Forward perturbation x_t = x0 + t * z.
Tensor perturb(const Tensor& x0, const Tensor& z, double t);

// Per-row noise levels: row r becomes x0[r] + ts[r] * z[r].
Tensor perturb_rows(const Tensor& x0, const Tensor& z, const std::vector<double>& ts);

// Standard normal (n x d) batch, deterministic per seed.
Tensor gaussian_batch(std::size_t n, std::size_t d, std::uint64_t seed);

// Point-cloud exchange format: header x,y with one row per point.
void export_points_csv(const std::string& path, const Tensor& points);
Tensor import_points_csv(const std::string& path);

}  // namespace ctlab
