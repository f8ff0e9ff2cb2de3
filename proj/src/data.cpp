#include "ctlab/data.hpp"

#include "ctlab/csv.hpp"
#include "ctlab/kernels.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ctlab {

const char* dataset_kind_name(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::GaussianMixture8: return "gaussian_mixture_8";
        case DatasetKind::Checkerboard: return "checkerboard";
        case DatasetKind::SwissRoll: return "swiss_roll";
    }
    return "?";
}

DatasetKind dataset_kind_from_name(const std::string& name) {
    if (name == "gaussian_mixture_8") return DatasetKind::GaussianMixture8;
    if (name == "checkerboard") return DatasetKind::Checkerboard;
    if (name == "swiss_roll") return DatasetKind::SwissRoll;
    throw std::invalid_argument("unknown dataset kind: " + name);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over the combined word
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t kReferenceSeed = 0x5EEDFACEull;
constexpr std::size_t kReferenceCount = 100000;
constexpr double kMixtureRadius = 4.0;
constexpr double kMixtureComponentStd = 0.3;

void draw_mixture8(double* out, std::size_t n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> comp(0, 7);
    std::normal_distribution<double> noise(0.0, kMixtureComponentStd);
    for (std::size_t i = 0; i < n; ++i) {
        const double angle = 2.0 * std::numbers::pi * comp(rng) / 8.0;
        out[i * 2] = kMixtureRadius * std::cos(angle) + noise(rng);
        out[i * 2 + 1] = kMixtureRadius * std::sin(angle) + noise(rng);
    }
}

void draw_checkerboard(double* out, std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = 4.0 * u01(rng) - 2.0;
        const int cell = static_cast<int>(std::floor(x1));
        const int parity = ((cell % 2) + 2) % 2;
        const double x2 = u01(rng) - 2.0 * coin(rng) + parity;
        out[i * 2] = 2.0 * x1;
        out[i * 2 + 1] = 2.0 * x2;
    }
}

void draw_swiss_roll(double* out, std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.1);
    const double theta_max = 4.5 * std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = 1.5 * std::numbers::pi + 3.0 * std::numbers::pi * u01(rng);
        const double radius = kMixtureRadius * theta / theta_max;
        out[i * 2] = radius * std::cos(theta) + noise(rng);
        out[i * 2 + 1] = radius * std::sin(theta) + noise(rng);
    }
}

}  // namespace

Dataset::Dataset(DatasetKind kind, OutlierSpec outliers)
    : kind_(kind), outliers_(outliers) {
    if (outliers_.p < 0.0 || outliers_.p > 1.0)
        throw std::invalid_argument("Dataset: outlier probability outside [0, 1]");
    std::vector<double> ref(kReferenceCount * kDim);
    draw_raw(ref.data(), kReferenceCount, kReferenceSeed);
    for (std::size_t c = 0; c < kDim; ++c) {
        double mu = 0.0;
        for (std::size_t i = 0; i < kReferenceCount; ++i) mu += ref[i * kDim + c];
        mu /= kReferenceCount;
        double var = 0.0;
        for (std::size_t i = 0; i < kReferenceCount; ++i) {
            const double d = ref[i * kDim + c] - mu;
            var += d * d;
        }
        var /= kReferenceCount;
        mean_[c] = mu;
        std_[c] = std::sqrt(var);
    }
}

void Dataset::draw_raw(double* out, std::size_t n, std::uint64_t seed) const {
    std::mt19937_64 rng(mix_seed(seed, 0));
    switch (kind_) {
        case DatasetKind::GaussianMixture8: draw_mixture8(out, n, rng); break;
        case DatasetKind::Checkerboard: draw_checkerboard(out, n, rng); break;
        case DatasetKind::SwissRoll: draw_swiss_roll(out, n, rng); break;
    }
}

Tensor Dataset::sample_clean(std::size_t n, std::uint64_t seed) const {
    if (n < 1) throw std::invalid_argument("Dataset::sample: need n >= 1");
    std::vector<double> pts(n * kDim);
    draw_raw(pts.data(), n, seed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < kDim; ++c)
            pts[i * kDim + c] = (pts[i * kDim + c] - mean_[c]) / std_[c];
    return Tensor({n, kDim}, std::move(pts));
}

Tensor Dataset::sample(std::size_t n, std::uint64_t seed) const {
    Tensor batch = sample_clean(n, seed);
    if (outliers_.p > 0.0) {
        // independent amplification stream keeps clean/outlier draws aligned
        std::mt19937_64 rng(mix_seed(seed, 1));
        std::bernoulli_distribution hit(outliers_.p);
        for (double& v : batch.data())
            if (hit(rng)) v *= outliers_.amplitude;
    }
    return batch;
}

std::vector<std::array<double, Dataset::kDim>> Dataset::mixture_centers() const {
    if (kind_ != DatasetKind::GaussianMixture8)
        throw std::logic_error("mixture_centers: dataset has no mixture structure");
    std::vector<std::array<double, kDim>> centers(8);
    for (int k = 0; k < 8; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / 8.0;
        centers[k][0] = (kMixtureRadius * std::cos(angle) - mean_[0]) / std_[0];
        centers[k][1] = (kMixtureRadius * std::sin(angle) - mean_[1]) / std_[1];
    }
    return centers;
}

std::array<double, Dataset::kDim> Dataset::mixture_component_std() const {
    if (kind_ != DatasetKind::GaussianMixture8)
        throw std::logic_error("mixture_component_std: dataset has no mixture structure");
    return {kMixtureComponentStd / std_[0], kMixtureComponentStd / std_[1]};
}

Tensor perturb(const Tensor& x0, const Tensor& z, double t) {
    if (x0.shape() != z.shape())
        throw std::invalid_argument("perturb: data and noise shapes differ");
    if (t < 0.0) throw std::invalid_argument("perturb: negative noise level");
    std::vector<double> out(x0.size());
    kernels::axpy(out.data(), x0.data().data(), t, z.data().data(), x0.size());
    return Tensor(x0.shape(), std::move(out));
}

Tensor perturb_rows(const Tensor& x0, const Tensor& z, const std::vector<double>& ts) {
    if (x0.shape() != z.shape())
        throw std::invalid_argument("perturb_rows: data and noise shapes differ");
    if (x0.shape().size() != 2 || ts.size() != x0.shape()[0])
        throw std::invalid_argument("perturb_rows: one noise level per row required");
    const std::size_t b = x0.shape()[0], d = x0.shape()[1];
    std::vector<double> out(b * d);
    for (std::size_t r = 0; r < b; ++r) {
        if (ts[r] < 0.0) throw std::invalid_argument("perturb_rows: negative noise level");
        for (std::size_t c = 0; c < d; ++c)
            out[r * d + c] = x0.data()[r * d + c] + ts[r] * z.data()[r * d + c];
    }
    return Tensor({b, d}, std::move(out));
}

Tensor gaussian_batch(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 2));
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(n * d);
    for (auto& x : v) x = dist(rng);
    return Tensor({n, d}, std::move(v));
}

void export_points_csv(const std::string& path, const Tensor& points) {
    if (points.shape().size() != 2 || points.shape()[1] != 2)
        throw std::invalid_argument("export_points_csv: expected an (n x 2) tensor");
    csv::Table table;
    table.header = {"x", "y"};
    table.rows.reserve(points.shape()[0]);
    for (std::size_t i = 0; i < points.shape()[0]; ++i)
        table.rows.push_back({csv::format_double(points.data()[i * 2]),
                              csv::format_double(points.data()[i * 2 + 1])});
    csv::write(path, table);
}

Tensor import_points_csv(const std::string& path) {
    csv::Table table = csv::read(path);
    const std::size_t cx = table.column("x"), cy = table.column("y");
    std::vector<double> pts(table.rows.size() * 2);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        pts[i * 2] = csv::parse_double(table.rows[i][cx], i + 2);
        pts[i * 2 + 1] = csv::parse_double(table.rows[i][cy], i + 2);
    }
    return Tensor({table.rows.size(), 2}, std::move(pts));
}

}  // namespace ctlab
