#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

using namespace ctlab;

namespace {

// linear-interpolation quantile at h = (n-1)p + 1 over a sorted copy
double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = (double)(v.size() - 1) * p;
    const std::size_t lo = (std::size_t)h;
    const double frac = h - (double)lo;
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace

TEST_CASE("clean marginals are standardized for every dataset kind") {
    for (DatasetKind kind : {DatasetKind::GaussianMixture8, DatasetKind::Checkerboard,
                             DatasetKind::SwissRoll}) {
        Dataset ds(kind);
        Tensor batch = ds.sample(100000, 424242);
        for (std::size_t c = 0; c < 2; ++c) {
            double mu = 0.0;
            for (std::size_t i = 0; i < 100000; ++i) mu += batch.data()[i * 2 + c];
            mu /= 100000.0;
            double var = 0.0;
            for (std::size_t i = 0; i < 100000; ++i) {
                const double d = batch.data()[i * 2 + c] - mu;
                var += d * d;
            }
            var /= 100000.0;
            INFO(dataset_kind_name(kind) << " dim " << c);
            CHECK(std::abs(mu) < 0.02);
            CHECK(std::abs(std::sqrt(var) - 1.0) < 0.02);
        }
    }
}

TEST_CASE("clean draws stay bounded over a million points") {
    for (DatasetKind kind : {DatasetKind::GaussianMixture8, DatasetKind::Checkerboard,
                             DatasetKind::SwissRoll}) {
        Dataset ds(kind);
        double worst = 0.0;
        for (std::uint64_t chunk = 0; chunk < 10; ++chunk) {
            Tensor batch = ds.sample(100000, 1000 + chunk);
            for (double v : batch.data()) worst = std::max(worst, std::abs(v));
        }
        INFO(dataset_kind_name(kind));
        CHECK(worst < 6.0);
    }
}

TEST_CASE("outlier injection hits the configured fraction") {
    Dataset ds(DatasetKind::GaussianMixture8, OutlierSpec{0.01, 8.0});
    std::size_t amplified = 0, total = 0;
    for (std::uint64_t chunk = 0; chunk < 5; ++chunk) {
        Tensor dirty = ds.sample(100000, 77 + chunk);
        Tensor clean = ds.sample_clean(100000, 77 + chunk);
        for (std::size_t i = 0; i < dirty.size(); ++i) {
            total += 1;
            if (dirty.data()[i] != clean.data()[i]) {
                ++amplified;
                CHECK(dirty.data()[i] == doctest::Approx(8.0 * clean.data()[i]));
            }
        }
    }
    const double frac = (double)amplified / (double)total;
    CHECK(std::abs(frac - 0.01) < 0.002);
}

TEST_CASE("sampling is deterministic per seed") {
    Dataset ds(DatasetKind::Checkerboard, OutlierSpec{0.01, 8.0});
    CHECK(ds.sample(512, 9).data() == ds.sample(512, 9).data());
    CHECK(ds.sample(512, 9).data() != ds.sample(512, 10).data());
}

TEST_CASE("latent-like tails dominate the quartile scale") {
    Dataset ds(DatasetKind::GaussianMixture8, OutlierSpec{0.01, 8.0});
    Tensor batch = ds.sample(100000, 5);
    std::vector<double> coords(batch.data());
    const double q3 = quantile(coords, 0.75);
    const double q1 = quantile(coords, 0.25);
    const double iqr = q3 - q1;
    const double inner_lo = q1 - 1.5 * iqr, inner_hi = q3 + 1.5 * iqr;
    double max_outlier = 0.0;
    for (double v : coords)
        if (v < inner_lo || v > inner_hi) max_outlier = std::max(max_outlier, std::abs(v));
    CHECK(q3 > 0.0);
    CHECK(max_outlier / q3 > 4.0);
}

TEST_CASE("perturbation arithmetic and statistics") {
    Dataset ds(DatasetKind::GaussianMixture8);
    Tensor x0 = ds.sample(1000, 3);
    Tensor zero = Tensor::zeros({1000, 2});
    CHECK(perturb(x0, gaussian_batch(1000, 2, 1), 0.0).data() == x0.data());
    CHECK(perturb(x0, zero, 2.7).data() == x0.data());
    CHECK_THROWS_AS((void)perturb(x0, Tensor::zeros({3, 2}), 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)perturb(x0, zero, -1.0), std::invalid_argument);

    const double t = 0.8;
    Tensor z = gaussian_batch(50000, 2, 11);
    Tensor xt = perturb(ds.sample(50000, 4), z, t);
    Tensor x0b = ds.sample(50000, 4);
    double var = 0.0;
    for (std::size_t i = 0; i < xt.size(); ++i) {
        const double d = xt.data()[i] - x0b.data()[i];
        var += d * d;
    }
    var /= (double)xt.size();
    CHECK(std::abs(std::sqrt(var) - t) / t < 0.01);
}

TEST_CASE("mixture structure in normalized coordinates") {
    Dataset ds(DatasetKind::GaussianMixture8);
    auto centers = ds.mixture_centers();
    REQUIRE(centers.size() == 8);
    // centers sit near radius sqrt(2) after per-dimension standardization
    for (const auto& c : centers) {
        const double r = std::hypot(c[0], c[1]);
        CHECK(r > 1.0);
        CHECK(r < 2.0);
    }
    Dataset cb(DatasetKind::Checkerboard);
    CHECK_THROWS_AS((void)cb.mixture_centers(), std::logic_error);
}

TEST_CASE("points round-trip through CSV") {
    Dataset ds(DatasetKind::SwissRoll);
    Tensor pts = ds.sample(257, 21);
    const std::string path = "test_points_roundtrip.csv";
    export_points_csv(path, pts);
    Tensor back = import_points_csv(path);
    REQUIRE(back.shape() == pts.shape());
    CHECK(back.data() == pts.data());
    std::remove(path.c_str());
}
