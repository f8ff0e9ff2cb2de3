#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctlab/analysis.hpp"
#include "ctlab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

using namespace ctlab;

namespace {

Tensor random_points(std::size_t n, std::mt19937_64& rng, double spread = 1.0) {
    std::normal_distribution<double> dist(0.0, spread);
    std::vector<double> v(n * 2);
    for (auto& x : v) x = dist(rng);
    return Tensor({n, 2}, std::move(v));
}

double brute_force_w2(const Tensor& a, const Tensor& b) {
    const std::size_t n = a.shape()[0];
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < 2; ++d) {
                const double diff = a.data()[i * 2 + d] - b.data()[perm[i] * 2 + d];
                c += diff * diff;
            }
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best / (double)n);
}

}  // namespace

TEST_CASE("box stats on the hand-computed fixture") {
    auto s = box_stats({1, 2, 3, 4});
    CHECK(s.q1 == 1.75);
    CHECK(s.median == 2.5);
    CHECK(s.q3 == 3.25);
    CHECK(s.iqr == 1.5);
    CHECK(s.inner_lo == 1.75 - 2.25);
    CHECK(s.inner_hi == 3.25 + 2.25);
    CHECK(s.outer_lo == 1.75 - 4.5);
    CHECK(s.outer_hi == 3.25 + 4.5);
    CHECK(s.outlier_count == 0);
    CHECK(std::isnan(s.outlier_min));
    CHECK(s.n == 4);
}

TEST_CASE("box stats degenerate cases") {
    auto s = box_stats(std::vector<double>(16, 2.5));
    CHECK(s.iqr == 0.0);
    CHECK(s.outlier_count == 0);

    std::vector<double> spike(99, 0.0);
    spike.push_back(100.0);
    auto t = box_stats(spike);
    CHECK(t.iqr == 0.0);
    CHECK(t.outlier_count == 1);
    CHECK(t.outlier_max == 100.0);
    CHECK(t.max == 100.0);
    // beyond both fences
    CHECK(t.outlier_max > t.outer_hi);

    CHECK_THROWS_AS((void)box_stats({1, 2, 3}), std::invalid_argument);
}

TEST_CASE("box stats are permutation-invariant and scale-equivariant") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    std::vector<double> v(257);
    for (auto& x : v) x = dist(rng);

    auto base = box_stats(v);
    std::shuffle(v.begin(), v.end(), rng);
    auto shuffled = box_stats(v);
    CHECK(base.q1 == shuffled.q1);
    CHECK(base.median == shuffled.median);
    CHECK(base.q3 == shuffled.q3);
    CHECK(base.outlier_count == shuffled.outlier_count);

    const double scale = 3.75;
    std::vector<double> scaled(v);
    for (auto& x : scaled) x *= scale;
    auto s = box_stats(scaled);
    CHECK(s.q1 == doctest::Approx(scale * shuffled.q1).epsilon(1e-12));
    CHECK(s.median == doctest::Approx(scale * shuffled.median).epsilon(1e-12));
    CHECK(s.q3 == doctest::Approx(scale * shuffled.q3).epsilon(1e-12));
    CHECK(s.inner_hi == doctest::Approx(scale * shuffled.inner_hi).epsilon(1e-12));
}

TEST_CASE("wasserstein2 basics and the enumeration oracle") {
    std::mt19937_64 rng(11);
    Tensor a = random_points(6, rng);
    CHECK(wasserstein2(a, a) == 0.0);

    Tensor p({1, 1}, {0.0}), q({1, 1}, {3.0});
    CHECK(wasserstein2(p, q) == 3.0);

    for (int trial = 0; trial < 10; ++trial) {
        Tensor x = random_points(6, rng);
        Tensor y = random_points(6, rng);
        CHECK(wasserstein2(x, y) == doctest::Approx(brute_force_w2(x, y)).epsilon(1e-12));
    }

    CHECK_THROWS_AS((void)wasserstein2(a, random_points(5, rng)), std::invalid_argument);
}

TEST_CASE("wasserstein2 behaves like a metric on random triples") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor x = random_points(16, rng);
        Tensor y = random_points(16, rng);
        Tensor z = random_points(16, rng);
        const double dxy = wasserstein2(x, y);
        const double dyx = wasserstein2(y, x);
        const double dxz = wasserstein2(x, z);
        const double dzy = wasserstein2(z, y);
        CHECK(dxy == doctest::Approx(dyx).epsilon(1e-12));
        CHECK(dxy >= 0.0);
        CHECK(dxy <= dxz + dzy + 1e-12);
    }
}

TEST_CASE("reservoir respects capacity and keeps per-tag streams apart") {
    TDReservoir res(100, 3);
    for (int i = 0; i < 1000; ++i) res.add(10, (double)i);
    for (int i = 0; i < 50; ++i) res.add(160, -1.0);
    CHECK(res.values(10).size() == 100);
    CHECK(res.seen(10) == 1000);
    CHECK(res.values(160).size() == 50);
    CHECK(res.tags() == std::vector<std::size_t>{10, 160});
    CHECK_THROWS_AS((void)res.values(20), std::out_of_range);

    // uniform retention: the kept sample's mean tracks the stream mean
    double mu = 0.0;
    for (double v : res.values(10)) mu += v;
    mu /= 100.0;
    CHECK(std::abs(mu - 499.5) < 120.0);  // ~3.5 sigma for n=100 of U[0,999]
}

TEST_CASE("reservoir round-trips through CSV") {
    TDReservoir res(1000, 7);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> dist;
    for (int i = 0; i < 300; ++i) res.add(10, dist(rng));
    for (int i = 0; i < 200; ++i) res.add(160, dist(rng));
    res.save_csv("test_reservoir.csv");
    auto back = TDReservoir::load_csv("test_reservoir.csv");
    CHECK(back.values(10) == res.values(10));
    CHECK(back.values(160) == res.values(160));
    std::remove("test_reservoir.csv");
}

TEST_CASE("outlier report table") {
    std::vector<OutlierReportRow> rows;
    rows.push_back(make_report_row("dataset", 0, {1, 2, 3, 4, 100}));
    rows.push_back(make_report_row("td", 10, std::vector<double>(64, 0.5)));
    auto table = outlier_report(rows);
    CHECK(table.header.size() == 13);
    CHECK(table.rows.size() == 2);
    CHECK(table.rows[0][0] == "dataset");
    CHECK(table.rows[1][1] == "10");
    CHECK_THROWS_AS((void)outlier_report({}), std::invalid_argument);
}

TEST_CASE("mode coverage counts reachable mixture components") {
    Dataset ds(DatasetKind::GaussianMixture8);
    Tensor full = ds.sample(2000, 3);
    CHECK(mode_coverage(full, ds) == 1.0);

    auto centers = ds.mixture_centers();
    std::vector<double> single{centers[0][0], centers[0][1]};
    Tensor one({1, 2}, std::move(single));
    CHECK(mode_coverage(one, ds) == doctest::Approx(1.0 / 8.0));
}
