#include "ctlab/analysis.hpp"

#include "ctlab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ctlab {

namespace {

double interp_quantile(const std::vector<double>& sorted, double p) {
    const double h = (double)(sorted.size() - 1) * p;
    const std::size_t lo = (std::size_t)h;
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - (double)lo;
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

BoxStats box_stats(std::vector<double> values) {
    if (values.size() < 4)
        throw std::invalid_argument("box_stats: need at least 4 values, got " +
                                    std::to_string(values.size()));
    std::sort(values.begin(), values.end());

    BoxStats s;
    s.n = values.size();
    s.q1 = interp_quantile(values, 0.25);
    s.median = interp_quantile(values, 0.5);
    s.q3 = interp_quantile(values, 0.75);
    s.iqr = s.q3 - s.q1;
    s.inner_lo = s.q1 - 1.5 * s.iqr;
    s.inner_hi = s.q3 + 1.5 * s.iqr;
    s.outer_lo = s.q1 - 3.0 * s.iqr;
    s.outer_hi = s.q3 + 3.0 * s.iqr;
    s.min = values.front();
    s.max = values.back();

    s.outlier_min = std::numeric_limits<double>::quiet_NaN();
    s.outlier_max = std::numeric_limits<double>::quiet_NaN();
    for (double v : values) {
        if (v < s.inner_lo || v > s.inner_hi) {
            ++s.outlier_count;
            if (std::isnan(s.outlier_min) || v < s.outlier_min) s.outlier_min = v;
            if (std::isnan(s.outlier_max) || v > s.outlier_max) s.outlier_max = v;
        }
    }
    return s;
}

double wasserstein2(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || a.shape() != b.shape())
        throw std::invalid_argument("wasserstein2: point sets must share an (n x d) shape");
    const std::size_t n = a.shape()[0];
    if (n > 2048) throw std::invalid_argument("wasserstein2: n > 2048 unsupported");
    const Assignment plan = solve_assignment(cost_matrix(b, a));
    return std::sqrt(plan.cost / (double)n);
}

double mode_coverage(const Tensor& points, const Dataset& dataset) {
    const auto centers = dataset.mixture_centers();
    const auto comp_std = dataset.mixture_component_std();
    std::size_t covered = 0;
    for (const auto& c : centers) {
        bool hit = false;
        for (std::size_t i = 0; i < points.shape()[0] && !hit; ++i) {
            const double dx = (points.data()[i * 2] - c[0]) / comp_std[0];
            const double dy = (points.data()[i * 2 + 1] - c[1]) / comp_std[1];
            hit = dx * dx + dy * dy <= 9.0;
        }
        if (hit) ++covered;
    }
    return (double)covered / (double)centers.size();
}

TDReservoir::TDReservoir(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), seed_(seed) {
    if (capacity_ == 0) throw std::invalid_argument("TDReservoir: zero capacity");
}

void TDReservoir::add(std::size_t n_tag, double value) {
    Bucket& bucket = buckets_[n_tag];
    ++bucket.seen;
    if (bucket.values.size() < capacity_) {
        bucket.values.push_back(value);
        return;
    }
    // algorithm R: keep each seen value with equal probability
    std::mt19937_64 rng(mix_seed(seed_ + n_tag, bucket.seen));
    std::uniform_int_distribution<std::size_t> dist(0, bucket.seen - 1);
    const std::size_t j = dist(rng);
    if (j < capacity_) bucket.values[j] = value;
}

void TDReservoir::add_batch(std::size_t n_tag, const std::vector<double>& values) {
    for (double v : values) add(n_tag, v);
}

std::vector<std::size_t> TDReservoir::tags() const {
    std::vector<std::size_t> out;
    out.reserve(buckets_.size());
    for (const auto& [tag, bucket] : buckets_) out.push_back(tag);
    return out;
}

const std::vector<double>& TDReservoir::values(std::size_t n_tag) const {
    auto it = buckets_.find(n_tag);
    if (it == buckets_.end())
        throw std::out_of_range("TDReservoir: no values for N=" + std::to_string(n_tag));
    return it->second.values;
}

std::size_t TDReservoir::seen(std::size_t n_tag) const {
    auto it = buckets_.find(n_tag);
    return it == buckets_.end() ? 0 : it->second.seen;
}

void TDReservoir::save_csv(const std::string& path) const {
    csv::Table table;
    table.header = {"n", "value"};
    for (const auto& [tag, bucket] : buckets_)
        for (double v : bucket.values)
            table.rows.push_back({std::to_string(tag), csv::format_double(v)});
    csv::write(path, table);
}

TDReservoir TDReservoir::load_csv(const std::string& path, std::size_t capacity) {
    csv::Table table = csv::read(path);
    const std::size_t cn = table.column("n"), cv = table.column("value");
    TDReservoir res(capacity);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::size_t tag =
            (std::size_t)csv::parse_double(table.rows[i][cn], i + 2);
        res.add(tag, csv::parse_double(table.rows[i][cv], i + 2));
    }
    return res;
}

OutlierReportRow make_report_row(const std::string& source, std::size_t n_tag,
                                 std::vector<double> values) {
    return OutlierReportRow{source, n_tag, box_stats(std::move(values))};
}

csv::Table outlier_report(const std::vector<OutlierReportRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("outlier_report: no rows");
    csv::Table table;
    table.header = {"source",   "N",        "q1",       "median",        "q3",
                    "inner_lo", "inner_hi", "outer_lo", "outer_hi",
                    "outlier_count", "min", "max",      "n"};
    for (const auto& row : rows) {
        const BoxStats& s = row.stats;
        table.rows.push_back({row.source, std::to_string(row.n_tag),
                              csv::format_double(s.q1), csv::format_double(s.median),
                              csv::format_double(s.q3), csv::format_double(s.inner_lo),
                              csv::format_double(s.inner_hi), csv::format_double(s.outer_lo),
                              csv::format_double(s.outer_hi), std::to_string(s.outlier_count),
                              csv::format_double(s.min), csv::format_double(s.max),
                              std::to_string(s.n)});
    }
    return table;
}

}  // namespace ctlab
