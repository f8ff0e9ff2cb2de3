#pragma once

#include "ctlab/csv.hpp"
#include "ctlab/data.hpp"
#include "ctlab/tensor.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Box-and-whisker statistics with Tukey fences, exact 2-Wasserstein distance
// between equal-size point sets, reservoirs of temporal-difference values
// keyed by discretization step count, and the tabular outlier report.

namespace ctlab {

struct BoxStats {
    double q1 = 0, median = 0, q3 = 0;
    double iqr = 0;
    double inner_lo = 0, inner_hi = 0;
    double outer_lo = 0, outer_hi = 0;
    std::size_t outlier_count = 0;  // strictly outside the inner fences
    double outlier_min = 0, outlier_max = 0;  // extremes beyond the fences; NaN if none
    double min = 0, max = 0;
    std::size_t n = 0;
};

// Quantiles by linear interpolation of order statistics at h = (n-1)p + 1.
BoxStats box_stats(std::vector<double> values);

// sqrt(min-cost assignment of squared distances / n); exact, n <= 2048.
double wasserstein2(const Tensor& a, const Tensor& b);

// Fraction of mixture components with at least one point inside the
// 3-component-std ellipse around the center.
double mode_coverage(const Tensor& points, const Dataset& dataset);

class TDReservoir {
public:
    explicit TDReservoir(std::size_t capacity = 1000000, std::uint64_t seed = 1);

    void add(std::size_t n_tag, double value);
    void add_batch(std::size_t n_tag, const std::vector<double>& values);

    std::vector<std::size_t> tags() const;
    const std::vector<double>& values(std::size_t n_tag) const;
    std::size_t seen(std::size_t n_tag) const;
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return buckets_.empty(); }

    // Persistence format: columns n,value.
    void save_csv(const std::string& path) const;
    static TDReservoir load_csv(const std::string& path, std::size_t capacity = 1000000);

private:
    struct Bucket {
        std::vector<double> values;
        std::size_t seen = 0;
    };
    std::size_t capacity_;
    std::uint64_t seed_;
    std::map<std::size_t, Bucket> buckets_;
};

struct OutlierReportRow {
    std::string source;
    std::size_t n_tag = 0;
    BoxStats stats;
};

OutlierReportRow make_report_row(const std::string& source, std::size_t n_tag,
                                 std::vector<double> values);

// Columns: source,N,q1,median,q3,inner_lo,inner_hi,outer_lo,outer_hi,
//          outlier_count,min,max,n
csv::Table outlier_report(const std::vector<OutlierReportRow>& rows);

}  // namespace ctlab
