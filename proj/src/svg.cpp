#include "ctlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ctlab::svg {

namespace {

constexpr double kPanelW = 420, kPanelH = 340;
constexpr double kMarginL = 64, kMarginR = 16, kMarginT = 36, kMarginB = 46;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void take(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!std::isfinite(lo)) {
            lo = 0;
            hi = 1;
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        } else {
            const double m = 0.05 * (hi - lo);
            lo -= m;
            hi += m;
        }
    }
};

double tx(double v, const Range& r, double x0, double w, bool logscale) {
    const double a = logscale ? std::log10(v) : v;
    const double lo = logscale ? std::log10(r.lo) : r.lo;
    const double hi = logscale ? std::log10(r.hi) : r.hi;
    return x0 + (a - lo) / (hi - lo) * w;
}

double ty(double v, const Range& r, double y0, double h, bool logscale) {
    const double a = logscale ? std::log10(v) : v;
    const double lo = logscale ? std::log10(r.lo) : r.lo;
    const double hi = logscale ? std::log10(r.hi) : r.hi;
    return y0 + h - (a - lo) / (hi - lo) * h;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

void draw_panel(std::ostream& out, const Panel& panel, double offset_x) {
    const double x0 = offset_x + kMarginL, y0 = kMarginT;
    const double w = kPanelW - kMarginL - kMarginR, h = kPanelH - kMarginT - kMarginB;

    Range rx, ry;
    for (const auto& s : panel.series) {
        for (double v : s.x)
            if (!panel.log_x || v > 0) rx.take(v);
        for (double v : s.y)
            if (!panel.log_y || v > 0) ry.take(v);
    }
    rx.pad();
    ry.pad();
    if (panel.log_x) rx.lo = std::max(rx.lo, 1e-300);
    if (panel.log_y) ry.lo = std::max(ry.lo, 1e-300);

    out << "<rect x='" << x0 << "' y='" << y0 << "' width='" << w << "' height='" << h
        << "' fill='none' stroke='#333'/>\n";
    out << "<text x='" << offset_x + kPanelW / 2 << "' y='" << kMarginT - 12
        << "' text-anchor='middle' font-size='14'>" << panel.title << "</text>\n";
    out << "<text x='" << offset_x + kPanelW / 2 << "' y='" << kPanelH - 8
        << "' text-anchor='middle' font-size='11'>" << panel.x_label << "</text>\n";
    out << "<text x='" << offset_x + 14 << "' y='" << y0 + h / 2
        << "' text-anchor='middle' font-size='11' transform='rotate(-90 " << offset_x + 14
        << " " << y0 + h / 2 << ")'>" << panel.y_label << "</text>\n";

    for (int tick = 0; tick <= 4; ++tick) {
        const double fx = rx.lo + (rx.hi - rx.lo) * tick / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * tick / 4.0;
        const double px = x0 + w * tick / 4.0;
        const double py = y0 + h - h * tick / 4.0;
        const double vx = panel.log_x
                              ? std::pow(10.0, std::log10(rx.lo) +
                                                   (std::log10(rx.hi) - std::log10(rx.lo)) *
                                                       tick / 4.0)
                              : fx;
        const double vy = panel.log_y
                              ? std::pow(10.0, std::log10(ry.lo) +
                                                   (std::log10(ry.hi) - std::log10(ry.lo)) *
                                                       tick / 4.0)
                              : fy;
        out << "<line x1='" << px << "' y1='" << y0 + h << "' x2='" << px << "' y2='"
            << y0 + h + 4 << "' stroke='#333'/>\n";
        out << "<text x='" << px << "' y='" << y0 + h + 16
            << "' text-anchor='middle' font-size='10'>" << fmt(vx) << "</text>\n";
        out << "<line x1='" << x0 - 4 << "' y1='" << py << "' x2='" << x0 << "' y2='" << py
            << "' stroke='#333'/>\n";
        out << "<text x='" << x0 - 6 << "' y='" << py + 3
            << "' text-anchor='end' font-size='10'>" << fmt(vy) << "</text>\n";
    }

    std::size_t color = 0;
    double legend_y = y0 + 14;
    for (const auto& s : panel.series) {
        const char* stroke = kColors[color % 8];
        out << "<polyline fill='none' stroke='" << stroke << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (panel.log_x && s.x[i] <= 0) continue;
            if (panel.log_y && s.y[i] <= 0) continue;
            out << tx(s.x[i], rx, x0, w, panel.log_x) << ","
                << ty(s.y[i], ry, y0, h, panel.log_y) << " ";
        }
        out << "'/>\n";
        out << "<line x1='" << x0 + w - 110 << "' y1='" << legend_y << "' x2='"
            << x0 + w - 92 << "' y2='" << legend_y << "' stroke='" << stroke
            << "' stroke-width='2'/>\n";
        out << "<text x='" << x0 + w - 88 << "' y='" << legend_y + 3
            << "' font-size='10'>" << s.label << "</text>\n";
        legend_y += 13;
        ++color;
    }
}

}  // namespace

void write_line_plot(const std::string& path, const std::vector<Panel>& panels) {
    if (panels.empty()) throw std::invalid_argument("write_line_plot: no panels");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("svg: cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kPanelW * panels.size()
        << "' height='" << kPanelH << "' font-family='sans-serif'>\n";
    for (std::size_t i = 0; i < panels.size(); ++i) draw_panel(out, panels[i], i * kPanelW);
    out << "</svg>\n";
}

void write_box_plot(const std::string& path, const std::string& title,
                    const std::vector<Box>& boxes) {
    if (boxes.empty()) throw std::invalid_argument("write_box_plot: no boxes");
    const double slot = 90, w = kMarginL + kMarginR + slot * (double)boxes.size();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("svg: cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << kPanelH
        << "' font-family='sans-serif'>\n";
    out << "<text x='" << w / 2 << "' y='" << kMarginT - 12
        << "' text-anchor='middle' font-size='14'>" << title << "</text>\n";

    Range ry;
    for (const auto& b : boxes) {
        ry.take(b.min);
        ry.take(b.max);
        ry.take(b.outer_lo);
        ry.take(b.outer_hi);
    }
    ry.pad();
    const double y0 = kMarginT, h = kPanelH - kMarginT - kMarginB;
    auto y = [&](double v) { return ty(v, ry, y0, h, false); };

    for (int tick = 0; tick <= 4; ++tick) {
        const double fy = ry.lo + (ry.hi - ry.lo) * tick / 4.0;
        out << "<text x='" << kMarginL - 6 << "' y='" << y(fy) + 3
            << "' text-anchor='end' font-size='10'>" << fmt(fy) << "</text>\n";
        out << "<line x1='" << kMarginL - 4 << "' y1='" << y(fy) << "' x2='" << kMarginL
            << "' y2='" << y(fy) << "' stroke='#333'/>\n";
    }
    out << "<line x1='" << kMarginL << "' y1='" << y0 << "' x2='" << kMarginL << "' y2='"
        << y0 + h << "' stroke='#333'/>\n";

    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const Box& b = boxes[i];
        const double cx = kMarginL + slot * ((double)i + 0.5);
        const double half = 22;
        // outer fences dashed orange, inner fences dashed green
        for (double fence : {b.outer_lo, b.outer_hi})
            out << "<line x1='" << cx - half - 8 << "' y1='" << y(fence) << "' x2='"
                << cx + half + 8 << "' y2='" << y(fence)
                << "' stroke='#ff7f0e' stroke-dasharray='5,3'/>\n";
        for (double fence : {b.inner_lo, b.inner_hi})
            out << "<line x1='" << cx - half - 8 << "' y1='" << y(fence) << "' x2='"
                << cx + half + 8 << "' y2='" << y(fence)
                << "' stroke='#2ca02c' stroke-dasharray='3,3'/>\n";
        // interquartile box and median
        out << "<rect x='" << cx - half << "' y='" << y(b.q3) << "' width='" << 2 * half
            << "' height='" << y(b.q1) - y(b.q3)
            << "' fill='#aec7e8' fill-opacity='0.6' stroke='#1f77b4'/>\n";
        out << "<line x1='" << cx - half << "' y1='" << y(b.median) << "' x2='" << cx + half
            << "' y2='" << y(b.median) << "' stroke='#1f77b4' stroke-width='2'/>\n";
        // sample extremes as outlier markers when beyond the fences
        for (double v : {b.min, b.max})
            if (v < b.inner_lo || v > b.inner_hi)
                out << "<circle cx='" << cx << "' cy='" << y(v)
                    << "' r='3' fill='#d62728'/>\n";
        out << "<text x='" << cx << "' y='" << y0 + h + 16
            << "' text-anchor='middle' font-size='10'>" << b.label << "</text>\n";
        out << "<text x='" << cx << "' y='" << y0 + h + 28
            << "' text-anchor='middle' font-size='9'>outliers: " << b.outlier_count
            << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace ctlab::svg
