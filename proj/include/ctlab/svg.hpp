#pragma once

#include <string>
#include <vector>

// Static SVG emission for the experiment figures: line plots over series and
// box-and-whisker panels. No interactive surface.

namespace ctlab::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
};

// One SVG with the panels laid out side by side.
void write_line_plot(const std::string& path, const std::vector<Panel>& panels);

struct Box {
    std::string label;
    double q1 = 0, median = 0, q3 = 0;
    double inner_lo = 0, inner_hi = 0;
    double outer_lo = 0, outer_hi = 0;
    double min = 0, max = 0;
    std::size_t outlier_count = 0;
};

void write_box_plot(const std::string& path, const std::string& title,
                    const std::vector<Box>& boxes);

}  // namespace ctlab::svg
