#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mobisim/integrate.hpp"

namespace mobisim {

struct PlotSeries {
    std::string label;
    std::vector<double> times;
    std::vector<double> values;
    int style = 0;  ///< index into the 8-colour palette (taken modulo 8)
};

struct PlotSpec {
    std::vector<PlotSeries> series;
    std::string title;
    std::string x_label = "time";
    std::string y_label;
    int width = 900;
    int height = 600;
    std::optional<std::pair<double, double>> y_range;  ///< auto when empty
};

/// Pixel rectangle of the plotting area inside the margins.
struct PlotArea {
    double left, top, right, bottom;
};

PlotArea plot_area(int width, int height);

/// At most 11 ticks in [lo, hi] with a {1,2,5} x 10^n step. Labels are exact
/// decimal strings and `value` is their parsed double.
struct Tick {
    double value;
    std::string label;
};
std::vector<Tick> nice_ticks(double lo, double hi);

/// Series longer than 2000 points keep every ceil(n/2000)-th point plus the last.
std::vector<std::size_t> thin_indices(std::size_t n);

/// SVG 1.1 document. Byte-identical for identical input. Throws
/// ValidationError for empty series lists, mismatched or short series,
/// non-finite values, or canvases smaller than 100x100.
std::string render_svg(const PlotSpec& spec);

/// Congestion and adoption of one trajectory on a shared time axis.
PlotSpec trajectory_plot(const Trajectory& traj, const std::string& title);

} // namespace mobisim
