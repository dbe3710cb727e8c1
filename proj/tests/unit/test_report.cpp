#include <cmath>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "mobisim/error.hpp"
#include "mobisim/numfmt.hpp"
#include "mobisim/report.hpp"
#include "mobisim/scenario.hpp"

using namespace mobisim;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

std::vector<std::pair<double, double>> polyline_points(const std::string& svg, std::size_t which = 0) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i <= which; ++i) {
        pos = svg.find("<polyline", pos);
        REQUIRE(pos != std::string::npos);
        if (i < which) ++pos;
    }
    const auto start = svg.find("points=\"", pos) + 8;
    const auto end = svg.find('"', start);
    std::istringstream in(svg.substr(start, end - start));
    std::vector<std::pair<double, double>> out;
    std::string pair;
    while (in >> pair) {
        const auto comma = pair.find(',');
        out.emplace_back(*parse_double(pair.substr(0, comma)), *parse_double(pair.substr(comma + 1)));
    }
    return out;
}

PlotSpec two_points() {
    PlotSpec spec;
    spec.width = 100;
    spec.height = 100;
    spec.series = {PlotSeries{"s", {0.0, 1.0}, {0.0, 1.0}, 0}};
    return spec;
}

} // namespace

TEST_CASE("plot area margins") {
    const PlotArea a = plot_area(100, 100);
    CHECK(a.left == 10.0);
    CHECK(a.right == 96.0);
    CHECK(a.top == 10.0);
    CHECK(a.bottom == 90.0);
}

TEST_CASE("two points map to opposite corners of the plot area") {
    const auto pts = polyline_points(render_svg(two_points()));
    REQUIRE(pts.size() == 2);
    CHECK(pts[0] == std::pair{10.0, 90.0});
    CHECK(pts[1] == std::pair{96.0, 10.0});
}

TEST_CASE("x mapping is affine") {
    PlotSpec spec;
    spec.series = {PlotSeries{"s", {0, 1, 2, 3, 10}, {5, 4, 3, 2, 1}, 0}};
    const auto pts = polyline_points(render_svg(spec));
    const PlotArea a = plot_area(spec.width, spec.height);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double want = a.left + spec.series[0].times[i] / 10.0 * (a.right - a.left);
        CHECK(pts[i].first == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("trajectory plot of scenario 1") {
    const Trajectory tr = simulate(preset("scenario-1"));
    const std::string svg = render_svg(trajectory_plot(tr, "Scenario 1"));
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(count(svg, "<polyline") == 2);
    CHECK(svg.find(">congestion</text>") != std::string::npos);
    CHECK(svg.find(">adoption</text>") != std::string::npos);
    CHECK(svg.find(">Scenario 1</text>") != std::string::npos);
    CHECK(svg == render_svg(trajectory_plot(tr, "Scenario 1")));
    CHECK(polyline_points(svg, 1).size() == tr.times.size());
}

TEST_CASE("palette styles differ per series") {
    PlotSpec spec = two_points();
    spec.series.push_back(PlotSeries{"t", {0, 1}, {1, 0}, 1});
    const std::string svg = render_svg(spec);
    CHECK(count(svg, "stroke=\"#1f77b4\"") == 2);
    CHECK(count(svg, "stroke=\"#d62728\"") == 2);
}

TEST_CASE("labels are escaped") {
    PlotSpec spec = two_points();
    spec.title = "a<b & \"c\"";
    const std::string svg = render_svg(spec);
    CHECK(svg.find("a&lt;b &amp; &quot;c&quot;") != std::string::npos);
}

TEST_CASE("nice ticks") {
    const auto t = nice_ticks(0.0, 100.0);
    REQUIRE_FALSE(t.empty());
    CHECK(t.front().value == 0.0);
    CHECK(t.back().value == 100.0);
    CHECK(t.size() <= 11);

    const std::pair<double, double> ranges[] = {{0.0, 1.0},   {-3.7, 12.2}, {1e-7, 3e-7}, {0.06, 100.0},
                                                {1e5, 1e9},   {-1, -0.5},   {0.1, 0.3},   {2.5, 2.5000001}};
    for (auto [lo, hi] : ranges) {
        const auto ticks = nice_ticks(lo, hi);
        CHECK(ticks.size() >= 2);
        CHECK(ticks.size() <= 11);
        for (std::size_t i = 0; i < ticks.size(); ++i) {
            CHECK(ticks[i].value >= lo - 1e-12 * std::abs(lo));
            CHECK(ticks[i].value <= hi + 1e-12 * std::abs(hi));
            const auto parsed = parse_double(ticks[i].label);
            REQUIRE(parsed);
            CHECK(*parsed == ticks[i].value);
            if (i > 0) CHECK(ticks[i].value > ticks[i - 1].value);
        }
    }
    CHECK(nice_ticks(0.0, 0.3)[1].label == "0.05");
}

TEST_CASE("long series are thinned") {
    CHECK(thin_indices(5) == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(thin_indices(2000).size() == 2000);
    const auto idx = thin_indices(4001);
    CHECK(idx.front() == 0);
    CHECK(idx.back() == 4000);
    CHECK(idx[1] == 3);
    CHECK(idx.size() <= 2001);

    PlotSpec spec;
    PlotSeries s{"long", {}, {}, 0};
    for (int i = 0; i < 10001; ++i) {
        s.times.push_back(i);
        s.values.push_back(std::sin(i * 0.01));
    }
    spec.series = {s};
    const auto pts = polyline_points(render_svg(spec));
    CHECK(pts.size() <= 2001);
    CHECK(pts.back().first == plot_area(spec.width, spec.height).right);
}

TEST_CASE("rendering errors") {
    PlotSpec empty;
    CHECK_THROWS_AS(render_svg(empty), ValidationError);

    PlotSpec small = two_points();
    small.width = 99;
    CHECK_THROWS_AS(render_svg(small), ValidationError);

    PlotSpec nan = two_points();
    nan.series[0].values[1] = NAN;
    CHECK_THROWS_AS(render_svg(nan), ValidationError);

    PlotSpec short_series = two_points();
    short_series.series[0].times.pop_back();
    short_series.series[0].values.pop_back();
    CHECK_THROWS_AS(render_svg(short_series), ValidationError);

    PlotSpec mismatch = two_points();
    mismatch.series[0].values.push_back(2.0);
    CHECK_THROWS_AS(render_svg(mismatch), ValidationError);
}

TEST_CASE("a constant series still renders") {
    PlotSpec spec;
    spec.series = {PlotSeries{"flat", {0, 1, 2}, {3, 3, 3}, 0}};
    const auto pts = polyline_points(render_svg(spec));
    CHECK(pts[0].second == pts[2].second);
    CHECK(std::isfinite(pts[0].second));
}
