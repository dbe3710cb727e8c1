#include "mobisim/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "mobisim/error.hpp"
#include "mobisim/numfmt.hpp"

namespace mobisim {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

constexpr std::size_t kMaxPoints = 2000;

std::string escape_xml(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

// Decimal string for mantissa * 10^exponent, without rounding.
std::string decimal_label(long long mantissa, int exponent) {
    if (mantissa == 0) return "0";
    const bool negative = mantissa < 0;
    std::string digits = std::to_string(negative ? -mantissa : mantissa);
    if (exponent >= 0) {
        digits.append(static_cast<std::size_t>(exponent), '0');
    } else {
        const auto shift = static_cast<std::size_t>(-exponent);
        if (digits.size() <= shift) digits.insert(0, shift - digits.size() + 1, '0');
        digits.insert(digits.size() - shift, 1, '.');
        while (digits.back() == '0') digits.pop_back();
        if (digits.back() == '.') digits.pop_back();
    }
    return negative ? "-" + digits : digits;
}

std::string fmt(double v) { return format_double(v); }

void check_series(const PlotSeries& s) {
    if (s.times.size() != s.values.size()) {
        throw ValidationError("series '" + s.label + "'", "must have equal-length times and values");
    }
    if (s.times.size() < 2) throw ValidationError("series '" + s.label + "'", "must have at least 2 points");
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        if (!std::isfinite(s.times[i]) || !std::isfinite(s.values[i])) {
            throw ValidationError("series '" + s.label + "'", "contains non-finite values");
        }
    }
}

std::pair<double, double> padded(double lo, double hi) {
    if (hi > lo) return {lo, hi};
    const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
    return {lo - pad, hi + pad};
}

} // namespace

PlotArea plot_area(int width, int height) {
    const double w = width;
    const double h = height;
    return {0.1 * w, 0.1 * h, w - 0.04 * w, h - 0.1 * h};
}

std::vector<Tick> nice_ticks(double lo, double hi) {
    std::vector<Tick> ticks;
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) return ticks;
    int exponent = static_cast<int>(std::floor(std::log10((hi - lo) / 10.0)));
    for (;; ++exponent) {
        for (int m : {1, 2, 5}) {
            const double step = m * std::pow(10.0, exponent);
            const double slack = 1e-9;
            const auto k_lo = static_cast<long long>(std::ceil(lo / step - slack));
            const auto k_hi = static_cast<long long>(std::floor(hi / step + slack));
            if (k_hi - k_lo + 1 > 11) continue;
            for (long long k = k_lo; k <= k_hi; ++k) {
                std::string label = decimal_label(k * m, exponent);
                const double value = *parse_double(label);
                if (value < lo || value > hi) continue;
                ticks.push_back({value, std::move(label)});
            }
            return ticks;
        }
    }
}

std::vector<std::size_t> thin_indices(std::size_t n) {
    std::vector<std::size_t> idx;
    if (n <= kMaxPoints) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return idx;
    }
    const std::size_t stride = (n + kMaxPoints - 1) / kMaxPoints;
    for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
    if (idx.back() != n - 1) idx.push_back(n - 1);
    return idx;
}

std::string render_svg(const PlotSpec& spec) {
    if (spec.series.empty()) throw ValidationError("series", "must not be empty");
    if (spec.width < 100 || spec.height < 100) throw ValidationError("width/height", "must be ≥ 100");
    for (const auto& s : spec.series) check_series(s);

    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : spec.series) {
        const auto [tmin, tmax] = std::minmax_element(s.times.begin(), s.times.end());
        const auto [vmin, vmax] = std::minmax_element(s.values.begin(), s.values.end());
        x_lo = std::min(x_lo, *tmin);
        x_hi = std::max(x_hi, *tmax);
        y_lo = std::min(y_lo, *vmin);
        y_hi = std::max(y_hi, *vmax);
    }
    if (spec.y_range) {
        y_lo = spec.y_range->first;
        y_hi = spec.y_range->second;
        if (!std::isfinite(y_lo) || !std::isfinite(y_hi) || !(y_hi > y_lo)) {
            throw ValidationError("y_range", "must be finite with max > min");
        }
    }
    std::tie(x_lo, x_hi) = padded(x_lo, x_hi);
    std::tie(y_lo, y_hi) = padded(y_lo, y_hi);

    const PlotArea area = plot_area(spec.width, spec.height);
    auto px = [&](double t) { return area.left + (t - x_lo) / (x_hi - x_lo) * (area.right - area.left); };
    auto py = [&](double v) { return area.bottom - (v - y_lo) / (y_hi - y_lo) * (area.bottom - area.top); };

    const std::string w = std::to_string(spec.width);
    const std::string h = std::to_string(spec.height);
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + w + "\" height=\"" + h +
           "\" viewBox=\"0 0 " + w + " " + h + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h + "\" fill=\"white\"/>\n";
    if (!spec.title.empty()) {
        out += "<text class=\"title\" x=\"" + fmt(0.5 * spec.width) + "\" y=\"" + fmt(0.5 * area.top) +
               "\" text-anchor=\"middle\" font-size=\"16\">" + escape_xml(spec.title) + "</text>\n";
    }

    out += "<g class=\"axes\" stroke=\"#444\" stroke-width=\"1\">\n";
    out += "<rect x=\"" + fmt(area.left) + "\" y=\"" + fmt(area.top) + "\" width=\"" + fmt(area.right - area.left) +
           "\" height=\"" + fmt(area.bottom - area.top) + "\" fill=\"none\"/>\n";
    const auto x_ticks = nice_ticks(x_lo, x_hi);
    const auto y_ticks = nice_ticks(y_lo, y_hi);
    for (const auto& t : x_ticks) {
        const std::string x = fmt(px(t.value));
        out += "<line x1=\"" + x + "\" y1=\"" + fmt(area.bottom) + "\" x2=\"" + x + "\" y2=\"" +
               fmt(area.bottom + 5) + "\"/>\n";
    }
    for (const auto& t : y_ticks) {
        const std::string y = fmt(py(t.value));
        out += "<line x1=\"" + fmt(area.left - 5) + "\" y1=\"" + y + "\" x2=\"" + fmt(area.left) + "\" y2=\"" + y +
               "\"/>\n";
    }
    out += "</g>\n";

    out += "<g class=\"tick-labels\" fill=\"#222\">\n";
    for (const auto& t : x_ticks) {
        out += "<text class=\"xtick\" x=\"" + fmt(px(t.value)) + "\" y=\"" + fmt(area.bottom + 18) +
               "\" text-anchor=\"middle\">" + t.label + "</text>\n";
    }
    for (const auto& t : y_ticks) {
        out += "<text class=\"ytick\" x=\"" + fmt(area.left - 8) + "\" y=\"" + fmt(py(t.value) + 4) +
               "\" text-anchor=\"end\">" + t.label + "</text>\n";
    }
    out += "</g>\n";

    if (!spec.x_label.empty()) {
        out += "<text class=\"xlabel\" x=\"" + fmt(0.5 * (area.left + area.right)) + "\" y=\"" +
               fmt(spec.height - 0.02 * spec.height) + "\" text-anchor=\"middle\">" + escape_xml(spec.x_label) +
               "</text>\n";
    }
    if (!spec.y_label.empty()) {
        const std::string x = fmt(0.025 * spec.width);
        const std::string y = fmt(0.5 * (area.top + area.bottom));
        out += "<text class=\"ylabel\" x=\"" + x + "\" y=\"" + y + "\" text-anchor=\"middle\" transform=\"rotate(-90 " +
               x + " " + y + ")\">" + escape_xml(spec.y_label) + "</text>\n";
    }

    for (const auto& s : spec.series) {
        const char* colour = kPalette[static_cast<std::size_t>(std::abs(s.style)) % kPalette.size()];
        out += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i : thin_indices(s.times.size())) {
            if (!first) out += ' ';
            first = false;
            out += fmt(px(s.times[i]));
            out += ',';
            out += fmt(py(s.values[i]));
        }
        out += "\"/>\n";
    }

    out += "<g class=\"legend\">\n";
    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const auto& s = spec.series[i];
        const char* colour = kPalette[static_cast<std::size_t>(std::abs(s.style)) % kPalette.size()];
        const double y = area.top + 14.0 + 16.0 * static_cast<double>(i);
        const double x = area.right - 150.0 > area.left ? area.right - 150.0 : area.left + 4.0;
        out += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(y - 4) + "\" x2=\"" + fmt(x + 20) + "\" y2=\"" + fmt(y - 4) +
               "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
        out += "<text class=\"legend-label\" x=\"" + fmt(x + 26) + "\" y=\"" + fmt(y) + "\">" + escape_xml(s.label) +
               "</text>\n";
    }
    out += "</g>\n";
    out += "</svg>\n";
    return out;
}

PlotSpec trajectory_plot(const Trajectory& traj, const std::string& title) {
    PlotSpec spec;
    spec.title = title;
    spec.y_label = "index";
    PlotSeries c{"congestion", traj.times, {}, 0};
    PlotSeries a{"adoption", traj.times, {}, 1};
    c.values.reserve(traj.states.size());
    a.values.reserve(traj.states.size());
    for (const auto& s : traj.states) {
        c.values.push_back(s.congestion);
        a.values.push_back(s.adoption);
    }
    spec.series = {std::move(c), std::move(a)};
    return spec;
}

} // namespace mobisim
