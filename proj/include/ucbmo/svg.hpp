#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucbmo/harness.hpp"

namespace ucbmo {

// Static SVG rendering of mean-PER curves with confidence bands. Pure
// function of the series data: polylines for means, translucent polygons
// for mean +/- half-width, no external plotting dependency.

struct PlotOptions {
    int width = 880;
    int height = 560;
    int smooth_window = 0;  // 0 or 1 disables the trailing moving average
    std::string title = "Per Episode Regret";
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

/// Largest step from {1, 2, 5} * 10^n that yields at least `target` steps.
inline double nice_step(double range, int target) {
    if (range <= 0.0) return 1.0;
    const double raw = range / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {5.0, 2.0, 1.0}) {
        if (mag * m <= raw) return mag * m;
    }
    return mag;
}

/// Trailing moving average: entry k averages the last `window` values up to
/// and including k (fewer at the start).
inline std::vector<double> smooth_trailing(const std::vector<double>& values, int window) {
    if (window <= 1) return values;
    std::vector<double> out(values.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        sum += values[k];
        if (k >= static_cast<std::size_t>(window)) sum -= values[k - window];
        const std::size_t n = std::min<std::size_t>(k + 1, static_cast<std::size_t>(window));
        out[k] = sum / static_cast<double>(n);
    }
    return out;
}

}  // namespace detail

inline std::string render_per_plot(const std::vector<VariantSeries>& series,
                                   const PlotOptions& options = {}) {
    if (series.empty()) throw std::invalid_argument("render_per_plot: no variants to plot");
    const std::size_t k_total = series[0].mean_per.size();
    if (k_total == 0) throw std::invalid_argument("render_per_plot: no episodes to plot");
    for (const VariantSeries& s : series)
        if (s.mean_per.size() != k_total || s.ci_half_width.size() != k_total)
            throw std::invalid_argument("render_per_plot: series lengths differ");

    struct Curve {
        std::string name;
        std::vector<double> mean, lo, hi;
    };
    std::vector<Curve> curves;
    curves.reserve(series.size());
    double y_min = 0.0, y_max = 0.0;
    for (const VariantSeries& s : series) {
        Curve c;
        c.name = s.variant;
        c.mean = detail::smooth_trailing(s.mean_per, options.smooth_window);
        std::vector<double> lo(k_total), hi(k_total);
        for (std::size_t k = 0; k < k_total; ++k) {
            lo[k] = s.mean_per[k] - s.ci_half_width[k];
            hi[k] = s.mean_per[k] + s.ci_half_width[k];
        }
        c.lo = detail::smooth_trailing(lo, options.smooth_window);
        c.hi = detail::smooth_trailing(hi, options.smooth_window);
        for (std::size_t k = 0; k < k_total; ++k) {
            y_min = std::min(y_min, c.lo[k]);
            y_max = std::max(y_max, c.hi[k]);
        }
        curves.push_back(std::move(c));
    }
    if (y_max <= y_min) y_max = y_min + 1.0;

    const double left = 64, right = options.width - 18;
    const double top = 34, bottom = options.height - 46;
    const double x_lo = 1.0, x_hi = static_cast<double>(k_total);
    auto px = [&](double episode) {
        if (x_hi == x_lo) return (left + right) / 2.0;
        return left + (episode - x_lo) / (x_hi - x_lo) * (right - left);
    };
    auto py = [&](double value) {
        return bottom - (value - y_min) / (y_max - y_min) * (bottom - top);
    };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    const std::size_t palette_size = sizeof(palette) / sizeof(palette[0]);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
        << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width << ' '
        << options.height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << options.title << "</text>\n";

    // Axes with tick marks and labels.
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    const double x_step = detail::nice_step(x_hi - x_lo, 6);
    for (double t = std::ceil(x_lo / x_step) * x_step; t <= x_hi + 1e-9; t += x_step) {
        const double x = px(t);
        svg << "<line x1=\"" << detail::svg_num(x) << "\" y1=\"" << bottom << "\" x2=\""
            << detail::svg_num(x) << "\" y2=\"" << bottom + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << detail::svg_num(x) << "\" y=\"" << bottom + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::tick_label(t) << "</text>\n";
    }
    const double y_step = detail::nice_step(y_max - y_min, 5);
    for (double t = std::ceil(y_min / y_step) * y_step; t <= y_max + 1e-9; t += y_step) {
        const double y = py(t);
        svg << "<line x1=\"" << left - 5 << "\" y1=\"" << detail::svg_num(y) << "\" x2=\""
            << left << "\" y2=\"" << detail::svg_num(y) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << left - 9 << "\" y=\"" << detail::svg_num(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::tick_label(t) << "</text>\n";
    }
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << options.height - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">episode"
        << "</text>\n";
    svg << "<text x=\"16\" y=\"" << (top + bottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << (top + bottom) / 2 << ")\">mean PER</text>\n";

    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const Curve& c = curves[ci];
        const char* color = palette[ci % palette_size];

        // Confidence band: upper edge forward, lower edge back.
        svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" "
            << "points=\"";
        for (std::size_t k = 0; k < k_total; ++k)
            svg << detail::svg_num(px(static_cast<double>(k) + 1)) << ','
                << detail::svg_num(py(c.hi[k])) << ' ';
        for (std::size_t k = k_total; k-- > 0;)
            svg << detail::svg_num(px(static_cast<double>(k) + 1)) << ','
                << detail::svg_num(py(c.lo[k])) << ' ';
        svg << "\"/>\n";

        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" "
            << "points=\"";
        for (std::size_t k = 0; k < k_total; ++k)
            svg << detail::svg_num(px(static_cast<double>(k) + 1)) << ','
                << detail::svg_num(py(c.mean[k])) << ' ';
        svg << "\"/>\n";

        const double ly = top + 16 + 18 * static_cast<double>(ci);
        svg << "<line x1=\"" << right - 150 << "\" y1=\"" << detail::svg_num(ly) << "\" x2=\""
            << right - 122 << "\" y2=\"" << detail::svg_num(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << right - 116 << "\" y=\"" << detail::svg_num(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << c.name << "</text>\n";
    }
    svg << "</svg>\n";
    return std::move(svg).str();
}

}  // namespace ucbmo
