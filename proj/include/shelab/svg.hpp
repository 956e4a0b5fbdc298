#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace shelab {

/// Minimal self-contained SVG chart writer: line/marker series on linear
/// axes with ticks, labels and a legend. No external dependencies.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    struct Series {
        std::vector<double> x, y;
        std::string color;
        std::string label;
        bool line = true;
        bool markers = false;
    };

    void add_line(std::vector<double> x, std::vector<double> y, std::string color,
                  std::string label) {
        series_.push_back({std::move(x), std::move(y), std::move(color), std::move(label), true,
                           false});
    }

    void add_points(std::vector<double> x, std::vector<double> y, std::string color,
                    std::string label) {
        series_.push_back({std::move(x), std::move(y), std::move(color), std::move(label), false,
                           true});
    }

    /// Bars spanning [edges[i], edges[i+1]] with the given heights.
    void add_bars(std::vector<double> edges, std::vector<double> heights, std::string color,
                  std::string label) {
        bar_edges_ = std::move(edges);
        bar_heights_ = std::move(heights);
        bar_color_ = std::move(color);
        bar_label_ = std::move(label);
    }

    void write(std::ostream& os) const {
        const double w = 760, h = 480;
        const double ml = 74, mr = 24, mt = 46, mb = 56;
        double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
        bool seen = false;
        auto grow = [&](double x, double y) {
            if (!std::isfinite(x) || !std::isfinite(y)) return;
            if (!seen) {
                x_min = x_max = x;
                y_min = y_max = y;
                seen = true;
            } else {
                x_min = std::min(x_min, x);
                x_max = std::max(x_max, x);
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        };
        for (const auto& s : series_)
            for (std::size_t i = 0; i < s.x.size(); ++i) grow(s.x[i], s.y[i]);
        for (std::size_t i = 0; i + 1 < bar_edges_.size(); ++i) {
            grow(bar_edges_[i], 0.0);
            grow(bar_edges_[i + 1], bar_heights_[i]);
        }
        if (x_max == x_min) x_max = x_min + 1;
        if (y_max == y_min) y_max = y_min + 1;
        const double x_pad = 0.04 * (x_max - x_min), y_pad = 0.07 * (y_max - y_min);
        x_min -= x_pad;
        x_max += x_pad;
        y_min -= y_pad;
        y_max += y_pad;

        auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (w - ml - mr); };
        auto py = [&](double y) { return h - mb - (y - y_min) / (y_max - y_min) * (h - mt - mb); };

        os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
           << "' viewBox='0 0 " << w << ' ' << h << "'>\n";
        os << "<rect width='100%' height='100%' fill='white'/>\n";
        os << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16' "
              "font-family='sans-serif'>"
           << escape(title_) << "</text>\n";

        // axes and ticks
        os << "<g stroke='black' stroke-width='1'>";
        os << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
           << "'/>";
        os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
           << "'/></g>\n";
        os << "<g font-size='11' font-family='sans-serif'>\n";
        for (double tx : ticks(x_min, x_max)) {
            os << "<line x1='" << px(tx) << "' y1='" << h - mb << "' x2='" << px(tx) << "' y2='"
               << h - mb + 5 << "' stroke='black'/>";
            os << "<text x='" << px(tx) << "' y='" << h - mb + 18
               << "' text-anchor='middle'>" << fmt(tx) << "</text>\n";
        }
        for (double ty : ticks(y_min, y_max)) {
            os << "<line x1='" << ml - 5 << "' y1='" << py(ty) << "' x2='" << ml << "' y2='"
               << py(ty) << "' stroke='black'/>";
            os << "<text x='" << ml - 8 << "' y='" << py(ty) + 4
               << "' text-anchor='end'>" << fmt(ty) << "</text>\n";
        }
        os << "</g>\n";
        os << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 14
           << "' text-anchor='middle' font-size='13' font-family='sans-serif'>" << escape(x_label_)
           << "</text>\n";
        os << "<text x='18' y='" << (mt + h - mb) / 2
           << "' text-anchor='middle' font-size='13' font-family='sans-serif' transform='rotate(-90 "
              "18 "
           << (mt + h - mb) / 2 << ")'>" << escape(y_label_) << "</text>\n";

        // bars first (background)
        if (bar_edges_.size() > 1) {
            os << "<g fill='" << bar_color_ << "' fill-opacity='0.55'>\n";
            for (std::size_t i = 0; i + 1 < bar_edges_.size(); ++i) {
                const double x0 = px(bar_edges_[i]), x1 = px(bar_edges_[i + 1]);
                const double y0 = py(std::max(0.0, y_min)), y1 = py(bar_heights_[i]);
                os << "<rect x='" << x0 << "' y='" << std::min(y0, y1) << "' width='" << x1 - x0
                   << "' height='" << std::abs(y0 - y1) << "'/>\n";
            }
            os << "</g>\n";
        }

        for (const auto& s : series_) {
            if (s.line && s.x.size() > 1) {
                os << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.8' points='";
                for (std::size_t i = 0; i < s.x.size(); ++i)
                    os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
                os << "'/>\n";
            }
            if (s.markers) {
                os << "<g fill='" << s.color << "'>";
                for (std::size_t i = 0; i < s.x.size(); ++i)
                    os << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i]) << "' r='3'/>";
                os << "</g>\n";
            }
        }

        // legend
        double ly = mt + 8;
        os << "<g font-size='12' font-family='sans-serif'>\n";
        auto legend_row = [&](const std::string& color, const std::string& label) {
            if (label.empty()) return;
            os << "<rect x='" << w - mr - 168 << "' y='" << ly - 9
               << "' width='14' height='10' fill='" << color << "'/>";
            os << "<text x='" << w - mr - 150 << "' y='" << ly << "'>" << escape(label)
               << "</text>\n";
            ly += 17;
        };
        if (bar_edges_.size() > 1) legend_row(bar_color_, bar_label_);
        for (const auto& s : series_) legend_row(s.color, s.label);
        os << "</g>\n</svg>\n";
    }

private:
    static std::vector<double> ticks(double lo, double hi) {
        const double span = hi - lo;
        const double raw = span / 6.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        if (raw / mag > 5)
            step = 10 * mag;
        else if (raw / mag > 2)
            step = 5 * mag;
        else if (raw / mag > 1)
            step = 2 * mag;
        std::vector<double> out;
        for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step)
            out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
        return out;
    }

    static std::string fmt(double v) {
        std::ostringstream os;
        os << std::setprecision(5) << v;
        return os.str();
    }

    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                default: out += c;
            }
        }
        return out;
    }

    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
    std::vector<double> bar_edges_, bar_heights_;
    std::string bar_color_, bar_label_;
};

} // namespace shelab
