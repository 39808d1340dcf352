#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bosestats/csv.hpp"

namespace bosestats {

/// Minimal SVG scatter/line plotter for the optional figure output. The CSV
/// files are the numeric authority; this is presentation only.
class SvgPlot {
public:
    SvgPlot(double x_lo, double x_hi, double y_lo, double y_hi)
        : x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi) {}

    void line(const std::vector<double>& xs, const std::vector<double>& ys,
              const std::string& color, bool dashed = false) {
        std::string pts;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) pts += ' ';
            pts += csv_num(px(xs[i])) + "," + csv_num(py(ys[i]));
        }
        body_ += "<polyline fill=\"none\" stroke=\"" + color + "\"" +
                 (dashed ? " stroke-dasharray=\"6,4\"" : "") + " stroke-width=\"1.5\" points=\"" +
                 pts + "\"/>\n";
    }

    void points(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& color) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            body_ += "<circle cx=\"" + csv_num(px(xs[i])) + "\" cy=\"" + csv_num(py(ys[i])) +
                     "\" r=\"3\" fill=\"" + color + "\"/>\n";
        }
    }

    void error_bars(const std::vector<double>& xs, const std::vector<double>& lo,
                    const std::vector<double>& hi, const std::string& color) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            body_ += "<line x1=\"" + csv_num(px(xs[i])) + "\" x2=\"" + csv_num(px(xs[i])) +
                     "\" y1=\"" + csv_num(py(lo[i])) + "\" y2=\"" + csv_num(py(hi[i])) +
                     "\" stroke=\"" + color + "\" stroke-width=\"1\"/>\n";
        }
    }

    void bars(const std::vector<double>& centers, const std::vector<double>& heights, double width,
              const std::string& color) {
        for (std::size_t i = 0; i < centers.size(); ++i) {
            const double x0 = px(centers[i] - width / 2.0);
            const double x1 = px(centers[i] + width / 2.0);
            const double y0 = py(heights[i]);
            const double y1 = py(0.0);
            body_ += "<rect x=\"" + csv_num(x0) + "\" y=\"" + csv_num(y0) + "\" width=\"" +
                     csv_num(x1 - x0) + "\" height=\"" + csv_num(std::max(0.0, y1 - y0)) +
                     "\" fill=\"" + color + "\" fill-opacity=\"0.5\"/>\n";
        }
    }

    std::string render(const std::string& x_label, const std::string& y_label) const {
        std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                          csv_num(kWidth) + "\" height=\"" + csv_num(kHeight) + "\">\n";
        svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        svg += "<line x1=\"" + csv_num(kMargin) + "\" y1=\"" + csv_num(kHeight - kMargin) +
               "\" x2=\"" + csv_num(kWidth - kMargin) + "\" y2=\"" + csv_num(kHeight - kMargin) +
               "\" stroke=\"black\"/>\n";
        svg += "<line x1=\"" + csv_num(kMargin) + "\" y1=\"" + csv_num(kMargin) + "\" x2=\"" +
               csv_num(kMargin) + "\" y2=\"" + csv_num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + csv_num(kWidth / 2) + "\" y=\"" + csv_num(kHeight - 8) +
               "\" font-size=\"12\" text-anchor=\"middle\">" + x_label + "</text>\n";
        svg += "<text x=\"14\" y=\"" + csv_num(kHeight / 2) +
               "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
               csv_num(kHeight / 2) + ")\">" + y_label + "</text>\n";
        svg += body_;
        svg += "</svg>\n";
        return svg;
    }

private:
    static constexpr double kWidth = 640, kHeight = 420, kMargin = 50;

    double px(double x) const {
        return kMargin + (x - x_lo_) / (x_hi_ - x_lo_) * (kWidth - 2 * kMargin);
    }
    double py(double y) const {
        return kHeight - kMargin - (y - y_lo_) / (y_hi_ - y_lo_) * (kHeight - 2 * kMargin);
    }

    double x_lo_, x_hi_, y_lo_, y_hi_;
    std::string body_;
};

} // namespace bosestats
