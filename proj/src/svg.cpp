#include "vmass/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace vmass {

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string truss_svg(const GroundStructure& gs, const LimitShape& shape) {
    double lox = 1e300, loy = 1e300, hix = -1e300, hiy = -1e300;
    for (const auto& n : gs.nodes) {
        lox = std::min(lox, n.pos[0]);
        hix = std::max(hix, n.pos[0]);
        loy = std::min(loy, n.pos[1]);
        hiy = std::max(hiy, n.pos[1]);
    }
    const double span = std::max({hix - lox, hiy - loy, 1e-9});
    const double margin = 0.1 * span;
    const double scale = 600.0 / (span + 2.0 * margin);
    auto px = [&](double x) { return (x - lox + margin) * scale; };
    // svg y axis points down
    auto py = [&](double y) { return (hiy - y + margin) * scale; };

    double wmax = 0.0;
    for (double w : shape.weights) wmax = std::max(wmax, w);
    if (wmax == 0.0) wmax = 1.0;

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
                      "viewBox=\"0 0 600 600\">\n<rect width=\"600\" height=\"600\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < gs.bars.size(); ++i) {
        const Bar& bar = gs.bars[i];
        const auto& pa = gs.nodes[static_cast<std::size_t>(bar.a)].pos;
        const auto& pb = gs.nodes[static_cast<std::size_t>(bar.b)].pos;
        double w = shape.weights[i];
        std::string color = "#cccccc";
        double stroke = 0.5;
        if (w > 1e-12) {
            color = shape.q[i] >= 0.0 ? "#d62728" : "#1f77b4";  // red tension, blue compression
            stroke = 1.0 + 14.0 * w / wmax;
        }
        out += "<line x1=\"" + num(px(pa[0])) + "\" y1=\"" + num(py(pa[1])) + "\" x2=\"" +
               num(px(pb[0])) + "\" y2=\"" + num(py(pb[1])) + "\" stroke=\"" + color +
               "\" stroke-width=\"" + num(stroke) + "\" stroke-linecap=\"round\"/>\n";
    }
    for (const auto& n : gs.nodes) {
        out += "<circle cx=\"" + num(px(n.pos[0])) + "\" cy=\"" + num(py(n.pos[1])) +
               "\" r=\"3\" fill=\"#333333\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string laminate_svg(const LaminateConstruction& c) {
    if (c.dim != 2) throw std::invalid_argument("laminate_svg: 2D constructions only");
    const double size = 600.0;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
                      "viewBox=\"0 0 600 600\">\n<rect width=\"600\" height=\"600\" fill=\"white\" "
                      "stroke=\"#333333\"/>\n";
    const char* colors[2] = {"#d6272880", "#1f77b480"};
    for (std::size_t f = 0; f < c.families.size(); ++f) {
        const SlabFamily& fam = c.families[f];
        const double width = fam.fraction() / fam.periods;
        for (int i = 0; i < fam.periods; ++i) {
            double lo = static_cast<double>(i) / fam.periods;
            if (fam.axis == 0) {
                out += "<rect x=\"" + num(lo * size) + "\" y=\"0\" width=\"" + num(width * size) +
                       "\" height=\"" + num(size) + "\" fill=\"" + colors[f % 2] + "\"/>\n";
            } else {
                // svg y axis points down; mirror the slab position
                out += "<rect x=\"0\" y=\"" + num((1.0 - lo - width) * size) + "\" width=\"" +
                       num(size) + "\" height=\"" + num(width * size) + "\" fill=\"" +
                       colors[f % 2] + "\"/>\n";
            }
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace vmass
