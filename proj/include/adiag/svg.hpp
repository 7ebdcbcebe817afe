#pragma once

// Plain-text SVG emission: eigenvalue-field polylines for 1-d meshes and
// plaquette-curvature heat maps for 2-d meshes. No plotting dependency; the
// output is SVG 1.1 and small enough to inspect by eye.

#include <iomanip>
#include <sstream>

#include "adiag/field.hpp"

namespace adiag {

namespace detail {

inline const char* band_color(int j) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};
    return palette[j % 8];
}

inline std::string svg_header(double w, double h) {
    std::ostringstream ss;
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w
       << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
       << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    return ss.str();
}

// diverging blue-white-red by sign and magnitude
inline std::string heat_color(double v, double vmax) {
    const double t = (vmax > 0.0) ? std::clamp(v / vmax, -1.0, 1.0) : 0.0;
    int r = 255, g = 255, b = 255;
    if (t >= 0.0) {
        g = static_cast<int>(255 * (1.0 - t));
        b = g;
    } else {
        r = static_cast<int>(255 * (1.0 + t));
        g = r;
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace detail

// lambda_j(x) against the 1-d parameter (interval coordinate or angle)
inline std::string svg_eigenvalue_fields(const Mesh& mesh,
                                         const std::vector<ScalarField>& bands,
                                         const std::string& title) {
    const double w = 800, h = 500, ml = 60, mr = 20, mt = 40, mb = 40;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& band : bands)
        for (const cxd& v : band.values) {
            lo = std::min(lo, v.real());
            hi = std::max(hi, v.real());
        }
    if (!(hi > lo)) {
        hi = lo + 1.0;
        lo -= 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    double xmax = 0.0;
    for (const MeshNode& node : mesh.nodes) xmax = std::max(xmax, node.coord[0]);
    if (xmax == 0.0) xmax = 1.0;

    std::ostringstream ss;
    ss << detail::svg_header(w, h);
    ss << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
       << " font-size=\"16\">" << title << "</text>\n";
    ss << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << (w - ml - mr)
       << "\" height=\"" << (h - mt - mb) << "\" fill=\"none\" stroke=\"#888\"/>\n";
    auto px = [&](double x) { return ml + (w - ml - mr) * (x / xmax); };
    auto py = [&](double y) { return mt + (h - mt - mb) * (1.0 - (y - lo) / (hi - lo)); };
    for (size_t j = 0; j < bands.size(); ++j) {
        ss << "<polyline fill=\"none\" stroke=\"" << detail::band_color(static_cast<int>(j))
           << "\" stroke-width=\"1.5\" points=\"";
        for (int x = 0; x < mesh.node_count(); ++x)
            ss << px(mesh.nodes[x].coord[0]) << "," << py(bands[j].real_at(x)) << " ";
        ss << "\"/>\n";
    }
    ss << "<text x=\"" << ml << "\" y=\"" << h - 10 << "\" font-family=\"sans-serif\""
       << " font-size=\"12\">min " << std::setprecision(6) << lo + pad << ", max " << hi - pad
       << "</text>\n</svg>\n";
    return ss.str();
}

// plaquette curvature heat map; square and torus as one grid, the sphere as
// six face panels in a row
inline std::string svg_curvature_map(const Mesh& mesh, const std::vector<double>& curvature,
                                     const std::string& title) {
    double vmax = 0.0;
    for (double v : curvature) vmax = std::max(vmax, std::abs(v));
    double total = 0.0;
    for (double v : curvature) total += v;

    const int n = mesh.resolution;
    const int cells = (mesh.kind == MeshKind::square) ? n - 1 : n;
    const double cell = 14.0;
    const int panels = (mesh.kind == MeshKind::sphere) ? 6 : 1;
    const double gap = 10.0;
    const double w = 40 + panels * (cells * cell + gap), h = cells * cell + 90;

    std::ostringstream ss;
    ss << detail::svg_header(w, h);
    ss << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
       << " font-size=\"15\">" << title << "</text>\n";
    for (int p = 0; p < mesh.plaquette_count(); ++p) {
        int panel = 0, i = 0, j = 0;
        if (mesh.kind == MeshKind::sphere) {
            panel = p / (n * n);
            const int r = p % (n * n);
            i = r % n;
            j = r / n;
        } else {
            i = p % cells;
            j = p / cells;
        }
        const double x0 = 20 + panel * (cells * cell + gap) + i * cell;
        const double y0 = 40 + (cells - 1 - j) * cell;
        ss << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << cell << "\" height=\""
           << cell << "\" fill=\"" << detail::heat_color(curvature[p], vmax)
           << "\" stroke=\"none\"/>\n";
    }
    ss << "<text x=\"20\" y=\"" << h - 30 << "\" font-family=\"sans-serif\" font-size=\"12\">"
       << "max |curvature| " << std::setprecision(6) << vmax << "</text>\n";
    ss << "<text x=\"20\" y=\"" << h - 12 << "\" font-family=\"sans-serif\" font-size=\"12\">"
       << "total / 2pi = " << std::setprecision(6) << total / (2.0 * M_PI) << "</text>\n</svg>\n";
    return ss.str();
}

}  // namespace adiag
