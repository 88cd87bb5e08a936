#include "json_util.hpp"

#include <cstdio>
#include <map>
#include <sstream>

namespace setreach
{

namespace
{

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
    "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Polygon of one record in plot coordinates, as a 2 x m vertex matrix.
Matrix polygon(const FlowpipeRecord& r, int i, int j)
{
    if (i >= 0 && j >= 0)
        return project_2d(r.set, i, j).vertices();
    const int d = i >= 0 ? i : j;
    Vector e = Vector::Zero(dim(r.set));
    e(d) = 1.0;
    const double hi = support_value(r.set, e);
    const double lo = -support_value(r.set, -e);
    Matrix P(2, 4);
    P << r.t_lo, r.t_hi, r.t_hi, r.t_lo, lo, lo, hi, hi;
    if (j < 0)
        P.row(0).swap(P.row(1));
    return P;
}

std::string esc(const std::string& in)
{
    std::string out;
    for (char c : in)
    {
        switch (c)
        {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

std::string plot_svg(const FlowpipeFile& f, int i, int j)
{
    if (i == j)
        throw std::invalid_argument("plot: the two dimensions must differ");
    for (int d : {i, j})
        if (d < -1 || d >= f.dim)
            throw std::invalid_argument("plot: dimension " + std::to_string(d) + " is out of range for a "
                                        + std::to_string(f.dim) + "-dimensional flowpipe");

    std::vector<std::pair<const FlowpipeRecord*, Matrix>> polys;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const FlowpipeRecord& r : f.records)
    {
        if (is_empty(r.set))
            continue;
        Matrix P = polygon(r, i, j);
        xmin = std::min(xmin, P.row(0).minCoeff());
        xmax = std::max(xmax, P.row(0).maxCoeff());
        ymin = std::min(ymin, P.row(1).minCoeff());
        ymax = std::max(ymax, P.row(1).maxCoeff());
        polys.emplace_back(&r, std::move(P));
    }
    if (polys.empty())
        xmin = ymin = 0.0, xmax = ymax = 1.0;
    const double w = 800, h = 600, pad = 50;
    const double sx = (w - 2 * pad) / std::max(xmax - xmin, 1e-12);
    const double sy = (h - 2 * pad) / std::max(ymax - ymin, 1e-12);

    std::map<std::string, std::string> colors;
    std::vector<std::string> order;
    for (const auto& [r, P] : polys)
        if (!colors.count(r->mode))
        {
            colors[r->mode] = kPalette[order.size() % std::size(kPalette)];
            order.push_back(r->mode);
        }

    auto label = [](int d) { return d < 0 ? std::string("t") : "x" + std::to_string(d); };
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    // Points are kept in data coordinates; the group transform maps them to the canvas.
    s << "<g transform=\"matrix(" << num(sx) << " 0 0 " << num(-sy) << ' ' << num(pad - sx * xmin) << ' '
      << num(h - pad + sy * ymin) << ")\">\n";
    for (const auto& [r, P] : polys)
    {
        const std::string& c = colors[r->mode];
        s << "<polygon data-step=\"" << r->step << "\"";
        if (!r->mode.empty())
            s << " data-mode=\"" << esc(r->mode) << "\"";
        s << " fill=\"" << c << "\" fill-opacity=\"0.35\" stroke=\"" << c
          << "\" stroke-width=\"1\" vector-effect=\"non-scaling-stroke\" points=\"";
        for (Eigen::Index k = 0; k < P.cols(); ++k)
            s << (k ? " " : "") << num(P(0, k)) << ',' << num(P(1, k));
        s << "\"/>\n";
    }
    s << "</g>\n";
    s << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << w / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">" << label(i) << " ["
      << num(xmin) << ", " << num(xmax) << "]</text>\n";
    s << "<text x=\"15\" y=\"" << h / 2 << "\" transform=\"rotate(-90 15 " << h / 2 << ")\" text-anchor=\"middle\">"
      << label(j) << " [" << num(ymin) << ", " << num(ymax) << "]</text>\n";
    for (std::size_t k = 0; k < order.size(); ++k)
    {
        if (order[k].empty())
            continue;
        const double y = pad + 18.0 * static_cast<double>(k);
        s << "<rect x=\"" << w - pad - 110 << "\" y=\"" << y - 10 << "\" width=\"12\" height=\"12\" fill=\""
          << colors[order[k]] << "\"/>\n";
        s << "<text x=\"" << w - pad - 92 << "\" y=\"" << y << "\">" << esc(order[k]) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

} // namespace setreach
