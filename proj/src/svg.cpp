#include "gamdiag/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>

namespace gamdiag::svg {

namespace {

constexpr double kSize = 480.0;
constexpr double kMargin = 40.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void add(std::span<const double> v) {
        for (double a : v) add(a);
    }
    void finish() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

class Canvas {
public:
    Canvas(Range x, Range y) : x_(x), y_(y) {
        x_.finish();
        y_.finish();
        out_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kSize) + "\" height=\"" +
               num(kSize) + "\" viewBox=\"0 0 " + num(kSize) + " " + num(kSize) + "\">\n";
        out_ += "<rect x=\"0\" y=\"0\" width=\"" + num(kSize) + "\" height=\"" + num(kSize) +
                "\" fill=\"white\"/>\n";
    }

    double px(double x) const {
        return kMargin + (x - x_.lo) / (x_.hi - x_.lo) * (kSize - 2 * kMargin);
    }
    double py(double y) const {
        return kSize - kMargin - (y - y_.lo) / (y_.hi - y_.lo) * (kSize - 2 * kMargin);
    }

    void polyline(std::span<const double> x, std::span<const double> y, const std::string& stroke,
                  double width = 1.5) {
        std::string pts;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
            pts += num(px(x[i])) + "," + num(py(y[i])) + " ";
        }
        out_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) +
                "\" points=\"" + pts + "\"/>\n";
    }

    void ribbon(std::span<const double> x, std::span<const double> lo, std::span<const double> hi,
                const std::string& fill) {
        std::string pts;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (std::isfinite(lo[i])) pts += num(px(x[i])) + "," + num(py(lo[i])) + " ";
        for (std::size_t i = x.size(); i-- > 0;)
            if (std::isfinite(hi[i])) pts += num(px(x[i])) + "," + num(py(hi[i])) + " ";
        out_ += "<polygon fill=\"" + fill + "\" fill-opacity=\"0.3\" stroke=\"none\" points=\"" +
                pts + "\"/>\n";
    }

    void dot(double x, double y, const std::string& fill) {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        out_ += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"3\" fill=\"" +
                fill + "\"/>\n";
    }

    void cell(double x0, double x1, double y0, double y1, const std::string& fill,
              double opacity = 1.0) {
        double a = px(x0), b = px(x1), c = py(y1), d = py(y0);
        out_ += "<rect x=\"" + num(a) + "\" y=\"" + num(c) + "\" width=\"" + num(b - a + 0.5) +
                "\" height=\"" + num(d - c + 0.5) + "\" fill=\"" + fill + "\" fill-opacity=\"" +
                num(opacity) + "\"/>\n";
    }

    void raw(const std::string& s) { out_ += s; }

    std::string finish() {
        out_ += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" +
                num(kSize - 2 * kMargin) + "\" height=\"" + num(kSize - 2 * kMargin) +
                "\" fill=\"none\" stroke=\"black\"/>\n</svg>\n";
        return std::move(out_);
    }

private:
    Range x_, y_;
    std::string out_;
};

std::string rgb(double r, double g, double b) {
    char buf[16];
    auto c = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255)); };
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c(r), c(g), c(b));
    return buf;
}

// blue-white-red, t in [-1, 1]
std::string diverging(double t) {
    if (!std::isfinite(t)) return "#cccccc";
    t = std::clamp(t, -1.0, 1.0);
    return t < 0 ? rgb(1 + t, 1 + t, 1) : rgb(1, 1 - t, 1 - t);
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double a : v)
        if (std::isfinite(a)) m = std::max(m, std::abs(a));
    return m > 0.0 ? m : 1.0;
}

}  // namespace

std::string render(const BinnedQQ& qq) {
    Range x, y;
    x.add(qq.sbar);
    y.add(qq.s);
    for (const auto& b : qq.bands) {
        y.add(b.lower);
        y.add(b.upper);
    }
    if (qq.envelope) {
        y.add(qq.envelope->lower);
        y.add(qq.envelope->upper);
    }
    Canvas c(x, y);
    if (qq.envelope) c.ribbon(qq.sbar, qq.envelope->lower, qq.envelope->upper, "#999999");
    for (const auto& b : qq.bands) c.ribbon(qq.sbar, b.lower, b.upper, "#6699cc");
    c.polyline(qq.sbar, qq.sbar, "#888888", 1.0);
    c.polyline(qq.sbar, qq.s, "black");
    return c.finish();
}

std::string render(const SummarySeries& series) {
    Range x, y;
    x.add(series.centers);
    y.add(series.s);
    y.add(series.lo);
    y.add(series.hi);
    Canvas c(x, y);
    c.ribbon(series.centers, series.lo, series.hi, "#999999");
    for (std::size_t k = 0; k < series.bins(); ++k) {
        bool outside = std::isfinite(series.lo[k]) &&
                       (series.s[k] < series.lo[k] || series.s[k] > series.hi[k]);
        if (!series.flags[k]) c.dot(series.centers[k], series.s[k], outside ? "#cc2222" : "black");
    }
    return c.finish();
}

std::string render(const HexSummaryGrid& grid) {
    const auto& lat = grid.lattice;
    Range x, y;
    x.add(lat.x1_lo);
    x.add(lat.x1_hi);
    y.add(lat.x2_lo);
    y.add(lat.x2_hi);
    Canvas c(x, y);
    const double rx = lat.w / std::sqrt(3.0) * (lat.x1_hi - lat.x1_lo);
    const double ry = lat.w / std::sqrt(3.0) * (lat.x2_hi - lat.x2_lo);
    for (const auto& h : grid.hexes) {
        std::string pts;
        for (int k = 0; k < 6; ++k) {
            double a = (60.0 * k + 30.0) * 3.14159265358979323846 / 180.0;
            pts += num(c.px(h.cx + rx * std::cos(a))) + "," + num(c.py(h.cy + ry * std::sin(a))) + " ";
        }
        std::string fill = h.flag ? "#cccccc" : diverging(h.z / 3.0);
        c.raw("<polygon stroke=\"none\" fill=\"" + fill + "\" points=\"" + pts + "\"/>\n");
    }
    return c.finish();
}

std::string render(const GlyphGrid& grid) {
    const auto& l = grid.layout;
    Range x, y;
    x.add(l.x1_lo);
    x.add(l.x1_hi);
    y.add(l.x2_lo);
    y.add(l.x2_hi);
    Canvas c(x, y);
    for (const auto& g : grid.cells) {
        if (g.empty()) continue;
        std::vector<double> gx, gy;
        const double w = g.x1_hi - g.x1_lo, h = g.x2_hi - g.x2_lo;
        if (g.worm) {
            const auto& wm = *g.worm;
            double dmax = std::max(1.0, max_abs(wm.deviation));
            for (std::size_t i = 0; i < wm.theoretical.size(); ++i) {
                gx.push_back(g.x1_lo + w * (0.1 + 0.8 * (wm.theoretical[i] + 3.0) / 6.0));
                gy.push_back(g.x2_lo + h * (0.5 + 0.4 * wm.deviation[i] / dmax));
            }
        } else {
            const auto& d = *g.kde;
            double dmax = max_abs(d);
            for (std::size_t i = 0; i < d.size(); ++i) {
                gx.push_back(g.x1_lo + w * (0.05 + 0.9 * static_cast<double>(i) /
                                                       static_cast<double>(d.size() - 1)));
                gy.push_back(g.x2_lo + h * (0.1 + 0.8 * d[i] / dmax));
            }
        }
        c.polyline(gx, gy, "black", 1.0);
    }
    return c.finish();
}

std::string render(const DensityField& field) {
    Range x, y;
    x.add(field.x.lo);
    x.add(field.x.hi);
    y.add(field.r.lo);
    y.add(field.r.hi);
    Canvas c(x, y);
    const double scale = max_abs(field.delta);
    const double dx = field.x.step() / 2, dr = field.r.step() / 2;
    for (std::size_t ix = 0; ix < field.x.knots; ++ix) {
        if (field.mask[ix]) continue;
        for (std::size_t ir = 0; ir < field.r.knots; ++ir) {
            double xv = field.x.knot(ix), rv = field.r.knot(ir);
            c.cell(xv - dx, xv + dx, rv - dr, rv + dr, diverging(field.at(ix, ir) / scale));
        }
    }
    return c.finish();
}

std::string render(const EffectSurface& surf, const std::string& mode) {
    Range x, y;
    x.add(surf.x1);
    y.add(surf.x2);
    Canvas c(x, y);
    const auto& values = mode == "perturb" && surf.perturbed ? *surf.perturbed : surf.fhat;
    const double scale = max_abs(values);
    const std::size_t n1 = surf.x1.size(), n2 = surf.x2.size();
    auto half = [](const std::vector<double>& a, std::size_t i) {
        if (a.size() < 2) return 0.5;
        return i + 1 < a.size() ? (a[i + 1] - a[i]) / 2 : (a[i] - a[i - 1]) / 2;
    };
    for (std::size_t i2 = 0; i2 < n2; ++i2)
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            std::size_t k = i2 * n1 + i1;
            double op = mode == "opacity" && surf.opacity ? (*surf.opacity)[k] : 1.0;
            double h1 = half(surf.x1, i1), h2 = half(surf.x2, i2);
            c.cell(surf.x1[i1] - h1, surf.x1[i1] + h1, surf.x2[i2] - h2, surf.x2[i2] + h2,
                   diverging(values[k] / scale), op);
        }
    return c.finish();
}

}  // namespace gamdiag::svg
