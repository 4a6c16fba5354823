#include "gamdiag/json_io.hpp"

#include <cmath>

namespace gamdiag {

namespace {

Json header(const char* kind) { return Json{{"v", kSchemaVersion}, {"kind", kind}}; }

Json band_json(const Band& b) { return Json{{"name", b.name}, {"lower", b.lower}, {"upper", b.upper}}; }

Json nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json numbers(const std::vector<double>& v) {
    Json arr = Json::array();
    for (double a : v) arr.push_back(nullable(a));
    return arr;
}

Json axis_json(const Axis& a) {
    return Json{{"lo", a.lo}, {"hi", a.hi}, {"knots", a.knots}, {"values", a.values()}};
}

}  // namespace

Json to_json(const BinnedQQ& qq) {
    Json j = header("qq");
    j["source"] = qq.source == QQSource::Analytic ? "analytic" : "simulation";
    j["b0"] = qq.b0;
    j["points"] = qq.points;
    j["clip_count"] = qq.clip_count;
    j["s"] = qq.s;
    j["sbar"] = qq.sbar;
    j["counts"] = qq.counts;
    j["bands"] = Json::array();
    for (const auto& b : qq.bands) j["bands"].push_back(band_json(b));
    j["envelope"] = qq.envelope ? band_json(*qq.envelope) : Json(nullptr);
    return j;
}

Json to_json(const SummarySeries& series) {
    Json j = header("check1d");
    j["summary"] = series.summary;
    j["alpha"] = series.alpha;
    j["l"] = series.replicates;
    j["edges"] = series.edges;
    j["centers"] = numbers(series.centers);
    j["s"] = numbers(series.s);
    j["lo"] = numbers(series.lo);
    j["hi"] = numbers(series.hi);
    j["counts"] = series.counts;
    j["flags"] = series.flags;
    return j;
}

Json to_json(const HexSummaryGrid& grid) {
    Json j = header("check2d");
    const auto& lat = grid.lattice;
    j["summary"] = grid.summary;
    j["l"] = grid.replicates;
    j["lattice"] = {{"w", lat.w},
                    {"row_height", lat.row_height()},
                    {"row_offset", lat.w / 2.0},
                    {"x1_range", {lat.x1_lo, lat.x1_hi}},
                    {"x2_range", {lat.x2_lo, lat.x2_hi}}};
    Json hexes = Json::array();
    for (const auto& h : grid.hexes) {
        hexes.push_back({{"q", h.index.col},
                         {"r", h.index.row},
                         {"center", {h.cx, h.cy}},
                         {"count", h.count},
                         {"s", nullable(h.s)},
                         {"mean", nullable(h.sim_mean)},
                         {"sd", nullable(h.sim_sd)},
                         {"z", nullable(h.z)},
                         {"flag", h.flag}});
    }
    j["hexes"] = std::move(hexes);
    return j;
}

Json to_json(const GlyphGrid& grid) {
    Json j = header("glyphs");
    j["glyph"] = grid.kind;
    j["nx"] = grid.layout.nx;
    j["ny"] = grid.layout.ny;
    j["r_axis"] = grid.r_axis ? axis_json(*grid.r_axis) : Json(nullptr);
    Json cells = Json::array();
    for (const auto& g : grid.cells) {
        Json c{{"ix", g.ix},
               {"iy", g.iy},
               {"bounds", {g.x1_lo, g.x1_hi, g.x2_lo, g.x2_hi}},
               {"count", g.count},
               {"kind", grid.kind}};
        if (g.worm) {
            c["payload"] = {{"theoretical", g.worm->theoretical},
                            {"deviation", g.worm->deviation},
                            {"half_width", g.worm->half_width},
                            {"outside", g.worm->outside}};
        } else if (g.kde) {
            c["payload"] = {{"density", *g.kde}};
        } else {
            c["payload"] = nullptr;
        }
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    return j;
}

Json to_json(const DensityField& field) {
    Json j = header("denscheck");
    j["distance"] = field.distance;
    j["reference"] = field.reference;
    j["hx"] = field.hx;
    j["hr"] = field.hr;
    j["x"] = axis_json(field.x);
    j["r"] = axis_json(field.r);
    j["shape"] = {field.x.knots, field.r.knots};
    j["layout"] = "x-major";
    j["delta"] = numbers(field.delta);
    j["mask"] = field.mask;
    return j;
}

Json to_json(const EffectSurface& surf, const std::string& mode, std::optional<std::uint64_t> seed,
             double ci_k) {
    Json j = header("effect");
    j["mode"] = mode;
    j["x1"] = surf.x1;
    j["x2"] = surf.x2;
    j["shape"] = {surf.x2.size(), surf.x1.size()};
    j["layout"] = "x2-major";
    j["params"] = {{"delta", surf.params.delta}, {"gamma", surf.params.gamma}, {"beta", surf.params.beta}};
    j["fhat"] = surf.fhat;
    j["vhat"] = surf.vhat;
    std::vector<double> lower(surf.cells()), upper(surf.cells());
    for (std::size_t c = 0; c < surf.cells(); ++c) {
        double se = std::sqrt(surf.vhat[c]);
        lower[c] = surf.fhat[c] - ci_k * se;
        upper[c] = surf.fhat[c] + ci_k * se;
    }
    j["ci_k"] = ci_k;
    j["lower"] = std::move(lower);
    j["upper"] = std::move(upper);
    if (surf.opacity) j["opacity"] = *surf.opacity;
    if (surf.perturbed) j["perturbed"] = *surf.perturbed;
    if (seed) j["seed"] = *seed;
    return j;
}

Json error_json(const std::string& code, const std::string& message, const std::string& param) {
    Json j{{"v", kSchemaVersion}, {"code", code}, {"message", message}};
    j["param"] = param.empty() ? Json(nullptr) : Json(param);
    return j;
}

Json error_json(const Error& e) { return error_json(e.code(), e.what(), e.param()); }

std::string dump(const Json& j) { return j.dump(); }

}  // namespace gamdiag
