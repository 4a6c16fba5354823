// Acceptance suite: one criterion per invocation, one PASS/FAIL line each.
//   gamdiag_acceptance <criterion>|all

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gamdiag/density.hpp"
#include "gamdiag/effect.hpp"
#include "gamdiag/grid_checks.hpp"
#include "gamdiag/qq.hpp"
#include "gamdiag/residuals.hpp"
#include "gamdiag/scenarios.hpp"
#include "oracles.hpp"
#include "ridge_smoother.hpp"

using namespace gamdiag;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
    }
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct GaussianData {
    std::vector<double> y, mu, sigma;
};

GaussianData gaussian_data(std::size_t n, std::uint64_t seed) {
    GaussianData d;
    d.y.resize(n);
    d.mu.resize(n);
    d.sigma.resize(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    for (std::size_t i = 0; i < n; ++i) {
        d.mu[i] = std::sin(1e-5 * static_cast<double>(i));
        d.sigma[i] = 1.0 + 0.5 * static_cast<double>(i % 3);
        d.y[i] = d.mu[i] + d.sigma[i] * nd(rng);
    }
    return d;
}

ResidualVector scenario_residuals(const Scenario& sc) {
    return transform(sc.dataset, *make_family(sc.info.family), ResidualType::Quantile);
}

SimulatedResiduals scenario_sims(const Scenario& sc, std::size_t l, std::uint64_t seed) {
    auto family = make_family(sc.info.family);
    ModelColumns model(sc.dataset, *family);
    return simulate_residuals(model, ResidualType::Quantile, l, seed);
}

// transform + sort + bin_qq(b0=1000) + normal_band on n = 10^6, one thread
Outcome perf_qq() {
    Outcome o;
    const std::size_t n = 1000000;
    auto d = gaussian_data(n, 1);
    auto g = make_gaussian();
    auto t0 = std::chrono::steady_clock::now();
    ModelColumns model(*g, {d.mu, d.sigma});
    auto res = transform(d.y, model, ResidualType::Quantile);
    auto curve = compute_qq(res);
    std::vector<Band> bands{normal_band(curve.theoretical, 0.95)};
    auto binned = bin_qq(curve, 1000, bands);
    double elapsed = seconds_since(t0);
    o.require(elapsed <= 5.0, "n=1e6 qq pipeline " + fmt(elapsed, 3) + " s (limit 5 s)");
    o.require(binned.bins() <= 1000 && binned.bins() > 0, "bins=" + std::to_string(binned.bins()));
    return o;
}

double envelope_seconds(const ModelColumns& model, std::size_t l, std::size_t threads) {
    auto t0 = std::chrono::steady_clock::now();
    auto sims = simulate_residuals(model, ResidualType::Quantile, l, 3, threads);
    auto env = sim_envelope(sims, 0.9, threads);
    double s = seconds_since(t0);
    if (env.lower.size() != model.rows()) return -1.0;
    return s;
}

Outcome perf_envelope() {
    Outcome o;
    const std::size_t n = 1000000;
    auto d = gaussian_data(n, 2);
    auto g = make_gaussian();
    ModelColumns model(*g, {d.mu, d.sigma});
    double s = envelope_seconds(model, 20, 1);
    o.require(s >= 0.0 && s <= 60.0, "l=20 envelope at n=1e6, 1 worker: " + fmt(s, 2) + " s (limit 60 s)");
    return o;
}

Outcome perf_speedup() {
    Outcome o;
    const std::size_t n = 1000000;
    auto d = gaussian_data(n, 2);
    auto g = make_gaussian();
    ModelColumns model(*g, {d.mu, d.sigma});
    double one = envelope_seconds(model, 20, 1);
    double four = envelope_seconds(model, 20, 4);
    double speedup = one / four;
    o.detail << "hardware threads=" << std::thread::hardware_concurrency() << "; ";
    o.require(speedup >= 2.0, "1 worker " + fmt(one, 2) + " s, 4 workers " + fmt(four, 2) +
                                  " s, speedup " + fmt(speedup, 2) + "x (need >= 2x)");
    return o;
}

Outcome vanbuuren_coverage() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = 500, reps = 2000;
    const double alpha = 0.95;
    const double probs[] = {0.1, 0.25, 0.5, 0.75, 0.9};
    std::vector<std::size_t> idx;
    for (double p : probs) idx.push_back(static_cast<std::size_t>(std::ceil(static_cast<double>(n) * p)));
    std::vector<std::size_t> hits(idx.size(), 0);
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd;
    std::vector<double> sample(n);
    for (std::size_t r = 0; r < reps; ++r) {
        for (auto& v : sample) v = nd(rng);
        std::sort(sample.begin(), sample.end());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            double p = plotting_position(idx[k], n);
            double centre = oracle::normal_quantile(p);
            double hw = normal_band_half_width(p, n, alpha);
            if (std::abs(sample[idx[k] - 1] - centre) <= hw) ++hits[k];
        }
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
        double cov = static_cast<double>(hits[k]) / reps;
        o.require(cov >= 0.93 && cov <= 0.97, "p=" + fmt(probs[k], 2) + " coverage " + fmt(cov, 4));
    }
    double s = seconds_since(t0);
    o.require(s <= 60.0, "runtime " + fmt(s, 2) + " s");
    return o;
}

Outcome ks_band_criterion() {
    Outcome o;
    double formula = std::sqrt(-std::log((1.0 - 0.95) / 2.0) / 2.0) / std::sqrt(100.0);
    double d = ks_half_width(100, 0.95);
    o.require(std::abs(d - formula) <= 1e-4 && std::abs(d - 0.13581) <= 1e-4,
              "D(0.95, 100)=" + fmt(d, 6) + " formula " + fmt(formula, 6));
    // uniform residuals from a well-specified gaussian model, n = 100
    const std::size_t n = 100, reps = 2000;
    std::vector<double> mu(n), sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
        mu[i] = 0.1 * static_cast<double>(i);
        sigma[i] = 1.0 + 0.01 * static_cast<double>(i);
    }
    auto g = make_gaussian();
    ModelColumns model(*g, {mu, sigma});
    auto sims = simulate_residuals(model, ResidualType::Uniform, reps, 77, 1);
    std::size_t covered = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        auto row = sims.row(r);
        double sup = oracle::ks_statistic(std::vector<double>(row.begin(), row.end()),
                                          [](double u) { return std::clamp(u, 0.0, 1.0); });
        if (sup <= d) ++covered;
    }
    double cov = static_cast<double>(covered) / reps;
    o.require(cov >= 0.93 && cov <= 0.97, "sup-deviation coverage " + fmt(cov, 4));
    return o;
}

double envelope_inside_fraction(ScenarioId id, std::uint64_t seed) {
    auto sc = generate(id, 10000, seed);
    auto res = scenario_residuals(sc);
    auto sims = scenario_sims(sc, 100, seed + 1000);
    auto curve = compute_qq(res);
    auto env = sim_envelope(sims, 0.9);
    auto b = bin_qq(curve, kDefaultBinBudget, {}, &env);
    std::size_t inside = 0;
    for (std::size_t j = 0; j < b.bins(); ++j)
        if (b.s[j] >= b.envelope->lower[j] && b.s[j] <= b.envelope->upper[j]) ++inside;
    return static_cast<double>(inside) / static_cast<double>(b.bins());
}

Outcome envelope_discrimination() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    double well = 0.0, miss = 0.0;
    const int seeds = 20;
    for (int s = 1; s <= seeds; ++s) {
        well += envelope_inside_fraction(ScenarioId::WellSpecified, s);
        miss += envelope_inside_fraction(ScenarioId::MeanMiss, s);
    }
    well /= seeds;
    miss /= seeds;
    o.require(well >= 0.90, "well_specified inside " + fmt(well, 4) + " (need >= 0.90)");
    o.require(miss <= 0.50, "mean_miss inside " + fmt(miss, 4) + " (need <= 0.50)");
    double s = seconds_since(t0);
    o.require(s <= 300.0, "runtime " + fmt(s, 1) + " s");
    return o;
}

DensityField scenario_field(ScenarioId id, std::uint64_t seed) {
    auto sc = generate(id, 10000, seed);
    auto res = scenario_residuals(sc);
    return dens_check(res.values, sc.dataset.numeric("x"), Reference::Normal);
}

// Mean of delta over unmasked columns with |x| > 2.5, per r knot.
std::vector<double> outer_profile(const DensityField& f) {
    std::vector<double> prof(f.r.knots, 0.0);
    std::size_t cols = 0;
    for (std::size_t i = 0; i < f.x.knots; ++i) {
        if (f.mask[i] || std::abs(f.x.knot(i)) <= 2.5) continue;
        ++cols;
        for (std::size_t k = 0; k < f.r.knots; ++k) prof[k] += f.at(i, k);
    }
    for (auto& v : prof) v /= static_cast<double>(std::max<std::size_t>(cols, 1));
    return prof;
}

double band_mean(const DensityField& f, const std::vector<double>& prof, double lo, double hi) {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < f.r.knots; ++k) {
        double r = std::abs(f.r.knot(k));
        if (r >= lo && r < hi) {
            acc += prof[k];
            ++n;
        }
    }
    return n ? acc / static_cast<double>(n) : std::nan("");
}

double p95_abs(const DensityField& f) {
    std::vector<double> v;
    for (double d : f.delta)
        if (!std::isnan(d)) v.push_back(std::abs(d));
    return oracle::quantile7(v, 0.95);
}

Outcome denscheck_signs() {
    Outcome o;
    for (std::uint64_t seed : {7u, 8u, 9u}) {
        auto var = scenario_field(ScenarioId::VarMiss, seed);
        auto prof = outer_profile(var);
        double centre = band_mean(var, prof, 0.0, 0.5), shoulder = band_mean(var, prof, 2.0, 3.0);
        o.require(centre < 0.0 && shoulder > 0.0, "seed " + std::to_string(seed) + " var_miss mean delta |r|<0.5 " +
                                                      fmt(centre) + ", 2<|r|<3 " + fmt(shoulder));

        auto kurt = scenario_field(ScenarioId::KurtMiss, seed);
        auto kprof = outer_profile(kurt);
        std::vector<double> neg(kprof.size());
        for (std::size_t k = 0; k < kprof.size(); ++k) neg[k] = -kprof[k];
        std::size_t modes = oracle::local_maxima(neg, 0.0);
        o.require(modes >= 3, "kurt_miss negative modes " + std::to_string(modes));

        auto well = scenario_field(ScenarioId::WellSpecified, seed);
        double pw = p95_abs(well), pv = p95_abs(var);
        o.require(pv >= 2.0 * pw, "p95|delta| well " + fmt(pw) + " vs var_miss " + fmt(pv));
    }
    return o;
}

double gridcheck_fraction(ScenarioId id, std::uint64_t seed) {
    auto sc = generate(id, 10000, seed);
    auto res = scenario_residuals(sc);
    auto sims = scenario_sims(sc, 50, seed + 500);
    auto series = grid_check_1d(res.values, sc.dataset.numeric("x"), 20, builtin_summary("sd"), &sims, 0.9);
    return fraction_outside(series);
}

Outcome gridcheck1d() {
    Outcome o;
    double var = 0.0, well = 0.0;
    const int seeds = 20;
    for (int s = 1; s <= seeds; ++s) {
        var += gridcheck_fraction(ScenarioId::VarMiss, s);
        well += gridcheck_fraction(ScenarioId::WellSpecified, s);
    }
    var /= seeds;
    well /= seeds;
    o.require(var >= 0.5, "var_miss outside " + fmt(var, 4) + " (need >= 0.5)");
    o.require(well <= 0.2, "well_specified outside " + fmt(well, 4) + " (need <= 0.2)");
    return o;
}

Outcome hex_null() {
    Outcome o;
    auto sc = generate(ScenarioId::WellSpecified, 50000, 5);
    auto res = scenario_residuals(sc);
    auto sims = scenario_sims(sc, 50, 6);
    auto x1 = sc.dataset.numeric("x"), x2 = sc.dataset.numeric("x2");
    auto lattice = make_lattice(x1, x2);
    auto grid = grid_check_2d(res.values, x1, x2, lattice, builtin_summary("sd"), sims);
    std::vector<double> z;
    for (const auto& h : grid.hexes)
        if (!h.flag) z.push_back(h.z);
    double m = oracle::mean(z), sd = oracle::sd(z);
    o.require(z.size() > 100, std::to_string(z.size()) + " unflagged hexes");
    o.require(std::abs(m) <= 0.2, "mean(z)=" + fmt(m));
    o.require(sd >= 0.7 && sd <= 1.3, "sd(z)=" + fmt(sd));
    return o;
}

struct DemoStats {
    double mean_opacity = 0.0;
    double strong_opacity = 0.0;
    double corr = 0.0;
    double edf = 0.0;
};

DemoStats effect_stats(std::size_t n, std::uint64_t seed) {
    auto sc = generate(ScenarioId::SurfaceDemo, n, seed);
    auto fit = oracle::fit_ridge_surface(sc.dataset.numeric("x"), sc.dataset.numeric("z"), sc.dataset.numeric("y"));
    EffectSurface surf;
    surf.x1 = fit.x1;
    surf.x2 = fit.x2;
    surf.fhat = fit.fhat;
    surf.vhat = fit.vhat;
    auto alpha = opacity_field(surf);
    auto g = perturb_field(surf, seed + 1);
    DemoStats st;
    st.edf = fit.edf;
    st.mean_opacity = oracle::mean(alpha);
    double fmax = 0.0;
    for (double a : surf.x1)
        for (double b : surf.x2) fmax = std::max(fmax, std::abs(surface_demo_f(a, b)));
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i2 = 0; i2 < surf.x2.size(); ++i2)
        for (std::size_t i1 = 0; i1 < surf.x1.size(); ++i1)
            if (std::abs(surface_demo_f(surf.x1[i1], surf.x2[i2])) >= 0.5 * fmax) {
                acc += alpha[i2 * surf.x1.size() + i1];
                ++cnt;
            }
    st.strong_opacity = acc / static_cast<double>(cnt);
    st.corr = oracle::correlation(g, surf.fhat);
    return st;
}

Outcome effect_demo() {
    Outcome o;
    auto small = effect_stats(kSurfaceDemoSizes[0], 11);
    auto large = effect_stats(kSurfaceDemoSizes[1], 11);
    o.require(small.mean_opacity <= 0.35, "n=200 mean opacity " + fmt(small.mean_opacity));
    o.require(large.strong_opacity >= 0.8, "n=1e5 opacity where |f|>=max/2 " + fmt(large.strong_opacity));
    o.require(large.corr >= 0.9, "n=1e5 corr(g, fhat) " + fmt(large.corr));
    o.require(small.corr <= 0.5, "n=200 corr(g, fhat) " + fmt(small.corr));
    o.detail << "; edf " << fmt(small.edf, 1) << " / " << fmt(large.edf, 1);
    return o;
}

Outcome oracles_invariants() {
    Outcome o;
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd;

    // linear binning mass conservation
    std::vector<double> x(10000), r(10000);
    for (auto& v : x) v = nd(rng);
    for (auto& v : r) v = nd(rng);
    auto g1 = linear_bin_1d(x, Axis(-3, 3, 50));
    auto g2 = linear_bin_2d(x, r, Axis(-3, 3, 50), Axis(-2, 2, 40));
    double m1 = std::accumulate(g1.weights.begin(), g1.weights.end(), 0.0);
    double m2 = std::accumulate(g2.weights.begin(), g2.weights.end(), 0.0);
    o.require(std::abs(m1 - 10000.0) <= 1e-9 && std::abs(m2 - 10000.0) <= 1e-9,
              "binning mass " + fmt(m1, 9) + " / " + fmt(m2, 9));

    // binned vs direct KDE
    std::vector<double> k(x.begin(), x.begin() + 1000);
    Axis axis(-5, 5, 401);
    auto kde = binned_kde(linear_bin_1d(k, axis), 0.3);
    auto direct = oracle::direct_kde(k, axis.values(), 0.3);
    double sup = 0.0;
    for (std::size_t i = 0; i < direct.size(); ++i) sup = std::max(sup, std::abs(kde.values[i] - direct[i]));
    o.require(sup <= 1e-2, "KDE sup-norm " + fmt(sup, 6));

    // bin_qq identity at b0 >= n
    ResidualVector rv;
    rv.values.assign(x.begin(), x.begin() + 500);
    auto curve = compute_qq(rv);
    auto id = bin_qq(curve, 500);
    o.require(id.s == curve.observed && id.sbar == curve.theoretical, "bin_qq identity at b0=n");

    // zoom equals subset
    auto full = compute_qq(ResidualVector{x, ResidualType::Quantile, Reference::Normal, 0, {}});
    QQPlot plot(full, {}, std::nullopt);
    QQCurve sub;
    for (std::size_t i = 0; i < full.size(); ++i)
        if (full.theoretical[i] >= -0.7 && full.theoretical[i] <= 1.3) {
            sub.observed.push_back(full.observed[i]);
            sub.theoretical.push_back(full.theoretical[i]);
        }
    auto z = plot.zoom(-0.7, 1.3, 200);
    auto ref = bin_qq(sub, 200);
    o.require(z.s == ref.s && z.sbar == ref.sbar && z.counts == ref.counts, "zoom equals subset");

    // hex nearest center vs brute force
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::size_t bad = 0;
    const double w = 1.0 / kDefaultHexes;
    HexLattice lat;
    lat.w = w;
    for (int i = 0; i < 10000; ++i) {
        double a = u01(rng), b = u01(rng);
        auto got = hex_nearest(a, b, w);
        auto [br, bc] = oracle::brute_force_hex(a, b, w);
        auto [gx, gy] = lat.center(got.row, got.col);
        auto [bx, by] = lat.center(br, bc);
        if (std::hypot(a - gx, b - gy) > std::hypot(a - bx, b - by) + 1e-12) ++bad;
    }
    o.require(bad == 0, "hex brute-force mismatches " + std::to_string(bad));

    // deterministic replay across worker counts
    auto s1 = generate(ScenarioId::SkewMiss, 20000, 4, 1);
    auto s4 = generate(ScenarioId::SkewMiss, 20000, 4, 4);
    bool same_data = true;
    for (const auto& col : s1.dataset.columns()) {
        auto a = s1.dataset.numeric(col.name()), b = s4.dataset.numeric(col.name());
        same_data = same_data && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
    }
    auto family = make_shash();
    ModelColumns model(s1.dataset, *family);
    auto sims1 = simulate_residuals(model, ResidualType::Quantile, 8, 12, 1);
    auto sims4 = simulate_residuals(model, ResidualType::Quantile, 8, 12, 4);
    auto res = transform(s1.dataset, *family, ResidualType::Quantile);
    auto xs = s1.dataset.numeric("x");
    auto c1 = grid_check_1d(res.values, xs, 20, builtin_summary("sd"), &sims1, 0.9, 1);
    auto c4 = grid_check_1d(res.values, xs, 20, builtin_summary("sd"), &sims4, 0.9, 4);
    auto e1 = sims1, e4 = sims4;
    auto env1 = sim_envelope(e1, 0.9, 1), env4 = sim_envelope(e4, 0.9, 4);
    o.require(same_data && sims1.values == sims4.values && c1.lo == c4.lo && c1.hi == c4.hi &&
                  env1.lower == env4.lower && env1.upper == env4.upper,
              "replay across 1 vs 4 workers");
    return o;
}

const std::map<std::string, std::function<Outcome()>>& criteria() {
    static const std::map<std::string, std::function<Outcome()>> table{
        {"perf_qq", perf_qq},
        {"perf_envelope", perf_envelope},
        {"perf_speedup", perf_speedup},
        {"vanbuuren_coverage", vanbuuren_coverage},
        {"ks_band", ks_band_criterion},
        {"envelope_discrimination", envelope_discrimination},
        {"denscheck_signs", denscheck_signs},
        {"gridcheck1d", gridcheck1d},
        {"hex_null", hex_null},
        {"effect_demo", effect_demo},
        {"oracles_invariants", oracles_invariants},
    };
    return table;
}

bool run_one(const std::string& name) {
    auto it = criteria().find(name);
    if (it == criteria().end()) {
        std::fprintf(stderr, "unknown criterion '%s'\n", name.c_str());
        return false;
    }
    auto t0 = std::chrono::steady_clock::now();
    Outcome o = it->second();
    std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: gamdiag_acceptance <criterion>|all\ncriteria:");
        for (const auto& [name, fn] : criteria()) std::fprintf(stderr, " %s", name.c_str());
        std::fprintf(stderr, "\n");
        return 2;
    }
    std::string which = argv[1];
    if (which != "all") return run_one(which) ? 0 : 1;
    bool ok = true;
    for (const auto& [name, fn] : criteria()) ok = run_one(name) && ok;
    return ok ? 0 : 1;
}
