#include "gamdiag/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <random>

#include "gamdiag/error.hpp"
#include "gamdiag/json_io.hpp"
#include "gamdiag/kernels/kernels.hpp"
#include "gamdiag/rng.hpp"
#include "gamdiag/scenarios.hpp"
#include "gamdiag/server.hpp"
#include "gamdiag/session.hpp"
#include "gamdiag/svg.hpp"

namespace gamdiag {

namespace {

struct DataOptions {
    std::string data;
    std::string family = "gaussian";
    std::string type = "quantile";
    std::string response = "y";
    std::vector<std::string> params;  // name=column
    std::size_t threads = 0;
};

struct OutputOptions {
    std::string out;
    std::string svg;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
    cmd->add_option("--data", d.data, "Dataset CSV")->required();
    cmd->add_option("--family", d.family, "Model family")
        ->check(CLI::IsMember({"gaussian", "poisson", "binomial", "gamma", "shash"}));
    cmd->add_option("--type", d.type, "Residual type")
        ->check(CLI::IsMember({"uniform", "quantile", "pearson", "deviance"}));
    cmd->add_option("--response", d.response, "Response column");
    cmd->add_option("--param", d.params, "Parameter column mapping name=column (repeatable)");
    cmd->add_option("--threads", d.threads, "Worker threads (0 = GAMDIAG_THREADS or all cores)");
}

void add_output_options(CLI::App* cmd, OutputOptions& o, bool svg = true) {
    cmd->add_option("--out", o.out, "Output file (stdout when omitted)");
    if (svg) cmd->add_option("--svg", o.svg, "Also write a static SVG rendering");
}

std::map<std::string, std::string> param_map(const std::vector<std::string>& specs) {
    std::map<std::string, std::string> out;
    for (const auto& s : specs) {
        auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
            throw ConfigError("--param expects name=column, got '" + s + "'", "param");
        out[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return out;
}

std::shared_ptr<Session> open_session(const DataOptions& d,
                                      std::optional<EffectSurface> surface = std::nullopt) {
    SessionConfig cfg;
    cfg.family = d.family;
    cfg.type = parse_residual_type(d.type);
    cfg.param_map = param_map(d.params);
    cfg.threads = d.threads;
    cfg.surface = std::move(surface);
    auto family = make_family(cfg.family);
    std::vector<std::string> params;
    for (const auto& name : family->param_names()) {
        auto it = cfg.param_map.find(name);
        params.push_back(it == cfg.param_map.end() ? name : it->second);
    }
    auto header = read_csv_header(d.data);
    auto schema = Schema::infer(header, d.response, params);
    return std::make_shared<Session>(load_csv(d.data, schema), std::move(cfg));
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text << '\n';
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'", "out");
    f << text;
    if (!f) throw ConfigError("failed writing '" + path + "'", "out");
}

template <class T>
void emit(const OutputOptions& o, const Json& j, const T& payload) {
    write_text(o.out, dump(j));
    if (!o.svg.empty()) write_text(o.svg, svg::render(payload));
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

DiagnosticsServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Diagnostics engine for GAM/GAMLSS residual checks", "gamdiag"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "gamdiag 1.0.0");

    // scenario
    std::string sc_id;
    std::size_t sc_n = 10000;
    std::uint64_t sc_seed = 1;
    std::string sc_out;
    std::size_t sc_threads = 0;
    auto* scenario = app.add_subcommand("scenario", "Generate a synthetic dataset with model columns");
    scenario->add_option("--id", sc_id, "Scenario id")->required()->check(CLI::IsMember(scenario_ids()));
    scenario->add_option("--n", sc_n, "Rows");
    scenario->add_option("--seed", sc_seed, "Seed");
    scenario->add_option("--out", sc_out, "Output CSV (stdout when omitted)");
    scenario->add_option("--threads", sc_threads, "Worker threads");

    // qq
    DataOptions qq_d;
    OutputOptions qq_o;
    std::size_t qq_b0 = kDefaultBinBudget, qq_l = 0;
    std::string qq_band;
    double qq_alpha = 0.95;
    std::uint64_t qq_seed = 1;
    std::optional<double> qq_lo, qq_hi;
    auto* qq = app.add_subcommand("qq", "Binned QQ curve with bands");
    add_data_options(qq, qq_d);
    add_output_options(qq, qq_o);
    qq->add_option("--b0", qq_b0, "Bin budget")->check(CLI::PositiveNumber);
    qq->add_option("--band", qq_band, "none|normal|ks (default: natural band of the type)")
        ->check(CLI::IsMember({"none", "normal", "ks"}));
    qq->add_option("--alpha", qq_alpha, "Band level");
    qq->add_option("--l", qq_l, "Simulated replicates for the envelope (0 = none)");
    qq->add_option("--seed", qq_seed, "Simulation seed");
    qq->add_option("--lo", qq_lo, "Zoom window lower theoretical value");
    qq->add_option("--hi", qq_hi, "Zoom window upper theoretical value");

    // check1d
    DataOptions c1_d;
    OutputOptions c1_o;
    std::string c1_var, c1_summary = "sd";
    std::size_t c1_b = 20, c1_l = 50;
    double c1_alpha = 0.9;
    std::uint64_t c1_seed = 1;
    auto* check1d = app.add_subcommand("check1d", "Binned summaries along one covariate");
    add_data_options(check1d, c1_d);
    add_output_options(check1d, c1_o);
    check1d->add_option("--var", c1_var, "Covariate")->required();
    check1d->add_option("--b", c1_b, "Bins")->check(CLI::PositiveNumber);
    check1d->add_option("--summary", c1_summary, "mean|sd|skewness")
        ->check(CLI::IsMember({"mean", "sd", "skewness"}));
    check1d->add_option("--l", c1_l, "Simulated replicates (0 = no intervals)");
    check1d->add_option("--alpha", c1_alpha, "Interval level");
    check1d->add_option("--seed", c1_seed, "Simulation seed");

    // check2d
    DataOptions c2_d;
    OutputOptions c2_o;
    std::string c2_x1, c2_x2, c2_summary = "sd";
    std::size_t c2_l = 50, c2_hexes = kDefaultHexes;
    std::uint64_t c2_seed = 1;
    auto* check2d = app.add_subcommand("check2d", "Standardised hexagonal summaries over two covariates");
    add_data_options(check2d, c2_d);
    add_output_options(check2d, c2_o);
    check2d->add_option("--x1", c2_x1, "First covariate")->required();
    check2d->add_option("--x2", c2_x2, "Second covariate")->required();
    check2d->add_option("--summary", c2_summary, "mean|sd|skewness")
        ->check(CLI::IsMember({"mean", "sd", "skewness"}));
    check2d->add_option("--l", c2_l, "Simulated replicates (>= 2)");
    check2d->add_option("--seed", c2_seed, "Simulation seed");
    check2d->add_option("--hexes", c2_hexes, "Hexagons across x1")->check(CLI::PositiveNumber);

    // glyphs
    DataOptions gl_d;
    OutputOptions gl_o;
    std::string gl_x1, gl_x2, gl_kind = "worm";
    std::size_t gl_cells = 4;
    double gl_alpha = 0.95;
    auto* glyphs = app.add_subcommand("glyphs", "Worm or KDE glyphs on a coarse grid");
    add_data_options(glyphs, gl_d);
    add_output_options(glyphs, gl_o);
    glyphs->add_option("--x1", gl_x1, "First covariate")->required();
    glyphs->add_option("--x2", gl_x2, "Second covariate")->required();
    glyphs->add_option("--kind", gl_kind, "worm|kde")->check(CLI::IsMember({"worm", "kde"}));
    glyphs->add_option("--cells", gl_cells, "Cells per axis")->check(CLI::PositiveNumber);
    glyphs->add_option("--alpha", gl_alpha, "Worm band level");

    // denscheck
    DataOptions dc_d;
    OutputOptions dc_o;
    std::string dc_var;
    std::size_t dc_gx = kDefaultDensityKnots, dc_gr = kDefaultDensityKnots, dc_l = 0;
    std::uint64_t dc_seed = 1;
    std::optional<double> dc_hx, dc_hr;
    auto* denscheck = app.add_subcommand("denscheck", "Conditional density misfit field");
    add_data_options(denscheck, dc_d);
    add_output_options(denscheck, dc_o);
    denscheck->add_option("--var", dc_var, "Covariate")->required();
    denscheck->add_option("--gx", dc_gx, "Covariate knots");
    denscheck->add_option("--gr", dc_gr, "Residual knots");
    denscheck->add_option("--hx", dc_hx, "Covariate bandwidth");
    denscheck->add_option("--hr", dc_hr, "Residual bandwidth");
    denscheck->add_option("--l", dc_l, "Simulated replicates for the model density (0 = analytic)");
    denscheck->add_option("--seed", dc_seed, "Simulation seed");

    // effect
    std::string ef_surface, ef_mode = "opacity";
    std::uint64_t ef_seed = 1;
    OutputOptions ef_o;
    OpacityParams ef_params;
    auto* effect = app.add_subcommand("effect", "Opacity or perturbation view of a fitted surface");
    effect->add_option("--surface", ef_surface, "Surface CSV (x1, x2, fhat, vhat)")->required();
    effect->add_option("--mode", ef_mode, "opacity|perturb|plain")
        ->check(CLI::IsMember({"opacity", "perturb", "plain"}));
    effect->add_option("--seed", ef_seed, "Perturbation seed");
    effect->add_option("--delta", ef_params.delta, "Opacity transform delta");
    effect->add_option("--gamma", ef_params.gamma, "Opacity transform gamma");
    effect->add_option("--beta", ef_params.beta, "Opacity floor beta");
    add_output_options(effect, ef_o);

    // serve
    DataOptions sv_d;
    std::string sv_host = "127.0.0.1", sv_surface;
    int sv_port = 8080;
    long sv_timeout_ms = 30000;
    auto* serve = app.add_subcommand("serve", "HTTP JSON diagnostics service");
    add_data_options(serve, sv_d);
    serve->add_option("--host", sv_host, "Bind address");
    serve->add_option("--port", sv_port, "Port (0 = any free port)");
    serve->add_option("--surface", sv_surface, "Optional effect surface CSV");
    serve->add_option("--busy-timeout-ms", sv_timeout_ms, "Wait limit for in-flight simulations");

    // bench
    std::size_t bn_n = 1000000, bn_b0 = kDefaultBinBudget, bn_l = 0, bn_threads = 1;
    std::uint64_t bn_seed = 1;
    std::string bn_out;
    auto* bench = app.add_subcommand("bench", "Time the QQ pipeline on gaussian data");
    bench->add_option("--n", bn_n, "Rows")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bn_seed, "Seed");
    bench->add_option("--b0", bn_b0, "Bin budget")->check(CLI::PositiveNumber);
    bench->add_option("--l", bn_l, "Also time an l-replicate envelope (0 = skip)");
    bench->add_option("--threads", bn_threads, "Worker threads for the envelope");
    bench->add_option("--out", bn_out, "Output JSON (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*scenario) {
            auto sc = generate(sc_id, sc_n, sc_seed, sc_threads);
            write_text(sc_out, to_csv(sc.dataset));
        } else if (*qq) {
            auto s = open_session(qq_d);
            QQRequest req;
            if (!qq_band.empty()) req.band = parse_band(qq_band);
            req.alpha = qq_alpha;
            req.l = qq_l;
            req.seed = qq_seed;
            auto plot = s->qq_plot(req);
            if (qq_lo.has_value() != qq_hi.has_value())
                throw ConfigError("--lo and --hi must be given together", "lo");
            auto binned = qq_lo ? plot->zoom(*qq_lo, *qq_hi, qq_b0) : plot->binned(qq_b0);
            Json j = to_json(binned);
            j["warnings"] = s->residuals().warnings;
            emit(qq_o, j, binned);
        } else if (*check1d) {
            auto s = open_session(c1_d);
            auto x = s->covariate(c1_var);
            auto sims = c1_l > 0 ? s->simulations(c1_l, c1_seed) : nullptr;
            auto series = grid_check_1d(s->residuals().values, x, c1_b, builtin_summary(c1_summary),
                                        sims.get(), c1_alpha, c1_d.threads);
            emit(c1_o, to_json(series), series);
        } else if (*check2d) {
            auto s = open_session(c2_d);
            auto x1 = s->covariate(c2_x1);
            auto x2 = s->covariate(c2_x2);
            if (c2_l < 2) throw ConfigError("standardisation needs l >= 2", "l");
            auto sims = s->simulations(c2_l, c2_seed);
            auto grid = grid_check_2d(s->residuals().values, x1, x2, make_lattice(x1, x2, c2_hexes),
                                      builtin_summary(c2_summary), *sims, c2_d.threads);
            emit(c2_o, to_json(grid), grid);
        } else if (*glyphs) {
            auto s = open_session(gl_d);
            auto x1 = s->covariate(gl_x1);
            auto x2 = s->covariate(gl_x2);
            auto layout = make_cells(x1, x2, gl_cells, gl_cells);
            GlyphGrid grid;
            if (gl_kind == "worm") {
                if (reference_of(s->config().type) != Reference::Normal)
                    throw ConfigError("worm glyphs need quantile residuals", "kind");
                WormOptions opt;
                opt.alpha = gl_alpha;
                grid = worm_glyphs(s->residuals().values, x1, x2, layout, opt);
            } else {
                grid = kde_glyphs(s->residuals().values, x1, x2, layout);
            }
            emit(gl_o, to_json(grid), grid);
        } else if (*denscheck) {
            auto s = open_session(dc_d);
            auto x = s->covariate(dc_var);
            DensCheckOptions opt;
            opt.gx = dc_gx;
            opt.gr = dc_gr;
            opt.hx = dc_hx;
            opt.hr = dc_hr;
            const auto& res = s->residuals().values;
            DensityField field =
                dc_l > 0 ? dens_check(res, x, *s->simulations(dc_l, dc_seed), opt)
                         : dens_check(res, x, reference_of(s->config().type), opt);
            emit(dc_o, to_json(field), field);
        } else if (*effect) {
            auto surf = load_surface_csv(ef_surface);
            surf.params = ef_params;
            surf.params.validate();
            std::optional<std::uint64_t> seed;
            if (ef_mode == "opacity") surf.opacity = opacity_field(surf);
            if (ef_mode == "perturb") {
                seed = ef_seed;
                surf.perturbed = perturb_field(surf, ef_seed);
            }
            write_text(ef_o.out, dump(to_json(surf, ef_mode, seed)));
            if (!ef_o.svg.empty()) write_text(ef_o.svg, svg::render(surf, ef_mode));
        } else if (*serve) {
            std::optional<EffectSurface> surface;
            if (!sv_surface.empty()) surface = load_surface_csv(sv_surface);
            auto s = open_session(sv_d, std::move(surface));
            DiagnosticsServer server(s);
            int port = server.bind(sv_host, sv_port);
            if (port < 0) throw ConfigError("cannot bind " + sv_host + ":" + std::to_string(sv_port), "port");
            std::cerr << "gamdiag: serving " << s->dataset().rows() << " rows on http://" << sv_host
                      << ':' << port << '\n';
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.run();
            g_server = nullptr;
        } else if (*bench) {
            Dataset ds;
            {
                std::vector<double> y(bn_n), mu(bn_n, 0.0), sigma(bn_n, 1.0);
                auto rng = make_rng(bn_seed, 0);
                std::normal_distribution<double> z;
                for (auto& v : y) v = z(rng);
                ds.add_column(Column("y", Role::Response, std::move(y)));
                ds.add_column(Column("mu", Role::Parameter, std::move(mu)));
                ds.add_column(Column("sigma", Role::Parameter, std::move(sigma)));
            }
            auto family = make_gaussian();
            ModelColumns model(ds, *family);
            auto t0 = std::chrono::steady_clock::now();
            auto res = transform(ds.response().float64(), model, ResidualType::Quantile);
            double transform_ms = elapsed_ms(t0);
            t0 = std::chrono::steady_clock::now();
            auto sorted = sorted_values(res);
            double sort_ms = elapsed_ms(t0);
            t0 = std::chrono::steady_clock::now();
            auto curve = compute_qq_sorted(std::move(sorted), res.reference);
            std::vector<Band> bands{normal_band(curve.theoretical, 0.95)};
            auto binned = bin_qq(curve, bn_b0, bands);
            double bin_ms = elapsed_ms(t0);
            Json j{{"v", kSchemaVersion},
                   {"kind", "bench"},
                   {"n", bn_n},
                   {"b0", bn_b0},
                   {"bins", binned.bins()},
                   {"isa", std::string(kernels::to_string(kernels::active().isa))},
                   {"transform_ms", transform_ms},
                   {"sort_ms", sort_ms},
                   {"bin_ms", bin_ms}};
            if (bn_l > 0) {
                t0 = std::chrono::steady_clock::now();
                auto sims = simulate_residuals(model, ResidualType::Quantile, bn_l, bn_seed, bn_threads);
                auto env = sim_envelope(sims, 0.95, bn_threads);
                j["envelope_ms"] = elapsed_ms(t0);
                j["l"] = bn_l;
                j["threads"] = bn_threads;
            }
            write_text(bn_out, dump(j));
        }
    } catch (const Error& e) {
        std::cerr << "gamdiag: error [" << e.code() << "]: " << e.what();
        if (const auto* pe = dynamic_cast<const ParseError*>(&e)) std::cerr << " (row " << pe->row() << ')';
        std::cerr << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "gamdiag: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace gamdiag
