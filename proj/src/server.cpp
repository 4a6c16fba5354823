#include "gamdiag/server.hpp"

#include <httplib.h>

#include <charconv>
#include <cmath>

#include "gamdiag/error.hpp"
#include "gamdiag/json_io.hpp"
#include "gamdiag/parallel.hpp"

namespace gamdiag {

namespace {

const std::string* find(const QueryParams& params, const std::string& name) {
    auto it = params.find(name);
    return it == params.end() ? nullptr : &it->second;
}

const std::string& required(const QueryParams& params, const std::string& name) {
    if (auto* v = find(params, name)) return *v;
    throw ConfigError("missing query parameter '" + name + "'", name);
}

template <class T>
T parse_number(const std::string& text, const std::string& name) {
    T value{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size())
        throw ConfigError("query parameter '" + name + "' is not a valid number: '" + text + "'",
                          name);
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value))
            throw ConfigError("query parameter '" + name + "' must be finite", name);
    }
    return value;
}

template <class T>
T number(const QueryParams& params, const std::string& name, T fallback) {
    auto* v = find(params, name);
    return v ? parse_number<T>(*v, name) : fallback;
}

std::string text(const QueryParams& params, const std::string& name, const std::string& fallback) {
    auto* v = find(params, name);
    return v ? *v : fallback;
}

QQRequest qq_request(const QueryParams& params) {
    QQRequest req;
    if (auto* band = find(params, "band")) req.band = parse_band(*band);
    req.alpha = number<double>(params, "alpha", 0.95);
    req.l = number<std::size_t>(params, "l", 0);
    req.seed = number<std::uint64_t>(params, "seed", 1);
    return req;
}

std::size_t bin_budget(const QueryParams& params) {
    auto b0 = number<std::size_t>(params, "b0", kDefaultBinBudget);
    if (b0 == 0) throw ConfigError("b0 must be >= 1", "b0");
    return b0;
}

Json meta(const Session& s) {
    Json j{{"v", kSchemaVersion}, {"kind", "meta"}};
    j["session"] = s.id();
    j["n"] = s.dataset().rows();
    j["family"] = s.config().family;
    j["type"] = std::string(to_string(s.config().type));
    j["reference"] = std::string(to_string(reference_of(s.config().type)));
    Json cols = Json::array();
    for (const auto& c : s.dataset().columns())
        cols.push_back({{"name", c.name()},
                        {"role", std::string(to_string(c.role()))},
                        {"dtype", std::string(to_string(c.dtype()))}});
    j["columns"] = std::move(cols);
    j["covariates"] = s.dataset().names(Role::Covariate);
    j["surface"] = s.config().surface.has_value();
    return j;
}

// Model reference for density / grid checks: simulated when l > 0.
std::shared_ptr<const SimulatedResiduals> optional_sims(const Session& s, const QueryParams& params,
                                                        std::size_t default_l) {
    auto l = number<std::size_t>(params, "l", default_l);
    if (l == 0) return nullptr;
    return s.simulations(l, number<std::uint64_t>(params, "seed", 1));
}

Json route(const Session& s, const std::string& path, const QueryParams& params) {
    if (path == "/api/meta") return meta(s);
    if (path == "/api/qq") {
        auto b0 = bin_budget(params);
        return to_json(s.qq_plot(qq_request(params))->binned(b0));
    }
    if (path == "/api/qq/zoom") {
        double lo = parse_number<double>(required(params, "lo"), "lo");
        double hi = parse_number<double>(required(params, "hi"), "hi");
        auto b0 = bin_budget(params);
        Json j = to_json(s.qq_plot(qq_request(params))->zoom(lo, hi, b0));
        j["window"] = {lo, hi};
        return j;
    }
    if (path == "/api/check1d") {
        auto x = s.covariate(required(params, "var"));
        auto b = number<std::size_t>(params, "b", 20);
        auto summary = builtin_summary(text(params, "summary", "sd"));
        double alpha = number<double>(params, "alpha", 0.9);
        auto sims = optional_sims(s, params, 50);
        return to_json(grid_check_1d(s.residuals().values, x, b, summary, sims.get(), alpha,
                                     s.config().threads));
    }
    if (path == "/api/check2d") {
        auto x1 = s.covariate(required(params, "x1"));
        auto x2 = s.covariate(required(params, "x2"));
        auto summary = builtin_summary(text(params, "summary", "sd"));
        auto hexes = number<std::size_t>(params, "hexes", kDefaultHexes);
        auto l = number<std::size_t>(params, "l", 50);
        if (l < 2) throw ConfigError("standardisation needs l >= 2", "l");
        auto sims = s.simulations(l, number<std::uint64_t>(params, "seed", 1));
        auto lattice = make_lattice(x1, x2, hexes);
        return to_json(grid_check_2d(s.residuals().values, x1, x2, lattice, summary, *sims,
                                     s.config().threads));
    }
    if (path == "/api/glyphs") {
        auto x1 = s.covariate(required(params, "x1"));
        auto x2 = s.covariate(required(params, "x2"));
        auto kind = text(params, "kind", "worm");
        auto cells = number<std::size_t>(params, "cells", 4);
        auto layout = make_cells(x1, x2, cells, cells);
        if (kind == "worm") {
            if (reference_of(s.config().type) != Reference::Normal)
                throw ConfigError("worm glyphs need quantile residuals", "kind");
            WormOptions opt;
            opt.alpha = number<double>(params, "alpha", 0.95);
            return to_json(worm_glyphs(s.residuals().values, x1, x2, layout, opt));
        }
        if (kind == "kde") return to_json(kde_glyphs(s.residuals().values, x1, x2, layout));
        throw ConfigError("unknown glyph kind '" + kind + "' (expected worm|kde)", "kind");
    }
    if (path == "/api/denscheck") {
        auto x = s.covariate(required(params, "var"));
        DensCheckOptions opt;
        opt.gx = number<std::size_t>(params, "gx", kDefaultDensityKnots);
        opt.gr = number<std::size_t>(params, "gr", kDefaultDensityKnots);
        const auto& res = s.residuals().values;
        auto sims = optional_sims(s, params, 0);
        if (sims) return to_json(dens_check(res, x, *sims, opt));
        return to_json(dens_check(res, x, reference_of(s.config().type), opt));
    }
    if (path == "/api/effect") {
        if (!s.config().surface) throw ConfigError("no effect surface was loaded (use --surface)", "mode");
        EffectSurface surf = *s.config().surface;
        auto mode = text(params, "mode", "opacity");
        std::optional<std::uint64_t> seed;
        if (mode == "opacity") {
            surf.opacity = opacity_field(surf);
        } else if (mode == "perturb") {
            seed = number<std::uint64_t>(params, "seed", 1);
            surf.perturbed = perturb_field(surf, *seed);
        } else if (mode != "plain") {
            throw ConfigError("unknown effect mode '" + mode + "' (expected opacity|perturb|plain)",
                              "mode");
        }
        return to_json(surf, mode, seed);
    }
    throw LookupError(path);
}

}  // namespace

HttpResponse handle_request(const Session& session, const std::string& path,
                            const QueryParams& params) {
    try {
        return {200, dump(route(session, path, params))};
    } catch (const LookupError& e) {
        return {404, dump(error_json(e))};
    } catch (const BusyError& e) {
        return {503, dump(error_json(e))};
    } catch (const Error& e) {
        return {400, dump(error_json(e))};
    } catch (const std::exception& e) {
        return {500, dump(error_json("internal", e.what()))};
    }
}

DiagnosticsServer::DiagnosticsServer(std::shared_ptr<const Session> session)
    : session_(std::move(session)), server_(std::make_unique<httplib::Server>()) {
    const std::size_t workers = std::max<std::size_t>(2, default_threads());
    server_->new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
    server_->Get(R"(/api/.*)", [this](const httplib::Request& req, httplib::Response& res) {
        QueryParams params(req.params.begin(), req.params.end());
        auto out = handle_request(*session_, req.path, params);
        res.status = out.status;
        res.set_content(out.body, "application/json");
    });
}

DiagnosticsServer::~DiagnosticsServer() { stop(); }

int DiagnosticsServer::bind(const std::string& host, int port) {
    if (port == 0) return server_->bind_to_any_port(host);
    return server_->bind_to_port(host, port) ? port : -1;
}

bool DiagnosticsServer::run() { return server_->listen_after_bind(); }

void DiagnosticsServer::stop() {
    if (server_) server_->stop();
}

}  // namespace gamdiag
