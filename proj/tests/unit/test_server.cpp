#include <doctest.h>

#include <chrono>
#include <thread>

#include <httplib.h>

#include "gamdiag/error.hpp"
#include "gamdiag/json_io.hpp"
#include "gamdiag/scenarios.hpp"
#include "gamdiag/server.hpp"

using namespace gamdiag;

namespace {

std::shared_ptr<Session> make_session(std::size_t n = 5000, ResidualType type = ResidualType::Quantile) {
    auto sc = generate(ScenarioId::VarMiss, n, 7);
    SessionConfig cfg;
    cfg.family = "shash";
    cfg.type = type;
    cfg.threads = 2;
    EffectSurface surf;
    surf.x1 = {0, 1};
    surf.x2 = {0, 1};
    surf.fhat = {0.0, 1.0, 5.0, -5.0};
    surf.vhat = {1.0, 1.0, 1.0, 1.0};
    cfg.surface = surf;
    return std::make_shared<Session>(std::move(sc.dataset), cfg);
}

Json get_json(const Session& s, const std::string& path, const QueryParams& q = {}, int status = 200) {
    auto r = handle_request(s, path, q);
    CHECK(r.status == status);
    return Json::parse(r.body);
}

}  // namespace

TEST_CASE("meta endpoint") {
    auto s = make_session();
    auto j = get_json(*s, "/api/meta");
    CHECK(j["v"] == 1);
    CHECK(j["kind"] == "meta");
    CHECK(j["n"] == 5000);
    CHECK(j["family"] == "shash");
    CHECK(j["type"] == "quantile");
    CHECK(j["columns"].size() == 7);
    CHECK(j["surface"] == true);
}

TEST_CASE("qq and zoom endpoints") {
    auto s = make_session();
    auto j = get_json(*s, "/api/qq", {{"b0", "100"}});
    CHECK(j["kind"] == "qq");
    CHECK(j["s"].size() <= 100);
    CHECK(j["bands"][0]["name"] == "normal");
    auto again = handle_request(*s, "/api/qq", {{"b0", "100"}});
    CHECK(again.body == handle_request(*s, "/api/qq", {{"b0", "100"}}).body);

    // zoom equals bin_qq on the manual subset
    auto z = get_json(*s, "/api/qq/zoom", {{"lo", "-1"}, {"hi", "1"}, {"b0", "200"}});
    auto curve = compute_qq(s->residuals());
    QQCurve sub;
    for (std::size_t i = 0; i < curve.size(); ++i)
        if (curve.theoretical[i] >= -1 && curve.theoretical[i] <= 1) {
            sub.observed.push_back(curve.observed[i]);
            sub.theoretical.push_back(curve.theoretical[i]);
        }
    auto ref = bin_qq(sub, 200);
    CHECK(z["s"].get<std::vector<double>>() == ref.s);
    CHECK(z["sbar"].get<std::vector<double>>() == ref.sbar);
    CHECK(z["window"][0] == -1.0);
    CHECK(s->sort_count() == 1);
    for (int i = 0; i < 5; ++i) handle_request(*s, "/api/qq/zoom", {{"lo", std::to_string(-2 + 0.3 * i)}, {"hi", "2"}});
    CHECK(s->sort_count() == 1);

    auto env = get_json(*s, "/api/qq", {{"l", "20"}, {"alpha", "0.9"}});
    CHECK(env["envelope"]["lower"].size() == env["s"].size());
    CHECK(s->sort_count() == 1);
}

TEST_CASE("error mapping") {
    auto s = make_session();
    auto missing = get_json(*s, "/api/check1d", {{"var", "missing"}}, 404);
    CHECK(missing["code"] == "unknown_column");
    CHECK(missing["param"] == "missing");
    get_json(*s, "/api/nowhere", {}, 404);
    auto bad = get_json(*s, "/api/qq", {{"b0", "abc"}}, 400);
    CHECK(bad["param"] == "b0");
    get_json(*s, "/api/qq", {{"band", "ks"}}, 400);
    get_json(*s, "/api/qq/zoom", {{"lo", "1"}}, 400);
    get_json(*s, "/api/qq/zoom", {{"lo", "1"}, {"hi", "0"}}, 400);
    get_json(*s, "/api/check1d", {{"var", "x"}, {"summary", "median"}}, 400);
    get_json(*s, "/api/check2d", {{"x1", "x"}, {"x2", "x2"}, {"l", "1"}}, 400);
    get_json(*s, "/api/glyphs", {{"x1", "x"}, {"x2", "x2"}, {"kind", "violin"}}, 400);
    get_json(*s, "/api/effect", {{"mode", "sparkle"}}, 400);
}

TEST_CASE("diagnostic endpoints") {
    auto s = make_session();
    auto c1 = get_json(*s, "/api/check1d", {{"var", "x"}, {"l", "10"}, {"b", "12"}});
    CHECK(c1["kind"] == "check1d");
    CHECK(c1["s"].size() == 12);
    CHECK(c1["l"] == 10);
    auto c2 = get_json(*s, "/api/check2d", {{"x1", "x"}, {"x2", "x2"}, {"l", "10"}, {"hexes", "6"}});
    CHECK(c2["kind"] == "check2d");
    CHECK(c2["hexes"].size() > 10);
    auto gw = get_json(*s, "/api/glyphs", {{"x1", "x"}, {"x2", "x2"}, {"cells", "3"}});
    CHECK(gw["cells"].size() == 9);
    auto gk = get_json(*s, "/api/glyphs", {{"x1", "x"}, {"x2", "x2"}, {"kind", "kde"}});
    CHECK(gk["glyph"] == "kde");
    auto d = get_json(*s, "/api/denscheck", {{"var", "x"}, {"gx", "32"}, {"gr", "40"}});
    CHECK(d["shape"][0] == 32);
    CHECK(d["shape"][1] == 40);
    auto ds = get_json(*s, "/api/denscheck", {{"var", "x"}, {"gx", "16"}, {"gr", "16"}, {"l", "3"}});
    CHECK(ds["reference"] == "simulation");
    auto e = get_json(*s, "/api/effect");
    CHECK(e["mode"] == "opacity");
    CHECK(e["opacity"][0] == doctest::Approx(0.2));
    CHECK(e["opacity"][2] == 1.0);
    auto p1 = handle_request(*s, "/api/effect", {{"mode", "perturb"}, {"seed", "4"}});
    auto p2 = handle_request(*s, "/api/effect", {{"mode", "perturb"}, {"seed", "4"}});
    CHECK(p1.body == p2.body);
    // simulations for one (l, seed) are built once and shared
    auto builds = s->simulation_builds();
    get_json(*s, "/api/check1d", {{"var", "x"}, {"l", "10"}, {"b", "5"}});
    CHECK(s->simulation_builds() == builds);
}

TEST_CASE("simulation-only residual types need l") {
    auto s = make_session(2000, ResidualType::Pearson);
    get_json(*s, "/api/qq", {}, 400);
    auto j = get_json(*s, "/api/qq", {{"l", "5"}});
    CHECK(j["source"] == "simulation");
    get_json(*s, "/api/glyphs", {{"x1", "x"}, {"x2", "x2"}}, 400);
}

TEST_CASE("concurrent requests for one key share a build; late waiters get 503") {
    auto sc = generate(ScenarioId::VarMiss, 200000, 3);
    SessionConfig cfg;
    cfg.family = "shash";
    cfg.threads = 1;
    cfg.busy_timeout = std::chrono::milliseconds(1);
    auto s = std::make_shared<Session>(std::move(sc.dataset), cfg);
    std::thread builder([&] { s->simulations(60, 9); });
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    auto r = handle_request(*s, "/api/check1d", {{"var", "x"}, {"l", "60"}, {"seed", "9"}});
    builder.join();
    CHECK(r.status == 503);
    CHECK(Json::parse(r.body)["code"] == "busy");
    CHECK(s->simulation_builds() == 1);
    CHECK(handle_request(*s, "/api/check1d", {{"var", "x"}, {"l", "60"}, {"seed", "9"}}).status == 200);
    CHECK(s->simulation_builds() == 1);
}

TEST_CASE("live HTTP round trip") {
    auto s = make_session();
    DiagnosticsServer server(s);
    int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.run(); });
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(60, 0);
    auto meta = cli.Get("/api/meta");
    REQUIRE(meta);
    CHECK(meta->status == 200);
    CHECK(meta->get_header_value("Content-Type") == "application/json");
    auto z1 = cli.Get("/api/qq/zoom?lo=-1&hi=1&b0=200");
    auto z2 = cli.Get("/api/qq/zoom?lo=-1&hi=1&b0=200");
    REQUIRE(z1);
    REQUIRE(z2);
    CHECK(z1->status == 200);
    CHECK(z1->body == z2->body);
    CHECK(z1->body == handle_request(*s, "/api/qq/zoom", {{"lo", "-1"}, {"hi", "1"}, {"b0", "200"}}).body);
    auto missing = cli.Get("/api/check1d?var=missing");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(s->sort_count() == 1);
    server.stop();
    t.join();
}
