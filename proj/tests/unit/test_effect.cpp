#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gamdiag/effect.hpp"
#include "gamdiag/error.hpp"
#include "oracles.hpp"

using namespace gamdiag;

namespace {

EffectSurface grid_surface(std::size_t nx, std::size_t nz, double f, double v) {
    EffectSurface s;
    for (std::size_t i = 0; i < nx; ++i) s.x1.push_back(static_cast<double>(i) / nx);
    for (std::size_t i = 0; i < nz; ++i) s.x2.push_back(static_cast<double>(i) / nz);
    s.fhat.assign(nx * nz, f);
    s.vhat.assign(nx * nz, v);
    return s;
}

}  // namespace

TEST_CASE("t_transform examples") {
    OpacityParams p;
    CHECK(t_transform(0.0, p) == 1.0);
    CHECK(t_transform(0.05, p) == 1.0);
    CHECK(std::pow(0.05, 3.0) < 0.2);
    CHECK(t_transform(1.0, p) == doctest::Approx(0.2));
    CHECK(t_transform(0.1, p) >= t_transform(0.5, p));
    CHECK(t_transform(0.5, p) >= t_transform(0.9, p));
    CHECK(t_transform(0.3, p) == doctest::Approx(std::max(std::pow(1 - 0.25, 3.0), 0.2)));
    for (int i = 0; i <= 100; ++i) {
        double v = t_transform(i / 100.0, p);
        CHECK(v >= p.beta);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(t_transform(0.5, OpacityParams{1.0, 3.0, 0.2}), DomainError);
    CHECK_THROWS_AS(t_transform(0.5, OpacityParams{0.05, 0.0, 0.2}), DomainError);
    CHECK_THROWS_AS(t_transform(0.5, OpacityParams{0.05, 3.0, 0.0}), DomainError);
    CHECK_THROWS_AS(t_transform(1.5, p), DomainError);
}

TEST_CASE("two-sided p-values") {
    CHECK(two_sided_p(0.0, 0.0) == 1.0);
    CHECK(two_sided_p(1.0, 0.0) == 0.0);
    CHECK(two_sided_p(1.95996, 1.0) == doctest::Approx(0.05).epsilon(1e-4));
    CHECK(two_sided_p(-1.95996, 1.0) == doctest::Approx(2 * (1 - oracle::normal_cdf(1.95996))));
    CHECK(two_sided_p(3.0, 4.0) == doctest::Approx(2 * (1 - oracle::normal_cdf(1.5))));
    CHECK_THROWS_AS(two_sided_p(1.0, -1.0), DomainError);
}

TEST_CASE("opacity field examples") {
    auto null = grid_surface(5, 4, 0.0, 1.0);
    for (double a : opacity_field(null)) CHECK(a == doctest::Approx(0.2));
    auto strong = grid_surface(5, 4, 10.0, 1.0);
    for (double a : opacity_field(strong)) CHECK(a == 1.0);
    auto boundary = grid_surface(2, 2, 1.95996, 1.0);
    // p slightly above 0.05 only through rounding of 1.95996; z is ~0
    for (double a : opacity_field(boundary)) CHECK(a == doctest::Approx(1.0).epsilon(1e-4));
    auto zero_var = grid_surface(2, 2, 0.0, 0.0);
    for (double a : opacity_field(zero_var)) CHECK(a == 0.2);
    zero_var.fhat[1] = 0.3;
    CHECK(opacity_field(zero_var)[1] == 1.0);
    auto negative = grid_surface(2, 2, 1.0, 1.0);
    negative.vhat[3] = -0.1;
    CHECK_THROWS_AS(opacity_field(negative), DomainError);
}

TEST_CASE("opacity is invariant to joint scaling") {
    EffectSurface s = grid_surface(10, 10, 0.0, 0.0);
    for (std::size_t i = 0; i < s.cells(); ++i) {
        s.fhat[i] = std::sin(0.37 * i);
        s.vhat[i] = 0.05 + 0.01 * (i % 13);
    }
    auto a = opacity_field(s);
    EffectSurface t = s;
    for (std::size_t i = 0; i < t.cells(); ++i) {
        t.fhat[i] *= 4.0;
        t.vhat[i] *= 16.0;
    }
    auto b = opacity_field(t);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));
}

TEST_CASE("perturbation") {
    auto s = grid_surface(6, 5, 1.5, 0.0);
    CHECK(perturb_field(s, 3) == s.fhat);
    s.vhat.assign(s.cells(), 0.4);
    CHECK(perturb_field(s, 3) == perturb_field(s, 3));
    CHECK(perturb_field(s, 3) != perturb_field(s, 4));
    s.vhat[0] = -1.0;
    CHECK_THROWS_AS(perturb_field(s, 1), DomainError);
}

TEST_CASE("standardised perturbation noise is N(0,1) in >= 98 of 100 seeds") {
    EffectSurface s = grid_surface(100, 100, 0.0, 0.0);
    for (std::size_t i = 0; i < s.cells(); ++i) {
        s.fhat[i] = std::cos(0.01 * i);
        s.vhat[i] = 0.1 + 0.002 * (i % 50);
    }
    int pass = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto g = perturb_field(s, seed);
        std::vector<double> z(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) z[i] = (g[i] - s.fhat[i]) / std::sqrt(s.vhat[i]);
        if (oracle::ks_pvalue(oracle::ks_statistic(z, oracle::normal_cdf), z.size()) > 0.01) ++pass;
    }
    CHECK(pass >= 98);
}

TEST_CASE("surface CSV parsing") {
    auto s = parse_surface_csv("x1,x2,fhat,vhat\n0,0,1,0.1\n1,0,2,0.2\n0,1,3,0.3\n1,1,4,0.4\n");
    CHECK(s.x1 == std::vector<double>{0, 1});
    CHECK(s.x2 == std::vector<double>{0, 1});
    CHECK(s.fhat == std::vector<double>{1, 2, 3, 4});
    CHECK(s.vhat[3] == 0.4);
    // row order does not matter
    auto shuffled = parse_surface_csv("x2,x1,vhat,fhat\n1,1,0.4,4\n0,0,0.1,1\n1,0,0.3,3\n0,1,0.2,2\n");
    CHECK(shuffled.fhat == s.fhat);
    CHECK_THROWS_AS(parse_surface_csv("x1,x2,fhat,vhat\n0,0,1,0.1\n1,0,2,0.2\n0,1,3,0.3\n"), SchemaError);
    CHECK_THROWS_AS(parse_surface_csv("x1,x2,fhat,vhat\n0,0,1,0.1\n0,0,2,0.2\n"), SchemaError);
    CHECK_THROWS_AS(parse_surface_csv("x1,x2,fhat\n0,0,1\n"), SchemaError);
    CHECK_THROWS_AS(parse_surface_csv("x1,x2,fhat,vhat\n0,0,1,-0.1\n"), DomainError);

    auto text = surface_to_csv(s);
    auto back = parse_surface_csv(text);
    CHECK(back.fhat == s.fhat);
    CHECK(back.vhat == s.vhat);
    auto path = std::filesystem::temp_directory_path() / "gamdiag_test_surface.csv";
    {
        std::ofstream out(path);
        out << text;
    }
    CHECK(load_surface_csv(path).x1 == s.x1);
    std::filesystem::remove(path);
}

TEST_CASE("surface validation") {
    auto s = grid_surface(3, 2, 0.0, 1.0);
    CHECK_NOTHROW(s.validate());
    s.fhat.pop_back();
    CHECK_THROWS_AS(s.validate(), SchemaError);
    auto t = grid_surface(3, 2, 0.0, 1.0);
    t.vhat[0] = std::nan("");
    CHECK_THROWS_AS(t.validate(), DomainError);
}
