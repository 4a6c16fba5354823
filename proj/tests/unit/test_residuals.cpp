#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gamdiag/error.hpp"
#include "gamdiag/residuals.hpp"
#include "oracles.hpp"

using namespace gamdiag;

namespace {

Dataset gaussian_dataset(std::vector<double> y, std::vector<double> mu, std::vector<double> sigma) {
    Dataset ds;
    ds.add_column(Column("y", Role::Response, std::move(y)));
    ds.add_column(Column("mu", Role::Parameter, std::move(mu)));
    ds.add_column(Column("sigma", Role::Parameter, std::move(sigma)));
    return ds;
}

}  // namespace

TEST_CASE("residual type names") {
    CHECK(parse_residual_type("uniform") == ResidualType::Uniform);
    CHECK(parse_residual_type("deviance") == ResidualType::Deviance);
    CHECK_THROWS_AS(parse_residual_type("working"), ConfigError);
    CHECK(reference_of(ResidualType::Uniform) == Reference::Uniform);
    CHECK(reference_of(ResidualType::Quantile) == Reference::Normal);
    CHECK(reference_of(ResidualType::Pearson) == Reference::SimulationOnly);
    CHECK(reference_of(ResidualType::Deviance) == Reference::SimulationOnly);
}

TEST_CASE("gaussian y = mu gives the center of every transform") {
    auto ds = gaussian_dataset({2.0}, {2.0}, {3.0});
    auto g = make_gaussian();
    CHECK(transform(ds, *g, ResidualType::Uniform).values[0] == doctest::Approx(0.5));
    CHECK(transform(ds, *g, ResidualType::Quantile).values[0] == doctest::Approx(0.0));
    CHECK(transform(ds, *g, ResidualType::Pearson).values[0] == doctest::Approx(0.0));
    CHECK(transform(ds, *g, ResidualType::Deviance).values[0] == doctest::Approx(0.0));
}

TEST_CASE("pearson and deviance examples") {
    auto ds = gaussian_dataset({5.0}, {2.0}, {3.0});
    auto r = transform(ds, *make_gaussian(), ResidualType::Pearson);
    CHECK(r.values[0] == doctest::Approx(1.0));
    CHECK(r.reference == Reference::SimulationOnly);

    Dataset p;
    p.add_column(Column("y", Role::Response, std::vector<double>{0.0, 4.0}));
    p.add_column(Column("mu", Role::Parameter, std::vector<double>{1.0, 2.0}));
    auto pois = make_poisson();
    auto d = transform(p, *pois, ResidualType::Deviance);
    CHECK(d.values[0] == doctest::Approx(-std::sqrt(2.0)));
    CHECK(d.values[0] == doctest::Approx(-1.41421).epsilon(1e-5));
    CHECK(d.values[1] == doctest::Approx(std::sqrt(pois->deviance(4.0, {2.0}))));
    CHECK(d.values[1] > 0.0);
}

TEST_CASE("deviance on shash is unsupported") {
    Dataset ds;
    ds.add_column(Column("y", Role::Response, std::vector<double>{0.0}));
    for (const char* n : {"mu", "sigma", "eps", "delta"})
        ds.add_column(Column(n, Role::Parameter, std::vector<double>{n[0] == 's' || n[0] == 'd' ? 1.0 : 0.0}));
    CHECK_THROWS_AS(transform(ds, *make_shash(), ResidualType::Deviance), UnsupportedError);
    CHECK_NOTHROW(transform(ds, *make_shash(), ResidualType::Quantile));
}

TEST_CASE("missing parameter columns and param_map") {
    Dataset ds;
    ds.add_column(Column("y", Role::Response, std::vector<double>{1.0}));
    ds.add_column(Column("m", Role::Parameter, std::vector<double>{1.0}));
    ds.add_column(Column("s", Role::Parameter, std::vector<double>{2.0}));
    CHECK_THROWS_AS(transform(ds, *make_gaussian(), ResidualType::Quantile), SchemaError);
    auto r = transform(ds, *make_gaussian(), ResidualType::Pearson, {{"mu", "m"}, {"sigma", "s"}});
    CHECK(r.values[0] == doctest::Approx(0.0));
}

TEST_CASE("quantile residuals clip extreme tails and count them") {
    auto ds = gaussian_dataset({0.0, 100.0, -100.0, 7.0}, {0, 0, 0, 0}, {1, 1, 1, 1});
    auto r = transform(ds, *make_gaussian(), ResidualType::Quantile);
    CHECK(r.clip_count == 2);
    for (double v : r.values) CHECK(std::isfinite(v));
    double zc = oracle::normal_quantile(kQuantileClip);
    CHECK(r.values[1] == doctest::Approx(-zc).epsilon(1e-6));
    CHECK(r.values[2] == doctest::Approx(zc).epsilon(1e-6));
    // upper tail resolved through sf, not 1 - cdf
    CHECK(r.values[3] == doctest::Approx(7.0).epsilon(1e-6));
}

TEST_CASE("discrete families warn about uniform/quantile residuals") {
    Dataset p;
    p.add_column(Column("y", Role::Response, std::vector<double>{0.0, 1.0, 2.0}));
    p.add_column(Column("mu", Role::Parameter, std::vector<double>{1.0, 1.0, 1.0}));
    auto r = transform(p, *make_poisson(), ResidualType::Uniform);
    CHECK_FALSE(r.warnings.empty());
    CHECK(r.values[0] == doctest::Approx(std::exp(-1.0)));
    auto q = transform(gaussian_dataset({0.0}, {0.0}, {1.0}), *make_gaussian(), ResidualType::Uniform);
    CHECK(q.warnings.empty());
}

TEST_CASE("invariants: range, sign and monotonicity") {
    std::vector<double> y, mu, sigma;
    for (int i = 0; i < 200; ++i) {
        y.push_back(-5.0 + 0.05 * i);
        mu.push_back(0.3);
        sigma.push_back(1.7);
    }
    auto ds = gaussian_dataset(y, mu, sigma);
    auto g = make_gaussian();
    auto u = transform(ds, *g, ResidualType::Uniform);
    auto q = transform(ds, *g, ResidualType::Quantile);
    auto d = transform(ds, *g, ResidualType::Deviance);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(u.values[i] >= 0.0);
        CHECK(u.values[i] <= 1.0);
        if (i > 0) {
            CHECK(u.values[i] >= u.values[i - 1]);
            CHECK(q.values[i] >= q.values[i - 1]);
        }
        double diff = y[i] - mu[i];
        if (diff != 0.0) CHECK(std::signbit(d.values[i]) == std::signbit(diff));
    }
}

TEST_CASE("transform is permutation equivariant") {
    std::vector<double> y{0.1, 2.0, -1.3, 0.7, 4.0}, mu{0, 1, 0, 2, 3}, sigma{1, 2, 0.5, 1, 3};
    std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    std::vector<double> yp, mp, sp;
    for (auto k : perm) {
        yp.push_back(y[k]);
        mp.push_back(mu[k]);
        sp.push_back(sigma[k]);
    }
    auto g = make_gaussian();
    for (auto type : {ResidualType::Uniform, ResidualType::Quantile, ResidualType::Pearson, ResidualType::Deviance}) {
        auto a = transform(gaussian_dataset(y, mu, sigma), *g, type);
        auto b = transform(gaussian_dataset(yp, mp, sp), *g, type);
        for (std::size_t i = 0; i < perm.size(); ++i) CHECK(b.values[i] == a.values[perm[i]]);
    }
}

TEST_CASE("simulate_residuals: determinism, shape, errors") {
    auto ds = gaussian_dataset(std::vector<double>(50, 0.0), std::vector<double>(50, 1.0), std::vector<double>(50, 2.0));
    auto g = make_gaussian();
    auto a = simulate_residuals(ds, *g, ResidualType::Quantile, 3, 17, 1);
    auto b = simulate_residuals(ds, *g, ResidualType::Quantile, 3, 17, 4);
    CHECK(a.replicates == 3);
    CHECK(a.n == 50);
    CHECK(a.values.size() == 150);
    CHECK(a.values == b.values);
    auto c = simulate_residuals(ds, *g, ResidualType::Quantile, 3, 18, 1);
    CHECK(c.values != a.values);
    // replicate v depends only on (seed, v)
    auto d = simulate_residuals(ds, *g, ResidualType::Quantile, 5, 17, 2);
    CHECK(std::equal(a.values.begin(), a.values.end(), d.values.begin()));
    CHECK_THROWS_AS(simulate_residuals(ds, *g, ResidualType::Quantile, 0, 1), ConfigError);
    CHECK_THROWS_AS(simulate_residuals(ds, *make_shash(), ResidualType::Quantile, 2, 1), SchemaError);

    sort_rows(a);
    CHECK(a.rows_sorted);
    for (std::size_t v = 0; v < a.replicates; ++v) CHECK(std::is_sorted(a.row(v).begin(), a.row(v).end()));
}

TEST_CASE("well-specified quantile and uniform replicates pass KS in >= 98 of 100 seeds") {
    const std::size_t n = 10000;
    std::vector<double> mu(n), sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
        mu[i] = std::sin(0.001 * static_cast<double>(i));
        sigma[i] = 0.5 + static_cast<double>(i % 7) * 0.3;
    }
    auto g = make_gaussian();
    ModelColumns model(*g, {mu, sigma});
    int pass_q = 0, pass_u = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto q = simulate_residuals(model, ResidualType::Quantile, 1, seed);
        std::vector<double> row(q.values.begin(), q.values.end());
        if (oracle::ks_pvalue(oracle::ks_statistic(row, oracle::normal_cdf), n) > 0.01) ++pass_q;
        auto u = simulate_residuals(model, ResidualType::Uniform, 1, seed + 1000);
        std::vector<double> urow(u.values.begin(), u.values.end());
        if (oracle::ks_pvalue(oracle::ks_statistic(urow, [](double x) { return std::clamp(x, 0.0, 1.0); }), n) > 0.01)
            ++pass_u;
    }
    CHECK(pass_q >= 98);
    CHECK(pass_u >= 98);
}
