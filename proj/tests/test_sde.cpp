#include <doctest.h>

#include <cmath>
#include <vector>

#include "srd/errors.hpp"
#include "srd/graph.hpp"
#include "srd/sde.hpp"

using namespace srd;

namespace {

PayoffMatrix two_edge() { return payoff_from_graph(two_edge_graph()); }

double norm(std::span<const double> v) {
    double s = 0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
}

SpherePoint random_positive_unit(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& a : v) a = rng.uniform_open_left();
    return SpherePoint::normalized(std::move(v));
}

}  // namespace

TEST_CASE("integrator config validation") {
    IntegratorConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.dt = 0;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
    cfg = {};
    cfg.eps = -1;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
    cfg = {};
    cfg.max_steps = 0;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
}

TEST_CASE("noiseless step fixes equilibria") {
    const auto m = two_edge();
    const std::vector<double> zero(3, 0.0);
    const auto v = SpherePoint({0.0, 1.0, 0.0});
    const auto s = step(v, m, 0.05, 0.0, zero);
    for (std::size_t i = 0; i < 3; ++i) CHECK(s[i] == v[i]);

    const auto g = gnp(12, 0.5, 3);
    const auto mg = payoff_from_graph(g);
    for (const auto& c : maximal_cliques(g)) {
        const auto y = sqrt_lift(characteristic_vector(g, c).point);
        const auto z = step(y, mg, 0.05, 0.0, std::vector<double>(12, 0.0));
        for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(z[i] - y[i]) < 1e-15);
    }
}

TEST_CASE("step output stays on the sphere") {
    Rng rng(1);
    const auto m = two_edge();
    std::vector<double> noise(3);
    for (int t = 0; t < 1000; ++t) {
        const auto y = SpherePoint::normalized(gaussian_increments(rng, 3));
        rng.fill_normal(noise);
        const auto z = step(y, m, 0.05, 0.3, noise);
        CHECK(std::abs(norm(z.coords()) - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(step(SpherePoint({1.0, 0.0, 0.0}), m, 0.05, 0.1, std::vector<double>(2)), ContractError);
}

TEST_CASE("vanishing renormalisation is a numeric error") {
    std::vector<double> y{1.0, 0.0};
    const std::vector<double> back{-1.0, 0.0};
    CHECK_THROWS_AS(kernel::retract_along(y, back, 1.0), NumericError);
}

TEST_CASE("noiseless ascent does not decrease F̃") {
    const auto m = two_edge();
    auto y = SpherePoint::normalized({0.72, 0.69, 0.05});
    const std::vector<double> zero(3, 0.0);
    for (int t = 0; t < 2000; ++t) {
        const auto z = step(y, m, 0.01, 0.0, zero);
        CHECK(sphere_potential(m, z) >= sphere_potential(m, y) - 1e-15);
        y = z;
    }
}

TEST_CASE("descent flag flips the drift") {
    const auto m = two_edge();
    const auto y = SpherePoint::normalized({0.6, 0.7, 0.3});
    const std::vector<double> zero(3, 0.0);
    CHECK(sphere_potential(m, step(y, m, 0.01, 0.0, zero, true)) < sphere_potential(m, y));
    CHECK(sphere_potential(m, step(y, m, 0.01, 0.0, zero, false)) > sphere_potential(m, y));
}

TEST_CASE("one-step mean displacement matches the drift") {
    const auto m = two_edge();
    const auto y = SpherePoint::normalized({0.5, 0.7, 0.4});
    const double dt = 0.01, eps = 0.1;
    const auto drift = projected_gradient(m, y);
    Rng rng(8);
    std::vector<double> noise(3), mean(3, 0.0);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) {
        rng.fill_normal(noise);
        const auto z = step(y, m, dt, eps, noise);
        for (std::size_t i = 0; i < 3; ++i) mean[i] += (z[i] - y[i]) / draws;
    }
    // Renormalisation adds an O(ε²dt) radial term; compare the tangential part.
    double radial = 0;
    for (std::size_t i = 0; i < 3; ++i) radial += mean[i] * y[i];
    for (std::size_t i = 0; i < 3; ++i) {
        const double tangential = mean[i] - radial * y[i];
        // Monte Carlo error is about ε√dt/√draws ≈ 3e-5.
        CHECK(std::abs(tangential - dt / 4 * drift[i]) < 1.5e-4);
    }
}

TEST_CASE("simulate: recording and determinism") {
    const auto m = two_edge();
    IntegratorConfig cfg;
    cfg.eps = 0.1;
    cfg.seed = 3;
    cfg.max_steps = 1000;
    const auto y0 = SpherePoint::normalized({0.7, 0.7, 0.1});
    const auto a = simulate(y0, m, cfg, {100, true});
    CHECK(a.size() == 11);
    CHECK(a.sphere_states.size() == 11);
    CHECK(a.steps.back() == 1000);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.times[k] == doctest::Approx(a.steps[k] * cfg.dt));
        double s = 0;
        for (double v : a.states[k].coords()) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(std::abs(s - 1.0) < 1e-12);
        CHECK(std::abs(norm(a.sphere_states[k].coords()) - 1.0) < 1e-12);
    }
    const auto b = simulate(y0, m, cfg, {100, true});
    for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t i = 0; i < 3; ++i) CHECK(a.sphere_states[k][i] == b.sphere_states[k][i]);
    cfg.seed = 4;
    const auto c = simulate(y0, m, cfg, {100, true});
    CHECK(c.sphere_states.back()[0] != a.sphere_states.back()[0]);
}

TEST_CASE("simulate: observer sees every step and may stop") {
    const auto m = two_edge();
    IntegratorConfig cfg;
    cfg.eps = 0.1;
    cfg.max_steps = 500;
    std::size_t calls = 0, last = 0;
    simulate(SpherePoint({0.0, 1.0, 0.0}), m, cfg, {0, false}, [&](std::size_t k, auto, auto) {
        ++calls;
        last = k;
        return k < 200;
    });
    CHECK(calls == 201);
    CHECK(last == 200);
}

TEST_CASE("simulate: noiseless run converges and stays put at equilibria") {
    const auto m = two_edge();
    IntegratorConfig cfg;
    cfg.max_steps = 100000;
    const auto tr = simulate(SpherePoint::normalized({0.8, 0.6, 0.1}), m, cfg, {100000, true});
    CHECK(norm(projected_gradient(m, tr.sphere_states.back())) < 1e-8);

    cfg.max_steps = 1000;
    const auto eq = sqrt_lift(SimplexPoint({0.5, 0.5, 0.0}));
    const auto flat = simulate(eq, m, cfg, {100, false});
    for (const auto& x : flat.states) {
        CHECK(std::abs(x[0] - 0.5) < 1e-14);
        CHECK(std::abs(x[2]) < 1e-14);
    }
}

TEST_CASE("deterministic flow") {
    const auto m = two_edge();
    const auto r = deterministic_flow(SpherePoint::normalized({0.8, 0.6, 0.0}), m, 0.05, 1e-8, 1'000'000);
    CHECK(r.converged);
    const auto x = to_simplex(r.point);
    CHECK(std::abs(x[0] - 0.5) < 1e-6);
    CHECK(std::abs(x[1] - 0.5) < 1e-6);
    CHECK(x[2] < 1e-6);

    const auto eq = deterministic_flow(sqrt_lift(SimplexPoint({0.0, 0.5, 0.5})), m, 0.05, 1e-8, 10);
    CHECK(eq.converged);
    CHECK(eq.steps == 0);

    const auto short_run = deterministic_flow(SpherePoint::normalized({0.8, 0.6, 0.1}), m, 0.05, 1e-8, 3);
    CHECK_FALSE(short_run.converged);
    CHECK(short_run.steps == 3);

    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        const auto f = deterministic_flow(random_positive_unit(rng, 3), m, 0.05, 1e-8, 1'000'000);
        REQUIRE(f.converged);
        const double fx = potential(m, to_simplex(f.point));
        CHECK(std::abs(fx - 0.375) < 1e-9);
    }
}

TEST_CASE("simplex and sphere maps") {
    const double r = 1.0 / std::sqrt(2.0);
    const auto x = to_simplex(SpherePoint({0.5, 0.5, r}));
    CHECK(x[0] == 0.25);
    CHECK(x[1] == 0.25);
    CHECK(x[2] == doctest::Approx(0.5).epsilon(1e-15));
    const auto xf = to_simplex(SpherePoint({-0.5, 0.5, -r}));
    for (std::size_t i = 0; i < 3; ++i) CHECK(xf[i] == x[i]);

    const auto y = sqrt_lift(SimplexPoint({0.5, 0.5, 0.0}));
    CHECK(y[0] == doctest::Approx(r).epsilon(1e-15));
    CHECK(y[2] == 0.0);
    const auto e = sqrt_lift(SimplexPoint::vertex(4, 2));
    for (std::size_t i = 0; i < 4; ++i) CHECK(e[i] == (i == 2 ? 1.0 : 0.0));

    Rng rng(6);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> v(5);
        double s = 0;
        for (auto& a : v) s += (a = -std::log(rng.uniform_open_left()));
        for (auto& a : v) a /= s;
        const SimplexPoint p(v);
        const auto back = to_simplex(sqrt_lift(p));
        for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(back[i] - p[i]) < 1e-12);
    }
}
