#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracle_values.hpp"
#include "srd/errors.hpp"
#include "srd/graph.hpp"
#include "srd/qprocess.hpp"

using namespace srd;
using std::numbers::pi;

namespace {

const PayoffMatrix kHalf = PayoffMatrix::scaled_identity(2, 0.5);
const PayoffMatrix kFlat = PayoffMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}});
const Interval kBasin{pi / 4, 3 * pi / 4};

EigenPair solve(const PayoffMatrix& m, Interval iv, std::size_t grid, double eps) {
    return principal_eigenpair(dirichlet_generator(reduce_to_circle(m, iv, grid), eps));
}

}  // namespace

TEST_CASE("circle reduction") {
    const auto red = reduce_to_circle(kHalf, {0.0, pi / 2}, 1024);
    REQUIRE(red.grid.size() == 1025);
    CHECK(red.f_tilde.front() == doctest::Approx(0.25));
    CHECK(red.f_tilde[512] == doctest::Approx(0.125));
    CHECK(red.f_tilde.back() == doctest::Approx(0.25));
    CHECK(std::abs(red.drift.front()) < 1e-15);
    CHECK(std::abs(red.drift[512]) < 1e-15);
    CHECK(std::abs(red.drift.back()) < 1e-15);
    const double h = red.spacing();
    for (std::size_t j = 1; j + 1 < red.grid.size(); ++j) {
        CHECK(red.f_tilde[j] ==
              doctest::Approx(sphere_potential(kHalf, SpherePoint({std::cos(red.grid[j]), std::sin(red.grid[j])})))
                  .epsilon(1e-12));
        const double fd = (red.f_tilde[j + 1] - red.f_tilde[j - 1]) / (8 * h);
        CHECK(std::abs(fd - red.drift[j]) < 1e-5);
    }
    CHECK_THROWS_AS(reduce_to_circle(kHalf, {0.0, pi}, 32), ContractError);
    CHECK_THROWS_AS(reduce_to_circle(kHalf, {1.0, 1.0}, 128), ContractError);
    CHECK_THROWS_AS(reduce_to_circle(kHalf, {0.0, 7.0}, 128), ContractError);
    CHECK_THROWS_AS(reduce_to_circle(payoff_from_graph(two_edge_graph()), {0.0, 1.0}, 128), UnsupportedError);
}

TEST_CASE("dirichlet generator") {
    const auto red = reduce_to_circle(kHalf, kBasin, 256);
    const auto op = dirichlet_generator(red, 0.2);
    REQUIRE(op.size() == 255);
    const double h = red.spacing();
    for (std::size_t i = 0; i < op.size(); ++i) {
        // Full rows annihilate constants.
        CHECK(std::abs(op.lower[i] + op.diag[i] + op.upper[i]) < 1e-9 / (h * h));
        CHECK(op.lower[i] > 0);
        CHECK(op.upper[i] > 0);
    }
    CHECK_THROWS_AS(dirichlet_generator(red, 0.0), ContractError);
    CHECK_NOTHROW(dirichlet_generator(reduce_to_circle(kHalf, kBasin, 64), 0.2));
}

TEST_CASE("zero-drift spectrum") {
    const double eps = 0.3;
    const auto e = solve(kFlat, {0.0, pi / 2}, 1024, eps);
    CHECK(std::abs(e.lambda0 / oracle::kZeroDriftLambdaEps03 - 1.0) < 0.005);
    CHECK(e.residual < 1e-6);
    CHECK(e.phi.front() == 0.0);
    CHECK(e.phi.back() == 0.0);
    CHECK(*std::max_element(e.phi.begin(), e.phi.end()) == 1.0);
    // Sine profile.
    const std::size_t n = e.phi.size() - 1;
    for (std::size_t j = 1; j < n; ++j) {
        CHECK(e.phi[j] > 0);
        CHECK(std::abs(e.phi[j] - std::sin(pi * j / n)) < 1e-5);
    }
}

TEST_CASE("eigenvalue converges at second order") {
    const double l1 = solve(kHalf, kBasin, 128, 0.2).lambda0;
    const double l2 = solve(kHalf, kBasin, 256, 0.2).lambda0;
    const double l3 = solve(kHalf, kBasin, 512, 0.2).lambda0;
    const double ratio = (l1 - l2) / (l2 - l3);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("expected exit time") {
    const auto red = reduce_to_circle(kHalf, kBasin, 2048);
    const auto u = expected_exit_time(red, 0.2);
    CHECK(u.front() == 0.0);
    CHECK(u.back() == 0.0);
    CHECK(interpolate(red, u, pi / 2) == doctest::Approx(oracle::kHalfIdentityExitEps02).epsilon(1e-4));
}

TEST_CASE("Q-process drift") {
    const double eps = 0.15;
    const auto red = reduce_to_circle(kHalf, kBasin, 1024);
    const auto eig = principal_eigenpair(dirichlet_generator(red, eps));
    CHECK(eig.lambda0 == doctest::Approx(oracle::kHalfIdentityLambdaEps015).epsilon(1e-3));
    const QProcessDrift drift(red, eig, eps);
    const auto peak = std::max_element(eig.phi.begin(), eig.phi.end()) - eig.phi.begin();
    CHECK(std::abs(drift.correction(red.grid[static_cast<std::size_t>(peak)])) < 1e-3);
    CHECK(std::abs(drift.correction(pi / 2)) < 1e-10);
    for (double d : {1e-4, 1e-3, 0.05}) {
        CHECK(drift(kBasin.lo + d) > 0);
        CHECK(drift(kBasin.hi - d) < 0);
    }
    CHECK(drift(1.0) == qprocess_drift(red, eig, eps, 1.0));
    CHECK(drift(1.0) == drift.unchecked(1.0));
    CHECK(drift(1.0) == doctest::Approx(interpolate(red, red.drift, 1.0) + drift.correction(1.0)));
    CHECK_THROWS_AS(drift(kBasin.lo), ContractError);
    CHECK_THROWS_AS(drift(3.0), ContractError);

    // Scaling ε down with φ fixed shrinks the correction.
    const QProcessDrift small(red, eig, 1e-4);
    CHECK(std::abs(small(1.0) - interpolate(red, red.drift, 1.0)) < 1e-6);
}

TEST_CASE("Q-process density") {
    const auto red = reduce_to_circle(kFlat, {0.0, pi / 2}, 512);
    const auto eig = principal_eigenpair(dirichlet_generator(red, 0.3));
    const auto q = qprocess_density(red, eig, 0.3);
    const double len = pi / 2;
    double mass = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        const double s = std::sin(pi * red.grid[j] / len);
        CHECK(std::abs(q[j] - 2.0 / len * s * s) < 1e-4);
        mass += q[j] * red.spacing();
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("arc exit times") {
    IntegratorConfig cfg;
    cfg.dt = 0.005;
    cfg.eps = 0.2;
    cfg.seed = 3;
    cfg.max_steps = 2'000'000;
    const auto a = arc_exit_times(kHalf, kBasin, pi / 2, cfg, 40);
    const auto b = arc_exit_times(kHalf, kBasin, pi / 2, cfg, 40, 4);
    REQUIRE(a.size() == 40);
    for (std::size_t r = 0; r < 40; ++r) {
        CHECK(a[r].steps == b[r].steps);
        CHECK(a[r].seed == derive_seed(3, r));
        CHECK(a[r].tau == doctest::Approx(a[r].steps * cfg.dt));
    }
    const auto s = summarize(a);
    CHECK(s.samples == 40);
    CHECK(std::abs(s.mean - oracle::kHalfIdentityExitEps02) < 4 * s.std_error);
    CHECK_THROWS_AS(arc_exit_times(kHalf, kBasin, 0.1, cfg, 4), ContractError);
}

TEST_CASE("validate_qprocess on a short run") {
    const double eps = 0.15;
    const auto red = reduce_to_circle(kHalf, kBasin, 1024);
    const auto eig = principal_eigenpair(dirichlet_generator(red, eps));
    QProcessValidationConfig cfg;
    cfg.seeds = 4;
    cfg.steps = 200'000;
    cfg.exit_runs = 100;
    cfg.jobs = 2;
    const auto rep = validate_qprocess(red, eig, eps, cfg);
    CHECK(rep.confined);
    CHECK(rep.tv < 0.1);
    CHECK(rep.histogram.size() == 20);
    CHECK(rep.exit_relative_error < 0.3);
    cfg.jobs = 1;
    const auto again = validate_qprocess(red, eig, eps, cfg);
    CHECK(again.tv == rep.tv);
    CHECK(again.mean_exit == rep.mean_exit);
}
