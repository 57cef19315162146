#include <doctest.h>

#include <cmath>
#include <vector>

#include "srd/errors.hpp"
#include "srd/graph.hpp"
#include "srd/metastability.hpp"

using namespace srd;

namespace {

struct TwoEdge {
    Graph g = two_edge_graph();
    PayoffMatrix m = payoff_from_graph(g);
    std::vector<CliqueVector> cliques = clique_vectors(maximal_cliques(g), 3);
};

}  // namespace

TEST_CASE("classify_basin") {
    const TwoEdge t;
    const auto a = classify_basin(SimplexPoint({0.6, 0.4, 0.0}), t.m, t.cliques);
    CHECK(a.members == VertexSet{0, 1});
    CHECK(a.snap_distance < 1e-3);

    for (const auto& c : t.cliques) {
        const auto l = classify_basin(c.point, t.m, t.cliques);
        CHECK(l.members == c.members);
        CHECK(l.snap_distance == 0.0);
    }

    // On the separatrix the flow stays on the mirror line and stops at the saddle.
    const auto s1 = classify_basin(SimplexPoint({0.2, 0.6, 0.2}), t.m, t.cliques);
    const auto s2 = classify_basin(SimplexPoint({0.2, 0.6, 0.2}), t.m, t.cliques);
    CHECK_FALSE(s1.is_clique());
    CHECK(label_string(s1) == "none");
    CHECK_FALSE(s1.diagnostic.empty());
    CHECK(s1.snap_distance == s2.snap_distance);

    const auto b = classify_basin(SimplexPoint({0.05, 0.5, 0.45}), t.m, t.cliques);
    CHECK(label_string(b) == "1-2");
    // Idempotence.
    CHECK(classify_basin(t.cliques[*b.clique].point, t.m, t.cliques).members == b.members);

    CHECK_THROWS_AS(classify_basin(SimplexPoint({0.5, 0.5}), t.m, t.cliques), ContractError);
    CHECK_THROWS_AS(BasinClassifier(t.m, {}), ContractError);
}

TEST_CASE("classifier without early capture agrees") {
    const TwoEdge t;
    FlowParams slow;
    slow.early_capture = false;
    for (const auto& x : {SimplexPoint({0.6, 0.4, 0.0}), SimplexPoint({0.1, 0.3, 0.6}),
                          SimplexPoint({0.3, 0.4, 0.3})}) {
        const auto a = classify_basin(x, t.m, t.cliques);
        const auto b = classify_basin(x, t.m, t.cliques, slow);
        CHECK(a.members == b.members);
    }
}

TEST_CASE("measure_exit_time") {
    const TwoEdge t;
    IntegratorConfig cfg;
    cfg.eps = 0.0;
    cfg.max_steps = 20000;
    const auto quiet = measure_exit_time(t.m, t.cliques[0], t.cliques, cfg);
    CHECK(quiet.censored);
    CHECK(quiet.steps == 20000);

    cfg.eps = 0.1;
    cfg.seed = 12;
    cfg.max_steps = 10'000'000;
    const auto s = measure_exit_time(t.m, t.cliques[0], t.cliques, cfg);
    REQUIRE_FALSE(s.censored);
    CHECK(s.start_label.members == VertexSet{0, 1});
    CHECK(s.end_label.members == VertexSet{1, 2});
    CHECK(s.tau == doctest::Approx(s.steps * cfg.dt));
    CHECK(s.steps % 100 == 0);

    // The path is the same; only the check grid differs.  A coarser grid can
    // miss an excursion that recrosses within one interval, so the
    // resolution bound holds for committed transitions, i.e. most runs.
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        cfg.seed = seed;
        const auto fine = measure_exit_time(t.m, t.cliques[0], t.cliques, cfg, 100);
        const auto coarse = measure_exit_time(t.m, t.cliques[0], t.cliques, cfg, 200);
        CHECK(coarse.tau >= fine.tau);
        if (coarse.tau - fine.tau <= 200 * cfg.dt + 1e-9) ++within;
    }
    CHECK(within >= 15);

    const auto bad = characteristic_vector(VertexSet{1}, 3);
    CHECK_THROWS_AS(measure_exit_time(t.m, bad, t.cliques, cfg), ContractError);
}

TEST_CASE("exit_time_sweep") {
    const TwoEdge t;
    IntegratorConfig cfg;
    cfg.seed = 7;
    cfg.max_steps = 10'000'000;
    const std::vector<double> eps{0.14, 0.1};
    SweepOptions opts;
    const auto rows = exit_time_sweep(t.m, t.cliques[0], t.cliques, eps, 60, cfg, opts);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.runs == 60);
        CHECK(r.samples == r.runs - r.censored);
        CHECK(r.exits.size() == 60);
        CHECK(r.eps2_log_tau == doctest::Approx(r.eps * r.eps * std::log(r.mean_tau)));
        for (std::size_t k = 0; k < r.exits.size(); ++k) CHECK(r.exits[k].run == k);
    }
    CHECK(rows[0].mean_tau < rows[1].mean_tau);
    CHECK(rows[1].exits[3].seed == derive_seed(derive_seed(7, 1), 3));

    opts.jobs = 4;
    const auto par = exit_time_sweep(t.m, t.cliques[0], t.cliques, eps, 60, cfg, opts);
    for (std::size_t e = 0; e < 2; ++e) {
        CHECK(par[e].mean_tau == rows[e].mean_tau);
        for (std::size_t k = 0; k < 60; ++k) CHECK(par[e].exits[k].steps == rows[e].exits[k].steps);
    }

    // Split-half exchangeability.
    const auto& ex = rows[1].exits;
    double m1 = 0, m2 = 0, v = 0;
    for (std::size_t k = 0; k < 30; ++k) m1 += ex[k].tau / 30;
    for (std::size_t k = 30; k < 60; ++k) m2 += ex[k].tau / 30;
    for (const auto& s : ex) v += (s.tau - rows[1].mean_tau) * (s.tau - rows[1].mean_tau) / 59;
    CHECK(std::abs(m1 - m2) < 3 * std::sqrt(2 * v / 30));

    IntegratorConfig tiny = cfg;
    tiny.max_steps = 10;
    const std::vector<double> one{0.05};
    const auto flagged = exit_time_sweep(t.m, t.cliques[0], t.cliques, one, 3, tiny);
    CHECK(flagged[0].flagged);
    CHECK(flagged[0].censored == 3);
    CHECK(std::isnan(flagged[0].mean_tau));

    CHECK_THROWS_AS(exit_time_sweep(t.m, t.cliques[0], t.cliques, eps, 0, cfg), ContractError);
}

TEST_CASE("theoretical exit rate") {
    CHECK(theoretical_exit_rate(0.375, 0.35) == doctest::Approx(0.0125).epsilon(1e-12));
    CHECK(theoretical_exit_rate(0.25, 0.125) == 0.0625);
    CHECK(theoretical_exit_rate(0.3, 0.3) == 0.0);
    CHECK_THROWS_AS(theoretical_exit_rate(0.3, 0.4), ContractError);
}

TEST_CASE("separatrix estimate") {
    const TwoEdge t;
    const auto coarse = estimate_separatrix_max(t.m, t.cliques, 100);
    const auto fine = estimate_separatrix_max(t.m, t.cliques, 200);
    REQUIRE(coarse);
    REQUIRE(fine);
    CHECK(std::abs(fine->value - 0.35) < 1e-3);
    CHECK(std::abs(fine->value - coarse->value) < 2e-3);
    CHECK(theoretical_exit_rate(0.375, fine->value) == doctest::Approx(0.0125).epsilon(0.08));

    const auto k3 = complete_graph(3);
    const auto single = estimate_separatrix_max(payoff_from_graph(k3), clique_vectors(maximal_cliques(k3), 3), 50);
    CHECK_FALSE(single.has_value());

    const auto g4 = path_graph(4);
    CHECK_THROWS_AS(estimate_separatrix_max(payoff_from_graph(g4), clique_vectors(maximal_cliques(g4), 4), 10),
                    UnsupportedError);

    // n = 2: M = ½I has basins {0} and {1} split at x = ½.
    const auto m2 = PayoffMatrix::scaled_identity(2, 0.5);
    const auto s2 = estimate_separatrix_max(m2, clique_vectors({{0}, {1}}, 2), 100);
    REQUIRE(s2);
    CHECK(s2->value == doctest::Approx(0.125).epsilon(0.05));
}

TEST_CASE("ccdf and log-linear fit") {
    Rng rng(31);
    std::vector<double> taus(10000);
    for (auto& v : taus) v = -std::log(rng.uniform_open_left());
    const auto st = ccdf_and_fit(taus);
    CHECK(st.r2_loglinear >= 0.99);
    CHECK(std::abs(st.slope + 1.0) < 0.05);
    CHECK(st.rate == doctest::Approx(1.0 / st.mean));
    CHECK(st.ccdf.front() == std::pair<double, double>{0.0, 1.0});
    CHECK(st.ccdf.back().second == 0.0);
    for (std::size_t k = 1; k < st.ccdf.size(); ++k) CHECK(st.ccdf[k].second <= st.ccdf[k - 1].second);

    const std::vector<double> constant(20, 5.0);
    const auto flat = ccdf_and_fit(constant);
    CHECK(flat.degenerate);
    CHECK(flat.r2_loglinear < 0.1);

    CHECK_THROWS_AS(ccdf_and_fit(std::vector<double>(9, 1.0)), ContractError);
}
