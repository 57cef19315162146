#include "srd/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "srd/errors.hpp"
#include "srd/rng.hpp"

namespace srd {

namespace {

std::string edge_str(Vertex i, Vertex j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

using Bits = std::vector<std::uint64_t>;

bool any(const Bits& b) {
    return std::any_of(b.begin(), b.end(), [](std::uint64_t w) { return w != 0; });
}

std::size_t popcount_and(const Bits& a, std::span<const std::uint64_t> b) {
    std::size_t c = 0;
    for (std::size_t w = 0; w < a.size(); ++w) c += static_cast<std::size_t>(std::popcount(a[w] & b[w]));
    return c;
}

template <class F>
void for_each_bit(const Bits& b, F&& f) {
    for (std::size_t w = 0; w < b.size(); ++w) {
        std::uint64_t word = b[w];
        while (word) {
            const int t = std::countr_zero(word);
            f(w * 64 + static_cast<std::size_t>(t));
            word &= word - 1;
        }
    }
}

class BronKerbosch {
public:
    BronKerbosch(const Graph& g, std::size_t max_count) : g_(g), max_count_(max_count) {}

    std::vector<VertexSet> run() {
        const std::size_t words = (g_.vertex_count() + 63) / 64;
        Bits p(words, 0), x(words, 0);
        for (Vertex v = 0; v < g_.vertex_count(); ++v) p[v / 64] |= std::uint64_t{1} << (v % 64);
        expand(p, x);
        for (auto& c : out_) std::sort(c.begin(), c.end());
        std::sort(out_.begin(), out_.end());
        return std::move(out_);
    }

private:
    void expand(Bits& p, Bits& x) {
        if (!any(p)) {
            if (!any(x)) {
                if (out_.size() >= max_count_) {
                    throw CliqueLimitExceeded("maximal_cliques: more than " + std::to_string(max_count_) +
                                              " maximal cliques; output truncated");
                }
                out_.push_back(r_);
            }
            return;
        }
        // Pivot u ∈ P ∪ X maximising |P ∩ N(u)|.
        Vertex pivot = 0;
        std::size_t best = 0;
        bool first = true;
        auto consider = [&](Vertex u) {
            const std::size_t c = popcount_and(p, g_.adjacency_bits(u));
            if (first || c > best) {
                pivot = u;
                best = c;
                first = false;
            }
        };
        for_each_bit(p, consider);
        for_each_bit(x, consider);

        Bits candidates = p;
        const auto pivot_nbrs = g_.adjacency_bits(pivot);
        for (std::size_t w = 0; w < candidates.size(); ++w) candidates[w] &= ~pivot_nbrs[w];

        for_each_bit(candidates, [&](Vertex v) {
            const auto nv = g_.adjacency_bits(v);
            Bits p2(p.size()), x2(x.size());
            for (std::size_t w = 0; w < p.size(); ++w) {
                p2[w] = p[w] & nv[w];
                x2[w] = x[w] & nv[w];
            }
            r_.push_back(v);
            expand(p2, x2);
            r_.pop_back();
            p[v / 64] &= ~(std::uint64_t{1} << (v % 64));
            x[v / 64] |= std::uint64_t{1} << (v % 64);
        });
    }

    const Graph& g_;
    std::size_t max_count_;
    VertexSet r_;
    std::vector<VertexSet> out_;
};

}  // namespace

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n), words_((n + 63) / 64), edges_(std::move(edges)) {
    if (n_ == 0) throw ContractError("Graph: need at least one vertex");
    bits_.assign(n_ * words_, 0);
    for (auto& [i, j] : edges_) {
        if (i >= n_ || j >= n_) throw ContractError("Graph: edge " + edge_str(i, j) + " has an endpoint out of range");
        if (i == j) throw ContractError("Graph: self-loop at vertex " + std::to_string(i));
        if (i > j) std::swap(i, j);
        if (has_edge(i, j)) throw ContractError("Graph: duplicate edge " + edge_str(i, j));
        bits_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64);
        bits_[j * words_ + i / 64] |= std::uint64_t{1} << (i % 64);
    }
    std::sort(edges_.begin(), edges_.end());
}

bool Graph::has_edge(Vertex i, Vertex j) const noexcept {
    if (i >= n_ || j >= n_) return false;
    return (bits_[i * words_ + j / 64] >> (j % 64)) & 1U;
}

std::size_t Graph::degree(Vertex v) const noexcept {
    std::size_t d = 0;
    for (auto w : adjacency_bits(v)) d += static_cast<std::size_t>(std::popcount(w));
    return d;
}

VertexSet Graph::neighbors(Vertex v) const {
    VertexSet out;
    for (Vertex u = 0; u < n_; ++u)
        if (has_edge(v, u)) out.push_back(u);
    return out;
}

bool Graph::is_clique(std::span<const Vertex> members) const {
    for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
            if (!has_edge(members[a], members[b])) return false;
    return true;
}

Graph path_graph(std::size_t n) {
    std::vector<Edge> e;
    for (Vertex i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return Graph(n, std::move(e));
}

Graph cycle_graph(std::size_t n) {
    if (n < 3) throw ContractError("cycle_graph: need at least 3 vertices");
    std::vector<Edge> e;
    for (Vertex i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return Graph(n, std::move(e));
}

Graph complete_graph(std::size_t n) {
    std::vector<Edge> e;
    for (Vertex i = 0; i < n; ++i)
        for (Vertex j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Graph(n, std::move(e));
}

Graph gnp(std::size_t n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw ContractError("gnp: p must lie in [0, 1]");
    if (n == 0) throw ContractError("gnp: n must be at least 1");
    Rng rng(seed);
    std::vector<Edge> e;
    for (Vertex i = 0; i < n; ++i)
        for (Vertex j = i + 1; j < n; ++j)
            if (rng.uniform() < p) e.emplace_back(i, j);
    return Graph(n, std::move(e));
}

Graph plant_clique(const Graph& g, std::span<const Vertex> members) {
    for (Vertex v : members)
        if (v >= g.vertex_count()) throw ContractError("plant_clique: vertex " + std::to_string(v) + " out of range");
    std::vector<Edge> e = g.edges();
    for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
            Vertex i = std::min(members[a], members[b]);
            Vertex j = std::max(members[a], members[b]);
            if (i == j) continue;
            if (!g.has_edge(i, j) && std::find(e.begin(), e.end(), Edge{i, j}) == e.end()) e.emplace_back(i, j);
        }
    }
    return Graph(g.vertex_count(), std::move(e));
}

PayoffMatrix payoff_from_graph(const Graph& g) {
    const std::size_t n = g.vertex_count();
    if (n < 2) throw ContractError("payoff_from_graph: need at least 2 vertices");
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 0.5;
    for (const auto& [i, j] : g.edges()) {
        m[i * n + j] = 1.0;
        m[j * n + i] = 1.0;
    }
    return PayoffMatrix(n, std::move(m));
}

std::vector<VertexSet> maximal_cliques(const Graph& g, std::size_t max_count) {
    return BronKerbosch(g, max_count).run();
}

CliqueVector characteristic_vector(std::span<const Vertex> members, std::size_t n) {
    if (members.empty()) throw ContractError("characteristic_vector: empty clique");
    VertexSet sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ContractError("characteristic_vector: repeated vertex");
    if (sorted.back() >= n) throw ContractError("characteristic_vector: vertex out of range");
    std::vector<double> x(n, 0.0);
    const double mass = 1.0 / static_cast<double>(sorted.size());
    for (Vertex v : sorted) x[v] = mass;
    return CliqueVector{std::move(sorted), SimplexPoint(std::move(x))};
}

CliqueVector characteristic_vector(const Graph& g, std::span<const Vertex> members) {
    if (!g.is_clique(members)) throw ContractError("characteristic_vector: members are not pairwise adjacent");
    return characteristic_vector(members, g.vertex_count());
}

double clique_potential(int k) {
    if (k < 1) throw ContractError("clique_potential: k must be at least 1");
    return 0.5 * (1.0 - 1.0 / (2.0 * k));
}

double bomze_lower_bound(const PayoffMatrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double d = m(i, i);
        if (!(d > 0.0)) throw ContractError("bomze_lower_bound: diagonal entries must be positive");
        s += 1.0 / d;
    }
    return 0.5 / s;
}

double exit_bound(int n, int k) {
    if (n < 1 || k < 1 || k > n) throw ContractError("exit_bound: need 1 <= k <= n");
    return 0.5 * ((1.0 - 1.0 / (2.0 * k)) - 1.0 / (4.0 * n));
}

double exit_bound_consistent(int n, int k) {
    if (n < 1 || k < 1 || k > n) throw ContractError("exit_bound_consistent: need 1 <= k <= n");
    return 0.5 * (clique_potential(k) - 1.0 / (4.0 * n));
}

CliqueSizeEstimate gnp_clique_estimate(int n, double p) {
    if (!(p > 0.0 && p < 1.0)) throw ContractError("gnp_clique_estimate: p must lie in (0, 1)");
    if (n < 2) throw ContractError("gnp_clique_estimate: n must be at least 2");
    const double r = 2.0 * std::log(static_cast<double>(n)) / std::log(1.0 / p);
    return {r, static_cast<int>(std::floor(r)), static_cast<int>(std::ceil(r))};
}

double gnp_exit_bound(int n, double p) {
    const auto est = gnp_clique_estimate(n, p);
    return exit_bound(n, std::clamp(est.ceil, 1, n));
}

}  // namespace srd
