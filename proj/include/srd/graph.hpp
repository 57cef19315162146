#pragma once

// Undirected simple graphs, the payoff matrix M = A + ½I they induce,
// clique enumeration and the clique-based exit-time bounds.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "srd/potential.hpp"

namespace srd {

using Vertex = std::size_t;
/// Sorted, duplicate-free list of vertices.
using VertexSet = std::vector<Vertex>;
using Edge = std::pair<Vertex, Vertex>;

/// Undirected graph on vertices 0..n-1 without self-loops or multi-edges.
/// Edges are stored as (i, j) with i < j, sorted lexicographically.
class Graph {
public:
    /// Throws ContractError on a self-loop, an out-of-range endpoint or a
    /// duplicate edge ((i, j) and (j, i) count as the same edge).
    explicit Graph(std::size_t n, std::vector<Edge> edges = {});

    std::size_t vertex_count() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    bool has_edge(Vertex i, Vertex j) const noexcept;
    std::size_t degree(Vertex v) const noexcept;
    VertexSet neighbors(Vertex v) const;
    /// True when every pair of distinct members is adjacent.
    bool is_clique(std::span<const Vertex> members) const;

    /// Adjacency row of v as a bitset of ⌈n/64⌉ words.
    std::span<const std::uint64_t> adjacency_bits(Vertex v) const noexcept {
        return {bits_.data() + v * words_, words_};
    }

    bool operator==(const Graph& other) const noexcept { return n_ == other.n_ && edges_ == other.edges_; }

private:
    std::size_t n_;
    std::size_t words_;
    std::vector<Edge> edges_;
    std::vector<std::uint64_t> bits_;
};

Graph path_graph(std::size_t n);
Graph cycle_graph(std::size_t n);
Graph complete_graph(std::size_t n);
/// The path 0–1–2; its payoff matrix is the two-edge example.
inline Graph two_edge_graph() { return path_graph(3); }

/// Erdős–Rényi G(n, p).  Draws exactly n(n-1)/2 uniforms from Rng(seed),
/// pair (i, j), i < j, in row-major order; the pair is an edge when the
/// draw is below p.
Graph gnp(std::size_t n, double p, std::uint64_t seed);

/// g with every missing edge among `members` added.
Graph plant_clique(const Graph& g, std::span<const Vertex> members);

/// M = A + ½I.
PayoffMatrix payoff_from_graph(const Graph& g);

class CliqueLimitExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// All maximal cliques (Bron–Kerbosch with Tomita pivoting).  Each clique is
/// sorted and the list is sorted lexicographically.  Isolated vertices are
/// reported as singleton cliques.  Throws CliqueLimitExceeded once more than
/// `max_count` cliques have been found.
std::vector<VertexSet> maximal_cliques(const Graph& g, std::size_t max_count = 1'000'000);

/// A clique together with its characteristic vector x_C (mass 1/|C| on C).
struct CliqueVector {
    VertexSet members;
    SimplexPoint point;

    std::size_t dimension() const noexcept { return point.size(); }
};

/// Characteristic vector of C in dimension n.  Throws ContractError when C is
/// empty, has duplicates, or has a vertex ≥ n.  Adjacency is not checked.
CliqueVector characteristic_vector(std::span<const Vertex> members, std::size_t n);
/// Same, additionally requiring the members to be pairwise adjacent in g.
CliqueVector characteristic_vector(const Graph& g, std::span<const Vertex> members);

/// F(x_C) = ½(1 - 1/(2k)) for a k-clique under M = A + ½I.
double clique_potential(int k);

/// ½ (Σᵢ 1/mᵢᵢ)⁻¹, a lower bound for F over the simplex.
double bomze_lower_bound(const PayoffMatrix& m);

/// ½[(1 - 1/(2k)) - 1/(4n)], the clique exit bound exactly as usually stated.
///
/// Note that F(x_C) = ½(1 - 1/(2k)) while this expression uses (1 - 1/(2k)),
/// so it overstates the barrier ½[F(x_C) - min F] by roughly a factor of two.
/// The tighter, self-consistent value is exit_bound_consistent().
double exit_bound(int n, int k);

/// ½[clique_potential(k) - 1/(4n)].
double exit_bound_consistent(int n, int k);

struct CliqueSizeEstimate {
    double log_ratio;  ///< 2 log(n) / log(1/p)
    int floor;
    int ceil;
};

/// Typical maximum clique size of G(n, p): ⌊2 log_{1/p} n⌋ or ⌈2 log_{1/p} n⌉.
CliqueSizeEstimate gnp_clique_estimate(int n, double p);

/// exit_bound(n, ⌈2 log_{1/p} n⌉), with the clique size capped at n.
double gnp_exit_bound(int n, double p);

}  // namespace srd
