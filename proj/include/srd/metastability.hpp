#pragma once

// Basins of attraction of clique equilibria, exit-time experiments and the
// statistics used to compare them with the small-noise asymptotics.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srd/graph.hpp"
#include "srd/potential.hpp"
#include "srd/sde.hpp"
#include "srd/tolerances.hpp"

namespace srd {

/// Parameters of the noiseless flow used to decide basin membership.
struct FlowParams {
    /// Flow time step.  Larger than the integrator default: only the limit
    /// matters here, and the step stays well inside the stability region.
    double dt = 0.25;
    double grad_tol = tol::kFlowGradient;
    std::size_t max_steps = 400'000;
    /// L1 radius (simplex coordinates) for matching a limit to x_C.
    double tol_snap = tol::kSnapL1;
    /// Stop as soon as the iterate is within tol_snap of some x_C instead of
    /// waiting for ‖∇*F̃‖ < grad_tol.  x_C is a nondegenerate strict local
    /// maximum, so this L1 ball lies inside its basin.
    bool early_capture = true;
};

struct BasinLabel {
    /// Index into the clique list the classifier was built with.
    std::optional<std::size_t> clique;
    /// Members of that clique; empty when unclassified.
    VertexSet members;
    /// L1 distance from the flow limit (or capture point) to the matched x_C;
    /// to the nearest x_C when unclassified.
    double snap_distance = std::numeric_limits<double>::infinity();
    std::size_t flow_steps = 0;
    /// Why a point was left unclassified.
    std::string diagnostic;

    bool is_clique() const noexcept { return clique.has_value(); }
    friend bool operator==(const BasinLabel& a, const BasinLabel& b) noexcept { return a.members == b.members; }
};

/// "0-1-4" for a clique label, "none" when unclassified.
std::string label_string(const BasinLabel& label);

/// Reusable classifier (owns its scratch space; not thread-safe, create one
/// per thread).
class BasinClassifier {
public:
    /// Throws ContractError when `cliques` is empty or dimensions disagree.
    BasinClassifier(const PayoffMatrix& m, std::vector<CliqueVector> cliques, FlowParams params = {});

    BasinLabel classify(const SimplexPoint& x);
    /// Unchecked simplex coordinates.
    BasinLabel classify(std::span<const double> x);

    const std::vector<CliqueVector>& cliques() const noexcept { return cliques_; }
    const FlowParams& params() const noexcept { return params_; }

private:
    std::pair<std::size_t, double> nearest(std::span<const double> x) const;
    BasinLabel make_label(std::size_t index, double distance, std::size_t steps) const;

    const PayoffMatrix* m_;
    std::vector<CliqueVector> cliques_;
    FlowParams params_;
    std::vector<double> y_, grad_, scratch_, x_;
};

/// Runs the noiseless flow from √x and names the clique whose characteristic
/// vector is within tol_snap of the limit.  A point whose flow settles on a
/// non-clique equilibrium (for instance the saddle between two basins) or
/// fails to converge is unclassified; the result is deterministic.
BasinLabel classify_basin(const SimplexPoint& x, const PayoffMatrix& m, std::span<const CliqueVector> cliques,
                          const FlowParams& flow = {});

/// Wraps every clique of the list into its characteristic vector.
std::vector<CliqueVector> clique_vectors(const std::vector<VertexSet>& cliques, std::size_t n);

struct ExitTimeSample {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    double eps = 0.0;
    /// steps·dt; for censored samples the simulated horizon.
    double tau = 0.0;
    std::size_t steps = 0;
    BasinLabel start_label;
    BasinLabel end_label;
    bool censored = false;
};

/// Simulates from √x_start and classifies the state every `check_stride`
/// steps; the first check whose label differs from the start ends the run.
/// Exit times are therefore resolved to check_stride·dt.  Runs reaching
/// cfg.max_steps are returned with censored = true.  Throws ContractError if
/// the start vector is not classified into its own basin.
ExitTimeSample measure_exit_time(const PayoffMatrix& m, const CliqueVector& start,
                                 const std::vector<CliqueVector>& cliques, const IntegratorConfig& cfg,
                                 std::size_t check_stride = 100, const FlowParams& flow = {});

struct SweepOptions {
    std::size_t check_stride = 100;
    unsigned jobs = 1;
    FlowParams flow;
};

struct SweepRow {
    double eps = 0.0;
    std::size_t runs = 0;
    std::size_t samples = 0;   ///< uncensored runs
    std::size_t censored = 0;
    /// Set when every run was censored; mean_tau is then NaN.
    bool flagged = false;
    double mean_tau = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    double eps2_log_tau = std::numeric_limits<double>::quiet_NaN();
    std::vector<ExitTimeSample> exits;  ///< ordered by run index
};

/// For each ε, `runs` independent exits with seeds derive_seed(derive_seed(cfg.seed, ε-index), run).
/// cfg.eps is ignored.  Output is independent of opts.jobs.
std::vector<SweepRow> exit_time_sweep(const PayoffMatrix& m, const CliqueVector& start,
                                      const std::vector<CliqueVector>& cliques, std::span<const double> eps_list,
                                      std::size_t runs, const IntegratorConfig& cfg, const SweepOptions& opts = {});

/// ½(F* - F_saddle), the limit of ε² log E τ_ε.
double theoretical_exit_rate(double f_star, double f_saddle);

struct SeparatrixEstimate {
    double value = 0.0;
    SimplexPoint location;
};

/// Classifies every interior node of the simplex grid {k/resolution} (n ≤ 3)
/// and returns the largest F over nodes that have an interior grid neighbour
/// with a different label (unclassified counts as a label).  Nodes on the
/// faces are skipped.  std::nullopt when all interior nodes share one label.
/// Throws UnsupportedError for n > 3.
std::optional<SeparatrixEstimate> estimate_separatrix_max(const PayoffMatrix& m,
                                                          const std::vector<CliqueVector>& cliques,
                                                          std::size_t resolution, const FlowParams& flow = {},
                                                          unsigned jobs = 1);

struct ExitStats {
    std::vector<double> samples;  ///< sorted ascending
    double mean = 0.0;
    double rate = 0.0;  ///< 1/mean
    /// (t, fraction of samples > t): starts at (0, 1), then one point per
    /// distinct sample value, ending at 0.
    std::vector<std::pair<double, double>> ccdf;
    /// Least-squares fit log ccdf ≈ intercept + slope·t over points with ccdf > 0.
    double slope = 0.0;
    double intercept = 0.0;
    double r2_loglinear = 0.0;
    /// Fewer than two distinct points to fit (r2 reported as 0).
    bool degenerate = false;
};

/// Throws ContractError with fewer than 10 samples.
ExitStats ccdf_and_fit(std::span<const double> taus);
/// Uncensored samples only.
ExitStats ccdf_and_fit(std::span<const ExitTimeSample> samples);

}  // namespace srd
