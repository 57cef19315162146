#pragma once

// The process conditioned to stay in a basin, for n = 2.
//
// On an arc [a, b] of the circle the generator is L = b(θ)∂θ + (ε²/2)∂²θ with
// b = ¼F̃′.  Its principal Dirichlet eigenpair (λ₀, φ) gives the conditioned
// (Q-)process, a diffusion with drift b + ε²(log φ)′, and λ₀⁻¹ approximates
// the mean exit time from the arc.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srd/potential.hpp"
#include "srd/sde.hpp"
#include "srd/stationary.hpp"

namespace srd {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const noexcept { return hi - lo; }
    bool contains_open(double t) const noexcept { return t > lo && t < hi; }
};

/// F̃ and b = ¼F̃′ on the nodes θⱼ = a + j·h, j = 0..N.
struct CircleReduction {
    PayoffMatrix m;
    Interval interval;
    std::vector<double> grid;
    std::vector<double> f_tilde;
    std::vector<double> drift;

    std::size_t cells() const noexcept { return grid.size() - 1; }
    double spacing() const noexcept { return interval.length() / static_cast<double>(cells()); }
};

/// Throws UnsupportedError unless M is 2×2, ContractError for grid_size < 64
/// or an interval that is empty, not finite or longer than 2π.
CircleReduction reduce_to_circle(const PayoffMatrix& m, Interval interval, std::size_t grid_size);

/// Central-difference L on the interior nodes 1..N-1.  lower[0] and
/// upper[size-1] are the couplings to the (removed) boundary nodes.
struct TridiagonalOperator {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    std::size_t size() const noexcept { return diag.size(); }
    /// out = L v with zero boundary values.
    void apply(std::span<const double> v, std::span<double> out) const;
};

/// Throws ContractError for eps ≤ 0 or fewer than 16 interior nodes.
TridiagonalOperator dirichlet_generator(const CircleReduction& red, double eps);

struct EigenPair {
    double lambda0 = 0.0;
    /// On all N+1 nodes, zero at both ends, maximum 1.
    std::vector<double> phi;
    double residual = 0.0;  ///< ‖(-L)φ - λ₀φ‖∞ / λ₀
    std::size_t iterations = 0;
};

/// Inverse iteration on -L (shift 0) until the relative residual is below tol.
/// Throws NumericError without convergence after max_iterations.
EigenPair principal_eigenpair(const TridiagonalOperator& op, double tol = 1e-7, std::size_t max_iterations = 10'000);

/// Solves L u = -1 with u = 0 at both ends; u on all N+1 nodes.
std::vector<double> expected_exit_time(const CircleReduction& red, double eps);

/// Linear interpolation of node values on the reduction grid.
double interpolate(const CircleReduction& red, std::span<const double> values, double theta);

/// Drift b(θ) + ε²(log φ)′(θ) of the conditioned process.
///
/// φ is factored as (θ-a)(b-θ)·g(θ).  The singular part of (log φ)′ is exact;
/// (log g)′ comes from central differences at the nodes (one-sided,
/// second order, at the nodes next to the ends) with linear interpolation,
/// held constant across the outermost cell on each side.
class QProcessDrift {
public:
    QProcessDrift(const CircleReduction& red, const EigenPair& eig, double eps);

    /// Throws ContractError unless θ lies strictly inside the interval.
    double operator()(double theta) const;
    /// ε²(log φ)′(θ) alone.
    double correction(double theta) const;
    /// Same as operator() without the range check.
    double unchecked(double theta) const;

private:
    const CircleReduction* red_;
    double eps2_;
    std::vector<double> dlog_g_;
};

double qprocess_drift(const CircleReduction& red, const EigenPair& eig, double eps, double theta);

/// Density ∝ φ²·exp(F̃/(scale·ε²)) on the nodes, normalised by the trapezoid rule.
std::vector<double> qprocess_density(const CircleReduction& red, const EigenPair& eig, double eps,
                                     double exponent_scale = kDefaultExponentScale);

struct ArcExitSample {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    double tau = 0.0;
    std::size_t steps = 0;
    bool censored = false;
};

/// Exit times of the sphere scheme (n = 2) started at angle theta0 from the
/// arc, checked after every step.  Run r uses derive_seed(cfg.seed, r).
std::vector<ArcExitSample> arc_exit_times(const PayoffMatrix& m, Interval interval, double theta0,
                                          const IntegratorConfig& cfg, std::size_t runs, unsigned jobs = 1);

struct ArcExitSummary {
    std::size_t samples = 0;
    std::size_t censored = 0;
    double mean = 0.0;
    double std_error = 0.0;
};
ArcExitSummary summarize(std::span<const ArcExitSample> samples);

struct QProcessValidationConfig {
    std::uint64_t seed = 1;
    std::size_t seeds = 20;
    double dt = 5e-4;
    std::size_t steps = 1'000'000;
    std::size_t bins = 20;
    double tv_tolerance = 0.1;
    double exponent_scale = kDefaultExponentScale;
    /// Exit-time cross-check with the unconditioned sphere scheme.
    double exit_dt = 0.005;
    std::size_t exit_runs = 500;
    std::size_t exit_max_steps = 2'000'000;
    double exit_tolerance = 0.25;
    unsigned jobs = 1;
};

struct QProcessReport {
    double eps = 0.0;
    double lambda0 = 0.0;
    double residual = 0.0;
    double theta_start = 0.0;

    std::size_t seeds = 0;
    std::size_t steps = 0;
    /// Seeds whose path left the open interval.
    std::size_t exited_seeds = 0;
    double min_boundary_distance = 0.0;
    bool confined = false;

    double tv = 0.0;
    bool density_ok = false;

    double mean_exit = 0.0;
    double mean_exit_std_error = 0.0;
    std::size_t exit_censored = 0;
    double inverse_lambda0 = 0.0;
    double exit_relative_error = 0.0;
    bool exit_ok = false;

    /// Histogram of the conditioned paths over equal bins of the interval.
    std::vector<double> histogram;
    std::vector<double> predicted;

    std::vector<std::string> failures;
    bool passed() const noexcept { return failures.empty(); }
};

/// Simulates the conditioned process from argmax φ on cfg.seeds seeds and
/// checks confinement, the stationary density and the exit-time relation.
/// Failures are listed in the report rather than thrown.
QProcessReport validate_qprocess(const CircleReduction& red, const EigenPair& eig, double eps,
                                 const QProcessValidationConfig& cfg = {});

}  // namespace srd
