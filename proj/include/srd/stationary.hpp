#pragma once

// Gibbs stationary densities and their validation on the circle (n = 2).
//
// For n = 2 the sphere is the circle y = (cos θ, sin θ) and the diffusion
// reduces to dθ = ¼ F̃′(θ) dt + ε dW, whose invariant density is
// ∝ exp(F̃(θ)/(2ε²)).  The exponent scale (2 here) is a parameter; 8 is the
// other accepted value.

#include <cstddef>
#include <span>
#include <vector>

#include "srd/potential.hpp"
#include "srd/sde.hpp"

namespace srd {

inline constexpr double kDefaultExponentScale = 2.0;

/// F̃(y)/(scale·ε²).  Throws ContractError for eps ≤ 0 or scale ∉ {2, 8}.
double gibbs_log_density_sphere(const PayoffMatrix& m, double eps, const SpherePoint& y,
                                double exponent_scale = kDefaultExponentScale);

/// -½ Σ log xₘ + F(x)/(scale·ε²); +infinity when some xₘ = 0.
double gibbs_log_density_simplex(const PayoffMatrix& m, double eps, const SimplexPoint& x,
                                 double exponent_scale = kDefaultExponentScale);

/// F̃(θ) = F([cos²θ, sin²θ]) for a 2×2 matrix.
double circle_potential(const PayoffMatrix& m, double theta);
/// dF̃/dθ = sin 2θ · ([Mx]₂ - [Mx]₁).
double circle_potential_derivative(const PayoffMatrix& m, double theta);
/// Angle of (y₀, y₁) in [0, 2π).
double circle_angle(double y0, double y1) noexcept;

/// Density sampled on the periodic grid θᵢ = 2πi/N.
struct DensityOnCircle {
    std::vector<double> thetas;
    std::vector<double> values;
    bool normalized = false;
    /// Constant probability flux of the discrete solution (0 for the
    /// closed-form densities).
    double flux = 0.0;

    std::size_t size() const noexcept { return values.size(); }
    double spacing() const noexcept;
    /// Periodic trapezoid rule, h Σ values.
    double mass() const noexcept;
    /// Periodic linear interpolation.
    double at(double theta) const;
    /// ∫ over [a, b] ⊂ [0, 2π] of the piecewise-linear interpolant.
    double integral(double a, double b) const;
};

/// Stationary Fokker–Planck solution for dθ = ¼F̃′dt + ε dW by a conservative
/// finite-volume scheme: equal flux through every cell face, periodic closure,
/// then normalisation.  Throws ContractError unless M is 2×2, eps > 0 and
/// grid_size ≥ 16, and NumericError when the grid is too coarse for the drift.
DensityOnCircle circle_stationary_oracle(const PayoffMatrix& m, double eps, std::size_t grid_size);

/// exp(F̃(θ)/(scale·ε²))/Z on the same grid.
DensityOnCircle circle_gibbs_density(const PayoffMatrix& m, double eps, std::size_t grid_size,
                                     double exponent_scale = kDefaultExponentScale);

/// Angle histogram on [0, 2π) with equal bins, filled incrementally.
class AngleHistogram {
public:
    explicit AngleHistogram(std::size_t bins);

    void add(double theta) noexcept;
    void add_point(std::span<const double> y) noexcept { add(circle_angle(y[0], y[1])); }

    std::size_t bins() const noexcept { return counts_.size(); }
    std::size_t total() const noexcept { return total_; }
    const std::vector<std::size_t>& counts() const noexcept { return counts_; }
    double bin_left(std::size_t i) const noexcept;
    double bin_right(std::size_t i) const noexcept;
    /// Fraction of samples per bin.  Throws ContractError when empty.
    std::vector<double> masses() const;

private:
    std::vector<std::size_t> counts_;
    std::size_t total_ = 0;
};

/// Histogram of the recorded angles.  Needs sphere states (n = 2); throws
/// ContractError for an empty trajectory or one recorded without them.
AngleHistogram empirical_density(const TrajectoryRecord& traj, std::size_t bins);

/// Runs the scheme for cfg.max_steps steps from y0 (n = 2) and bins the angle
/// after every step.  Nothing is stored besides the histogram.
AngleHistogram sample_angle_histogram(const PayoffMatrix& m, const IntegratorConfig& cfg, const SpherePoint& y0,
                                      std::size_t bins);

/// Masses the density assigns to the histogram bins (they sum to 1).
std::vector<double> bin_masses(const DensityOnCircle& d, const AngleHistogram& h);

/// ½ Σ |pᵢ - qᵢ| over the histogram bins.
double tv_distance(const AngleHistogram& h, const DensityOnCircle& d);

struct ScaleSelection {
    double scale = 0.0;
    /// Mismatch for scale 2 and scale 8 (the selected one is the smaller).
    double mismatch_2 = 0.0;
    double mismatch_8 = 0.0;
};

/// Compares the Fokker–Planck oracle with the Gibbs density for both scales,
/// by maximum relative error on the grid.
ScaleSelection select_scale_pointwise(const PayoffMatrix& m, double eps, std::size_t grid_size);

/// Compares a simulated histogram with the Gibbs density for both scales, by
/// total variation.
ScaleSelection select_scale_histogram(const PayoffMatrix& m, double eps, const AngleHistogram& h,
                                      std::size_t grid_size = 4096);

}  // namespace srd
