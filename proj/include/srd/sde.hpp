#pragma once

// Time discretisation of the sphere Langevin equation
//
//   dy = ¼ ∇*F̃(y) dt + ε (I - yyᵀ) dW
//
// by an Euler step followed by renormalisation onto the sphere, plus the
// noiseless flow and the maps between sphere and simplex.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "srd/potential.hpp"
#include "srd/rng.hpp"

namespace srd {

struct IntegratorConfig {
    double dt = 0.05;
    double eps = 0.0;
    std::uint64_t seed = 0;
    std::size_t max_steps = 100'000;
    /// Flip the drift sign (gradient descent).  Off by default: the noiseless
    /// replicator flow ascends F.
    bool descent = false;

    /// Throws ContractError unless dt > 0, eps ≥ 0 and max_steps > 0.
    void validate() const;
};

/// Recorded (sub-sampled) trajectory.  times[k] = steps[k]·dt.
struct TrajectoryRecord {
    std::vector<std::size_t> steps;
    std::vector<double> times;
    std::vector<SimplexPoint> states;
    /// Filled only when sphere states were requested.
    std::vector<SpherePoint> sphere_states;

    std::size_t size() const noexcept { return states.size(); }
};

/// Stateful stepper for inner loops: owns its scratch space, updates y in place.
class SphereStepper {
public:
    SphereStepper(const PayoffMatrix& m, double dt, double eps, bool descent = false);

    /// ŷ = y ± (dt/4)∇*F̃(y) + ε√dt (I - yyᵀ) noise;  y ← ŷ/‖ŷ‖.
    /// Throws NumericError if ‖ŷ‖ vanishes or is not finite.
    void advance(std::span<double> y, std::span<const double> noise);
    /// Same, drawing the noise from `rng` (no draws when ε = 0).
    void advance(std::span<double> y, Rng& rng);

    /// ‖∇*F̃(y)‖ at the start of the last step.
    double last_gradient_norm() const noexcept { return last_grad_norm_; }
    std::size_t dimension() const noexcept { return m_->size(); }

private:
    const PayoffMatrix* m_;
    double drift_coef_;
    double noise_coef_;
    std::vector<double> grad_;
    std::vector<double> scratch_;
    std::vector<double> noise_;
    double last_grad_norm_ = 0.0;
};

/// One step of the scheme from a validated point.
SpherePoint step(const SpherePoint& y, const PayoffMatrix& m, double dt, double eps, std::span<const double> noise,
                 bool descent = false);

/// Called with (step index, y, x = y²) at step 0 and after every step.
/// Returning false stops the simulation.
using StepObserver = std::function<bool(std::size_t, std::span<const double>, std::span<const double>)>;

struct RecordOptions {
    /// Record every `stride` steps (0 disables recording).  The final state is
    /// always recorded when stride > 0.
    std::size_t stride = 100;
    bool keep_sphere_states = false;
};

/// Runs cfg.max_steps steps of the scheme with noise from Rng(cfg.seed), or
/// until the observer asks to stop.
TrajectoryRecord simulate(const SpherePoint& y0, const PayoffMatrix& m, const IntegratorConfig& cfg,
                          const RecordOptions& record = {}, const StepObserver& observer = {});

struct FlowResult {
    SpherePoint point;
    bool converged = false;
    std::size_t steps = 0;
    double gradient_norm = 0.0;
};

/// Noiseless ascent until ‖∇*F̃‖ < grad_tol or max_steps steps.  Non-convergence
/// is reported through `converged`, not by throwing.
FlowResult deterministic_flow(const SpherePoint& y0, const PayoffMatrix& m, double dt, double grad_tol,
                              std::size_t max_steps);

namespace kernel {

/// y ← (y + h·direction)/‖y + h·direction‖.  Throws NumericError when the
/// norm vanishes or is not finite.
void retract_along(std::span<double> y, std::span<const double> direction, double h);

}  // namespace kernel

/// x = y∘y.
SimplexPoint to_simplex(const SpherePoint& y);
/// y = √x, in the closed positive orthant.
SpherePoint sqrt_lift(const SimplexPoint& x);

}  // namespace srd
