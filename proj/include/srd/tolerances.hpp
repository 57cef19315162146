#pragma once

// Every numerical tolerance used by the library lives here.

namespace srd::tol {

/// |‖y‖ - 1| allowed for a SpherePoint.
inline constexpr double kSphereNorm = 1e-9;
/// |Σx - 1| allowed for a SimplexPoint.
inline constexpr double kSimplexSum = 1e-9;
/// Relative bound on ⟨∇*F̃(y), y⟩ / ‖∇F̃(y)‖.
inline constexpr double kOrthogonality = 1e-12;

/// Gradient norm at which the noiseless flow counts as converged.
inline constexpr double kFlowGradient = 1e-8;
/// L1 radius for matching a flow limit to a clique characteristic vector.
inline constexpr double kSnapL1 = 1e-3;

/// Relative residual required of the principal Dirichlet eigenpair.
inline constexpr double kEigenResidual = 1e-6;
/// Trapezoid mass of a normalised density.
inline constexpr double kDensityMass = 1e-8;

}  // namespace srd::tol
