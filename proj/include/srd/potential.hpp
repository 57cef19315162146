#pragma once

// Quadratic potentials F(x) = ½ xᵀMx on the simplex and their lift
// F̃(y) = F(y∘y) to the unit sphere.

#include <cstddef>
#include <span>
#include <vector>

namespace srd {

/// Symmetric n×n payoff matrix, stored densely in row-major order.
class PayoffMatrix {
public:
    /// Throws ContractError unless n ≥ 2, entries.size() == n², and the
    /// entries are exactly symmetric.
    PayoffMatrix(std::size_t n, std::vector<double> entries);

    static PayoffMatrix from_rows(const std::vector<std::vector<double>>& rows);
    static PayoffMatrix scaled_identity(std::size_t n, double value);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept { return {entries_.data() + i * n_, n_}; }
    std::span<const double> entries() const noexcept { return entries_; }

    /// out = M v.  Sizes are not checked.
    void multiply(std::span<const double> v, std::span<double> out) const noexcept;

    bool operator==(const PayoffMatrix&) const = default;

private:
    std::size_t n_;
    std::vector<double> entries_;
};

/// Point of the probability simplex Pⁿ (population fractions).
class SimplexPoint {
public:
    /// Throws ContractError on a negative coordinate or |Σx - 1| > 1e-9.
    explicit SimplexPoint(std::vector<double> coords);

    static SimplexPoint barycenter(std::size_t n);
    static SimplexPoint vertex(std::size_t n, std::size_t v);

    std::size_t size() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const noexcept { return coords_[i]; }
    std::span<const double> coords() const noexcept { return coords_; }

private:
    std::vector<double> coords_;
};

/// Point of the unit sphere Sⁿ ⊂ ℝⁿ (square-root population shares).
class SpherePoint {
public:
    /// Throws ContractError when |‖y‖ - 1| > 1e-9.
    explicit SpherePoint(std::vector<double> coords);

    /// Divides by the Euclidean norm first; throws NumericError on a zero vector.
    static SpherePoint normalized(std::vector<double> coords);

    std::size_t size() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const noexcept { return coords_[i]; }
    std::span<const double> coords() const noexcept { return coords_; }

private:
    std::vector<double> coords_;
};

double potential(const PayoffMatrix& m, const SimplexPoint& x);

/// Payoff vector V(x) = ∇F(x) = Mx.
std::vector<double> simplex_payoff(const PayoffMatrix& m, const SimplexPoint& x);

double sphere_potential(const PayoffMatrix& m, const SpherePoint& y);

/// ∇F̃(y), component i = 2 yᵢ [M y²]ᵢ.
std::vector<double> sphere_gradient(const PayoffMatrix& m, const SpherePoint& y);

/// Tangential part ∇*F̃(y) = ∇F̃(y) - ⟨∇F̃(y), y⟩ y.
std::vector<double> projected_gradient(const PayoffMatrix& m, const SpherePoint& y);

/// Unchecked kernels on raw coordinates, for inner loops.  They accept any
/// y ∈ ℝⁿ (no norm condition) and never allocate.
namespace kernel {

/// ½ (y²)ᵀ M (y²).  `squares` receives y² and must have size n.
double sphere_potential(const PayoffMatrix& m, std::span<const double> y, std::span<double> squares) noexcept;

/// Writes ∇*F̃(y) into `out` and returns ‖∇*F̃(y)‖.  `scratch` needs 2n entries.
/// Uses y itself (not y/‖y‖) in the projection, so y should be unit length.
double projected_gradient(const PayoffMatrix& m, std::span<const double> y, std::span<double> out,
                          std::span<double> scratch) noexcept;

}  // namespace kernel

}  // namespace srd
