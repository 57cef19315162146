#include "srd/potential.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "srd/errors.hpp"
#include "srd/tolerances.hpp"

namespace srd {

namespace {

void require_size(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got) {
        throw ContractError(std::string(what) + ": dimension mismatch (expected " + std::to_string(expected) +
                            ", got " + std::to_string(got) + ")");
    }
}

// ½ xᵀMx, shared by the simplex and sphere entry points so that
// sphere_potential(M, y) and potential(M, y²) agree bit for bit.
double half_quadratic_form(const PayoffMatrix& m, std::span<const double> x) {
    std::vector<double> mx(m.size());
    m.multiply(x, mx);
    return 0.5 * std::inner_product(mx.begin(), mx.end(), x.begin(), 0.0);
}

double euclidean_norm(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

}  // namespace

PayoffMatrix::PayoffMatrix(std::size_t n, std::vector<double> entries) : n_(n), entries_(std::move(entries)) {
    if (n_ < 2) throw ContractError("PayoffMatrix: n must be at least 2");
    if (entries_.size() != n_ * n_) {
        throw ContractError("PayoffMatrix: expected " + std::to_string(n_ * n_) + " entries, got " +
                            std::to_string(entries_.size()));
    }
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
            const double v = entries_[i * n_ + j];
            if (!std::isfinite(v)) throw ContractError("PayoffMatrix: non-finite entry");
            if (v != entries_[j * n_ + i]) {
                throw ContractError("PayoffMatrix: not symmetric at (" + std::to_string(i) + "," + std::to_string(j) +
                                    ")");
            }
        }
    }
}

PayoffMatrix PayoffMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    std::vector<double> flat;
    flat.reserve(rows.size() * rows.size());
    for (const auto& r : rows) {
        if (r.size() != rows.size()) throw ContractError("PayoffMatrix: rows must form a square matrix");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return PayoffMatrix(rows.size(), std::move(flat));
}

PayoffMatrix PayoffMatrix::scaled_identity(std::size_t n, double value) {
    std::vector<double> e(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) e[i * n + i] = value;
    return PayoffMatrix(n, std::move(e));
}

void PayoffMatrix::multiply(std::span<const double> v, std::span<double> out) const noexcept {
    for (std::size_t i = 0; i < n_; ++i) {
        const double* r = entries_.data() + i * n_;
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += r[j] * v[j];
        out[i] = s;
    }
}

SimplexPoint::SimplexPoint(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw ContractError("SimplexPoint: empty coordinate vector");
    double sum = 0.0;
    for (double c : coords_) {
        if (!(c >= 0.0)) throw ContractError("SimplexPoint: coordinates must be nonnegative");
        sum += c;
    }
    if (std::abs(sum - 1.0) > tol::kSimplexSum) {
        throw ContractError("SimplexPoint: coordinates sum to " + std::to_string(sum) + ", not 1");
    }
}

SimplexPoint SimplexPoint::barycenter(std::size_t n) {
    return SimplexPoint(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SimplexPoint SimplexPoint::vertex(std::size_t n, std::size_t v) {
    if (v >= n) throw ContractError("SimplexPoint::vertex: index out of range");
    std::vector<double> c(n, 0.0);
    c[v] = 1.0;
    return SimplexPoint(std::move(c));
}

SpherePoint::SpherePoint(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw ContractError("SpherePoint: empty coordinate vector");
    const double norm = euclidean_norm(coords_);
    if (!(std::abs(norm - 1.0) <= tol::kSphereNorm)) {
        throw ContractError("SpherePoint: norm " + std::to_string(norm) + " is not 1");
    }
}

SpherePoint SpherePoint::normalized(std::vector<double> coords) {
    const double norm = euclidean_norm(coords);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericError("SpherePoint::normalized: zero or non-finite vector");
    for (double& c : coords) c /= norm;
    return SpherePoint(std::move(coords));
}

double potential(const PayoffMatrix& m, const SimplexPoint& x) {
    require_size(m.size(), x.size(), "potential");
    return half_quadratic_form(m, x.coords());
}

std::vector<double> simplex_payoff(const PayoffMatrix& m, const SimplexPoint& x) {
    require_size(m.size(), x.size(), "simplex_payoff");
    std::vector<double> mx(m.size());
    m.multiply(x.coords(), mx);
    return mx;
}

double sphere_potential(const PayoffMatrix& m, const SpherePoint& y) {
    require_size(m.size(), y.size(), "sphere_potential");
    std::vector<double> sq(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) sq[i] = y[i] * y[i];
    return half_quadratic_form(m, sq);
}

std::vector<double> sphere_gradient(const PayoffMatrix& m, const SpherePoint& y) {
    require_size(m.size(), y.size(), "sphere_gradient");
    const std::size_t n = y.size();
    std::vector<double> sq(n), msq(n), g(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = y[i] * y[i];
    m.multiply(sq, msq);
    for (std::size_t i = 0; i < n; ++i) g[i] = 2.0 * y[i] * msq[i];
    return g;
}

std::vector<double> projected_gradient(const PayoffMatrix& m, const SpherePoint& y) {
    require_size(m.size(), y.size(), "projected_gradient");
    std::vector<double> out(y.size()), scratch(2 * y.size());
    kernel::projected_gradient(m, y.coords(), out, scratch);
    return out;
}

namespace kernel {

double sphere_potential(const PayoffMatrix& m, std::span<const double> y, std::span<double> squares) noexcept {
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) squares[i] = y[i] * y[i];
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = m.row(i);
        double ri = 0.0;
        for (std::size_t j = 0; j < n; ++j) ri += r[j] * squares[j];
        s += squares[i] * ri;
    }
    return 0.5 * s;
}

double projected_gradient(const PayoffMatrix& m, std::span<const double> y, std::span<double> out,
                          std::span<double> scratch) noexcept {
    const std::size_t n = m.size();
    auto sq = scratch.first(n);
    auto msq = scratch.subspan(n, n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = y[i] * y[i];
    m.multiply(sq, msq);
    double radial = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = 2.0 * y[i] * msq[i];
        radial += out[i] * y[i];
    }
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] -= radial * y[i];
        norm2 += out[i] * out[i];
    }
    return std::sqrt(norm2);
}

}  // namespace kernel

}  // namespace srd
