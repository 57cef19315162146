#include "srd/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "srd/errors.hpp"

namespace srd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_eps_scale(double eps, double scale, const char* who) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ContractError(std::string(who) + ": eps must be positive");
    if (scale != 2.0 && scale != 8.0) throw ContractError(std::string(who) + ": exponent_scale must be 2 or 8");
}

void check_circle(const PayoffMatrix& m, const char* who) {
    if (m.size() != 2) throw UnsupportedError(std::string(who) + ": only n = 2 (the circle) is supported");
}

std::vector<double> uniform_grid(std::size_t n) {
    std::vector<double> t(n);
    const double h = kTwoPi / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * h;
    return t;
}

void normalize(DensityOnCircle& d) {
    const double z = d.mass();
    if (!(z > 0.0) || !std::isfinite(z)) throw NumericError("density normalisation constant is " + std::to_string(z));
    for (double& v : d.values) v /= z;
    d.normalized = true;
}

// prefix[i] = ∫₀^{θᵢ} of the interpolant; prefix[N] is the total.
std::vector<double> cumulative(const DensityOnCircle& d) {
    const std::size_t n = d.size();
    const double h = d.spacing();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + 0.5 * h * (d.values[i] + d.values[(i + 1) % n]);
    return prefix;
}

double cumulative_at(const DensityOnCircle& d, const std::vector<double>& prefix, double theta) {
    const std::size_t n = d.size();
    const double h = d.spacing();
    if (theta <= 0.0) return 0.0;
    if (theta >= kTwoPi) return prefix[n];
    auto i = static_cast<std::size_t>(theta / h);
    if (i >= n) i = n - 1;
    const double t = theta - static_cast<double>(i) * h;
    const double v0 = d.values[i];
    const double v1 = d.values[(i + 1) % n];
    const double vt = v0 + (v1 - v0) * (t / h);
    return prefix[i] + 0.5 * t * (v0 + vt);
}

}  // namespace

double gibbs_log_density_sphere(const PayoffMatrix& m, double eps, const SpherePoint& y, double exponent_scale) {
    check_eps_scale(eps, exponent_scale, "gibbs_log_density_sphere");
    if (y.size() != m.size()) throw ContractError("gibbs_log_density_sphere: dimension mismatch");
    return sphere_potential(m, y) / (exponent_scale * eps * eps);
}

double gibbs_log_density_simplex(const PayoffMatrix& m, double eps, const SimplexPoint& x, double exponent_scale) {
    check_eps_scale(eps, exponent_scale, "gibbs_log_density_simplex");
    if (x.size() != m.size()) throw ContractError("gibbs_log_density_simplex: dimension mismatch");
    double log_jacobian = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0) return std::numeric_limits<double>::infinity();
        log_jacobian -= 0.5 * std::log(x[i]);
    }
    return log_jacobian + potential(m, x) / (exponent_scale * eps * eps);
}

double circle_potential(const PayoffMatrix& m, double theta) {
    check_circle(m, "circle_potential");
    const double c = std::cos(theta), s = std::sin(theta);
    const double x0 = c * c, x1 = s * s;
    return 0.5 * (m(0, 0) * x0 * x0 + 2.0 * m(0, 1) * x0 * x1 + m(1, 1) * x1 * x1);
}

double circle_potential_derivative(const PayoffMatrix& m, double theta) {
    check_circle(m, "circle_potential_derivative");
    const double c = std::cos(theta), s = std::sin(theta);
    const double x0 = c * c, x1 = s * s;
    const double v0 = m(0, 0) * x0 + m(0, 1) * x1;
    const double v1 = m(1, 0) * x0 + m(1, 1) * x1;
    return std::sin(2.0 * theta) * (v1 - v0);
}

double circle_angle(double y0, double y1) noexcept {
    double t = std::atan2(y1, y0);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

double DensityOnCircle::spacing() const noexcept { return kTwoPi / static_cast<double>(values.size()); }

double DensityOnCircle::mass() const noexcept {
    double s = 0.0;
    for (double v : values) s += v;
    return s * spacing();
}

double DensityOnCircle::at(double theta) const {
    if (values.empty()) throw ContractError("DensityOnCircle::at: empty density");
    theta = std::fmod(theta, kTwoPi);
    if (theta < 0.0) theta += kTwoPi;
    const double h = spacing();
    auto i = static_cast<std::size_t>(theta / h);
    if (i >= values.size()) i = values.size() - 1;
    const double w = (theta - static_cast<double>(i) * h) / h;
    return (1.0 - w) * values[i] + w * values[(i + 1) % values.size()];
}

double DensityOnCircle::integral(double a, double b) const {
    if (values.empty()) throw ContractError("DensityOnCircle::integral: empty density");
    if (!(a <= b)) throw ContractError("DensityOnCircle::integral: need a <= b");
    const auto prefix = cumulative(*this);
    return cumulative_at(*this, prefix, b) - cumulative_at(*this, prefix, a);
}

DensityOnCircle circle_stationary_oracle(const PayoffMatrix& m, double eps, std::size_t grid_size) {
    check_circle(m, "circle_stationary_oracle");
    if (!(eps > 0.0)) throw ContractError("circle_stationary_oracle: eps must be positive");
    if (grid_size < 16) throw ContractError("circle_stationary_oracle: grid_size must be at least 16");

    const std::size_t n = grid_size;
    const double h = kTwoPi / static_cast<double>(n);
    const double diff = 0.5 * eps * eps;

    // Face flux J = α pᵢ - β pᵢ₊₁ with centred drift at the face.  With p₀ = 1,
    // pᵢ = uᵢ - J vᵢ; periodicity p_N = p₀ fixes J.
    std::vector<double> u(n + 1), v(n + 1);
    u[0] = 1.0;
    v[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double b = 0.25 * circle_potential_derivative(m, (static_cast<double>(i) + 0.5) * h);
        const double alpha = diff / h + 0.5 * b;
        const double beta = diff / h - 0.5 * b;
        if (!(beta > 0.0) || !(alpha > 0.0)) {
            throw NumericError("circle_stationary_oracle: grid too coarse for the drift (need h|b| < eps^2); "
                               "increase grid_size beyond " +
                               std::to_string(grid_size));
        }
        u[i + 1] = alpha * u[i] / beta;
        v[i + 1] = (alpha * v[i] + 1.0) / beta;
    }
    if (!std::isfinite(u[n]) || !std::isfinite(v[n]) || !(v[n] > 0.0)) {
        throw NumericError("circle_stationary_oracle: singular periodic closure; refine the grid or raise eps");
    }
    const double flux = (u[n] - 1.0) / v[n];

    DensityOnCircle d;
    d.thetas = uniform_grid(n);
    d.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.values[i] = u[i] - flux * v[i];
    if (*std::min_element(d.values.begin(), d.values.end()) < 0.0) {
        throw NumericError("circle_stationary_oracle: negative density; refine the grid");
    }
    const double z = d.mass();
    normalize(d);
    d.flux = flux / z;
    return d;
}

DensityOnCircle circle_gibbs_density(const PayoffMatrix& m, double eps, std::size_t grid_size,
                                     double exponent_scale) {
    check_circle(m, "circle_gibbs_density");
    check_eps_scale(eps, exponent_scale, "circle_gibbs_density");
    if (grid_size < 16) throw ContractError("circle_gibbs_density: grid_size must be at least 16");
    DensityOnCircle d;
    d.thetas = uniform_grid(grid_size);
    d.values.resize(grid_size);
    std::vector<double> f(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) f[i] = circle_potential(m, d.thetas[i]);
    const double fmax = *std::max_element(f.begin(), f.end());
    for (std::size_t i = 0; i < grid_size; ++i) d.values[i] = std::exp((f[i] - fmax) / (exponent_scale * eps * eps));
    normalize(d);
    return d;
}

AngleHistogram::AngleHistogram(std::size_t bins) : counts_(bins, 0) {
    if (bins == 0) throw ContractError("AngleHistogram: need at least one bin");
}

void AngleHistogram::add(double theta) noexcept {
    auto i = static_cast<std::size_t>(theta / kTwoPi * static_cast<double>(counts_.size()));
    if (i >= counts_.size()) i = counts_.size() - 1;
    ++counts_[i];
    ++total_;
}

double AngleHistogram::bin_left(std::size_t i) const noexcept {
    return kTwoPi * static_cast<double>(i) / static_cast<double>(counts_.size());
}

double AngleHistogram::bin_right(std::size_t i) const noexcept {
    return i + 1 == counts_.size() ? kTwoPi : bin_left(i + 1);
}

std::vector<double> AngleHistogram::masses() const {
    if (total_ == 0) throw ContractError("AngleHistogram: no samples");
    std::vector<double> p(counts_.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
    return p;
}

AngleHistogram empirical_density(const TrajectoryRecord& traj, std::size_t bins) {
    if (traj.size() == 0) throw ContractError("empirical_density: empty trajectory");
    if (traj.sphere_states.size() != traj.size())
        throw ContractError("empirical_density: trajectory was recorded without sphere states");
    if (traj.sphere_states.front().size() != 2) throw UnsupportedError("empirical_density: only n = 2 is supported");
    AngleHistogram h(bins);
    for (const auto& y : traj.sphere_states) h.add_point(y.coords());
    return h;
}

AngleHistogram sample_angle_histogram(const PayoffMatrix& m, const IntegratorConfig& cfg, const SpherePoint& y0,
                                      std::size_t bins) {
    check_circle(m, "sample_angle_histogram");
    cfg.validate();
    if (y0.size() != 2) throw ContractError("sample_angle_histogram: y0 must have 2 coordinates");
    AngleHistogram h(bins);
    SphereStepper stepper(m, cfg.dt, cfg.eps, cfg.descent);
    Rng rng(cfg.seed);
    std::vector<double> y(y0.coords().begin(), y0.coords().end());
    for (std::size_t k = 0; k < cfg.max_steps; ++k) {
        stepper.advance(y, rng);
        h.add_point(y);
    }
    return h;
}

std::vector<double> bin_masses(const DensityOnCircle& d, const AngleHistogram& h) {
    if (d.size() == 0) throw ContractError("bin_masses: empty density");
    const auto prefix = cumulative(d);
    const double total = prefix.back();
    std::vector<double> q(h.bins());
    for (std::size_t i = 0; i < q.size(); ++i)
        q[i] = (cumulative_at(d, prefix, h.bin_right(i)) - cumulative_at(d, prefix, h.bin_left(i))) / total;
    return q;
}

double tv_distance(const AngleHistogram& h, const DensityOnCircle& d) {
    const auto p = h.masses();
    const auto q = bin_masses(d, h);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return std::min(1.0, 0.5 * s);
}

ScaleSelection select_scale_pointwise(const PayoffMatrix& m, double eps, std::size_t grid_size) {
    const auto oracle = circle_stationary_oracle(m, eps, grid_size);
    auto mismatch = [&](double scale) {
        const auto g = circle_gibbs_density(m, eps, grid_size, scale);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid_size; ++i)
            worst = std::max(worst, std::abs(oracle.values[i] - g.values[i]) / g.values[i]);
        return worst;
    };
    ScaleSelection s;
    s.mismatch_2 = mismatch(2.0);
    s.mismatch_8 = mismatch(8.0);
    s.scale = s.mismatch_2 <= s.mismatch_8 ? 2.0 : 8.0;
    return s;
}

ScaleSelection select_scale_histogram(const PayoffMatrix& m, double eps, const AngleHistogram& h,
                                      std::size_t grid_size) {
    ScaleSelection s;
    s.mismatch_2 = tv_distance(h, circle_gibbs_density(m, eps, grid_size, 2.0));
    s.mismatch_8 = tv_distance(h, circle_gibbs_density(m, eps, grid_size, 8.0));
    s.scale = s.mismatch_2 <= s.mismatch_8 ? 2.0 : 8.0;
    return s;
}

}  // namespace srd
