#include "srd/sde.hpp"

#include <cmath>
#include <string>

#include "srd/errors.hpp"

namespace srd {

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("IntegratorConfig: dt must be positive");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ContractError("IntegratorConfig: eps must be nonnegative");
    if (max_steps == 0) throw ContractError("IntegratorConfig: max_steps must be positive");
}

SphereStepper::SphereStepper(const PayoffMatrix& m, double dt, double eps, bool descent)
    : m_(&m),
      drift_coef_((descent ? -0.25 : 0.25) * dt),
      noise_coef_(eps * std::sqrt(dt)),
      grad_(m.size()),
      scratch_(2 * m.size()),
      noise_(m.size()) {
    if (!(dt > 0.0)) throw ContractError("SphereStepper: dt must be positive");
    if (!(eps >= 0.0)) throw ContractError("SphereStepper: eps must be nonnegative");
}

void SphereStepper::advance(std::span<double> y, std::span<const double> noise) {
    const std::size_t n = m_->size();
    last_grad_norm_ = kernel::projected_gradient(*m_, y, grad_, scratch_);
    double radial_noise = 0.0;
    if (noise_coef_ != 0.0) {
        for (std::size_t i = 0; i < n; ++i) radial_noise += noise[i] * y[i];
    }
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = y[i] + drift_coef_ * grad_[i];
        if (noise_coef_ != 0.0) v += noise_coef_ * (noise[i] - radial_noise * y[i]);
        scratch_[i] = v;
        norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw NumericError("SphereStepper: renormalisation denominator is " + std::to_string(norm));
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = scratch_[i] / norm;
}

void SphereStepper::advance(std::span<double> y, Rng& rng) {
    if (noise_coef_ != 0.0) rng.fill_normal(noise_);
    advance(y, noise_);
}

SpherePoint step(const SpherePoint& y, const PayoffMatrix& m, double dt, double eps, std::span<const double> noise,
                 bool descent) {
    if (y.size() != m.size()) throw ContractError("step: dimension mismatch between y and M");
    if (eps != 0.0 && noise.size() != m.size()) throw ContractError("step: noise must have length n");
    SphereStepper stepper(m, dt, eps, descent);
    std::vector<double> v(y.coords().begin(), y.coords().end());
    std::vector<double> zeros;
    if (noise.size() != m.size()) {
        zeros.assign(m.size(), 0.0);
        noise = zeros;
    }
    stepper.advance(v, noise);
    return SpherePoint(std::move(v));
}

TrajectoryRecord simulate(const SpherePoint& y0, const PayoffMatrix& m, const IntegratorConfig& cfg,
                          const RecordOptions& record, const StepObserver& observer) {
    cfg.validate();
    if (y0.size() != m.size()) throw ContractError("simulate: dimension mismatch between y0 and M");
    const std::size_t n = m.size();
    SphereStepper stepper(m, cfg.dt, cfg.eps, cfg.descent);
    Rng rng(cfg.seed);
    std::vector<double> y(y0.coords().begin(), y0.coords().end());
    std::vector<double> x(n);
    TrajectoryRecord out;
    std::size_t last_recorded = static_cast<std::size_t>(-1);

    auto record_state = [&](std::size_t k) {
        out.steps.push_back(k);
        out.times.push_back(static_cast<double>(k) * cfg.dt);
        out.states.emplace_back(x);
        if (record.keep_sphere_states) out.sphere_states.emplace_back(y);
        last_recorded = k;
    };
    auto update_x = [&] {
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] * y[i];
    };

    update_x();
    std::size_t k = 0;
    bool keep_going = true;
    if (record.stride > 0) record_state(0);
    if (observer) keep_going = observer(0, y, x);
    while (keep_going && k < cfg.max_steps) {
        stepper.advance(y, rng);
        ++k;
        update_x();
        if (record.stride > 0 && k % record.stride == 0) record_state(k);
        if (observer) keep_going = observer(k, y, x);
    }
    if (record.stride > 0 && last_recorded != k) record_state(k);
    return out;
}

FlowResult deterministic_flow(const SpherePoint& y0, const PayoffMatrix& m, double dt, double grad_tol,
                              std::size_t max_steps) {
    if (!(grad_tol > 0.0)) throw ContractError("deterministic_flow: grad_tol must be positive");
    if (y0.size() != m.size()) throw ContractError("deterministic_flow: dimension mismatch");
    const std::size_t n = m.size();
    if (!(dt > 0.0)) throw ContractError("deterministic_flow: dt must be positive");
    std::vector<double> y(y0.coords().begin(), y0.coords().end());
    std::vector<double> g(n), scratch(2 * n);
    const double h = 0.25 * dt;
    std::size_t k = 0;
    double gnorm = kernel::projected_gradient(m, y, g, scratch);
    while (gnorm >= grad_tol && k < max_steps) {
        kernel::retract_along(y, g, h);
        ++k;
        gnorm = kernel::projected_gradient(m, y, g, scratch);
    }
    return FlowResult{SpherePoint(std::move(y)), gnorm < grad_tol, k, gnorm};
}

namespace kernel {

void retract_along(std::span<double> y, std::span<const double> direction, double h) {
    double norm2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] += h * direction[i];
        norm2 += y[i] * y[i];
    }
    const double norm = std::sqrt(norm2);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw NumericError("retract_along: renormalisation denominator is " + std::to_string(norm));
    }
    for (double& v : y) v /= norm;
}

}  // namespace kernel

SimplexPoint to_simplex(const SpherePoint& y) {
    std::vector<double> x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] * y[i];
    return SimplexPoint(std::move(x));
}

SpherePoint sqrt_lift(const SimplexPoint& x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::sqrt(x[i]);
    return SpherePoint(std::move(y));
}

}  // namespace srd
