#include "srd/qprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "srd/errors.hpp"
#include "srd/parallel.hpp"
#include "srd/rng.hpp"

namespace srd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Solves the tridiagonal system (sub, diag, super) x = rhs in place of rhs.
void thomas(std::span<const double> sub, std::span<const double> diag, std::span<const double> super,
            std::span<double> rhs, std::vector<double>& work) {
    const std::size_t n = diag.size();
    work.resize(n);
    double denom = diag[0];
    if (denom == 0.0) throw NumericError("tridiagonal solve: zero pivot");
    work[0] = super[0] / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - sub[i] * work[i - 1];
        if (denom == 0.0) throw NumericError("tridiagonal solve: zero pivot");
        work[i] = i + 1 < n ? super[i] / denom : 0.0;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= work[i] * rhs[i + 1];
}

struct NegatedOperator {
    std::vector<double> sub, diag, super;
};

NegatedOperator negate(const TridiagonalOperator& op) {
    NegatedOperator out;
    const std::size_t n = op.size();
    out.sub.resize(n);
    out.diag.resize(n);
    out.super.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.sub[i] = i > 0 ? -op.lower[i] : 0.0;
        out.diag[i] = -op.diag[i];
        out.super[i] = i + 1 < n ? -op.upper[i] : 0.0;
    }
    return out;
}

// ∫ of the piecewise-linear interpolant of `values` over [lo, hi].
double integrate_linear(const CircleReduction& red, std::span<const double> values, double lo, double hi) {
    const double a = red.interval.lo;
    const double h = red.spacing();
    const std::size_t n = red.cells();
    auto cumulative = [&](double t) {
        const double s = std::clamp((t - a) / h, 0.0, static_cast<double>(n));
        auto j = static_cast<std::size_t>(s);
        if (j >= n) j = n - 1;
        double acc = 0.0;
        for (std::size_t k = 0; k < j; ++k) acc += 0.5 * h * (values[k] + values[k + 1]);
        const double w = s - static_cast<double>(j);
        const double vt = values[j] + w * (values[j + 1] - values[j]);
        return acc + 0.5 * w * h * (values[j] + vt);
    };
    return cumulative(hi) - cumulative(lo);
}

}  // namespace

CircleReduction reduce_to_circle(const PayoffMatrix& m, Interval interval, std::size_t grid_size) {
    if (m.size() != 2) throw UnsupportedError("reduce_to_circle: only n = 2 is supported");
    if (grid_size < 64) throw ContractError("reduce_to_circle: grid_size must be at least 64");
    if (!std::isfinite(interval.lo) || !std::isfinite(interval.hi) || !(interval.lo < interval.hi) ||
        interval.lo < 0.0 || interval.hi > kTwoPi) {
        throw ContractError("reduce_to_circle: need 0 <= lo < hi <= 2*pi");
    }
    CircleReduction red{m, interval, {}, {}, {}};
    const double h = interval.length() / static_cast<double>(grid_size);
    red.grid.resize(grid_size + 1);
    red.f_tilde.resize(grid_size + 1);
    red.drift.resize(grid_size + 1);
    for (std::size_t j = 0; j <= grid_size; ++j) {
        const double t = j == grid_size ? interval.hi : interval.lo + static_cast<double>(j) * h;
        red.grid[j] = t;
        red.f_tilde[j] = circle_potential(m, t);
        red.drift[j] = 0.25 * circle_potential_derivative(m, t);
    }
    return red;
}

void TridiagonalOperator::apply(std::span<const double> v, std::span<double> out) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * v[i];
        if (i > 0) s += lower[i] * v[i - 1];
        if (i + 1 < n) s += upper[i] * v[i + 1];
        out[i] = s;
    }
}

TridiagonalOperator dirichlet_generator(const CircleReduction& red, double eps) {
    if (!(eps > 0.0)) throw ContractError("dirichlet_generator: eps must be positive");
    if (red.grid.size() < 18) throw ContractError("dirichlet_generator: need at least 16 interior nodes");
    const std::size_t n = red.cells() - 1;
    const double h = red.spacing();
    const double diff = 0.5 * eps * eps / (h * h);
    TridiagonalOperator op;
    op.lower.resize(n);
    op.diag.resize(n);
    op.upper.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double b = red.drift[i + 1] / (2.0 * h);
        op.lower[i] = diff - b;
        op.diag[i] = -2.0 * diff;
        op.upper[i] = diff + b;
    }
    return op;
}

EigenPair principal_eigenpair(const TridiagonalOperator& op, double tol, std::size_t max_iterations) {
    const std::size_t n = op.size();
    if (n < 16) throw ContractError("principal_eigenpair: need at least 16 interior nodes");
    if (!(tol > 0.0)) throw ContractError("principal_eigenpair: tol must be positive");
    const auto neg = negate(op);
    std::vector<double> phi(n, 1.0), w(n), lphi(n), work;
    EigenPair out;
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        w = phi;
        thomas(neg.sub, neg.diag, neg.super, w, work);
        const double wmax = *std::max_element(w.begin(), w.end());
        if (!(wmax > 0.0) || !std::isfinite(wmax)) throw NumericError("principal_eigenpair: iteration broke down");
        for (std::size_t i = 0; i < n; ++i) phi[i] = w[i] / wmax;

        // λ from the Rayleigh quotient of -L, then the residual.
        op.apply(phi, lphi);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num -= phi[i] * lphi[i];
            den += phi[i] * phi[i];
        }
        const double lambda = num / den;
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(-lphi[i] - lambda * phi[i]));
        res /= std::abs(lambda);
        if (res < tol) {
            if (!(lambda > 0.0)) throw NumericError("principal_eigenpair: nonpositive principal eigenvalue");
            out.lambda0 = lambda;
            out.residual = res;
            out.iterations = it;
            out.phi.assign(n + 2, 0.0);
            const double pmax = *std::max_element(phi.begin(), phi.end());
            for (std::size_t i = 0; i < n; ++i) out.phi[i + 1] = phi[i] / pmax;
            return out;
        }
    }
    throw NumericError("principal_eigenpair: no convergence after " + std::to_string(max_iterations) + " iterations");
}

std::vector<double> expected_exit_time(const CircleReduction& red, double eps) {
    const auto op = dirichlet_generator(red, eps);
    const auto neg = negate(op);
    std::vector<double> rhs(op.size(), 1.0), work;
    thomas(neg.sub, neg.diag, neg.super, rhs, work);
    std::vector<double> u(op.size() + 2, 0.0);
    std::copy(rhs.begin(), rhs.end(), u.begin() + 1);
    return u;
}

double interpolate(const CircleReduction& red, std::span<const double> values, double theta) {
    if (values.size() != red.grid.size()) throw ContractError("interpolate: value count differs from the grid");
    const double s = std::clamp((theta - red.interval.lo) / red.spacing(), 0.0, static_cast<double>(red.cells()));
    auto j = static_cast<std::size_t>(s);
    if (j >= red.cells()) j = red.cells() - 1;
    const double w = s - static_cast<double>(j);
    return (1.0 - w) * values[j] + w * values[j + 1];
}

QProcessDrift::QProcessDrift(const CircleReduction& red, const EigenPair& eig, double eps)
    : red_(&red), eps2_(eps * eps) {
    if (!(eps > 0.0)) throw ContractError("qprocess_drift: eps must be positive");
    if (eig.phi.size() != red.grid.size()) throw ContractError("qprocess_drift: eigenvector does not match the grid");
    const std::size_t n = red.cells();
    const double a = red.interval.lo, b = red.interval.hi, h = red.spacing();
    std::vector<double> log_g(n + 1, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        const double t = red.grid[j];
        if (!(eig.phi[j] > 0.0)) throw NumericError("qprocess_drift: eigenvector is not positive inside");
        log_g[j] = std::log(eig.phi[j]) - std::log(t - a) - std::log(b - t);
    }
    dlog_g_.assign(n + 1, 0.0);
    for (std::size_t j = 2; j + 1 < n; ++j) dlog_g_[j] = (log_g[j + 1] - log_g[j - 1]) / (2.0 * h);
    dlog_g_[1] = (-3.0 * log_g[1] + 4.0 * log_g[2] - log_g[3]) / (2.0 * h);
    dlog_g_[n - 1] = (3.0 * log_g[n - 1] - 4.0 * log_g[n - 2] + log_g[n - 3]) / (2.0 * h);
    dlog_g_[0] = dlog_g_[1];
    dlog_g_[n] = dlog_g_[n - 1];
}

double QProcessDrift::correction(double theta) const {
    const auto& red = *red_;
    const double a = red.interval.lo, b = red.interval.hi;
    const double h = red.spacing();
    const std::size_t n = red.cells();
    double s = (theta - a) / h;
    double smooth;
    if (s <= 1.0) {
        smooth = dlog_g_[1];
    } else if (s >= static_cast<double>(n - 1)) {
        smooth = dlog_g_[n - 1];
    } else {
        auto j = static_cast<std::size_t>(s);
        const double w = s - static_cast<double>(j);
        smooth = (1.0 - w) * dlog_g_[j] + w * dlog_g_[j + 1];
    }
    return eps2_ * (smooth + 1.0 / (theta - a) - 1.0 / (b - theta));
}

double QProcessDrift::unchecked(double theta) const {
    return 0.25 * circle_potential_derivative(red_->m, theta) + correction(theta);
}

double QProcessDrift::operator()(double theta) const {
    if (!red_->interval.contains_open(theta))
        throw ContractError("qprocess_drift: theta must lie strictly inside the interval");
    return unchecked(theta);
}

double qprocess_drift(const CircleReduction& red, const EigenPair& eig, double eps, double theta) {
    return QProcessDrift(red, eig, eps)(theta);
}

std::vector<double> qprocess_density(const CircleReduction& red, const EigenPair& eig, double eps,
                                     double exponent_scale) {
    if (!(eps > 0.0)) throw ContractError("qprocess_density: eps must be positive");
    if (exponent_scale != 2.0 && exponent_scale != 8.0)
        throw ContractError("qprocess_density: exponent_scale must be 2 or 8");
    if (eig.phi.size() != red.grid.size()) throw ContractError("qprocess_density: eigenvector does not match the grid");
    const double fmax = *std::max_element(red.f_tilde.begin(), red.f_tilde.end());
    std::vector<double> q(red.grid.size());
    for (std::size_t j = 0; j < q.size(); ++j)
        q[j] = eig.phi[j] * eig.phi[j] * std::exp((red.f_tilde[j] - fmax) / (exponent_scale * eps * eps));
    const double z = integrate_linear(red, q, red.interval.lo, red.interval.hi);
    for (double& v : q) v /= z;
    return q;
}

std::vector<ArcExitSample> arc_exit_times(const PayoffMatrix& m, Interval interval, double theta0,
                                          const IntegratorConfig& cfg, std::size_t runs, unsigned jobs) {
    if (m.size() != 2) throw UnsupportedError("arc_exit_times: only n = 2 is supported");
    cfg.validate();
    if (!interval.contains_open(theta0)) throw ContractError("arc_exit_times: start must lie inside the interval");
    std::vector<ArcExitSample> out(runs);
    parallel_for(runs, jobs, [&](std::size_t r) {
        ArcExitSample& s = out[r];
        s.run = r;
        s.seed = derive_seed(cfg.seed, r);
        SphereStepper stepper(m, cfg.dt, cfg.eps, cfg.descent);
        Rng rng(s.seed);
        double y[2] = {std::cos(theta0), std::sin(theta0)};
        for (std::size_t k = 1; k <= cfg.max_steps; ++k) {
            stepper.advance(y, rng);
            if (!interval.contains_open(circle_angle(y[0], y[1]))) {
                s.steps = k;
                s.tau = static_cast<double>(k) * cfg.dt;
                return;
            }
        }
        s.steps = cfg.max_steps;
        s.tau = static_cast<double>(cfg.max_steps) * cfg.dt;
        s.censored = true;
    });
    return out;
}

ArcExitSummary summarize(std::span<const ArcExitSample> samples) {
    ArcExitSummary s;
    double sum = 0.0, sum2 = 0.0;
    for (const auto& e : samples) {
        if (e.censored) {
            ++s.censored;
            continue;
        }
        ++s.samples;
        sum += e.tau;
        sum2 += e.tau * e.tau;
    }
    if (s.samples == 0) {
        s.mean = std::numeric_limits<double>::quiet_NaN();
        s.std_error = s.mean;
        return s;
    }
    const double k = static_cast<double>(s.samples);
    s.mean = sum / k;
    s.std_error = s.samples > 1 ? std::sqrt(std::max(0.0, (sum2 - k * s.mean * s.mean) / (k - 1.0)) / k) : 0.0;
    return s;
}

QProcessReport validate_qprocess(const CircleReduction& red, const EigenPair& eig, double eps,
                                 const QProcessValidationConfig& cfg) {
    if (!(eps > 0.0)) throw ContractError("validate_qprocess: eps must be positive");
    if (cfg.seeds == 0 || cfg.steps == 0 || cfg.bins == 0 || !(cfg.dt > 0.0))
        throw ContractError("validate_qprocess: seeds, steps, bins and dt must be positive");

    QProcessReport rep;
    rep.eps = eps;
    rep.lambda0 = eig.lambda0;
    rep.residual = eig.residual;
    rep.seeds = cfg.seeds;
    rep.steps = cfg.steps;
    const auto peak = std::max_element(eig.phi.begin(), eig.phi.end()) - eig.phi.begin();
    rep.theta_start = red.grid[static_cast<std::size_t>(peak)];

    const QProcessDrift drift(red, eig, eps);
    const double a = red.interval.lo, b = red.interval.hi, len = red.interval.length();
    const double noise = eps * std::sqrt(cfg.dt);
    const std::size_t bins = cfg.bins;

    struct SeedResult {
        std::vector<std::size_t> counts;
        bool exited = false;
        double min_distance = 0.0;
    };
    std::vector<SeedResult> results(cfg.seeds);
    parallel_for(cfg.seeds, cfg.jobs, [&](std::size_t s) {
        SeedResult& res = results[s];
        res.counts.assign(bins, 0);
        Rng rng(derive_seed(cfg.seed, s));
        double t = rep.theta_start;
        double closest = std::min(t - a, b - t);
        for (std::size_t k = 0; k < cfg.steps; ++k) {
            t += drift.unchecked(t) * cfg.dt + noise * rng.normal();
            if (!(t > a && t < b)) {
                res.exited = true;
                closest = 0.0;
                break;
            }
            closest = std::min(closest, std::min(t - a, b - t));
            auto i = static_cast<std::size_t>((t - a) / len * static_cast<double>(bins));
            if (i >= bins) i = bins - 1;
            ++res.counts[i];
        }
        res.min_distance = closest;
    });

    std::vector<std::size_t> counts(bins, 0);
    std::size_t total = 0;
    rep.min_boundary_distance = len;
    for (const auto& r : results) {
        if (r.exited) ++rep.exited_seeds;
        rep.min_boundary_distance = std::min(rep.min_boundary_distance, r.min_distance);
        for (std::size_t i = 0; i < bins; ++i) {
            counts[i] += r.counts[i];
            total += r.counts[i];
        }
    }
    rep.confined = rep.exited_seeds == 0;
    if (!rep.confined)
        rep.failures.push_back(std::to_string(rep.exited_seeds) + " of " + std::to_string(cfg.seeds) +
                               " conditioned paths left the interval");

    const auto q = qprocess_density(red, eig, eps, cfg.exponent_scale);
    rep.histogram.resize(bins);
    rep.predicted.resize(bins);
    double tv = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        const double lo = a + len * static_cast<double>(i) / static_cast<double>(bins);
        const double hi = i + 1 == bins ? b : a + len * static_cast<double>(i + 1) / static_cast<double>(bins);
        rep.predicted[i] = integrate_linear(red, q, lo, hi);
        rep.histogram[i] = total ? static_cast<double>(counts[i]) / static_cast<double>(total) : 0.0;
        tv += std::abs(rep.histogram[i] - rep.predicted[i]);
    }
    rep.tv = 0.5 * tv;
    rep.density_ok = total > 0 && rep.tv < cfg.tv_tolerance;
    if (!rep.density_ok)
        rep.failures.push_back("total variation " + std::to_string(rep.tv) + " is not below " +
                               std::to_string(cfg.tv_tolerance));

    IntegratorConfig exit_cfg;
    exit_cfg.dt = cfg.exit_dt;
    exit_cfg.eps = eps;
    exit_cfg.seed = derive_seed(cfg.seed, cfg.seeds);
    exit_cfg.max_steps = cfg.exit_max_steps;
    const auto exits = arc_exit_times(red.m, red.interval, rep.theta_start, exit_cfg, cfg.exit_runs, cfg.jobs);
    const auto summary = summarize(exits);
    rep.mean_exit = summary.mean;
    rep.mean_exit_std_error = summary.std_error;
    rep.exit_censored = summary.censored;
    rep.inverse_lambda0 = 1.0 / eig.lambda0;
    rep.exit_relative_error = std::abs(rep.mean_exit - rep.inverse_lambda0) / rep.inverse_lambda0;
    rep.exit_ok = summary.samples > 0 && summary.censored == 0 && rep.exit_relative_error < cfg.exit_tolerance;
    if (!rep.exit_ok)
        rep.failures.push_back("mean exit time " + std::to_string(rep.mean_exit) + " vs 1/lambda0 " +
                               std::to_string(rep.inverse_lambda0) + " (" + std::to_string(summary.censored) +
                               " censored)");
    return rep;
}

}  // namespace srd
