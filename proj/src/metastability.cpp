#include "srd/metastability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "srd/errors.hpp"
#include "srd/parallel.hpp"

namespace srd {

namespace {

constexpr std::size_t kCaptureInterval = 4;
constexpr std::size_t kNoLabel = static_cast<std::size_t>(-1);

}  // namespace

std::string label_string(const BasinLabel& label) {
    if (!label.is_clique()) return "none";
    std::string s;
    for (std::size_t i = 0; i < label.members.size(); ++i) {
        if (i) s += '-';
        s += std::to_string(label.members[i]);
    }
    return s;
}

BasinClassifier::BasinClassifier(const PayoffMatrix& m, std::vector<CliqueVector> cliques, FlowParams params)
    : m_(&m), cliques_(std::move(cliques)), params_(params) {
    if (cliques_.empty()) throw ContractError("BasinClassifier: clique list is empty");
    for (const auto& c : cliques_)
        if (c.dimension() != m.size()) throw ContractError("BasinClassifier: clique dimension differs from M");
    if (!(params_.dt > 0.0) || !(params_.grad_tol > 0.0) || !(params_.tol_snap > 0.0))
        throw ContractError("BasinClassifier: flow dt, grad_tol and tol_snap must be positive");
    const std::size_t n = m.size();
    y_.resize(n);
    grad_.resize(n);
    scratch_.resize(2 * n);
    x_.resize(n);
}

std::pair<std::size_t, double> BasinClassifier::nearest(std::span<const double> x) const {
    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cliques_.size(); ++c) {
        const auto& members = cliques_[c].members;
        const double mass = 1.0 / static_cast<double>(members.size());
        // ‖x - x_C‖₁ = Σ_{i∉C} xᵢ + Σ_{i∈C} |xᵢ - 1/|C||
        double d = total;
        for (Vertex v : members) d += std::abs(x[v] - mass) - x[v];
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    // The shortcut above cancels; redo the winner term by term.
    const auto& members = cliques_[best].members;
    const double mass = 1.0 / static_cast<double>(members.size());
    double exact = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool in = k < members.size() && members[k] == i;
        exact += in ? std::abs(x[i] - mass) : x[i];
        if (in) ++k;
    }
    return {best, exact};
}

BasinLabel BasinClassifier::make_label(std::size_t index, double distance, std::size_t steps) const {
    BasinLabel label;
    label.clique = index;
    label.members = cliques_[index].members;
    label.snap_distance = distance;
    label.flow_steps = steps;
    return label;
}

BasinLabel BasinClassifier::classify(const SimplexPoint& x) {
    if (x.size() != m_->size()) throw ContractError("classify_basin: dimension mismatch");
    return classify(x.coords());
}

BasinLabel BasinClassifier::classify(std::span<const double> x) {
    const std::size_t n = m_->size();
    for (std::size_t i = 0; i < n; ++i) y_[i] = std::sqrt(std::max(x[i], 0.0));
    const double h = 0.25 * params_.dt;
    auto squares = [&] {
        for (std::size_t i = 0; i < n; ++i) x_[i] = y_[i] * y_[i];
    };
    for (std::size_t steps = 0;; ++steps) {
        const double gnorm = kernel::projected_gradient(*m_, y_, grad_, scratch_);
        const bool converged = gnorm < params_.grad_tol;
        if (converged || (params_.early_capture && steps % kCaptureInterval == 0)) {
            // At step 0 measure the input itself; √x squared is not always x.
            if (steps == 0)
                std::copy(x.begin(), x.end(), x_.begin());
            else
                squares();
            const auto [idx, d] = nearest(x_);
            if (d < params_.tol_snap) return make_label(idx, d, steps);
            if (converged) {
                BasinLabel label;
                label.snap_distance = d;
                label.flow_steps = steps;
                label.diagnostic = "flow converged to an equilibrium that is not a listed clique";
                return label;
            }
        }
        if (steps >= params_.max_steps) {
            squares();
            BasinLabel label;
            label.snap_distance = nearest(x_).second;
            label.flow_steps = steps;
            label.diagnostic = "flow did not converge within " + std::to_string(params_.max_steps) + " steps";
            return label;
        }
        kernel::retract_along(y_, grad_, h);
    }
}

BasinLabel classify_basin(const SimplexPoint& x, const PayoffMatrix& m, std::span<const CliqueVector> cliques,
                          const FlowParams& flow) {
    BasinClassifier classifier(m, std::vector<CliqueVector>(cliques.begin(), cliques.end()), flow);
    return classifier.classify(x);
}

std::vector<CliqueVector> clique_vectors(const std::vector<VertexSet>& cliques, std::size_t n) {
    std::vector<CliqueVector> out;
    out.reserve(cliques.size());
    for (const auto& c : cliques) out.push_back(characteristic_vector(c, n));
    return out;
}

ExitTimeSample measure_exit_time(const PayoffMatrix& m, const CliqueVector& start,
                                 const std::vector<CliqueVector>& cliques, const IntegratorConfig& cfg,
                                 std::size_t check_stride, const FlowParams& flow) {
    cfg.validate();
    if (check_stride == 0) throw ContractError("measure_exit_time: check_stride must be positive");
    if (start.dimension() != m.size()) throw ContractError("measure_exit_time: start dimension differs from M");
    BasinClassifier classifier(m, cliques, flow);

    ExitTimeSample sample;
    sample.seed = cfg.seed;
    sample.eps = cfg.eps;
    sample.start_label = classifier.classify(start.point);
    if (sample.start_label.members != start.members) {
        throw ContractError("measure_exit_time: start vector is not an equilibrium of its own basin (classified as " +
                            label_string(sample.start_label) + ")");
    }

    const std::size_t n = m.size();
    std::vector<double> y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = std::sqrt(start.point[i]);
    SphereStepper stepper(m, cfg.dt, cfg.eps, cfg.descent);
    Rng rng(cfg.seed);
    for (std::size_t k = 1; k <= cfg.max_steps; ++k) {
        stepper.advance(y, rng);
        if (k % check_stride != 0) continue;
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] * y[i];
        BasinLabel label = classifier.classify(x);
        if (label != sample.start_label) {
            sample.steps = k;
            sample.tau = static_cast<double>(k) * cfg.dt;
            sample.end_label = std::move(label);
            return sample;
        }
    }
    sample.censored = true;
    sample.steps = cfg.max_steps;
    sample.tau = static_cast<double>(cfg.max_steps) * cfg.dt;
    sample.end_label = sample.start_label;
    return sample;
}

std::vector<SweepRow> exit_time_sweep(const PayoffMatrix& m, const CliqueVector& start,
                                      const std::vector<CliqueVector>& cliques, std::span<const double> eps_list,
                                      std::size_t runs, const IntegratorConfig& cfg, const SweepOptions& opts) {
    if (runs == 0) throw ContractError("exit_time_sweep: runs must be at least 1");
    if (eps_list.empty()) throw ContractError("exit_time_sweep: eps list is empty");
    std::vector<SweepRow> rows;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        SweepRow row;
        row.eps = eps_list[e];
        row.runs = runs;
        row.exits.resize(runs);
        const std::uint64_t eps_seed = derive_seed(cfg.seed, e);
        parallel_for(runs, opts.jobs, [&](std::size_t r) {
            IntegratorConfig run_cfg = cfg;
            run_cfg.eps = row.eps;
            run_cfg.seed = derive_seed(eps_seed, r);
            ExitTimeSample s = measure_exit_time(m, start, cliques, run_cfg, opts.check_stride, opts.flow);
            s.run = r;
            row.exits[r] = std::move(s);
        });
        double sum = 0.0, sum2 = 0.0;
        for (const auto& s : row.exits) {
            if (s.censored) {
                ++row.censored;
                continue;
            }
            ++row.samples;
            sum += s.tau;
            sum2 += s.tau * s.tau;
        }
        row.flagged = row.samples == 0;
        if (!row.flagged) {
            const double k = static_cast<double>(row.samples);
            row.mean_tau = sum / k;
            row.eps2_log_tau = row.eps * row.eps * std::log(row.mean_tau);
            if (row.samples > 1) {
                const double var = std::max(0.0, (sum2 - k * row.mean_tau * row.mean_tau) / (k - 1.0));
                row.std_error = std::sqrt(var / k);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

double theoretical_exit_rate(double f_star, double f_saddle) {
    if (!(f_star >= f_saddle)) throw ContractError("theoretical_exit_rate: negative barrier (F* < F_saddle)");
    return 0.5 * (f_star - f_saddle);
}

std::optional<SeparatrixEstimate> estimate_separatrix_max(const PayoffMatrix& m,
                                                          const std::vector<CliqueVector>& cliques,
                                                          std::size_t resolution, const FlowParams& flow,
                                                          unsigned jobs) {
    const std::size_t n = m.size();
    if (n > 3) throw UnsupportedError("estimate_separatrix_max: only n <= 3 is supported");
    if (resolution < 2) throw ContractError("estimate_separatrix_max: resolution must be at least 2");
    const std::size_t r = resolution;
    const double inv = 1.0 / static_cast<double>(r);

    // Nodes (i, j) with i + j <= r; for n = 2 only j = r - i is used.
    auto node_x = [&](std::size_t i, std::size_t j) {
        if (n == 2) return std::vector<double>{static_cast<double>(i) * inv, static_cast<double>(r - i) * inv};
        return std::vector<double>{static_cast<double>(i) * inv, static_cast<double>(j) * inv,
                                   static_cast<double>(r - i - j) * inv};
    };
    const std::size_t rows = r + 1;
    std::vector<std::vector<std::size_t>> labels(rows);
    parallel_for(rows, jobs, [&](std::size_t i) {
        BasinClassifier classifier(m, cliques, flow);
        const std::size_t width = n == 2 ? 1 : r - i + 1;
        labels[i].resize(width);
        for (std::size_t j = 0; j < width; ++j) {
            const auto x = node_x(i, n == 2 ? r - i : j);
            const auto label = classifier.classify(std::span<const double>(x));
            labels[i][j] = label.clique.value_or(kNoLabel);
        }
    });

    // Faces of the simplex are invariant under the flow and settle on
    // equilibria of the face, so only interior nodes take part.
    const long lr = static_cast<long>(r);
    auto interior = [&](long i, long j) {
        if (n == 2) return i > 0 && i < lr;
        return i > 0 && j > 0 && i + j < lr;
    };
    auto label_at = [&](long i, long j) -> std::optional<std::size_t> {
        if (!interior(i, j)) return std::nullopt;
        return labels[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    };

    std::optional<SeparatrixEstimate> best;
    std::vector<double> mx(n);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < labels[i].size(); ++j) {
            const long li = static_cast<long>(i), lj = static_cast<long>(j);
            if (!interior(li, lj)) continue;
            const auto own = labels[i][j];
            bool boundary = false;
            if (n == 2) {
                for (long di : {-1L, 1L}) {
                    const auto nb = label_at(li + di, 0);
                    if (nb && *nb != own) boundary = true;
                }
            } else {
                constexpr long moves[6][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}};
                for (const auto& mv : moves) {
                    const auto nb = label_at(li + mv[0], lj + mv[1]);
                    if (nb && *nb != own) boundary = true;
                }
            }
            if (!boundary) continue;
            SimplexPoint x(node_x(i, n == 2 ? r - i : j));
            const double f = potential(m, x);
            if (!best || f > best->value) best = SeparatrixEstimate{f, std::move(x)};
        }
    }
    return best;
}

ExitStats ccdf_and_fit(std::span<const double> taus) {
    if (taus.size() < 10) throw ContractError("ccdf_and_fit: need at least 10 uncensored samples");
    ExitStats st;
    st.samples.assign(taus.begin(), taus.end());
    std::sort(st.samples.begin(), st.samples.end());
    const double n = static_cast<double>(st.samples.size());
    st.mean = std::accumulate(st.samples.begin(), st.samples.end(), 0.0) / n;
    st.rate = st.mean > 0.0 ? 1.0 / st.mean : std::numeric_limits<double>::infinity();

    st.ccdf.emplace_back(0.0, 1.0);
    for (std::size_t i = 0; i < st.samples.size();) {
        std::size_t j = i;
        while (j < st.samples.size() && st.samples[j] == st.samples[i]) ++j;
        st.ccdf.emplace_back(st.samples[i], static_cast<double>(st.samples.size() - j) / n);
        i = j;
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    std::size_t k = 0;
    for (std::size_t p = 1; p < st.ccdf.size(); ++p) {
        const auto [t, c] = st.ccdf[p];
        if (c <= 0.0) continue;
        const double ly = std::log(c);
        sx += t;
        sy += ly;
        sxx += t * t;
        sxy += t * ly;
        syy += ly * ly;
        ++k;
    }
    const double kk = static_cast<double>(k);
    const double vx = k ? sxx - sx * sx / kk : 0.0;
    const double vy = k ? syy - sy * sy / kk : 0.0;
    if (k < 2 || !(vx > 0.0)) {
        st.degenerate = true;
        st.r2_loglinear = 0.0;
        return st;
    }
    const double cxy = sxy - sx * sy / kk;
    st.slope = cxy / vx;
    st.intercept = (sy - st.slope * sx) / kk;
    st.r2_loglinear = vy > 0.0 ? std::clamp(cxy * cxy / (vx * vy), 0.0, 1.0) : 1.0;
    return st;
}

ExitStats ccdf_and_fit(std::span<const ExitTimeSample> samples) {
    std::vector<double> taus;
    for (const auto& s : samples)
        if (!s.censored) taus.push_back(s.tau);
    return ccdf_and_fit(taus);
}

}  // namespace srd
