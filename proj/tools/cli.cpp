#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "srd/errors.hpp"
#include "srd/graph.hpp"
#include "srd/metastability.hpp"
#include "srd/qprocess.hpp"
#include "srd/sde.hpp"
#include "srd/stationary.hpp"

namespace srd::cli {

namespace {

namespace fs = std::filesystem;

enum class Kind { Number, Integer, Bool, String, NumberList, IntegerList, Matrix };

struct KeySpec {
    const char* name;
    Kind kind;
    bool nullable;
    const char* help;
};

// clang-format off
const std::vector<KeySpec> kKeys = {
    {"graph",                 Kind::String,      false, "two-edge | gnp | file | matrix"},
    {"graph_n",               Kind::Integer,     false, "vertices of G(n, p)"},
    {"graph_p",               Kind::Number,      false, "edge probability of G(n, p)"},
    {"graph_seed",            Kind::Integer,     false, "seed of G(n, p)"},
    {"graph_file",            Kind::String,      false, "graph JSON or edge list (graph = file)"},
    {"matrix",                Kind::Matrix,      true,  "inline payoff matrix rows (graph = matrix)"},
    {"matrix_file",           Kind::String,      false, "payoff matrix JSON (graph = matrix)"},
    {"plant_size",            Kind::Integer,     false, "plant a clique on vertices 0..k-1"},
    {"dt",                    Kind::Number,      false, "time step"},
    {"eps",                   Kind::Number,      false, "noise level"},
    {"eps_list",              Kind::NumberList,  false, "noise levels of an exit sweep"},
    {"max_steps",             Kind::Integer,     false, "step budget per run"},
    {"seed",                  Kind::Integer,     true,  "master seed (generated and printed when absent)"},
    {"runs",                  Kind::Integer,     false, "runs per noise level"},
    {"check_stride",          Kind::Integer,     false, "steps between basin checks"},
    {"stride",                Kind::Integer,     false, "steps between recorded states"},
    {"jobs",                  Kind::Integer,     false, "worker threads"},
    {"output",                Kind::String,      false, "output directory"},
    {"start_clique",          Kind::IntegerList, true,  "start at this clique's characteristic vector"},
    {"start_x",               Kind::NumberList,  true,  "start at this simplex point"},
    {"descent",               Kind::Bool,        false, "flip the drift sign"},
    {"flow_dt",               Kind::Number,      false, "time step of the classifying flow"},
    {"tol_snap",              Kind::Number,      false, "L1 radius for matching a clique vector"},
    {"bins",                  Kind::Integer,     false, "angle histogram bins"},
    {"grid_size",             Kind::Integer,     false, "Fokker-Planck grid points"},
    {"exponent_scale",        Kind::Number,      false, "Gibbs exponent scale (2 or 8)"},
    {"start_theta",           Kind::Number,      false, "start angle on the circle"},
    {"interval",              Kind::NumberList,  false, "arc [lo, hi] of the conditioned process"},
    {"qp_grid",               Kind::Integer,     false, "cells of the eigenproblem grid"},
    {"qp_dt",                 Kind::Number,      false, "time step of the conditioned process"},
    {"qp_steps",              Kind::Integer,     false, "steps per conditioned path"},
    {"qp_seeds",              Kind::Integer,     false, "conditioned paths"},
    {"qp_bins",               Kind::Integer,     false, "histogram bins on the arc"},
    {"exit_dt",               Kind::Number,      false, "time step of the exit-time cross-check"},
    {"exit_runs",             Kind::Integer,     false, "runs of the exit-time cross-check"},
    {"saddle_potential",      Kind::Number,      true,  "F on the lowest basin boundary point"},
    {"separatrix_resolution", Kind::Integer,     false, "grid resolution of the separatrix search (n <= 3)"},
    {"max_cliques",           Kind::Integer,     false, "abort clique enumeration beyond this count"},
};
// clang-format on

const std::vector<std::string> kCommands = {"simulate", "exit-sweep", "stationary", "qprocess",
                                            "bounds",   "cliques",    "gen-graph"};

const KeySpec* find_key(std::string_view name) {
    for (const auto& k : kKeys)
        if (name == k.name) return &k;
    return nullptr;
}

bool matches(const Json& v, Kind kind) {
    auto is_int = [](const Json& x) { return x.is_number_integer(); };
    switch (kind) {
        case Kind::Number: return v.is_number();
        case Kind::Integer: return is_int(v);
        case Kind::Bool: return v.is_boolean();
        case Kind::String: return v.is_string();
        case Kind::NumberList: return v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_number(); });
        case Kind::IntegerList: return v.is_array() && std::all_of(v.begin(), v.end(), is_int);
        case Kind::Matrix:
            return v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& row) {
                       return row.is_array() &&
                              std::all_of(row.begin(), row.end(), [](const Json& x) { return x.is_number(); });
                   });
    }
    return false;
}

void check_value(const KeySpec& k, const Json& v) {
    if (v.is_null() && k.nullable) return;
    if (!matches(v, k.kind)) throw ContractError(std::string("config key '") + k.name + "' has the wrong type: " + v.dump());
    if (k.kind == Kind::Integer && v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
        throw ContractError(std::string("config key '") + k.name + "' must be nonnegative");
}

Json parse_flag(const KeySpec& k, const std::string& raw) {
    if (k.kind == Kind::String) return raw;
    const bool list = k.kind == Kind::NumberList || k.kind == Kind::IntegerList;
    try {
        Json v = Json::parse(raw);
        if (list && v.is_number()) v = Json::array({v});
        return v;
    } catch (const Json::parse_error&) {
    }
    if (list) {
        try {
            return Json::parse("[" + raw + "]");
        } catch (const Json::parse_error&) {
        }
    }
    throw ContractError("--" + std::string(k.name) + ": cannot parse '" + raw + "'");
}

template <class T>
T get(const Json& cfg, const char* key) {
    return cfg.at(key).get<T>();
}

double getd(const Json& cfg, const char* key) { return get<double>(cfg, key); }
std::size_t getz(const Json& cfg, const char* key) { return get<std::size_t>(cfg, key); }

struct Problem {
    PayoffMatrix m;
    std::optional<GraphDocument> graph;
};

Problem build_problem(const Json& cfg) {
    const auto kind = get<std::string>(cfg, "graph");
    std::optional<GraphDocument> doc;
    if (kind == "two-edge") {
        doc = GraphDocument{two_edge_graph(), {}};
    } else if (kind == "gnp") {
        doc = GraphDocument{gnp(getz(cfg, "graph_n"), getd(cfg, "graph_p"), get<std::uint64_t>(cfg, "graph_seed")), {}};
    } else if (kind == "file") {
        const auto path = get<std::string>(cfg, "graph_file");
        if (path.empty()) throw ContractError("graph = file needs graph_file");
        doc = load_graph(path);
    } else if (kind == "matrix") {
        if (getz(cfg, "plant_size") != 0) throw ContractError("plant_size needs a graph, not a matrix");
        const auto file = get<std::string>(cfg, "matrix_file");
        if (!file.empty()) return Problem{load_payoff(file), std::nullopt};
        if (cfg.at("matrix").is_null()) throw ContractError("graph = matrix needs matrix or matrix_file");
        return Problem{PayoffMatrix::from_rows(cfg.at("matrix").get<std::vector<std::vector<double>>>()), std::nullopt};
    } else {
        throw ContractError("unknown graph kind '" + kind + "' (expected two-edge, gnp, file or matrix)");
    }
    if (const auto k = getz(cfg, "plant_size"); k > 0) {
        if (k > doc->graph.vertex_count()) throw ContractError("plant_size exceeds the vertex count");
        VertexSet members(k);
        for (Vertex v = 0; v < k; ++v) members[v] = v;
        doc->graph = plant_clique(doc->graph, members);
        doc->planted = members;
    }
    return Problem{payoff_from_graph(doc->graph), std::move(doc)};
}

const GraphDocument& require_graph(const Problem& p, const char* command) {
    if (!p.graph) throw ContractError(std::string(command) + " needs a graph (graph = two-edge, gnp or file)");
    return *p.graph;
}

IntegratorConfig integrator(const Json& cfg) {
    IntegratorConfig ic;
    ic.dt = getd(cfg, "dt");
    ic.eps = getd(cfg, "eps");
    ic.seed = get<std::uint64_t>(cfg, "seed");
    ic.max_steps = getz(cfg, "max_steps");
    ic.descent = get<bool>(cfg, "descent");
    ic.validate();
    return ic;
}

FlowParams flow_params(const Json& cfg) {
    FlowParams f;
    f.dt = getd(cfg, "flow_dt");
    f.tol_snap = getd(cfg, "tol_snap");
    return f;
}

// The start clique: start_clique if given, else the planted clique, else the
// first of the largest maximal cliques.
CliqueVector pick_start(const Json& cfg, const GraphDocument& doc, const std::vector<VertexSet>& cliques) {
    if (!cfg.at("start_clique").is_null()) {
        const auto members = cfg.at("start_clique").get<VertexSet>();
        auto cv = characteristic_vector(doc.graph, members);
        if (std::find(cliques.begin(), cliques.end(), cv.members) == cliques.end())
            throw ContractError("start_clique is not a maximal clique");
        return cv;
    }
    if (!doc.planted.empty() && std::find(cliques.begin(), cliques.end(), doc.planted) != cliques.end())
        return characteristic_vector(doc.planted, doc.graph.vertex_count());
    const VertexSet* best = &cliques.front();
    for (const auto& c : cliques)
        if (c.size() > best->size()) best = &c;
    return characteristic_vector(*best, doc.graph.vertex_count());
}

SimplexPoint start_point(const Json& cfg, const Problem& p) {
    const std::size_t n = p.m.size();
    if (!cfg.at("start_x").is_null()) {
        SimplexPoint x(cfg.at("start_x").get<std::vector<double>>());
        if (x.size() != n) throw ContractError("start_x must have " + std::to_string(n) + " entries");
        return x;
    }
    if (!cfg.at("start_clique").is_null()) {
        const auto members = cfg.at("start_clique").get<VertexSet>();
        if (p.graph) return characteristic_vector(p.graph->graph, members).point;
        return characteristic_vector(members, n).point;
    }
    return SimplexPoint::barycenter(n);
}

std::optional<double> saddle_value(const Json& cfg, const PayoffMatrix& m, const std::vector<CliqueVector>& cliques,
                                   unsigned jobs) {
    if (!cfg.at("saddle_potential").is_null()) return getd(cfg, "saddle_potential");
    if (m.size() > 3) return std::nullopt;
    const auto est = estimate_separatrix_max(m, cliques, getz(cfg, "separatrix_resolution"), flow_params(cfg), jobs);
    if (!est) return std::nullopt;
    return est->value;
}

template <class Writer>
void write_csv(const fs::path& path, Writer&& w) {
    std::ostringstream ss;
    w(ss);
    write_file(path, ss.str());
}

std::string fixed_label(double eps) {
    std::string s = format_real(eps);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

int cmd_simulate(const Json& cfg, std::ostream& out) {
    const fs::path dir = get<std::string>(cfg, "output");
    const auto problem = build_problem(cfg);
    const auto& m = problem.m;
    const auto ic = integrator(cfg);
    const auto x0 = start_point(cfg, problem);

    std::vector<double> squares(m.size());
    double f_min = std::numeric_limits<double>::infinity();
    double f_max = -f_min;
    std::size_t last_step = 0;
    const StepObserver observer = [&](std::size_t k, std::span<const double> y, std::span<const double>) {
        const double f = kernel::sphere_potential(m, y, squares);
        f_min = std::min(f_min, f);
        f_max = std::max(f_max, f);
        last_step = k;
        return true;
    };
    const auto traj = simulate(sqrt_lift(x0), m, ic, RecordOptions{getz(cfg, "stride"), false}, observer);
    write_csv(dir / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, traj); });

    const auto& xf = traj.states.back();
    Json summary{{"steps", last_step},
                 {"time", static_cast<double>(last_step) * ic.dt},
                 {"final_x", std::vector<double>(xf.coords().begin(), xf.coords().end())},
                 {"f_final", potential(m, xf)},
                 {"f_min", f_min},
                 {"f_max", f_max},
                 {"final_label", nullptr}};
    if (problem.graph) {
        const auto cliques = maximal_cliques(problem.graph->graph, getz(cfg, "max_cliques"));
        BasinClassifier classifier(m, clique_vectors(cliques, m.size()), flow_params(cfg));
        const auto label = classifier.classify(xf);
        summary["final_label"] = label.is_clique() ? Json(label.members) : Json(nullptr);
        if (!label.is_clique()) summary["final_label_note"] = label.diagnostic;
        if (!problem.graph->planted.empty()) {
            double mass = 0.0;
            for (Vertex v : problem.graph->planted) mass += xf[v];
            summary["planted"] = problem.graph->planted;
            summary["planted_mass"] = mass;
        }
    }
    write_json(dir / "summary.json", summary);
    out << "simulate: " << last_step << " steps, F(final) = " << format_real(summary["f_final"].get<double>());
    if (summary.contains("planted_mass")) out << ", planted mass = " << format_real(summary["planted_mass"].get<double>());
    out << "\n";
    return kOk;
}

int cmd_exit_sweep(const Json& cfg, std::ostream& out) {
    const fs::path dir = get<std::string>(cfg, "output");
    const auto problem = build_problem(cfg);
    const auto& doc = require_graph(problem, "exit-sweep");
    const auto eps_list = get<std::vector<double>>(cfg, "eps_list");
    if (eps_list.empty()) throw ContractError("eps_list is empty");
    const auto cliques = maximal_cliques(doc.graph, getz(cfg, "max_cliques"));
    const auto vectors = clique_vectors(cliques, problem.m.size());
    const auto start = pick_start(cfg, doc, cliques);
    const auto jobs = get<unsigned>(cfg, "jobs");

    SweepOptions opts;
    opts.check_stride = getz(cfg, "check_stride");
    opts.jobs = jobs;
    opts.flow = flow_params(cfg);
    IntegratorConfig ic = integrator(cfg);
    const auto rows = exit_time_sweep(problem.m, start, vectors, eps_list, getz(cfg, "runs"), ic, opts);

    write_csv(dir / "exit_samples.csv", [&](std::ostream& os) { write_exit_samples_csv(os, rows); });

    const double f_start = potential(problem.m, start.point);
    const auto saddle = saddle_value(cfg, problem.m, vectors, jobs);
    Json report{{"start", label_string(BasinLabel{0, start.members, 0.0, 0, {}})},
                {"f_start", f_start},
                {"saddle_potential", saddle ? Json(*saddle) : Json(nullptr)},
                {"theoretical_rate", nullptr},
                {"rows", Json::array()}};
    if (saddle && f_start >= *saddle) report["theoretical_rate"] = theoretical_exit_rate(f_start, *saddle);

    for (const auto& row : rows) {
        Json r = to_json(row);
        r["ccdf_file"] = nullptr;
        if (row.samples >= 10) {
            const auto stats = ccdf_and_fit(std::span<const ExitTimeSample>(row.exits));
            const std::string name = rows.size() == 1 ? "ccdf.csv" : "ccdf_eps" + fixed_label(row.eps) + ".csv";
            write_csv(dir / name, [&](std::ostream& os) { write_ccdf_csv(os, stats); });
            r["ccdf_file"] = name;
            r["fit"] = to_json(stats);
        }
        report["rows"].push_back(r);
        out << "eps " << format_real(row.eps) << ": " << row.samples << " exits, mean tau "
            << format_real(row.mean_tau) << ", eps^2 log tau " << format_real(row.eps2_log_tau) << "\n";
    }
    write_json(dir / "sweep.json", report);
    return kOk;
}

int cmd_stationary(const Json& cfg, std::ostream& out) {
    const fs::path dir = get<std::string>(cfg, "output");
    const auto problem = build_problem(cfg);
    const auto& m = problem.m;
    if (m.size() != 2) throw UnsupportedError("stationary validation is only available for n = 2");
    const double eps = getd(cfg, "eps");
    const double scale = getd(cfg, "exponent_scale");
    const auto grid = getz(cfg, "grid_size");
    const auto bins = getz(cfg, "bins");
    const auto ic = integrator(cfg);

    const auto oracle = circle_stationary_oracle(m, eps, grid);
    const auto gibbs = circle_gibbs_density(m, eps, grid, scale);
    const double theta0 = getd(cfg, "start_theta");
    const auto hist = sample_angle_histogram(m, ic, SpherePoint::normalized({std::cos(theta0), std::sin(theta0)}), bins);
    const auto pointwise = select_scale_pointwise(m, eps, grid);
    const auto empirical = select_scale_histogram(m, eps, hist, grid);

    auto selection = [](const ScaleSelection& s) {
        return Json{{"scale", s.scale}, {"mismatch_2", s.mismatch_2}, {"mismatch_8", s.mismatch_8}};
    };
    const double tv = tv_distance(hist, oracle);
    Json report{{"eps", eps},
                {"dt", ic.dt},
                {"steps", ic.max_steps},
                {"bins", bins},
                {"grid_size", grid},
                {"exponent_scale", scale},
                {"oracle_flux", oracle.flux},
                {"tv_oracle", tv},
                {"tv_gibbs", tv_distance(hist, gibbs)},
                {"scale_pointwise", selection(pointwise)},
                {"scale_histogram", selection(empirical)},
                {"scales_agree", pointwise.scale == empirical.scale}};
    write_csv(dir / "density.csv", [&](std::ostream& os) { write_density_csv(os, oracle); });
    write_csv(dir / "gibbs.csv", [&](std::ostream& os) { write_density_csv(os, gibbs); });
    write_csv(dir / "histogram.csv", [&](std::ostream& os) { write_histogram_csv(os, hist); });
    write_json(dir / "report.json", report);
    out << "stationary: TV(histogram, oracle) = " << format_real(tv) << ", selected scale "
        << format_real(pointwise.scale) << " (pointwise) / " << format_real(empirical.scale) << " (histogram)\n";
    return kOk;
}

int cmd_qprocess(const Json& cfg, std::ostream& out) {
    const fs::path dir = get<std::string>(cfg, "output");
    const auto problem = build_problem(cfg);
    if (problem.m.size() != 2) throw UnsupportedError("qprocess is only available for n = 2");
    const auto iv = get<std::vector<double>>(cfg, "interval");
    if (iv.size() != 2) throw ContractError("interval must be [lo, hi]");
    const double eps = getd(cfg, "eps");
    const auto red = reduce_to_circle(problem.m, Interval{iv[0], iv[1]}, getz(cfg, "qp_grid"));
    const auto eig = principal_eigenpair(dirichlet_generator(red, eps));

    QProcessValidationConfig vc;
    vc.seed = get<std::uint64_t>(cfg, "seed");
    vc.seeds = getz(cfg, "qp_seeds");
    vc.dt = getd(cfg, "qp_dt");
    vc.steps = getz(cfg, "qp_steps");
    vc.bins = getz(cfg, "qp_bins");
    vc.exponent_scale = getd(cfg, "exponent_scale");
    vc.exit_dt = getd(cfg, "exit_dt");
    vc.exit_runs = getz(cfg, "exit_runs");
    vc.exit_max_steps = getz(cfg, "max_steps");
    vc.jobs = get<unsigned>(cfg, "jobs");
    const auto rep = validate_qprocess(red, eig, eps, vc);

    Json report = to_json(rep);
    report["interval"] = iv;
    report["grid"] = red.cells();
    report["eigen_iterations"] = eig.iterations;
    write_csv(dir / "eigenpair.csv", [&](std::ostream& os) { write_eigenpair_csv(os, red, eig); });
    write_json(dir / "report.json", report);
    out << "qprocess: lambda0 = " << format_real(rep.lambda0) << ", confined = " << (rep.confined ? "yes" : "no")
        << ", TV = " << format_real(rep.tv) << ", mean exit = " << format_real(rep.mean_exit) << " vs 1/lambda0 = "
        << format_real(rep.inverse_lambda0) << (rep.passed() ? "" : "  [CHECK FAILED]") << "\n";
    return kOk;
}

int cmd_bounds(const Json& cfg, std::ostream& out) {
    const fs::path dir = get<std::string>(cfg, "output");
    const auto problem = build_problem(cfg);
    const auto& m = problem.m;
    const int n = static_cast<int>(m.size());
    Json report{{"n", n}, {"bomze_lower_bound", bomze_lower_bound(m)}};
    if (problem.graph) {
        const auto& doc = *problem.graph;
        const auto cliques = maximal_cliques(doc.graph, getz(cfg, "max_cliques"));
        std::size_t kmax = 0;
        for (const auto& c : cliques) kmax = std::max(kmax, c.size());
        const int k = static_cast<int>(kmax);
        report["clique_count"] = cliques.size();
        report["max_clique_size"] = k;
        report["clique_potential"] = clique_potential(k);
        report["exit_bound"] = exit_bound(n, k);
        report["exit_bound_consistent"] = exit_bound_consistent(n, k);

        const auto vectors = clique_vectors(cliques, m.size());
        const auto start = pick_start(cfg, doc, cliques);
        const double f_start = potential(m, start.point);
        Json rate{{"start", label_string(BasinLabel{0, start.members, 0.0, 0, {}})}, {"f_start", f_start}};
        if (const auto saddle = saddle_value(cfg, m, vectors, get<unsigned>(cfg, "jobs"))) {
            rate["saddle_potential"] = *saddle;
            rate["rate"] = theoretical_exit_rate(f_start, *saddle);
        } else {
            rate["saddle_potential"] = nullptr;
            rate["rate"] = nullptr;
        }
        report["theoretical_exit_rate"] = rate;
    }
    if (get<std::string>(cfg, "graph") == "gnp") {
        const int gn = get<int>(cfg, "graph_n");
        const double p = getd(cfg, "graph_p");
        const auto est = gnp_clique_estimate(gn, p);
        report["gnp"] = Json{{"n", gn},           {"p", p},
                             {"log_ratio", est.log_ratio}, {"clique_size_floor", est.floor},
                             {"clique_size_ceil", est.ceil}, {"exit_bound", gnp_exit_bound(gn, p)}};
    }
    write_json(dir / "bounds.json", report);
    out << report.dump(2) << "\n";
    return kOk;
}

int cmd_cliques(const Json& cfg, std::ostream& out) {
    const fs::path dir = get<std::string>(cfg, "output");
    const auto problem = build_problem(cfg);
    const auto& doc = require_graph(problem, "cliques");
    const auto cliques = maximal_cliques(doc.graph, getz(cfg, "max_cliques"));
    std::size_t kmax = 0;
    for (const auto& c : cliques) kmax = std::max(kmax, c.size());
    Json report{{"n", doc.graph.vertex_count()}, {"count", cliques.size()}, {"max_size", kmax}, {"cliques", cliques}};
    write_json(dir / "cliques.json", report);
    out << cliques.size() << " maximal cliques, largest has " << kmax << " vertices\n";
    return kOk;
}

int cmd_gen_graph(const Json& cfg, std::ostream& out) {
    const fs::path dir = get<std::string>(cfg, "output");
    const auto problem = build_problem(cfg);
    const auto& doc = require_graph(problem, "gen-graph");
    write_json(dir / "graph.json", to_json(doc));
    out << "graph: " << doc.graph.vertex_count() << " vertices, " << doc.graph.edge_count() << " edges\n";
    return kOk;
}

int dispatch(const std::string& command, const Json& cfg, std::ostream& out) {
    if (command == "simulate") return cmd_simulate(cfg, out);
    if (command == "exit-sweep") return cmd_exit_sweep(cfg, out);
    if (command == "stationary") return cmd_stationary(cfg, out);
    if (command == "qprocess") return cmd_qprocess(cfg, out);
    if (command == "bounds") return cmd_bounds(cfg, out);
    if (command == "cliques") return cmd_cliques(cfg, out);
    return cmd_gen_graph(cfg, out);
}

std::string flag_name(const char* key) {
    std::string s = key;
    std::replace(s.begin(), s.end(), '_', '-');
    return "--" + s;
}

}  // namespace

Json default_config(std::string_view command) {
    Json d{
        {"graph", "two-edge"},
        {"graph_n", 100},
        {"graph_p", 0.25},
        {"graph_seed", 1},
        {"graph_file", ""},
        {"matrix", nullptr},
        {"matrix_file", ""},
        {"plant_size", 0},
        {"dt", 0.05},
        {"eps", 0.05},
        {"eps_list", {0.1, 0.09, 0.08, 0.07}},
        {"max_steps", 100000},
        {"seed", nullptr},
        {"runs", 200},
        {"check_stride", 100},
        {"stride", 100},
        {"jobs", 1},
        {"output", "out"},
        {"start_clique", nullptr},
        {"start_x", nullptr},
        {"descent", false},
        {"flow_dt", 0.25},
        {"tol_snap", 1e-3},
        {"bins", 64},
        {"grid_size", 2048},
        {"exponent_scale", kDefaultExponentScale},
        {"start_theta", std::numbers::pi / 2},
        {"interval", {std::numbers::pi / 4, 3 * std::numbers::pi / 4}},
        {"qp_grid", 1024},
        {"qp_dt", 5e-4},
        {"qp_steps", 1000000},
        {"qp_seeds", 20},
        {"qp_bins", 20},
        {"exit_dt", 0.005},
        {"exit_runs", 500},
        {"saddle_potential", nullptr},
        {"separatrix_resolution", 400},
        {"max_cliques", 1000000},
    };
    const Json half_identity = {{0.5, 0.0}, {0.0, 0.5}};
    if (command == "exit-sweep") {
        d["max_steps"] = 10000000;
    } else if (command == "stationary") {
        d["graph"] = "matrix";
        d["matrix"] = half_identity;
        d["eps"] = 0.3;
        d["dt"] = 0.01;
        d["max_steps"] = 5000000;
    } else if (command == "qprocess") {
        d["graph"] = "matrix";
        d["matrix"] = half_identity;
        d["eps"] = 0.15;
        d["max_steps"] = 2000000;
    }
    return d;
}

Json resolve_config(std::string_view command, const Json& file, const Json& overrides) {
    Json cfg = default_config(command);
    for (const Json* layer : {&file, &overrides}) {
        if (layer->is_null()) continue;
        if (!layer->is_object()) throw ContractError("config must be a JSON object");
        for (const auto& [key, value] : layer->items()) {
            const auto* spec = find_key(key);
            if (!spec) throw ContractError("unknown config key '" + key + "'");
            check_value(*spec, value);
            cfg[key] = value;
        }
    }
    for (const auto& k : kKeys) check_value(k, cfg.at(k.name));
    return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stochastic replicator dynamics on the sphere: simulation and metastability experiments", "srd"};
    app.require_subcommand(1);
    std::string config_path;
    std::map<std::string, std::string> raw;

    for (const auto& name : kCommands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "flat JSON config file");
        for (const auto& k : kKeys) {
            const std::string key = k.name;
            sub->add_option_function<std::string>(
                flag_name(k.name), [&raw, key](const std::string& v) { raw[key] = v; }, k.help);
        }
    }

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    std::string command;
    for (const auto* sub : app.get_subcommands()) command = sub->get_name();

    try {
        Json file;
        if (!config_path.empty()) file = load_json(config_path);
        Json overrides = Json::object();
        for (const auto& [key, value] : raw) overrides[key] = parse_flag(*find_key(key), value);
        Json cfg = resolve_config(command, file, overrides);
        if (cfg.at("seed").is_null()) {
            std::random_device rd;
            const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
            cfg["seed"] = seed;
            out << "seed: " << seed << " (generated)\n";
        }
        write_json(fs::path(get<std::string>(cfg, "output")) / "config.json", cfg);
        return dispatch(command, cfg, out);
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const CliqueLimitExceeded& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kUsage;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const UnsupportedError& e) {
        err << "unsupported: " << e.what() << "\n";
        return kUsage;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace srd::cli
