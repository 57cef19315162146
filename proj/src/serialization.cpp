#include "srd/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace srd {

namespace {

std::string csv_label(const BasinLabel& l) { return label_string(l); }

}  // namespace

namespace {

std::string parse_message(const std::string& detail, std::size_t line, const std::string& source) {
    std::string where = source;
    if (line) where += (where.empty() ? "line " : ":") + std::to_string(line);
    return where.empty() ? detail : where + ": " + detail;
}

}  // namespace

ParseError::ParseError(const std::string& detail, std::size_t line, const std::string& source)
    : ContractError(parse_message(detail, line, source)), line_(line), detail_(detail) {}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    // Shortest form that round-trips, i.e. at most 17 significant digits.
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Json to_json(const PayoffMatrix& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto r = m.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return Json{{"n", m.size()}, {"entries", rows}};
}

PayoffMatrix payoff_from_json(const Json& j) {
    try {
        const auto n = j.at("n").get<std::size_t>();
        const auto& e = j.at("entries");
        std::vector<double> flat;
        if (!e.empty() && e.front().is_array()) {
            if (e.size() != n) throw ParseError("matrix: expected " + std::to_string(n) + " rows");
            for (const auto& row : e) {
                if (row.size() != n) throw ParseError("matrix: every row needs " + std::to_string(n) + " entries");
                for (const auto& v : row) flat.push_back(v.get<double>());
            }
        } else {
            flat = e.get<std::vector<double>>();
        }
        return PayoffMatrix(n, std::move(flat));
    } catch (const Json::exception& ex) {
        throw ParseError(std::string("matrix: ") + ex.what());
    }
}

Json to_json(const GraphDocument& doc) {
    Json edges = Json::array();
    for (const auto& [i, j] : doc.graph.edges()) edges.push_back({i, j});
    Json out{{"n", doc.graph.vertex_count()}, {"edges", edges}};
    if (!doc.planted.empty()) out["planted"] = doc.planted;
    return out;
}

GraphDocument graph_from_json(const Json& j) {
    try {
        const auto n = j.at("n").get<std::size_t>();
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw ParseError("graph: every edge must be a pair [i, j]");
            edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
        }
        GraphDocument doc{Graph(n, std::move(edges)), {}};
        if (j.contains("planted")) {
            doc.planted = j.at("planted").get<VertexSet>();
            std::sort(doc.planted.begin(), doc.planted.end());
        }
        return doc;
    } catch (const Json::exception& ex) {
        throw ParseError(std::string("graph: ") + ex.what());
    }
}

Graph read_edge_list(std::istream& in, std::size_t min_vertices) {
    std::vector<Edge> edges;
    std::size_t n = min_vertices;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string a, b, extra;
        if (!(ss >> a)) continue;
        if (!(ss >> b) || (ss >> extra)) throw ParseError("expected two vertex indices", lineno);
        auto parse = [&](const std::string& s) {
            std::size_t v = 0;
            const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
            if (r.ec != std::errc() || r.ptr != s.data() + s.size())
                throw ParseError("'" + s + "' is not a vertex index", lineno);
            return v;
        };
        const std::size_t i = parse(a), j = parse(b);
        n = std::max(n, std::max(i, j) + 1);
        edges.emplace_back(i, j);
    }
    if (n == 0) throw ParseError("edge list defines no vertices");
    try {
        return Graph(n, std::move(edges));
    } catch (const ContractError& ex) {
        throw ParseError(ex.what());
    }
}

Json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
}

GraphDocument load_graph(const std::filesystem::path& path) {
    if (path.extension() == ".json") return graph_from_json(load_json(path));
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return GraphDocument{read_edge_list(in), {}};
    } catch (const ParseError& ex) {
        throw ParseError(ex.detail(), ex.line(), path.string());
    }
}

PayoffMatrix load_payoff(const std::filesystem::path& path) { return payoff_from_json(load_json(path)); }

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& traj) {
    const std::size_t n = traj.size() ? traj.states.front().size() : 0;
    out << 't';
    for (std::size_t i = 1; i <= n; ++i) out << ",x_" << i;
    out << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << format_real(traj.times[k]);
        for (std::size_t i = 0; i < n; ++i) out << ',' << format_real(traj.states[k][i]);
        out << '\n';
    }
}

void write_exit_samples_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "run,seed,eps,tau,steps,start,end,censored\n";
    for (const auto& row : rows) {
        for (const auto& s : row.exits) {
            out << s.run << ',' << s.seed << ',' << format_real(s.eps) << ',' << format_real(s.tau) << ','
                << s.steps << ',' << csv_label(s.start_label) << ',' << csv_label(s.end_label) << ','
                << (s.censored ? 1 : 0) << '\n';
        }
    }
}

Json to_json(const SweepRow& row) {
    auto real = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    return Json{{"eps", row.eps},           {"runs", row.runs},
                {"samples", row.samples},   {"censored", row.censored},
                {"flagged", row.flagged},   {"mean_tau", real(row.mean_tau)},
                {"std_error", real(row.std_error)}, {"eps2_log_tau", real(row.eps2_log_tau)}};
}

void write_ccdf_csv(std::ostream& out, const ExitStats& stats) {
    out << "t,ccdf\n";
    for (const auto& [t, c] : stats.ccdf) out << format_real(t) << ',' << format_real(c) << '\n';
}

Json to_json(const ExitStats& stats) {
    return Json{{"samples", stats.samples.size()}, {"mean", stats.mean},
                {"rate", stats.rate},              {"slope", stats.slope},
                {"intercept", stats.intercept},    {"r2_loglinear", stats.r2_loglinear},
                {"degenerate", stats.degenerate}};
}

void write_density_csv(std::ostream& out, const DensityOnCircle& d) {
    out << "theta,density\n";
    for (std::size_t i = 0; i < d.size(); ++i) out << format_real(d.thetas[i]) << ',' << format_real(d.values[i]) << '\n';
}

void write_histogram_csv(std::ostream& out, const AngleHistogram& h) {
    out << "bin_left,bin_right,mass\n";
    const auto p = h.masses();
    for (std::size_t i = 0; i < h.bins(); ++i)
        out << format_real(h.bin_left(i)) << ',' << format_real(h.bin_right(i)) << ',' << format_real(p[i]) << '\n';
}

void write_eigenpair_csv(std::ostream& out, const CircleReduction& red, const EigenPair& eig) {
    out << "theta,phi\n";
    for (std::size_t j = 0; j < red.grid.size(); ++j)
        out << format_real(red.grid[j]) << ',' << format_real(eig.phi[j]) << '\n';
}

Json to_json(const QProcessReport& rep) {
    auto real = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    return Json{
        {"eps", rep.eps},
        {"lambda0", rep.lambda0},
        {"residual", rep.residual},
        {"theta_start", rep.theta_start},
        {"confinement",
         {{"seeds", rep.seeds},
          {"steps", rep.steps},
          {"exited_seeds", rep.exited_seeds},
          {"min_boundary_distance", rep.min_boundary_distance},
          {"passed", rep.confined}}},
        {"density", {{"tv", rep.tv}, {"histogram", rep.histogram}, {"predicted", rep.predicted}, {"passed", rep.density_ok}}},
        {"exit_time",
         {{"mean", real(rep.mean_exit)},
          {"std_error", real(rep.mean_exit_std_error)},
          {"censored", rep.exit_censored},
          {"inverse_lambda0", rep.inverse_lambda0},
          {"relative_error", real(rep.exit_relative_error)},
          {"passed", rep.exit_ok}}},
        {"failures", rep.failures},
        {"passed", rep.passed()},
    };
}

}  // namespace srd
