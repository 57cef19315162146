#pragma once

// File formats: JSON for matrices, graphs and reports; CSV for everything
// sampled.  Reals are written with 17 significant digits.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "srd/errors.hpp"
#include "srd/graph.hpp"
#include "srd/metastability.hpp"
#include "srd/potential.hpp"
#include "srd/qprocess.hpp"
#include "srd/sde.hpp"
#include "srd/stationary.hpp"

namespace srd {

using Json = nlohmann::json;

/// Malformed input file; `line` is 1-based, 0 when not applicable.
class ParseError : public ContractError {
public:
    ParseError(const std::string& detail, std::size_t line = 0, const std::string& source = "");
    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

/// 17 significant digits, shortest form ("0.375", "1e-05").
std::string format_real(double v);

Json to_json(const PayoffMatrix& m);
/// {"n": int, "entries": [[...], ...]}; a flat row-major list is accepted too.
PayoffMatrix payoff_from_json(const Json& j);

struct GraphDocument {
    Graph graph{1};
    VertexSet planted;
};

Json to_json(const GraphDocument& doc);
GraphDocument graph_from_json(const Json& j);

/// "i j" per line, '#' starts a comment.  The vertex count is one more than
/// the largest index, or `min_vertices` if that is larger.
Graph read_edge_list(std::istream& in, std::size_t min_vertices = 0);

/// JSON by extension (.json), edge list otherwise.
GraphDocument load_graph(const std::filesystem::path& path);
PayoffMatrix load_payoff(const std::filesystem::path& path);
Json load_json(const std::filesystem::path& path);

/// Creates parent directories; throws std::runtime_error on I/O failure.
void write_file(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const Json& j);

/// t,x_1,...,x_n
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& traj);
/// run,seed,eps,tau,steps,start,end,censored
void write_exit_samples_csv(std::ostream& out, std::span<const SweepRow> rows);
Json to_json(const SweepRow& row);
/// t,ccdf
void write_ccdf_csv(std::ostream& out, const ExitStats& stats);
Json to_json(const ExitStats& stats);

/// theta,density
void write_density_csv(std::ostream& out, const DensityOnCircle& d);
/// bin_left,bin_right,mass
void write_histogram_csv(std::ostream& out, const AngleHistogram& h);
/// theta,phi
void write_eigenpair_csv(std::ostream& out, const CircleReduction& red, const EigenPair& eig);
Json to_json(const QProcessReport& rep);

}  // namespace srd
