#pragma once

#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "feynprop/free_kernel.hpp"
#include "feynprop/model.hpp"
#include "feynprop/oracle.hpp"
#include "feynprop/quadrature.hpp"
#include "feynprop/series.hpp"

namespace feynprop::cli {

using nlohmann::json;

enum class OutputFormat { csv, json };

// query_grid{x:[min,max,n], t:[min,max,n], y, t0}
struct QueryGrid {
    double x_min = 0.0, x_max = 0.0;
    int x_n = 1;
    double t_min = 1.0, t_max = 1.0;
    int t_n = 1;
    double y = 0.0;
    double t0 = 0.0;
};

struct ResidualSettings {
    double h_x = 1e-2;
    double h_t = 1e-2;
    Stencil stencil = Stencil::second_order;
    // number of step halvings after the first level
    int refinements = 2;
};

struct OracleSettings {
    GridSpec grid;
    SeriesPacketOptions series;
};

struct RunConfig {
    PotentialSpec potential;
    std::optional<PropagatorQuery> query;
    std::optional<QueryGrid> query_grid;
    TestFunction theta;
    StopCriteria series;
    QuadratureSpec quadrature;
    std::optional<OracleSettings> oracle;
    ResidualSettings residual;
    OutputFormat format = OutputFormat::csv;
    std::string output_path;

    // Single query, or the grid expanded t-major, x-minor.
    std::vector<PropagatorQuery> queries() const;
};

// Strict parse: ConfigError on unknown keys, wrong types, missing required
// fields, schema != 1, or invalid values.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::string& path);

// Full normalized document (every default spelled out); parse_config of the
// result yields an identical RunConfig.
json config_to_json(const RunConfig& cfg);

enum class Command { propagate, converge, residual, oracle_compare };

std::optional<Command> parse_command(const std::string& name);

struct RunOptions {
    bool verbose = false;
};

/*!
 * Runs one command, writing the table (csv) or document (json) to `out`
 * and progress to `log`. Returns the process exit code: 0 ok, 2 numerical
 * failure. Configuration problems throw ConfigError.
 */
int run_command(Command cmd, const RunConfig& cfg, std::ostream& out, std::ostream& log,
                const RunOptions& opts = {});

}  // namespace feynprop::cli
