#include "feynprop/cli.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "feynprop/bounds.hpp"
#include "feynprop/errors.hpp"
#include "feynprop/parallel.hpp"

namespace feynprop::cli {

namespace {

//---------------------------------------------------------------------------//
// Strict JSON reading
//---------------------------------------------------------------------------//

void require_object(const json& j, const std::string& where)
{
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where)
{
    require_object(j, where);
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || item.key() == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

double as_double(const json& j, const std::string& where)
{
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + ": must be finite");
    return v;
}

std::int64_t as_int(const json& j, const std::string& where)
{
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    if (j.is_number_unsigned() && j.get<std::uint64_t>() > INT64_MAX) {
        throw ConfigError(where + ": integer out of range");
    }
    return j.get<std::int64_t>();
}

int as_int32(const json& j, const std::string& where)
{
    const std::int64_t v = as_int(j, where);
    if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(where + ": integer out of range");
    return static_cast<int>(v);
}

std::string as_string(const json& j, const std::string& where)
{
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

template <class T, class Fn>
void read_opt(const json& obj, const char* key, const std::string& where, T& dst, Fn conv)
{
    if (obj.contains(key)) dst = conv(obj.at(key), where + "." + key);
}

double read_req_double(const json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
    return as_double(obj.at(key), where + "." + key);
}

PotentialSpec parse_potential(const json& j)
{
    const std::string where = "potential";
    check_keys(j, {"exp_atoms", "delta_atoms", "g"}, where);
    PotentialSpec p;
    read_opt(j, "g", where, p.g, as_double);
    if (j.contains("exp_atoms")) {
        const auto& arr = j.at("exp_atoms");
        if (!arr.is_array()) throw ConfigError(where + ".exp_atoms: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string w = where + ".exp_atoms[" + std::to_string(i) + "]";
            check_keys(arr[i], {"alpha", "coeff_re", "coeff_im"}, w);
            ExpAtom a;
            a.alpha = read_req_double(arr[i], "alpha", w);
            double re = 0.0, im = 0.0;
            read_opt(arr[i], "coeff_re", w, re, as_double);
            read_opt(arr[i], "coeff_im", w, im, as_double);
            a.coeff = {re, im};
            p.exp_atoms.push_back(a);
        }
    }
    if (j.contains("delta_atoms")) {
        const auto& arr = j.at("delta_atoms");
        if (!arr.is_array()) throw ConfigError(where + ".delta_atoms: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string w = where + ".delta_atoms[" + std::to_string(i) + "]";
            check_keys(arr[i], {"location", "weight"}, w);
            p.delta_atoms.push_back(
                {read_req_double(arr[i], "location", w), read_req_double(arr[i], "weight", w)});
        }
    }
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("potential: ") + e.what());
    }
    return p;
}

void parse_range(const json& j, const std::string& where, double& lo, double& hi, int& n)
{
    if (!j.is_array() || j.size() != 3) {
        throw ConfigError(where + ": expected [min, max, n]");
    }
    lo = as_double(j[0], where + "[0]");
    hi = as_double(j[1], where + "[1]");
    n = as_int32(j[2], where + "[2]");
    if (n < 1) throw ConfigError(where + ": n must be >= 1");
    if (hi < lo) throw ConfigError(where + ": max < min");
}

TestFunction parse_theta(const json& j)
{
    check_keys(j, {"nodes"}, "theta");
    if (!j.contains("nodes")) return {};
    const auto& arr = j.at("nodes");
    if (!arr.is_array()) throw ConfigError("theta.nodes: expected an array");
    std::vector<TestFunction::Node> nodes;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string w = "theta.nodes[" + std::to_string(i) + "]";
        if (!arr[i].is_array() || arr[i].size() != 3) {
            throw ConfigError(w + ": expected [time, re, im]");
        }
        nodes.push_back({as_double(arr[i][0], w + "[0]"),
                         {as_double(arr[i][1], w + "[1]"), as_double(arr[i][2], w + "[2]")}});
    }
    try {
        return TestFunction(std::move(nodes));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("theta: ") + e.what());
    }
}

SimplexRule parse_rule(const json& j, const std::string& where)
{
    const std::string s = as_string(j, where);
    if (s == "gauss_jacobi_tensor") return SimplexRule::gauss_jacobi_tensor;
    if (s == "dirichlet_mc") return SimplexRule::dirichlet_mc;
    throw ConfigError(where + ": expected 'gauss_jacobi_tensor' or 'dirichlet_mc'");
}

std::uint64_t as_seed(const json& j, const std::string& where)
{
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    }
    throw ConfigError(where + ": expected a non-negative integer");
}

QuadratureSpec parse_quadrature(const json& j)
{
    const std::string where = "quadrature";
    check_keys(j,
               {"simplex_rule", "points_per_dim", "mc_samples", "seed", "hypercube_points",
                "tensor_max_k", "max_tensor_nodes"},
               where);
    QuadratureSpec q;
    read_opt(j, "simplex_rule", where, q.simplex_rule, parse_rule);
    read_opt(j, "points_per_dim", where, q.points_per_dim, as_int32);
    read_opt(j, "mc_samples", where, q.mc_samples, as_int);
    read_opt(j, "seed", where, q.seed, as_seed);
    read_opt(j, "hypercube_points", where, q.hypercube_points, as_int32);
    read_opt(j, "tensor_max_k", where, q.tensor_max_k, as_int32);
    read_opt(j, "max_tensor_nodes", where, q.max_tensor_nodes, as_int);
    try {
        q.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("quadrature: ") + e.what());
    }
    return q;
}

OracleSettings parse_oracle(const json& j)
{
    const std::string where = "oracle";
    check_keys(j,
               {"x_min", "x_max", "nx", "nt", "delta_width", "packet", "series_y_points",
                "series_x_points", "series_span"},
               where);
    OracleSettings o;
    GridSpec& g = o.grid;
    read_opt(j, "x_min", where, g.x_min, as_double);
    read_opt(j, "x_max", where, g.x_max, as_double);
    read_opt(j, "nx", where, g.nx, as_int32);
    read_opt(j, "nt", where, g.nt, as_int32);
    read_opt(j, "delta_width", where, g.delta_width, as_double);
    if (j.contains("packet")) {
        const auto& pk = j.at("packet");
        check_keys(pk, {"center", "width", "momentum"}, where + ".packet");
        read_opt(pk, "center", where + ".packet", g.packet.center, as_double);
        read_opt(pk, "width", where + ".packet", g.packet.width, as_double);
        read_opt(pk, "momentum", where + ".packet", g.packet.momentum, as_double);
    }
    read_opt(j, "series_y_points", where, o.series.y_points, as_int32);
    read_opt(j, "series_x_points", where, o.series.x_points, as_int32);
    read_opt(j, "series_span", where, o.series.span, as_double);
    try {
        g.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("oracle: ") + e.what());
    }
    if (o.series.y_points < 2 || o.series.x_points < 2) {
        throw ConfigError("oracle: series_y_points and series_x_points must be >= 2");
    }
    if (!(o.series.span > 0.0)) throw ConfigError("oracle: series_span must be > 0");
    return o;
}

ResidualSettings parse_residual(const json& j)
{
    const std::string where = "residual";
    check_keys(j, {"h_x", "h_t", "stencil", "refinements"}, where);
    ResidualSettings r;
    read_opt(j, "h_x", where, r.h_x, as_double);
    read_opt(j, "h_t", where, r.h_t, as_double);
    read_opt(j, "refinements", where, r.refinements, as_int32);
    if (j.contains("stencil")) {
        const std::string s = as_string(j.at("stencil"), where + ".stencil");
        if (s == "second_order") {
            r.stencil = Stencil::second_order;
        } else if (s == "fourth_order") {
            r.stencil = Stencil::fourth_order;
        } else {
            throw ConfigError(where + ".stencil: expected 'second_order' or 'fourth_order'");
        }
    }
    if (!(r.h_x > 0.0) || !(r.h_t > 0.0)) throw ConfigError(where + ": steps must be positive");
    if (r.refinements < 1) throw ConfigError(where + ": refinements must be >= 1");
    return r;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

//---------------------------------------------------------------------------//
// Output helpers
//---------------------------------------------------------------------------//

std::string num(double v)
{
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

std::string join(const std::vector<std::string>& parts, char sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::vector<std::string> flags_of(const PropagatorResult& r)
{
    std::vector<std::string> f;
    if (!r.query.forward()) return f;
    if (!r.converged) f.emplace_back("not_converged");
    if (support_exceeds_window(r.theta, r.query)) f.emplace_back("theta_outside_window");
    return f;
}

json query_json(const PropagatorQuery& q)
{
    return {{"x", q.x}, {"y", q.y}, {"t0", q.t0}, {"t", q.t}};
}

// Evaluates fn on every query concurrently; results keep input order.
template <class R, class Fn>
std::vector<R> map_queries(const std::vector<PropagatorQuery>& qs, Fn fn)
{
    std::vector<R> out(qs.size());
    detail::parallel_for(static_cast<std::int64_t>(qs.size()), [&](std::int64_t i) {
        out[static_cast<std::size_t>(i)] = fn(qs[static_cast<std::size_t>(i)]);
    });
    return out;
}

//---------------------------------------------------------------------------//
// Commands
//---------------------------------------------------------------------------//

void cmd_propagate(const RunConfig& cfg, const std::vector<PropagatorQuery>& qs,
                   std::ostream& out)
{
    const auto results = map_queries<PropagatorResult>(qs, [&](const PropagatorQuery& q) {
        return propagator(cfg.theta, cfg.potential, q, cfg.quadrature, cfg.series);
    });

    if (cfg.format == OutputFormat::csv) {
        out << "x,y,t0,t,re_K,im_K,abs_K,N_used,tail_bound,mc_stderr,flags\n";
        for (const auto& r : results) {
            const Complex k = r.value();
            const auto& q = r.query;
            out << num(q.x) << ',' << num(q.y) << ',' << num(q.t0) << ',' << num(q.t) << ','
                << num(k.real()) << ',' << num(k.imag()) << ',' << num(std::abs(k)) << ','
                << std::max(0, r.orders_used()) << ',' << num(r.tail) << ','
                << num(r.mc_stderr) << ',' << join(flags_of(r), ';') << '\n';
        }
        return;
    }

    json rows = json::array();
    for (const auto& r : results) {
        json orders = json::array();
        for (std::size_t n = 0; n < r.order_values.size(); ++n) {
            json terms = json::array();
            for (const auto& t : r.terms[n]) {
                terms.push_back({{"k", t.k},
                                 {"value", complex_json(t.value)},
                                 {"majorant", t.majorant},
                                 {"mc_stderr", t.mc_stderr}});
            }
            orders.push_back({{"n", static_cast<int>(n)},
                              {"value", complex_json(r.order_values[n])},
                              {"partial_sum", complex_json(r.partial_sums[n])},
                              {"terms", terms}});
        }
        const Complex k = r.value();
        rows.push_back({{"query", query_json(r.query)},
                        {"K", complex_json(k)},
                        {"abs_K", std::abs(k)},
                        {"N_used", std::max(0, r.orders_used())},
                        {"tail_bound", r.tail},
                        {"mc_stderr", r.mc_stderr},
                        {"converged", r.converged},
                        {"flags", flags_of(r)},
                        {"diagnostics", r.diagnostics},
                        {"orders", orders}});
    }
    out << json{{"schema", 1},
                {"command", "propagate"},
                {"config", config_to_json(cfg)},
                {"results", rows}}
               .dump(2)
        << '\n';
}

void cmd_converge(const RunConfig& cfg, const std::vector<PropagatorQuery>& qs,
                  std::ostream& out)
{
    const StopCriteria all{cfg.series.max_order, 0.0};
    const auto results = map_queries<PropagatorResult>(qs, [&](const PropagatorQuery& q) {
        return propagator(cfg.theta, cfg.potential, q, cfg.quadrature, all);
    });

    struct Row {
        int n;
        Complex partial;
        double increment;
        double tail;
        double ratio;
    };
    auto rows_of = [&](const PropagatorResult& r) {
        std::vector<Row> rows;
        if (!r.query.forward()) return rows;
        const BoundContext ctx = make_bound_context(r.theta, cfg.potential, r.query);
        const double phase = std::abs(boundary_phase(r.theta, r.query));
        for (std::size_t n = 0; n < r.order_values.size(); ++n) {
            const double inc = std::abs(r.order_values[n]);
            const double prev = n > 0 ? std::abs(r.order_values[n - 1]) : 0.0;
            rows.push_back({static_cast<int>(n), r.partial_sums[n], inc,
                            tail_bound(static_cast<int>(n), ctx) * phase,
                            prev > 0.0 ? inc / prev : std::nan("")});
        }
        return rows;
    };

    if (cfg.format == OutputFormat::csv) {
        out << "x,y,t0,t,N,re_K,im_K,abs_increment,tail_bound,increment_ratio\n";
        for (const auto& r : results) {
            const auto& q = r.query;
            for (const auto& row : rows_of(r)) {
                out << num(q.x) << ',' << num(q.y) << ',' << num(q.t0) << ',' << num(q.t) << ','
                    << row.n << ',' << num(row.partial.real()) << ','
                    << num(row.partial.imag()) << ',' << num(row.increment) << ','
                    << num(row.tail) << ',' << (std::isnan(row.ratio) ? "" : num(row.ratio))
                    << '\n';
            }
        }
        return;
    }
    json all_rows = json::array();
    for (const auto& r : results) {
        json orders = json::array();
        for (const auto& row : rows_of(r)) {
            orders.push_back({{"N", row.n},
                              {"partial_sum", complex_json(row.partial)},
                              {"abs_increment", row.increment},
                              {"tail_bound", row.tail},
                              {"increment_ratio",
                               std::isnan(row.ratio) ? json(nullptr) : json(row.ratio)}});
        }
        all_rows.push_back({{"query", query_json(r.query)}, {"orders", orders}});
    }
    out << json{{"schema", 1},
                {"command", "converge"},
                {"config", config_to_json(cfg)},
                {"results", all_rows}}
               .dump(2)
        << '\n';
}

void cmd_residual(const RunConfig& cfg, const std::vector<PropagatorQuery>& qs,
                  std::ostream& out)
{
    // fixed order so every stencil point uses the same truncation
    const StopCriteria fixed{cfg.series.max_order, 0.0};
    struct Level {
        double h_x, h_t;
        ResidualReport report;
        double order;
    };
    struct PointResult {
        PropagatorQuery q;
        double tail = 0.0;
        std::vector<Level> levels;
    };
    const auto results = map_queries<PointResult>(qs, [&](const PropagatorQuery& q) {
        PointResult pr{q, 0.0, {}};
        auto kernel = [&](double x, double t) {
            return propagator(cfg.theta, cfg.potential, {x, q.y, q.t0, t}, cfg.quadrature,
                              fixed)
                .value();
        };
        pr.tail = propagator(cfg.theta, cfg.potential, q, cfg.quadrature, fixed).tail;
        double hx = cfg.residual.h_x;
        double ht = cfg.residual.h_t;
        for (int l = 0; l <= cfg.residual.refinements; ++l) {
            const auto rep = schrodinger_residual(kernel, q, cfg.theta, cfg.potential, hx, ht,
                                                  cfg.residual.stencil);
            double order = std::nan("");
            if (l > 0 && rep.residual > 0.0) {
                order = std::log2(pr.levels.back().report.residual / rep.residual);
            }
            pr.levels.push_back({hx, ht, rep, order});
            hx *= 0.5;
            ht *= 0.5;
        }
        return pr;
    });

    if (cfg.format == OutputFormat::csv) {
        out << "x,y,t0,t,level,h_x,h_t,residual,observed_order,tail_bound,step_warning\n";
        for (const auto& pr : results) {
            for (std::size_t l = 0; l < pr.levels.size(); ++l) {
                const auto& lv = pr.levels[l];
                out << num(pr.q.x) << ',' << num(pr.q.y) << ',' << num(pr.q.t0) << ','
                    << num(pr.q.t) << ',' << l << ',' << num(lv.h_x) << ',' << num(lv.h_t)
                    << ',' << num(lv.report.residual) << ','
                    << (std::isnan(lv.order) ? "" : num(lv.order)) << ',' << num(pr.tail)
                    << ',' << (lv.report.step_warning ? 1 : 0) << '\n';
            }
        }
        return;
    }
    json rows = json::array();
    for (const auto& pr : results) {
        json levels = json::array();
        for (const auto& lv : pr.levels) {
            levels.push_back({{"h_x", lv.h_x},
                              {"h_t", lv.h_t},
                              {"residual", lv.report.residual},
                              {"observed_order",
                               std::isnan(lv.order) ? json(nullptr) : json(lv.order)},
                              {"step_warning", lv.report.step_warning}});
        }
        rows.push_back({{"query", query_json(pr.q)}, {"tail_bound", pr.tail}, {"levels", levels}});
    }
    out << json{{"schema", 1},
                {"command", "residual"},
                {"config", config_to_json(cfg)},
                {"results", rows}}
               .dump(2)
        << '\n';
}

void cmd_oracle_compare(const RunConfig& cfg, const std::vector<PropagatorQuery>& qs,
                        std::ostream& out, std::ostream& log, bool verbose)
{
    if (!cfg.oracle) throw ConfigError("oracle-compare: config has no 'oracle' section");
    const auto& o = *cfg.oracle;
    const double t0 = qs.front().t0;
    const double t = qs.front().t;
    if (!(t > t0)) throw ConfigError("oracle-compare: requires t > t0");

    std::vector<std::pair<std::string, double>> metrics;
    if (verbose) log << "oracle-compare: series packet\n";
    const SeriesPacket sp = propagate_packet_via_series(cfg.potential, t0, t, o.grid.packet,
                                                        cfg.quadrature, cfg.series, o.series);
    if (verbose) log << "oracle-compare: Crank-Nicolson\n";
    const WidthExtrapolation cn = extrapolate_delta_width(cfg.potential, o.grid, t0, t);

    metrics.emplace_back("series_vs_oracle_l2", l2_discrepancy(sp, cn.value));
    metrics.emplace_back("oracle_norm", std::sqrt(cn.value.norm_sq()));
    if (cfg.potential.is_free() || cfg.potential.g == 0.0) {
        auto exact = [&](double x) { return free_packet_exact(o.grid.packet, x, t - t0); };
        metrics.emplace_back("series_vs_free_exact_l2", l2_discrepancy(sp, exact));
        Wavefunction ref = cn.value;
        for (std::size_t i = 0; i < ref.psi.size(); ++i) ref.psi[i] = exact(ref.x(i));
        metrics.emplace_back("oracle_vs_free_exact_l2", l2_relative(cn.value, ref));
    }
    for (std::size_t i = 0; i < cn.successive_differences.size(); ++i) {
        metrics.emplace_back("width_difference_" + std::to_string(i + 1),
                             cn.successive_differences[i]);
    }
    metrics.emplace_back("series_max_tail_bound", sp.max_tail);
    metrics.emplace_back("series_max_mc_stderr", sp.max_mc_stderr);

    if (cfg.format == OutputFormat::csv) {
        out << "metric,value\n";
        for (const auto& [name, v] : metrics) out << name << ',' << num(v) << '\n';
        return;
    }
    json m = json::object();
    for (const auto& [name, v] : metrics) m[name] = v;
    out << json{{"schema", 1},
                {"command", "oracle-compare"},
                {"config", config_to_json(cfg)},
                {"metrics", m}}
               .dump(2)
        << '\n';
}

}  // namespace

std::vector<PropagatorQuery> RunConfig::queries() const
{
    if (query) return {*query};
    std::vector<PropagatorQuery> out;
    if (!query_grid) return out;
    const auto& g = *query_grid;
    auto at = [](double lo, double hi, int n, int i) {
        return n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    };
    for (int it = 0; it < g.t_n; ++it) {
        for (int ix = 0; ix < g.x_n; ++ix) {
            out.push_back({at(g.x_min, g.x_max, g.x_n, ix), g.y, g.t0,
                           at(g.t_min, g.t_max, g.t_n, it)});
        }
    }
    return out;
}

RunConfig parse_config(const json& doc)
{
    check_keys(doc,
               {"schema", "potential", "query", "query_grid", "theta", "series", "quadrature",
                "oracle", "residual", "output"},
               "config");
    if (!doc.contains("schema")) throw ConfigError("config: missing required key 'schema'");
    if (as_int(doc.at("schema"), "schema") != 1) {
        throw ConfigError("config: unsupported schema version (expected 1)");
    }
    RunConfig cfg;
    if (!doc.contains("potential")) throw ConfigError("config: missing required key 'potential'");
    cfg.potential = parse_potential(doc.at("potential"));

    const bool has_q = doc.contains("query");
    const bool has_grid = doc.contains("query_grid");
    if (has_q == has_grid) {
        throw ConfigError("config: exactly one of 'query' and 'query_grid' is required");
    }
    if (has_q) {
        const auto& j = doc.at("query");
        check_keys(j, {"x", "y", "t0", "t"}, "query");
        cfg.query = PropagatorQuery{read_req_double(j, "x", "query"),
                                    read_req_double(j, "y", "query"),
                                    read_req_double(j, "t0", "query"),
                                    read_req_double(j, "t", "query")};
    } else {
        const auto& j = doc.at("query_grid");
        check_keys(j, {"x", "t", "y", "t0"}, "query_grid");
        QueryGrid g;
        if (!j.contains("x") || !j.contains("t")) {
            throw ConfigError("query_grid: 'x' and 't' ranges are required");
        }
        parse_range(j.at("x"), "query_grid.x", g.x_min, g.x_max, g.x_n);
        parse_range(j.at("t"), "query_grid.t", g.t_min, g.t_max, g.t_n);
        g.y = read_req_double(j, "y", "query_grid");
        g.t0 = read_req_double(j, "t0", "query_grid");
        cfg.query_grid = g;
    }
    if (doc.contains("theta")) cfg.theta = parse_theta(doc.at("theta"));
    if (doc.contains("series")) {
        const auto& j = doc.at("series");
        check_keys(j, {"max_order", "tail_tol"}, "series");
        read_opt(j, "max_order", "series", cfg.series.max_order, as_int32);
        read_opt(j, "tail_tol", "series", cfg.series.tail_tol, as_double);
        if (cfg.series.max_order < 0) throw ConfigError("series.max_order must be >= 0");
        if (cfg.series.tail_tol < 0.0) throw ConfigError("series.tail_tol must be >= 0");
    }
    if (doc.contains("quadrature")) cfg.quadrature = parse_quadrature(doc.at("quadrature"));
    if (doc.contains("oracle")) cfg.oracle = parse_oracle(doc.at("oracle"));
    if (doc.contains("residual")) cfg.residual = parse_residual(doc.at("residual"));
    if (doc.contains("output")) {
        const auto& j = doc.at("output");
        check_keys(j, {"format", "path"}, "output");
        if (j.contains("format")) {
            const std::string f = as_string(j.at("format"), "output.format");
            if (f == "csv") {
                cfg.format = OutputFormat::csv;
            } else if (f == "json") {
                cfg.format = OutputFormat::json;
            } else {
                throw ConfigError("output.format: expected 'csv' or 'json'");
            }
        }
        read_opt(j, "path", "output", cfg.output_path, as_string);
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

json config_to_json(const RunConfig& cfg)
{
    json j;
    j["schema"] = 1;
    json exp_atoms = json::array();
    for (const auto& a : cfg.potential.exp_atoms) {
        exp_atoms.push_back(
            {{"alpha", a.alpha}, {"coeff_re", a.coeff.real()}, {"coeff_im", a.coeff.imag()}});
    }
    json delta_atoms = json::array();
    for (const auto& d : cfg.potential.delta_atoms) {
        delta_atoms.push_back({{"location", d.location}, {"weight", d.weight}});
    }
    j["potential"] = {{"exp_atoms", exp_atoms}, {"delta_atoms", delta_atoms}, {"g", cfg.potential.g}};
    if (cfg.query) {
        j["query"] = query_json(*cfg.query);
    } else if (cfg.query_grid) {
        const auto& g = *cfg.query_grid;
        j["query_grid"] = {{"x", {g.x_min, g.x_max, g.x_n}},
                           {"t", {g.t_min, g.t_max, g.t_n}},
                           {"y", g.y},
                           {"t0", g.t0}};
    }
    json nodes = json::array();
    for (const auto& n : cfg.theta.nodes()) {
        nodes.push_back({n.time, n.value.real(), n.value.imag()});
    }
    j["theta"] = {{"nodes", nodes}};
    j["series"] = {{"max_order", cfg.series.max_order}, {"tail_tol", cfg.series.tail_tol}};
    const auto& q = cfg.quadrature;
    j["quadrature"] = {
        {"simplex_rule", q.simplex_rule == SimplexRule::dirichlet_mc ? "dirichlet_mc"
                                                                      : "gauss_jacobi_tensor"},
        {"points_per_dim", q.points_per_dim},
        {"mc_samples", q.mc_samples},
        {"seed", q.seed},
        {"hypercube_points", q.hypercube_points},
        {"tensor_max_k", q.tensor_max_k},
        {"max_tensor_nodes", q.max_tensor_nodes}};
    if (cfg.oracle) {
        const auto& g = cfg.oracle->grid;
        j["oracle"] = {{"x_min", g.x_min},
                       {"x_max", g.x_max},
                       {"nx", g.nx},
                       {"nt", g.nt},
                       {"delta_width", g.delta_width},
                       {"packet",
                        {{"center", g.packet.center},
                         {"width", g.packet.width},
                         {"momentum", g.packet.momentum}}},
                       {"series_y_points", cfg.oracle->series.y_points},
                       {"series_x_points", cfg.oracle->series.x_points},
                       {"series_span", cfg.oracle->series.span}};
    }
    j["residual"] = {
        {"h_x", cfg.residual.h_x},
        {"h_t", cfg.residual.h_t},
        {"stencil", cfg.residual.stencil == Stencil::fourth_order ? "fourth_order" : "second_order"},
        {"refinements", cfg.residual.refinements}};
    j["output"] = {{"format", cfg.format == OutputFormat::json ? "json" : "csv"},
                   {"path", cfg.output_path}};
    return j;
}

std::optional<Command> parse_command(const std::string& name)
{
    if (name == "propagate") return Command::propagate;
    if (name == "converge") return Command::converge;
    if (name == "residual") return Command::residual;
    if (name == "oracle-compare") return Command::oracle_compare;
    return std::nullopt;
}

int run_command(Command cmd, const RunConfig& cfg, std::ostream& out, std::ostream& log,
                const RunOptions& opts)
{
    const auto qs = cfg.queries();
    if (qs.empty()) throw ConfigError("config defines no query points");
    if (opts.verbose) log << "feynprop: " << qs.size() << " query point(s)\n";
    // buffer so a failure never leaves a partial table behind
    std::ostringstream buf;
    try {
        switch (cmd) {
        case Command::propagate: cmd_propagate(cfg, qs, buf); break;
        case Command::converge: cmd_converge(cfg, qs, buf); break;
        case Command::residual: cmd_residual(cfg, qs, buf); break;
        case Command::oracle_compare: cmd_oracle_compare(cfg, qs, buf, log, opts.verbose); break;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        log << "feynprop: numerical failure: " << e.what() << '\n';
        return 2;
    }
    out << buf.str();
    return 0;
}

}  // namespace feynprop::cli
