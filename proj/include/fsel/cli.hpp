#pragma once

// Command-line surface: `simulate`, `select` and `iv`.
//
// Exit codes: 0 success, 1 bad input or failed work, 2 usage error,
// 3 the run finished but some replication or fit was degenerate.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fsel/csv.hpp"
#include "fsel/error.hpp"
#include "fsel/fselect.hpp"
#include "fsel/ivpipe.hpp"
#include "fsel/lassopath.hpp"
#include "fsel/simlab.hpp"

namespace fsel::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;

// ---- config helpers --------------------------------------------------------

namespace detail {

[[noreturn]] inline void config_error(const std::string& key, const std::string& what) {
    fail(ErrorKind::InvalidArgument, "config key '" + key + "': " + what);
}

inline void reject_unknown(const json& obj, const std::string& prefix,
                           const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
        fail(ErrorKind::InvalidArgument,
             prefix.empty() ? "config must be a JSON object" : "config key '" + prefix + "': expected an object");
    }
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            config_error(prefix.empty() ? item.key() : prefix + "." + item.key(), "unknown key");
        }
    }
}

inline double get_number(const json& v, const std::string& key) {
    if (!v.is_number()) config_error(key, "expected a number");
    return v.get<double>();
}

inline Index get_count(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        config_error(key, "expected a positive integer");
    }
    return static_cast<Index>(v.get<std::int64_t>());
}

inline std::string get_string(const json& v, const std::string& key) {
    if (!v.is_string()) config_error(key, "expected a string");
    return v.get<std::string>();
}

inline std::uint64_t get_seed(const json& v, const std::string& key) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        config_error(key, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

// A scalar or an array of scalars.
template <class F>
inline auto get_list(const json& v, const std::string& key, F item) {
    using T = decltype(item(v, key));
    std::vector<T> out;
    if (v.is_array()) {
        if (v.empty()) config_error(key, "expected a non-empty list");
        for (std::size_t k = 0; k < v.size(); ++k) {
            out.push_back(item(v[k], key + "[" + std::to_string(k) + "]"));
        }
    } else {
        out.push_back(item(v, key));
    }
    return out;
}

inline SeKind parse_se(const std::string& s, const std::string& key) {
    if (s == "classical") return SeKind::Classical;
    if (s == "white") return SeKind::White;
    config_error(key, "expected 'classical' or 'white', got '" + s + "'");
}

inline Policy parse_policy(const std::string& s, const std::string& key) {
    if (s == "f1") return Policy::ForwardI;
    if (s == "f2") return Policy::ForwardII;
    if (s == "f3") return Policy::ForwardIII;
    config_error(key, "expected f1, f2 or f3, got '" + s + "'");
}

inline json load_json(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

inline void check_output_path(const std::string& path, const std::string& what) {
    if (path.empty()) return;
    const auto parent = std::filesystem::absolute(path).parent_path();
    if (!std::filesystem::is_directory(parent)) {
        fail(ErrorKind::InvalidArgument,
             what + ": directory '" + parent.string() + "' does not exist");
    }
}

inline void check_input_path(const std::string& path, const std::string& what) {
    if (!std::filesystem::is_regular_file(path)) {
        fail(ErrorKind::InvalidArgument, what + ": cannot read '" + path + "'");
    }
}

}  // namespace detail

// ---- simulate ----------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::optional<Index> replications;
    std::string out_csv;
    std::string out_md;
    bool full_grid = false;
};

struct SimulatePlan {
    std::vector<DgpConfig> grid;
    MonteCarloOptions options;
    std::string out_csv;
    std::string out_md;
    std::uint64_t seed = 0;
};

inline SimulatePlan plan_simulation(const json& cfg, const SimulateArgs& args) {
    using namespace detail;
    reject_unknown(cfg, "", {"grid", "replications", "seed", "jobs", "estimators", "se_kinds", "alpha",
                             "c_tau", "zero_signal", "lasso", "output_csv", "output_markdown"});
    SimulatePlan plan;

    std::optional<std::uint64_t> seed = args.seed;
    if (!seed && cfg.contains("seed")) seed = get_seed(cfg["seed"], "seed");
    if (!seed) fail(ErrorKind::InvalidArgument, "a master seed is required (--seed or config key 'seed')");
    plan.seed = *seed;

    Index reps = 1;
    if (cfg.contains("replications")) reps = get_count(cfg["replications"], "replications");
    if (args.replications) reps = *args.replications;
    if (reps < 1) fail(ErrorKind::InvalidArgument, "replications must be positive");

    bool zero_signal = false;
    if (cfg.contains("zero_signal")) {
        if (!cfg["zero_signal"].is_boolean()) config_error("zero_signal", "expected true or false");
        zero_signal = cfg["zero_signal"].get<bool>();
    }

    if (args.full_grid) {
        plan.grid = full_grid(plan.seed, reps);
        for (auto& g : plan.grid) g.zero_signal = zero_signal;
    } else {
        if (!cfg.contains("grid")) config_error("grid", "required unless --full-grid is given");
        const json& grid = cfg["grid"];
        reject_unknown(grid, "grid", {"n", "c_p", "b", "rho"});
        std::vector<Index> ns{200};
        std::vector<double> cps{2.0}, bs{0.75}, rhos{0.0};
        if (grid.contains("n")) ns = get_list(grid["n"], "grid.n", get_count);
        if (grid.contains("c_p")) cps = get_list(grid["c_p"], "grid.c_p", get_number);
        if (grid.contains("b")) bs = get_list(grid["b"], "grid.b", get_number);
        if (grid.contains("rho")) rhos = get_list(grid["rho"], "grid.rho", get_number);
        for (Index n : ns) {
            for (double c_p : cps) {
                for (double b : bs) {
                    for (double rho : rhos) {
                        DgpConfig d;
                        d.n = n;
                        d.c_p = c_p;
                        d.b = b;
                        d.rho = rho;
                        d.seed = plan.seed;
                        d.replications = reps;
                        d.zero_signal = zero_signal;
                        try {
                            validate(d);
                        } catch (const Error& e) {
                            config_error("grid", e.what());
                        }
                        plan.grid.push_back(d);
                    }
                }
            }
        }
    }

    MonteCarloOptions& opt = plan.options;
    if (cfg.contains("estimators")) {
        opt.estimators = get_list(cfg["estimators"], "estimators", [](const json& v, const std::string& key) {
            const auto e = parse_estimator(get_string(v, key));
            if (!e) config_error(key, "unknown estimator '" + v.get<std::string>() + "'");
            return *e;
        });
    }
    if (cfg.contains("se_kinds")) {
        opt.se_kinds = get_list(cfg["se_kinds"], "se_kinds", [](const json& v, const std::string& key) {
            return parse_se(get_string(v, key), key);
        });
    }
    if (cfg.contains("alpha")) opt.alpha = get_number(cfg["alpha"], "alpha");
    if (cfg.contains("c_tau")) opt.c_tau = get_number(cfg["c_tau"], "c_tau");
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) config_error("alpha", "must lie in (0, 1)");
    if (!(opt.c_tau > 1.0)) config_error("c_tau", "must exceed 1");
    opt.lasso.alpha = opt.alpha;
    opt.lasso.c_tau = opt.c_tau;
    if (cfg.contains("lasso")) {
        const json& l = cfg["lasso"];
        reject_unknown(l, "lasso", {"loadings", "loading_iters", "loading_tol", "cd_tol", "cd_max_sweeps"});
        if (l.contains("loadings")) opt.lasso.loadings = parse_se(get_string(l["loadings"], "lasso.loadings"), "lasso.loadings");
        if (l.contains("loading_iters")) opt.lasso.loading_iters = get_count(l["loading_iters"], "lasso.loading_iters");
        if (l.contains("loading_tol")) opt.lasso.loading_tol = get_number(l["loading_tol"], "lasso.loading_tol");
        if (l.contains("cd_tol")) opt.lasso.cd_tol = get_number(l["cd_tol"], "lasso.cd_tol");
        if (l.contains("cd_max_sweeps")) opt.lasso.cd_max_sweeps = get_count(l["cd_max_sweeps"], "lasso.cd_max_sweeps");
    }
    if (cfg.contains("jobs")) opt.jobs = static_cast<unsigned>(get_count(cfg["jobs"], "jobs"));
    if (args.jobs) opt.jobs = *args.jobs;

    if (cfg.contains("output_csv")) plan.out_csv = get_string(cfg["output_csv"], "output_csv");
    if (cfg.contains("output_markdown")) plan.out_md = get_string(cfg["output_markdown"], "output_markdown");
    if (!args.out_csv.empty()) plan.out_csv = args.out_csv;
    if (!args.out_md.empty()) plan.out_md = args.out_md;
    detail::check_output_path(plan.out_csv, "CSV output");
    detail::check_output_path(plan.out_md, "Markdown output");
    return plan;
}

inline int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
    json cfg = json::object();
    if (!args.config.empty()) {
        detail::check_input_path(args.config, "config");
        cfg = detail::load_json(args.config);
    } else if (!args.full_grid) {
        fail(ErrorKind::InvalidArgument, "--config is required unless --full-grid is given");
    }
    const SimulatePlan plan = plan_simulation(cfg, args);
    const TableReport report = run_montecarlo(plan.grid, plan.options);

    const std::string csv = emit_table(report, TableFormat::Csv);
    if (!plan.out_csv.empty()) write_atomic(plan.out_csv, csv);
    if (!plan.out_md.empty()) write_atomic(plan.out_md, emit_table(report, TableFormat::Markdown));
    if (plan.out_csv.empty() && plan.out_md.empty()) out << csv;

    Index failed_rows = 0;
    for (const TableRow& row : report.rows) failed_rows += row.failures;
    const Diagnostics& d = report.diagnostics;
    err << "simulate: " << plan.grid.size() << " cell(s), seed " << plan.seed << ", "
        << d.lasso_fits << " lasso fit(s), max KKT violation " << d.max_kkt_violation << '\n';
    bool degenerate = false;
    if (d.failures > 0 || failed_rows > 0) {
        err << "simulate: " << d.failures << " replication failure(s)\n";
        degenerate = true;
    }
    if (!d.lasso_converged) {
        err << "simulate: coordinate descent hit the sweep limit in at least one Lasso fit\n";
        degenerate = true;
    }
    if (!d.objectives_monotone) {
        err << "simulate: a Lasso objective path increased between sweeps\n";
        degenerate = true;
    }
    return degenerate ? kExitDegenerate : kExitOk;
}

// ---- select ------------------------------------------------------------------

struct SelectArgs {
    std::string input;
    std::string outcome;
    std::string policy = "f1";
    std::string se = "white";
    std::optional<double> alpha;
    std::optional<double> c_tau;
    bool intercept = false;
    std::string output;
};

inline std::string render_selection(const SelectionConfig& config, const SelectionTrace& trace,
                                    const SelectedModel& model,
                                    const std::vector<std::string>& names) {
    std::string s = "# policy=" + std::string(to_string(config.policy)) +
                    " se=" + to_string(config.se_kind) + " alpha=" + format_double(config.alpha) +
                    " c_tau=" + format_double(config.c_tau) + " terminal=" + to_string(trace.reason);
    if (config.include_intercept) s += " intercept=" + format_double(model.intercept);
    s += "\nstep,index,column,W,threshold,coef\n";
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const SelectionStep& st = trace.steps[k];
        s += std::to_string(k + 1) + ',' + std::to_string(st.index) + ',' +
             names[static_cast<std::size_t>(st.index)] + ',' + format_double(st.W) + ',' +
             format_double(st.threshold) + ',' + format_double(model.coef[static_cast<Index>(k)]) + '\n';
    }
    return s;
}

inline int cmd_select(const SelectArgs& args, std::ostream& out, std::ostream& err) {
    detail::check_input_path(args.input, "input");
    detail::check_output_path(args.output, "output");
    SelectionConfig config;
    config.policy = detail::parse_policy(args.policy, "--policy");
    config.se_kind = detail::parse_se(args.se, "--se");
    if (args.alpha) config.alpha = *args.alpha;
    if (args.c_tau) config.c_tau = *args.c_tau;
    config.include_intercept = args.intercept;

    const CsvTable table = read_csv(args.input);
    const Index yk = table.column(args.outcome);
    if (yk < 0) fail(ErrorKind::InvalidArgument, "outcome column '" + args.outcome + "' not found in input");
    std::vector<std::string> names;
    IndexList cols;
    for (std::size_t k = 0; k < table.header.size(); ++k) {
        if (static_cast<Index>(k) == yk) continue;
        names.push_back(table.header[k]);
        cols.push_back(static_cast<Index>(k));
    }
    const Matrix X = select_columns(table.values, cols);
    const Vector y = table.values.col(yk);
    const SelectionTrace trace = forward_select(X, y, config);
    const SelectedModel model = refit(X, y, trace, config.include_intercept);

    const std::string text = render_selection(config, trace, model, names);
    if (args.output.empty()) {
        out << text;
    } else {
        write_atomic(args.output, text);
    }
    err << "select: " << trace.support.size() << " column(s) selected, terminal reason "
        << to_string(trace.reason) << '\n';
    return kExitOk;
}

// ---- iv ------------------------------------------------------------------------

struct IvArgs {
    std::string input;
    std::string roles;
    std::string output;
};

struct IvColumn {
    std::string label;
    IvEstimate estimate;
};

struct IvReport {
    std::vector<IvColumn> columns;
    TripleSelection selection;
    std::vector<std::string> control_names;
};

inline IvReport run_iv(const CsvTable& table, const json& roles) {
    using namespace detail;
    reject_unknown(roles, "", {"outcome", "endogenous", "instrument", "latitude", "continent_dummies",
                               "controls", "alpha", "c_tau", "policy", "se"});
    auto column = [&](const std::string& role, const std::string& name) {
        const Index k = table.column(name);
        if (k < 0) {
            fail(ErrorKind::InvalidArgument,
                 "role '" + role + "': column '" + name + "' not found in input");
        }
        return Vector(table.values.col(k));
    };
    auto required = [&](const std::string& role) {
        if (!roles.contains(role)) {
            fail(ErrorKind::InvalidArgument, "role '" + role + "' is missing from the roles config");
        }
        return column(role, get_string(roles[role], role));
    };

    IvDataset data;
    data.outcome = required("outcome");
    data.endogenous = required("endogenous");
    data.instrument = required("instrument");
    const Index n = data.outcome.size();

    std::vector<Vector> blocks;
    bool have_latitude = false;
    if (roles.contains("latitude")) {
        have_latitude = true;
        const Vector lat = column("latitude", get_string(roles["latitude"], "latitude"));
        if (!roles.contains("continent_dummies")) {
            fail(ErrorKind::InvalidArgument,
                 "role 'continent_dummies' is missing from the roles config (needed with 'latitude')");
        }
        const json& dj = roles["continent_dummies"];
        if (!dj.is_array() || dj.size() != 4) {
            config_error("continent_dummies", "expected four column names (Africa, Asia, North America, South America)");
        }
        Matrix dummies(n, 4);
        for (std::size_t k = 0; k < 4; ++k) {
            const std::string key = "continent_dummies[" + std::to_string(k) + "]";
            dummies.col(static_cast<Index>(k)) = column("continent_dummies", get_string(dj[k], key));
        }
        const GeoExpansion geo = expand_geo(lat, dummies);
        for (Index k = 0; k < geo.columns.cols(); ++k) blocks.emplace_back(geo.columns.col(k));
        data.control_names = geo.names;
    }
    if (roles.contains("controls")) {
        const auto names = get_list(roles["controls"], "controls", get_string);
        for (const auto& name : names) {
            blocks.push_back(column("controls", name));
            data.control_names.push_back(name);
        }
    }
    if (blocks.empty()) {
        fail(ErrorKind::InvalidArgument, "roles config names no controls ('latitude' or 'controls')");
    }
    data.controls.resize(n, static_cast<Index>(blocks.size()));
    for (std::size_t k = 0; k < blocks.size(); ++k) data.controls.col(static_cast<Index>(k)) = blocks[k];

    TripleSelectConfig tcfg = default_triple_config();
    if (roles.contains("alpha")) {
        const auto a = get_list(roles["alpha"], "alpha", get_number);
        if (a.size() == 1) {
            tcfg.alpha = {a[0], a[0], a[0]};
        } else if (a.size() == 3) {
            tcfg.alpha = {a[0], a[1], a[2]};
        } else {
            config_error("alpha", "expected one number or three");
        }
    }
    if (roles.contains("c_tau")) tcfg.base.c_tau = get_number(roles["c_tau"], "c_tau");
    if (roles.contains("policy")) tcfg.base.policy = parse_policy(get_string(roles["policy"], "policy"), "policy");
    if (roles.contains("se")) tcfg.base.se_kind = parse_se(get_string(roles["se"], "se"), "se");

    IvReport report;
    report.control_names = data.control_names;
    if (have_latitude) report.columns.push_back({"Latitude", tsls(data, IndexList{4})});
    IndexList all(static_cast<std::size_t>(data.controls.cols()));
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<Index>(k);
    report.columns.push_back({"All Controls", tsls(data, all)});
    report.selection = triple_select(data, tcfg);
    report.columns.push_back({"Forward Selection", tsls(data, report.selection.union_set)});
    return report;
}

inline std::string render_iv_text(const IvReport& report) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4);
    const int w = 20;
    s << std::left << std::setw(26) << "" << std::right;
    for (const auto& c : report.columns) s << std::setw(w) << c.label;
    s << '\n';
    auto row = [&](const std::string& label, auto field, const char* open, const char* close) {
        s << std::left << std::setw(26) << label << std::right;
        for (const auto& c : report.columns) {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(4) << open << field(c.estimate) << close;
            s << std::setw(w) << cell.str();
        }
        s << '\n';
    };
    s << "First stage (instrument)\n";
    row("  coefficient", [](const IvEstimate& e) { return e.first_stage; }, "", "");
    row("  s.e. (HC0)", [](const IvEstimate& e) { return e.first_stage_se; }, "(", ")");
    row("  s.e. (classical)", [](const IvEstimate& e) { return e.first_stage_se_classical; }, "[", "]");
    s << "Structural (endogenous)\n";
    row("  coefficient", [](const IvEstimate& e) { return e.theta; }, "", "");
    row("  s.e. (HC0)", [](const IvEstimate& e) { return e.theta_se; }, "(", ")");
    row("  s.e. (classical)", [](const IvEstimate& e) { return e.theta_se_classical; }, "[", "]");
    s << std::left << std::setw(26) << "Controls" << std::right;
    for (const auto& c : report.columns) s << std::setw(w) << c.estimate.controls.size();
    s << '\n';
    for (const auto& c : report.columns) {
        if (c.estimate.weak_instrument) s << "warning: weak instrument in column '" << c.label << "' (|t| < 1)\n";
    }
    s << "\nSelected controls (union over outcome, endogenous, instrument equations):\n";
    if (report.selection.union_set.empty()) s << "  none\n";
    static const char* kEq[3] = {"outcome", "endogenous", "instrument"};
    for (std::size_t k = 0; k < report.selection.union_set.size(); ++k) {
        s << "  " << report.control_names[static_cast<std::size_t>(report.selection.union_set[k])] << " [";
        bool first = true;
        for (std::size_t e = 0; e < 3; ++e) {
            if (!report.selection.provenance[k][e]) continue;
            s << (first ? "" : ", ") << kEq[e];
            first = false;
        }
        s << "]\n";
    }
    return s.str();
}

inline std::string render_iv_csv(const IvReport& report) {
    std::string s =
        "column,controls,first_stage,first_stage_se_hc0,first_stage_se_classical,theta,theta_se_hc0,"
        "theta_se_classical,weak_instrument,control_names\n";
    for (const auto& c : report.columns) {
        const IvEstimate& e = c.estimate;
        std::string names;
        for (std::size_t k = 0; k < e.controls.size(); ++k) {
            if (k) names += ';';
            names += report.control_names[static_cast<std::size_t>(e.controls[k])];
        }
        s += c.label + ',' + std::to_string(e.controls.size()) + ',' + format_double(e.first_stage) + ',' +
             format_double(e.first_stage_se) + ',' + format_double(e.first_stage_se_classical) + ',' +
             format_double(e.theta) + ',' + format_double(e.theta_se) + ',' +
             format_double(e.theta_se_classical) + ',' + (e.weak_instrument ? "1" : "0") + ',' + names + '\n';
    }
    return s;
}

inline int cmd_iv(const IvArgs& args, std::ostream& out, std::ostream& err) {
    detail::check_input_path(args.input, "input");
    detail::check_input_path(args.roles, "roles");
    detail::check_output_path(args.output, "output");
    const json roles = detail::load_json(args.roles);
    const CsvTable table = read_csv(args.input);
    const IvReport report = run_iv(table, roles);
    out << render_iv_text(report);
    if (!args.output.empty()) write_atomic(args.output, render_iv_csv(report));
    bool weak = false;
    for (const auto& c : report.columns) weak = weak || c.estimate.weak_instrument;
    if (weak) err << "iv: weak first stage in at least one column\n";
    return kExitOk;
}

// ---- entry point ---------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Forward regression selection driven by robust t-tests"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo design and write MPEN/MSSS tables");
    simulate->add_option("--config", sim.config, "JSON grid configuration");
    simulate->add_option("--seed", sim.seed, "Master seed (u64)");
    simulate->add_option("--jobs", sim.jobs, "Worker threads (0: all cores)");
    simulate->add_option("--replications", sim.replications, "Override replications per cell");
    simulate->add_option("--out-csv", sim.out_csv, "CSV report path");
    simulate->add_option("--out-md", sim.out_md, "Markdown report path");
    simulate->add_flag("--full-grid", sim.full_grid, "Use the full 32-cell design");

    SelectArgs sel;
    auto* select = app.add_subcommand("select", "Forward selection on a CSV data set");
    select->add_option("--input", sel.input, "Input CSV")->required();
    select->add_option("--outcome", sel.outcome, "Outcome column name")->required();
    select->add_option("--policy", sel.policy, "f1, f2 or f3")->check(CLI::IsMember({"f1", "f2", "f3"}));
    select->add_option("--se", sel.se, "classical or white")->check(CLI::IsMember({"classical", "white"}));
    select->add_option("--alpha", sel.alpha, "Significance level");
    select->add_option("--ctau", sel.c_tau, "Threshold inflation for Forward I");
    select->add_flag("--intercept", sel.intercept, "Partial out an unpenalized intercept");
    select->add_option("--output", sel.output, "Trace CSV path (default: stdout)");

    IvArgs iv;
    auto* ivcmd = app.add_subcommand("iv", "Post-triple-selection IV estimation");
    ivcmd->add_option("--input", iv.input, "Input CSV")->required();
    ivcmd->add_option("--roles", iv.roles, "JSON role mapping")->required();
    ivcmd->add_option("--output", iv.output, "CSV report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, out, err);
        if (select->parsed()) return cmd_select(sel, out, err);
        return cmd_iv(iv, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return kExitError;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"fsel"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace fsel::cli
