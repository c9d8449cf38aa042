#pragma once

// Simulation design, per-replication evaluation of the six estimators and
// CSV / Markdown table emission.
//
// Design: x_i ~ N(0, Sigma) with Sigma_jk = .5^|j-k| (built by an AR(1)
// recursion), theta_j = b^(j-1), y_i = x_i' theta + sigma_i z_i with
// sigma_i = exp(rho * sum_j .75^(p-j) x_ij).

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "fsel/fselect.hpp"
#include "fsel/lassopath.hpp"
#include "fsel/numcore.hpp"

namespace fsel {

struct DgpConfig {
    Index n = 200;
    double c_p = 2.0;
    double b = 0.75;
    double rho = 0.0;
    std::uint64_t seed = 0;
    Index replications = 1;
    bool zero_signal = false;  // theta* = 0 (size experiments)

    Index p() const { return static_cast<Index>(std::llround(c_p * static_cast<double>(n))); }
};

inline void validate(const DgpConfig& config) {
    if (config.n < 10) fail(ErrorKind::InvalidArgument, "n must be at least 10");
    const double p = config.c_p * static_cast<double>(config.n);
    if (!(p >= 1.0) || std::abs(p - std::round(p)) > 1e-9) {
        fail(ErrorKind::InvalidArgument, "c_p * n must be a positive integer");
    }
    if (!(std::abs(config.b) < 1.0)) fail(ErrorKind::InvalidArgument, "|b| must be below 1");
    if (!std::isfinite(config.rho)) fail(ErrorKind::InvalidArgument, "rho must be finite");
    if (config.replications < 1) fail(ErrorKind::InvalidArgument, "replications must be >= 1");
}

struct SimSample {
    Matrix X;
    Vector theta_star;
    Vector sigma;
    Vector y;
    Vector f_star;
};

inline std::uint64_t checksum(const SimSample& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const double* data, Index count) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < static_cast<std::size_t>(count) * sizeof(double); ++i) {
            h = (h ^ bytes[i]) * 0x100000001b3ULL;
        }
    };
    feed(s.X.data(), s.X.size());
    feed(s.y.data(), s.y.size());
    return h;
}

inline Vector theta_star(const DgpConfig& config) {
    const Index p = config.p();
    Vector theta(p);
    double v = config.zero_signal ? 0.0 : 1.0;
    for (Index j = 0; j < p; ++j) {
        theta[j] = v;
        v *= config.b;
    }
    return theta;
}

inline SimSample gen_sample(const DgpConfig& config, Index replication) {
    validate(config);
    const Index n = config.n;
    const Index p = config.p();
    NormalStream z(mix_seed(config.seed, static_cast<std::uint64_t>(replication)));

    SimSample s;
    s.X.resize(n, p);
    const double innovation = std::sqrt(0.75);
    for (Index i = 0; i < n; ++i) {
        double prev = z();
        s.X(i, 0) = prev;
        for (Index j = 1; j < p; ++j) {
            prev = 0.5 * prev + innovation * z();
            s.X(i, j) = prev;
        }
    }
    s.theta_star = theta_star(config);
    s.f_star = s.X * s.theta_star;

    // Weights .75^(p-j) for j = 1..p, i.e. the last column has weight 1.
    Vector w(p);
    double wj = 1.0;
    for (Index j = p - 1; j >= 0; --j) {
        w[j] = wj;
        wj *= 0.75;
    }
    s.sigma = (config.rho * (s.X * w)).array().exp();
    s.y.resize(n);
    for (Index i = 0; i < n; ++i) s.y[i] = s.f_star[i] + s.sigma[i] * z();
    return s;
}

enum class Estimator { ForwardI, ForwardII, ForwardIII, Lasso, PostLasso, Oracle };

inline constexpr Estimator kAllEstimators[] = {Estimator::ForwardI,  Estimator::ForwardII,
                                               Estimator::ForwardIII, Estimator::Lasso,
                                               Estimator::PostLasso, Estimator::Oracle};

inline const char* to_string(Estimator e) {
    switch (e) {
    case Estimator::ForwardI: return "Forward I";
    case Estimator::ForwardII: return "Forward II";
    case Estimator::ForwardIII: return "Forward III";
    case Estimator::Lasso: return "Lasso";
    case Estimator::PostLasso: return "Post-Lasso";
    case Estimator::Oracle: return "Oracle";
    }
    return "?";
}

inline std::optional<Estimator> parse_estimator(std::string_view s) {
    for (Estimator e : kAllEstimators) {
        if (s == to_string(e)) return e;
    }
    if (s == "forward1" || s == "f1") return Estimator::ForwardI;
    if (s == "forward2" || s == "f2") return Estimator::ForwardII;
    if (s == "forward3" || s == "f3") return Estimator::ForwardIII;
    if (s == "lasso") return Estimator::Lasso;
    if (s == "post-lasso" || s == "postlasso") return Estimator::PostLasso;
    if (s == "oracle") return Estimator::Oracle;
    return std::nullopt;
}

inline SelectedModel oracle_fit(const SimSample& sample) {
    const double cutoff = 1.0 / std::sqrt(static_cast<double>(sample.X.rows()));
    IndexList support;
    for (Index j = 0; j < sample.theta_star.size(); ++j) {
        if (std::abs(sample.theta_star[j]) > cutoff) support.push_back(j);
    }
    return refit(sample.X, sample.y, support);
}

inline double mpen(const Eigen::Ref<const Vector>& f_star, const Eigen::Ref<const Vector>& fitted) {
    if (f_star.size() != fitted.size()) {
        fail(ErrorKind::DimensionMismatch, "fitted values have the wrong length");
    }
    return std::sqrt((f_star - fitted).squaredNorm() / static_cast<double>(f_star.size()));
}

inline double mpen(const SimSample& sample, const SelectedModel& model) {
    return mpen(sample.f_star, model.fitted);
}

struct MonteCarloOptions {
    std::vector<Estimator> estimators{std::begin(kAllEstimators), std::end(kAllEstimators)};
    std::vector<SeKind> se_kinds{SeKind::Classical, SeKind::White};
    double alpha = 0.05;
    double c_tau = 1.1;
    LassoConfig lasso{};
    unsigned jobs = 1;  // 0: hardware concurrency
};

struct CellKey {
    Index n = 0;
    double c_p = 0.0;
    Index p = 0;
    double b = 0.0;
    double rho = 0.0;
    SeKind se = SeKind::Classical;
    std::uint64_t seed = 0;
    Index replications = 0;
    bool zero_signal = false;
};

struct TableRow {
    CellKey cell;
    std::string estimator;
    double mpen = 0.0;
    double msss = 0.0;
    Index failures = 0;
};

struct Diagnostics {
    Index lasso_fits = 0;
    double max_kkt_violation = 0.0;
    bool objectives_monotone = true;
    bool lasso_converged = true;
    bool samples_unchanged = true;
    Index failures = 0;
};

struct TableReport {
    std::vector<TableRow> rows;
    Diagnostics diagnostics;
};

namespace detail {

struct ReplicationResult {
    // [se_kind index][estimator index]
    std::vector<std::vector<double>> mpen;
    std::vector<std::vector<double>> size;
    std::vector<std::vector<bool>> ok;
    Diagnostics diag;
};

inline bool monotone(const std::vector<double>& path) {
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (path[i] > path[i - 1] + 1e-12 * std::max(1.0, std::abs(path[i - 1]))) return false;
    }
    return true;
}

inline ReplicationResult run_replication(const DgpConfig& config, Index replication,
                                         const MonteCarloOptions& options) {
    const SimSample sample = gen_sample(config, replication);
    const std::uint64_t before = checksum(sample);
    const std::size_t n_se = options.se_kinds.size();
    const std::size_t n_est = options.estimators.size();

    ReplicationResult out;
    out.mpen.assign(n_se, std::vector<double>(n_est, 0.0));
    out.size.assign(n_se, std::vector<double>(n_est, 0.0));
    out.ok.assign(n_se, std::vector<bool>(n_est, false));

    auto wants = [&](Estimator e) {
        return std::find(options.estimators.begin(), options.estimators.end(), e) !=
               options.estimators.end();
    };
    auto slot = [&](Estimator e) {
        return static_cast<std::size_t>(
            std::find(options.estimators.begin(), options.estimators.end(), e) -
            options.estimators.begin());
    };
    auto record = [&](std::size_t s, Estimator e, const SelectedModel& model) {
        const std::size_t k = slot(e);
        out.mpen[s][k] = mpen(sample, model);
        out.size[s][k] = static_cast<double>(model.support.size());
        out.ok[s][k] = true;
    };

    std::optional<SelectedModel> oracle;
    for (std::size_t s = 0; s < n_se; ++s) {
        const SeKind kind = options.se_kinds[s];
        for (Estimator e : {Estimator::ForwardI, Estimator::ForwardII, Estimator::ForwardIII}) {
            if (!wants(e)) continue;
            try {
                SelectionConfig sc;
                sc.alpha = options.alpha;
                sc.c_tau = options.c_tau;
                sc.se_kind = kind;
                sc.policy = e == Estimator::ForwardI    ? Policy::ForwardI
                            : e == Estimator::ForwardII ? Policy::ForwardII
                                                        : Policy::ForwardIII;
                const SelectionTrace trace = forward_select(sample.X, sample.y, sc);
                record(s, e, refit(sample.X, sample.y, trace));
            } catch (const Error&) {
                ++out.diag.failures;
            }
        }
        if (wants(Estimator::Lasso) || wants(Estimator::PostLasso)) {
            try {
                LassoConfig lc = options.lasso;
                lc.alpha = options.alpha;
                lc.c_tau = options.c_tau;
                lc.loadings = kind;
                const BcchFit fit = bcch_fit(sample.X, sample.y, lc);
                ++out.diag.lasso_fits;
                out.diag.max_kkt_violation =
                    std::max(out.diag.max_kkt_violation, fit.lasso.max_kkt_violation);
                out.diag.objectives_monotone =
                    out.diag.objectives_monotone && monotone(fit.lasso.objective_path);
                out.diag.lasso_converged = out.diag.lasso_converged && fit.lasso.converged;
                if (wants(Estimator::Lasso)) {
                    SelectedModel lasso_model;
                    lasso_model.support = fit.lasso.support;
                    lasso_model.fitted = sample.X * fit.lasso.coef;
                    record(s, Estimator::Lasso, lasso_model);
                }
                if (wants(Estimator::PostLasso)) record(s, Estimator::PostLasso, fit.post);
            } catch (const Error&) {
                ++out.diag.failures;
            }
        }
        if (wants(Estimator::Oracle)) {
            try {
                if (!oracle) oracle = oracle_fit(sample);
                record(s, Estimator::Oracle, *oracle);
            } catch (const Error&) {
                ++out.diag.failures;
            }
        }
    }
    out.diag.samples_unchanged = checksum(sample) == before;
    return out;
}

}  // namespace detail

// Runs every replication of every grid cell. Replications are distributed
// over `options.jobs` threads; aggregation runs in replication order, so the
// report does not depend on the thread count.
inline TableReport run_montecarlo(const std::vector<DgpConfig>& grid,
                                  const MonteCarloOptions& options) {
    TableReport report;
    unsigned jobs = options.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : options.jobs;

    for (const DgpConfig& config : grid) {
        validate(config);
        const Index reps = config.replications;
        std::vector<detail::ReplicationResult> results(static_cast<std::size_t>(reps));
        std::atomic<Index> next{0};
        auto worker = [&] {
            for (Index r = next++; r < reps; r = next++) {
                results[static_cast<std::size_t>(r)] = detail::run_replication(config, r, options);
            }
        };
        const unsigned threads = static_cast<unsigned>(std::min<Index>(jobs, reps));
        if (threads <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        }

        for (std::size_t s = 0; s < options.se_kinds.size(); ++s) {
            for (std::size_t k = 0; k < options.estimators.size(); ++k) {
                double sum_mpen = 0.0;
                double sum_size = 0.0;
                Index good = 0;
                for (const auto& r : results) {
                    if (!r.ok[s][k]) continue;
                    sum_mpen += r.mpen[s][k];
                    sum_size += r.size[s][k];
                    ++good;
                }
                TableRow row;
                row.cell = {config.n,   config.c_p, config.p(),    config.b,
                            config.rho, options.se_kinds[s], config.seed, reps,
                            config.zero_signal};
                row.estimator = to_string(options.estimators[k]);
                row.failures = reps - good;
                row.mpen = good > 0 ? sum_mpen / static_cast<double>(good) : 0.0;
                row.msss = good > 0 ? sum_size / static_cast<double>(good) : 0.0;
                report.rows.push_back(std::move(row));
            }
        }
        for (const auto& r : results) {
            auto& d = report.diagnostics;
            d.lasso_fits += r.diag.lasso_fits;
            d.max_kkt_violation = std::max(d.max_kkt_violation, r.diag.max_kkt_violation);
            d.objectives_monotone = d.objectives_monotone && r.diag.objectives_monotone;
            d.lasso_converged = d.lasso_converged && r.diag.lasso_converged;
            d.samples_unchanged = d.samples_unchanged && r.diag.samples_unchanged;
            d.failures += r.diag.failures;
        }
    }
    return report;
}

// ---- table emission ------------------------------------------------------

enum class TableFormat { Csv, Markdown };

inline constexpr std::string_view kReportCsvHeader =
    "n,c_p,p,b,rho,zero_signal,se,seed,replications,failures,estimator,mpen,msss";

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string render_csv(const TableReport& report) {
    std::string out(kReportCsvHeader);
    out += '\n';
    for (const TableRow& row : report.rows) {
        const CellKey& c = row.cell;
        out += std::to_string(c.n) + ',' + format_double(c.c_p) + ',' + std::to_string(c.p) + ',' +
               format_double(c.b) + ',' + format_double(c.rho) + ',' +
               (c.zero_signal ? "1" : "0") + ',' + to_string(c.se) + ',' +
               std::to_string(c.seed) + ',' + std::to_string(c.replications) + ',' +
               std::to_string(row.failures) + ',' + row.estimator + ',' +
               format_double(row.mpen) + ',' + format_double(row.msss) + '\n';
    }
    return out;
}

inline std::string render_markdown(const TableReport& report) {
    std::string out = "# Forward selection simulation results\n";
    using DgpKey = std::tuple<Index, double, double, double, bool, std::uint64_t, Index>;
    std::vector<DgpKey> order;
    std::map<DgpKey, std::vector<const TableRow*>> groups;
    for (const TableRow& row : report.rows) {
        const CellKey& c = row.cell;
        DgpKey key{c.n, c.c_p, c.b, c.rho, c.zero_signal, c.seed, c.replications};
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&row);
    }
    for (const DgpKey& key : order) {
        const auto& rows = groups[key];
        const CellKey& c = rows.front()->cell;
        std::vector<SeKind> kinds;
        std::vector<std::string> estimators;
        for (const TableRow* r : rows) {
            if (std::find(kinds.begin(), kinds.end(), r->cell.se) == kinds.end()) {
                kinds.push_back(r->cell.se);
            }
            if (std::find(estimators.begin(), estimators.end(), r->estimator) == estimators.end()) {
                estimators.push_back(r->estimator);
            }
        }
        out += "\n## n = " + std::to_string(c.n) + ", p = " + std::to_string(c.p) +
               ", theta_j = " + (c.zero_signal ? std::string("0") : "(" + format_double(c.b) + ")^(j-1)") +
               ", rho = " + format_double(c.rho) + ", replications: " +
               std::to_string(c.replications) + ", seed: " + std::to_string(c.seed) + "\n\n";
        out += "| Estimator |";
        std::string rule = "|---|";
        for (SeKind k : kinds) {
            const std::string label = k == SeKind::Classical ? "Classical S.E." : "White S.E.";
            out += ' ' + label + " MPEN | " + label + " MSSS |";
            rule += "---:|---:|";
        }
        out += '\n' + rule + '\n';
        for (const std::string& est : estimators) {
            out += "| " + est + " |";
            for (SeKind k : kinds) {
                const TableRow* hit = nullptr;
                for (const TableRow* r : rows) {
                    if (r->estimator == est && r->cell.se == k) hit = r;
                }
                if (hit) {
                    out += ' ' + format_fixed(hit->mpen, 2) + " | " + format_fixed(hit->msss, 2) + " |";
                } else {
                    out += " | |";
                }
            }
            out += '\n';
        }
    }
    return out;
}

}  // namespace detail

inline std::string emit_table(const TableReport& report, TableFormat format) {
    return format == TableFormat::Csv ? detail::render_csv(report)
                                      : detail::render_markdown(report);
}

namespace detail {

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
    T value{};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        fail(ErrorKind::Parse, "line " + std::to_string(line) + ": bad number '" +
                                   std::string(field) + "'");
    }
    return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

// Inverse of the CSV emitter.
inline TableReport parse_report_csv(std::string_view text) {
    TableReport report;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const std::size_t eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kReportCsvHeader) {
                fail(ErrorKind::Parse, "line 1: unexpected report header");
            }
            header_seen = true;
            continue;
        }
        const auto f = detail::split(line, ',');
        if (f.size() != 13) {
            fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected 13 fields");
        }
        TableRow row;
        row.cell.n = detail::parse_number<Index>(f[0], line_no);
        row.cell.c_p = detail::parse_number<double>(f[1], line_no);
        row.cell.p = detail::parse_number<Index>(f[2], line_no);
        row.cell.b = detail::parse_number<double>(f[3], line_no);
        row.cell.rho = detail::parse_number<double>(f[4], line_no);
        row.cell.zero_signal = detail::parse_number<int>(f[5], line_no) != 0;
        if (f[6] == "classical") {
            row.cell.se = SeKind::Classical;
        } else if (f[6] == "white") {
            row.cell.se = SeKind::White;
        } else {
            fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": bad se kind");
        }
        row.cell.seed = detail::parse_number<std::uint64_t>(f[7], line_no);
        row.cell.replications = detail::parse_number<Index>(f[8], line_no);
        row.failures = detail::parse_number<Index>(f[9], line_no);
        row.estimator = std::string(f[10]);
        if (std::none_of(std::begin(kAllEstimators), std::end(kAllEstimators),
                         [&](Estimator e) { return row.estimator == to_string(e); })) {
            fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": unknown estimator '" + row.estimator + "'");
        }
        if (row.failures < 0 || row.failures > row.cell.replications) {
            fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": failure count out of range");
        }
        row.mpen = detail::parse_number<double>(f[11], line_no);
        row.msss = detail::parse_number<double>(f[12], line_no);
        report.rows.push_back(std::move(row));
    }
    return report;
}

// Full design grid: n in {100, 200}, c_p in {.5, 2}, rho in {0, .5},
// b in {.75, .5, -.5, -.75}.
inline std::vector<DgpConfig> full_grid(std::uint64_t seed, Index replications) {
    std::vector<DgpConfig> grid;
    for (Index n : {100, 200}) {
        for (double c_p : {0.5, 2.0}) {
            for (double rho : {0.0, 0.5}) {
                for (double b : {0.75, 0.5, -0.5, -0.75}) {
                    grid.push_back({n, c_p, b, rho, seed, replications, false});
                }
            }
        }
    }
    return grid;
}

}  // namespace fsel
