// qfid: batch front end writing CSV.
// Exit codes: 0 ok, 2 validation, 3 numerical accuracy, 4 out-of-region.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qfid/scaling.hpp"

using namespace qfid;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Args {
    std::string command;
    std::string model = "sym";
    double mu = 0.0;
    double j = 1.0;
    int l = 64;
    std::vector<double> deltas{1e-3};
    std::vector<double> cs{0.0};
    std::string e = "mu";
    std::string region;
    std::string out = "-";
    int threads = 1;
    std::string schedule = "step4";
    int l_min = 8;
    int l_max = 64;
    int l_star = 10000;
    double delta_min = 1e-4;
    double delta_max = 1e-1;
    int per_decade = 12;
    std::string dir = "diag";
    double r_min = 1;
    double r_max = 20;
    std::string method = "limit";
    double abs_tol = 1e-9;
    std::string in = "-";
    int x_col = 0;
    int y_col = 1;
    double x_min = 0;
    double x_max = kInf;
    std::string nu_mode = "none";
    int regimes = 2;
    std::string mu_grid = "-3:3:13";
    std::string j_grid = "-2:2:9";
    std::string detail = "none";
    bool quiet = false;
    bool dry_run = false;
};

std::string num(double v) {
    if (v == 0.0) v = 0.0; // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Buffered; nothing is written unless the command completes.
class Csv {
public:
    void comment(const std::string& s) { buf_ += "# " + s + "\n"; }
    void cells(const std::vector<std::string>& c) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (i) buf_ += ',';
            buf_ += c[i];
        }
        buf_ += '\n';
    }
    void row(const std::vector<double>& v) {
        std::vector<std::string> c;
        for (double x : v) c.push_back(num(x));
        cells(c);
    }
    void write(const std::string& path) const {
        std::FILE* f = path == "-" ? stdout : std::fopen(path.c_str(), "wb");
        if (!f) throw ValidationError("invalid-output", "cannot open " + path);
        const bool ok = std::fwrite(buf_.data(), 1, buf_.size(), f) == buf_.size();
        if (f != stdout) std::fclose(f);
        else std::fflush(f);
        if (!ok) throw ValidationError("invalid-output", "short write to " + path);
    }

private:
    std::string buf_;
};

std::string list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
    return s;
}

std::string spec_line(const Args& a) {
    std::ostringstream s;
    s << "qfid " << a.command << " model=" << a.model << " mu=" << num(a.mu) << " j=" << num(a.j) << " L=" << a.l
      << " delta=" << list(a.deltas) << " c=" << list(a.cs) << " e=" << a.e << " region=" << (a.region.empty() ? "-" : a.region)
      << " threads=" << a.threads << " schedule=" << a.schedule << " L-min=" << a.l_min << " L-max=" << a.l_max
      << " L-star=" << a.l_star << " delta-min=" << num(a.delta_min) << " delta-max=" << num(a.delta_max)
      << " per-decade=" << a.per_decade << " dir=" << a.dir << " r-min=" << num(a.r_min) << " r-max=" << num(a.r_max)
      << " method=" << a.method << " abs-tol=" << num(a.abs_tol) << " in=" << a.in << " x-col=" << a.x_col
      << " y-col=" << a.y_col << " x-min=" << num(a.x_min) << " x-max=" << num(a.x_max) << " nu-mode=" << a.nu_mode
      << " regimes=" << a.regimes << " mu-grid=" << a.mu_grid << " j-grid=" << a.j_grid << " detail=" << a.detail;
    return s.str();
}

ModelVariant parse_model(const std::string& m) {
    if (m == "sym") return ModelVariant::Symmetric;
    if (m == "antisym") return ModelVariant::Antisymmetric;
    throw ValidationError("invalid-model", "model must be sym or antisym, got " + m);
}

// diag11 is e = (1,1): delta = mu = J, i.e. the unit vector with delta scaled by sqrt 2
struct Path {
    UnitVector e;
    double scale = 1.0;
};

Path parse_path(const std::string& e) {
    if (e == "mu") return {path_mu()};
    if (e == "j") return {path_j()};
    if (e == "diag45") return {path_diag45()};
    if (e == "diag11") return {path_diag45(), std::numbers::sqrt2};
    throw ValidationError("invalid-direction", "e must be mu, j, diag45 or diag11, got " + e);
}

double scalar(const std::vector<double>& v, const char* name) {
    if (v.size() != 1) throw ValidationError("invalid-parameter", std::string("this command takes one --") + name);
    return v[0];
}

CriticalRegion parse_region(const std::string& r) {
    for (auto cr : {CriticalRegion::SymMuZeroLine, CriticalRegion::SymJZeroSegment, CriticalRegion::SymEndPoint,
                    CriticalRegion::SymMulticritical, CriticalRegion::AntiMuEdge})
        if (r == region_name(cr)) return cr;
    throw ValidationError("unknown-region",
                          "region must be sym-mu0, sym-j0, sym-endpoint, sym-mcp or anti-edge, got '" + r + "'");
}

Direction parse_dir(const std::string& d) {
    if (d == "axial") return Direction::axial();
    if (d == "diag") return Direction::diagonal();
    try {
        std::size_t pos = 0;
        const double n = std::stod(d, &pos);
        if (pos == d.size() && n > 0 && std::isfinite(n)) return Direction::ray(n);
    } catch (const std::exception&) {
    }
    throw ValidationError("invalid-direction", "dir must be axial, diag or a positive ratio n, got " + d);
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            v.push_back(std::stoi(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ValidationError("invalid-schedule", "bad entry '" + tok + "'");
        }
    }
    return v;
}

std::vector<int> parse_schedule(const Args& a) {
    const auto& s = a.schedule;
    if (s == "step4") return l_schedule_step4(a.l_min, a.l_max);
    if (s == "fig3") return l_schedule_fig3(a.l_min, a.l_max, a.l_star);
    if (s == "log") return l_schedule_log(a.l_min, a.l_max);
    if (s.rfind("log:", 0) == 0) return l_schedule_log(a.l_min, a.l_max, parse_int_list(s.substr(4)).at(0));
    if (s.rfind("custom:", 0) == 0) {
        auto v = parse_int_list(s.substr(7));
        validate_schedule(v);
        return v;
    }
    throw ValidationError("invalid-schedule", "schedule must be step4, fig3, log[:n] or custom:L1,L2,..., got " + s);
}

// lo:hi:n, n >= 1 points inclusive
std::vector<double> parse_grid(const std::string& g) {
    std::vector<double> parts;
    std::stringstream ss(g);
    std::string tok;
    try {
        while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
    } catch (const std::exception&) {
        throw ValidationError("invalid-grid", "grid must be lo:hi:n, got " + g);
    }
    if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2]))
        throw ValidationError("invalid-grid", "grid must be lo:hi:n, got " + g);
    const int n = static_cast<int>(parts[2]);
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? parts[0] : parts[0] + (parts[1] - parts[0]) * i / (n - 1));
    return v;
}

ScalingSeries read_series(const Args& a) {
    std::ifstream file;
    std::istream* is = &std::cin;
    if (a.in != "-") {
        file.open(a.in);
        if (!file) throw ValidationError("invalid-input", "cannot open " + a.in);
        is = &file;
    }
    ScalingSeries s;
    std::string line;
    bool header = true;
    const int need = std::max(a.x_col, a.y_col);
    while (std::getline(*is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) f.push_back(tok);
        if (static_cast<int>(f.size()) <= need) throw ValidationError("invalid-input", "short row: " + line);
        try {
            const double x = std::stod(f[static_cast<std::size_t>(a.x_col)]);
            const double y = std::stod(f[static_cast<std::size_t>(a.y_col)]);
            s.x.push_back(x);
            s.y.push_back(y);
        } catch (const std::exception&) {
            if (!header || !s.x.empty()) throw ValidationError("invalid-input", "non-numeric row: " + line);
        }
        header = false;
    }
    if (s.x.empty()) throw ValidationError("invalid-input", "no data rows");
    return s;
}

CriticalNeighborhood neighborhood(const Args& a, double c, double delta) {
    const auto p = parse_path(a.e);
    CriticalNeighborhood nb{{a.mu, a.j}, p.e, c, delta * p.scale};
    nb.validate();
    if (delta < 0) throw ValidationError("invalid-parameter", "delta must be nonnegative");
    return nb;
}

Progress progress(const Args& a) {
    if (a.quiet) return {};
    return [](std::size_t done, std::size_t total) { std::fprintf(stderr, "progress %zu/%zu\n", done, total); };
}

void check_common(const Args& a) {
    if (a.threads < 1) throw ValidationError("invalid-parameter", "threads must be >= 1");
}

// ---- commands ----

void cmd_sweep_l(const Args& a, Csv& out) {
    const auto ls = parse_schedule(a);
    const auto v = parse_model(a.model);
    out.cells({"c", "delta", "L", "neg_log_f", "on_step4"});
    for (double c : a.cs)
        for (double delta : a.deltas) {
            const auto sw = sweep_vs_l(neighborhood(a, c, delta), v, {}, ls, a.threads, a.l_star, progress(a));
            std::size_t k = 0;
            for (std::size_t i = 0; i < sw.raw.size(); ++i) {
                const bool s4 = k < sw.step4.size() && sw.step4.x[k] == sw.raw.x[i];
                if (s4) ++k;
                out.row({c, delta, sw.raw.x[i], sw.raw.y[i], s4 ? 1.0 : 0.0});
            }
        }
}

void cmd_sweep_delta(const Args& a, Csv& out) {
    const auto grid = log_delta_grid(a.delta_min, a.delta_max, a.per_decade);
    const double scale = parse_path(a.e).scale;
    std::vector<double> scaled;
    for (double d : grid) scaled.push_back(d * scale);
    out.cells({"c", "delta", "neg_log_f"});
    for (double c : a.cs) {
        const auto s = sweep_vs_delta(neighborhood(a, c, grid.front()), parse_model(a.model), {}, a.l, scaled,
                                      a.threads, progress(a));
        for (std::size_t i = 0; i < s.size(); ++i) out.row({c, grid[i], s.y[i]});
    }
}

void cmd_corr_scan(const Args& a, Csv& out) {
    const auto v = parse_model(a.model);
    const auto pts = ray_points(parse_dir(a.dir), a.r_min, a.r_max, nullptr);
    std::vector<double> g, h;
    if (a.method == "limit") {
        CorrelationLimitOptions o;
        o.abs_tol = a.abs_tol;
        g = correlation_limit_batch(CorrelationKind::G, v, a.mu, a.j, pts, o);
        h = correlation_limit_batch(CorrelationKind::H, v, a.mu, a.j, pts, o);
    } else if (a.method == "finite") {
        ModelParams p{v, a.mu, a.j, a.l, {}};
        p.validate();
        for (const auto& s : correlations_finite(p, pts, a.threads)) {
            g.push_back(s.g_value);
            h.push_back(s.h_value);
        }
    } else {
        throw ValidationError("invalid-method", "method must be limit or finite, got " + a.method);
    }
    out.cells({"r1", "r2", "r", "G", "h"});
    for (std::size_t i = 0; i < pts.size(); ++i)
        out.row({double(pts[i].r1), double(pts[i].r2), std::hypot(pts[i].r1, pts[i].r2), g[i], h[i]});
}

void cmd_asym_compare(const Args& a, Csv& out) {
    const auto region = parse_region(a.region);
    const auto d = parse_dir(a.dir);
    if (d.kind == Direction::Kind::Axial)
        throw OutOfRegionError("direction-out-of-validity", "no closed-form G prediction on the axis");
    const auto pts = ray_points(d, a.r_min, a.r_max, nullptr);
    CorrelationLimitOptions o;
    o.abs_tol = a.abs_tol;
    const auto g = correlation_limit_batch(CorrelationKind::G, region_variant(region), a.mu, a.j, pts, o);
    out.cells({"r1", "r2", "r", "G", "G_pred", "envelope", "xi", "theta"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double r = std::hypot(pts[i].r1, pts[i].r2);
        const auto p = d.kind == Direction::Kind::Diagonal ? predict_g_diagonal(region, a.mu, a.j, pts[i].r1)
                                                           : predict_g_offdiagonal(region, a.mu, a.j, d.n, r);
        out.row({double(pts[i].r1), double(pts[i].r2), r, g[i], p.value.value_or(nan), p.envelope, p.xi, p.theta});
    }
}

void cmd_fit(const Args& a, Csv& out) {
    const auto s = read_series(a);
    const auto f = fit_power_law(s, {a.x_min, a.x_max});
    double nu = std::numeric_limits<double>::quiet_NaN(), anomalous = 0, drift = 0;
    if (a.nu_mode == "small") {
        nu = extract_nu_small_system(f);
    } else if (a.nu_mode == "macro") {
        const auto m = extract_nu_macroscopic(s, {a.x_min, a.x_max});
        nu = m.nu;
        anomalous = m.anomalous;
        drift = m.slope_drift;
    } else if (a.nu_mode != "none") {
        throw ValidationError("invalid-parameter", "nu-mode must be none, small or macro");
    }
    out.cells({"slope", "intercept", "slope_stderr", "r_squared", "n_points", "x_lo", "x_hi", "nu", "anomalous",
               "slope_drift"});
    out.row({f.slope, f.intercept, f.slope_stderr, f.r_squared, double(f.n_points), f.window.first, f.window.second,
             nu, anomalous, drift});
}

void cmd_crossover(const Args& a, Csv& out) {
    auto s = read_series(a);
    s.axis = SeriesAxis::VsL;
    s.nb = neighborhood(a, scalar(a.cs, "c"), scalar(a.deltas, "delta"));
    s.variant = parse_model(a.model);
    auto rep = detect_crossovers(s, a.regimes);
    if (!a.region.empty()) attach_reference_lengths(rep, parse_region(a.region), s);
    out.comment(std::string("collapsed=") + (rep.collapsed ? "1" : "0") + " total_r_squared=" + num(rep.total_r_squared));
    out.cells({"regime", "x_lo", "x_hi", "slope", "r_squared", "breakpoint", "reference", "reference_length"});
    for (std::size_t i = 0; i < rep.regime_fits.size(); ++i) {
        const auto& f = rep.regime_fits[i];
        std::vector<std::string> c{std::to_string(i), num(f.window.first), num(f.window.second), num(f.slope),
                                   num(f.r_squared)};
        if (i < rep.locations.size()) {
            c.push_back(num(rep.locations[i]));
            if (i < rep.reference_lengths.size()) {
                c.push_back(rep.reference_lengths[i].first);
                c.push_back(num(rep.reference_lengths[i].second));
            } else {
                c.insert(c.end(), {"", ""});
            }
        } else {
            c.insert(c.end(), {"", "", ""});
        }
        out.cells(c);
    }
}

// detail a: y = -4 ln F / (delta L)^2 per L; detail b: (y - a) / (delta L)^2
void cmd_mcp(const Args& a, Csv& out, bool schedule_given) {
    const auto v = parse_model(a.model);
    if (a.detail == "none")
        out.cells({"c", "delta", "a", "b", "odd_ratio", "a_expected", "b_expected", "n_sizes"});
    else if (a.detail == "a" || a.detail == "b")
        out.cells({"c", "delta", "L", a.detail == "a" ? "y_a" : "y_b"});
    else
        throw ValidationError("invalid-parameter", "detail must be none, a or b");
    for (double c : a.cs)
        for (double delta : a.deltas) {
            std::vector<int> ls;
            if (a.detail == "none" && schedule_given) ls = parse_schedule(a);
            const auto m = mcp_expansion_coefficients(c, delta, ls, v, a.threads);
            if (a.detail == "none") {
                out.row({c, delta, m.a, m.b, m.odd_ratio, 2 - (4 * c * c + 1) * delta * delta, 5 * c * c + 1,
                         double(m.l_grid.size())});
                continue;
            }
            for (int l : schedule_given ? parse_schedule(a) : m.l_grid) {
                const PhasePoint s1{(c - 1) * delta, (c - 1) * delta}, s2{(c + 1) * delta, (c + 1) * delta};
                const double dl = delta * l;
                const double y = 4 * neg_log_fidelity_states(v, s1, s2, l, {}, a.threads).neg_log_f / (dl * dl);
                out.row({c, delta, double(l), a.detail == "a" ? y : (y - m.a) / (dl * dl)});
            }
        }
}

void cmd_identities(const Args& a, Csv& out, bool schedule_given) {
    const std::vector<int> ls = schedule_given ? parse_schedule(a) : std::vector<int>{a.l};
    out.cells({"L", "sum_inv_p", "sum_inv_p2"});
    for (int l : ls) {
        const auto s = brillouin_identities(l, {}, a.threads);
        out.row({double(l), s.sum_inv_p, s.sum_inv_p2});
    }
}

void cmd_phase_scan(const Args& a, Csv& out) {
    const auto v = parse_model(a.model);
    const auto mus = parse_grid(a.mu_grid), js = parse_grid(a.j_grid);
    out.cells({"mu", "J", "O1", "O2"});
    std::size_t done = 0;
    for (double mu : mus)
        for (double j : js) {
            ModelParams p{v, mu, j, a.l, {}};
            p.validate();
            const auto o = order_parameters(p, a.threads);
            out.row({mu, j, o.o1, o.o2});
            if (!a.quiet) std::fprintf(stderr, "progress %zu/%zu\n", ++done, mus.size() * js.size());
        }
}

} // namespace

int main(int argc, char** argv) {
    Args a;
    CLI::App app{"qfid: fidelity, correlation and scaling experiments for 2D quasifree fermions"};
    app.fallthrough();
    app.require_subcommand(1, 1);
    app.set_config("--config", "", "INI/TOML file with option values; command-line flags take precedence");
    app.allow_config_extras(false);

    app.add_option("--model", a.model, "sym | antisym")->capture_default_str();
    app.add_option("--mu", a.mu, "mu (critical point lambda_c for sweeps, state point otherwise)")->capture_default_str();
    app.add_option("--j", a.j, "J (as for --mu)")->capture_default_str();
    app.add_option("--L", a.l, "linear size (even)")->capture_default_str();
    app.add_option("--delta", a.deltas, "deviation delta; a list for fidelity-sweep-l and mcp-coeffs")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--c", a.cs, "offset multiplier c; a list for sweeps and mcp-coeffs")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--e", a.e, "approach direction: mu | j | diag45 | diag11 (mu = J = delta)")->capture_default_str();
    app.add_option("--region", a.region, "sym-mu0 | sym-j0 | sym-endpoint | sym-mcp | anti-edge");
    app.add_option("--out", a.out, "CSV output path, - for stdout")->capture_default_str();
    app.add_option("--threads", a.threads, "worker threads; 1 is the reference path")->capture_default_str();
    auto* sched = app.add_option("--schedule", a.schedule, "step4 | fig3 | log[:per-decade] | custom:L1,L2,...")
                      ->capture_default_str();
    app.add_option("--L-min", a.l_min)->capture_default_str();
    app.add_option("--L-max", a.l_max)->capture_default_str();
    app.add_option("--L-star", a.l_star, "fig3 schedule: step-4 below, 5% steps above")->capture_default_str();
    app.add_option("--delta-min", a.delta_min)->capture_default_str();
    app.add_option("--delta-max", a.delta_max)->capture_default_str();
    app.add_option("--per-decade", a.per_decade, "delta grid density")->capture_default_str();
    app.add_option("--dir", a.dir, "ray: axial | diag | n = r1/r2")->capture_default_str();
    app.add_option("--r-min", a.r_min)->capture_default_str();
    app.add_option("--r-max", a.r_max)->capture_default_str();
    app.add_option("--method", a.method, "corr-scan: limit | finite (uses --L)")->capture_default_str();
    app.add_option("--abs-tol", a.abs_tol, "quadrature absolute tolerance")->capture_default_str();
    app.add_option("--in", a.in, "input CSV for fit/crossover, - for stdin")->capture_default_str();
    app.add_option("--x-col", a.x_col)->capture_default_str();
    app.add_option("--y-col", a.y_col)->capture_default_str();
    app.add_option("--x-min", a.x_min)->capture_default_str();
    app.add_option("--x-max", a.x_max)->capture_default_str();
    app.add_option("--nu-mode", a.nu_mode, "fit: none | small | macro")->capture_default_str();
    app.add_option("--regimes", a.regimes, "crossover: 2 | 3")->capture_default_str();
    app.add_option("--mu-grid", a.mu_grid, "phase-scan: lo:hi:n")->capture_default_str();
    app.add_option("--j-grid", a.j_grid, "phase-scan: lo:hi:n")->capture_default_str();
    app.add_option("--detail", a.detail, "mcp-coeffs: none | a | b (per-L curves)")->capture_default_str();
    app.add_flag("--quiet", a.quiet, "no progress on stderr");
    app.add_flag("--dry-run", a.dry_run, "validate the spec, print its comment line and the schedule or grid, run nothing");

    const std::vector<std::pair<const char*, const char*>> cmds = {
        {"fidelity-sweep-l", "-ln F versus L at fixed delta"},
        {"fidelity-sweep-delta", "-ln F versus delta at fixed L"},
        {"corr-scan", "G and h along a lattice ray"},
        {"asym-compare", "G from quadrature against the regional asymptotic form"},
        {"fit", "power-law fit of a two-column CSV"},
        {"crossover", "piecewise power-law breakpoints of a VsL CSV"},
        {"mcp-coeffs", "small delta L expansion coefficients at the multicritical point"},
        {"identities", "Brillouin-zone sums of 1/p and 1/p^2"},
        {"phase-scan", "order parameters O1, O2 on a (mu, J) grid"},
    };
    for (const auto& [name, help] : cmds) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "qfid: %s\n", e.what());
        return 2;
    }
    a.command = app.get_subcommands().front()->get_name();

    try {
        check_common(a);
        Csv out;
        out.comment(spec_line(a));
        const auto& c = a.command;
        if (a.dry_run) {
            parse_model(a.model);
            if (c == "fidelity-sweep-l" || sched->count() > 0) out.cells({"n_sizes", std::to_string(parse_schedule(a).size())});
            if (c == "fidelity-sweep-delta")
                out.cells({"n_deltas", std::to_string(log_delta_grid(a.delta_min, a.delta_max, a.per_decade).size())});
            if (c == "phase-scan")
                out.cells({"n_points", std::to_string(parse_grid(a.mu_grid).size() * parse_grid(a.j_grid).size())});
            if (!a.region.empty()) parse_region(a.region);
            parse_path(a.e);
            out.write("-");
            return 0;
        }
        if (c == "fidelity-sweep-l") cmd_sweep_l(a, out);
        else if (c == "fidelity-sweep-delta") cmd_sweep_delta(a, out);
        else if (c == "corr-scan") cmd_corr_scan(a, out);
        else if (c == "asym-compare") cmd_asym_compare(a, out);
        else if (c == "fit") cmd_fit(a, out);
        else if (c == "crossover") cmd_crossover(a, out);
        else if (c == "mcp-coeffs") cmd_mcp(a, out, sched->count() > 0);
        else if (c == "identities") cmd_identities(a, out, sched->count() > 0);
        else if (c == "phase-scan") cmd_phase_scan(a, out);
        out.write(a.out);
    } catch (const Error& e) {
        std::fprintf(stderr, "qfid: %s\n", e.what());
        return exit_code(e.error_class());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "qfid: %s\n", e.what());
        return 1;
    }
    return 0;
}
