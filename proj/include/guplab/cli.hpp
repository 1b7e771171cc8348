#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "guplab/deformation.hpp"
#include "guplab/egup.hpp"
#include "guplab/grid.hpp"
#include "guplab/invariants.hpp"
#include "guplab/operators.hpp"
#include "guplab/oscillator.hpp"
#include "guplab/parallel.hpp"
#include "guplab/states.hpp"
#include "guplab/wigner.hpp"

namespace guplab::cli {

enum class Command { uncertainty, mlstate, oscillator, wigner, egup, check };
enum class OutputFormat { csv, json };

struct GridSettings {
    double pmin = 0, pmax = 0;
    std::size_t n = 0;
};

struct Sweep {
    std::string var;
    double start = 0, stop = 0;
    std::size_t count = 1;
    bool log = false;

    std::vector<double> values() const {
        std::vector<double> v(count);
        if (count == 1) {
            v[0] = start;
            return v;
        }
        for (std::size_t i = 0; i < count; ++i) {
            double t = double(i) / double(count - 1);
            v[i] = log ? std::exp(std::log(start) + t * (std::log(stop) - std::log(start))) : start + t * (stop - start);
        }
        v.back() = stop;
        return v;
    }
};

struct RunConfig {
    Command command = Command::check;
    std::string f = "1 + beta*p^2";
    ParamMap params;  // beta, alpha when given
    PhysicalUnits units;
    std::optional<GridSettings> grid;
    std::optional<Sweep> sweep;
    int levels = 10;
    std::optional<long> trunc;
    std::optional<double> q;
    std::string out;
    OutputFormat format = OutputFormat::csv;
    std::string mode;
    // state selection, config-file keys
    double a = 1.0, x0 = 0.0, p0 = 0.0, xi = 0.0;
    std::string state = "squeezed";
    int n = 0;

    double beta() const {
        auto it = params.find("beta");
        return it == params.end() ? 0.0 : it->second;
    }
};

// one value with where it came from, for error messages
struct RawValue {
    std::string text;
    std::string origin;  // "line 3" or "flag --beta"
};
using RawConfig = std::map<std::string, RawValue>;

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> k{"command", "f",      "beta",  "alpha", "q",  "hbar", "mass",
                                            "omega",   "grid",   "sweep", "levels", "trunc", "out", "format",
                                            "mode",    "a",      "x0",    "p0",    "xi", "state", "n"};
    return k;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// `key = value` lines, `#` starts a comment
inline RawConfig parse_config_text(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    for (int no = 1; std::getline(in, line); ++no) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        const std::string where = "line " + std::to_string(no);
        if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw ValidationError(where + ": missing key");
        const auto& keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ValidationError(where + ": unknown key '" + key + "'");
        if (raw.count(key)) throw ValidationError(where + ": duplicate key '" + key + "' (first set on " + raw[key].origin + ")");
        raw[key] = {value, where};
    }
    return raw;
}

inline RawConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config_text(ss.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

inline std::string type_error(const std::string& key, const RawValue& v, const char* expect) {
    return v.origin + ": key '" + key + "' expects " + expect + ", got '" + v.text + "'";
}

inline double to_real(const std::string& key, const RawValue& v, const std::string& text) {
    double d = 0;
    const char* b = text.data();
    const char* e = b + text.size();
    auto r = std::from_chars(b, e, d);
    if (r.ec != std::errc() || r.ptr != e) throw ValidationError(type_error(key, v, "a real number"));
    if (!std::isfinite(d)) throw ValidationError(v.origin + ": key '" + key + "' must be finite");
    return d;
}
inline double to_real(const std::string& key, const RawValue& v) { return to_real(key, v, v.text); }

inline long to_int(const std::string& key, const RawValue& v, const std::string& text) {
    long d = 0;
    const char* b = text.data();
    const char* e = b + text.size();
    auto r = std::from_chars(b, e, d);
    if (r.ec != std::errc() || r.ptr != e) throw ValidationError(type_error(key, v, "an integer"));
    return d;
}
inline long to_int(const std::string& key, const RawValue& v) { return to_int(key, v, v.text); }

} // namespace detail

inline Command parse_command(const std::string& s) {
    static const std::map<std::string, Command> m{{"uncertainty", Command::uncertainty}, {"mlstate", Command::mlstate},
                                                  {"oscillator", Command::oscillator},   {"wigner", Command::wigner},
                                                  {"egup", Command::egup},               {"check", Command::check}};
    auto it = m.find(s);
    if (it == m.end()) throw ValidationError("unknown command '" + s + "'");
    return it->second;
}

inline std::string command_name(Command c) {
    switch (c) {
    case Command::uncertainty: return "uncertainty";
    case Command::mlstate: return "mlstate";
    case Command::oscillator: return "oscillator";
    case Command::wigner: return "wigner";
    case Command::egup: return "egup";
    case Command::check: return "check";
    }
    return "?";
}

inline const std::vector<std::string>& sweep_vars() {
    static const std::vector<std::string> v{"a", "x0", "p0", "xi", "beta", "alpha", "q"};
    return v;
}

inline RunConfig build_config(const RawConfig& raw) {
    using namespace detail;
    RunConfig c;
    auto has = [&](const char* k) { return raw.count(k) > 0; };
    auto real = [&](const char* k) { return to_real(k, raw.at(k)); };
    if (!has("command")) throw ValidationError("no command given");
    c.command = parse_command(raw.at("command").text);
    if (has("f")) {
        c.f = raw.at("f").text;
        if (trim(c.f).empty()) throw ValidationError(raw.at("f").origin + ": deformation text is empty");
    }
    if (has("beta")) c.params["beta"] = real("beta");
    if (has("alpha")) c.params["alpha"] = real("alpha");
    if (has("q")) c.q = real("q");
    if (has("hbar")) c.units.hbar = real("hbar");
    if (has("mass")) c.units.mass = real("mass");
    if (has("omega")) c.units.omega = real("omega");
    c.units.validate();
    if (has("grid")) {
        const RawValue& v = raw.at("grid");
        auto t = split_ws(v.text);
        if (t.size() != 3) throw ValidationError(type_error("grid", v, "'pmin pmax npoints'"));
        long n = to_int("grid", v, t[2]);
        if (n < 16) throw ValidationError(v.origin + ": grid needs at least 16 points");
        c.grid = GridSettings{to_real("grid", v, t[0]), to_real("grid", v, t[1]), std::size_t(n)};
        if (!(c.grid->pmin < c.grid->pmax)) throw ValidationError(v.origin + ": grid requires pmin < pmax");
    }
    if (has("sweep")) {
        const RawValue& v = raw.at("sweep");
        auto t = split_ws(v.text);
        if (t.size() != 5) throw ValidationError(type_error("sweep", v, "'var start stop count lin|log'"));
        Sweep s;
        s.var = t[0];
        const auto& vars = sweep_vars();
        if (std::find(vars.begin(), vars.end(), s.var) == vars.end())
            throw ValidationError(v.origin + ": cannot sweep '" + s.var + "'");
        s.start = to_real("sweep", v, t[1]);
        s.stop = to_real("sweep", v, t[2]);
        long n = to_int("sweep", v, t[3]);
        if (n < 1) throw ValidationError(v.origin + ": sweep count must be >= 1");
        s.count = std::size_t(n);
        if (t[4] == "log")
            s.log = true;
        else if (t[4] != "lin")
            throw ValidationError(type_error("sweep", v, "spacing 'lin' or 'log'"));
        if (s.log && !(s.start > 0 && s.stop > 0)) throw ValidationError(v.origin + ": log sweep needs positive bounds");
        c.sweep = s;
    }
    if (has("levels")) {
        long l = to_int("levels", raw.at("levels"));
        if (l < 1) throw ValidationError(raw.at("levels").origin + ": levels must be >= 1");
        c.levels = int(l);
    }
    if (has("trunc")) {
        long t = to_int("trunc", raw.at("trunc"));
        if (t < 2) throw ValidationError(raw.at("trunc").origin + ": trunc must be >= 2");
        c.trunc = t;
    }
    if (has("out")) c.out = raw.at("out").text;
    if (has("format")) {
        const RawValue& v = raw.at("format");
        if (v.text == "csv")
            c.format = OutputFormat::csv;
        else if (v.text == "json")
            c.format = OutputFormat::json;
        else
            throw ValidationError(type_error("format", v, "'csv' or 'json'"));
    }
    if (has("mode")) c.mode = raw.at("mode").text;
    if (has("a")) c.a = real("a");
    if (has("x0")) c.x0 = real("x0");
    if (has("p0")) c.p0 = real("p0");
    if (has("xi")) c.xi = real("xi");
    if (has("state")) c.state = raw.at("state").text;
    if (has("n")) {
        long n = to_int("n", raw.at("n"));
        if (n < 0) throw ValidationError(raw.at("n").origin + ": n must be >= 0");
        c.n = int(n);
    }
    return c;
}

// Flags override values read from --config.
inline RunConfig parse_config(std::vector<std::string> args) {
    CLI::App app{"Deformed-commutator uncertainty, oscillator, Wigner and q-deformed calculations", "guplab"};
    std::string command, config;
    std::map<std::string, std::string> scalar;
    std::vector<std::string> grid, sweep;
    app.add_option("command", command, "uncertainty | mlstate | oscillator | wigner | egup | check");
    const std::vector<std::pair<const char*, const char*>> flags{
        {"f", "deformation f(p), e.g. \"1+beta*p^2\""},
        {"beta", "quadratic deformation strength"},
        {"alpha", "value bound to alpha in --f"},
        {"q", "q-deformation parameter (>= 1)"},
        {"hbar", "reduced Planck constant"},
        {"mass", "oscillator mass"},
        {"omega", "oscillator frequency"},
        {"levels", "number of energy levels"},
        {"trunc", "Fock truncation N"},
        {"out", "output file (stdout if absent)"},
        {"format", "csv | json"},
        {"mode", "subcommand mode"}};
    for (auto [k, help] : flags) app.add_option(std::string("--") + k, scalar[k], help);
    app.add_option("--grid", grid, "pmin pmax npoints")->expected(3)->allow_extra_args(false);
    app.add_option("--sweep", sweep, "name from to count lin|log")->expected(5)->allow_extra_args(false);
    app.add_option("--config", config, "key = value file; flags take precedence");
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        throw;
    } catch (const CLI::ParseError& e) {
        throw ValidationError(e.what());
    }
    RawConfig raw;
    if (!config.empty()) raw = parse_config_file(config);
    if (!command.empty()) raw["command"] = {command, "argument"};
    for (auto& [k, v] : scalar)
        if (app.count("--" + k)) raw[k] = {v, "flag --" + k};
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (auto& t : v) s += (s.empty() ? "" : " ") + t;
        return s;
    };
    if (app.count("--grid")) raw["grid"] = {join(grid), "flag --grid"};
    if (app.count("--sweep")) raw["sweep"] = {join(sweep), "flag --sweep"};
    return build_config(raw);
}

inline RunConfig parse_config(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return parse_config(std::move(args));
}

// ---- tables ----

using Cell = std::variant<double, long long, bool, std::string>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

inline std::string cell_text(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return fmt17(*d);
    if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
    if (auto b = std::get_if<bool>(&c)) return *b ? "true" : "false";
    return std::get<std::string>(c);
}

inline void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell_text(r[i]);
        os << '\n';
    }
}

inline void write_json(std::ostream& os, const Table& t) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) {
        nlohmann::ordered_json o;
        for (std::size_t i = 0; i < r.size(); ++i)
            std::visit([&](const auto& v) { o[t.header[i]] = v; }, r[i]);
        arr.push_back(std::move(o));
    }
    os << arr.dump(2) << '\n';
}

inline std::string summary_line(const std::vector<std::string>& header, const std::vector<Cell>& row) {
    std::string s;
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? " " : "") + header[i] + "=" + cell_text(row[i]);
    return s;
}

// ---- commands ----

namespace detail {

inline void set_var(RunConfig& c, const std::string& var, double v) {
    if (var == "a") c.a = v;
    else if (var == "x0") c.x0 = v;
    else if (var == "p0") c.p0 = v;
    else if (var == "xi") c.xi = v;
    else if (var == "q") c.q = v;
    else c.params[var] = v;
}

inline double get_var(const RunConfig& c, const std::string& var) {
    if (var == "a") return c.a;
    if (var == "x0") return c.x0;
    if (var == "p0") return c.p0;
    if (var == "xi") return c.xi;
    if (var == "q") return c.q.value_or(1.0);
    auto it = c.params.find(var);
    return it == c.params.end() ? 0.0 : it->second;
}

inline std::optional<MomentumGrid> user_grid(const RunConfig& c) {
    if (!c.grid) return std::nullopt;
    return MomentumGrid(c.grid->pmin, c.grid->pmax, c.grid->n);
}

inline GridWaveFunction make_state(const RunConfig& c, const std::optional<MomentumGrid>& given) {
    const double hb = c.units.hbar;
    if (c.state == "squeezed") {
        SqueezedParams s{c.a, c.x0, c.p0};
        return squeezed_state(s, given ? *given : squeezed_grid(s, hb), hb);
    }
    if (c.state == "ml") {
        MLParams m{c.xi, c.beta()};
        return ml_state(m, given ? *given : ml_grid(m.beta, m.xi, hb), hb);
    }
    if (c.state == "hermite") {
        const double reach = (std::sqrt(2.0 * c.n + 1.0) + 8.0) * std::sqrt(2.0) * c.units.K0();
        return hermite_eigenstate(c.units, c.n, given ? *given : MomentumGrid::centered(0.0, reach, 512));
    }
    throw ValidationError("unknown state '" + c.state + "' (squeezed, ml, hermite)");
}

inline std::string sweep_column(const RunConfig& c, const char* fallback) { return c.sweep ? c.sweep->var : fallback; }

} // namespace detail

inline std::vector<std::string> table_header(const RunConfig& c) {
    switch (c.command) {
    case Command::uncertainty: return {detail::sweep_column(c, "a"), "dx", "dp", "lhs", "rhs", "satisfied"};
    case Command::mlstate: return {"xi", "beta", "mean_x", "dx", "dx_expected", "rel_err"};
    case Command::oscillator: {
        std::vector<std::string> h{"n", "E_n", "E0_n", "deltaE_first_order", "deltaE_numeric"};
        if (c.sweep) h.insert(h.begin(), c.sweep->var);
        return h;
    }
    case Command::egup: {
        const std::string m = c.mode.empty() ? "floor" : c.mode;
        if (m == "floor") return {"q", "N", "L", "K", "dx_min", "dp_min", "dx_floor", "dx_rel"};
        if (m == "spectrum") return {"n", "E_n", "E0_n", "delta_first_order", "delta_numeric", "q"};
        if (m == "commutator")
            return {"q", "c0", "c1", "c2", "c0_exact", "c1_exact", "c2_exact", "residual", "dx_min_fit", "dx_floor"};
        if (m == "approx") return {"q", "C", "richardson_ratio"};
        if (m == "squeezed" || m == "squeezed-grid") return {detail::sweep_column(c, "a"), "q", "dX", "dP"};
        throw ValidationError("unknown egup mode '" + m + "' (floor, spectrum, commutator, approx, squeezed, squeezed-grid)");
    }
    case Command::wigner: return {"x", "p", "W"};
    case Command::check: return {"name", "error", "tol", "passed"};
    }
    return {};
}

// rows for one sweep point
inline std::vector<std::vector<Cell>> run_point(const RunConfig& c) {
    std::vector<std::vector<Cell>> rows;
    const double hb = c.units.hbar;
    switch (c.command) {
    case Command::uncertainty: {
        DeformationSpec spec = parse_deformation(c.f, c.params, c.units);
        GridWaveFunction psi = detail::make_state(c, detail::user_grid(c));
        GupCheck g = check_gup(spec, psi);
        double var = detail::get_var(c, table_header(c)[0]);
        rows.push_back({var, g.dx, g.dp, g.lhs, g.rhs, g.satisfied});
        break;
    }
    case Command::mlstate: {
        MLParams m{c.xi, c.beta()};
        auto given = detail::user_grid(c);
        GridWaveFunction psi = ml_state(m, given ? *given : ml_grid(m.beta, m.xi, hb), hb);
        DeformationSpec spec = DeformationSpec::gup(m.beta, c.units);
        double mean = expectation(psi, X_action(spec)).real();
        double dx = uncertainty(psi, X_action(spec));
        double expect = hb * std::sqrt(m.beta);
        rows.push_back({m.xi, m.beta, mean, dx, expect, dx / expect - 1.0});
        break;
    }
    case Command::oscillator: {
        OscillatorSpec os{c.units, c.beta(), c.trunc.value_or(200)};
        std::vector<double> e = spectrum(build_H_gup(os), c.levels);
        for (int n = 0; n < c.levels; ++n) {
            double e0 = hb * c.units.omega * (n + 0.5);
            std::vector<Cell> r{(long long)n, e[std::size_t(n)], e0, delta_E_perturbative(os, n), e[std::size_t(n)] - e0};
            if (c.sweep) r.insert(r.begin(), detail::get_var(c, c.sweep->var));
            rows.push_back(std::move(r));
        }
        break;
    }
    case Command::egup: {
        if (!c.q) throw ValidationError("egup requires --q");
        const double q = *c.q;
        const std::string m = c.mode.empty() ? "floor" : c.mode;
        const long N = c.trunc.value_or(std::max(100L, long(c.levels) + 20));
        if (m == "floor") {
            QDeformation d = QDeformation::balanced(q, c.units.L0(), N, hb);
            MinUncertainty r = egup_min_uncertainty(d);
            double fl = egup_dx_floor(d);
            rows.push_back({q, (long long)N, d.L, d.K, r.dx_min, r.dp_min, fl, fl > 0 ? r.dx_min / fl - 1.0 : r.dx_min});
        } else if (m == "spectrum") {
            QDeformation d = QDeformation::oscillator(q, c.units, N);
            for (const EgupLevel& l : egup_oscillator_spectrum(d, c.units, c.levels)) {
                long long n = (long long)rows.size();
                rows.push_back({n, l.E, l.E0, l.delta_first_order, l.delta_numeric, q});
            }
        } else if (m == "commutator") {
            QDeformation d = QDeformation::balanced(q, c.units.L0(), N, hb);
            CommutatorFit f = fit_egup_commutator(d);
            rows.push_back({q, f.c0, f.c1, f.c2, f.c0_exact, f.c1_exact, f.c2_exact, f.residual, f.dx_min, egup_dx_floor(d)});
        } else if (m == "approx") {
            QDeformation d = QDeformation::oscillator(q, c.units, N);
            QDeformation h = QDeformation::oscillator(1.0 + 0.5 * d.epsilon(), c.units, N);
            double C = egup_approx_constant(d, c.units), Ch = egup_approx_constant(h, c.units);
            rows.push_back({q, C, Ch > 0 ? 4.0 * C / Ch : 0.0});
        } else {
            QDeformation d = QDeformation::oscillator(q, c.units, N);
            SqueezedParams s{c.a, c.x0, c.p0};
            SqueezedUncertainty r = m == "squeezed" ? egup_squeezed_uncertainties(d, c.units, s)
                                                    : egup_squeezed_uncertainties_grid(d, c.units, s);
            rows.push_back({detail::get_var(c, table_header(c)[0]), q, r.dX, r.dP});
        }
        break;
    }
    case Command::wigner:
    case Command::check: throw ValidationError("command has no sweep points");
    }
    return rows;
}

inline std::ostream& open_output(const RunConfig& c, std::ofstream& file) {
    if (c.out.empty()) return std::cout;
    file.open(c.out, std::ios::binary);
    if (!file) throw ValidationError("cannot write output path '" + c.out + "'");
    return file;
}

inline void emit(const RunConfig& c, const Table& t) {
    std::ofstream file;
    std::ostream& os = open_output(c, file);
    if (c.format == OutputFormat::json)
        write_json(os, t);
    else
        write_csv(os, t);
    if (file.is_open() && !file) throw ValidationError("write failed for '" + c.out + "'");
}

// summaries go to stdout when the table goes to a file, to stderr otherwise
inline std::ostream& summary_stream(const RunConfig& c) { return c.out.empty() ? std::cerr : std::cout; }

inline int run_check(const RunConfig& c) {
    Table t{table_header(c), {}};
    bool ok = true;
    for (const InvariantResult& r : run_invariants()) {
        ok = ok && r.passed;
        summary_stream(c) << (r.passed ? "PASS " : "FAIL ") << r.name << "  error=" << fmt17(r.error)
                          << " tol=" << fmt17(r.tol) << (r.note.empty() ? "" : "  (" + r.note + ")") << '\n';
        t.rows.push_back({r.name, r.error, r.tol, r.passed});
    }
    if (!c.out.empty()) emit(c, t);
    return ok ? 0 : 1;
}

inline int run_wigner(const RunConfig& c) {
    if (c.sweep) throw ValidationError("wigner does not take a sweep");
    auto given = detail::user_grid(c);
    WignerOptions opt;
    opt.hbar = c.units.hbar;
    GridWaveFunction psi = c.state == "ml" && !given
                               ? ml_state({c.xi, c.beta()}, ml_wigner_grid(c.beta()), c.units.hbar)
                               : detail::make_state(c, given);
    // the slow 1/p^2 tails of the minimal-length state need the lattice transform
    PhaseSpaceField W;
    if (c.state == "ml") {
        opt.row_fraction = 0.5;
        W = wigner_function_lattice(psi, opt);
    } else {
        W = wigner_function(psi, opt);
    }
    if (c.mode == "matrix") {
        std::ofstream file;
        std::ostream& os = open_output(c, file);
        write_wigner_matrix(os, W);
    } else if (c.mode.empty() || c.mode == "table") {
        Table t{table_header(c), {}};
        for (std::size_t i = 0; i < W.x.size(); ++i)
            for (std::size_t j = 0; j < W.p.size(); ++j) t.rows.push_back({W.x[i], W.p[j], W.values(Eigen::Index(i), Eigen::Index(j))});
        emit(c, t);
    } else {
        throw ValidationError("unknown wigner mode '" + c.mode + "' (table, matrix)");
    }
    Marginals m = marginals(W);
    double merr = 0.0;
    for (std::size_t j = 0; j < W.p.size(); ++j) {
        const auto k = Eigen::Index(std::lround((W.p[j] - psi.grid.p_min()) / psi.grid.step()));
        merr = std::max(merr, std::abs(m.momentum[j] - std::norm(psi.amp[k])));
    }
    summary_stream(c) << "state=" << c.state << " mass=" << fmt17(W.mass()) << " momentum_marginal_error=" << fmt17(merr)
                      << " min_W=" << fmt17(W.values.minCoeff()) << '\n';
    return 0;
}

inline int run(const RunConfig& c) {
    if (c.command == Command::check) return run_check(c);
    if (c.command == Command::wigner) return run_wigner(c);
    Table t{table_header(c), {}};
    std::vector<RunConfig> points;
    if (c.sweep) {
        for (double v : c.sweep->values()) {
            RunConfig p = c;
            detail::set_var(p, c.sweep->var, v);
            points.push_back(std::move(p));
        }
    } else {
        points.push_back(c);
    }
    std::vector<std::vector<std::vector<Cell>>> blocks(points.size());
    parallel_for(points.size(), [&](std::size_t i) { blocks[i] = run_point(points[i]); });
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        if (b.size() == 1)
            summary_stream(c) << summary_line(t.header, b.front()) << '\n';
        else
            summary_stream(c) << command_name(c.command) << " point " << i << ": " << b.size() << " rows\n";
        for (const auto& r : b) t.rows.push_back(r);
    }
    emit(c, t);
    return 0;
}

// exit status: 0 ok, 1 check failure, 2 validation, 3 numerical
inline int main(int argc, const char* const* argv) {
    try {
        return run(parse_config(argc, argv));
    } catch (const CLI::CallForHelp&) {
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    }
}

} // namespace guplab::cli
