// Command-line front end. Every module sits behind one subcommand; all
// randomness flows from --seed, and identical invocations produce identical
// bytes. Exit codes: 0 success, 2 usage error, 1 runtime failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <symcount/enumerate.hpp>
#include <symcount/experiments.hpp>
#include <symcount/heights.hpp>
#include <symcount/io.hpp>
#include <symcount/numeric.hpp>
#include <symcount/variety.hpp>
#include <symcount/volumes_arch.hpp>
#include <symcount/volumes_padic.hpp>

using namespace symcount;
using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

Int parse_big(const std::string& s) {
    try {
        return Int(s);
    } catch (const std::exception&) {
        throw std::invalid_argument("not an integer: '" + s + "'");
    }
}

Rat parse_rational(const std::string& s) {
    try {
        return parse_rat(s);
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("not a rational: '" + s + "'");
    }
}

i64 parse_i64(const std::string& s) {
    try {
        size_t used = 0;
        i64 v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("not an integer: '" + s + "'");
    }
}

double parse_dbl(const std::string& s) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
}

std::vector<i64> parse_i64_list(const std::string& s) {
    std::vector<i64> out;
    if (s.empty()) return out;
    for (const auto& tok : split(s, ',')) out.push_back(parse_i64(tok));
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (i64 v : parse_i64_list(s)) out.push_back((int)v);
    return out;
}

std::vector<double> parse_dbl_list(const std::string& s) {
    std::vector<double> out;
    if (s.empty()) return out;
    for (const auto& tok : split(s, ',')) out.push_back(parse_dbl(tok));
    return out;
}

std::vector<Int> parse_big_list(const std::string& s) {
    std::vector<Int> out;
    if (s.empty()) return out;
    for (const auto& tok : split(s, ',')) out.push_back(parse_big(tok));
    return out;
}

std::vector<Rat> parse_rat_list(const std::string& s) {
    std::vector<Rat> out;
    if (s.empty()) return out;
    for (const auto& tok : split(s, ',')) out.push_back(parse_rational(tok));
    return out;
}

// ---- variety selection shared by every subcommand ----

struct SpecOpts {
    std::string form, form_json, spec_file;

    void attach(CLI::App* cmd) {
        cmd->add_option("--form", form,
                        "diagonal quadric coefficients, e.g. 1,1,1,-1");
        cmd->add_option("--form-json", form_json,
                        "inline JSON variety description");
        cmd->add_option("--spec-file", spec_file,
                        "path to a JSON variety description");
    }

    VarietySpec resolve() const {
        int given = (!form.empty()) + (!form_json.empty()) + (!spec_file.empty());
        if (given != 1)
            throw std::invalid_argument(
                "give exactly one of --form, --form-json, --spec-file");
        if (!form.empty()) {
            std::vector<Int> diag;
            for (const auto& tok : split(form, ',')) diag.push_back(parse_big(tok));
            return VarietySpec::quadric_diag(diag);
        }
        nlohmann::json j;
        try {
            if (!form_json.empty()) {
                j = nlohmann::json::parse(form_json);
            } else {
                std::ifstream f(spec_file);
                if (!f) throw std::invalid_argument("cannot read " + spec_file);
                j = nlohmann::json::parse(f);
            }
        } catch (const nlohmann::json::parse_error& e) {
            throw std::invalid_argument(std::string("bad variety JSON: ") + e.what());
        }
        return spec_from_json(j);
    }
};

// ---- output plumbing: stdout by default, file bundle under --out prefix ----

struct Sink {
    std::string prefix;

    bool to_stdout() const { return prefix.empty(); }

    void emit(const std::string& suffix, const std::string& body) const {
        if (prefix.empty()) {
            std::fwrite(body.data(), 1, body.size(), stdout);
        } else {
            std::ofstream f(prefix + suffix, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + prefix + suffix);
            f << body;
        }
    }
};

std::vector<Region> resolve_regions(const std::string& arg, int dim) {
    if (arg == "octants") return octant_partition(dim);
    std::ifstream f(arg);
    if (!f) throw std::invalid_argument("cannot read region file " + arg);
    try {
        nlohmann::json j = nlohmann::json::parse(f);
        if (!j.is_array() || j.empty())
            throw std::invalid_argument("region file must hold a nonempty JSON array");
        std::vector<Region> out;
        for (const auto& e : j) out.push_back(region_from_json(e));
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad region file: ") + e.what());
    }
}

nlohmann::json fit_json(const AsymptoticFit& f) {
    return {{"a", f.a}, {"b", f.b}, {"c", f.c}, {"residual_rms", f.residual_rms}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"integral and S-integral points on symmetric varieties: "
                 "enumeration, local volumes, and counting experiments"};
    app.require_subcommand(1);
    app.footer("Thread count comes from SYMCOUNT_THREADS (results never depend on it).\n"
               "With --out PREFIX, experiments write PREFIX.report.csv, PREFIX.long.csv\n"
               "and PREFIX.summary.json instead of printing to stdout.");

    // enumerate
    auto* c_enum = app.add_subcommand("enumerate", "list integral points on f = m in a box");
    SpecOpts so_enum;
    so_enum.attach(c_enum);
    std::string en_level = "1", en_format = "csv";
    i64 en_bound = 0;
    bool en_primitive = false, en_oracle = false;
    c_enum->add_option("--level", en_level, "target value m of the form (nonzero integer)");
    c_enum->add_option("--bound", en_bound, "coordinate box half-width")->required();
    c_enum->add_flag("--primitive", en_primitive, "keep only points with coordinate gcd 1");
    c_enum->add_flag("--oracle", en_oracle, "use the unpruned full scan");
    c_enum->add_option("--format", en_format, "csv, json, or jsonl")
        ->check(CLI::IsMember({"csv", "json", "jsonl"}));

    // volume-arch
    auto* c_varch = app.add_subcommand("volume-arch", "real shell volumes by Monte Carlo");
    SpecOpts so_varch;
    so_varch.attach(c_varch);
    std::string va_level = "1", va_grid, va_bins;
    double va_radius = 0, va_eps = 0;
    u64 va_samples = 1000000, va_seed = 1;
    int va_tail = -1;
    bool va_fit = false;
    c_varch->add_option("--level", va_level, "target value m (rational, e.g. 5 or 5/2)");
    c_varch->add_option("--radius", va_radius, "ball radius T");
    c_varch->add_option("--grid", va_grid, "comma list of radii (series mode)");
    c_varch->add_option("--eps", va_eps, "shell half-width (default |m|/10)");
    c_varch->add_option("--samples", va_samples, "Monte Carlo samples per radius");
    c_varch->add_option("--seed", va_seed, "random seed");
    c_varch->add_option("--tail", va_tail, "tail mode: weight by norm^-k0 outside T");
    c_varch->add_option("--bins", va_bins, "comma list of radii: norm-bin masses instead");
    c_varch->add_flag("--fit", va_fit, "fit c T^a (log T)^b to the series");

    // volume-padic
    auto* c_vpad = app.add_subcommand("volume-padic", "exact p-adic densities and sphere masses");
    SpecOpts so_vpad;
    so_vpad.attach(c_vpad);
    std::string vp_level = "1", vp_primes;
    i64 vp_p = 0;
    int vp_kmax = 6, vp_spheres = -1, vp_ball = -1, vp_imax = 5, vp_maxmod = 6;
    bool vp_limit = false, vp_sfit = false, vp_doubling = false;
    c_vpad->add_option("--level", vp_level, "target value m (nonzero integer)");
    c_vpad->add_option("--p", vp_p, "finite place");
    c_vpad->add_option("--kmax", vp_kmax, "lifting depth allowance");
    c_vpad->add_option("--spheres", vp_spheres, "emit sphere masses for j = 0..J");
    c_vpad->add_option("--ball", vp_ball, "emit cumulative ball masses for j = 0..J");
    c_vpad->add_flag("--limit", vp_limit, "emit the exact limit density and settle depth");
    c_vpad->add_flag("--structure-fit", vp_sfit, "fit the residue-class power law to --spheres");
    c_vpad->add_option("--max-modulus", vp_maxmod, "largest residue modulus tried by the fit");
    c_vpad->add_flag("--doubling", vp_doubling, "emit the multi-prime ball series w(2^i)");
    c_vpad->add_option("--primes", vp_primes, "comma list of places for --doubling");
    c_vpad->add_option("--imax", vp_imax, "doubling steps for --doubling");

    // count
    auto* c_count = app.add_subcommand("count", "S-point counts against stratified volumes");
    SpecOpts so_count;
    so_count.attach(c_count);
    std::string ct_level = "1", ct_primes, ct_grid;
    u64 ct_samples = 2000000, ct_seed = 1;
    double ct_eps_scale = 0.1;
    int ct_kmax = 4;
    c_count->add_option("--level", ct_level, "target value m (nonzero integer)");
    c_count->add_option("--primes", ct_primes, "finite places of S, e.g. 2,3");
    c_count->add_option("--grid", ct_grid, "comma list of height bounds T")->required();
    c_count->add_option("--samples", ct_samples, "Monte Carlo samples per stratum");
    c_count->add_option("--seed", ct_seed, "random seed");
    c_count->add_option("--eps-scale", ct_eps_scale, "shell half-width per unit of |m|");
    c_count->add_option("--kmax", ct_kmax, "p-adic lifting allowance");

    // equidist
    auto* c_eq = app.add_subcommand("equidist", "radial projection discrepancy per level");
    SpecOpts so_eq;
    so_eq.attach(c_eq);
    std::string eq_levels, eq_primes, eq_regions = "octants";
    double eq_radius = 1.5;
    i64 eq_min_count = 50;
    u64 eq_samples = 2000000, eq_seed = 1;
    c_eq->add_option("--levels", eq_levels, "comma list of increasing levels m")->required();
    c_eq->add_option("--primes", eq_primes, "finite places of S (levels must then lie in <S>)");
    c_eq->add_option("--regions", eq_regions, "octants, or a JSON file with a region array");
    c_eq->add_option("--radius", eq_radius, "projection ball radius");
    c_eq->add_option("--min-count", eq_min_count, "points needed before a level enters trends");
    c_eq->add_option("--samples", eq_samples, "Monte Carlo samples per region");
    c_eq->add_option("--seed", eq_seed, "random seed");

    // denom
    auto* c_den = app.add_subcommand("denom", "denominator p^n points binned into regions");
    SpecOpts so_den;
    so_den.attach(c_den);
    std::string dn_nseq, dn_regions = "octants";
    i64 dn_p = 0, dn_zcube = 0;
    int dn_kmax = 4;
    u64 dn_samples = 2000000, dn_seed = 1;
    c_den->add_option("--p", dn_p, "finite place")->required();
    c_den->add_option("--nseq", dn_nseq, "comma list of increasing exponents n")->required();
    c_den->add_option("--zbox-cube", dn_zcube, "half-width of the unit-level coordinate box")
        ->required();
    c_den->add_option("--regions", dn_regions, "octants, or a JSON file with a region array");
    c_den->add_option("--kmax", dn_kmax, "p-adic lifting allowance");
    c_den->add_option("--samples", dn_samples, "Monte Carlo samples per region");
    c_den->add_option("--seed", dn_seed, "random seed");

    // wellround
    auto* c_wr = app.add_subcommand("wellround", "shell-to-ball exponent of the ball family");
    SpecOpts so_wr;
    so_wr.attach(c_wr);
    std::string wr_level = "1", wr_eps, wr_radii;
    u64 wr_samples = 2000000, wr_seed = 1;
    c_wr->add_option("--level", wr_level, "target value m (rational)");
    c_wr->add_option("--eps", wr_eps, "comma list of dilation epsilons in (0, 0.3]")->required();
    c_wr->add_option("--radii", wr_radii, "comma list of ball radii T")->required();
    c_wr->add_option("--samples", wr_samples, "Monte Carlo samples per radius");
    c_wr->add_option("--seed", wr_seed, "random seed");

    // fit
    auto* c_fit = app.add_subcommand("fit", "fit growth laws to a series");
    std::string ft_in, ft_series;
    i64 ft_q = 0;
    int ft_maxmod = 6;
    c_fit->add_option("--in", ft_in, "CSV with columns T,value (header allowed)");
    c_fit->add_option("--series", ft_series, "comma list of exact rationals indexed from 0");
    c_fit->add_option("--q", ft_q, "base for the residue-class fit of --series");
    c_fit->add_option("--max-modulus", ft_maxmod, "largest residue modulus tried");

    std::string out_prefix;
    for (auto* cmd : {c_enum, c_varch, c_vpad, c_count, c_eq, c_den, c_wr, c_fit})
        cmd->add_option("--out", out_prefix, "write files under this prefix instead of stdout");

    try {
        app.parse(argc, argv);
        Sink sink{out_prefix};

        if (app.got_subcommand(c_enum)) {
            auto spec = so_enum.resolve();
            Int m = parse_big(en_level);
            if (m == 0) throw std::invalid_argument("level must be nonzero");
            EnumOptions eo;
            eo.oracle = en_oracle;
            auto pts = integral_points(spec, m, en_bound, eo);
            if (en_primitive) pts = primitive_filter(pts);
            std::string body;
            if (en_format == "jsonl") {
                for (const auto& x : pts) body += nlohmann::json(x).dump() + "\n";
                sink.emit(".points.jsonl", body);
            } else if (en_format == "json") {
                body = nlohmann::json(pts).dump() + "\n";
                sink.emit(".points.json", body);
            } else {
                std::vector<std::string> hdr;
                for (int i = 0; i < spec.ambient_dim(); ++i)
                    hdr.push_back("x" + std::to_string(i));
                body = csv_row(hdr);
                for (const auto& x : pts) {
                    std::vector<std::string> cells;
                    for (i64 c : x) cells.push_back(std::to_string(c));
                    body += csv_row(cells);
                }
                sink.emit(".points.csv", body);
            }
        } else if (app.got_subcommand(c_varch)) {
            auto spec = so_varch.resolve();
            Rat m = parse_rational(va_level);
            double eps = va_eps > 0 ? va_eps : std::fabs(m.convert_to<double>()) / 10.0;
            if (!va_bins.empty()) {
                auto radii = parse_dbl_list(va_bins);
                auto est = shell_norm_bins(spec, m, eps, va_samples, va_seed, radii);
                std::string body = csv_row({"bin", "radius", "mass", "stderr"});
                for (size_t i = 0; i < radii.size(); ++i)
                    body += csv_row({std::to_string(i), fmt_double(radii[i]),
                                     fmt_double(est.mass[i]), fmt_double(est.stderr_[i])});
                sink.emit(".csv", body);
            } else {
                auto Ts = parse_dbl_list(va_grid);
                if (Ts.empty()) {
                    if (!(va_radius > 0))
                        throw std::invalid_argument("give --radius or --grid");
                    Ts.push_back(va_radius);
                }
                std::string body = csv_row({"T", "value", "stderr", "method", "samples"});
                std::vector<std::pair<double, double>> series;
                for (double T : Ts) {
                    VolumeEstimate est =
                        va_tail >= 0
                            ? tail_integral(spec, m, T, va_tail, eps, va_samples, va_seed)
                            : shell_volume(spec, m, T, eps, va_samples, va_seed);
                    body += csv_row({fmt_double(T), fmt_double(est.value),
                                     fmt_double(est.stderr_), est.method,
                                     std::to_string(est.samples)});
                    series.push_back({T, est.value});
                }
                sink.emit(".csv", body);
                if (va_fit) {
                    auto f = fit_power_log(series);
                    if (sink.to_stdout())
                        sink.emit("", "\n" + fit_json(f).dump() + "\n");
                    else
                        sink.emit(".fit.json", fit_json(f).dump(2) + "\n");
                }
            }
        } else if (app.got_subcommand(c_vpad)) {
            auto spec = so_vpad.resolve();
            Int m = parse_big(vp_level);
            int modes = (vp_spheres >= 0) + (vp_ball >= 0) + vp_limit + vp_doubling;
            if (modes > 1)
                throw std::invalid_argument(
                    "pick at most one of --spheres, --ball, --limit, --doubling");
            if (vp_doubling) {
                auto primes = parse_i64_list(vp_primes);
                auto chk = doubling_check(spec, m, primes, vp_imax, vp_kmax);
                std::string body = csv_row({"T", "numerator", "denominator"});
                for (const auto& row : chk.rows)
                    body += csv_row({fmt_double(row.T), numerator(row.w).str(),
                                     denominator(row.w).str()});
                sink.emit(".csv", body);
                nlohmann::json j{{"max_ratio", fmt_double(chk.max_ratio)},
                                 {"growing_tail", chk.growing_tail}};
                if (sink.to_stdout())
                    sink.emit("", "\n" + j.dump() + "\n");
                else
                    sink.emit(".summary.json", j.dump(2) + "\n");
            } else if (vp_limit) {
                if (vp_p == 0) throw std::invalid_argument("--p is required");
                auto lim = local_density_limit(spec, m, vp_p);
                nlohmann::json j{{"density", rat_string(lim.density)},
                                 {"settle_k", lim.settle_k}};
                sink.emit(sink.to_stdout() ? "" : ".limit.json", j.dump() + "\n");
            } else if (vp_spheres >= 0 || vp_ball >= 0) {
                if (vp_p == 0) throw std::invalid_argument("--p is required");
                int J = vp_spheres >= 0 ? vp_spheres : vp_ball;
                std::vector<Rat> series;
                std::string body = csv_row({"j", "numerator", "denominator"});
                for (int j = 0; j <= J; ++j) {
                    Rat w = vp_spheres >= 0
                                ? padic_sphere_volume_level(spec, m, vp_p, j, vp_kmax)
                                : padic_ball_volume_level(spec, m, vp_p, j, vp_kmax);
                    series.push_back(w);
                    body += csv_row({std::to_string(j), numerator(w).str(),
                                     denominator(w).str()});
                }
                sink.emit(".csv", body);
                if (vp_sfit) {
                    auto f = structure_fit(series, vp_p, vp_maxmod);
                    nlohmann::json classes = nlohmann::json::array();
                    for (const auto& c : f.classes)
                        classes.push_back({{"residue", c.residue},
                                           {"all_zero", c.all_zero},
                                           {"a", c.a},
                                           {"b", c.b},
                                           {"c", c.c},
                                           {"residual_rms", c.residual_rms},
                                           {"points", c.points}});
                    nlohmann::json j{{"modulus", f.modulus},
                                     {"total_residual", f.total_residual},
                                     {"classes", classes}};
                    if (sink.to_stdout())
                        sink.emit("", "\n" + j.dump() + "\n");
                    else
                        sink.emit(".fit.json", j.dump(2) + "\n");
                }
            } else {
                if (vp_p == 0) throw std::invalid_argument("--p is required");
                auto recs = local_density(spec, m, vp_p, vp_kmax);
                std::string body =
                    csv_row({"k", "count", "numerator", "denominator", "stabilized"});
                for (const auto& r : recs)
                    body += csv_row({std::to_string(r.k), r.count.str(),
                                     numerator(r.density).str(),
                                     denominator(r.density).str(),
                                     r.stabilized ? "1" : "0"});
                sink.emit(".csv", body);
            }
        } else if (app.got_subcommand(c_count)) {
            auto spec = so_count.resolve();
            auto S = PlaceSet::with_primes(parse_i64_list(ct_primes));
            Int m = parse_big(ct_level);
            auto grid = parse_i64_list(ct_grid);
            McParams mc;
            mc.samples = ct_samples;
            mc.seed = ct_seed;
            mc.eps_scale = ct_eps_scale;
            auto rep = counting_experiment(spec, S, m, grid, mc, ct_kmax);

            std::string report = csv_row({"T", "N", "V", "V_stderr", "ratio"});
            for (const auto& row : rep.rows)
                report += csv_row({std::to_string(row.T), row.N.str(), fmt_double(row.V),
                                   fmt_double(row.V_stderr), fmt_double(row.ratio)});
            if (sink.to_stdout()) {
                sink.emit("", report);
            } else {
                sink.emit(".report.csv", report);
                std::string lng = csv_row({"variable", "T_or_m", "value"});
                for (const auto& row : rep.rows) {
                    lng += csv_row({"N", std::to_string(row.T), row.N.str()});
                    lng += csv_row({"V", std::to_string(row.T), fmt_double(row.V)});
                    lng += csv_row({"ratio", std::to_string(row.T), fmt_double(row.ratio)});
                }
                for (const auto& st : rep.strata) {
                    lng += csv_row({"arch_q=" + std::to_string(st.q), std::to_string(st.T),
                                    fmt_double(st.arch)});
                    lng += csv_row({"padic_q=" + std::to_string(st.q), std::to_string(st.T),
                                    rat_string(st.padic)});
                }
                sink.emit(".long.csv", lng);
                nlohmann::json j;
                j["schema"] = 1;
                j["experiment"] = "count";
                j["params"] = {{"variety", to_json(spec)},     {"level", m.str()},
                               {"primes", S.finite_primes},    {"grid", grid},
                               {"samples", mc.samples},        {"seed", mc.seed},
                               {"eps_scale", mc.eps_scale},    {"kmax", ct_kmax}};
                j["verdicts"] = {{"top_half_spread", rep.top_half_spread},
                                 {"delta", rep.delta},
                                 {"fit_ok", rep.fit_ok},
                                 {"all_empty", rep.all_empty}};
                sink.emit(".summary.json", j.dump(2) + "\n");
            }
        } else if (app.got_subcommand(c_eq)) {
            auto spec = so_eq.resolve();
            auto S = PlaceSet::with_primes(parse_i64_list(eq_primes));
            auto levels = parse_big_list(eq_levels);
            auto regions = resolve_regions(eq_regions, spec.ambient_dim());
            McParams mc;
            mc.samples = eq_samples;
            mc.seed = eq_seed;
            auto rep = equidist_experiment(spec, S, levels, regions, eq_radius,
                                           eq_min_count, mc);

            std::string report = csv_row({"m", "points", "D", "included", "note"});
            for (const auto& row : rep.rows)
                report += csv_row({row.m.str(), row.points.str(), fmt_double(row.D),
                                   row.included ? "1" : "0", row.note});
            if (sink.to_stdout()) {
                sink.emit("", report);
            } else {
                sink.emit(".report.csv", report);
                std::string lng = csv_row({"variable", "T_or_m", "value"});
                for (size_t i = 0; i < rep.region_mass.size(); ++i)
                    lng += csv_row({"mass[" + std::to_string(i) + "]", "-",
                                    fmt_double(rep.region_mass[i])});
                for (const auto& row : rep.rows) {
                    for (size_t i = 0; i < row.emp.size(); ++i)
                        lng += csv_row({"emp[" + std::to_string(i) + "]", row.m.str(),
                                        fmt_double(row.emp[i])});
                    lng += csv_row({"D", row.m.str(), fmt_double(row.D)});
                }
                sink.emit(".long.csv", lng);

                std::vector<const DiscrepancyRow*> inc;
                for (const auto& row : rep.rows)
                    if (row.included) inc.push_back(&row);
                nlohmann::json verd;
                verd["included_levels"] = (int)inc.size();
                if (!inc.empty()) {
                    verd["D_first"] = inc.front()->D;
                    verd["D_last"] = inc.back()->D;
                    verd["trend_decreasing"] = inc.back()->D < inc.front()->D;
                }
                nlohmann::json j;
                j["schema"] = 1;
                j["experiment"] = "equidist";
                j["params"] = {{"variety", to_json(spec)},
                               {"primes", S.finite_primes},
                               {"radius", eq_radius},
                               {"min_count", eq_min_count},
                               {"regions", eq_regions},
                               {"samples", mc.samples},
                               {"seed", mc.seed}};
                std::vector<std::string> lvl;
                for (const auto& v : levels) lvl.push_back(v.str());
                j["params"]["levels"] = lvl;
                j["verdicts"] = verd;
                sink.emit(".summary.json", j.dump(2) + "\n");
            }
        } else if (app.got_subcommand(c_den)) {
            auto spec = so_den.resolve();
            auto nseq = parse_int_list(dn_nseq);
            if (dn_zcube <= 0) throw std::invalid_argument("--zbox-cube must be positive");
            Box zbox = box_cube(spec.ambient_dim(), dn_zcube);
            auto regions = resolve_regions(dn_regions, spec.ambient_dim());
            McParams mc;
            mc.samples = dn_samples;
            mc.seed = dn_seed;
            auto rep = denominator_experiment(spec, dn_p, nseq, regions, zbox, mc, dn_kmax);

            std::string report = csv_row({"n", "total", "normalized", "D"});
            for (const auto& row : rep.rows)
                report += csv_row({std::to_string(row.n), row.total.str(),
                                   fmt_double(row.normalized), fmt_double(row.D)});
            if (sink.to_stdout()) {
                sink.emit("", report);
            } else {
                sink.emit(".report.csv", report);
                std::string lng = csv_row({"variable", "T_or_m", "value"});
                for (size_t i = 0; i < rep.region_mass.size(); ++i)
                    lng += csv_row({"mass[" + std::to_string(i) + "]", "-",
                                    fmt_double(rep.region_mass[i])});
                for (const auto& row : rep.rows)
                    for (size_t i = 0; i < row.emp.size(); ++i)
                        lng += csv_row({"emp[" + std::to_string(i) + "]",
                                        std::to_string(row.n), fmt_double(row.emp[i])});
                sink.emit(".long.csv", lng);
                nlohmann::json j;
                j["schema"] = 1;
                j["experiment"] = "denom";
                j["params"] = {{"variety", to_json(spec)}, {"p", dn_p},
                               {"nseq", nseq},             {"zbox_cube", dn_zcube},
                               {"regions", dn_regions},    {"kmax", dn_kmax},
                               {"samples", mc.samples},    {"seed", mc.seed}};
                j["verdicts"] = {{"growth", rep.growth}};
                sink.emit(".summary.json", j.dump(2) + "\n");
            }
        } else if (app.got_subcommand(c_wr)) {
            auto spec = so_wr.resolve();
            Rat m = parse_rational(wr_level);
            auto eps = parse_dbl_list(wr_eps);
            auto radii = parse_dbl_list(wr_radii);
            McParams mc;
            mc.samples = wr_samples;
            mc.seed = wr_seed;
            auto res = well_rounded_check(spec, m, {}, eps, radii, mc);

            std::string report = csv_row({"T", "eps", "shell", "ball"});
            for (const auto& row : res.rows)
                report += csv_row({fmt_double(row.T), fmt_double(row.eps),
                                   fmt_double(row.shell), fmt_double(row.ball)});
            nlohmann::json verd{{"kappa", fmt_double(res.kappa)},
                                {"exact_boundary", res.exact_boundary},
                                {"lower_bound_only", res.lower_bound_only}};
            if (sink.to_stdout()) {
                sink.emit("", report + "\n" + verd.dump() + "\n");
            } else {
                sink.emit(".report.csv", report);
                std::string lng = csv_row({"variable", "T_or_m", "value"});
                for (const auto& row : res.rows) {
                    lng += csv_row({"shell_eps=" + fmt_double(row.eps), fmt_double(row.T),
                                    fmt_double(row.shell)});
                    lng += csv_row({"ball", fmt_double(row.T), fmt_double(row.ball)});
                }
                sink.emit(".long.csv", lng);
                nlohmann::json j;
                j["schema"] = 1;
                j["experiment"] = "wellround";
                j["params"] = {{"variety", to_json(spec)}, {"level", rat_string(m)},
                               {"eps", eps},               {"radii", radii},
                               {"samples", mc.samples},    {"seed", mc.seed}};
                j["verdicts"] = verd;
                sink.emit(".summary.json", j.dump(2) + "\n");
            }
        } else if (app.got_subcommand(c_fit)) {
            if (!ft_series.empty()) {
                if (ft_q < 2)
                    throw std::invalid_argument("--series needs --q (base at least 2)");
                auto series = parse_rat_list(ft_series);
                auto f = structure_fit(series, ft_q, ft_maxmod);
                nlohmann::json classes = nlohmann::json::array();
                for (const auto& c : f.classes)
                    classes.push_back({{"residue", c.residue},
                                       {"all_zero", c.all_zero},
                                       {"a", c.a},
                                       {"b", c.b},
                                       {"c", c.c},
                                       {"residual_rms", c.residual_rms},
                                       {"points", c.points}});
                nlohmann::json j{{"modulus", f.modulus},
                                 {"total_residual", f.total_residual},
                                 {"classes", classes}};
                sink.emit(sink.to_stdout() ? "" : ".fit.json", j.dump() + "\n");
            } else {
                if (ft_in.empty()) throw std::invalid_argument("give --in or --series");
                std::ifstream fin(ft_in);
                if (!fin) throw std::invalid_argument("cannot read " + ft_in);
                std::vector<std::pair<double, double>> grid;
                std::string line;
                while (std::getline(fin, line)) {
                    if (line.empty()) continue;
                    auto cells = split(line, ',');
                    if (cells.size() < 2) continue;
                    char* end = nullptr;
                    double T = std::strtod(cells[0].c_str(), &end);
                    if (end == cells[0].c_str()) continue;  // header row
                    grid.push_back({T, std::strtod(cells[1].c_str(), nullptr)});
                }
                auto f = fit_power_log(grid);
                sink.emit(sink.to_stdout() ? "" : ".fit.json", fit_json(f).dump() + "\n");
            }
        }
        return 0;
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
