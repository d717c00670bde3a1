#pragma once

// Theorem-level experiments: counting S-points against stratified volumes,
// equidistribution of radially projected fibers, denominator growth, and
// well-roundedness exponents for the ball families.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <symcount/enumerate.hpp>
#include <symcount/heights.hpp>
#include <symcount/numeric.hpp>
#include <symcount/rng.hpp>
#include <symcount/variety.hpp>
#include <symcount/volumes_arch.hpp>
#include <symcount/volumes_padic.hpp>

namespace symcount {

struct Region {
    enum class Kind { box, cap, halfspace } kind = Kind::box;
    std::vector<double> lo, hi;      // box corners
    std::vector<double> axis;        // cap axis (normalized on construction)
    double cos_threshold = 0;        // cap: <axis, x/|x|> >= cos_threshold
    std::vector<double> normal;      // halfspace
    double offset = 0;               // halfspace: <normal, x> >= offset

    bool contains(const std::vector<double>& x) const {
        switch (kind) {
            case Kind::box:
                for (size_t i = 0; i < lo.size(); ++i)
                    if (x[i] < lo[i] || x[i] > hi[i]) return false;
                return true;
            case Kind::cap: {
                double dot = 0, n2 = 0;
                for (size_t i = 0; i < axis.size(); ++i) {
                    dot += axis[i] * x[i];
                    n2 += x[i] * x[i];
                }
                if (n2 == 0) return false;
                return dot >= cos_threshold * std::sqrt(n2);
            }
            case Kind::halfspace: {
                double dot = 0;
                for (size_t i = 0; i < normal.size(); ++i) dot += normal[i] * x[i];
                return dot >= offset;
            }
        }
        return false;
    }

    static Region make_box(std::vector<double> lo, std::vector<double> hi) {
        if (lo.size() != hi.size() || lo.empty())
            throw std::invalid_argument("box corners must have equal positive dimension");
        for (size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) throw std::invalid_argument("box must have interior");
        Region r;
        r.kind = Kind::box;
        r.lo = std::move(lo);
        r.hi = std::move(hi);
        return r;
    }

    static Region make_cap(std::vector<double> axis, double cos_threshold) {
        double n2 = 0;
        for (double a : axis) n2 += a * a;
        if (n2 == 0) throw std::invalid_argument("cap axis must be nonzero");
        if (!(cos_threshold > -1 && cos_threshold < 1))
            throw std::invalid_argument("cap cosine must lie in (-1, 1)");
        for (double& a : axis) a /= std::sqrt(n2);
        Region r;
        r.kind = Kind::cap;
        r.axis = std::move(axis);
        r.cos_threshold = cos_threshold;
        return r;
    }

    static Region make_halfspace(std::vector<double> normal, double offset) {
        double n2 = 0;
        for (double a : normal) n2 += a * a;
        if (n2 == 0) throw std::invalid_argument("halfspace normal must be nonzero");
        Region r;
        r.kind = Kind::halfspace;
        r.normal = std::move(normal);
        r.offset = offset;
        return r;
    }
};

// The 2^dim coordinate orthants as a partition (boundaries go to the first
// matching cell, which keeps binning deterministic).
inline std::vector<Region> octant_partition(int dim) {
    if (dim < 1 || dim > 20) throw std::invalid_argument("bad dimension");
    const double BIG = 1e18;
    std::vector<Region> out;
    for (int mask = 0; mask < (1 << dim); ++mask) {
        std::vector<double> lo(dim), hi(dim);
        for (int i = 0; i < dim; ++i) {
            if (mask & (1 << i)) {
                lo[i] = -BIG;
                hi[i] = 0;
            } else {
                lo[i] = 0;
                hi[i] = BIG;
            }
        }
        out.push_back(Region::make_box(lo, hi));
    }
    return out;
}

inline nlohmann::json region_to_json(const Region& r) {
    nlohmann::json j;
    switch (r.kind) {
        case Region::Kind::box:
            j["kind"] = "box";
            j["lo"] = r.lo;
            j["hi"] = r.hi;
            break;
        case Region::Kind::cap:
            j["kind"] = "cap";
            j["axis"] = r.axis;
            j["cos"] = r.cos_threshold;
            break;
        case Region::Kind::halfspace:
            j["kind"] = "halfspace";
            j["normal"] = r.normal;
            j["offset"] = r.offset;
            break;
    }
    return j;
}

inline Region region_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "box")
        return Region::make_box(j.at("lo").get<std::vector<double>>(),
                                j.at("hi").get<std::vector<double>>());
    if (kind == "cap")
        return Region::make_cap(j.at("axis").get<std::vector<double>>(),
                                j.at("cos").get<double>());
    if (kind == "halfspace")
        return Region::make_halfspace(j.at("normal").get<std::vector<double>>(),
                                      j.at("offset").get<double>());
    throw std::invalid_argument("unknown region kind");
}

struct McParams {
    u64 samples = 2000000;
    u64 seed = 1;
    double eps_scale = 0.1;  // shell half-width per unit of |level|
};

namespace detail {

inline u64 scaled_samples(u64 base, double R) {
    double f = std::max(1.0, R * R / 64.0);
    return (u64)std::min((double)base * f, 4e9);
}

inline double shell_eps(const McParams& mc, double level_abs) {
    double scale = std::min(std::max(mc.eps_scale, 1e-6), 0.1);
    return scale * level_abs;
}

inline u64 derived_seed(u64 seed, u64 tag) { return mix64(seed ^ mix64(tag)); }

}  // namespace detail

// ---- counting experiment ----

struct CountRow {
    i64 T = 0;
    Int N = 0;
    double V = 0;
    double V_stderr = 0;
    double ratio = 0;
};

struct CountStratumRow {
    i64 T = 0;
    i64 q = 0;       // S-unit denominator of the stratum
    double arch = 0; // real shell volume at radius T/q
    Rat padic = 0;   // product of local sphere masses
};

struct CountingReport {
    std::vector<CountRow> rows;
    std::vector<CountStratumRow> strata;
    double top_half_spread = 0;
    double delta = 0;
    bool fit_ok = false;
    bool all_empty = false;
};

// N(T) against the stratified volume V(T) = sum over S-denominators q of
// v_m(T/q) * prod_p omega_{p, v_p(q)}.  The height identity (euclidean times
// finite norms of a reduced S-point equals the euclidean norm of its
// numerator) turns the height cut into a plain numerator bound.
inline CountingReport counting_experiment(const VarietySpec& spec, const PlaceSet& S,
                                          const Int& m, const std::vector<i64>& T_grid,
                                          const McParams& mc, int k_max = 4) {
    if (T_grid.size() < 5) throw std::invalid_argument("need a grid of at least 5 radii");
    for (size_t i = 0; i < T_grid.size(); ++i) {
        if (T_grid[i] < 2) throw std::invalid_argument("radii must be at least 2");
        if (i && T_grid[i] <= T_grid[i - 1])
            throw std::invalid_argument("radii must increase");
    }
    if (m == 0) throw std::invalid_argument("level must be nonzero");
    int d = spec.degree();
    i64 Tmax = T_grid.back();
    Int abs_m = m < 0 ? Int(-m) : m;

    // denominators worth considering: |m| q^d must be reachable in the T-box
    Int reach = level_bound(spec, Tmax);
    std::vector<i64> qs;
    if (reach >= abs_m) {
        double est = std::pow((reach / abs_m).convert_to<double>(), 1.0 / d);
        Int qcap = Int((i64)est + 2);
        for (const Int& q : semigroup_elements(S.finite_primes, qcap))
            if (abs_m * ipow(q, d) <= reach) qs.push_back(q.convert_to<i64>());
    }
    if (qs.empty()) qs.push_back(1);

    std::map<std::pair<i64, int>, Rat> omega;
    for (i64 q : qs)
        for (i64 p : S.finite_primes) {
            int j = valuation64(q, p);
            auto key = std::make_pair(p, j);
            if (!omega.count(key))
                omega[key] = padic_sphere_volume_level(spec, m, p, j, k_max);
        }

    CountingReport rep;
    for (size_t ti = 0; ti < T_grid.size(); ++ti) {
        i64 T = T_grid[ti];
        CountRow row;
        row.T = T;
        double var = 0;
        for (size_t qi = 0; qi < qs.size(); ++qi) {
            i64 q = qs[qi];
            double R = (double)T / (double)q;
            Int target = m * ipow(Int(q), d);
            // the stratum lives in the real ball of radius T/q, so this bound
            // certifies both an empty count and a vanishing shell volume
            if (abs_m * ipow(Int(q), d) > level_bound(spec, (i64)std::ceil(R))) continue;
            Rat padic = 1;
            for (i64 p : S.finite_primes) padic *= omega.at({p, valuation64(q, p)});
            u64 seed = detail::derived_seed(mc.seed, ((u64)q << 24) ^ (u64)T);
            auto est = shell_volume(spec, m, R, detail::shell_eps(mc, abs_m.convert_to<double>()),
                                    detail::scaled_samples(mc.samples, R), seed);
            double pd = padic.convert_to<double>();
            row.V += est.value * pd;
            var += est.stderr_ * pd * est.stderr_ * pd;
            rep.strata.push_back({T, q, est.value, padic});

            // numerators: the height of a point with reduced denominator q is
            // the euclidean norm of its numerator, so the cut stays at T
            for (const auto& x : primitive_filter(integral_points(spec, target, T))) {
                i64 n2 = 0;
                for (i64 c : x) n2 += c * c;
                if (n2 < T * T) row.N += 1;
            }
        }
        row.V_stderr = std::sqrt(var);
        row.ratio = row.V > 0 ? row.N.convert_to<double>() / row.V : 0.0;
        rep.rows.push_back(row);
    }

    rep.all_empty = true;
    for (const auto& r : rep.rows)
        if (r.N != 0) rep.all_empty = false;

    size_t len = rep.rows.size();
    size_t top = len - (len + 1) / 2;
    double mx = 0, mn = std::numeric_limits<double>::infinity(), mean = 0;
    for (size_t i = top; i < len; ++i) {
        mx = std::max(mx, rep.rows[i].ratio);
        mn = std::min(mn, rep.rows[i].ratio);
        mean += rep.rows[i].ratio;
    }
    mean /= (double)(len - top);
    rep.top_half_spread = mean > 0 ? (mx - mn) / mean : 0.0;

    double r_last = rep.rows.back().ratio;
    std::vector<std::pair<double, double>> pts;
    if (r_last > 0)
        for (size_t i = 0; i + 1 < len; ++i) {
            double r = rep.rows[i].ratio;
            if (r <= 0) continue;
            double dev = std::fabs(r / r_last - 1.0);
            if (dev < 1e-12) continue;
            pts.push_back({std::log((double)rep.rows[i].T), std::log(dev)});
        }
    if (pts.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto& [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double nn = (double)pts.size();
        double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
        rep.delta = -slope;
        rep.fit_ok = std::isfinite(rep.delta);
    }
    return rep;
}

// ---- equidistribution of projected fibers ----

struct DiscrepancyRow {
    Int m = 0;
    Int points = 0;
    std::vector<double> emp;
    double D = 0;
    bool included = false;
    std::string note;
};

struct DiscrepancyReport {
    std::vector<double> region_mass;
    std::vector<DiscrepancyRow> rows;
};

inline DiscrepancyReport equidist_experiment(const VarietySpec& spec, const PlaceSet& S,
                                             const std::vector<Int>& levels,
                                             const std::vector<Region>& regions, double R,
                                             i64 min_count, const McParams& mc) {
    if (levels.empty()) throw std::invalid_argument("need at least one level");
    for (size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] <= 0) throw std::invalid_argument("levels must be positive");
        if (i && levels[i] <= levels[i - 1]) throw std::invalid_argument("levels must increase");
        // with finite places present the level has to put its growth there;
        // with S empty the sequence is the classical growing-level aspect
        if (!S.finite_primes.empty() && !supported_on(levels[i], S.finite_primes))
            throw std::invalid_argument("level is not an S-unit");
    }
    if (regions.empty()) throw std::invalid_argument("need at least one region");
    if (!(R > 0)) throw std::invalid_argument("projection ball radius must be positive");

    double eps = detail::shell_eps(mc, 1.0);
    auto total = shell_volume(spec, 1, R, eps, mc.samples, mc.seed);
    if (total.value <= 0) throw std::runtime_error("unit level carries no mass in the ball");
    DiscrepancyReport rep;
    for (const auto& reg : regions) {
        auto est = shell_volume_region(spec, 1, R, eps, mc.samples, mc.seed,
                                       [&](const std::vector<double>& z) { return reg.contains(z); });
        rep.region_mass.push_back(est.value / total.value);
    }

    int d = spec.degree();
    for (const Int& m : levels) {
        DiscrepancyRow row;
        row.m = m;
        row.emp.assign(regions.size(), 0.0);
        i64 B = (i64)std::ceil(std::pow(m.convert_to<double>(), 1.0 / d) * R) + 1;
        auto pts = primitive_filter(integral_points(spec, m, B));
        std::vector<i64> counts(regions.size(), 0);
        i64 used = 0;
        for (const auto& x : pts) {
            auto z = radial_project(spec, x, m);
            double n2 = 0;
            for (double c : z) n2 += c * c;
            if (n2 > R * R * (1 + 1e-9)) continue;
            ++used;
            for (size_t i = 0; i < regions.size(); ++i)
                if (regions[i].contains(z)) {
                    counts[i] += 1;
                    break;
                }
        }
        row.points = used;
        if (used == 0) {
            row.note = "no primitive points on this level";
            row.D = std::numeric_limits<double>::quiet_NaN();
        } else {
            row.D = 0;
            for (size_t i = 0; i < regions.size(); ++i) {
                row.emp[i] = (double)counts[i] / (double)used;
                row.D = std::max(row.D, std::fabs(row.emp[i] - rep.region_mass[i]));
            }
            row.included = used >= min_count;
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// ---- denominator equidistribution ----

struct DenomRow {
    int n = 0;
    Int total = 0;
    std::vector<Int> counts;
    double normalized = 0;  // total / p-adic ball mass
    std::vector<double> emp;
    double D = 0;
};

struct DenomReport {
    std::vector<double> region_mass;
    std::vector<DenomRow> rows;
    bool growth = false;  // p-adic ball mass strictly grows to the deepest level
};

inline DenomReport denominator_experiment(const VarietySpec& spec, i64 p,
                                          const std::vector<int>& n_seq,
                                          const std::vector<Region>& regions, const Box& zbox,
                                          const McParams& mc, int k_max = 4) {
    if (n_seq.empty()) throw std::invalid_argument("need at least one exponent");
    for (size_t i = 0; i < n_seq.size(); ++i) {
        if (n_seq[i] < 0) throw std::invalid_argument("exponents must be nonnegative");
        if (i && n_seq[i] <= n_seq[i - 1]) throw std::invalid_argument("exponents must increase");
    }
    if (regions.empty()) throw std::invalid_argument("need at least one region");
    int dim = spec.ambient_dim();
    if ((int)zbox.lo.size() != dim) throw std::invalid_argument("box dimension mismatch");

    double R_enc2 = 0;
    for (int i = 0; i < dim; ++i) {
        double c = std::max(std::fabs((double)zbox.lo[i]), std::fabs((double)zbox.hi[i]));
        R_enc2 += c * c;
    }
    double R_enc = std::sqrt(R_enc2);
    auto in_box = [&](const std::vector<double>& z) {
        for (int i = 0; i < dim; ++i)
            if (z[i] < (double)zbox.lo[i] || z[i] > (double)zbox.hi[i]) return false;
        return true;
    };
    double eps = detail::shell_eps(mc, 1.0);
    auto total = shell_volume_region(spec, 1, R_enc, eps, mc.samples, mc.seed, in_box);
    DenomReport rep;
    for (const auto& reg : regions) {
        auto est = shell_volume_region(spec, 1, R_enc, eps, mc.samples, mc.seed,
                                       [&](const std::vector<double>& z) {
                                           return in_box(z) && reg.contains(z);
                                       });
        rep.region_mass.push_back(total.value > 0 ? est.value / total.value : 0.0);
    }

    rep.growth = padic_ball_volume(spec, p, n_seq.back(), k_max) >
                 padic_ball_volume(spec, p, 0, k_max);

    for (int n : n_seq) {
        DenomRow row;
        row.n = n;
        row.counts.assign(regions.size(), 0);
        row.emp.assign(regions.size(), 0.0);
        auto spts = denominator_points(spec, p, n, zbox);
        row.total = (i64)spts.size();
        for (const auto& sp : spts) {
            auto coords = spoint_coords(sp);
            std::vector<double> z(coords.size());
            for (size_t i = 0; i < coords.size(); ++i) z[i] = coords[i].convert_to<double>();
            for (size_t i = 0; i < regions.size(); ++i)
                if (regions[i].contains(z)) {
                    row.counts[i] += 1;
                    break;
                }
        }
        Rat ball = padic_ball_volume(spec, p, n, k_max);
        row.normalized = ball > 0 ? row.total.convert_to<double>() / ball.convert_to<double>() : 0.0;
        if (row.total > 0) {
            row.D = 0;
            for (size_t i = 0; i < regions.size(); ++i) {
                row.emp[i] = row.counts[i].convert_to<double>() / row.total.convert_to<double>();
                row.D = std::max(row.D, std::fabs(row.emp[i] - rep.region_mass[i]));
            }
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// ---- well-roundedness ----

struct WellRow {
    double T = 0;
    double eps = 0;
    double shell = 0;
    double ball = 0;
};

struct WellRoundedResult {
    double kappa = 0;
    bool exact_boundary = false;   // every shell carried zero mass
    bool lower_bound_only = false; // some shells fell below MC resolution
    std::vector<WellRow> rows;
};

inline double fit_kappa(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 2) throw std::invalid_argument("need at least two (eps, ratio) pairs");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [e, r] : pts) {
        if (!(e > 0) || !(r > 0)) throw std::invalid_argument("pairs must be positive");
        double x = std::log(e), y = std::log(r);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double nn = (double)pts.size();
    return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

// Shrink/expand the norm threshold by (1 -/+ eps) and measure the shell in
// between against the ball, with one sample stream per radius so the ratios
// share their noise.  The fitted slope of log(shell/ball) against log(eps)
// estimates the boundary regularity exponent.
inline WellRoundedResult well_rounded_check(const VarietySpec& spec, const Rat& m,
                                            const std::vector<std::vector<Int>>& gram,
                                            const std::vector<double>& eps_grid,
                                            const std::vector<double>& T_grid,
                                            const McParams& mc) {
    if (eps_grid.size() < 3) throw std::invalid_argument("need at least three epsilons");
    for (size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0) || eps_grid[i] > 0.3)
            throw std::invalid_argument("epsilons must lie in (0, 0.3]");
        if (i && eps_grid[i] <= eps_grid[i - 1])
            throw std::invalid_argument("epsilons must increase");
    }
    if (T_grid.empty()) throw std::invalid_argument("need at least one radius");
    int dim = spec.ambient_dim();
    std::vector<std::vector<double>> G;
    double lam_min = 1.0;
    if (!gram.empty()) {
        if ((int)gram.size() != dim) throw std::invalid_argument("gram dimension mismatch");
        G.assign(dim, std::vector<double>(dim));
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) G[i][j] = gram[i][j].convert_to<double>();
        // crude lower bound on the smallest eigenvalue: inverse power iteration
        auto inv = G;
        std::vector<std::vector<double>> id(dim, std::vector<double>(dim, 0.0));
        for (int i = 0; i < dim; ++i) id[i][i] = 1.0;
        for (int k = 0; k < dim; ++k) {  // Gauss-Jordan
            int piv = k;
            for (int r = k + 1; r < dim; ++r)
                if (std::fabs(inv[r][k]) > std::fabs(inv[piv][k])) piv = r;
            std::swap(inv[k], inv[piv]);
            std::swap(id[k], id[piv]);
            double pv = inv[k][k];
            if (pv == 0) throw std::invalid_argument("gram matrix is singular");
            for (int c = 0; c < dim; ++c) {
                inv[k][c] /= pv;
                id[k][c] /= pv;
            }
            for (int r = 0; r < dim; ++r)
                if (r != k) {
                    double f = inv[r][k];
                    for (int c = 0; c < dim; ++c) {
                        inv[r][c] -= f * inv[k][c];
                        id[r][c] -= f * id[k][c];
                    }
                }
        }
        std::vector<double> v(dim, 1.0);
        double lam_max_inv = 1.0;
        for (int it = 0; it < 200; ++it) {
            std::vector<double> w(dim, 0.0);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) w[i] += id[i][j] * v[j];
            double nw = 0;
            for (double c : w) nw += c * c;
            nw = std::sqrt(nw);
            if (nw == 0) break;
            lam_max_inv = nw;
            for (int i = 0; i < dim; ++i) v[i] = w[i] / nw;
        }
        lam_min = 0.9 / lam_max_inv;
    }
    auto norm2g = [&](const std::vector<double>& z) {
        if (G.empty()) {
            double s = 0;
            for (double c : z) s += c * c;
            return s;
        }
        double s = 0;
        for (int i = 0; i < dim; ++i) {
            double r = 0;
            for (int j = 0; j < dim; ++j) r += G[i][j] * z[j];
            s += z[i] * r;
        }
        return s;
    };

    double eps_mc = detail::shell_eps(mc, std::fabs(m.convert_to<double>()));
    WellRoundedResult res;
    std::vector<std::pair<double, double>> pooled;
    bool any_shell_positive = false, dropped = false, any_ball = false;
    for (size_t ti = 0; ti < T_grid.size(); ++ti) {
        double T = T_grid[ti];
        if (!(T > 0)) throw std::invalid_argument("radii must be positive");
        double R_box = (1 + eps_grid.back()) * T / std::sqrt(lam_min);
        u64 seed = detail::derived_seed(mc.seed, 0x577ull + ti);
        u64 samples = detail::scaled_samples(mc.samples, R_box);
        auto ball = shell_volume_region(spec, m, R_box, eps_mc, samples, seed,
                                        [&](const std::vector<double>& z) {
                                            return norm2g(z) <= T * T;
                                        });
        if (ball.value > 0) any_ball = true;
        for (double e : eps_grid) {
            double lo2 = (1 - e) * (1 - e) * T * T, hi2 = (1 + e) * (1 + e) * T * T;
            auto shell = shell_volume_region(spec, m, R_box, eps_mc, samples, seed,
                                             [&](const std::vector<double>& z) {
                                                 double n2 = norm2g(z);
                                                 return n2 > lo2 && n2 <= hi2;
                                             });
            res.rows.push_back({T, e, shell.value, ball.value});
            if (ball.value > 0 && shell.value > 0) {
                pooled.push_back({e, shell.value / ball.value});
                any_shell_positive = true;
            } else if (ball.value > 0) {
                dropped = true;
            }
        }
    }
    if (!any_ball) throw std::runtime_error("every ball in the family is empty");
    if (!any_shell_positive) {
        res.exact_boundary = true;
        res.kappa = std::numeric_limits<double>::infinity();
        return res;
    }
    res.lower_bound_only = dropped;
    if (pooled.size() < 2) {
        res.kappa = std::numeric_limits<double>::infinity();
        res.lower_bound_only = true;
        return res;
    }
    res.kappa = fit_kappa(pooled);
    return res;
}

}  // namespace symcount
