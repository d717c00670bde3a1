#pragma once

// Solution densities and sphere masses at finite places.
//
// Counts of f(x) = c in (Z/p^K)^n are computed by a digit-by-digit descent.
// A residue class fixed mod p^j either dies (the value valuation is already
// too small to ever reach 0), closes in closed form once the gradient
// valuation v is stable (v < j) and K >= j + v + 1, or splits into its p^n
// children.  Smoothness of the fibers makes every branch resolve at finite
// depth, which is also what certifies the reported densities as exact.

#include <climits>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <symcount/heights.hpp>
#include <symcount/numeric.hpp>
#include <symcount/variety.hpp>

namespace symcount {

struct DensityRecord {
    int k = 0;
    Int count = 0;
    Rat density = 0;   // count / p^{k(n-1)}
    bool stabilized = false;  // proven equal to the limit density
};

struct DensityLimit {
    Rat density = 0;
    int settle_k = 1;  // counts at every depth >= settle_k scale exactly
};

struct ClassFit {
    int residue = 0;
    bool all_zero = false;
    double a = 0;  // slope per index step, in log_q units
    int b = 0;     // log-index correction power
    double c = 0;  // constant term, exponentiated
    double residual_rms = 0;
    size_t points = 0;
};

struct StructureFit {
    int modulus = 1;
    std::vector<ClassFit> classes;
    double total_residual = 0;
};

struct DoublingRow {
    double T = 0;
    Rat w = 0;
};

struct DoublingCheck {
    std::vector<DoublingRow> rows;
    std::vector<double> ratios;  // w(2T)/w(T)
    double max_ratio = 0;
    bool growing_tail = false;  // last three ratios strictly increase
};

namespace detail {

inline Int eval_int(const VarietySpec& spec, const std::vector<Int>& x) {
    switch (spec.kind) {
        case VarietyKind::quadric: {
            Int acc = 0;
            int n = spec.ambient_dim();
            for (int i = 0; i < n; ++i) {
                Int row = 0;
                for (int j = 0; j < n; ++j) row += spec.Q[i][j] * x[j];
                acc += x[i] * row;
            }
            return acc;
        }
        case VarietyKind::det_sym:
            return spec.sign * det_exact(build_sym_matrix<Int>(x, spec.matrix_size));
        case VarietyKind::pfaffian:
            return spec.sign * pfaffian_of(build_skew_matrix<Int>(x, spec.matrix_size));
    }
    return 0;
}

inline std::vector<Int> grad_int(const VarietySpec& spec, const std::vector<Int>& x) {
    int n = spec.ambient_dim();
    std::vector<Int> g(n);
    switch (spec.kind) {
        case VarietyKind::quadric: {
            for (int i = 0; i < n; ++i) {
                Int row = 0;
                for (int j = 0; j < n; ++j) row += spec.Q[i][j] * x[j];
                g[i] = 2 * row;
            }
            return g;
        }
        case VarietyKind::det_sym: {
            int s = spec.matrix_size;
            auto M = build_sym_matrix<Int>(x, s);
            auto minor_det = [&](int r, int c) {
                std::vector<std::vector<Int>> sub(s - 1, std::vector<Int>(s - 1));
                for (int i = 0, a = 0; i < s; ++i) {
                    if (i == r) continue;
                    for (int j = 0, b = 0; j < s; ++j) {
                        if (j == c) continue;
                        sub[a][b++] = M[i][j];
                    }
                    ++a;
                }
                return det_exact(sub);
            };
            for (int i = 0; i < s; ++i)
                for (int j = i; j < s; ++j) {
                    Int cof = minor_det(i, j);
                    if ((i + j) % 2) cof = -cof;
                    g[sym_index(i, j, s)] = spec.sign * (i == j ? cof : 2 * cof);
                }
            return g;
        }
        case VarietyKind::pfaffian: {
            int s = spec.matrix_size;
            auto A = build_skew_matrix<Int>(x, s);
            for (int i = 0; i < s; ++i)
                for (int j = i + 1; j < s; ++j) {
                    std::vector<int> active;
                    for (int t = 0; t < s; ++t)
                        if (t != i && t != j) active.push_back(t);
                    Int sub = pfaffian_of(A, active);
                    if ((i + j) % 2 == 0) sub = -sub;
                    g[skew_index(i, j, s)] = spec.sign * sub;
                }
            return g;
        }
    }
    return g;
}

inline int val_or_inf(const Int& v, i64 p) { return v == 0 ? INT_MAX : valuation(v, p); }

inline int grad_valuation(const VarietySpec& spec, const std::vector<Int>& x, i64 p) {
    int best = INT_MAX;
    for (const Int& gi : grad_int(spec, x)) {
        if (gi == 0) continue;
        best = std::min(best, valuation(gi, p));
        if (best == 0) break;
    }
    return best;
}

struct LiftCtx {
    const VarietySpec& spec;
    Int target;
    i64 p;
    int n;
    bool primitive;  // drop the branch divisible by p
};

// Exact number of x in (Z/p^K)^n with f(x) = target, by descent.
inline Int count_lifts_rec(const LiftCtx& ctx, int K, int j, std::vector<Int>& x0) {
    Int g = eval_int(ctx.spec, x0) - ctx.target;
    int w = val_or_inf(g, ctx.p);
    if (w < j) return 0;
    if (j == K) return 1;
    int v = grad_valuation(ctx.spec, x0, ctx.p);
    if (v < j && K >= j + v + 1)
        return (w >= j + v) ? ipow(Int(ctx.p), (K - j) * (ctx.n - 1) + v) : Int(0);
    Int pj = ipow(Int(ctx.p), j);
    std::vector<int> digit(ctx.n, 0);
    Int total = 0;
    while (true) {
        bool zero = true;
        for (int d : digit)
            if (d) zero = false;
        if (!(j == 0 && ctx.primitive && zero)) {
            std::vector<Int> child(x0);
            for (int i = 0; i < ctx.n; ++i) child[i] += pj * digit[i];
            total += count_lifts_rec(ctx, K, j + 1, child);
        }
        int i = 0;
        while (i < ctx.n && ++digit[i] == (int)ctx.p) digit[i++] = 0;
        if (i == ctx.n) break;
    }
    return total;
}

inline Int count_lifts(const VarietySpec& spec, const Int& target, i64 p, int K, bool primitive) {
    LiftCtx ctx{spec, target, p, spec.ambient_dim(), primitive};
    std::vector<Int> x0(ctx.n, 0);
    return count_lifts_rec(ctx, K, 0, x0);
}

// Descend until every class dies or closes; the closed-form pieces sum to the
// limit density and the deepest closure bounds where the counts turn exact.
inline void limit_rec(const LiftCtx& ctx, int j, std::vector<Int>& x0, int depth_cap,
                      Rat& density, int& settle) {
    Int g = eval_int(ctx.spec, x0) - ctx.target;
    int w = val_or_inf(g, ctx.p);
    if (w < j) {
        settle = std::max(settle, j);
        return;
    }
    int v = grad_valuation(ctx.spec, x0, ctx.p);
    if (v < j) {
        settle = std::max(settle, j + v + 1);
        if (w >= j + v)
            density += Rat(ipow(Int(ctx.p), v), ipow(Int(ctx.p), j * (ctx.n - 1)));
        return;
    }
    if (j >= depth_cap) throw std::runtime_error("digit descent did not resolve");
    Int pj = ipow(Int(ctx.p), j);
    std::vector<int> digit(ctx.n, 0);
    while (true) {
        bool zero = true;
        for (int d : digit)
            if (d) zero = false;
        if (!(j == 0 && ctx.primitive && zero)) {
            std::vector<Int> child(x0);
            for (int i = 0; i < ctx.n; ++i) child[i] += pj * digit[i];
            limit_rec(ctx, j + 1, child, depth_cap, density, settle);
        }
        int i = 0;
        while (i < ctx.n && ++digit[i] == (int)ctx.p) digit[i++] = 0;
        if (i == ctx.n) break;
    }
}

inline DensityLimit density_limit(const VarietySpec& spec, const Int& target, i64 p,
                                  bool primitive, int depth_cap) {
    LiftCtx ctx{spec, target, p, spec.ambient_dim(), primitive};
    std::vector<Int> x0(ctx.n, 0);
    DensityLimit out;
    out.density = 0;
    out.settle_k = 1;
    limit_rec(ctx, 0, x0, depth_cap, out.density, out.settle_k);
    return out;
}

inline void check_place(i64 p) {
    if (!is_prime64(p)) throw std::invalid_argument("place must be prime");
}

}  // namespace detail

inline std::vector<DensityRecord> local_density(const VarietySpec& spec, const Int& m, i64 p,
                                                int k_max) {
    detail::check_place(p);
    if (m == 0) throw std::invalid_argument("level must be nonzero");
    if (k_max < 2) throw std::invalid_argument("need depth at least 2");
    auto lim = detail::density_limit(spec, m, p, false, 48);
    int n = spec.ambient_dim();
    std::vector<DensityRecord> out;
    for (int k = 1; k <= k_max; ++k) {
        DensityRecord rec;
        rec.k = k;
        rec.count = detail::count_lifts(spec, m, p, k, false);
        rec.density = Rat(rec.count, ipow(Int(p), k * (n - 1)));
        rec.stabilized = k >= lim.settle_k;
        out.push_back(rec);
    }
    return out;
}

inline DensityLimit local_density_limit(const VarietySpec& spec, const Int& m, i64 p,
                                        int depth_cap = 48) {
    detail::check_place(p);
    if (m == 0) throw std::invalid_argument("level must be nonzero");
    return detail::density_limit(spec, m, p, false, depth_cap);
}

// Mass of the S-points with denominator exactly p^j on the level-m fiber,
// in the scale-invariant normalization: substitute z = x / p^j and count x
// primitive mod p against the target m p^{dj}, then undo the substitution.
inline Rat padic_sphere_volume_level(const VarietySpec& spec, const Int& m, i64 p, int j,
                                     int k_max) {
    detail::check_place(p);
    if (m == 0) throw std::invalid_argument("level must be nonzero");
    if (j < 0) throw std::invalid_argument("denominator exponent must be nonnegative");
    if (k_max < 2) throw std::invalid_argument("need lifting allowance at least 2");
    int n = spec.ambient_dim();
    int d = spec.degree();
    Int target = m * ipow(Int(p), d * j);
    bool primitive = j > 0;
    int K_lo = d * j + 1;
    int K_hi = 2 * d * j + k_max + 2;
    Rat prev;
    bool have_prev = false;
    for (int K = K_lo; K <= K_hi; ++K) {
        Int cnt = detail::count_lifts(spec, target, p, K, primitive);
        Rat rho(cnt, ipow(Int(p), K * (n - 1)));
        if (have_prev && rho == prev) {
            Rat scale(ipow(Int(p), j * (n - d)), 1);
            return rho * scale;
        }
        prev = rho;
        have_prev = true;
    }
    throw std::runtime_error("sphere mass did not stabilize within the allowance");
}

inline Rat padic_sphere_volume(const VarietySpec& spec, i64 p, int j, int k_max) {
    return padic_sphere_volume_level(spec, 1, p, j, k_max);
}

inline Rat padic_ball_volume_level(const VarietySpec& spec, const Int& m, i64 p, int j,
                                   int k_max) {
    Rat total = 0;
    for (int jj = 0; jj <= j; ++jj) total += padic_sphere_volume_level(spec, m, p, jj, k_max);
    return total;
}

inline Rat padic_ball_volume(const VarietySpec& spec, i64 p, int j, int k_max) {
    return padic_ball_volume_level(spec, 1, p, j, k_max);
}

// Fit log_q v_j = log_q c + a j + b log_q j separately on each residue class
// of j mod N, for N = 1..max_modulus, and keep the modulus that explains the
// series best.  Index 0 never enters (its log-index term is undefined).  A
// class that dies after being nonzero disqualifies the modulus.
inline StructureFit structure_fit(const std::vector<Rat>& series, i64 q, int max_modulus) {
    if (q < 2) throw std::invalid_argument("base must be at least 2");
    if (max_modulus < 1) throw std::invalid_argument("modulus bound must be positive");
    if (series.size() < 2) throw std::invalid_argument("need at least indices 0 and 1");
    for (const Rat& v : series)
        if (v < 0) throw std::invalid_argument("series values must be nonnegative");
    double logq = std::log((double)q);
    StructureFit best;
    double best_total = std::numeric_limits<double>::infinity();
    for (int N = 1; N <= max_modulus; ++N) {
        StructureFit cand;
        cand.modulus = N;
        double sse_all = 0;
        size_t pts_all = 0;
        bool valid = true;
        for (int r = 0; r < N && valid; ++r) {
            std::vector<size_t> js;
            for (size_t j = 1; j < series.size(); ++j)
                if ((int)(j % N) == r) js.push_back(j);
            ClassFit cf;
            cf.residue = r;
            size_t first_nz = js.size();
            for (size_t t = 0; t < js.size(); ++t)
                if (series[js[t]] > 0) {
                    first_nz = t;
                    break;
                }
            if (first_nz == js.size()) {
                cf.all_zero = true;
                cand.classes.push_back(cf);
                continue;
            }
            for (size_t t = first_nz; t < js.size(); ++t)
                if (series[js[t]] == 0) valid = false;  // support must stay nonzero
            if (!valid) break;
            std::vector<double> xs, ys;
            for (size_t t = first_nz; t < js.size(); ++t) {
                xs.push_back((double)js[t]);
                ys.push_back(std::log(series[js[t]].convert_to<double>()) / logq);
            }
            size_t np = xs.size();
            cf.points = np;
            if (np == 1) {
                cf.c = std::pow((double)q, ys[0] - 0.0);
                cf.a = 0;
                cand.classes.push_back(cf);
                continue;
            }
            double cls_best = std::numeric_limits<double>::infinity();
            for (int b = 0; b <= 4; ++b) {
                double sx = 0, sy = 0, sxx = 0, sxy = 0;
                std::vector<double> yy(np);
                for (size_t t = 0; t < np; ++t) {
                    yy[t] = ys[t] - b * std::log(xs[t]) / logq;
                    sx += xs[t];
                    sy += yy[t];
                    sxx += xs[t] * xs[t];
                    sxy += xs[t] * yy[t];
                }
                double denom = np * sxx - sx * sx;
                if (denom == 0) continue;
                double a = (np * sxy - sx * sy) / denom;
                double c0 = (sy - a * sx) / np;
                double ss = 0;
                for (size_t t = 0; t < np; ++t) {
                    double resid = yy[t] - (c0 + a * xs[t]);
                    ss += resid * resid;
                }
                if (ss < cls_best - 1e-15) {
                    cls_best = ss;
                    cf.a = a;
                    cf.b = b;
                    cf.c = std::pow((double)q, c0);
                    cf.residual_rms = std::sqrt(ss / np);
                }
            }
            sse_all += cls_best;
            pts_all += np;
            cand.classes.push_back(cf);
        }
        if (!valid) continue;
        cand.total_residual = pts_all ? std::sqrt(sse_all / pts_all) : 0.0;
        if (cand.total_residual < best_total - 1e-12) {
            best_total = cand.total_residual;
            best = cand;
        }
    }
    if (best.classes.empty() && best.modulus == 1 && best_total > 1)
        throw std::runtime_error("no admissible modulus");
    return best;
}

// Total sphere mass over all S-denominators q <= T, on a doubling grid of T.
// Bounded ratios w(2T)/w(T) are the tameness certificate used downstream.
inline DoublingCheck doubling_check(const VarietySpec& spec, const Int& m,
                                    const std::vector<i64>& primes, int i_max, int k_max) {
    if (primes.empty()) throw std::invalid_argument("need at least one finite place");
    if (i_max < 1) throw std::invalid_argument("need at least one doubling step");
    auto places = PlaceSet::with_primes(primes);  // validates and sorts
    i64 Tmax = i64(1) << i_max;
    std::vector<std::vector<Rat>> table(places.finite_primes.size());
    for (size_t t = 0; t < places.finite_primes.size(); ++t) {
        i64 p = places.finite_primes[t];
        for (i64 pw = 1;; pw *= p) {
            table[t].push_back(
                padic_sphere_volume_level(spec, m, p, (int)table[t].size(), k_max));
            if (pw > Tmax / p) break;
        }
    }
    // every S-unit denominator q <= Tmax with its product mass
    std::vector<std::pair<i64, Rat>> terms;
    std::function<void(size_t, i64, Rat)> walk = [&](size_t t, i64 q, Rat mass) {
        if (t == places.finite_primes.size()) {
            terms.push_back({q, mass});
            return;
        }
        i64 p = places.finite_primes[t];
        i64 cur = 1;
        for (size_t j = 0; j < table[t].size() && q <= Tmax / cur; ++j, cur *= p) {
            walk(t + 1, q * cur, mass * table[t][j]);
            if (cur > Tmax / p) break;
        }
    };
    walk(0, 1, Rat(1));
    DoublingCheck out;
    for (int i = 0; i <= i_max; ++i) {
        i64 T = i64(1) << i;
        Rat w = 0;
        for (const auto& [q, mass] : terms)
            if (q <= T) w += mass;
        out.rows.push_back({(double)T, w});
    }
    for (int i = 0; i + 1 <= i_max; ++i) {
        double r;
        if (out.rows[i].w == 0)
            r = out.rows[i + 1].w == 0 ? 1.0 : std::numeric_limits<double>::infinity();
        else
            r = (out.rows[i + 1].w / out.rows[i].w).convert_to<double>();
        out.ratios.push_back(r);
        out.max_ratio = std::max(out.max_ratio, r);
    }
    size_t nr = out.ratios.size();
    if (nr >= 3)
        out.growing_tail = out.ratios[nr - 1] > out.ratios[nr - 2] &&
                           out.ratios[nr - 2] > out.ratios[nr - 3];
    return out;
}

}  // namespace symcount
