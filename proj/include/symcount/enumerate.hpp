#pragma once

// Integral and S-integral point enumeration on f(x) = m.
//
// Strategy by shape of the form:
//   positive definite quadric  -> recursive interval pruning from the
//                                 U^T D U decomposition (float bounds padded,
//                                 every candidate verified exactly)
//   indefinite quadric         -> odometer over all but one coordinate, the
//                                 remaining quadratic solved by exact integer
//                                 square root (solved coordinate = largest
//                                 |diagonal| entry)
//   det_sym / pfaffian         -> odometer over all but the final packed
//                                 coordinate, which enters the form linearly
//                                 and is solved exactly
// A naive full-scan oracle backs all of them for cross-checking.

#include <functional>
#include <map>
#include <memory>
#include <numeric>

#include "heights.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "variety.hpp"

namespace symcount {

using Point = std::vector<i64>;

struct Box {
    std::vector<i64> lo, hi;
};

inline Box box_cube(int dim, i64 T) {
    Box b;
    b.lo.assign(dim, -T);
    b.hi.assign(dim, T);
    return b;
}

struct EnumOptions {
    int chunks = 0;     // 0 = pick from thread count
    bool oracle = false;
};

namespace detail {

inline void check_box(const VarietySpec& spec, const Box& box) {
    if ((int)box.lo.size() != spec.ambient_dim() || (int)box.hi.size() != spec.ambient_dim())
        throw std::invalid_argument("box dimension mismatch");
    for (size_t i = 0; i < box.lo.size(); ++i)
        if (box.lo[i] > box.hi[i])
            throw std::invalid_argument("box has empty interval at coordinate " +
                                        std::to_string(i));
}

inline i64 to_i64(const Int& v, const char* what) {
    if (v > std::numeric_limits<i64>::max() || v < std::numeric_limits<i64>::min())
        throw std::invalid_argument(std::string(what) + " does not fit in 64 bits");
    return v.convert_to<i64>();
}

// Flattened int64 copy of a quadric matrix; evaluation in __int128.
struct QuadricEval {
    int n;
    std::vector<i64> q;  // row-major

    explicit QuadricEval(const std::vector<std::vector<Int>>& Q) : n((int)Q.size()) {
        q.reserve(n * n);
        for (const auto& row : Q)
            for (const auto& v : row) q.push_back(to_i64(v, "quadric entry"));
    }

    __int128 value(const Point& x) const {
        __int128 acc = 0;
        for (int i = 0; i < n; ++i) {
            const i64 xi = x[i];
            if (xi == 0) continue;
            acc += (__int128)q[i * n + i] * xi * xi;
            for (int j = i + 1; j < n; ++j)
                acc += 2 * (__int128)q[i * n + j] * xi * x[j];
        }
        return acc;
    }
};

// Direct 6-coordinate formulas used by the oracle; deliberately independent of
// the exact linear algebra in variety.hpp.
inline __int128 det3_packed(const Point& x) {
    // (a,b,c,d,e,f) = (m00,m01,m02,m11,m12,m22)
    __int128 a = x[0], b = x[1], c = x[2], d = x[3], e = x[4], f = x[5];
    return a * d * f - a * e * e - b * b * f + 2 * b * c * e - c * c * d;
}

inline __int128 pf4_packed(const Point& x) {
    // (a01,a02,a03,a12,a13,a23)
    return (__int128)x[0] * x[5] - (__int128)x[1] * x[4] + (__int128)x[2] * x[3];
}

// Runs fn over the odometer of the box restricted to coords in `free`,
// with free[0] further restricted to [outer_lo, outer_hi].
template <class Fn>
void odometer(const Box& box, const std::vector<int>& free, i64 outer_lo, i64 outer_hi,
              Point& x, Fn&& fn) {
    for (int i : free) x[i] = (i == free[0]) ? outer_lo : box.lo[i];
    if (outer_lo > outer_hi) return;
    while (true) {
        fn(x);
        size_t k = free.size();
        while (k > 0) {
            int i = free[k - 1];
            i64 hi = (k == 1) ? outer_hi : box.hi[i];
            if (x[i] < hi) { ++x[i]; break; }
            x[i] = (k == 1) ? outer_lo : box.lo[i];
            --k;
        }
        if (k == 0) break;
    }
}

inline double cell_count(const Box& box, const std::vector<int>& free) {
    double c = 1;
    for (int i : free) c *= double(box.hi[i] - box.lo[i] + 1);
    return c;
}

// Splits [lo, hi] into `parts` contiguous chunks, returns inclusive bounds.
inline std::vector<std::pair<i64, i64>> split_interval(i64 lo, i64 hi, int parts) {
    std::vector<std::pair<i64, i64>> out;
    i64 len = hi - lo + 1;
    if (len <= 0) return out;
    parts = (int)std::min<i64>(parts, len);
    i64 base = len / parts, extra = len % parts;
    i64 at = lo;
    for (int i = 0; i < parts; ++i) {
        i64 take = base + (i < extra ? 1 : 0);
        out.emplace_back(at, at + take - 1);
        at += take;
    }
    return out;
}

inline int pick_chunks(const EnumOptions& opts) {
    if (opts.chunks > 0) return opts.chunks;
    return std::max(1, 2 * thread_count());
}

// ---- positive definite kernel ----

inline std::vector<Point> definite_kernel(const std::vector<std::vector<Int>>& Q, i64 m,
                                          const Box& box, const EnumOptions& opts) {
    if (m <= 0) return {};
    const int n = (int)Q.size();
    // Q = U^T D U, U unit upper triangular: f = sum_k d_k (x_k + sum_{j>k} u_kj x_j)^2
    std::vector<std::vector<double>> A(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A[i][j] = static_cast<double>(Q[i][j]);
    std::vector<double> d(n);
    std::vector<std::vector<double>> u(n, std::vector<double>(n, 0.0));
    for (int k = 0; k < n; ++k) {
        d[k] = A[k][k];
        assert(d[k] > 0);
        for (int j = k + 1; j < n; ++j) u[k][j] = A[k][j] / d[k];
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) A[i][j] -= A[i][k] * A[k][j] / d[k];
    }

    QuadricEval eval(Q);
    const double pad = 1e-6 * (std::fabs((double)m) + 1.0);

    // budget[k] = m - sum_{l>k} d_l y_l^2 while descending from k = n-1
    std::function<void(int, Point&, double, std::vector<Point>&)> descend =
        [&](int k, Point& x, double budget, std::vector<Point>& out) {
            double off = 0;
            for (int j = k + 1; j < n; ++j) off += u[k][j] * x[j];
            double r = std::sqrt(std::max(0.0, budget + pad) / d[k]);
            i64 lo = std::max<i64>(box.lo[k], (i64)std::ceil(-r - off - 1e-9));
            i64 hi = std::min<i64>(box.hi[k], (i64)std::floor(r - off + 1e-9));
            for (i64 v = lo; v <= hi; ++v) {
                x[k] = v;
                double y = v + off;
                double used = d[k] * y * y;
                if (k == 0) {
                    if (eval.value(x) == m) out.push_back(x);
                } else if (used <= budget + pad) {
                    descend(k - 1, x, budget - used, out);
                }
            }
        };

    // top level split into chunks on x_{n-1}
    double r_top = std::sqrt((m + pad) / d[n - 1]);
    i64 top_lo = std::max<i64>(box.lo[n - 1], (i64)std::ceil(-r_top - 1e-9));
    i64 top_hi = std::min<i64>(box.hi[n - 1], (i64)std::floor(r_top + 1e-9));
    auto chunks = split_interval(top_lo, top_hi, pick_chunks(opts));
    std::vector<std::vector<Point>> slots(chunks.size());
    run_chunks((int)chunks.size(), [&](int c) {
        Point x(n, 0);
        for (i64 v = chunks[c].first; v <= chunks[c].second; ++v) {
            x[n - 1] = v;
            double y = v;  // no offset at the top level
            descend(n - 2, x, m - d[n - 1] * y * y, slots[c]);
        }
    });
    std::vector<Point> out;
    for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
    std::sort(out.begin(), out.end());
    return out;
}

// ---- indefinite quadric kernel ----

inline void solve_quadratic_cell(i64 a, __int128 b, __int128 c, i64 lo, i64 hi,
                                 const std::function<void(i64)>& emit) {
    // a t^2 + b t + c = 0, integer t in [lo, hi]
    if (a == 0) {
        if (b == 0) {
            if (c == 0)
                for (i64 t = lo; t <= hi; ++t) emit(t);
        } else if (c % b == 0) {
            __int128 t = -c / b;
            if (t >= lo && t <= hi) emit((i64)t);
        }
        return;
    }
    __int128 disc = b * b - 4 * (__int128)a * c;
    if (disc < 0) return;
    __int128 root = detail::isqrt128(disc);
    if (root * root != disc) return;
    for (int s : {-1, 1}) {
        if (root == 0 && s == -1) continue;
        __int128 num = -b + s * root;
        if (num % (2 * (__int128)a) == 0) {
            __int128 t = num / (2 * (__int128)a);
            if (t >= lo && t <= hi) emit((i64)t);
        }
    }
}

inline std::vector<Point> indefinite_kernel(const VarietySpec& spec, i64 m, const Box& box,
                                            const EnumOptions& opts) {
    const int n = spec.ambient_dim();
    QuadricEval eval(spec.Q);
    // solve the coordinate with the largest |diagonal|
    int s = 0;
    for (int i = 1; i < n; ++i)
        if (std::llabs(eval.q[i * n + i]) > std::llabs(eval.q[s * n + s])) s = i;
    std::vector<int> free;
    for (int i = 0; i < n; ++i)
        if (i != s) free.push_back(i);

    if (cell_count(box, free) > 5e8)
        throw std::runtime_error("enumeration box too large");

    auto chunks = split_interval(box.lo[free[0]], box.hi[free[0]], pick_chunks(opts));
    std::vector<std::vector<Point>> slots(chunks.size());
    run_chunks((int)chunks.size(), [&](int ci) {
        Point x(n, 0);
        odometer(box, free, chunks[ci].first, chunks[ci].second, x, [&](Point& cell) {
            cell[s] = 0;
            __int128 c = eval.value(cell) - m;
            __int128 b = 0;
            for (int i = 0; i < n; ++i)
                if (i != s) b += (__int128)eval.q[s * n + i] * cell[i];
            b *= 2;
            solve_quadratic_cell(eval.q[s * n + s], b, c, box.lo[s], box.hi[s], [&](i64 t) {
                cell[s] = t;
                slots[ci].push_back(cell);
                cell[s] = 0;
            });
        });
    });
    std::vector<Point> out;
    for (auto& sl : slots) out.insert(out.end(), sl.begin(), sl.end());
    std::sort(out.begin(), out.end());
    return out;
}

// ---- det_sym / pfaffian kernel (final packed coordinate is linear) ----

inline std::vector<Point> linear_solve_kernel(const VarietySpec& spec, const Int& m,
                                              const Box& box) {
    const int dim = spec.ambient_dim();
    const int s = dim - 1;
    std::vector<int> free;
    for (int i = 0; i < s; ++i) free.push_back(i);
    if (detail::cell_count(box, free) > 2e7)
        throw std::runtime_error("enumeration box too large");

    const int size = spec.matrix_size;
    std::vector<Point> out;
    Point x(dim, 0);
    odometer(box, free, box.lo[free[0]], box.hi[free[0]], x, [&](Point& cell) {
        cell[s] = 0;
        Int f0 = evaluate(spec, cell);
        Int coef;
        if (spec.kind == VarietyKind::det_sym) {
            // d det / d m_{n-1,n-1} = leading principal minor
            std::vector<std::vector<Int>> lead(size - 1, std::vector<Int>(size - 1));
            for (int i = 0; i < size - 1; ++i)
                for (int j = 0; j < size - 1; ++j)
                    lead[i][j] = cell[sym_index(std::min(i, j), std::max(i, j), size)];
            coef = spec.sign * det_exact(lead);
        } else {
            // d pf / d a_{s-2,s-1} = + pf(matrix with the last two rows/cols removed)
            auto A = build_skew_matrix<Int>(cell, size);
            std::vector<int> active;
            for (int i = 0; i < size - 2; ++i) active.push_back(i);
            coef = spec.sign * pfaffian_of(A, active);
        }
        Int rhs = m - f0;
        if (coef == 0) {
            if (rhs == 0)
                for (i64 t = box.lo[s]; t <= box.hi[s]; ++t) {
                    cell[s] = t;
                    out.push_back(cell);
                }
        } else if (rhs % coef == 0) {
            Int t = rhs / coef;
            if (t >= box.lo[s] && t <= box.hi[s]) {
                cell[s] = t.convert_to<i64>();
                out.push_back(cell);
            }
        }
        cell[s] = 0;
    });
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace detail

// Full-scan oracle: walk the whole box, test every point exactly.
inline std::vector<Point> integral_points_oracle(const VarietySpec& spec, const Int& m,
                                                 const Box& box, EnumOptions opts = {}) {
    if (m == 0) throw std::invalid_argument("level must be nonzero");
    detail::check_box(spec, box);
    const int dim = spec.ambient_dim();
    std::vector<int> free(dim);
    std::iota(free.begin(), free.end(), 0);
    if (detail::cell_count(box, free) > 5e8)
        throw std::runtime_error("oracle box too large");

    std::function<bool(const Point&)> matches;
    if (spec.kind == VarietyKind::quadric) {
        auto eval = std::make_shared<detail::QuadricEval>(spec.Q);
        i64 mi = detail::to_i64(m, "level");
        matches = [eval, mi](const Point& x) { return eval->value(x) == mi; };
    } else if (spec.kind == VarietyKind::det_sym && spec.matrix_size == 3) {
        Int mm = spec.sign > 0 ? m : -m;
        i64 mi = detail::to_i64(mm, "level");
        matches = [mi](const Point& x) { return detail::det3_packed(x) == mi; };
    } else if (spec.kind == VarietyKind::pfaffian && spec.matrix_size == 4) {
        Int mm = spec.sign > 0 ? m : -m;
        i64 mi = detail::to_i64(mm, "level");
        matches = [mi](const Point& x) { return detail::pf4_packed(x) == mi; };
    } else {
        Int mm = m;
        matches = [&spec, mm](const Point& x) { return evaluate(spec, x) == mm; };
    }

    auto chunks = detail::split_interval(box.lo[0], box.hi[0], detail::pick_chunks(opts));
    std::vector<std::vector<Point>> slots(chunks.size());
    run_chunks((int)chunks.size(), [&](int ci) {
        Point x(dim, 0);
        detail::odometer(box, free, chunks[ci].first, chunks[ci].second, x, [&](Point& p) {
            if (matches(p)) slots[ci].push_back(p);
        });
    });
    std::vector<Point> out;
    for (auto& sl : slots) out.insert(out.end(), sl.begin(), sl.end());
    std::sort(out.begin(), out.end());
    return out;
}

// All integral x with f(x) = m inside the box, lexicographically sorted.
inline std::vector<Point> integral_points_box(const VarietySpec& spec, const Int& m,
                                              const Box& box, EnumOptions opts = {}) {
    if (m == 0) throw std::invalid_argument("level must be nonzero");
    detail::check_box(spec, box);
    if (opts.oracle) return integral_points_oracle(spec, m, box, opts);
    switch (spec.kind) {
        case VarietyKind::quadric: {
            if (is_positive_definite(spec.Q))
                return detail::definite_kernel(spec.Q, detail::to_i64(m, "level"), box, opts);
            if (is_negative_definite(spec.Q)) {
                auto neg = spec.Q;
                for (auto& row : neg)
                    for (auto& v : row) v = -v;
                return detail::definite_kernel(neg, detail::to_i64(-m, "level"), box, opts);
            }
            return detail::indefinite_kernel(spec, detail::to_i64(m, "level"), box, opts);
        }
        case VarietyKind::det_sym:
        case VarietyKind::pfaffian:
            return detail::linear_solve_kernel(spec, m, box);
    }
    return {};
}

inline std::vector<Point> integral_points(const VarietySpec& spec, const Int& m, i64 T,
                                          EnumOptions opts = {}) {
    if (T < 0) throw std::invalid_argument("bound must be nonnegative");
    return integral_points_box(spec, m, box_cube(spec.ambient_dim(), T), opts);
}

inline std::vector<Point> primitive_filter(const std::vector<Point>& pts) {
    std::vector<Point> out;
    for (const auto& x : pts) {
        i64 g = 0;
        for (i64 c : x) g = std::gcd(g, std::llabs(c));
        if (g == 1) out.push_back(x);
    }
    return out;
}

// Crude upper bound for |f| over the sup-norm-T box.
inline Int level_bound(const VarietySpec& spec, i64 T) {
    Int t(T);
    switch (spec.kind) {
        case VarietyKind::quadric: {
            Int s = 0;
            for (const auto& row : spec.Q)
                for (const auto& v : row) s += abs(v);
            return s * t * t;
        }
        case VarietyKind::det_sym: {
            Int acc = 1;
            for (int i = 2; i <= spec.matrix_size; ++i) acc *= i;
            return acc * ipow(t, spec.matrix_size);
        }
        case VarietyKind::pfaffian: {
            Int acc = 1;
            for (int i = spec.matrix_size - 1; i >= 3; i -= 2) acc *= i;
            return acc * ipow(t, spec.matrix_size / 2);
        }
    }
    return 0;
}

// Primitive integral points with ||x||_inf < T whose f-value lies in the
// multiplicative semigroup of S; grouped by level, empty levels omitted.
inline std::map<Int, std::vector<Point>> s_points_by_level(const VarietySpec& spec,
                                                           const PlaceSet& S, i64 T,
                                                           EnumOptions opts = {}) {
    if (T < 1) throw std::invalid_argument("bound must be positive");
    std::map<Int, std::vector<Point>> out;
    for (const Int& m : semigroup_elements(S.finite_primes, level_bound(spec, T - 1))) {
        auto pts = primitive_filter(integral_points(spec, m, T - 1, opts));
        if (!pts.empty()) out.emplace(m, std::move(pts));
    }
    return out;
}

// Points z of the unit level with p^k z integral and primitive at p, z in box
// (bounds in unit-level coordinates). Enumerated as x = p^k z on level p^{dk}.
inline std::vector<SPoint> denominator_points(const VarietySpec& spec, i64 p, int k,
                                              const Box& zbox, EnumOptions opts = {}) {
    if (!is_prime64(p)) throw std::invalid_argument("p must be prime");
    if (k < 0) throw std::invalid_argument("denominator exponent must be nonnegative");
    detail::check_box(spec, zbox);
    i64 scale = ipow64(p, k);
    Box xbox;
    xbox.lo.reserve(zbox.lo.size());
    for (size_t i = 0; i < zbox.lo.size(); ++i) {
        xbox.lo.push_back(zbox.lo[i] * scale);
        xbox.hi.push_back(zbox.hi[i] * scale);
    }
    Int m = ipow(Int(p), spec.degree() * k);
    auto S = PlaceSet::with_primes({p});
    std::vector<SPoint> out;
    for (const auto& x : integral_points_box(spec, m, xbox, opts)) {
        if (k > 0) {
            bool unit = false;
            for (i64 c : x)
                if (c % p != 0) { unit = true; break; }
            if (!unit) continue;
        }
        out.push_back(make_spoint(std::vector<Int>(x.begin(), x.end()), ipow(Int(p), k), S));
    }
    return out;
}

} // namespace symcount
