#pragma once

// Symmetric affine varieties f(x) = m for three families of integral forms:
//   quadric   : f(x) = x^T Q x on Z^n, n >= 3 (n = 3 requires Q anisotropic over Q)
//   det_sym   : f = sign * det of a symmetric n x n matrix, coordinates are the
//               n(n+1)/2 entries on and above the diagonal, row-major
//   pfaffian  : f = sign * pf of a skew 2k x 2k matrix, coordinates are the
//               k(2k-1) entries above the diagonal, row-major
// All evaluation is exact over cpp_int / cpp_rational; doubles only where a
// real-valued consumer (Monte Carlo, projections) needs them.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "numeric.hpp"

namespace symcount {

enum class VarietyKind { quadric, det_sym, pfaffian };

inline std::string kind_name(VarietyKind k) {
    switch (k) {
        case VarietyKind::quadric: return "quadric";
        case VarietyKind::det_sym: return "det_sym";
        case VarietyKind::pfaffian: return "pfaffian";
    }
    return "?";
}

// ---- packed symmetric / skew coordinates ----

inline int sym_coord_count(int n) { return n * (n + 1) / 2; }
inline int skew_coord_count(int n) { return n * (n - 1) / 2; }

// index of (i,j), i <= j, in the packed upper triangle including the diagonal
inline int sym_index(int i, int j, int n) {
    assert(0 <= i && i <= j && j < n);
    return i * n - i * (i - 1) / 2 + (j - i);
}

// index of (i,j), i < j, in the packed strict upper triangle
inline int skew_index(int i, int j, int n) {
    assert(0 <= i && i < j && j < n);
    return i * n - i * (i + 3) / 2 + j - 1;
}

template <class T, class S>
std::vector<std::vector<T>> build_sym_matrix(const std::vector<S>& coords, int n) {
    assert((int)coords.size() == sym_coord_count(n));
    std::vector<std::vector<T>> M(n, std::vector<T>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            M[i][j] = M[j][i] = static_cast<T>(coords[sym_index(i, j, n)]);
    return M;
}

template <class T, class S>
std::vector<std::vector<T>> build_skew_matrix(const std::vector<S>& coords, int n) {
    assert((int)coords.size() == skew_coord_count(n));
    std::vector<std::vector<T>> M(n, std::vector<T>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            M[i][j] = static_cast<T>(coords[skew_index(i, j, n)]);
            M[j][i] = -M[i][j];
        }
    return M;
}

// ---- exact linear algebra ----

// Fraction-free (Bareiss) determinant.
inline Int det_exact(std::vector<std::vector<Int>> a) {
    const int n = (int)a.size();
    if (n == 0) return 1;
    Int sign = 1, prev = 1;
    for (int k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            int r = k + 1;
            while (r < n && a[r][k] == 0) ++r;
            if (r == n) return 0;
            std::swap(a[k], a[r]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

inline double det_double(std::vector<std::vector<double>> a) {
    const int n = (int)a.size();
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int r = k + 1; r < n; ++r)
            if (std::fabs(a[r][k]) > std::fabs(a[piv][k])) piv = r;
        if (a[piv][k] == 0.0) return 0.0;
        if (piv != k) { std::swap(a[piv], a[k]); det = -det; }
        det *= a[k][k];
        for (int r = k + 1; r < n; ++r) {
            double f = a[r][k] / a[k][k];
            for (int c = k; c < n; ++c) a[r][c] -= f * a[k][c];
        }
    }
    return det;
}

// Pfaffian by expansion along the first active row; exact for exact T.
template <class T>
T pfaffian_of(const std::vector<std::vector<T>>& A, std::vector<int> active) {
    if (active.empty()) return T(1);
    const int i0 = active[0];
    T acc(0);
    int sgn = 1;
    for (size_t t = 1; t < active.size(); ++t) {
        const int j = active[t];
        if (!(A[i0][j] == T(0))) {
            std::vector<int> rest;
            rest.reserve(active.size() - 2);
            for (size_t s = 1; s < active.size(); ++s)
                if (s != t) rest.push_back(active[s]);
            T term = A[i0][j] * pfaffian_of(A, rest);
            acc += (sgn > 0) ? term : -term;
        }
        sgn = -sgn;
    }
    return acc;
}

template <class T>
T pfaffian_of(const std::vector<std::vector<T>>& A) {
    std::vector<int> active(A.size());
    for (size_t i = 0; i < active.size(); ++i) active[i] = (int)i;
    return pfaffian_of(A, active);
}

// ---- the variety description type ----

struct VarietySpec {
    VarietyKind kind = VarietyKind::quadric;
    std::vector<std::vector<Int>> Q;  // quadric only
    int matrix_size = 0;              // det_sym / pfaffian
    int sign = 1;                     // det_sym / pfaffian
    bool anisotropic_checked = false; // quadric n == 3

    int ambient_dim() const {
        switch (kind) {
            case VarietyKind::quadric: return (int)Q.size();
            case VarietyKind::det_sym: return sym_coord_count(matrix_size);
            case VarietyKind::pfaffian: return skew_coord_count(matrix_size);
        }
        return 0;
    }

    int degree() const {
        switch (kind) {
            case VarietyKind::quadric: return 2;
            case VarietyKind::det_sym: return matrix_size;
            case VarietyKind::pfaffian: return matrix_size / 2;
        }
        return 0;
    }

    static VarietySpec quadric(std::vector<std::vector<Int>> Q);
    static VarietySpec quadric_diag(const std::vector<Int>& diag);
    static VarietySpec det_sym(int n, int sign = 1);
    static VarietySpec pfaffian(int size, int sign = 1);
};

// ---- quadric helpers ----

inline bool is_positive_definite(const std::vector<std::vector<Int>>& Q) {
    for (size_t k = 1; k <= Q.size(); ++k) {
        std::vector<std::vector<Int>> lead(k, std::vector<Int>(k));
        for (size_t i = 0; i < k; ++i)
            for (size_t j = 0; j < k; ++j) lead[i][j] = Q[i][j];
        if (det_exact(lead) <= 0) return false;
    }
    return true;
}

inline bool is_negative_definite(std::vector<std::vector<Int>> Q) {
    for (auto& row : Q)
        for (auto& v : row) v = -v;
    return is_positive_definite(Q);
}

namespace detail {

inline __int128 isqrt128(__int128 v) {
    if (v < 2) return v < 0 ? -1 : v;
    __int128 r = (__int128)std::sqrt((double)v);
    while (r > 0 && r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

} // namespace detail

// Searches for a nonzero integral zero of a ternary form with sup-norm <= bound
// (two coordinates scanned, third solved exactly). Used as the anisotropy screen.
inline std::optional<std::array<i64, 3>> ternary_zero_screen(
        const std::vector<std::vector<Int>>& Q, i64 bound) {
    assert(Q.size() == 3);
    i64 q[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) q[i][j] = Q[i][j].convert_to<i64>();
    for (i64 x = -bound; x <= bound; ++x) {
        for (i64 y = -bound; y <= bound; ++y) {
            __int128 a = q[2][2];
            __int128 b = 2 * (q[0][2] * x + q[1][2] * y);
            __int128 c = (__int128)q[0][0] * x * x + 2 * (__int128)q[0][1] * x * y +
                         (__int128)q[1][1] * y * y;
            auto report = [&](i64 z) -> std::optional<std::array<i64, 3>> {
                if (z < -bound || z > bound) return std::nullopt;
                if (x == 0 && y == 0 && z == 0) return std::nullopt;
                return std::array<i64, 3>{x, y, z};
            };
            if (a == 0) {
                if (b == 0) {
                    if (c == 0)
                        if (auto r = report(0)) return r;
                } else if (c % b == 0) {
                    if (auto r = report((i64)(-c / b))) return r;
                }
                continue;
            }
            __int128 disc = b * b - 4 * a * c;
            if (disc < 0) continue;
            __int128 root = detail::isqrt128(disc);
            if (root * root != disc) continue;
            for (int s : {-1, 1}) {
                __int128 num = -b + s * root;
                if (num % (2 * a) == 0)
                    if (auto r = report((i64)(num / (2 * a)))) return r;
            }
        }
    }
    return std::nullopt;
}

// ---- validation ----

inline void validate(const VarietySpec& spec) {
    switch (spec.kind) {
        case VarietyKind::quadric: {
            const size_t n = spec.Q.size();
            if (n < 3) throw std::invalid_argument("quadric needs n >= 3");
            for (const auto& row : spec.Q)
                if (row.size() != n) throw std::invalid_argument("quadric matrix not square");
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j)
                    if (spec.Q[i][j] != spec.Q[j][i])
                        throw std::invalid_argument("quadric matrix not symmetric");
            if (det_exact(spec.Q) == 0)
                throw std::invalid_argument("quadric matrix is singular");
            if (n == 3 && !is_positive_definite(spec.Q) && !is_negative_definite(spec.Q)) {
                if (auto zero = ternary_zero_screen(spec.Q, 1000)) {
                    auto z = *zero;
                    throw std::invalid_argument(
                        "ternary quadric is isotropic: zero at (" + std::to_string(z[0]) + "," +
                        std::to_string(z[1]) + "," + std::to_string(z[2]) + ")");
                }
            }
            break;
        }
        case VarietyKind::det_sym:
            if (spec.matrix_size < 3) throw std::invalid_argument("det_sym needs n >= 3");
            if (spec.sign != 1 && spec.sign != -1)
                throw std::invalid_argument("sign must be +1 or -1");
            break;
        case VarietyKind::pfaffian:
            if (spec.matrix_size < 4 || spec.matrix_size % 2 != 0)
                throw std::invalid_argument("pfaffian needs even size >= 4");
            if (spec.sign != 1 && spec.sign != -1)
                throw std::invalid_argument("sign must be +1 or -1");
            break;
    }
}

inline VarietySpec VarietySpec::quadric(std::vector<std::vector<Int>> Qm) {
    VarietySpec s;
    s.kind = VarietyKind::quadric;
    s.Q = std::move(Qm);
    validate(s);
    s.anisotropic_checked = true;
    return s;
}

inline VarietySpec VarietySpec::quadric_diag(const std::vector<Int>& diag) {
    std::vector<std::vector<Int>> Qm(diag.size(), std::vector<Int>(diag.size(), 0));
    for (size_t i = 0; i < diag.size(); ++i) Qm[i][i] = diag[i];
    return quadric(std::move(Qm));
}

inline VarietySpec VarietySpec::det_sym(int n, int sign) {
    VarietySpec s;
    s.kind = VarietyKind::det_sym;
    s.matrix_size = n;
    s.sign = sign;
    validate(s);
    return s;
}

inline VarietySpec VarietySpec::pfaffian(int size, int sign) {
    VarietySpec s;
    s.kind = VarietyKind::pfaffian;
    s.matrix_size = size;
    s.sign = sign;
    validate(s);
    return s;
}

// ---- evaluation ----

namespace detail {

template <class T>
void require_dim(const VarietySpec& spec, const std::vector<T>& x) {
    if ((int)x.size() != spec.ambient_dim())
        throw std::invalid_argument("coordinate vector has dimension " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(spec.ambient_dim()));
}

template <class Acc, class T>
Acc quadric_value(const std::vector<std::vector<Int>>& Q, const std::vector<T>& x) {
    const size_t n = Q.size();
    Acc acc(0);
    for (size_t i = 0; i < n; ++i) {
        if (!(x[i] == T(0))) {
            Acc diag = static_cast<Acc>(Q[i][i]);
            acc += diag * static_cast<Acc>(x[i]) * static_cast<Acc>(x[i]);
        }
        for (size_t j = i + 1; j < n; ++j)
            if (Q[i][j] != 0)
                acc += Acc(2) * static_cast<Acc>(Q[i][j]) * static_cast<Acc>(x[i]) *
                       static_cast<Acc>(x[j]);
    }
    return acc;
}

} // namespace detail

inline Int evaluate(const VarietySpec& spec, const std::vector<i64>& x) {
    detail::require_dim(spec, x);
    switch (spec.kind) {
        case VarietyKind::quadric:
            return detail::quadric_value<Int>(spec.Q, x);
        case VarietyKind::det_sym:
            return spec.sign * det_exact(build_sym_matrix<Int>(x, spec.matrix_size));
        case VarietyKind::pfaffian:
            return spec.sign * pfaffian_of(build_skew_matrix<Int>(x, spec.matrix_size));
    }
    return 0;
}

inline Rat evaluate(const VarietySpec& spec, const std::vector<Rat>& x) {
    detail::require_dim(spec, x);
    if (spec.kind == VarietyKind::quadric)
        return detail::quadric_value<Rat>(spec.Q, x);
    // clear denominators, evaluate over Int, divide by den^degree
    Int den = 1;
    for (const auto& c : x)
        den = boost::multiprecision::lcm(den, boost::multiprecision::denominator(c));
    std::vector<Int> scaled(x.size());
    for (size_t i = 0; i < x.size(); ++i)
        scaled[i] = boost::multiprecision::numerator(x[i]) *
                    (den / boost::multiprecision::denominator(x[i]));
    Int value = (spec.kind == VarietyKind::det_sym)
                    ? spec.sign * det_exact(build_sym_matrix<Int>(scaled, spec.matrix_size))
                    : spec.sign * pfaffian_of(build_skew_matrix<Int>(scaled, spec.matrix_size));
    return Rat(value, ipow(den, spec.degree()));
}

inline double evaluate_d(const VarietySpec& spec, const std::vector<double>& x) {
    detail::require_dim(spec, x);
    switch (spec.kind) {
        case VarietyKind::quadric:
            return detail::quadric_value<double>(spec.Q, x);
        case VarietyKind::det_sym:
            return spec.sign * det_double(build_sym_matrix<double>(x, spec.matrix_size));
        case VarietyKind::pfaffian:
            return spec.sign * pfaffian_of(build_skew_matrix<double>(x, spec.matrix_size));
    }
    return 0;
}

// ---- gradient (real) ----

inline std::vector<double> gradient(const VarietySpec& spec, const std::vector<double>& x) {
    detail::require_dim(spec, x);
    std::vector<double> g(x.size(), 0.0);
    switch (spec.kind) {
        case VarietyKind::quadric: {
            const size_t n = spec.Q.size();
            for (size_t i = 0; i < n; ++i) {
                double acc = 0;
                for (size_t j = 0; j < n; ++j)
                    acc += static_cast<double>(spec.Q[i][j]) * x[j];
                g[i] = 2 * acc;
            }
            break;
        }
        case VarietyKind::det_sym: {
            const int n = spec.matrix_size;
            auto M = build_sym_matrix<double>(x, n);
            auto minor_det = [&](int r, int c) {
                std::vector<std::vector<double>> m;
                m.reserve(n - 1);
                for (int i = 0; i < n; ++i) {
                    if (i == r) continue;
                    std::vector<double> row;
                    row.reserve(n - 1);
                    for (int j = 0; j < n; ++j)
                        if (j != c) row.push_back(M[i][j]);
                    m.push_back(std::move(row));
                }
                return det_double(m);
            };
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    double cof = (((i + j) % 2) ? -1.0 : 1.0) * minor_det(i, j);
                    g[sym_index(i, j, n)] = spec.sign * (i == j ? cof : 2 * cof);
                }
            break;
        }
        case VarietyKind::pfaffian: {
            const int n = spec.matrix_size;
            auto A = build_skew_matrix<double>(x, n);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    std::vector<int> active;
                    active.reserve(n - 2);
                    for (int t = 0; t < n; ++t)
                        if (t != i && t != j) active.push_back(t);
                    double m = pfaffian_of(A, active);
                    g[skew_index(i, j, n)] =
                        spec.sign * (((i + j + 1) % 2) ? -m : m);
                }
            break;
        }
    }
    return g;
}

// ---- radial projection to the unit level ----

// x on V_m maps to x / m^(1/degree) on V_1 (real d-th root; for odd degree the
// root of a negative level is negative).
inline std::vector<double> radial_project(const VarietySpec& spec, const std::vector<i64>& x,
                                          const Int& m) {
    if (m == 0) throw std::invalid_argument("level must be nonzero");
    Int value = evaluate(spec, x);
    if (value != m)
        throw std::invalid_argument("point does not lie on the requested level (f = " +
                                    value.str() + ", level " + m.str() + ")");
    const int d = spec.degree();
    if (m < 0 && d % 2 == 0)
        throw std::invalid_argument("negative level has no real root for even degree");
    double mag = std::pow(std::fabs(static_cast<double>(m)), 1.0 / d);
    double root = (m < 0) ? -mag : mag;
    std::vector<double> z(x.size());
    for (size_t i = 0; i < x.size(); ++i) z[i] = static_cast<double>(x[i]) / root;
    assert(std::fabs(evaluate_d(spec, z) - 1.0) <= 1e-9);
    return z;
}

// ---- JSON ----

inline nlohmann::json to_json(const VarietySpec& spec) {
    nlohmann::json j;
    j["kind"] = kind_name(spec.kind);
    switch (spec.kind) {
        case VarietyKind::quadric: {
            j["n"] = spec.Q.size();
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& row : spec.Q) {
                nlohmann::json r = nlohmann::json::array();
                for (const auto& v : row) r.push_back(v.convert_to<i64>());
                rows.push_back(std::move(r));
            }
            j["Q"] = std::move(rows);
            break;
        }
        case VarietyKind::det_sym:
        case VarietyKind::pfaffian:
            j["n"] = spec.matrix_size;
            j["sign"] = spec.sign;
            break;
    }
    return j;
}

inline VarietySpec spec_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "quadric") {
        std::vector<std::vector<Int>> Q;
        for (const auto& row : j.at("Q")) {
            std::vector<Int> r;
            for (const auto& v : row) r.emplace_back(v.get<i64>());
            Q.push_back(std::move(r));
        }
        return VarietySpec::quadric(std::move(Q));
    }
    if (kind == "det_sym")
        return VarietySpec::det_sym(j.at("n").get<int>(), j.value("sign", 1));
    if (kind == "pfaffian")
        return VarietySpec::pfaffian(j.at("n").get<int>(), j.value("sign", 1));
    throw std::invalid_argument("unknown variety kind: " + kind);
}

} // namespace symcount
