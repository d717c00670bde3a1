#pragma once

// Places, S-points, and the product height H_S(z) = ||z||_inf * prod_p ||z||_p
// with a euclidean norm at infinity (optional integer Gram matrix) and max
// norms at the finite places. The real square root is deferred so that height
// comparisons against rational thresholds stay exact.

#include <optional>
#include <vector>

#include "numeric.hpp"

namespace symcount {

inline bool is_prime64(i64 v) {
    if (v < 2) return false;
    for (i64 d = 2; d * d <= v; ++d)
        if (v % d == 0) return false;
    return true;
}

struct PlaceSet {
    std::vector<i64> finite_primes;  // sorted, distinct primes; infinity is implicit

    static PlaceSet with_primes(std::vector<i64> primes) {
        std::sort(primes.begin(), primes.end());
        for (size_t i = 0; i < primes.size(); ++i) {
            if (!is_prime64(primes[i]))
                throw std::invalid_argument("not a prime: " + std::to_string(primes[i]));
            if (i > 0 && primes[i] == primes[i - 1])
                throw std::invalid_argument("duplicate prime: " + std::to_string(primes[i]));
        }
        return PlaceSet{std::move(primes)};
    }

    Int m_S() const {
        Int m = 1;
        for (i64 p : finite_primes) m *= p;
        return m;
    }

    bool has(i64 p) const {
        return std::binary_search(finite_primes.begin(), finite_primes.end(), p);
    }
};

// A point of Q^n with denominator supported on S, kept in reduced form:
// no prime of S divides den together with every entry of x.
struct SPoint {
    std::vector<Int> x;
    Int den = 1;
};

inline SPoint make_spoint(std::vector<Int> x, Int den, const PlaceSet& S) {
    if (den <= 0) throw std::invalid_argument("denominator must be positive");
    if (!supported_on(den, S.finite_primes))
        throw std::invalid_argument("denominator " + den.str() + " is not supported on S");
    for (i64 p : S.finite_primes) {
        while (den % p == 0) {
            bool all = true;
            for (const auto& c : x)
                if (c % p != 0) { all = false; break; }
            if (!all) break;
            for (auto& c : x) c /= p;
            den /= p;
        }
    }
    return SPoint{std::move(x), std::move(den)};
}

inline std::vector<Rat> spoint_coords(const SPoint& z) {
    std::vector<Rat> out(z.x.size());
    for (size_t i = 0; i < z.x.size(); ++i) out[i] = Rat(z.x[i], z.den);
    return out;
}

// ||z||_p = p^e with e = -min_i v_p(z_i); throws on the zero vector.
inline int padic_norm_exp(const std::vector<Rat>& z, i64 p) {
    bool seen = false;
    int minv = 0;
    for (const auto& c : z) {
        if (c == 0) continue;
        int v = valuation(c, p);
        if (!seen || v < minv) minv = v;
        seen = true;
    }
    if (!seen) throw std::invalid_argument("p-adic norm of the zero vector");
    return -minv;
}

struct HeightProfile {
    PlaceSet places;  // finite primes; the infinite place is always present
    std::optional<std::vector<std::vector<Int>>> gram;  // defaults to identity
};

// H = sqrt(norm_sq) * padic, with both factors exact.
struct HeightValue {
    Rat norm_sq;  // z^T G z
    Rat padic;    // prod over finite places of ||z||_p

    double value() const {
        return std::sqrt(static_cast<double>(norm_sq)) * static_cast<double>(padic);
    }

    // H < T, exactly (T > 0)
    bool less_than(const Rat& T) const {
        assert(T > 0);
        return norm_sq * padic * padic < T * T;
    }

    bool less_eq(const Rat& T) const {
        assert(T > 0);
        return norm_sq * padic * padic <= T * T;
    }
};

inline HeightValue height(const std::vector<Rat>& z, const HeightProfile& prof) {
    Rat nsq = 0;
    if (prof.gram) {
        const auto& G = *prof.gram;
        if (G.size() != z.size()) throw std::invalid_argument("Gram matrix dimension mismatch");
        for (size_t i = 0; i < z.size(); ++i)
            for (size_t j = 0; j < z.size(); ++j)
                if (G[i][j] != 0) nsq += Rat(G[i][j]) * z[i] * z[j];
    } else {
        for (const auto& c : z) nsq += c * c;
    }
    Rat padic = 1;
    for (i64 p : prof.places.finite_primes) {
        int e = padic_norm_exp(z, p);
        if (e >= 0)
            padic *= ipow(Int(p), e);
        else
            padic /= ipow(Int(p), -e);
    }
    return HeightValue{std::move(nsq), std::move(padic)};
}

inline HeightValue height(const SPoint& z, const HeightProfile& prof) {
    return height(spoint_coords(z), prof);
}

} // namespace symcount
