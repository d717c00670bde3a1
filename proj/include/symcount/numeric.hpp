#pragma once

// Exact arithmetic helpers shared by the whole library.

#include <boost/multiprecision/cpp_int.hpp>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace symcount {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

using i64 = std::int64_t;
using u64 = std::uint64_t;

// Floor square root of a nonnegative int64.
inline i64 isqrt64(i64 v) {
    assert(v >= 0);
    if (v < 2) return v;
    i64 r = static_cast<i64>(std::sqrt(static_cast<double>(v)));
    while (r > 0 && r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

// Exact square root: returns true and sets root if v is a perfect square.
inline bool perfect_square(i64 v, i64& root) {
    if (v < 0) return false;
    i64 r = isqrt64(v);
    if (r * r == v) { root = r; return true; }
    return false;
}

inline i64 ipow64(i64 base, int exp) {
    assert(exp >= 0);
    i64 r = 1;
    for (int i = 0; i < exp; ++i) {
        assert(base == 0 || std::llabs(r) <= std::numeric_limits<i64>::max() / std::llabs(base));
        r *= base;
    }
    return r;
}

inline Int ipow(Int base, int exp) {
    assert(exp >= 0);
    Int r = 1;
    while (exp-- > 0) r *= base;
    return r;
}

// p-adic valuation of a nonzero integer.
inline int valuation(Int v, i64 p) {
    assert(v != 0 && p >= 2);
    int k = 0;
    while (v % p == 0) { v /= p; ++k; }
    return k;
}

inline int valuation64(i64 v, i64 p) {
    assert(v != 0 && p >= 2);
    int k = 0;
    while (v % p == 0) { v /= p; ++k; }
    return k;
}

// Valuation of a nonzero rational: v_p(num) - v_p(den).
inline int valuation(const Rat& r, i64 p) {
    assert(r != 0);
    return valuation(boost::multiprecision::numerator(r), p) -
           valuation(boost::multiprecision::denominator(r), p);
}

// All products of the given primes that are <= bound, ascending, 1 included.
inline std::vector<Int> semigroup_elements(const std::vector<i64>& primes, const Int& bound) {
    std::vector<Int> out;
    if (bound < 1) return out;
    out.push_back(1);
    for (i64 p : primes) {
        size_t old = out.size();
        for (size_t i = 0; i < old; ++i) {
            Int v = out[i] * p;
            while (v <= bound) {
                out.push_back(v);
                v *= p;
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// True if v is a (positive) product of powers of the given primes.
inline bool supported_on(Int v, const std::vector<i64>& primes) {
    if (v <= 0) return false;
    for (i64 p : primes)
        while (v % p == 0) v /= p;
    return v == 1;
}

inline std::string rat_string(const Rat& r) {
    const Int num = boost::multiprecision::numerator(r);
    const Int den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

inline Rat parse_rat(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rat(Int(s));
    Int num(s.substr(0, slash));
    Int den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("rational with zero denominator: " + s);
    return Rat(num, den);
}

} // namespace symcount
