#pragma once

// Monte Carlo estimates of invariant-measure volumes at the real place.
//
// The level-set measure on {f = m} is realised as a thin-shell limit:
// Leb{x : |f(x) - m| <= eps, |x| <= T} / (2 eps).  All estimators sample a
// box deterministically from a counter-based stream, so results depend only
// on the arguments, never on thread count.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <symcount/numeric.hpp>
#include <symcount/parallel.hpp>
#include <symcount/rng.hpp>
#include <symcount/variety.hpp>

namespace symcount {

struct VolumeEstimate {
    double value = 0;
    double stderr_ = 0;
    std::string method;
    u64 samples = 0;
    bool degenerate_warning = false;  // gradient nearly vanished on some hits
};

struct NormBinEstimate {
    std::vector<double> mass;     // shell mass with norm in (r_{i-1}, r_i]
    std::vector<double> stderr_;
    u64 samples = 0;
    bool degenerate_warning = false;
};

struct AsymptoticFit {
    double a = 0;  // power of T
    int b = 0;     // power of log T, fitted over a small integer grid
    double c = 0;  // leading constant
    double residual_rms = 0;
};

namespace detail {

// Flattened double-precision evaluator; avoids big-integer traffic per sample.
struct FastForm {
    VarietyKind kind;
    int dim;
    int msize;
    int sign;
    std::vector<double> q;  // quadric only: dense matrix

    explicit FastForm(const VarietySpec& spec)
        : kind(spec.kind), dim(spec.ambient_dim()), msize(spec.matrix_size), sign(spec.sign) {
        if (kind == VarietyKind::quadric) {
            q.resize((size_t)dim * dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    q[(size_t)i * dim + j] = static_cast<double>(spec.Q[i][j]);
        }
        if (msize > 12) throw std::invalid_argument("matrix size too large for sampling");
    }

    double value(const double* x) const {
        switch (kind) {
            case VarietyKind::quadric: {
                double acc = 0;
                for (int i = 0; i < dim; ++i) {
                    double row = 0;
                    for (int j = 0; j < dim; ++j) row += q[(size_t)i * dim + j] * x[j];
                    acc += x[i] * row;
                }
                return acc;
            }
            case VarietyKind::det_sym:
                return sign * det_val(x);
            case VarietyKind::pfaffian:
                return sign * pf_val(x);
        }
        return 0;
    }

    double det_val(const double* x) const {
        double a[12][12];
        for (int i = 0, t = 0; i < msize; ++i)
            for (int j = i; j < msize; ++j, ++t) a[i][j] = a[j][i] = x[t];
        double det = 1;
        for (int k = 0; k < msize; ++k) {
            int piv = k;
            for (int i = k + 1; i < msize; ++i)
                if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) piv = i;
            if (a[piv][k] == 0) return 0;
            if (piv != k) {
                for (int j = k; j < msize; ++j) std::swap(a[piv][j], a[k][j]);
                det = -det;
            }
            det *= a[k][k];
            for (int i = k + 1; i < msize; ++i) {
                double f = a[i][k] / a[k][k];
                for (int j = k; j < msize; ++j) a[i][j] -= f * a[k][j];
            }
        }
        return det;
    }

    double pf_val(const double* x) const {
        double a[12][12];
        for (int i = 0; i < msize; ++i) a[i][i] = 0;
        for (int i = 0, t = 0; i < msize; ++i)
            for (int j = i + 1; j < msize; ++j, ++t) {
                a[i][j] = x[t];
                a[j][i] = -x[t];
            }
        int idx[12];
        for (int i = 0; i < msize; ++i) idx[i] = i;
        return pf_rec(a, idx, msize);
    }

    static double pf_rec(const double a[12][12], const int* idx, int k) {
        if (k == 0) return 1;
        if (k == 2) return a[idx[0]][idx[1]];
        double s = 0;
        for (int t = 1; t < k; ++t) {
            int rest[12];
            int r = 0;
            for (int u = 1; u < k; ++u)
                if (u != t) rest[r++] = idx[u];
            double term = a[idx[0]][idx[t]] * pf_rec(a, rest, r);
            s += (t % 2 == 1) ? term : -term;
        }
        return s;
    }
};

struct McBatch {
    std::vector<double> sum, sumsq;
    std::vector<u64> hits;
    u64 degen = 0;
};

constexpr u64 kMcBatch = 1 << 16;

// Shared sampling engine.  Samples the box [-B, B]^dim, keeps x with
// |f(x) - m| <= eps and |x| <= radii.back(), classifies by the first radius
// bound that holds, and accumulates weight |x|^{-k0} (k0 = 0: indicator).
inline std::vector<McBatch> mc_engine(const VarietySpec& spec, const Rat& m, double eps,
                                      u64 samples, u64 seed,
                                      const std::vector<double>& radii, int k0,
                                      const std::function<bool(const std::vector<double>&)>& region) {
    FastForm form(spec);
    int dim = form.dim;
    double md = static_cast<double>(m.convert_to<double>());
    double B = radii.back();
    std::vector<double> r2(radii.size());
    for (size_t i = 0; i < radii.size(); ++i) r2[i] = radii[i] * radii[i];
    u64 nbatch = (samples + kMcBatch - 1) / kMcBatch;
    std::vector<McBatch> out(nbatch);
    CounterRng rng(seed);
    run_chunks(nbatch, [&](size_t b) {
        McBatch acc;
        acc.sum.assign(radii.size(), 0.0);
        acc.sumsq.assign(radii.size(), 0.0);
        acc.hits.assign(radii.size(), 0);
        u64 first = (u64)b * kMcBatch;
        u64 last = std::min(samples, first + kMcBatch);
        std::vector<double> x(dim);
        for (u64 s = first; s < last; ++s) {
            for (int c = 0; c < dim; ++c) x[c] = rng.uniform(s * dim + c, -B, B);
            double fv = form.value(x.data());
            if (std::fabs(fv - md) > eps) continue;
            double n2 = 0;
            for (int c = 0; c < dim; ++c) n2 += x[c] * x[c];
            if (n2 > r2.back()) continue;
            if (region && !region(x)) continue;
            size_t bin = 0;
            while (n2 > r2[bin]) ++bin;
            double w = (k0 == 0) ? 1.0 : std::pow(n2, -0.5 * k0);
            acc.sum[bin] += w;
            acc.sumsq[bin] += w * w;
            acc.hits[bin] += 1;
            auto g = gradient(spec, x);
            double g2 = 0;
            for (double gi : g) g2 += gi * gi;
            if (g2 < 1e-16) acc.degen += 1;
        }
        out[b] = std::move(acc);
    });
    return out;
}

inline void check_mc_args(const Rat& m, double eps, u64 samples) {
    if (m == 0) throw std::invalid_argument("level must be nonzero");
    if (samples == 0) throw std::invalid_argument("need at least one sample");
    double md = std::fabs(static_cast<double>(m.convert_to<double>()));
    if (!(eps > 0) || eps > md / 10 * (1 + 1e-12))
        throw std::invalid_argument("shell width must lie in (0, |m|/10]");
}

}  // namespace detail

// Volume of {|f - m| <= eps, |x| <= T} / (2 eps), the thin-shell proxy for the
// level-set measure of the ball of radius T.
inline VolumeEstimate shell_volume_region(const VarietySpec& spec, const Rat& m, double T,
                                          double eps, u64 samples, u64 seed,
                                          const std::function<bool(const std::vector<double>&)>& region) {
    detail::check_mc_args(m, eps, samples);
    if (!(T > 0)) throw std::invalid_argument("radius must be positive");
    auto batches = detail::mc_engine(spec, m, eps, samples, seed, {T}, 0, region);
    double sum = 0, sumsq = 0;
    u64 degen = 0;
    for (const auto& b : batches) {
        sum += b.sum[0];
        sumsq += b.sumsq[0];
        degen += b.degen;
    }
    double boxvol = std::pow(2 * T, spec.ambient_dim());
    double mean = sum / (double)samples;
    double var = std::max(0.0, sumsq / (double)samples - mean * mean);
    VolumeEstimate est;
    est.value = boxvol * mean / (2 * eps);
    est.stderr_ = boxvol / (2 * eps) * std::sqrt(var / (double)samples);
    est.method = "shell_mc";
    est.samples = samples;
    est.degenerate_warning = degen > 0;
    return est;
}

inline VolumeEstimate shell_volume(const VarietySpec& spec, const Rat& m, double T, double eps,
                                   u64 samples, u64 seed) {
    return shell_volume_region(spec, m, T, eps, samples, seed, nullptr);
}

// Same shell, weighted by |x|^{-k0}; used to check that far tails carry a
// negligible share of the measure.
inline VolumeEstimate tail_integral(const VarietySpec& spec, const Rat& m, double T, int k0,
                                    double eps, u64 samples, u64 seed) {
    detail::check_mc_args(m, eps, samples);
    if (!(T > 0)) throw std::invalid_argument("radius must be positive");
    if (k0 < 0) throw std::invalid_argument("weight exponent must be nonnegative");
    auto batches = detail::mc_engine(spec, m, eps, samples, seed, {T}, k0, nullptr);
    double sum = 0, sumsq = 0;
    u64 degen = 0;
    for (const auto& b : batches) {
        sum += b.sum[0];
        sumsq += b.sumsq[0];
        degen += b.degen;
    }
    double boxvol = std::pow(2 * T, spec.ambient_dim());
    double mean = sum / (double)samples;
    double var = std::max(0.0, sumsq / (double)samples - mean * mean);
    VolumeEstimate est;
    est.value = boxvol * mean / (2 * eps);
    est.stderr_ = boxvol / (2 * eps) * std::sqrt(var / (double)samples);
    est.method = "tail_mc";
    est.samples = samples;
    est.degenerate_warning = degen > 0;
    return est;
}

// Shell mass split by euclidean norm: mass[i] covers norm in (radii[i-1], radii[i]].
// One sample stream classifies every bin, so ratios between bins share noise.
inline NormBinEstimate shell_norm_bins(const VarietySpec& spec, const Rat& m, double eps,
                                       u64 samples, u64 seed, const std::vector<double>& radii) {
    detail::check_mc_args(m, eps, samples);
    if (radii.empty()) throw std::invalid_argument("need at least one radius");
    for (size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0)) throw std::invalid_argument("radii must be positive");
        if (i && radii[i] <= radii[i - 1]) throw std::invalid_argument("radii must increase");
    }
    auto batches = detail::mc_engine(spec, m, eps, samples, seed, radii, 0, nullptr);
    NormBinEstimate est;
    est.samples = samples;
    est.mass.assign(radii.size(), 0.0);
    est.stderr_.assign(radii.size(), 0.0);
    double boxvol = std::pow(2 * radii.back(), spec.ambient_dim());
    for (size_t i = 0; i < radii.size(); ++i) {
        double sum = 0, sumsq = 0;
        for (const auto& b : batches) {
            sum += b.sum[i];
            sumsq += b.sumsq[i];
        }
        double mean = sum / (double)samples;
        double var = std::max(0.0, sumsq / (double)samples - mean * mean);
        est.mass[i] = boxvol * mean / (2 * eps);
        est.stderr_[i] = boxvol / (2 * eps) * std::sqrt(var / (double)samples);
    }
    for (const auto& b : batches) est.degenerate_warning |= b.degen > 0;
    return est;
}

// Fit v(T) ~ c * T^a * (log T)^b over a grid of (T, v) pairs.  The log power b
// ranges over a small integer grid; a and c come from least squares at each b
// and the smallest residual wins (ties prefer smaller b).
inline AsymptoticFit fit_power_log(const std::vector<std::pair<double, double>>& grid) {
    if (grid.size() < 6) throw std::invalid_argument("need at least 6 grid points");
    for (size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i].first > 1)) throw std::invalid_argument("grid radii must exceed 1");
        if (!(grid[i].second > 0)) throw std::invalid_argument("grid values must be positive");
        if (i && grid[i].first <= grid[i - 1].first)
            throw std::invalid_argument("grid radii must increase");
        if (i && grid[i].second < grid[i - 1].second)
            throw std::invalid_argument("grid values must be nondecreasing");
    }
    size_t n = grid.size();
    AsymptoticFit best;
    double best_rms = std::numeric_limits<double>::infinity();
    for (int b = 0; b <= 4; ++b) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::vector<double> xs(n), ys(n);
        for (size_t i = 0; i < n; ++i) {
            xs[i] = std::log(grid[i].first);
            ys[i] = std::log(grid[i].second) - b * std::log(std::log(grid[i].first));
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        double denom = n * sxx - sx * sx;
        if (denom == 0) continue;
        double a = (n * sxy - sx * sy) / denom;
        double c0 = (sy - a * sx) / n;
        double ss = 0;
        for (size_t i = 0; i < n; ++i) {
            double r = ys[i] - (c0 + a * xs[i]);
            ss += r * r;
        }
        double rms = std::sqrt(ss / n);
        if (rms < best_rms - 1e-12) {
            best_rms = rms;
            best.a = a;
            best.b = b;
            best.c = std::exp(c0);
            best.residual_rms = rms;
        }
    }
    if (!std::isfinite(best_rms)) throw std::invalid_argument("degenerate grid");
    return best;
}

}  // namespace symcount
