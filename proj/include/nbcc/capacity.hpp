#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "channel_sim.hpp"
#include "mapping.hpp"

namespace nbcc {

struct CapacityOptions {
    long long samples = 1000000;
    std::uint64_t seed = 1;
    int threads = 1;
};

namespace detail {

// Shared Monte Carlo core for both mutual-information estimators. Each
// sample draws a uniform symbol x and complex noise, forms the likelihood
// exponents (|n|^2 - |y - x'|^2)/N0 for every candidate x' (zero for the
// true symbol, so no overflow at high SNR), and reduces them with
// log-sum-exp. CM uses the full sum; BICM additionally needs, per bit
// level, the sum over candidates sharing the transmitted bit. Samples are
// processed in fixed 65536-sample batches whose partial sums are added in
// batch order, making the estimate bit-identical for any worker count.
struct MiEstimate {
    double bits = 0.0;
    double std_error = 0.0;
};

inline MiEstimate mi_monte_carlo(const Constellation& cs, double snr_db, bool bicm,
                                 const CapacityOptions& opt) {
    if (opt.samples < 10000)
        throw std::invalid_argument("capacity: at least 1e4 samples required");
    const int q = cs.q;
    const int m = static_cast<int>(std::lround(std::log2(static_cast<double>(q))));
    const double n0 = std::pow(10.0, -snr_db / 10.0); // Es = 1
    const double sigma = std::sqrt(n0 / 2.0);
    const double norm = std::sqrt(static_cast<double>(cs.scale_sq));
    const double log2q = std::log2(static_cast<double>(q));
    constexpr double kLn2 = 0.6931471805599453;

    std::vector<double> px(q), py(q);
    for (int x = 0; x < q; ++x) {
        px[x] = cs.sym_i(x) / norm;
        py[x] = cs.sym_q(x) / norm;
    }

    const long long batch_size = 65536;
    const long long nbatches = (opt.samples + batch_size - 1) / batch_size;
    std::vector<double> batch_sum(nbatches, 0.0), batch_sumsq(nbatches, 0.0);

    auto run_batch = [&](long long b) {
        std::mt19937_64 rng = frame_rng(opt.seed, bicm ? 1 : 0, static_cast<std::uint64_t>(b));
        std::uniform_int_distribution<int> symdist(0, q - 1);
        const long long lo = b * batch_size;
        const long long hi = std::min(lo + batch_size, opt.samples);
        std::vector<double> exps(q);
        double sum = 0.0, sumsq = 0.0;
        for (long long s = lo; s < hi; ++s) {
            const int x = symdist(rng);
            double nr, ni;
            gaussian_pair(rng, nr, ni);
            nr *= sigma;
            ni *= sigma;
            const double yr = px[x] + nr, yi = py[x] + ni;
            const double d0 = nr * nr + ni * ni;
            double mx = 0.0; // exponent of the true symbol
            for (int c = 0; c < q; ++c) {
                const double dr = yr - px[c], di = yi - py[c];
                exps[c] = (d0 - (dr * dr + di * di)) / n0;
                if (exps[c] > mx) mx = exps[c];
            }
            double val;
            if (!bicm) {
                double acc = 0.0;
                for (int c = 0; c < q; ++c) acc += std::exp(exps[c] - mx);
                val = log2q - (mx + std::log(acc)) / kLn2;
            } else {
                double acc_all = 0.0;
                for (int c = 0; c < q; ++c) acc_all += std::exp(exps[c] - mx);
                const double lse_all = mx + std::log(acc_all);
                val = static_cast<double>(m);
                for (int k = 0; k < m; ++k) {
                    const int bit = x >> k & 1;
                    double acc = 0.0;
                    for (int c = 0; c < q; ++c)
                        if ((c >> k & 1) == bit) acc += std::exp(exps[c] - mx);
                    val -= (lse_all - (mx + std::log(acc))) / kLn2;
                }
            }
            sum += val;
            sumsq += val * val;
        }
        batch_sum[b] = sum;
        batch_sumsq[b] = sumsq;
    };

    const int nthreads = std::max(1, opt.threads);
    if (nthreads == 1) {
        for (long long b = 0; b < nbatches; ++b) run_batch(b);
    } else {
        std::atomic<long long> next{0};
        auto worker = [&] {
            for (;;) {
                const long long b = next.fetch_add(1);
                if (b >= nbatches) break;
                run_batch(b);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int w = 0; w < nthreads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    double total = 0.0, total_sq = 0.0;
    for (long long b = 0; b < nbatches; ++b) {
        total += batch_sum[b];
        total_sq += batch_sumsq[b];
    }
    const double n = static_cast<double>(opt.samples);
    const double mean = total / n;
    const double var = std::max(0.0, total_sq / n - mean * mean);
    MiEstimate est;
    est.bits = std::clamp(mean, 0.0, log2q);
    est.std_error = std::sqrt(var / n);
    return est;
}

} // namespace detail

// Coded-modulation (symbol-wise) mutual information, bits per channel use.
inline double cm_capacity(const Constellation& cs, double snr_db, const CapacityOptions& opt = {},
                          double* std_error = nullptr) {
    const detail::MiEstimate est = detail::mi_monte_carlo(cs, snr_db, false, opt);
    if (std_error) *std_error = est.std_error;
    return est.bits;
}

// BICM mutual information: per-bit-level terms with the other bits
// marginalized, summed over the constellation's binary labeling.
inline double bicm_capacity(const Constellation& cs, double snr_db,
                            const CapacityOptions& opt = {}, double* std_error = nullptr) {
    const detail::MiEstimate est = detail::mi_monte_carlo(cs, snr_db, true, opt);
    if (std_error) *std_error = est.std_error;
    return est.bits;
}

struct CapacityCurve {
    std::vector<double> snr_db;
    std::vector<double> bits;
    std::vector<double> std_error;
    std::vector<char> nonmonotone_flag; // raw dip beyond 3 combined standard errors
    long long samples = 0;
    std::string label;
};

inline CapacityCurve capacity_curve(const Constellation& cs, const std::vector<double>& snr_grid,
                                    bool bicm, const CapacityOptions& opt = {}) {
    CapacityCurve curve;
    curve.snr_db = snr_grid;
    curve.samples = opt.samples;
    curve.label = (bicm ? "bicm_q" : "cm_q") + std::to_string(cs.q);
    curve.bits.resize(snr_grid.size());
    curve.std_error.resize(snr_grid.size());
    curve.nonmonotone_flag.assign(snr_grid.size(), 0);
    for (size_t i = 0; i < snr_grid.size(); ++i) {
        const detail::MiEstimate est = detail::mi_monte_carlo(cs, snr_grid[i], bicm, opt);
        curve.bits[i] = est.bits;
        curve.std_error[i] = est.std_error;
        if (i > 0 &&
            curve.bits[i] < curve.bits[i - 1] - 3.0 * (curve.std_error[i] + curve.std_error[i - 1]))
            curve.nonmonotone_flag[i] = 1;
    }
    return curve;
}

namespace detail {

// pool-adjacent-violators: smallest change making the sequence non-decreasing
inline std::vector<double> isotonic_fit(const std::vector<double>& y) {
    std::vector<double> level;
    std::vector<int> weight;
    for (double v : y) {
        level.push_back(v);
        weight.push_back(1);
        while (level.size() > 1 && level[level.size() - 2] > level.back()) {
            const double merged = (level[level.size() - 2] * weight[weight.size() - 2] +
                                   level.back() * weight.back()) /
                                  (weight[weight.size() - 2] + weight.back());
            weight[weight.size() - 2] += weight.back();
            level[level.size() - 2] = merged;
            level.pop_back();
            weight.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (size_t b = 0; b < level.size(); ++b)
        for (int k = 0; k < weight[b]; ++k) out.push_back(level[b]);
    return out;
}

inline double invert_rate(const CapacityCurve& c, double target) {
    if (c.snr_db.size() < 2) throw std::invalid_argument("capacity: curve needs >= 2 points");
    const std::vector<double> bits = isotonic_fit(c.bits);
    if (target < bits.front() || target > bits.back())
        throw std::invalid_argument("capacity: target rate outside curve range");
    for (size_t i = 1; i < bits.size(); ++i) {
        if (target <= bits[i]) {
            const double b0 = bits[i - 1], b1 = bits[i];
            if (b1 == b0) return c.snr_db[i - 1]; // flat segment: leftmost crossing
            const double t = (target - b0) / (b1 - b0);
            return c.snr_db[i - 1] + t * (c.snr_db[i] - c.snr_db[i - 1]);
        }
    }
    return c.snr_db.back();
}

} // namespace detail

// SNR distance between the BICM and CM crossings of a target spectral
// efficiency; positive when BICM needs more power.
inline double snr_gap_at_rate(const CapacityCurve& cm, const CapacityCurve& bicm,
                              double target_rate) {
    return detail::invert_rate(bicm, target_rate) - detail::invert_rate(cm, target_rate);
}

} // namespace nbcc
