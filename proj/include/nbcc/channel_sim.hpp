#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "code.hpp"
#include "decoder.hpp"
#include "gf.hpp"
#include "mapping.hpp"

namespace nbcc {

// es_n0_db = eb_n0_db + 10 log10(rate * log2(q)): information bits per
// channel symbol scale the energy bookkeeping between the two axes.
inline double snr_convert(double eb_n0_db, int q, double rate) {
    if (q < 2 || (q & (q - 1)) != 0)
        throw std::invalid_argument("snr_convert: q must be a power of two");
    if (!(rate > 0.0) || rate > 1.0)
        throw std::invalid_argument("snr_convert: rate must be in (0,1]");
    const double bits = rate * std::log2(static_cast<double>(q));
    return eb_n0_db + 10.0 * std::log10(bits);
}

namespace detail {

// splitmix64 (Steele/Lea/Flood) scrambles the (seed, point, frame) triple
// into an independent per-frame generator seed; scheduling order can then
// never change what any frame sees.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 frame_rng(std::uint64_t seed, std::uint64_t point, std::uint64_t frame) {
    return std::mt19937_64(mix64(mix64(mix64(seed) ^ point) ^ frame));
}

// explicit Box-Muller pair; no cached half-sample, so draw counts per frame
// are fixed and reproducible
inline void gaussian_pair(std::mt19937_64& rng, double& z0, double& z1) {
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; // (0,1]
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;        // [0,1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.141592653589793238462643383279502884 * u2;
    z0 = r * std::cos(t);
    z1 = r * std::sin(t);
}

} // namespace detail

// Adds zero-mean Gaussian noise of the given per-dimension variance to every
// complex sample.
inline std::vector<std::complex<double>> awgn(const std::vector<std::complex<double>>& points,
                                              double noise_variance, std::mt19937_64& rng) {
    if (noise_variance < 0.0) throw std::invalid_argument("awgn: variance must be >= 0");
    std::vector<std::complex<double>> out(points.size());
    const double sigma = std::sqrt(noise_variance);
    for (size_t k = 0; k < points.size(); ++k) {
        double z0, z1;
        detail::gaussian_pair(rng, z0, z1);
        out[k] = {points[k].real() + sigma * z0, points[k].imag() + sigma * z1};
    }
    return out;
}

// Wilson 95% score interval on an error proportion; unlike the normal
// approximation it stays informative at zero observed errors.
struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

inline Interval wilson_interval(unsigned long long errors, unsigned long long trials,
                                double z = 1.959963984540054) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
    if (errors == 0) out.lo = 0.0; // exact boundaries, not rounding residue
    if (errors == trials) out.hi = 1.0;
    return out;
}

enum class Modulation { qam, bpsk };

struct StopRule {
    unsigned long long min_frame_errors = 100;
    unsigned long long max_frames = 1000000;
};

struct SimOptions {
    int frame_len = 100; // information symbols per frame
    StopRule stop;
    std::uint64_t seed = 1;
    int threads = 1;
    bool terminate = false; // append the tail symbol and pin the final state
    Modulation modulation = Modulation::qam;
};

struct SimPoint {
    double eb_n0_db = 0.0;
    double es_n0_db = 0.0;
    unsigned long long frames = 0;
    unsigned long long sym_err = 0;
    unsigned long long bit_err = 0;
    unsigned long long frame_err = 0;
    double ser = 0.0, ber = 0.0, fer = 0.0;
    Interval ser_ci;                     // Wilson 95% on the symbol error rate
    bool hit_frame_error_target = false; // stop rule: frame errors vs frame cap
    bool nonmonotone_flag = false;       // SER rose > 3 sigma above the previous point
};

struct SimReport {
    int q = 0;
    int frame_len = 0;
    std::uint64_t seed = 0;
    Modulation modulation = Modulation::qam;
    std::vector<SimPoint> points;
};

// Monte Carlo SER/BER/FER sweep. Each frame draws uniform information
// symbols, encodes, maps systematic and parity onto the constellation (two
// channel uses per information symbol), adds AWGN, and max-log-MAP decodes.
// Frames are independent work units with per-frame derived RNG streams and
// are accumulated in frame order over fixed-size batches, so the report is
// bit-identical for any worker count. BPSK mode sends each coded symbol's
// m-bit image as m antipodal reals instead of one QAM point.
inline SimReport run_monte_carlo(const FieldSpec& field, const CodeCoefficients& code,
                                 const Constellation& cs, const std::vector<double>& eb_n0_sweep,
                                 const SimOptions& opt = {}) {
    validate_code(field, code);
    if (opt.frame_len < 1) throw std::invalid_argument("simulate: frame_len must be >= 1");
    if (opt.stop.max_frames < 1) throw std::invalid_argument("simulate: max_frames must be >= 1");
    if (opt.modulation == Modulation::qam && field.q != cs.q)
        throw std::invalid_argument("simulate: field/constellation order mismatch");
    const int q = field.q;
    const int m = field.m;
    const int n_info = opt.frame_len;
    const int steps = n_info + (opt.terminate ? 1 : 0);
    const Trellis tr = build_trellis(field, code);
    const BpskImage bpsk = build_bpsk_image(field);
    const int nthreads = std::max(1, opt.threads);
    const double qam_norm = std::sqrt(static_cast<double>(cs.scale_sq));

    // information bits per channel use, tail channel uses included in the
    // denominator but carrying no information bits
    const double uses_per_step = opt.modulation == Modulation::qam ? 2.0 : 2.0 * m;
    const double bits_per_use =
        static_cast<double>(n_info) * m / (uses_per_step * steps);

    SimReport report;
    report.q = q;
    report.frame_len = n_info;
    report.seed = opt.seed;
    report.modulation = opt.modulation;

    DecodeOptions dec;
    dec.termination = opt.terminate ? Termination::terminated : Termination::open;

    struct FrameCounts {
        unsigned long long sym = 0, bit = 0, frame = 0;
    };

    for (size_t pt = 0; pt < eb_n0_sweep.size(); ++pt) {
        SimPoint point;
        point.eb_n0_db = eb_n0_sweep[pt];
        point.es_n0_db = point.eb_n0_db + 10.0 * std::log10(bits_per_use);
        const double n0 = std::pow(10.0, -point.es_n0_db / 10.0); // Es = 1
        const double sigma2 = n0 / 2.0;

        auto run_frame = [&](std::uint64_t frame_idx) {
            std::mt19937_64 rng = detail::frame_rng(opt.seed, pt, frame_idx);
            std::uniform_int_distribution<int> symdist(0, q - 1);
            std::vector<int> inputs(n_info);
            for (auto& s : inputs) s = symdist(rng);
            const EncodedFrame enc = encode_frame(field, code, inputs, opt.terminate);

            std::vector<std::complex<double>> tx;
            if (opt.modulation == Modulation::qam) {
                tx.reserve(static_cast<size_t>(steps) * 2);
                for (int i = 0; i < steps; ++i) {
                    tx.emplace_back(cs.sym_i(enc.systematic[i]) / qam_norm,
                                    cs.sym_q(enc.systematic[i]) / qam_norm);
                    tx.emplace_back(cs.sym_i(enc.parity[i]) / qam_norm,
                                    cs.sym_q(enc.parity[i]) / qam_norm);
                }
            } else {
                tx.reserve(static_cast<size_t>(steps) * 2 * m);
                for (int i = 0; i < steps; ++i) {
                    for (double b : bpsk.modulate(enc.systematic[i])) tx.emplace_back(b, 0.0);
                    for (double b : bpsk.modulate(enc.parity[i])) tx.emplace_back(b, 0.0);
                }
            }
            const std::vector<std::complex<double>> rx = awgn(tx, sigma2, rng);

            BranchMetrics bm;
            if (opt.modulation == Modulation::qam) {
                std::vector<ChannelObservation> obs(steps);
                for (int i = 0; i < steps; ++i) {
                    obs[i].sys_i = rx[2 * i].real();
                    obs[i].sys_q = rx[2 * i].imag();
                    obs[i].par_i = rx[2 * i + 1].real();
                    obs[i].par_q = rx[2 * i + 1].imag();
                }
                bm = branch_metrics(obs, tr, cs, sigma2 > 0 ? sigma2 : 1.0);
            } else {
                // negative squared distance over the m antipodal reals of
                // each coded symbol; imaginary half carries no signal
                bm.q = q;
                bm.stages = steps;
                bm.gamma_s.resize(static_cast<size_t>(steps) * q * q);
                bm.gamma_p.resize(static_cast<size_t>(steps) * q * q);
                std::vector<double> ms(q), mp(q);
                for (int i = 0; i < steps; ++i) {
                    for (int x = 0; x < q; ++x) {
                        double ds = 0.0, dp = 0.0;
                        for (int k = 0; k < m; ++k) {
                            const double bit = (x >> (m - 1 - k) & 1) ? -1.0 : 1.0;
                            const double es = rx[(2 * i) * m + k].real() - bit;
                            const double ep = rx[(2 * i + 1) * m + k].real() - bit;
                            ds += es * es;
                            dp += ep * ep;
                        }
                        ms[x] = -ds;
                        mp[x] = -dp;
                    }
                    for (int from = 0; from < q; ++from)
                        for (int to = 0; to < q; ++to) {
                            bm.gs(i, from, to) = ms[tr.edge_sys(from, to)];
                            bm.gp(i, from, to) = mp[tr.edge_par(from, to)];
                        }
                }
            }

            const SymbolPosteriors post = max_log_map_decode(tr, bm, dec);
            FrameCounts fc;
            for (int i = 0; i < n_info; ++i) {
                if (post.hard[i] != inputs[i]) {
                    ++fc.sym;
                    fc.bit += static_cast<unsigned>(
                        std::popcount(static_cast<unsigned>(post.hard[i] ^ inputs[i])));
                }
            }
            fc.frame = fc.sym > 0 ? 1 : 0;
            return fc;
        };

        const unsigned long long batch = 256;
        unsigned long long done = 0;
        while (done < opt.stop.max_frames) {
            const unsigned long long end = std::min(done + batch, opt.stop.max_frames);
            std::vector<FrameCounts> counts(end - done);
            std::atomic<unsigned long long> next{done};
            auto worker = [&] {
                for (;;) {
                    const unsigned long long i = next.fetch_add(1);
                    if (i >= end) break;
                    counts[i - done] = run_frame(i);
                }
            };
            if (nthreads == 1) {
                worker();
            } else {
                std::vector<std::thread> pool;
                pool.reserve(nthreads);
                for (int w = 0; w < nthreads; ++w) pool.emplace_back(worker);
                for (auto& th : pool) th.join();
            }
            for (const auto& fc : counts) {
                point.sym_err += fc.sym;
                point.bit_err += fc.bit;
                point.frame_err += fc.frame;
            }
            done = end;
            if (point.frame_err >= opt.stop.min_frame_errors) {
                point.hit_frame_error_target = true;
                break;
            }
        }
        point.frames = done;

        const double sym_trials = static_cast<double>(point.frames) * n_info;
        point.ser = point.sym_err / sym_trials;
        point.ber = point.bit_err / (sym_trials * m);
        point.fer = static_cast<double>(point.frame_err) / point.frames;
        point.ser_ci = wilson_interval(point.sym_err,
                                       static_cast<unsigned long long>(sym_trials));
        if (!report.points.empty()) {
            const SimPoint& prev = report.points.back();
            const double var_prev =
                prev.ser * (1.0 - prev.ser) / (static_cast<double>(prev.frames) * n_info);
            const double var_cur = point.ser * (1.0 - point.ser) / sym_trials;
            point.nonmonotone_flag =
                point.ser > prev.ser + 3.0 * std::sqrt(var_prev + var_cur);
        }
        report.points.push_back(point);
    }
    return report;
}

} // namespace nbcc
