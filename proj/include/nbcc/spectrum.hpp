#pragma once

#include <algorithm>
#include <atomic>
#include <climits>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "code.hpp"
#include "mapping.hpp"

namespace nbcc {

// Truncated distance spectrum: the two smallest distinct cumulated squared
// Euclidean distances over all length-2 and length-3 diverging-converging
// (DC) pairs, with integer numerators over the constellation's scale_sq and
// exact multiplicities. Convention tag records how pairs are counted:
// "unordered" counts each {X1,X2} once, "ordered" counts both orders
// (exactly twice the unordered counts).
struct DistanceSpectrum {
    long long d1_num = 0;
    long long d2_num = 0;
    int scale_sq = 1;
    unsigned long long n1 = 0;
    unsigned long long n2 = 0;
    std::string convention = "unordered";
    int q = 0; // field/constellation order, carried for normalizations

    double d1_sq() const { return static_cast<double>(d1_num) / scale_sq; }
    double d2_sq() const { return static_cast<double>(d2_num) / scale_sq; }
};

namespace detail {

constexpr long long kNoValue = LLONG_MAX;

// Exact histogram trimmed to the two smallest distinct values seen so far.
// Dropping values above the running second-smallest is lossless for the
// final result: such a value can never become d1 or d2, and counts for kept
// keys are never affected. Merging two trimmed histograms therefore gives
// the same answer as histogramming the union, for any work partition.
struct TwoValueHist {
    long long v0 = kNoValue, v1 = kNoValue;
    unsigned long long c0 = 0, c1 = 0;

    void add(long long val, unsigned long long cnt) {
        if (val == v0) {
            c0 += cnt;
        } else if (val == v1) {
            c1 += cnt;
        } else if (val < v0) {
            v1 = v0;
            c1 = c0;
            v0 = val;
            c0 = cnt;
        } else if (val < v1) {
            v1 = val;
            c1 = cnt;
        }
    }

    void merge(const TwoValueHist& o) {
        if (o.v0 != kNoValue) add(o.v0, o.c0);
        if (o.v1 != kNoValue) add(o.v1, o.c1);
    }

    long long bound() const { return v1; } // values above this are prunable
};

// Per-unordered-state-pair section costs, compressed to (value, count) rows
// sorted by value. T: divergence section cost per start state. C:
// convergence section cost per end state.
struct SectionCosts {
    int q = 0;
    int npairs = 0;
    std::vector<int> px, py;                   // unordered pair -> states x < y
    std::vector<int> pair_index;               // x*q+y (either order) -> pair id
    std::vector<std::vector<std::pair<int, int>>> t_rows, c_rows;
    std::vector<int> t_min, c_min;

    int middle_cost(const Trellis& tr, const Constellation& cs, int x1, int y1, int x2,
                    int y2) const {
        return cs.squared_distance_num(tr.edge_sys(x1, x2), tr.edge_sys(y1, y2)) +
               cs.squared_distance_num(tr.edge_par(x1, x2), tr.edge_par(y1, y2));
    }
};

inline SectionCosts build_section_costs(const Trellis& tr, const Constellation& cs) {
    const int q = tr.q;
    SectionCosts sc;
    sc.q = q;
    sc.npairs = q * (q - 1) / 2;
    sc.px.reserve(sc.npairs);
    sc.py.reserve(sc.npairs);
    sc.pair_index.assign(static_cast<size_t>(q) * q, -1);
    for (int x = 0; x < q; ++x)
        for (int y = x + 1; y < q; ++y) {
            sc.pair_index[static_cast<size_t>(x) * q + y] = static_cast<int>(sc.px.size());
            sc.pair_index[static_cast<size_t>(y) * q + x] = static_cast<int>(sc.px.size());
            sc.px.push_back(x);
            sc.py.push_back(y);
        }
    sc.t_rows.resize(sc.npairs);
    sc.c_rows.resize(sc.npairs);
    sc.t_min.assign(sc.npairs, INT_MAX);
    sc.c_min.assign(sc.npairs, INT_MAX);
    std::vector<int> vals(q);
    auto compress = [&](std::vector<std::pair<int, int>>& row) {
        std::sort(vals.begin(), vals.end());
        row.clear();
        for (int i = 0; i < q;) {
            int j = i;
            while (j < q && vals[j] == vals[i]) ++j;
            row.emplace_back(vals[i], j - i);
            i = j;
        }
    };
    for (int p = 0; p < sc.npairs; ++p) {
        const int x = sc.px[p], y = sc.py[p];
        for (int e = 0; e < q; ++e)
            vals[e] = cs.squared_distance_num(tr.edge_sys(e, x), tr.edge_sys(e, y)) +
                      cs.squared_distance_num(tr.edge_par(e, x), tr.edge_par(e, y));
        compress(sc.t_rows[p]);
        sc.t_min[p] = sc.t_rows[p].front().first;
        for (int e = 0; e < q; ++e)
            vals[e] = cs.squared_distance_num(tr.edge_sys(x, e), tr.edge_sys(y, e)) +
                      cs.squared_distance_num(tr.edge_par(x, e), tr.edge_par(y, e));
        compress(sc.c_rows[p]);
        sc.c_min[p] = sc.c_rows[p].front().first;
    }
    return sc;
}

// All length-2 DC pairs: divergence cost + convergence cost over the same
// interior pair, every start and end state.
inline TwoValueHist length2_hist(const SectionCosts& sc) {
    TwoValueHist h;
    for (int p = 0; p < sc.npairs; ++p) {
        for (const auto& [tv, tc] : sc.t_rows[p]) {
            if (h.bound() != kNoValue && static_cast<long long>(tv) + sc.c_min[p] > h.bound())
                break;
            for (const auto& [cv, cc] : sc.c_rows[p]) {
                const long long val = static_cast<long long>(tv) + cv;
                if (h.bound() != kNoValue && val > h.bound()) break;
                h.add(val, static_cast<unsigned long long>(tc) * cc);
            }
        }
    }
    return h;
}

} // namespace detail

struct SpectrumOptions {
    int threads = 1;              // worker count; result is identical for any value
    bool ordered_convention = false;
};

// Enumerate all length-2 and length-3 DC pairs, tracking the two smallest
// distinct cumulated squared distances and exact multiplicities. Length-3
// interior states are enumerated as (first unordered pair) x (second ordered
// pair): fixing the orientation of the first pair makes each unordered path
// pair appear exactly once. Branch-and-bound on the running second-smallest
// value keeps the q=64 case (~3e10 raw combinations) tractable.
inline DistanceSpectrum compute_spectrum(const Trellis& tr, const Constellation& cs,
                                         const SpectrumOptions& opt = {}) {
    using namespace detail;
    if (tr.q != cs.q) throw std::invalid_argument("spectrum: trellis/constellation order mismatch");
    const SectionCosts sc = build_section_costs(tr, cs);
    const int q = sc.q;

    TwoValueHist seed = length2_hist(sc);
    std::atomic<long long> shared_bound{seed.bound() == kNoValue ? LLONG_MAX : seed.bound()};

    const int nthreads = std::max(1, opt.threads);
    std::vector<TwoValueHist> partial(nthreads);
    std::atomic<int> next_pair{0};

    auto worker = [&](int wid) {
        TwoValueHist local;
        // ordered second pairs: both (x,y) and (y,x) for every unordered pair
        for (;;) {
            const int p1 = next_pair.fetch_add(1);
            if (p1 >= sc.npairs) break;
            const int x1 = sc.px[p1], y1 = sc.py[p1];
            const int tmin = sc.t_min[p1];
            long long bound = std::min(shared_bound.load(std::memory_order_relaxed),
                                       local.bound());
            for (int p2 = 0; p2 < sc.npairs; ++p2) {
                const int cmin = sc.c_min[p2];
                for (int orient = 0; orient < 2; ++orient) {
                    const int x2 = orient ? sc.py[p2] : sc.px[p2];
                    const int y2 = orient ? sc.px[p2] : sc.py[p2];
                    const int m = sc.middle_cost(tr, cs, x1, y1, x2, y2);
                    if (bound != kNoValue &&
                        static_cast<long long>(tmin) + m + cmin > bound)
                        continue;
                    for (const auto& [tv, tc] : sc.t_rows[p1]) {
                        const long long base = static_cast<long long>(tv) + m;
                        if (bound != kNoValue && base + cmin > bound) break;
                        for (const auto& [cv, cc] : sc.c_rows[p2]) {
                            const long long val = base + cv;
                            if (bound != kNoValue && val > bound) break;
                            local.add(val, static_cast<unsigned long long>(tc) * cc);
                        }
                    }
                    if (local.bound() != kNoValue) {
                        long long cur = shared_bound.load(std::memory_order_relaxed);
                        while (local.bound() < cur &&
                               !shared_bound.compare_exchange_weak(cur, local.bound())) {
                        }
                        bound = std::min(shared_bound.load(std::memory_order_relaxed),
                                         local.bound());
                    }
                }
            }
        }
        partial[wid] = local;
    };

    if (nthreads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int w = 0; w < nthreads; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }

    TwoValueHist total = seed;
    for (const auto& h : partial) total.merge(h);
    if (total.v0 == kNoValue || total.v1 == kNoValue)
        throw std::runtime_error("spectrum: fewer than two distinct distances found");

    DistanceSpectrum out;
    out.d1_num = total.v0;
    out.d2_num = total.v1;
    out.n1 = total.c0;
    out.n2 = total.c1;
    out.scale_sq = cs.scale_sq;
    out.q = q;
    if (opt.ordered_convention) {
        out.n1 *= 2;
        out.n2 *= 2;
        out.convention = "ordered";
    }
    return out;
}

// Cheap upper bound on d1: the smallest length-2 DC distance. Used as the
// search prefilter (the true d1 can only be lower).
inline long long length2_min(const Trellis& tr, const Constellation& cs) {
    using namespace detail;
    const SectionCosts sc = build_section_costs(tr, cs);
    long long best = kNoValue;
    for (int p = 0; p < sc.npairs; ++p)
        best = std::min(best, static_cast<long long>(sc.t_min[p]) + sc.c_min[p]);
    return best;
}

// Minimum cumulated distance over all 3-section path pairs that diverge at
// step 1 and stay unconverged through step 3 (truncated prefixes of longer
// DC pairs). Min-plus reduction over ordered interior pair chains.
inline long long verify_truncation(const Trellis& tr, const Constellation& cs) {
    using namespace detail;
    const SectionCosts sc = build_section_costs(tr, cs);
    const int nord = sc.npairs * 2;
    auto ox = [&](int op) { return op < sc.npairs ? sc.px[op] : sc.py[op - sc.npairs]; };
    auto oy = [&](int op) { return op < sc.npairs ? sc.py[op] : sc.px[op - sc.npairs]; };
    // best cost of (divergence from any start) + middle into ordered pair op
    std::vector<long long> f(nord, kNoValue);
    for (int op1 = 0; op1 < nord; ++op1) {
        const long long t = sc.t_min[op1 % sc.npairs];
        for (int op2 = 0; op2 < nord; ++op2) {
            const long long v = t + sc.middle_cost(tr, cs, ox(op1), oy(op1), ox(op2), oy(op2));
            f[op2] = std::min(f[op2], v);
        }
    }
    long long best = kNoValue;
    for (int op2 = 0; op2 < nord; ++op2)
        for (int op3 = 0; op3 < nord; ++op3)
            best = std::min(best, f[op2] + sc.middle_cost(tr, cs, ox(op2), oy(op2), ox(op3),
                                                          oy(op3)));
    return best;
}

// Two-term union bound on symbol error probability at the given Es/N0.
// Each DC event requires the transmitted path to pass through one specific
// divergence state out of q, hence the n_k/q prefactor; distances are in
// unit-energy channel units and the pairwise error is Q(d / 2 sigma).
inline double union_bound_ser(const DistanceSpectrum& sp, double es_n0_db) {
    if (sp.q <= 0) throw std::invalid_argument("union_bound_ser: spectrum lacks field order");
    const double es_n0 = std::pow(10.0, es_n0_db / 10.0);
    const double sigma = std::sqrt(1.0 / (2.0 * es_n0)); // per-dimension, Es = 1
    auto qfunc = [](double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); };
    const double scale = static_cast<double>(sp.scale_sq);
    const double order_corr = sp.convention == "ordered" ? 2.0 : 1.0;
    const double norm = order_corr * sp.q;
    double est = 0.0;
    est += static_cast<double>(sp.n1) / norm * qfunc(std::sqrt(sp.d1_num / scale) / (2.0 * sigma));
    est += static_cast<double>(sp.n2) / norm * qfunc(std::sqrt(sp.d2_num / scale) / (2.0 * sigma));
    return est;
}

} // namespace nbcc
