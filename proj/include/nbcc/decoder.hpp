#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "code.hpp"
#include "mapping.hpp"

namespace nbcc {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One received QAM pair per trellis stage, in unit-energy channel units
// (constellation coordinates divided by sqrt(scale_sq)).
struct ChannelObservation {
    double sys_i = 0.0, sys_q = 0.0;
    double par_i = 0.0, par_q = 0.0;
};

// Per-stage, per-edge transition metrics. gamma is the negative squared
// Euclidean distance between the observation and the edge's mapped symbol;
// any common positive scaling (e.g. 1/N0) is omitted since max-only
// recursions make hard decisions invariant to it.
struct BranchMetrics {
    int q = 0;
    int stages = 0;
    std::vector<double> gamma_s; // [stage*q*q + from*q + to]
    std::vector<double> gamma_p;

    double gs(int stage, int from, int to) const {
        return gamma_s[(static_cast<size_t>(stage) * q + from) * q + to];
    }
    double gp(int stage, int from, int to) const {
        return gamma_p[(static_cast<size_t>(stage) * q + from) * q + to];
    }
    double& gs(int stage, int from, int to) {
        return gamma_s[(static_cast<size_t>(stage) * q + from) * q + to];
    }
    double& gp(int stage, int from, int to) {
        return gamma_p[(static_cast<size_t>(stage) * q + from) * q + to];
    }
};

inline BranchMetrics branch_metrics(const std::vector<ChannelObservation>& obs,
                                    const Trellis& tr, const Constellation& cs,
                                    double noise_variance) {
    if (noise_variance <= 0.0)
        throw std::invalid_argument("branch_metrics: noise variance must be positive");
    if (tr.q != cs.q)
        throw std::invalid_argument("branch_metrics: trellis/constellation order mismatch");
    const int q = tr.q;
    const double norm = std::sqrt(static_cast<double>(cs.scale_sq));
    BranchMetrics bm;
    bm.q = q;
    bm.stages = static_cast<int>(obs.size());
    bm.gamma_s.resize(static_cast<size_t>(bm.stages) * q * q);
    bm.gamma_p.resize(static_cast<size_t>(bm.stages) * q * q);
    std::vector<double> ms(q), mp(q); // per-symbol metrics for the current stage
    for (int i = 0; i < bm.stages; ++i) {
        for (int x = 0; x < q; ++x) {
            const double si = cs.sym_i(x) / norm, sq = cs.sym_q(x) / norm;
            const double dsi = obs[i].sys_i - si, dsq = obs[i].sys_q - sq;
            ms[x] = -(dsi * dsi + dsq * dsq);
            const double dpi = obs[i].par_i - si, dpq = obs[i].par_q - sq;
            mp[x] = -(dpi * dpi + dpq * dpq);
        }
        for (int from = 0; from < q; ++from)
            for (int to = 0; to < q; ++to) {
                bm.gs(i, from, to) = ms[tr.edge_sys(from, to)];
                bm.gp(i, from, to) = mp[tr.edge_par(from, to)];
            }
    }
    return bm;
}

enum class Termination {
    open,      // unterminated frame: beta_N(j) = 0 for every state
    terminated // tail drives the encoder home: beta_N(0) = 0, others -inf
};

struct DecodeOptions {
    Termination termination = Termination::open;
    bool normalize_stages = false; // subtract each stage's max from alpha/beta
};

// alpha[i][j] and beta[i][j] for stages 0..N; alpha_0 pins the start state.
struct StateMetrics {
    int q = 0;
    int stages = 0;
    std::vector<double> alpha, beta; // [(stages+1) * q]

    double a(int stage, int j) const { return alpha[static_cast<size_t>(stage) * q + j]; }
    double b(int stage, int j) const { return beta[static_cast<size_t>(stage) * q + j]; }
};

struct SymbolPosteriors {
    int q = 0;
    int stages = 0;
    std::vector<double> L;  // [stage*q + symbol]
    std::vector<int> hard;  // argmax per stage, lowest symbol index on ties

    double l(int stage, int u) const { return L[static_cast<size_t>(stage) * q + u]; }
};

// Max-Log-MAP: forward recursion
//   alpha_{i+1}(j) = max_{j'} alpha_i(j') + gamma_s,i(j',j) + gamma_p,i(j',j)
// backward analogue, and per-stage posteriors maximizing over the edges whose
// systematic label equals the candidate symbol:
//   L_i(u) = max_{(j',j): s(j',j)=u} alpha_i(j') + gamma_i(j',j) + beta_{i+1}(j)
// With max-only updates these are exact best-path scores, so without stage
// normalization the posteriors equal the brute-force sequence maxima.
inline SymbolPosteriors max_log_map_decode(const Trellis& tr, const BranchMetrics& bm,
                                           const DecodeOptions& opt = {},
                                           StateMetrics* out_metrics = nullptr) {
    if (tr.q != bm.q) throw std::invalid_argument("decode: trellis/metrics order mismatch");
    const int q = bm.q;
    const int n = bm.stages;

    StateMetrics sm;
    sm.q = q;
    sm.stages = n;
    sm.alpha.assign(static_cast<size_t>(n + 1) * q, kNegInf);
    sm.beta.assign(static_cast<size_t>(n + 1) * q, kNegInf);
    auto al = [&](int i, int j) -> double& { return sm.alpha[static_cast<size_t>(i) * q + j]; };
    auto be = [&](int i, int j) -> double& { return sm.beta[static_cast<size_t>(i) * q + j]; };

    al(0, 0) = 0.0;
    for (int i = 0; i < n; ++i) {
        double stage_max = kNegInf;
        for (int to = 0; to < q; ++to) {
            double best = kNegInf;
            for (int from = 0; from < q; ++from) {
                const double v = al(i, from) + bm.gs(i, from, to) + bm.gp(i, from, to);
                if (v > best) best = v;
            }
            al(i + 1, to) = best;
            if (best > stage_max) stage_max = best;
        }
        if (opt.normalize_stages && stage_max != kNegInf)
            for (int j = 0; j < q; ++j) al(i + 1, j) -= stage_max;
    }

    if (opt.termination == Termination::open) {
        for (int j = 0; j < q; ++j) be(n, j) = 0.0;
    } else {
        be(n, 0) = 0.0;
    }
    for (int i = n - 1; i >= 0; --i) {
        double stage_max = kNegInf;
        for (int from = 0; from < q; ++from) {
            double best = kNegInf;
            for (int to = 0; to < q; ++to) {
                const double v = be(i + 1, to) + bm.gs(i, from, to) + bm.gp(i, from, to);
                if (v > best) best = v;
            }
            be(i, from) = best;
            if (best > stage_max) stage_max = best;
        }
        if (opt.normalize_stages && stage_max != kNegInf)
            for (int j = 0; j < q; ++j) be(i, j) -= stage_max;
    }

    SymbolPosteriors post;
    post.q = q;
    post.stages = n;
    post.L.assign(static_cast<size_t>(n) * q, kNegInf);
    post.hard.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        double* Li = &post.L[static_cast<size_t>(i) * q];
        for (int from = 0; from < q; ++from) {
            if (al(i, from) == kNegInf) continue;
            for (int to = 0; to < q; ++to) {
                const double v =
                    al(i, from) + bm.gs(i, from, to) + bm.gp(i, from, to) + be(i + 1, to);
                const int u = tr.edge_sys(from, to);
                if (v > Li[u]) Li[u] = v;
            }
        }
        int arg = 0;
        for (int u = 1; u < q; ++u)
            if (Li[u] > Li[arg]) arg = u; // strict: ties keep the lower index
        post.hard[i] = arg;
    }
    if (out_metrics) *out_metrics = std::move(sm);
    return post;
}

// Reference decoder: score every input sequence's unique path from state 0
// and take per-stage per-symbol maxima. Exponential in frame length; only
// for oracle-sized instances.
inline SymbolPosteriors brute_force_oracle(const Trellis& tr, const BranchMetrics& bm,
                                           const DecodeOptions& opt = {}) {
    if (tr.q != bm.q) throw std::invalid_argument("oracle: trellis/metrics order mismatch");
    const int q = bm.q;
    const int n = bm.stages;
    double paths = 1.0;
    for (int i = 0; i < n; ++i) {
        paths *= q;
        if (paths > 1e6) throw std::invalid_argument("oracle: q^N exceeds 1e6");
    }

    SymbolPosteriors post;
    post.q = q;
    post.stages = n;
    post.L.assign(static_cast<size_t>(n) * q, kNegInf);
    post.hard.assign(n, 0);

    std::vector<int> input(n, 0);
    std::vector<int> state(n + 1, 0);
    const std::uint64_t total = [&] {
        std::uint64_t t = 1;
        for (int i = 0; i < n; ++i) t *= static_cast<std::uint64_t>(q);
        return t;
    }();
    for (std::uint64_t seq = 0; seq < total; ++seq) {
        std::uint64_t rest = seq;
        for (int i = 0; i < n; ++i) {
            input[i] = static_cast<int>(rest % q);
            rest /= q;
        }
        double score = 0.0;
        state[0] = 0;
        for (int i = 0; i < n; ++i) {
            // find the edge from state[i] driven by input[i]: its endpoint is
            // the unique to-state with matching systematic label
            int to = -1;
            for (int cand = 0; cand < q; ++cand)
                if (tr.edge_sys(state[i], cand) == input[i]) {
                    to = cand;
                    break;
                }
            score += bm.gs(i, state[i], to) + bm.gp(i, state[i], to);
            state[i + 1] = to;
        }
        if (opt.termination == Termination::terminated && state[n] != 0) continue;
        for (int i = 0; i < n; ++i) {
            double& slot = post.L[static_cast<size_t>(i) * q + input[i]];
            if (score > slot) slot = score;
        }
    }
    for (int i = 0; i < n; ++i) {
        const double* Li = &post.L[static_cast<size_t>(i) * q];
        int arg = 0;
        for (int u = 1; u < q; ++u)
            if (Li[u] > Li[arg]) arg = u;
        post.hard[i] = arg;
    }
    return post;
}

} // namespace nbcc
