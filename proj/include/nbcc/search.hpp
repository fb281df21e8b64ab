#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "code.hpp"
#include "gf.hpp"
#include "mapping.hpp"
#include "spectrum.hpp"

namespace nbcc {

struct RankedCode {
    CodeCoefficients code;
    DistanceSpectrum spectrum;
};

// A is ranked strictly better than B: larger d1, then fewer n1, then larger
// d2, then fewer n2; exhausted ties fall back to ascending (a1,a2,a3) so the
// ordering is total and reproducible. Numerator comparison is valid because
// one search uses one constellation (same scale_sq everywhere).
inline bool ranks_before(const RankedCode& a, const RankedCode& b) {
    if (a.spectrum.d1_num != b.spectrum.d1_num) return a.spectrum.d1_num > b.spectrum.d1_num;
    if (a.spectrum.n1 != b.spectrum.n1) return a.spectrum.n1 < b.spectrum.n1;
    if (a.spectrum.d2_num != b.spectrum.d2_num) return a.spectrum.d2_num > b.spectrum.d2_num;
    if (a.spectrum.n2 != b.spectrum.n2) return a.spectrum.n2 < b.spectrum.n2;
    if (a.code.a1 != b.code.a1) return a.code.a1 < b.code.a1;
    if (a.code.a2 != b.code.a2) return a.code.a2 < b.code.a2;
    return a.code.a3 < b.code.a3;
}

// Same ranking key (distance tuple only, coefficients ignored): members of
// one equivalence class are interchangeable as far as the ranking goes.
inline bool same_rank_key(const DistanceSpectrum& a, const DistanceSpectrum& b) {
    return a.d1_num == b.d1_num && a.n1 == b.n1 && a.d2_num == b.d2_num && a.n2 == b.n2;
}

struct SearchOptions {
    int top = 20;     // ranking positions wanted; trailing ties are kept
    int threads = 1;  // workers; the report is identical for any value
};

struct SearchReport {
    std::vector<RankedCode> ranked; // exact spectra, best first, ties complete
    std::uint64_t total_codes = 0;  // valid triples enumerated
    std::uint64_t evaluated = 0;    // exact spectra computed (phase 2)
    int top_requested = 0;
    double elapsed_seconds = 0.0;
};

namespace detail {

// Smallest length-2 DC distance without the row sorting done by
// build_section_costs; used only as the phase-1 shortlist key. It upper
// bounds the true d1, so processing codes in descending order of this value
// lets the exact phase stop as soon as the bound drops below the ranked
// entries that are already settled.
inline long long cheap_l2min(const Trellis& tr, const Constellation& cs) {
    const int q = tr.q;
    long long best = kNoValue;
    for (int x = 0; x < q; ++x)
        for (int y = x + 1; y < q; ++y) {
            int tmin = INT_MAX, cmin = INT_MAX;
            for (int e = 0; e < q; ++e) {
                const int t = cs.squared_distance_num(tr.edge_sys(e, x), tr.edge_sys(e, y)) +
                              cs.squared_distance_num(tr.edge_par(e, x), tr.edge_par(e, y));
                if (t < tmin) tmin = t;
                const int c = cs.squared_distance_num(tr.edge_sys(x, e), tr.edge_sys(y, e)) +
                              cs.squared_distance_num(tr.edge_par(x, e), tr.edge_par(y, e));
                if (c < cmin) cmin = c;
            }
            best = std::min(best, static_cast<long long>(tmin) + cmin);
        }
    return best;
}

} // namespace detail

// Exhaustive search over a1 in GF*, a2 in GF*, a3 in GF with a1*a2 + a3
// nonzero (the a3 = 0 subcase is included). Two phases, both deterministic:
// phase 1 scores every valid triple with its length-2 minimum (a cheap upper
// bound on d1) and sorts descending; phase 2 walks that order in fixed-size
// chunks computing exact spectra until every unprocessed code's bound is
// strictly below the d1 of the last wanted rank, at which point no
// unprocessed code can enter or tie the reported list.
inline SearchReport search_codes(const FieldSpec& field, const Constellation& cs,
                                 const SearchOptions& opt = {}) {
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();
    if (field.q != cs.q) throw std::invalid_argument("search: field/constellation order mismatch");
    if (opt.top < 1) throw std::invalid_argument("search: top must be >= 1");
    const int q = field.q;
    const int nthreads = std::max(1, opt.threads);

    std::vector<CodeCoefficients> codes;
    codes.reserve(static_cast<size_t>(q - 1) * (q - 1) * (q - 1));
    for (int a1 = 1; a1 < q; ++a1)
        for (int a2 = 1; a2 < q; ++a2)
            for (int a3 = 0; a3 < q; ++a3) {
                if ((field.mul(a1, a2) ^ a3) == 0) continue;
                codes.push_back({a1, a2, a3});
            }

    // phase 1: cheap bound per code, embarrassingly parallel
    std::vector<long long> bound(codes.size());
    {
        std::atomic<size_t> next{0};
        auto scorer = [&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= codes.size()) break;
                const Trellis tr = build_trellis(field, codes[i]);
                bound[i] = detail::cheap_l2min(tr, cs);
            }
        };
        if (nthreads == 1) {
            scorer();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(nthreads);
            for (int w = 0; w < nthreads; ++w) pool.emplace_back(scorer);
            for (auto& th : pool) th.join();
        }
    }

    std::vector<size_t> order(codes.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return bound[a] > bound[b]; // enumeration order already ascending (a1,a2,a3)
    });

    // phase 2: exact spectra down the sorted order, chunk by chunk
    SearchReport report;
    report.total_codes = codes.size();
    report.top_requested = opt.top;
    std::vector<RankedCode> exact;
    const size_t chunk = 64;
    size_t done = 0;
    while (done < order.size()) {
        const size_t end = std::min(done + chunk, order.size());
        std::vector<RankedCode> batch(end - done);
        std::atomic<size_t> next{done};
        auto evaluator = [&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= end) break;
                const CodeCoefficients& c = codes[order[i]];
                const Trellis tr = build_trellis(field, c);
                batch[i - done].code = c;
                batch[i - done].spectrum = compute_spectrum(tr, cs);
            }
        };
        if (nthreads == 1) {
            evaluator();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(nthreads);
            for (int w = 0; w < nthreads; ++w) pool.emplace_back(evaluator);
            for (auto& th : pool) th.join();
        }
        exact.insert(exact.end(), batch.begin(), batch.end());
        done = end;
        if (done >= order.size()) break;
        const long long threshold = bound[order[done]]; // best any remaining code could do
        if (exact.size() >= static_cast<size_t>(opt.top)) {
            std::vector<long long> d1s;
            d1s.reserve(exact.size());
            for (const auto& e : exact) d1s.push_back(e.spectrum.d1_num);
            std::nth_element(d1s.begin(), d1s.begin() + (opt.top - 1), d1s.end(),
                             std::greater<>());
            if (d1s[opt.top - 1] > threshold) break;
        }
    }
    report.evaluated = exact.size();

    std::sort(exact.begin(), exact.end(), ranks_before);
    size_t keep = std::min(static_cast<size_t>(opt.top), exact.size());
    while (keep < exact.size() &&
           same_rank_key(exact[keep].spectrum, exact[keep - 1].spectrum))
        ++keep;
    exact.resize(keep);
    report.ranked = std::move(exact);
    report.elapsed_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
    return report;
}

// Exact search-space tallies. n_mu counts distinct metric outcomes when the
// constellation pairing is free, n_a when labels are assigned arbitrarily:
//   n_mu = ((C(q,2)+1)^2 - 1) * C(q,2)^4
//   n_a  = C(q^2,2) * C(q,2)^4
// Their distinct-value factors differ by delta_n = q(q-1)^2(q+4)/4 > 0.
// q = 256 pushes n_a to ~2.4e27, hence the 128-bit fields.
struct SearchSpaceCounts {
    int q = 0;
    unsigned long long distinct_mu = 0; // (C(q,2)+1)^2 - 1
    unsigned long long distinct_a = 0;  // C(q^2,2)
    unsigned long long delta_n = 0;     // distinct_a - distinct_mu
    unsigned __int128 n_mu = 0;
    unsigned __int128 n_a = 0;
};

inline std::string to_decimal_string(unsigned __int128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

inline SearchSpaceCounts search_space_counts(int q) {
    if (q < 2) throw std::invalid_argument("search_space_counts: q must be >= 2");
    const unsigned long long uq = static_cast<unsigned long long>(q);
    const unsigned long long c2 = uq * (uq - 1) / 2;            // C(q,2)
    const unsigned long long qq = uq * uq;
    const unsigned long long c2qq = qq * (qq - 1) / 2;          // C(q^2,2)
    SearchSpaceCounts out;
    out.q = q;
    out.distinct_mu = (c2 + 1) * (c2 + 1) - 1;
    out.distinct_a = c2qq;
    out.delta_n = out.distinct_a - out.distinct_mu;
    unsigned __int128 c2p4 = static_cast<unsigned __int128>(c2) * c2;
    c2p4 *= c2p4; // C(q,2)^4
    out.n_mu = static_cast<unsigned __int128>(out.distinct_mu) * c2p4;
    out.n_a = static_cast<unsigned __int128>(out.distinct_a) * c2p4;
    return out;
}

// Closed form for delta_n, kept separate so tests can check the identity
// C(q^2,2) - (C(q,2)+1)^2 + 1 = q(q-1)^2(q+4)/4 against the tallies above.
inline unsigned long long delta_n_closed_form(int q) {
    const unsigned long long uq = static_cast<unsigned long long>(q);
    return uq * (uq - 1) * (uq - 1) * (uq + 4) / 4;
}

struct MappingInvarianceReport {
    int mappings_checked = 0;
    bool best_invariant = false;    // best-over-codes tuple identical everywhere
    bool fixed_code_varies = false; // some single code's spectrum does change
    DistanceSpectrum best;          // the common best (identity mapping's)
    CodeCoefficients varying_code;  // witness for fixed_code_varies
    std::vector<int> varying_mapping;
};

// Run the full code search under every one of the q! symbol-to-point
// mappings and check that the best achievable (d1,n1,d2,n2) never moves.
// A witness is collected if any single code's spectrum shifts under some
// remapping. Note that at q=4 none does: all 24 permutations of GF(4) are
// semiaffine maps (|S4| = |AGammaL(1,4)|), each of which preserves per-code
// spectra. Factorial blow-up limits the check to toy fields.
inline MappingInvarianceReport mapping_invariance_check(const FieldSpec& field,
                                                        const Constellation& cs) {
    if (field.q != cs.q)
        throw std::invalid_argument("mapping invariance: field/constellation order mismatch");
    if (field.q > 8)
        throw std::invalid_argument("mapping invariance: q! mappings intractable for q > 8");
    const int q = field.q;

    std::vector<CodeCoefficients> codes;
    for (int a1 = 1; a1 < q; ++a1)
        for (int a2 = 1; a2 < q; ++a2)
            for (int a3 = 0; a3 < q; ++a3) {
                if ((field.mul(a1, a2) ^ a3) == 0) continue;
                codes.push_back({a1, a2, a3});
            }

    std::vector<Trellis> trellises;
    trellises.reserve(codes.size());
    for (const auto& c : codes) trellises.push_back(build_trellis(field, c));

    // per-mapping spectra of every code; the best is reduced from these and
    // the same values serve as the variance probe against the identity run
    auto all_spectra = [&](const Constellation& mapped) {
        std::vector<DistanceSpectrum> out;
        out.reserve(codes.size());
        for (const auto& tr : trellises) out.push_back(compute_spectrum(tr, mapped));
        return out;
    };
    auto best_of = [&](const std::vector<DistanceSpectrum>& sp) {
        size_t best = 0;
        for (size_t i = 1; i < sp.size(); ++i)
            if (ranks_before({codes[i], sp[i]}, {codes[best], sp[best]})) best = i;
        return sp[best];
    };

    MappingInvarianceReport rep;
    const std::vector<DistanceSpectrum> base = all_spectra(cs);
    rep.best = best_of(base);
    rep.best_invariant = true;

    std::vector<int> perm(q);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        const Constellation mapped = permute_mapping(cs, perm);
        const std::vector<DistanceSpectrum> sp = all_spectra(mapped);
        if (!same_rank_key(best_of(sp), rep.best)) rep.best_invariant = false;
        if (!rep.fixed_code_varies)
            for (size_t i = 0; i < sp.size(); ++i)
                if (!same_rank_key(sp[i], base[i])) {
                    rep.fixed_code_varies = true;
                    rep.varying_code = codes[i];
                    rep.varying_mapping = perm;
                    break;
                }
        ++rep.mappings_checked;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return rep;
}

} // namespace nbcc
