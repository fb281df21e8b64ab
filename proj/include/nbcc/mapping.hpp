#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "gf.hpp"

namespace nbcc {

// Square QAM constellation on odd integer levels with the Gray labeling of
// Table-style bit-to-axis assignment: odd-indexed bits of the symbol's binary
// image select the Q level, even-indexed bits the I level, each axis Gray
// coded. Coordinates stay unnormalized integers; scale_sq is the average
// energy E_s, so normalized squared distances are exact rationals
// numerator / scale_sq.
struct Constellation {
    int q = 0;
    int scale_sq = 0;
    std::vector<int> point_i; // per point index
    std::vector<int> point_q;
    std::vector<int> mapping;  // mu[field element] = point index
    std::vector<int> dist_num; // dist_num[x*q + y] = (dI^2 + dQ^2) between mapped symbols

    int sym_i(int x) const { return point_i[mapping[x]]; }
    int sym_q(int x) const { return point_q[mapping[x]]; }
    int squared_distance_num(int x, int y) const {
        return dist_num[static_cast<size_t>(x) * q + y];
    }
    double squared_distance(int x, int y) const {
        return static_cast<double>(squared_distance_num(x, y)) / scale_sq;
    }
};

namespace detail {

// Axis levels indexed by the Gray bit group value. Two bits: 00,01,11,10
// walk +3,+1,-1,-3; three bits extend the same reflected pattern over
// +7..-7. One bit (QPSK): 0 -> +1, 1 -> -1.
inline int gray_axis_level(int bits, int nbits) {
    switch (nbits) {
        case 1: {
            static const int lv[2] = {+1, -1};
            return lv[bits];
        }
        case 2: {
            static const int lv[4] = {+3, +1, -3, -1}; // index = (b_hi<<1)|b_lo
            return lv[bits];
        }
        case 3: {
            // index = (b2<<2)|(b1<<1)|b0 for the axis triple, Table order:
            // 000:+7 001:+5 011:+3 010:+1 110:-1 111:-3 101:-5 100:-7
            static const int lv[8] = {+7, +5, +1, +3, -7, -5, -1, -3};
            return lv[bits];
        }
        default:
            throw std::invalid_argument("mapping: unsupported axis width");
    }
}

inline void rebuild_distances(Constellation& c) {
    c.dist_num.assign(static_cast<size_t>(c.q) * c.q, 0);
    for (int x = 0; x < c.q; ++x)
        for (int y = 0; y < c.q; ++y) {
            const int di = c.sym_i(x) - c.sym_i(y);
            const int dq = c.sym_q(x) - c.sym_q(y);
            c.dist_num[static_cast<size_t>(x) * c.q + y] = di * di + dq * dq;
        }
}

} // namespace detail

inline Constellation build_qam(int q) {
    if (q != 4 && q != 16 && q != 64)
        throw std::invalid_argument("mapping: unsupported constellation order " +
                                    std::to_string(q));
    const int m = q == 4 ? 2 : (q == 16 ? 4 : 6);
    const int half = m / 2; // bits per axis
    Constellation c;
    c.q = q;
    c.point_i.resize(q);
    c.point_q.resize(q);
    c.mapping.resize(q);
    std::iota(c.mapping.begin(), c.mapping.end(), 0);
    long long energy = 0;
    for (int v = 0; v < q; ++v) {
        int ibits = 0, qbits = 0;
        for (int k = half - 1; k >= 0; --k) {
            ibits = (ibits << 1) | (v >> (2 * k) & 1);     // even bits -> I
            qbits = (qbits << 1) | (v >> (2 * k + 1) & 1); // odd bits -> Q
        }
        c.point_i[v] = detail::gray_axis_level(ibits, half);
        c.point_q[v] = detail::gray_axis_level(qbits, half);
        energy += static_cast<long long>(c.point_i[v]) * c.point_i[v] +
                  static_cast<long long>(c.point_q[v]) * c.point_q[v];
    }
    c.scale_sq = static_cast<int>(energy / q);
    detail::rebuild_distances(c);
    return c;
}

inline Constellation build_qam(const FieldSpec& f) { return build_qam(f.q); }

inline Constellation permute_mapping(const Constellation& base, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != base.q)
        throw std::invalid_argument("mapping: permutation size mismatch");
    std::vector<char> seen(base.q, 0);
    for (int p : perm) {
        if (p < 0 || p >= base.q || seen[p])
            throw std::invalid_argument("mapping: permutation is not bijective");
        seen[p] = 1;
    }
    Constellation c = base;
    for (int x = 0; x < base.q; ++x) c.mapping[x] = perm[base.mapping[x]];
    detail::rebuild_distances(c);
    return c;
}

// Binary image modulator: symbol -> m antipodal values +-1 (bit 0 -> +1),
// most significant bit first, unit energy per transmitted value.
struct BpskImage {
    int m = 0;
    std::vector<int> symbol_bits(int v) const {
        std::vector<int> out(m);
        for (int k = 0; k < m; ++k) out[k] = (v >> (m - 1 - k)) & 1;
        return out;
    }
    std::vector<double> modulate(int v) const {
        std::vector<double> out(m);
        for (int k = 0; k < m; ++k) out[k] = (v >> (m - 1 - k) & 1) ? -1.0 : 1.0;
        return out;
    }
};

inline BpskImage build_bpsk_image(const FieldSpec& f) { return BpskImage{f.m}; }

} // namespace nbcc
