#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nbcc {

// GF(2^m) built from a primitive polynomial given as a bitmask
// (bit i <-> coefficient of D^i). Elements are polynomial-basis bitmasks
// in [0, q). Addition is XOR; multiplication goes through log/antilog
// tables indexed by powers of the generator D (bitmask 2).
struct FieldSpec {
    int m = 0;
    int q = 0;
    unsigned poly = 0;
    std::vector<int> log_table;     // log_table[x] for x != 0; log_table[0] = -1
    std::vector<int> antilog_table; // length 2(q-1), doubled to skip the mod

    int add(int x, int y) const { return x ^ y; }

    int mul(int x, int y) const {
        if (x == 0 || y == 0) return 0;
        return antilog_table[log_table[x] + log_table[y]];
    }

    int inv(int x) const {
        if (x == 0) throw std::domain_error("gf: inverse of zero");
        return antilog_table[(q - 1) - log_table[x]];
    }

    int pow(int x, long long e) const {
        if (x == 0) return e == 0 ? 1 : 0;
        long long r = (static_cast<long long>(log_table[x]) * e) % (q - 1);
        if (r < 0) r += q - 1;
        return antilog_table[r];
    }
};

inline FieldSpec build_field(int m, unsigned poly) {
    if (m < 2 || m > 8)
        throw std::invalid_argument("gf: degree m must be in [2,8], got " + std::to_string(m));
    const int q = 1 << m;
    if (!(poly & 1u))
        throw std::invalid_argument("gf: polynomial must have constant term 1");
    if (!(poly >> m & 1u) || (poly >> (m + 1)) != 0)
        throw std::invalid_argument("gf: polynomial degree must be exactly " + std::to_string(m));

    FieldSpec f;
    f.m = m;
    f.q = q;
    f.poly = poly;
    f.log_table.assign(q, -1);
    f.antilog_table.assign(2 * (q - 1), 0);

    // Generate successive powers of D; primitivity <=> all q-1 nonzero
    // elements appear before the sequence returns to 1.
    unsigned e = 1;
    for (int i = 0; i < q - 1; ++i) {
        if (f.log_table[e] != -1)
            throw std::invalid_argument("gf: polynomial is not primitive (D has order " +
                                        std::to_string(i) + " < " + std::to_string(q - 1) + ")");
        f.log_table[e] = i;
        f.antilog_table[i] = static_cast<int>(e);
        f.antilog_table[i + q - 1] = static_cast<int>(e);
        e <<= 1;
        if (e & static_cast<unsigned>(q)) e ^= poly;
    }
    if (e != 1)
        throw std::invalid_argument("gf: polynomial is not primitive (D^(q-1) != 1)");
    return f;
}

// Fields used throughout: the paper's polynomials for GF(16) and GF(64),
// the unique primitive degree-2 polynomial for GF(4).
inline FieldSpec field_for_q(int q) {
    switch (q) {
        case 4: return build_field(2, 0b111);
        case 16: return build_field(4, 0b11001);
        case 64: return build_field(6, 0b1101101);
        default:
            throw std::invalid_argument("gf: no default polynomial for q=" + std::to_string(q));
    }
}

} // namespace nbcc
