#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gf.hpp"

namespace nbcc {

// One-memory recursive systematic code over GF(q), rate 1/2.
// State update   E_{i+1} = s_i + a1*E_i          (a1 != 0)
// Parity         p_i     = a2*E_{i+1} + a3*E_i   (a2 != 0, a1*a2 + a3 != 0)
// a3 == 0 gives the S1 structure (parity depends on the next state only);
// a3 != 0 gives S2.
struct CodeCoefficients {
    int a1 = 1;
    int a2 = 1;
    int a3 = 0;
};

inline void validate_code(const FieldSpec& f, const CodeCoefficients& c) {
    auto in_range = [&](int a) { return a >= 0 && a < f.q; };
    if (!in_range(c.a1) || !in_range(c.a2) || !in_range(c.a3))
        throw std::invalid_argument("code: coefficient out of field range");
    if (c.a1 == 0)
        throw std::invalid_argument("code: a1 must be nonzero (recursive feedback)");
    if (c.a2 == 0)
        throw std::invalid_argument("code: a2 must be nonzero");
    if (f.add(f.mul(c.a1, c.a2), c.a3) == 0)
        throw std::invalid_argument(
            "code: a1*a2 + a3 must be nonzero (parity would reduce to a2*s_i)");
}

struct StepResult {
    int next_state;
    int parity;
};

inline StepResult step(const FieldSpec& f, const CodeCoefficients& c, int state, int input) {
    const int next = f.add(input, f.mul(c.a1, state));
    const int parity = f.add(f.mul(c.a2, next), f.mul(c.a3, state));
    return {next, parity};
}

struct EncodedFrame {
    std::vector<int> systematic; // equals inputs, plus one tail symbol if terminated
    std::vector<int> parity;
    int final_state = 0;
};

inline EncodedFrame encode_frame(const FieldSpec& f, const CodeCoefficients& c,
                                 const std::vector<int>& inputs, bool terminate = false) {
    if (inputs.empty()) throw std::invalid_argument("encode_frame: empty input");
    EncodedFrame out;
    out.systematic.reserve(inputs.size() + 1);
    out.parity.reserve(inputs.size() + 1);
    int state = 0;
    for (int s : inputs) {
        const StepResult r = step(f, c, state, s);
        out.systematic.push_back(s);
        out.parity.push_back(r.parity);
        state = r.next_state;
    }
    if (terminate) {
        // s = a1*E cancels the feedback in characteristic 2: E_next = 0.
        const int tail = f.mul(c.a1, state);
        const StepResult r = step(f, c, state, tail);
        out.systematic.push_back(tail);
        out.parity.push_back(r.parity);
        state = r.next_state;
    }
    out.final_state = state;
    return out;
}

// Fully connected q-state trellis with labels in flat (from*q + to) order.
// For an edge from state u to state v:
//   systematic s(u,v) = v + a1*u   (the input that causes the transition)
//   parity     p(u,v) = a2*v + a3*u
struct Trellis {
    int q = 0;
    CodeCoefficients code;
    std::vector<int> sys; // sys[u*q + v]
    std::vector<int> par; // par[u*q + v]

    int edge_sys(int u, int v) const { return sys[static_cast<size_t>(u) * q + v]; }
    int edge_par(int u, int v) const { return par[static_cast<size_t>(u) * q + v]; }
};

inline Trellis build_trellis(const FieldSpec& f, const CodeCoefficients& c) {
    validate_code(f, c);
    Trellis t;
    t.q = f.q;
    t.code = c;
    t.sys.resize(static_cast<size_t>(f.q) * f.q);
    t.par.resize(static_cast<size_t>(f.q) * f.q);
    for (int u = 0; u < f.q; ++u) {
        const int fb = f.mul(c.a1, u);
        const int pu = f.mul(c.a3, u);
        for (int v = 0; v < f.q; ++v) {
            t.sys[static_cast<size_t>(u) * f.q + v] = f.add(v, fb);
            t.par[static_cast<size_t>(u) * f.q + v] = f.add(f.mul(c.a2, v), pu);
        }
    }
    return t;
}

} // namespace nbcc
