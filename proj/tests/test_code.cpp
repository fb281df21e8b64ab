#include "catch_amalgamated.hpp"

#include <set>
#include <vector>

#include "nbcc/code.hpp"

using namespace nbcc;

TEST_CASE("coefficient validity rules") {
    const FieldSpec f = field_for_q(16);
    CHECK_NOTHROW(validate_code(f, {13, 7, 11}));
    CHECK_NOTHROW(validate_code(f, {12, 4, 0}));
    CHECK_THROWS_WITH(validate_code(f, {0, 4, 1}), Catch::Matchers::ContainsSubstring("a1"));
    CHECK_THROWS_WITH(validate_code(f, {12, 0, 1}), Catch::Matchers::ContainsSubstring("a2"));
    // a3 = a1*a2 makes the parity a fixed multiple of the input
    const int degenerate_a3 = f.mul(12, 4);
    CHECK_THROWS_WITH(validate_code(f, {12, 4, degenerate_a3}),
                      Catch::Matchers::ContainsSubstring("a1*a2 + a3"));
    CHECK_THROWS_AS(validate_code(f, {16, 4, 0}), std::invalid_argument);
}

TEST_CASE("single-step encoder anchors") {
    const FieldSpec f = field_for_q(16);
    const CodeCoefficients c{13, 7, 11};
    const StepResult r = step(f, c, 0, 5);
    CHECK(r.next_state == 5);
    CHECK(r.parity == 2);
    const StepResult r0 = step(f, c, 0, 0);
    CHECK(r0.next_state == 0);
    CHECK(r0.parity == 0);
}

TEST_CASE("S1 subcase: parity depends on the next state only") {
    const FieldSpec f = field_for_q(16);
    const CodeCoefficients s1{12, 4, 0};
    for (int st = 0; st < 16; ++st)
        for (int in = 0; in < 16; ++in) {
            const StepResult r = step(f, s1, st, in);
            REQUIRE(r.parity == f.mul(4, r.next_state));
        }
}

TEST_CASE("frame encoding") {
    const FieldSpec f = field_for_q(16);
    const CodeCoefficients c{13, 7, 11};

    SECTION("two-step anchor") {
        const EncodedFrame fr = encode_frame(f, c, {5, 0});
        CHECK(fr.systematic == std::vector<int>{5, 0});
        CHECK(fr.parity == std::vector<int>{2, 15});
        CHECK(fr.final_state == 11);
    }
    SECTION("all-zero input stays at zero") {
        const EncodedFrame fr = encode_frame(f, c, std::vector<int>(8, 0));
        CHECK(fr.final_state == 0);
        for (int p : fr.parity) REQUIRE(p == 0);
    }
    SECTION("termination appends one tail symbol and lands in state 0") {
        const EncodedFrame fr = encode_frame(f, c, {5, 0}, true);
        REQUIRE(fr.systematic.size() == 3);
        CHECK(fr.systematic[2] == f.mul(c.a1, 11)); // tail = a1 * pre-tail state
        CHECK(fr.final_state == 0);
    }
    SECTION("empty input rejected") {
        CHECK_THROWS_AS(encode_frame(f, c, {}), std::invalid_argument);
    }
}

TEST_CASE("trellis structure") {
    for (int q : {4, 16, 64}) {
        const FieldSpec f = field_for_q(q);
        const CodeCoefficients c = q == 4 ? CodeCoefficients{2, 1, 1}
                                 : q == 16 ? CodeCoefficients{10, 12, 3}
                                           : CodeCoefficients{31, 5, 18};
        validate_code(f, c);
        const Trellis t = build_trellis(f, c);
        REQUIRE(static_cast<int>(t.sys.size()) == q * q);

        for (int u = 0; u < q; ++u) {
            std::set<int> out_sys, in_par;
            for (int v = 0; v < q; ++v) {
                out_sys.insert(t.edge_sys(u, v));
                in_par.insert(t.edge_par(v, u));
                // labels agree with the step function
                const StepResult r = step(f, c, u, t.edge_sys(u, v));
                REQUIRE(r.next_state == v);
                REQUIRE(r.parity == t.edge_par(u, v));
            }
            // q distinct systematic labels leave each state; with a3 != 0
            // the q entering parity labels are a permutation of the field
            REQUIRE(static_cast<int>(out_sys.size()) == q);
            REQUIRE(static_cast<int>(in_par.size()) == q);
        }
    }
}

TEST_CASE("trellis parity labels collapse when a3 = 0") {
    const FieldSpec f = field_for_q(16);
    const Trellis t = build_trellis(f, {12, 4, 0});
    for (int v = 0; v < 16; ++v)
        for (int u = 0; u < 16; ++u)
            REQUIRE(t.edge_par(u, v) == f.mul(4, v)); // same for all arriving edges
}
