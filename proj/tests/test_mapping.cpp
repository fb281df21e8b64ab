#include "catch_amalgamated.hpp"

#include <bit>
#include <climits>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "nbcc/mapping.hpp"

using namespace nbcc;

TEST_CASE("constellation energies and sizes") {
    CHECK(build_qam(4).scale_sq == 2);
    CHECK(build_qam(16).scale_sq == 10);
    CHECK(build_qam(64).scale_sq == 42);
    CHECK_THROWS_AS(build_qam(8), std::invalid_argument);
}

TEST_CASE("16-QAM labeling matches the bit-to-axis table") {
    const Constellation c = build_qam(16);
    // b3b2b1b0 = 0000: both axis pairs 00 -> +3
    CHECK(c.sym_i(0b0000) == 3);
    CHECK(c.sym_q(0b0000) == 3);
    // 0101: Q pair (b3,b1) = 00 -> +3, I pair (b2,b0) = 11 -> -1
    CHECK(c.sym_i(0b0101) == -1);
    CHECK(c.sym_q(0b0101) == 3);
    // 1010: Q pair 11 -> -1, I pair 00 -> +3
    CHECK(c.sym_i(0b1010) == 3);
    CHECK(c.sym_q(0b1010) == -1);
}

TEST_CASE("64-QAM labeling") {
    const Constellation c = build_qam(64);
    CHECK(c.sym_i(0) == 7);
    CHECK(c.sym_q(0) == 7);
    // 100100: Q triple (b5,b3,b1) = 100 -> -7, I triple (b4,b2,b0) = 010 -> +1
    CHECK(c.sym_i(0b100100) == 1);
    CHECK(c.sym_q(0b100100) == -7);
    // all 64 lattice points on odd levels, each exactly once
    std::set<std::pair<int, int>> pts;
    for (int v = 0; v < 64; ++v) {
        REQUIRE(std::abs(c.sym_i(v)) % 2 == 1);
        REQUIRE(std::abs(c.sym_i(v)) <= 7);
        pts.emplace(c.sym_i(v), c.sym_q(v));
    }
    CHECK(pts.size() == 64);
}

TEST_CASE("QPSK labeling") {
    const Constellation c = build_qam(4);
    CHECK(c.sym_i(0b00) == 1);
    CHECK(c.sym_q(0b00) == 1);
    CHECK(c.sym_i(0b01) == -1); // b0 -> I
    CHECK(c.sym_q(0b10) == -1); // b1 -> Q
}

TEST_CASE("Gray property: lattice neighbors differ in exactly one bit") {
    for (int q : {16, 64}) {
        const Constellation c = build_qam(q);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                const int di = c.sym_i(a) - c.sym_i(b);
                const int dq = c.sym_q(a) - c.sym_q(b);
                if ((std::abs(di) == 2 && dq == 0) || (di == 0 && std::abs(dq) == 2))
                    REQUIRE(std::popcount(static_cast<unsigned>(a ^ b)) == 1);
            }
    }
}

TEST_CASE("distance table") {
    const Constellation c = build_qam(16);
    SECTION("exact numerators and normalization") {
        // adjacent points (3,3) and (1,3): labels 0000 and 0001 (I pair 00 vs 01)
        CHECK(c.squared_distance_num(0b0000, 0b0001) == 4);
        CHECK(c.squared_distance(0b0000, 0b0001) == Catch::Approx(0.4));
    }
    SECTION("metric basics over all pairs") {
        for (int x = 0; x < 16; ++x)
            for (int y = 0; y < 16; ++y) {
                REQUIRE(c.squared_distance_num(x, y) == c.squared_distance_num(y, x));
                REQUIRE((c.squared_distance_num(x, y) == 0) == (x == y));
            }
    }
    SECTION("minimum nonzero normalized distances") {
        auto min_nonzero = [](const Constellation& cc) {
            int best = INT_MAX;
            for (int x = 0; x < cc.q; ++x)
                for (int y = 0; y < cc.q; ++y)
                    if (x != y) best = std::min(best, cc.squared_distance_num(x, y));
            return static_cast<double>(best) / cc.scale_sq;
        };
        CHECK(min_nonzero(build_qam(4)) == Catch::Approx(2.0));
        CHECK(min_nonzero(build_qam(16)) == Catch::Approx(0.4));
        CHECK(min_nonzero(build_qam(64)) == Catch::Approx(4.0 / 42.0));
    }
}

TEST_CASE("mapping permutations") {
    const Constellation base = build_qam(16);
    std::vector<int> ident(16);
    std::iota(ident.begin(), ident.end(), 0);

    SECTION("identity keeps the distance table") {
        const Constellation c = permute_mapping(base, ident);
        for (int x = 0; x < 16; ++x)
            for (int y = 0; y < 16; ++y)
                REQUIRE(c.squared_distance_num(x, y) == base.squared_distance_num(x, y));
    }
    SECTION("any permutation preserves the multiset of pairwise distances") {
        std::vector<int> perm = ident;
        std::swap(perm[3], perm[11]);
        std::swap(perm[0], perm[7]);
        const Constellation c = permute_mapping(base, perm);
        std::multiset<int> before(base.dist_num.begin(), base.dist_num.end());
        std::multiset<int> after(c.dist_num.begin(), c.dist_num.end());
        REQUIRE(before == after);
    }
    SECTION("non-bijective permutations rejected") {
        std::vector<int> bad = ident;
        bad[5] = 4;
        CHECK_THROWS_AS(permute_mapping(base, bad), std::invalid_argument);
        CHECK_THROWS_AS(permute_mapping(base, {0, 1, 2}), std::invalid_argument);
    }
}

TEST_CASE("BPSK binary image") {
    const FieldSpec f = field_for_q(4);
    const BpskImage b = build_bpsk_image(f);
    CHECK(b.modulate(0) == std::vector<double>{1.0, 1.0});
    CHECK(b.modulate(3) == std::vector<double>{-1.0, -1.0});
    CHECK(b.modulate(2) == std::vector<double>{-1.0, 1.0}); // MSB first
    for (int v = 0; v < 4; ++v)
        for (double x : b.modulate(v)) REQUIRE(x * x == 1.0);
}
