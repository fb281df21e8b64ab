#include "catch_amalgamated.hpp"

#include <string>
#include <vector>

#include <nbcc/code.hpp>
#include <nbcc/gf.hpp>
#include <nbcc/mapping.hpp>
#include <nbcc/search.hpp>
#include <nbcc/spectrum.hpp>

using namespace nbcc;

namespace {

bool reports_equal(const SearchReport& a, const SearchReport& b) {
    if (a.total_codes != b.total_codes || a.evaluated != b.evaluated ||
        a.ranked.size() != b.ranked.size())
        return false;
    for (size_t i = 0; i < a.ranked.size(); ++i) {
        const auto& x = a.ranked[i];
        const auto& y = b.ranked[i];
        if (x.code.a1 != y.code.a1 || x.code.a2 != y.code.a2 || x.code.a3 != y.code.a3)
            return false;
        if (!same_rank_key(x.spectrum, y.spectrum)) return false;
    }
    return true;
}

} // namespace

TEST_CASE("GF(4)/QPSK search: 27 valid triples, known best class") {
    const FieldSpec f = field_for_q(4);
    const Constellation cs = build_qam(4);
    SearchOptions opt;
    opt.top = 5;
    opt.threads = 1;
    const SearchReport rep = search_codes(f, cs, opt);

    REQUIRE(rep.total_codes == 27);
    REQUIRE(rep.ranked.size() >= 5);

    // best tuple and the full top equivalence class, ascending coefficient order
    const auto& best = rep.ranked[0];
    REQUIRE(best.code.a1 == 1);
    REQUIRE(best.code.a2 == 2);
    REQUIRE(best.code.a3 == 3);
    REQUIRE(best.spectrum.d1_num == 20);
    REQUIRE(best.spectrum.n1 == 64);
    REQUIRE(best.spectrum.d2_num == 24);
    REQUIRE(best.spectrum.n2 == 416);
    REQUIRE(best.spectrum.scale_sq == 2);

    const std::vector<std::array<int, 3>> top_class = {
        {1, 2, 3}, {1, 3, 2}, {2, 3, 3}, {3, 2, 2}};
    for (size_t i = 0; i < top_class.size(); ++i) {
        REQUIRE(rep.ranked[i].code.a1 == top_class[i][0]);
        REQUIRE(rep.ranked[i].code.a2 == top_class[i][1]);
        REQUIRE(rep.ranked[i].code.a3 == top_class[i][2]);
        REQUIRE(same_rank_key(rep.ranked[i].spectrum, best.spectrum));
    }
    REQUIRE_FALSE(same_rank_key(rep.ranked[4].spectrum, best.spectrum));

    // ranking order is consistent with the comparator
    for (size_t i = 1; i < rep.ranked.size(); ++i)
        REQUIRE_FALSE(ranks_before(rep.ranked[i], rep.ranked[i - 1]));
}

TEST_CASE("search keeps trailing ties: top=1 still returns the whole class") {
    const FieldSpec f = field_for_q(4);
    const Constellation cs = build_qam(4);
    SearchOptions opt;
    opt.top = 1;
    const SearchReport rep = search_codes(f, cs, opt);
    REQUIRE(rep.ranked.size() == 4);
    for (const auto& e : rep.ranked)
        REQUIRE(same_rank_key(e.spectrum, rep.ranked[0].spectrum));
}

TEST_CASE("search report matches direct spectrum computation") {
    const FieldSpec f = field_for_q(4);
    const Constellation cs = build_qam(4);
    SearchOptions opt;
    opt.top = 27;
    const SearchReport rep = search_codes(f, cs, opt);
    REQUIRE(rep.ranked.size() == 27);
    for (const auto& e : rep.ranked) {
        const DistanceSpectrum direct = compute_spectrum(build_trellis(f, e.code), cs);
        REQUIRE(e.spectrum.d1_num == direct.d1_num);
        REQUIRE(e.spectrum.n1 == direct.n1);
        REQUIRE(e.spectrum.d2_num == direct.d2_num);
        REQUIRE(e.spectrum.n2 == direct.n2);
    }
}

TEST_CASE("GF(16)/16-QAM search: maximum d1^2 is 4.00 and (13,7,11) attains it") {
    const FieldSpec f = field_for_q(16);
    const Constellation cs = build_qam(16);
    SearchOptions opt;
    opt.top = 36;
    opt.threads = 4;
    const SearchReport rep = search_codes(f, cs, opt);

    REQUIRE(rep.total_codes == 3375); // 15*15*16 minus one invalid a3 per (a1,a2)
    REQUIRE(rep.ranked.size() == 36); // nine 4-member classes, ties complete
    REQUIRE(rep.ranked[0].spectrum.d1_num == 40);
    REQUIRE(rep.ranked[0].spectrum.scale_sq == 10);

    // rank-1 class: d1 ties are broken by n1 before d2, so the four codes
    // around (2,15,14) win even though their d2 is the smaller 44
    const auto& top = rep.ranked[0].spectrum;
    REQUIRE(top.n1 == 1792);
    REQUIRE(top.d2_num == 44);
    REQUIRE(top.n2 == 13056);
    REQUIRE(rep.ranked[0].code.a1 == 2);
    REQUIRE(rep.ranked[0].code.a2 == 15);
    REQUIRE(rep.ranked[0].code.a3 == 14);
    for (int i = 0; i < 4; ++i) REQUIRE(same_rank_key(rep.ranked[i].spectrum, top));

    // (13,7,11) is not in the rank-1 class but does attain the maximum d1:
    // its class (40,11008,48,73344) fills ranks 32..35
    bool found = false;
    for (const auto& e : rep.ranked) {
        if (e.code.a1 == 13 && e.code.a2 == 7 && e.code.a3 == 11) {
            found = true;
            REQUIRE(e.spectrum.d1_num == 40);
            REQUIRE(e.spectrum.n1 == 11008);
            REQUIRE(e.spectrum.d2_num == 48);
            REQUIRE(e.spectrum.n2 == 73344);
        }
    }
    REQUIRE(found);

    for (size_t i = 1; i < rep.ranked.size(); ++i) {
        REQUIRE_FALSE(ranks_before(rep.ranked[i], rep.ranked[i - 1]));
        REQUIRE(rep.ranked[i].spectrum.d1_num == 40); // all 36 attain the max
    }
}

TEST_CASE("search is deterministic across worker counts") {
    const FieldSpec f = field_for_q(16);
    const Constellation cs = build_qam(16);
    SearchOptions base;
    base.top = 10;
    base.threads = 1;
    const SearchReport ref = search_codes(f, cs, base);
    for (int threads : {2, 4, 16}) {
        SearchOptions opt = base;
        opt.threads = threads;
        REQUIRE(reports_equal(search_codes(f, cs, opt), ref));
    }
}

TEST_CASE("phase-1 bound agrees with length2_min and upper-bounds d1") {
    const FieldSpec f = field_for_q(16);
    const Constellation cs = build_qam(16);
    for (int a1 = 1; a1 < 16; ++a1)
        for (int a2 = 1; a2 < 16; ++a2)
            for (int a3 = 0; a3 < 16; ++a3) {
                if ((f.mul(a1, a2) ^ a3) == 0) continue;
                if ((a1 * 37 + a2 * 11 + a3) % 23 != 0) continue; // thin sample
                const Trellis tr = build_trellis(f, {a1, a2, a3});
                const long long cheap = detail::cheap_l2min(tr, cs);
                REQUIRE(cheap == length2_min(tr, cs));
                REQUIRE(cheap >= compute_spectrum(tr, cs).d1_num);
            }
}

TEST_CASE("search-space tallies: frozen values and the delta identity") {
    // q -> {distinct_mu, distinct_a, delta_n, n_mu, n_a}
    struct Row {
        int q;
        unsigned long long dmu, da, dn;
        std::string n_mu, n_a;
    };
    const std::vector<Row> rows = {
        {2, 3, 6, 3, "3", "6"},
        {4, 48, 120, 72, "62208", "155520"},
        {8, 840, 2016, 1176, "516311040", "1239146496"},
        {16, 14640, 32640, 18000, "3035750400000", "6768230400000"},
        {64, 4068288, 8386560, 4318272, "67200700593752506368",
         "138530681105059676160"},
        {256, 1065434880, 2147450880, 1082016000, "1209281783789247057100800000",
         "2437383344129101843660800000"},
    };
    for (const auto& r : rows) {
        const SearchSpaceCounts c = search_space_counts(r.q);
        REQUIRE(c.q == r.q);
        REQUIRE(c.distinct_mu == r.dmu);
        REQUIRE(c.distinct_a == r.da);
        REQUIRE(c.delta_n == r.dn);
        REQUIRE(to_decimal_string(c.n_mu) == r.n_mu);
        REQUIRE(to_decimal_string(c.n_a) == r.n_a);
        // C(q^2,2) - (C(q,2)+1)^2 + 1 = q(q-1)^2(q+4)/4, exactly
        REQUIRE(c.delta_n == delta_n_closed_form(r.q));
        REQUIRE(c.delta_n > 0);
    }
    REQUIRE_THROWS_AS(search_space_counts(1), std::invalid_argument);
}

TEST_CASE("decimal rendering of wide integers") {
    REQUIRE(to_decimal_string(0) == "0");
    REQUIRE(to_decimal_string(1234567890123456789ULL) == "1234567890123456789");
    unsigned __int128 big = 1000000000000000000ULL; // 1e18
    big *= 1000000000ULL;                           // 1e27
    REQUIRE(to_decimal_string(big) == "1000000000000000000000000000");
}

TEST_CASE("all 24 QPSK mappings share one best spectrum") {
    const FieldSpec f = field_for_q(4);
    const Constellation cs = build_qam(4);
    const MappingInvarianceReport rep = mapping_invariance_check(f, cs);
    REQUIRE(rep.mappings_checked == 24);
    REQUIRE(rep.best_invariant);
    REQUIRE(rep.best.d1_num == 20);
    REQUIRE(rep.best.n1 == 64);
    REQUIRE(rep.best.d2_num == 24);
    REQUIRE(rep.best.n2 == 416);

    // at q=4 even per-code spectra never move: S4 has order 24 = 4*3*2,
    // exactly the semiaffine maps x -> L(x or x^2) + c of GF(4), and each of
    // those is spectrum-preserving (translations cancel in label
    // differences, multiplicative maps are trellis automorphisms, Frobenius
    // swaps a code with its conjugate, which shares its spectrum)
    REQUIRE_FALSE(rep.fixed_code_varies);

    const FieldSpec f16 = field_for_q(16);
    REQUIRE_THROWS_AS(mapping_invariance_check(f16, build_qam(16)), std::invalid_argument);
}

TEST_CASE("180-degree rotation relabeling leaves spectra unchanged") {
    // negating both axes flips the top bit of each Gray axis group, so the
    // rotation is the XOR mask with those two bits; distances are untouched
    struct Case {
        int q;
        int mask;
    };
    for (const auto& [q, mask] : {Case{4, 0b11}, Case{16, 0b1100}}) {
        const FieldSpec f = field_for_q(q);
        const Constellation cs = build_qam(q);
        std::vector<int> perm(q);
        for (int s = 0; s < q; ++s) perm[s] = s ^ mask;
        const Constellation rot = permute_mapping(cs, perm);
        for (const auto& c : {CodeCoefficients{1, 2, 3}, CodeCoefficients{2, 1, 1},
                              CodeCoefficients{3, 1, 1}}) {
            validate_code(f, c);
            const DistanceSpectrum a = compute_spectrum(build_trellis(f, c), cs);
            const DistanceSpectrum b = compute_spectrum(build_trellis(f, c), rot);
            REQUIRE(same_rank_key(a, b));
        }
    }
}
