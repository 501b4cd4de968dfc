#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tracelens/alignment.hpp"
#include "tracelens/errors.hpp"

using namespace tracelens;

namespace {

std::vector<Symbol> str(const char* s) {
    std::vector<Symbol> out;
    for (const char* p = s; *p; ++p) out.push_back(static_cast<Symbol>(*p - 'A'));
    return out;
}

std::vector<Symbol> random_seq(std::mt19937_64& rng, int len, int alphabet) {
    std::uniform_int_distribution<Symbol> pick(0, static_cast<Symbol>(alphabet - 1));
    std::vector<Symbol> out(static_cast<std::size_t>(len));
    for (auto& s : out) s = pick(rng);
    return out;
}

void check_alignment_invariants(const std::vector<Symbol>& a, const std::vector<Symbol>& b,
                                const AlignmentResult& r) {
    CHECK(r.matches.size() + r.only_in_a.size() == a.size());
    CHECK(r.matches.size() + r.only_in_b.size() == b.size());
    for (std::size_t m = 0; m < r.matches.size(); ++m) {
        const auto& [i, j] = r.matches[m];
        CHECK(a[static_cast<std::size_t>(i)] == b[static_cast<std::size_t>(j)]);
        if (m > 0) {
            CHECK(i > r.matches[m - 1].first);
            CHECK(j > r.matches[m - 1].second);
        }
    }
    // removing unmatched indices from both sides yields the same string
    std::vector<Symbol> left, right;
    for (const auto& [i, j] : r.matches) {
        left.push_back(a[static_cast<std::size_t>(i)]);
        right.push_back(b[static_cast<std::size_t>(j)]);
    }
    CHECK(left == right);
}

} // namespace

TEST_CASE("classic difference example has LCS length 4") {
    auto a = str("ABCBDAB");
    auto b = str("BDCABA");
    CHECK(oracle::lcs_enumeration(a, b) == 4); // the frozen value's own oracle
    auto r = lcs(a, b);
    CHECK(r.matches.size() == 4);
    check_alignment_invariants(a, b, r);
}

TEST_CASE("identical sequences match completely") {
    auto a = str("ABCABCABCD");
    auto r = lcs(a, a);
    CHECK(r.matches.size() == a.size());
    CHECK(r.only_in_a.empty());
    CHECK(r.only_in_b.empty());
    CHECK(r.nlcs == doctest::Approx(1.0));
}

TEST_CASE("disjoint alphabets share nothing") {
    auto r = lcs(str("AAAA"), str("BBBB"));
    CHECK(r.matches.empty());
    CHECK(r.only_in_a.size() == 4);
    CHECK(r.only_in_b.size() == 4);
    CHECK(r.nlcs == 0.0);
}

TEST_CASE("empty inputs are valid for lcs") {
    auto r = lcs({}, str("AB"));
    CHECK(r.matches.empty());
    CHECK(r.only_in_b.size() == 2);
    CHECK(lcs({}, {}).matches.empty());
}

TEST_CASE("lcs equals the enumeration oracle on small inputs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 400; ++trial) {
        std::uniform_int_distribution<int> len(0, 9);
        auto a = random_seq(rng, len(rng), 3);
        auto b = random_seq(rng, len(rng), 3);
        auto r = lcs(a, b);
        CHECK(static_cast<int>(r.matches.size()) == oracle::lcs_enumeration(a, b));
        check_alignment_invariants(a, b, r);
    }
}

TEST_CASE("lcs equals the quadratic oracle on random pairs up to length 200") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> len(1, 200);
    std::uniform_int_distribution<int> alphabet(2, 8);
    for (int trial = 0; trial < 300; ++trial) {
        const int k = alphabet(rng);
        auto a = random_seq(rng, len(rng), k);
        auto b = random_seq(rng, len(rng), k);
        CHECK(static_cast<int>(lcs(a, b).matches.size()) == oracle::lcs_dp(a, b));
    }
}

TEST_CASE("appending a shared symbol never decreases LCS length") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> len(0, 40);
    std::uniform_int_distribution<Symbol> pick(0, 3);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_seq(rng, len(rng), 4);
        auto b = random_seq(rng, len(rng), 4);
        const auto before = lcs(a, b).matches.size();
        const Symbol shared = pick(rng);
        a.push_back(shared);
        b.push_back(shared);
        CHECK(lcs(a, b).matches.size() >= before);
    }
}

TEST_CASE("nlcs matches the published formula") {
    auto a = str("AAB");
    auto b = str("AB");
    CHECK(oracle::lcs_enumeration(a, b) == 2);
    CHECK(nlcs(a, b) == doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-12));
}

TEST_CASE("nlcs is symmetric and 1 on identical inputs") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> len(1, 60);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_seq(rng, len(rng), 5);
        auto b = random_seq(rng, len(rng), 5);
        CHECK(nlcs(a, b) == doctest::Approx(nlcs(b, a)).epsilon(1e-12));
        CHECK(nlcs(a, a) == doctest::Approx(1.0).epsilon(1e-12));
        const double v = nlcs(a, b);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("nlcs rejects empty inputs") {
    CHECK_THROWS_AS(nlcs({}, str("A")), DataError);
    CHECK_THROWS_AS(nlcs(str("A"), {}), DataError);
}

namespace {

EventSequence as_sequence(const std::vector<Symbol>& symbols, const char* id) {
    EventSequence seq;
    seq.trace_id = id;
    seq.symbols = symbols;
    seq.events.resize(symbols.size());
    return seq;
}

} // namespace

TEST_CASE("select_reference maximizes nlcs") {
    auto test = as_sequence(str("ABCD"), "test");
    auto exact = as_sequence(str("ABCD"), "exact");
    auto close = as_sequence(str("ABXD"), "close");
    auto far = as_sequence(str("XXXX"), "far");

    auto sel = select_reference(test, {far, close, exact});
    CHECK(sel.index == 2);
    CHECK(sel.alignment.nlcs == doctest::Approx(1.0));

    auto sel2 = select_reference(test, {close, far});
    CHECK(sel2.index == 0);
}

TEST_CASE("select_reference breaks ties toward the lowest index") {
    auto test = as_sequence(str("ABAB"), "test");
    auto t1 = as_sequence(str("ABAB"), "t1");
    auto t2 = as_sequence(str("ABAB"), "t2");
    CHECK(select_reference(test, {t1, t2}).index == 0);
}

TEST_CASE("select_reference rejects bad inputs") {
    auto test = as_sequence(str("AB"), "test");
    CHECK_THROWS_AS(select_reference(test, {}), ConfigError);
    CHECK_THROWS_AS(select_reference(as_sequence({}, "empty"), {test}), DataError);
    CHECK_THROWS_AS(select_reference(test, {as_sequence({}, "empty")}), DataError);
}
