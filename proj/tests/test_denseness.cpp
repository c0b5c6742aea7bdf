#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hytile/denseness.hpp"
#include "hytile/error.hpp"
#include "hytile/generators.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace hytile;
using hytile::testing::part_vertices;
using hytile::testing::random_host;

namespace {

struct Brute {
    double value = 0;
    SubsetTuple witness;
};

// Every vertex subset of V(H), read as a tuple; ties go to the tuple whose
// per-part masks are smallest, part 1 compared first.
Brute brute_min_slack(const KPartiteHypergraph& h, double p) {
    const std::size_t n = h.vertex_count();
    const std::size_t k = static_cast<std::size_t>(h.k());
    Brute best;
    std::vector<std::uint64_t> best_key;
    bool have = false;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::uint64_t edges = 0;
        for (std::size_t i = 0; i < h.edge_count(); ++i) {
            bool inside = true;
            for (Vertex v : h.edge(i))
                inside = inside && ((mask >> v) & 1);
            edges += inside;
        }
        double prod = 1;
        std::vector<std::uint64_t> key(k, 0);
        SubsetTuple x(k);
        for (std::size_t j = 0; j < k; ++j) {
            for (Vertex v = h.part_begin(j); v < h.part_end(j); ++v)
                if ((mask >> v) & 1) {
                    x[j].push_back(v);
                    key[j] |= std::uint64_t{1} << (v - h.part_begin(j));
                }
            prod *= static_cast<double>(x[j].size());
        }
        const double value = static_cast<double>(edges) - p * prod;
        const bool wins = !have || value < best.value - 1e-9 ||
                          (std::abs(value - best.value) <= 1e-9 && key < best_key);
        if (wins) {
            have = true;
            best = {value, x};
            best_key = key;
        }
    }
    return best;
}

} // namespace

TEST_CASE("min_slack_exact examples") {
    auto complete = complete_hypergraph(3, {2, 2, 2});
    auto r = min_slack_exact(complete, 1.0);
    CHECK(r.value == doctest::Approx(0));
    bool some_empty = false;
    for (const auto& s : r.witness)
        some_empty = some_empty || s.empty();
    CHECK(some_empty);
    CHECK(min_slack_exact(complete, 0.7).value == doctest::Approx(0));

    auto edgeless = KPartiteHypergraph(3, {2, 2, 2}, {});
    auto e = min_slack_exact(edgeless, 0.5);
    CHECK(e.value == doctest::Approx(-4.0));
    CHECK(e.witness == SubsetTuple{{0, 1}, {2, 3}, {4, 5}});

    auto single = build_hypergraph(3, {1, 1, 1}, {{0, 1, 2}});
    CHECK(min_slack_exact(single, 0.5).value == doctest::Approx(0));
    CHECK(slack(single, 0.5, {{0}, {1}, {2}}) == doctest::Approx(0.5));
}

TEST_CASE("min_slack_exact agrees with subset enumeration") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const double p = 0.2 + 0.15 * static_cast<double>(seed % 5);
        std::vector<std::size_t> sizes = seed % 2 ? std::vector<std::size_t>{3, 3, 3}
                                                  : std::vector<std::size_t>{2, 3, 2, 2};
        auto h = random_host(static_cast<int>(sizes.size()), sizes, 0.6, seed);
        auto fast = min_slack_exact(h, p);
        auto slow = brute_min_slack(h, p);
        CAPTURE(seed);
        CHECK(fast.value == doctest::Approx(slow.value));
        CHECK(fast.witness == slow.witness);
        CHECK(slack(h, p, fast.witness) == doctest::Approx(fast.value));
        CHECK(fast.value <= 0);
    }
}

TEST_CASE("min_slack_exact refuses large hosts") {
    auto h = complete_hypergraph(3, {9, 9, 9});
    try {
        min_slack_exact(h, 0.5);
        FAIL("expected TooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooLarge);
    }
    CHECK_NOTHROW(min_slack_exact(complete_hypergraph(3, {2, 2, 2}), 0.5, 64));
    CHECK_THROWS(min_slack_exact(complete_hypergraph(3, {2, 2, 2}), 0.5, 63));
}

TEST_CASE("denseness_verdict examples") {
    auto complete = complete_hypergraph(3, {3, 3, 3});
    auto c = denseness_verdict(complete, 0.9, 0.01, DensenessMode::exact());
    CHECK(c.verdict == DensenessVerdict::CertifiedDense);
    CHECK(!c.witness);
    CHECK(c.normalization == doctest::Approx(729));
    REQUIRE(c.per_part_normalization);
    CHECK(*c.per_part_normalization == doctest::Approx(729));

    auto edgeless = KPartiteHypergraph(3, {2, 2, 2}, {});
    auto r = denseness_verdict(edgeless, 0.5, 0.001, DensenessMode::exact());
    CHECK(r.verdict == DensenessVerdict::Refuted);
    REQUIRE(r.witness);
    CHECK(*r.witness == SubsetTuple{{0, 1}, {2, 3}, {4, 5}});
    CHECK(slack(edgeless, 0.5, *r.witness) < -0.001 * 216);

    auto sampled = denseness_verdict(edgeless, 0.5, 0.001, DensenessMode::sampled(50, 3));
    CHECK(sampled.verdict == DensenessVerdict::Refuted);
}

TEST_CASE("iid host at p=0.5 is not refuted by sampling") {
    auto h = gen_iid(3, 60, 0.5, 1);
    auto c = denseness_verdict(h, 0.5, 0.02, DensenessMode::sampled(10000, 1, 4));
    CHECK(c.verdict == DensenessVerdict::NoRefutationFound);
    CHECK(c.trials == 10000);
    REQUIRE(c.best_slack);
    CHECK(*c.best_slack >= -0.02 * c.normalization);
}

TEST_CASE("sampled refutations are genuine and never contradict exact certificates") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto h = random_host(3, {3, 3, 3}, 0.3 + 0.02 * static_cast<double>(seed), seed);
        const double p = 0.5, mu = 0.005;
        auto exact = denseness_verdict(h, p, mu, DensenessMode::exact());
        auto sampled = denseness_verdict(h, p, mu, DensenessMode::sampled(200, seed));
        CAPTURE(seed);
        if (exact.verdict == DensenessVerdict::CertifiedDense)
            CHECK(sampled.verdict != DensenessVerdict::Refuted);
        for (const auto* cert : {&exact, &sampled})
            if (cert->verdict == DensenessVerdict::Refuted) {
                REQUIRE(cert->witness);
                CHECK(slack(h, p, *cert->witness) < -mu * cert->normalization);
            }
        REQUIRE(exact.min_slack);
        REQUIRE(sampled.best_slack);
        CHECK(*sampled.best_slack >= *exact.min_slack - 1e-9);
    }
}

TEST_CASE("certification is monotone in mu") {
    auto h = random_host(3, {3, 3, 2}, 0.5, 11);
    bool certified = false;
    for (double mu : {0.0, 0.001, 0.005, 0.01, 0.02, 0.05, 0.1}) {
        auto c = denseness_verdict(h, 0.6, mu, DensenessMode::exact());
        if (certified)
            CHECK(c.verdict == DensenessVerdict::CertifiedDense);
        certified = c.verdict == DensenessVerdict::CertifiedDense;
    }
    CHECK(certified);
}

TEST_CASE("sampled verdict does not depend on worker count") {
    auto h = random_host(3, {6, 6, 6}, 0.4, 5);
    auto one = denseness_verdict(h, 0.5, 0.001, DensenessMode::sampled(500, 9, 1));
    auto four = denseness_verdict(h, 0.5, 0.001, DensenessMode::sampled(500, 9, 4));
    CHECK(one.verdict == four.verdict);
    CHECK(*one.best_slack == *four.best_slack);
    CHECK(one.witness == four.witness);
    CHECK(one.descent_steps == four.descent_steps);
    CHECK(part_vertices(h, 0).size() == 6);
}
