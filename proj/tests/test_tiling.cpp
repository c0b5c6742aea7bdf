#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hytile/error.hpp"
#include "hytile/tiling.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <functional>
#include <set>

using namespace hytile;
using hytile::testing::random_host;

namespace {

KPartiteHypergraph edgeless(std::size_t n) { return KPartiteHypergraph(3, {n, n, n}, {}); }

// Oracle: every partition-respecting injective map, tested edge by edge.
std::set<VertexSet> brute_copy_sets(const KPartiteHypergraph& h, const PatternGraph& f,
                                    std::uint64_t* labelled = nullptr) {
    const auto& g = f.graph();
    std::set<VertexSet> out;
    std::vector<Vertex> image(g.vertex_count());
    std::uint64_t count = 0;
    std::function<void(Vertex)> rec = [&](Vertex x) {
        if (x == g.vertex_count()) {
            for (std::size_t i = 0; i < g.edge_count(); ++i) {
                VertexSet e;
                for (Vertex y : g.edge(i))
                    e.push_back(image[y]);
                std::sort(e.begin(), e.end());
                if (!h.has_edge(e))
                    return;
            }
            ++count;
            VertexSet s = image;
            std::sort(s.begin(), s.end());
            out.insert(s);
            return;
        }
        const std::size_t part = g.part_of(x);
        for (Vertex v = h.part_begin(part); v < h.part_end(part); ++v) {
            if (std::find(image.begin(), image.begin() + x, v) != image.begin() + x)
                continue;
            image[x] = v;
            rec(x + 1);
        }
    };
    rec(0);
    if (labelled)
        *labelled = count;
    return out;
}

// Oracle: does some choice of N/f pairwise disjoint copies cover V(H)?
bool brute_has_factor(const KPartiteHypergraph& h, const PatternGraph& f) {
    if (!factor_divisibility(h, f))
        return false;
    auto sets = brute_copy_sets(h, f);
    std::vector<VertexSet> copies(sets.begin(), sets.end());
    const std::size_t need = h.vertex_count() / f.f();
    std::vector<std::size_t> pick;
    std::function<bool(std::size_t)> rec = [&](std::size_t from) {
        if (pick.size() == need) {
            std::vector<char> seen(h.vertex_count(), 0);
            for (std::size_t c : pick)
                for (Vertex v : copies[c]) {
                    if (seen[v])
                        return false;
                    seen[v] = 1;
                }
            return true;
        }
        for (std::size_t c = from; c < copies.size(); ++c) {
            pick.push_back(c);
            if (rec(c + 1))
                return true;
            pick.pop_back();
        }
        return false;
    };
    return rec(0);
}

PatternGraph asymmetric_pattern() {
    // parts {0,1}, {2,3}, {4}; no nontrivial part-preserving automorphism
    return PatternGraph(KPartiteHypergraph(3, {2, 2, 1}, {{0, 2, 4}, {0, 3, 4}, {1, 2, 4}}));
}

} // namespace

TEST_CASE("pattern_complete") {
    CHECK(pattern_complete(3, 1).graph().edge_count() == 1);
    CHECK(pattern_complete(3, 2).graph().edge_count() == 8);
    CHECK(pattern_complete(4, 2).graph().edge_count() == 16);
    CHECK(pattern_complete(3, 2).automorphism_count() == 8);
    CHECK(asymmetric_pattern().automorphism_count() == 1);
}

TEST_CASE("enumerate_embeddings examples") {
    auto h = complete_hypergraph(3, {2, 2, 2});
    auto k31 = enumerate_embeddings(h, pattern_complete(3, 1));
    CHECK(k31.labelled == 8);
    auto k32 = enumerate_embeddings(h, pattern_complete(3, 2));
    CHECK(k32.labelled == 8);
    CHECK(k32.unlabelled == 1);

    EnumerationOptions anchored;
    anchored.anchor = std::make_pair(Vertex{0}, Vertex{1});
    CHECK(enumerate_embeddings(h, pattern_complete(3, 1), anchored).labelled == 4);

    CHECK_THROWS_AS(enumerate_embeddings(h, pattern_complete(4, 1)), Error);
}

TEST_CASE("embedding order is lexicographic in search order and every embedding is valid") {
    auto h = random_host(3, {3, 3, 3}, 0.6, 4);
    auto f = pattern_complete(3, 2);
    auto order = search_order(f);
    std::vector<std::vector<Vertex>> seen;
    enumerate_embeddings(h, f, {}, [&](const Embedding& e) {
        CHECK(is_valid_embedding(h, f, e));
        std::vector<Vertex> key;
        for (Vertex x : order)
            key.push_back(e.image[x]);
        seen.push_back(key);
        return true;
    });
    CHECK(std::is_sorted(seen.begin(), seen.end()));
    std::uint64_t brute = 0;
    brute_copy_sets(h, f, &brute);
    CHECK(seen.size() == brute);
}

TEST_CASE("copies_containing") {
    auto h = complete_hypergraph(3, {2, 2, 2});
    for (Vertex v = 0; v < 6; ++v) {
        CHECK(copies_containing(h, pattern_complete(3, 1), v) == 4);
        CHECK(copies_containing(h, pattern_complete(3, 2), v) == 1);
        CHECK(copies_containing(edgeless(2), pattern_complete(3, 1), v) == 0);
    }
    // With trivial Aut(F), copies containing v summed over v is f times the copy count.
    auto f = asymmetric_pattern();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto g = random_host(3, {3, 3, 2}, 0.7, seed);
        std::uint64_t total = 0;
        for (Vertex v = 0; v < g.vertex_count(); ++v)
            total += copies_containing(g, f, v);
        CHECK(total == f.f() * *enumerate_embeddings(g, f).unlabelled);
    }
}

TEST_CASE("labelled copy count is monotone under edge addition") {
    auto f = pattern_complete(3, 2);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto h = random_host(3, {3, 3, 3}, 0.7, seed);
        auto base = enumerate_embeddings(h, f).labelled;
        auto edges = h.edges();
        auto all = complete_hypergraph(3, {3, 3, 3});
        for (std::size_t i = 0; i < all.edge_count(); ++i) {
            auto e = all.edge(i);
            if (!h.has_edge(e)) {
                edges.emplace_back(e.begin(), e.end());
                break;
            }
        }
        CHECK(enumerate_embeddings(KPartiteHypergraph(3, {3, 3, 3}, edges), f).labelled >= base);
    }
}

TEST_CASE("exact_factor examples") {
    auto h = complete_hypergraph(3, {4, 4, 4});
    auto r = exact_factor(h, pattern_complete(3, 1));
    REQUIRE(r.verdict == FactorVerdict::Found);
    CHECK(r.tiling->embeddings.size() == 4);
    CHECK(validate_tiling(h, pattern_complete(3, 1), *r.tiling, true));

    auto k32 = complete_hypergraph(3, {2, 2, 2});
    auto id = exact_factor(k32, pattern_complete(3, 2));
    REQUIRE(id.verdict == FactorVerdict::Found);
    CHECK(id.tiling->embeddings.size() == 1);
    CHECK(id.tiling->covered() == hytile::testing::all_vertices(k32));

    auto indivisible = exact_factor(complete_hypergraph(3, {3, 3, 3}), pattern_complete(3, 2));
    CHECK(indivisible.verdict == FactorVerdict::None);

    FactorOptions tiny;
    tiny.node_budget = 1;
    auto unknown = exact_factor(complete_hypergraph(3, {6, 6, 6}), pattern_complete(3, 2), tiny);
    CHECK(unknown.verdict == FactorVerdict::Unknown);
}

TEST_CASE("exact_factor matches the brute-force oracle on N <= 9") {
    int agreements = 0, cases = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const double p = 0.3 + 0.15 * static_cast<double>(seed % 5);
        auto h3 = random_host(3, {3, 3, 3}, p, seed);
        auto h2 = random_host(3, {2, 2, 2}, p, seed + 1000);
        for (const auto& [h, f] : {std::pair{h3, pattern_complete(3, 1)},
                                   std::pair{h2, pattern_complete(3, 1)},
                                   std::pair{h2, pattern_complete(3, 2)}}) {
            auto r = exact_factor(h, f);
            REQUIRE(r.verdict != FactorVerdict::Unknown);
            const bool expected = brute_has_factor(h, f);
            ++cases;
            agreements += (r.verdict == FactorVerdict::Found) == expected ? 1 : 0;
            if (r.tiling)
                CHECK(validate_tiling(h, f, *r.tiling, true));
            FactorOptions ff;
            ff.fail_first = true;
            CHECK(exact_factor(h, f, ff).verdict == r.verdict);
        }
    }
    CHECK(agreements == cases);
}

TEST_CASE("a found factor implies divisibility") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto h = random_host(3, {2, 4, 2}, 0.8, seed);
        auto r = exact_factor(h, pattern_complete(3, 2));
        CHECK(r.verdict == FactorVerdict::None);
        CHECK_FALSE(factor_divisibility(h, pattern_complete(3, 2)));
    }
}

TEST_CASE("greedy_tiling") {
    auto h = complete_hypergraph(3, {4, 4, 4});
    auto full = greedy_tiling(h, pattern_complete(3, 1), 0.0);
    CHECK(full.leftover_per_part == std::vector<std::size_t>{0, 0, 0});
    CHECK(full.stopped_reason == StopReason::CoveredAll);
    CHECK(validate_tiling(h, pattern_complete(3, 1), full.tiling, true));

    auto none = greedy_tiling(edgeless(4), pattern_complete(3, 1), 0.1);
    CHECK(none.leftover_per_part == std::vector<std::size_t>{4, 4, 4});
    CHECK(none.stopped_reason == StopReason::NoCopyInRemainder);

    auto partial = greedy_tiling(h, pattern_complete(3, 1), 0.5);
    CHECK(partial.stopped_reason == StopReason::OmegaReached);
    CHECK(partial.leftover_per_part == std::vector<std::size_t>{2, 2, 2});

    auto f = pattern_complete(3, 2);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto g = random_host(3, {8, 8, 8}, 0.45, seed);
        auto r = greedy_tiling(g, f, 0.0);
        CHECK(validate_tiling(g, f, r.tiling, false));
        VertexSet expect = r.tiling.covered();
        CHECK(expect.size() + r.leftover_vertices.size() == g.vertex_count());
        if (r.stopped_reason == StopReason::NoCopyInRemainder)
            CHECK(enumerate_embeddings(induced(g, r.leftover_vertices).graph, f).labelled == 0);
    }
}

TEST_CASE("supersaturation_report") {
    auto h = complete_hypergraph(3, {2, 2, 2});
    auto r = supersaturation_report(h, pattern_complete(3, 1), 0.01);
    CHECK(r.labelled_copies == 8);
    CHECK(r.eta == doctest::Approx(8.0 / 216.0));
    CHECK_FALSE(r.flagged);

    auto e = supersaturation_report(edgeless(2), pattern_complete(3, 1), 0.01);
    CHECK(e.labelled_copies == 0);
    CHECK_FALSE(e.flagged);
    CHECK_FALSE(e.edge_bound_holds);

    auto single = build_hypergraph(3, {1, 1, 1}, {{0, 1, 2}});
    auto s = supersaturation_report(single, pattern_complete(3, 1), 0.01);
    CHECK(s.labelled_copies == 1);
    CHECK(s.eta == doctest::Approx(1.0 / 27.0));
}
