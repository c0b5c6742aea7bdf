#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hytile/error.hpp"
#include "hytile/hypergraph.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <numeric>

using namespace hytile;
using hytile::testing::random_host;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an hytile::Error");
    return ErrorCode::Parse;
}

// Brute force: number of legal (k-s)-sets completing S, by scanning every legal k-set.
std::uint64_t brute_degree(const KPartiteHypergraph& h, const VertexSet& s) {
    std::uint64_t count = 0;
    auto all = complete_hypergraph(h.k(), {h.part_sizes().begin(), h.part_sizes().end()});
    for (std::size_t i = 0; i < all.edge_count(); ++i) {
        auto e = all.edge(i);
        if (std::includes(e.begin(), e.end(), s.begin(), s.end()) && h.has_edge(e))
            ++count;
    }
    return count;
}

} // namespace

TEST_CASE("build_hypergraph canonicalizes and validates") {
    auto one = build_hypergraph(3, {1, 1, 1}, {{0, 1, 2}});
    CHECK(one.edge_count() == 1);
    CHECK(one.vertex_count() == 3);

    auto complete = complete_hypergraph(3, {2, 2, 2});
    CHECK(complete.edge_count() == 8);

    auto shuffled = build_hypergraph(3, {2, 2, 2}, {{5, 3, 0}, {0, 2, 4}, {0, 3, 5}});
    CHECK(shuffled.edge_count() == 2);
    auto e0 = shuffled.edge(0);
    CHECK(VertexSet(e0.begin(), e0.end()) == VertexSet{0, 2, 4});

    CHECK(code_of([] { build_hypergraph(3, {1, 1, 1}, {{0, 0, 2}}); }) == ErrorCode::IllegalEdge);
    CHECK(code_of([] { build_hypergraph(3, {1, 0, 1}, {}); }) == ErrorCode::BadPartSizes);
    CHECK(code_of([] { build_hypergraph(3, {1, 1, 1}, {{0, 1, 3}}); }) == ErrorCode::OutOfRange);
    CHECK(code_of([] { build_hypergraph(3, {2, 2, 2}, {{0, 1, 4}}); }) == ErrorCode::IllegalEdge);
    CHECK(code_of([] { build_hypergraph(1, {2}, {}); }) == ErrorCode::BadArity);
}

TEST_CASE("partite_min_degree examples") {
    auto complete = complete_hypergraph(3, {2, 2, 2});
    CHECK(partite_min_degree(complete, 2) == 2);
    CHECK(partite_min_degree(complete, 1) == 4);
    auto single = build_hypergraph(3, {2, 2, 2}, {{0, 2, 4}});
    CHECK(partite_min_degree(single, 2) == 0);
    CHECK(code_of([&] { partite_min_degree(single, 3); }) == ErrorCode::BadArity);
    CHECK(code_of([&] { partite_min_degree(single, 0); }) == ErrorCode::BadArity);
}

TEST_CASE("degree agrees with brute force on small random hosts") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto h = random_host(3, {2, 3, 2}, 0.5, seed);
        std::uint64_t min2 = ~std::uint64_t{0}, min1 = ~std::uint64_t{0};
        for (Vertex a = 0; a < h.vertex_count(); ++a) {
            min1 = std::min(min1, brute_degree(h, {a}));
            CHECK(h.degree(VertexSet{a}) == brute_degree(h, {a}));
            for (Vertex b = a + 1; b < h.vertex_count(); ++b) {
                if (h.part_of(a) == h.part_of(b))
                    continue;
                VertexSet s{a, b};
                CHECK(h.degree(s) == brute_degree(h, s));
                min2 = std::min(min2, brute_degree(h, s));
            }
        }
        CHECK(partite_min_degree(h, 2) == min2);
        CHECK(partite_min_degree(h, 1) == min1);
    }
}

TEST_CASE("adding an edge never lowers the partite minimum degree") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto h = random_host(3, {3, 3, 3}, 0.4, seed);
        auto edges = h.edges();
        auto all = complete_hypergraph(3, {3, 3, 3});
        for (std::size_t i = 0; i < all.edge_count(); ++i) {
            auto e = all.edge(i);
            if (h.has_edge(e))
                continue;
            auto more = edges;
            more.emplace_back(e.begin(), e.end());
            KPartiteHypergraph bigger(3, {3, 3, 3}, more);
            for (int s = 1; s <= 2; ++s)
                CHECK(partite_min_degree(bigger, s) >= partite_min_degree(h, s));
            break;
        }
    }
}

TEST_CASE("edge_count_between") {
    auto complete = complete_hypergraph(3, {2, 2, 2});
    std::vector<VertexSet> full{{0, 1}, {2, 3}, {4, 5}};
    CHECK(edge_count_between(complete, full) == 8);
    std::vector<VertexSet> with_empty{{0, 1}, {}, {4, 5}};
    CHECK(edge_count_between(complete, with_empty) == 0);
    auto single = build_hypergraph(3, {2, 2, 2}, {{1, 3, 5}});
    std::vector<VertexSet> singletons{{1}, {3}, {5}};
    CHECK(edge_count_between(single, singletons) == 1);
    std::vector<VertexSet> foreign{{0, 2}, {3}, {5}};
    CHECK(code_of([&] { edge_count_between(single, foreign); }) == ErrorCode::WrongPart);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto h = random_host(3, {4, 3, 5}, 0.3, seed);
        std::vector<VertexSet> parts;
        for (std::size_t j = 0; j < 3; ++j)
            parts.push_back(hytile::testing::part_vertices(h, j));
        CHECK(edge_count_between(h, parts) == h.edge_count());
    }
}

TEST_CASE("induced subgraphs") {
    auto complete = complete_hypergraph(3, {2, 2, 2});
    auto same = induced(complete, hytile::testing::all_vertices(complete));
    CHECK(same.graph == complete);

    auto one = induced(complete, {1, 2, 5});
    CHECK(one.graph.edge_count() == 1);
    CHECK(one.graph.vertex_count() == 3);
    CHECK(one.to_host == VertexSet{1, 2, 5});

    auto single = build_hypergraph(3, {1, 1, 1}, {{0, 1, 2}});
    auto broken = induced(single, {0, 2});
    CHECK(broken.graph.edge_count() == 0);

    // induced(induced(H, A), B') == induced(H, A ∩ B)
    hytile::Rng rng(99);
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        auto h = random_host(3, {4, 4, 4}, 0.5, seed);
        VertexSet a, b;
        for (Vertex v = 0; v < h.vertex_count(); ++v) {
            if (rng.bernoulli(0.7))
                a.push_back(v);
            if (rng.bernoulli(0.7))
                b.push_back(v);
        }
        auto first = induced(h, a);
        VertexSet b_local;
        for (std::size_t i = 0; i < first.to_host.size(); ++i)
            if (std::binary_search(b.begin(), b.end(), first.to_host[i]))
                b_local.push_back(static_cast<Vertex>(i));
        auto twice = induced(first.graph, b_local);
        VertexSet both;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
        auto once = induced(h, both);
        CHECK(twice.graph == once.graph);
    }
}

TEST_CASE("index vectors") {
    auto h = complete_hypergraph(3, {2, 1, 1});
    RefinedPartition p(h, {{0, {0, 1}}, {1, {2}}, {2, {3}}});
    CHECK(index_vector({0, 2}, p) == IndexVector{1, 1, 0});
    CHECK(index_vector({}, p) == IndexVector{0, 0, 0});
    CHECK(index_vector({0, 1, 2}, p) == IndexVector{2, 1, 0});

    RefinedPartition with_exceptional(h, {{0, {0}}, {1, {2}}, {2, {3}}}, {{1}, {}, {}});
    CHECK(code_of([&] { index_vector({1}, with_exceptional); }) == ErrorCode::UnhousedVertex);
    CHECK(code_of([&] { RefinedPartition(h, {{0, {0}}, {1, {2}}, {2, {3}}}); }) == ErrorCode::BadParams);
    CHECK(code_of([&] { RefinedPartition(h, {{0, {0, 1, 2}}, {2, {3}}}); }) == ErrorCode::WrongPart);

    // coordinate sum equals |S|
    auto big = complete_hypergraph(3, {6, 6, 6});
    std::vector<RefinedPartition::Block> blocks;
    for (std::size_t j = 0; j < 3; ++j) {
        blocks.push_back({j, {big.part_begin(j), big.part_begin(j) + 1, big.part_begin(j) + 2}});
        blocks.push_back({j, {big.part_begin(j) + 3, big.part_begin(j) + 4, big.part_begin(j) + 5}});
    }
    RefinedPartition fine(big, blocks);
    hytile::Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        VertexSet s;
        for (Vertex v = 0; v < big.vertex_count(); ++v)
            if (rng.bernoulli(0.5))
                s.push_back(v);
        auto iv = index_vector(s, fine);
        CHECK(std::accumulate(iv.begin(), iv.end(), std::int64_t{0}) == static_cast<std::int64_t>(s.size()));
    }
}

TEST_CASE("neighbors and has_edge on large sparse codes") {
    auto h = build_hypergraph(3, {3, 3, 3}, {{0, 3, 6}, {0, 3, 8}, {1, 4, 7}});
    auto n = h.neighbors(VertexSet{0, 3}, 2);
    CHECK(VertexSet(n.begin(), n.end()) == VertexSet{6, 8});
    auto n1 = h.neighbors(VertexSet{3, 6}, 0);
    CHECK(VertexSet(n1.begin(), n1.end()) == VertexSet{0});
    CHECK(h.has_edge(VertexSet{1, 4, 7}));
    CHECK_FALSE(h.has_edge(VertexSet{1, 4, 8}));
    CHECK_FALSE(h.has_edge(VertexSet{1, 2, 8}));
    CHECK(h.incident_edges(0).size() == 2);
    CHECK(h.fingerprint() == build_hypergraph(3, {3, 3, 3}, {{1, 4, 7}, {0, 3, 8}, {0, 3, 6}}).fingerprint());
}
