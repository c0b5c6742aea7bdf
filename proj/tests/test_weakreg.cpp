#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hytile/error.hpp"
#include "hytile/generators.hpp"
#include "hytile/rng.hpp"
#include "hytile/weakreg.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

using namespace hytile;
using hytile::testing::part_vertices;
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

SetTuple whole(const KPartiteHypergraph& h) {
    SetTuple t;
    for (std::size_t j = 0; j < static_cast<std::size_t>(h.k()); ++j)
        t.push_back(part_vertices(h, j));
    return t;
}

// Parts of size 6, complete on the first three vertices of each part.
KPartiteHypergraph half_complete() {
    std::vector<VertexSet> edges;
    for (Vertex a = 0; a < 3; ++a)
        for (Vertex b = 6; b < 9; ++b)
            for (Vertex c = 12; c < 15; ++c)
                edges.push_back({a, b, c});
    return KPartiteHypergraph(3, {6, 6, 6}, edges);
}

SetTuple random_subtuple(const SetTuple& v, double eps, Rng& rng) {
    SetTuple out;
    for (const auto& s : v) {
        const auto need = static_cast<std::size_t>(std::max(1.0, std::ceil(eps * static_cast<double>(s.size()) - 1e-9)));
        VertexSet a;
        while (a.size() < need) {
            a.clear();
            for (Vertex x : s)
                if (rng.bernoulli(0.5))
                    a.push_back(x);
        }
        out.push_back(a);
    }
    return out;
}

} // namespace

TEST_CASE("tuple_density examples") {
    auto complete = gen_complete(3, 3);
    CHECK(tuple_density(complete, whole(complete)) == Rational{1, 1});
    CHECK(tuple_density(complete, {{0}, {3, 4}, {8}}) == Rational{1, 1});
    KPartiteHypergraph edgeless(3, {3, 3, 3}, {});
    CHECK(tuple_density(edgeless, whole(edgeless)) == Rational{0, 1});
    KPartiteHypergraph single(3, {1, 1, 1}, {{0, 1, 2}});
    CHECK(tuple_density(single, whole(single)) == Rational{1, 1});
    CHECK(tuple_density(half_complete(), whole(half_complete())) == Rational{1, 8});
    CHECK(code_of([&] { tuple_density(complete, {{0}, {}, {6}}); }) == ErrorCode::EmptySet);
}

TEST_CASE("regularity_test examples") {
    auto complete = gen_complete(3, 4);
    for (double eps : {0.05, 0.3, 0.9}) {
        auto r = regularity_test(complete, whole(complete), eps, RegularityMode::exact());
        CHECK(r.verdict == RegularityVerdict::Certified);
        CHECK(r.density == Rational{1, 1});
    }
    KPartiteHypergraph edgeless(3, {4, 4, 4}, {});
    auto r0 = regularity_test(edgeless, whole(edgeless), 0.2, RegularityMode::exact());
    CHECK(r0.verdict == RegularityVerdict::Certified);
    CHECK(r0.density == Rational{0, 1});

    auto h = half_complete();
    for (auto mode : {RegularityMode::exact(), RegularityMode::sampled(64, 3)}) {
        auto r = regularity_test(h, whole(h), 0.3, mode);
        REQUIRE(r.verdict == RegularityVerdict::Refuted);
        REQUIRE(r.witness);
        const auto& w = *r.witness;
        CHECK(std::abs(tuple_density(h, w).value() - 0.125) > 0.3);
        CHECK(tuple_density(h, w).value() == doctest::Approx(r.witness_density));
    }
    auto exact = regularity_test(h, whole(h), 0.3, RegularityMode::exact());
    CHECK(*exact.witness == SetTuple{{0, 1}, {6, 7}, {12, 13}});
    CHECK(exact.witness_density == 1.0);

    auto big = gen_complete(3, 9);
    CHECK(code_of([&] { regularity_test(big, whole(big), 0.2, RegularityMode::exact()); }) ==
          ErrorCode::TooLarge);
    CHECK(code_of([&] { regularity_test(big, whole(big), 0.0, RegularityMode::exact()); }) ==
          ErrorCode::BadParams);
}

TEST_CASE("exact regularity verdicts re-check on random sub-tuples") {
    Rng rng(5);
    int certified = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto h = random_host(3, {5, 5, 5}, 0.5, seed);
        const double eps = 0.6;
        auto v = whole(h);
        auto r = regularity_test(h, v, eps, RegularityMode::exact());
        const double d = r.density.value();
        if (r.verdict == RegularityVerdict::Certified) {
            ++certified;
            CHECK(r.worst_deviation <= eps);
            for (int i = 0; i < 100; ++i)
                CHECK(std::abs(tuple_density(h, random_subtuple(v, eps, rng)).value() - d) <= eps + 1e-12);
        } else {
            REQUIRE(r.witness);
            CHECK(std::abs(tuple_density(h, *r.witness).value() - d) > eps);
        }
        auto s = regularity_test(h, v, eps, RegularityMode::sampled(32, seed));
        if (s.verdict == RegularityVerdict::Refuted)
            CHECK(r.verdict == RegularityVerdict::Refuted);
    }
    CHECK(certified > 0);
}

TEST_CASE("weak_regular_partition on trivial hosts") {
    for (auto h : {gen_complete(3, 12), KPartiteHypergraph(3, {12, 12, 12}, {})}) {
        auto p = weak_regular_partition(h, 0.2, 2, 7);
        CHECK(p.t == 2);
        CHECK(p.m0 == 6);
        CHECK(p.rounds == 1);
        CHECK(p.refuted_fraction == 0);
        CHECK(p.exceptional.empty());
        CHECK(p.stop_reason == "regular");
        CHECK(validate_partition(h, p));
    }
    CHECK(code_of([] { weak_regular_partition(gen_complete(3, 4), 0.2, 5, 1); }) == ErrorCode::BadParams);
}

TEST_CASE("weak_regular_partition on an iid host") {
    auto h = gen_iid(3, 90, 0.5, 11);
    auto start = std::chrono::steady_clock::now();
    auto p = weak_regular_partition(h, 0.25, 3, 11);
    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    MESSAGE("rounds ", p.rounds, " t ", p.t, " m0 ", p.m0, " V0 ", p.exceptional.size(), " refuted ",
            p.refuted_fraction, " stop ", p.stop_reason, " seconds ", secs);
    std::string why;
    CHECK(validate_partition(h, p, &why));
    CHECK(p.exceptional.size() <= static_cast<std::size_t>(0.25 * 270));
    CHECK(p.refuted_fraction <= 0.25);
    CHECK(p.energy_monotone);
    for (std::size_t i = 1; i < p.energy_history.size(); ++i)
        CHECK(p.energy_history[i] >= p.energy_history[i - 1] - 1e-12);

    WeakRegOptions four;
    four.workers = 4;
    auto q = weak_regular_partition(h, 0.25, 3, 11, four);
    CHECK(q.clusters == p.clusters);
    CHECK(q.exceptional == p.exceptional);
    CHECK(q.energy_history == p.energy_history);
    CHECK(q.refuted_tuples == p.refuted_tuples);
}

TEST_CASE("energy never decreases on a host with planted structure") {
    auto h = half_complete();
    auto p = weak_regular_partition(h, 0.3, 1, 2);
    CHECK(p.energy_monotone);
    CHECK(validate_partition(h, p));
    CHECK(p.energy_history.front() == doctest::Approx(1.0 / 64));
    CHECK(p.energy_history.size() > 1);
    CHECK(p.energy_history.back() > p.energy_history.front());
    for (std::size_t i = 1; i < p.energy_history.size(); ++i)
        CHECK(p.energy_history[i] >= p.energy_history[i - 1] - 1e-12);
}

TEST_CASE("cluster_hypergraph examples") {
    auto complete = gen_complete(3, 8);
    auto p = weak_regular_partition(complete, 0.2, 2, 1);
    auto r = cluster_hypergraph(complete, p, 0.2, 0.5);
    CHECK(r.graph.edge_count() == 8);
    CHECK(r.provenance.size() == 8);

    KPartiteHypergraph edgeless(3, {8, 8, 8}, {});
    auto pe = weak_regular_partition(edgeless, 0.2, 2, 1);
    CHECK(cluster_hypergraph(edgeless, pe, 0.2, 0.5).graph.edge_count() == 0);

    auto h = gen_iid(3, 90, 0.5, 11);
    auto pi = weak_regular_partition(h, 0.25, 3, 11);
    auto ri = cluster_hypergraph(h, pi, 0.25, 0.25, RegularityMode::sampled(64, 4));
    const double cells = std::pow(static_cast<double>(pi.t), 3);
    CHECK(static_cast<double>(ri.graph.edge_count()) >= 0.75 * cells);
    for (const auto& rec : ri.provenance) {
        if (!rec.edge)
            continue;
        SetTuple tuple;
        for (std::size_t j = 0; j < 3; ++j)
            tuple.push_back(pi.clusters[j][rec.clusters[j]]);
        CHECK(tuple_density(h, tuple) == rec.density);
        CHECK(rec.density.value() >= 0.25);
    }
    auto again = cluster_hypergraph(h, pi, 0.25, 0.25, RegularityMode::sampled(64, 4), 4);
    CHECK(again.graph == ri.graph);
}

TEST_CASE("codegree_inheritance examples") {
    auto complete = gen_complete(3, 3);
    for (double eps : {0.05, 0.2, 0.9}) {
        auto rep = codegree_inheritance(complete, eps, 0.0);
        CHECK(rep.violations == 0);
        CHECK(rep.pass);
        CHECK(rep.sets == 27);
        CHECK(rep.histogram.at(3) == 27);
    }
    KPartiteHypergraph edgeless(3, {3, 3, 3}, {});
    auto rep = codegree_inheritance(edgeless, 0.2, 0.5);
    CHECK(rep.violations == rep.sets);
    CHECK(rep.violations_by_missing_part == std::vector<std::uint64_t>{9, 9, 9});
    CHECK_FALSE(rep.pass);
}

TEST_CASE("cluster_matching examples") {
    auto complete = gen_complete(3, 3);
    auto m = cluster_matching(complete, 1);
    CHECK(m.edges.size() == 3);
    CHECK(m.leftover_per_part == std::vector<std::size_t>{0, 0, 0});
    CHECK(m.optimal);
    CHECK(m.bound_met == true);
    CHECK(m.delta_prime == 1);

    KPartiteHypergraph edgeless(3, {3, 3, 3}, {});
    auto e = cluster_matching(edgeless);
    CHECK(e.edges.empty());
    CHECK(e.leftover_per_part == std::vector<std::size_t>{3, 3, 3});
    CHECK(e.low_degree_sets == 27);

    std::vector<VertexSet> edges;
    for (std::size_t i = 0; i < complete.edge_count(); ++i) {
        auto ed = complete.edge(i);
        if (ed[0] != 0)
            edges.emplace_back(ed.begin(), ed.end());
    }
    KPartiteHypergraph minus(3, {3, 3, 3}, edges);
    auto mm = cluster_matching(minus);
    CHECK(mm.edges.size() == 2);
    for (std::size_t left : mm.leftover_per_part)
        CHECK(left <= 1);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto r = random_host(3, {4, 4, 4}, 0.4, seed);
        auto rm = cluster_matching(r);
        std::vector<char> used(r.vertex_count(), 0);
        for (const auto& ed : rm.edges) {
            CHECK(r.has_edge(ed));
            for (Vertex v : ed) {
                CHECK_FALSE(used[v]);
                used[v] = 1;
            }
        }
        // Cross-check the size against exact factor search on sub-matchings.
        std::size_t brute = 0;
        for (std::size_t i = 0; i < r.edge_count(); ++i) {
            std::size_t best = 0;
            std::vector<char> u(r.vertex_count(), 0);
            for (std::size_t j = i; j < r.edge_count(); ++j) {
                auto ed = r.edge(j);
                if (u[ed[0]] || u[ed[1]] || u[ed[2]])
                    continue;
                u[ed[0]] = u[ed[1]] = u[ed[2]] = 1;
                ++best;
            }
            brute = std::max(brute, best);
        }
        CHECK(rm.edges.size() >= brute);
    }
}

TEST_CASE("cluster_matching delta prime") {
    CHECK(cluster_matching(gen_complete(3, 6)).delta_prime == 2);
    CHECK(cluster_matching(gen_complete(3, 5)).delta_prime == 2);
    CHECK(cluster_matching(gen_complete(3, 4)).delta_prime == 1);
}

TEST_CASE("tile_regular_tuple examples") {
    auto f = pattern_complete(3, 1);
    auto complete = gen_complete(3, 4);
    auto c = tile_regular_tuple(complete, whole(complete), f, 0.0);
    CHECK(c.leftover_per_part == std::vector<std::size_t>{0, 0, 0});
    CHECK(c.tiling.embeddings.size() == 4);

    KPartiteHypergraph edgeless(3, {4, 4, 4}, {});
    auto e = tile_regular_tuple(edgeless, whole(edgeless), f, 0.0);
    CHECK(e.leftover_per_part == std::vector<std::size_t>{4, 4, 4});
    CHECK(e.stopped_reason == StopReason::NoCopyInRemainder);

    auto h = gen_iid(3, 20, 0.75, 2);
    auto r = tile_regular_tuple(h, whole(h), pattern_complete(3, 2), 0.2);
    for (std::size_t left : r.leftover_per_part)
        CHECK(left <= 4);
    CHECK(validate_tiling(h, pattern_complete(3, 2), r.tiling, false));

    CHECK(code_of([&] { tile_regular_tuple(complete, {{0, 1}, {4}, {8, 9}}, f, 0.1); }) == ErrorCode::BadParams);
}
