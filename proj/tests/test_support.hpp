#pragma once

#include "hytile/hypergraph.hpp"
#include "hytile/rng.hpp"

#include <vector>

namespace hytile::testing {

// Independent of the generators module: a plain Bernoulli host for property tests.
inline KPartiteHypergraph random_host(int k, std::vector<std::size_t> sizes, double p,
                                      std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vertex> offsets{0};
    for (std::size_t s : sizes)
        offsets.push_back(offsets.back() + static_cast<Vertex>(s));
    std::vector<VertexSet> edges;
    std::vector<std::size_t> idx(sizes.size(), 0);
    bool any = true;
    for (std::size_t s : sizes)
        any = any && s > 0;
    while (any) {
        if (rng.bernoulli(p)) {
            VertexSet e;
            for (std::size_t j = 0; j < sizes.size(); ++j)
                e.push_back(offsets[j] + static_cast<Vertex>(idx[j]));
            edges.push_back(e);
        }
        std::size_t j = sizes.size();
        while (j > 0 && ++idx[j - 1] == sizes[j - 1]) {
            idx[j - 1] = 0;
            --j;
        }
        if (j == 0)
            break;
    }
    return KPartiteHypergraph(k, sizes, edges);
}

inline VertexSet part_vertices(const KPartiteHypergraph& h, std::size_t part) {
    VertexSet out;
    for (Vertex v = h.part_begin(part); v < h.part_end(part); ++v)
        out.push_back(v);
    return out;
}

inline VertexSet all_vertices(const KPartiteHypergraph& h) {
    VertexSet out;
    for (Vertex v = 0; v < h.vertex_count(); ++v)
        out.push_back(v);
    return out;
}

} // namespace hytile::testing
