#pragma once

#include "hytile/hypergraph.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hytile {

enum class ConstructionKind { A, B };

/// What a construction drew, so its no-factor mechanism can be re-checked
/// without trusting the edge set.
struct ConstructionMeta {
    ConstructionKind which = ConstructionKind::A;
    int k = 3;
    std::size_t n = 0;
    std::size_t m = 2;
    std::uint64_t seed = 0;

    // Construction A: part k split into V_{k,1} (first ids) and V_{k,2}.
    VertexSet split_first;
    VertexSet split_second;

    // Construction B: the added vertex v of part 1, degree parameter ℓ and the
    // red probability q.
    Vertex special_vertex = 0;
    int ell = 1;
    double q = 0.5;

    /// One bit per colored set, set = red. A colors the legal (k-1)-sets of
    /// K_{k-1}(n); B colors the legal (ℓ+1)-sets of G.
    std::vector<std::uint64_t> red_bits;
    std::uint64_t colored_sets = 0;

    bool red(std::uint64_t set_id) const { return (red_bits[set_id >> 6] >> (set_id & 63)) & 1; }
};

struct Construction {
    KPartiteHypergraph host;
    ConstructionMeta meta;
};

struct GeneratorOptions {
    /// Refuse colorings larger than this many bits.
    std::uint64_t max_coloring_bits = std::uint64_t{1} << 30;
    unsigned workers = 1;
};

/// Every legal k-set is an edge independently with probability p.
KPartiteHypergraph gen_iid(int k, std::size_t n, double p, std::uint64_t seed,
                           const GeneratorOptions& options = {});

KPartiteHypergraph gen_complete(int k, std::size_t n);

/// |V_{k,1}|: floor(n/2), or one less when m divides floor(n/2).
std::size_t construction_a_split(std::size_t n, std::size_t m);

/// Random red/blue coloring of K_{k-1}(n); v in V_{k,1} joins red (k-1)-sets,
/// v in V_{k,2} joins blue ones.
Construction gen_construction_a(int k, std::size_t n, std::size_t m, std::uint64_t seed,
                                const GeneratorOptions& options = {});

/// Red/blue coloring of the complete k-partite (ℓ+1)-graph G on parts of
/// sizes (n-1, n, ..., n) plus an extra vertex v in part 1. A legal k-set
/// avoiding v is an edge when G on it is entirely red; one containing v is an
/// edge when G on the rest has a blue edge.
Construction gen_construction_b(int k, std::size_t n, std::size_t m, int ell, double q,
                                std::uint64_t seed, const GeneratorOptions& options = {});

/// Display-only density and degree constants of Construction B:
/// p = q^C(k,ℓ+1) and α = min(q^C(k,ℓ+1), 1 - q^C(k-1,ℓ+1)) / 2.
double construction_b_density(int k, int ell, double q);
double construction_b_alpha(int k, int ell, double q);

struct InvariantReport {
    bool pass = true;
    std::uint64_t checked = 0;
    /// First offending legal (k-1)-set together with the two neighbors that
    /// break the invariant.
    std::optional<VertexSet> counterexample;
    std::string detail;
};

/// A: no legal (k-1)-set of V_1 x ... x V_{k-1} has neighbors on both sides of
/// the split. B: for every legal (k-1)-set T of V_2 x ... x V_k with v in N(T),
/// N(T) ∩ V_1 = {v}. Throws MetaMismatch when meta does not describe h.
InvariantReport verify_construction_invariant(const KPartiteHypergraph& h,
                                              const ConstructionMeta& meta);

} // namespace hytile
