#pragma once

#include "hytile/hypergraph.hpp"
#include "hytile/tiling.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hytile {

struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// One vertex set per part, X_j inside part j.
using SetTuple = std::vector<VertexSet>;

/// e_H(A_1..A_k) / |A_1|...|A_k|, reduced. Throws EmptySet.
Rational tuple_density(const KPartiteHypergraph& h, const SetTuple& a);

enum class RegularityVerdict { Certified, Refuted, NoRefutationFound };
const char* to_string(RegularityVerdict v);

struct RegularityMode {
    enum class Kind { Exact, Sampled } kind = Kind::Sampled;
    std::uint64_t trials = 64;
    std::uint64_t seed = 0;
    std::uint64_t cap = std::uint64_t{1} << 24;

    static RegularityMode exact() {
        RegularityMode m;
        m.kind = Kind::Exact;
        return m;
    }
    static RegularityMode sampled(std::uint64_t trials, std::uint64_t seed) {
        RegularityMode m;
        m.trials = trials;
        m.seed = seed;
        return m;
    }
};

struct RegularityResult {
    RegularityVerdict verdict = RegularityVerdict::NoRefutationFound;
    Rational density;              // d of the whole tuple
    std::optional<SetTuple> witness;
    double witness_density = 0;
    double worst_deviation = 0;    // largest |d_A - d| seen
};

/// (ε, d)-regularity of (V_1..V_k) with d its own density: every sub-tuple
/// with |A_j| >= ε|V_j| has |d(A) - d| <= ε.
RegularityResult regularity_test(const KPartiteHypergraph& h, const SetTuple& v, double eps,
                                 const RegularityMode& mode);

struct RegPartition {
    int k = 0;
    std::vector<std::vector<VertexSet>> clusters; // [part][cluster], t per part
    VertexSet exceptional;
    double epsilon = 0;
    std::size_t t = 0;
    std::size_t m0 = 0;
    double energy = 0;
    std::vector<double> energy_history; // one entry per partition considered
    bool energy_monotone = true;
    std::size_t rounds = 0;
    double refuted_fraction = 0;
    std::uint64_t refuted_tuples = 0;
    std::string stop_reason; // regular, energy-gain, degenerate, round-cap
    bool round_cap_hit = false;
    bool exceptional_within_bound = true; // |V_0| <= ε N
};

struct WeakRegOptions {
    std::size_t round_cap = 12;
    std::uint64_t trials = 64;
    unsigned workers = 1;
    /// Refuting witnesses used to split each cluster, most deviating first; 0 uses all.
    std::size_t witnesses_per_cluster = 1;
};

/// Iterated witness refinement from t0 clusters per part, then trimmed to the
/// same number of clusters in every part.
RegPartition weak_regular_partition(const KPartiteHypergraph& h, double eps, std::size_t t0,
                                    std::uint64_t seed, const WeakRegOptions& options = {});

/// Structural validity: clusters equal-sized, disjoint, in the right part,
/// and together with V_0 covering V(H).
bool validate_partition(const KPartiteHypergraph& h, const RegPartition& p, std::string* why = nullptr);

struct TupleRecord {
    std::vector<std::size_t> clusters; // one cluster index per part
    Rational density;
    RegularityVerdict verdict = RegularityVerdict::NoRefutationFound;
    bool edge = false;
};

/// Vertex c of part j of `graph` is cluster c of part j.
struct ClusterHypergraph {
    KPartiteHypergraph graph;
    double d = 0;
    double epsilon = 0;
    /// Every cluster tuple, in lexicographic order of cluster indices.
    std::vector<TupleRecord> provenance;
};

/// A cluster tuple is an edge when regularity is not refuted and its density
/// is at least d.
ClusterHypergraph cluster_hypergraph(const KPartiteHypergraph& h, const RegPartition& p, double eps,
                                     double d, const RegularityMode& mode = {}, unsigned workers = 1);

struct CodegreeReport {
    std::size_t t = 0;
    double threshold = 0;            // (1/2 + ε/4) t
    std::uint64_t sets = 0;          // legal (k-1)-sets, k t^{k-1}
    std::uint64_t violations = 0;
    std::vector<std::uint64_t> violations_by_missing_part;
    std::map<std::uint64_t, std::uint64_t> histogram; // degree -> number of sets
    bool pass = true;                // violations <= ξ t^{k-1}
};

CodegreeReport codegree_inheritance(const KPartiteHypergraph& r, double eps, double xi);

struct ClusterMatching {
    std::vector<VertexSet> edges;
    std::vector<std::size_t> leftover_per_part;
    bool optimal = true; // false when the node budget ran out
    std::uint64_t nodes = 0;
    std::optional<bool> bound_met; // leftover <= (k-1) t0 - 1, when t0 given
    std::uint64_t delta_prime = 0;
    std::uint64_t low_degree_sets = 0; // legal (k-1)-sets with degree below δ'
};

/// Maximum matching of R by branch and bound.
ClusterMatching cluster_matching(const KPartiteHypergraph& r, std::optional<std::size_t> t0 = {},
                                 std::uint64_t node_budget = 10'000'000);

/// Greedy tiling inside the tuple until at most ε* m0 vertices remain in every
/// cluster or no copy is left. Clusters must have equal size.
TilingReport tile_regular_tuple(const KPartiteHypergraph& h, const SetTuple& w, const PatternGraph& f,
                                double eps_star);

} // namespace hytile
