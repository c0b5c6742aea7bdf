#pragma once

#include "hytile/hypergraph.hpp"
#include "hytile/lattice.hpp"
#include "hytile/tiling.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hytile {

struct AbsorptionParams {
    double beta = 1e-6;        // reachability threshold, against N^{i km - 1}
    int i = 1;                 // reachability iteration
    double delta = 0.01;       // reachable-neighbourhood fraction, against N
    double eta = 0.1;
    double lambda = 1e-6;      // robust-vector threshold, against N^f
    double gamma = 0.1;
    double gamma_prime = 0.2;
    std::optional<std::size_t> a; // absorber size; default i0' km (km - 1)
    int i0_prime = 1;
    double beta0_prime = 0.1;
    double zeta = 0.05;
    double alpha = 0.1;
    double epsilon = 0.05;
    double family_multiplier = 1.0;
    /// Balanced km-sets tried per family member when testing that it absorbs something.
    std::uint64_t absorb_trials = 32;
    std::uint64_t reach_trials = 2000;
    std::uint64_t node_budget = 10'000'000;

    /// (η/2)(β'_0/2)^{km-1}.
    double eta1(std::size_t km) const;
    std::size_t absorber_size(std::size_t km) const;
};

/// Copy-extension family C_F(v): the (f-1)-sets W with W ∪ {v} spanning a
/// copy of F, for every vertex, from one enumeration of all copies.
class ExtensionIndex {
public:
    ExtensionIndex(const KPartiteHypergraph& h, const PatternGraph& f,
                   std::uint64_t max_copies = std::uint64_t{1} << 22);

    /// |C_F(u) ∩ C_F(v)| over sets avoiding u and v.
    std::uint64_t common(Vertex u, Vertex v) const;
    std::uint64_t size(Vertex v) const { return sets_[v].size() / words_; }
    std::uint64_t copies() const { return copies_; }

private:
    std::size_t words_;
    std::uint64_t copies_ = 0;
    std::vector<std::vector<std::uint64_t>> sets_; // per vertex, sorted bitmask rows
};

/// Number of (km-1)-sets W avoiding u, v with both W ∪ {u} and W ∪ {v}
/// spanning F-factors. Throws SamePart when u, v are in different parts
/// or equal.
std::uint64_t common_extension_count(const KPartiteHypergraph& h, const PatternGraph& f,
                                     Vertex u, Vertex v);

enum class Reachability { Yes, No, Inconclusive };
const char* to_string(Reachability r);

struct ReachabilityMode {
    enum class Kind { Exact, Sampled } kind = Kind::Exact;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

struct ReachabilityReport {
    Reachability verdict = Reachability::No;
    double threshold = 0;               // β N^{i km - 1}
    std::optional<std::uint64_t> count; // exact mode
    // Sampled mode: fraction of sampled candidate sets that are reachable
    // sets, its Wilson 95% interval, and the fraction the threshold needs.
    double estimate = 0;
    double ci_low = 0;
    double ci_high = 0;
    double needed = 0;
    std::uint64_t trials = 0;
};

/// Exact mode needs params.i == 1 (else ModeUnsupported).
ReachabilityReport is_reachable(const KPartiteHypergraph& h, const PatternGraph& f, Vertex u,
                                Vertex v, const AbsorptionParams& params,
                                const ReachabilityMode& mode = {});

/// Same-part (F, β, 1)-reachability for every pair, from one ExtensionIndex.
class ReachabilityGraph {
public:
    ReachabilityGraph(const KPartiteHypergraph& h, const PatternGraph& f, double beta);

    bool reachable(Vertex u, Vertex v) const;
    /// Ñ(v): vertices reachable to v, ascending, v excluded.
    const VertexSet& neighbourhood(Vertex v) const { return adj_[v]; }
    double threshold() const { return threshold_; }

private:
    std::vector<VertexSet> adj_;
    double threshold_ = 0;
};

struct PruneStep {
    Vertex pivot = 0;
    VertexSet removed; // {pivot} ∪ (Ñ(pivot) ∩ current)
};

struct PartPrune {
    VertexSet kept; // S_i
    std::vector<PruneStep> trace;
};

/// Deletion loop per part: while a vertex of the current set has fewer than
/// δN reachable neighbours inside it, remove it with those neighbours.
/// The lowest such vertex goes first.
std::vector<PartPrune> prune_closed_candidates(const ReachabilityGraph& reach,
                                               const KPartiteHypergraph& h, double delta);
std::vector<PartPrune> prune_closed_candidates(const KPartiteHypergraph& h, const PatternGraph& f,
                                               const AbsorptionParams& params);

struct ClosedPartition {
    std::vector<VertexSet> blocks; // ordered by least vertex
    VertexSet exceptional;         // vertices of components below (δ-β)N
};

/// Connected components of the reachability graph on S.
ClosedPartition partition_closed(const ReachabilityGraph& reach, const VertexSet& s,
                                 std::size_t total_vertices, const AbsorptionParams& params);
ClosedPartition partition_closed(const KPartiteHypergraph& h, const PatternGraph& f,
                                 const VertexSet& s, const AbsorptionParams& params);

struct RobustVector {
    IndexVector vector;
    std::uint64_t copies = 0;
};

/// Index vectors of copies avoiding exceptional vertices, kept when realized
/// by at least λN^f copies. Sorted by vector.
std::vector<RobustVector> robust_vectors(const KPartiteHypergraph& h, const PatternGraph& f,
                                         const RefinedPartition& p, double lambda,
                                         std::uint64_t max_copies = std::uint64_t{1} << 22);

struct TransferralPair {
    std::size_t part = 0;
    std::size_t first = 0; // block indices
    std::size_t second = 0;
    bool member = false;
    std::optional<IndexVector> coefficients;
};

struct TransferralReport {
    bool pass = true;
    std::vector<RobustVector> robust;
    std::vector<TransferralPair> pairs;
};

/// For every part and every pair of its blocks, whether u_first - u_second
/// lies in the lattice of λ-robust vectors.
TransferralReport transferral_check(const KPartiteHypergraph& h, const PatternGraph& f,
                                    const RefinedPartition& p, double lambda);

struct AbsorbingSetsReport {
    bool exhaustive = false;
    std::uint64_t candidates = 0; // balanced a-sets disjoint from S
    std::uint64_t examined = 0;
    std::uint64_t absorbing = 0;  // among examined
    double density = 0;           // estimated |A_a(S)| / N^a
    std::vector<VertexSet> members; // verified absorbing sets, ascending
};

/// Balanced a-sets A disjoint from S with F-factors on H[A] and H[A ∪ S].
/// Enumerates all candidates when there are at most `budget`, otherwise
/// checks `budget` random ones.
AbsorbingSetsReport absorbing_sets(const KPartiteHypergraph& h, const PatternGraph& f,
                                   const VertexSet& s, std::size_t a, std::uint64_t budget,
                                   std::uint64_t seed);

struct FamilyMember {
    VertexSet vertices;
    Tiling factor;                   // of H[A]
    std::uint64_t absorbed_samples = 0; // sampled S that A absorbs
};

enum class FamilyStatus { Ok, FamilyTooSmall };
const char* to_string(FamilyStatus s);

struct AbsorbingFamily {
    FamilyStatus status = FamilyStatus::Ok;
    std::size_t a = 0;
    double probability = 0;
    std::uint64_t candidates = 0;
    std::uint64_t selected = 0;
    std::uint64_t dropped_intersecting = 0;
    std::uint64_t dropped_not_absorbing = 0;
    std::vector<FamilyMember> members;   // F_1
    std::vector<Embedding> cover;        // F_2
    VertexSet uncovered_exceptional;     // V^0 vertices F_2 could not reach
    VertexSet w;
    std::uint64_t selection_seed = 0;
    std::uint64_t absorb_seed = 0;
};

/// Balanced a-sets of H, selected independently with probability
/// multiplier · η₁ N^{1-a} / (8a); intersecting and non-absorbing ones are
/// dropped, then the exceptional vertices are covered greedily by copies of F.
AbsorbingFamily build_absorbing_family(const KPartiteHypergraph& h, const PatternGraph& f,
                                       const AbsorptionParams& params,
                                       const std::vector<VertexSet>& exceptional,
                                       std::uint64_t seed);

/// Number of balanced a-sets of H.
double balanced_set_count(const KPartiteHypergraph& h, std::size_t a);

/// family_multiplier that makes the expected number of selected sets `expected`.
double multiplier_for_expected(const KPartiteHypergraph& h, const PatternGraph& f,
                               const AbsorptionParams& params, double expected);

struct StageLog {
    std::string stage;
    std::string status;
    std::string detail;
    std::optional<std::uint64_t> seed;
};

struct PipelineResult {
    FactorVerdict verdict = FactorVerdict::Unknown;
    std::optional<Tiling> tiling;
    bool used_fallback = false;
    std::string failed_stage;
    std::vector<StageLog> stages;
};

/// Prune, absorbing family, greedy tiling of the rest with ω = γ'/k, then
/// absorption of the leftover. Falls back to the exact solver on H[W ∪ U] and
/// then on H when a stage fails.
PipelineResult perfect_tiling_pipeline(const KPartiteHypergraph& h, const PatternGraph& f,
                                       const AbsorptionParams& params, std::uint64_t seed);

} // namespace hytile
