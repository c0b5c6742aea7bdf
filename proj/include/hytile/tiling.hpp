#pragma once

#include "hytile/hypergraph.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hytile {

/// The tile F: a k-partite k-graph, usually K_k(m).
class PatternGraph {
public:
    PatternGraph() = default;
    explicit PatternGraph(KPartiteHypergraph graph);

    const KPartiteHypergraph& graph() const { return graph_; }
    int k() const { return graph_.k(); }
    std::size_t f() const { return graph_.vertex_count(); }
    std::size_t part_size(std::size_t part) const { return graph_.part_size(part); }

    /// Part-preserving automorphisms, by brute force; nullopt when f > 12.
    std::optional<std::uint64_t> automorphism_count() const { return automorphisms_; }

private:
    KPartiteHypergraph graph_;
    std::optional<std::uint64_t> automorphisms_;
};

/// K_k(m): all m^k legal k-sets on k parts of size m.
PatternGraph pattern_complete(int k, std::size_t m);

/// image[x] is the host vertex that pattern vertex x maps to.
struct Embedding {
    std::vector<Vertex> image;

    VertexSet vertex_set() const;
    friend bool operator==(const Embedding&, const Embedding&) = default;
};

bool is_valid_embedding(const KPartiteHypergraph& h, const PatternGraph& f, const Embedding& e);

struct Tiling {
    std::vector<Embedding> embeddings;

    VertexSet covered() const;
};

/// Checks disjointness and validity of every embedding; with `perfect`, also
/// that the tiling covers V(H). On failure `why` receives a reason.
bool validate_tiling(const KPartiteHypergraph& h, const PatternGraph& f, const Tiling& t,
                     bool perfect, std::string* why = nullptr);

struct EnumerationOptions {
    /// (pattern vertex, host vertex): only embeddings with image[first] == second.
    std::optional<std::pair<Vertex, Vertex>> anchor;
    /// Stop after this many embeddings.
    std::optional<std::uint64_t> limit;
    /// When non-empty, allowed[v] != 0 marks the host vertices an image may use.
    std::vector<char> allowed;
    /// Backtracking node cap; 0 means unlimited.
    std::uint64_t node_budget = 0;
};

struct EnumerationResult {
    std::uint64_t labelled = 0;
    /// labelled / |Aut(F)|; nullopt when Aut(F) was not computed.
    std::optional<std::uint64_t> unlabelled;
    bool truncated = false;   // stopped by `limit` or by the visitor
    bool out_of_budget = false;
    std::uint64_t nodes = 0;
};

/// Visitor returns false to stop. Embeddings arrive in lexicographic order of
/// the image tuple listed in the search order of pattern vertices (see
/// search_order()).
using EmbeddingVisitor = std::function<bool(const Embedding&)>;

EnumerationResult enumerate_embeddings(const KPartiteHypergraph& h, const PatternGraph& f,
                                       const EnumerationOptions& options = {},
                                       const EmbeddingVisitor& visit = {});

/// Pattern vertex order used by the backtracking search.
std::vector<Vertex> search_order(const PatternGraph& f, std::optional<Vertex> first = {});

/// Unlabelled copies of F whose image contains v.
std::uint64_t copies_containing(const KPartiteHypergraph& h, const PatternGraph& f, Vertex v);

/// All distinct copy vertex sets (sorted lexicographically), each with the
/// first embedding that realized it. Throws Budget when more than `max_copies`.
struct CopyList {
    std::vector<VertexSet> sets;
    std::vector<Embedding> witnesses;
};
CopyList distinct_copies(const KPartiteHypergraph& h, const PatternGraph& f,
                         const EnumerationOptions& options = {},
                         std::uint64_t max_copies = std::uint64_t{1} << 22);

enum class FactorVerdict { Found, None, Unknown };
const char* to_string(FactorVerdict v);

struct FactorOptions {
    std::uint64_t node_budget = 10'000'000;
    std::uint64_t max_copies = std::uint64_t{1} << 22;
    /// Branch on the uncovered vertex with fewest live copies instead of the
    /// lowest id. Verdicts are identical; witnesses may differ.
    bool fail_first = false;
};

struct FactorResult {
    FactorVerdict verdict = FactorVerdict::Unknown;
    std::optional<Tiling> tiling;
    std::uint64_t nodes = 0;
    std::uint64_t copies = 0;
    std::string note;
};

/// Exact cover over the distinct copies of F.
FactorResult exact_factor(const KPartiteHypergraph& h, const PatternGraph& f,
                          const FactorOptions& options = {});

/// Whether every part of H is a multiple of the matching part of F with a
/// common quotient, which any F-factor needs.
bool factor_divisibility(const KPartiteHypergraph& h, const PatternGraph& f);

enum class StopReason { CoveredAll, OmegaReached, NoCopyInRemainder, BudgetExhausted };
const char* to_string(StopReason r);

struct TilingReport {
    Tiling tiling;
    std::vector<std::size_t> leftover_per_part;
    VertexSet leftover_vertices;
    StopReason stopped_reason = StopReason::CoveredAll;
};

/// Repeatedly removes the first copy found in the remainder until each part
/// has at most omega * (part size) vertices left or no copy remains.
TilingReport greedy_tiling(const KPartiteHypergraph& h, const PatternGraph& f, double omega,
                           std::uint64_t node_budget_per_search = 0);

/// Greedy tiling confined to `within`; stops once part j has at most
/// max_left[j] uncovered vertices of `within`.
TilingReport greedy_tiling_within(const KPartiteHypergraph& h, const PatternGraph& f,
                                  const VertexSet& within,
                                  const std::vector<std::size_t>& max_left,
                                  std::uint64_t node_budget_per_search = 0);

struct SupersaturationReport {
    std::uint64_t edges = 0;
    double edge_threshold = 0; // p' N^k
    bool edge_bound_holds = false;
    std::uint64_t labelled_copies = 0;
    std::optional<std::uint64_t> unlabelled_copies;
    double eta = 0; // labelled copies / N^f
    bool flagged = false; // dense enough but copy-free
};

SupersaturationReport supersaturation_report(const KPartiteHypergraph& h, const PatternGraph& f,
                                             double p_prime);

} // namespace hytile
