#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace hytile {

using Vertex = std::uint32_t;
using VertexSet = std::vector<Vertex>; // always sorted ascending

/// A k-partite k-uniform hypergraph with global vertex ids 0..N-1. Part j owns
/// the contiguous id range [part_begin(j), part_end(j)). Edges are legal
/// k-sets stored sorted, so the vertex at position j of an edge lies in part j.
///
/// Instances are immutable. Degree and incidence indexes are built on first
/// use and shared between copies, so a hypergraph can be handed to several
/// threads at once.
class KPartiteHypergraph {
public:
    KPartiteHypergraph();

    /// Validates and canonicalizes. Part sizes may be zero here (induced
    /// subgraphs can empty a part); build_hypergraph() insists on positive sizes.
    KPartiteHypergraph(int k, std::vector<std::size_t> part_sizes,
                       std::vector<VertexSet> edges);

    /// Same contract, edges given as a flat array of k-tuples.
    static KPartiteHypergraph from_flat(int k, std::vector<std::size_t> part_sizes,
                                        std::vector<Vertex> flat_edges);

    int k() const { return k_; }
    std::span<const std::size_t> part_sizes() const { return part_sizes_; }
    std::size_t part_size(std::size_t part) const { return part_sizes_[part]; }
    Vertex part_begin(std::size_t part) const { return offsets_[part]; }
    Vertex part_end(std::size_t part) const { return offsets_[part + 1]; }
    std::size_t vertex_count() const { return offsets_.back(); }
    std::size_t part_of(Vertex v) const;
    bool is_balanced() const;

    std::size_t edge_count() const { return codes_.size(); }
    std::span<const Vertex> edge(std::size_t index) const {
        return {flat_.data() + index * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_)};
    }
    std::span<const Vertex> flat_edges() const { return flat_; }
    std::vector<VertexSet> edges() const;

    /// Membership test for a sorted k-set. Illegal sets are simply not edges.
    bool has_edge(std::span<const Vertex> sorted_set) const;

    /// Vertices w of `part` such that others ∪ {w} is an edge, ascending.
    /// `others` holds one vertex from every part except `part`, sorted.
    std::span<const Vertex> neighbors(std::span<const Vertex> others, std::size_t part) const;

    /// Indices of edges containing v, ascending.
    std::span<const std::uint32_t> incident_edges(Vertex v) const;

    std::size_t vertex_degree(Vertex v) const { return incident_edges(v).size(); }

    /// |N_H(S)| for a legal s-set S (sorted, 1 <= s <= k-1).
    std::uint64_t degree(std::span<const Vertex> legal_set) const;

    /// Number of legal k-sets, i.e. the product of the part sizes.
    std::uint64_t legal_kset_count() const { return legal_count_; }

    /// Order-independent 64-bit digest of (k, part sizes, edge set).
    std::uint64_t fingerprint() const;

    friend bool operator==(const KPartiteHypergraph& a, const KPartiteHypergraph& b);

private:
    struct Index;

    void check_vertex(Vertex v) const;
    std::uint64_t encode_sorted(std::span<const Vertex> set) const;
    void finalize();
    const std::vector<std::size_t>& neighbor_offsets(std::size_t part) const;

    int k_ = 0;
    std::vector<std::size_t> part_sizes_;
    std::vector<Vertex> offsets_;
    std::uint64_t legal_count_ = 0;
    std::vector<std::uint64_t> codes_; // ascending == lexicographic edge order
    std::vector<Vertex> flat_;
    std::vector<std::uint64_t> bits_; // dense membership when legal_count_ is small
    std::shared_ptr<Index> index_;
};

/// Checks positivity of part sizes, then constructs.
KPartiteHypergraph build_hypergraph(int k, std::vector<std::size_t> part_sizes,
                                    std::vector<VertexSet> edges);

KPartiteHypergraph complete_hypergraph(int k, std::vector<std::size_t> part_sizes);

/// δ'_s(H): minimum over legal s-sets of the number of legal (k-s)-sets
/// completing them to an edge.
std::uint64_t partite_min_degree(const KPartiteHypergraph& h, int s);

struct DegreeRange {
    std::uint64_t min = 0;
    std::uint64_t max = 0;
};
DegreeRange partite_degree_range(const KPartiteHypergraph& h, int s);

/// Number of tuples in X_1 x ... x X_k that are edges. X_j must lie in part j.
std::uint64_t edge_count_between(const KPartiteHypergraph& h,
                                 std::span<const VertexSet> parts_subsets);

struct InducedSubgraph {
    KPartiteHypergraph graph;
    std::vector<Vertex> to_host; // new id -> host id, ascending
};

InducedSubgraph induced(const KPartiteHypergraph& h, const VertexSet& keep);

/// A refinement of the host k-partition into labelled blocks. Each part may
/// also carry an exceptional block that index vectors do not see.
class RefinedPartition {
public:
    struct Block {
        std::size_t part = 0;
        VertexSet vertices;
    };

    RefinedPartition(const KPartiteHypergraph& h, std::vector<Block> blocks,
                     std::vector<VertexSet> exceptional_per_part = {});

    /// One block per host part.
    static RefinedPartition trivial(const KPartiteHypergraph& h);

    std::size_t block_count() const { return blocks_.size(); }
    const Block& block(std::size_t i) const { return blocks_[i]; }
    std::span<const Block> blocks() const { return blocks_; }
    const VertexSet& exceptional(std::size_t part) const { return exceptional_[part]; }

    /// Block index of v, or nullopt for exceptional vertices.
    std::optional<std::size_t> block_of(Vertex v) const;

    /// Blocks belonging to one host part, in block order.
    std::vector<std::size_t> blocks_of_part(std::size_t part) const;

private:
    std::vector<Block> blocks_;
    std::vector<VertexSet> exceptional_;
    std::vector<std::int32_t> block_of_; // -1 for exceptional
};

using IndexVector = std::vector<std::int64_t>;

/// i_P(S): per-block intersection sizes of S.
IndexVector index_vector(const VertexSet& s, const RefinedPartition& p);

} // namespace hytile
