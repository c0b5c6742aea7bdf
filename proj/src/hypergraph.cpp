#include "hytile/hypergraph.hpp"

#include "hytile/error.hpp"

#include <algorithm>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>

namespace hytile {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::IllegalEdge: return "IllegalEdge";
    case ErrorCode::BadPartSizes: return "BadPartSizes";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::BadArity: return "BadArity";
    case ErrorCode::WrongPart: return "WrongPart";
    case ErrorCode::UnhousedVertex: return "UnhousedVertex";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::BadEll: return "BadEll";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::MetaMismatch: return "MetaMismatch";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::Budget: return "Budget";
    case ErrorCode::SamePart: return "SamePart";
    case ErrorCode::ModeUnsupported: return "ModeUnsupported";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

namespace {

constexpr std::uint64_t dense_bits_limit = std::uint64_t{1} << 28;
constexpr std::uint64_t index_key_limit = std::uint64_t{1} << 28;

std::uint64_t checked_product(std::span<const std::size_t> sizes) {
    std::uint64_t product = 1;
    for (std::size_t s : sizes) {
        if (s != 0 && product > std::numeric_limits<std::uint64_t>::max() / 4 / s)
            throw Error(ErrorCode::TooLarge, "legal set count overflows 64 bits");
        product *= s;
    }
    return product;
}

} // namespace

struct KPartiteHypergraph::Index {
    explicit Index(std::size_t k) : neighbor_flags(k), neighbor_offsets(k), neighbor_lists(k) {}

    std::vector<std::once_flag> neighbor_flags;
    std::vector<std::vector<std::size_t>> neighbor_offsets;
    std::vector<std::vector<Vertex>> neighbor_lists;

    std::once_flag incidence_flag;
    std::vector<std::size_t> incidence_offsets;
    std::vector<std::uint32_t> incidence;
};

KPartiteHypergraph::KPartiteHypergraph()
    : k_(2), part_sizes_{0, 0}, offsets_{0, 0, 0}, index_(std::make_shared<Index>(2)) {}

KPartiteHypergraph::KPartiteHypergraph(int k, std::vector<std::size_t> part_sizes,
                                       std::vector<VertexSet> edges) {
    std::vector<Vertex> flat;
    flat.reserve(edges.size() * static_cast<std::size_t>(std::max(k, 0)));
    for (auto& e : edges) {
        if (static_cast<int>(e.size()) != k)
            throw Error(ErrorCode::IllegalEdge, "edge of size " + std::to_string(e.size()) +
                                                    " in a " + std::to_string(k) + "-graph");
        flat.insert(flat.end(), e.begin(), e.end());
    }
    *this = from_flat(k, std::move(part_sizes), std::move(flat));
}

KPartiteHypergraph KPartiteHypergraph::from_flat(int k, std::vector<std::size_t> part_sizes,
                                                 std::vector<Vertex> flat_edges) {
    if (k < 2)
        throw Error(ErrorCode::BadArity, "k must be at least 2");
    if (part_sizes.size() != static_cast<std::size_t>(k))
        throw Error(ErrorCode::BadPartSizes, "expected " + std::to_string(k) + " part sizes");
    if (flat_edges.size() % static_cast<std::size_t>(k) != 0)
        throw Error(ErrorCode::IllegalEdge, "flat edge array length not a multiple of k");

    KPartiteHypergraph h;
    h.k_ = k;
    h.part_sizes_ = std::move(part_sizes);
    h.offsets_.assign(1, 0);
    for (std::size_t s : h.part_sizes_) {
        if (h.offsets_.back() + s > std::numeric_limits<Vertex>::max())
            throw Error(ErrorCode::TooLarge, "too many vertices");
        h.offsets_.push_back(static_cast<Vertex>(h.offsets_.back() + s));
    }
    h.legal_count_ = checked_product(h.part_sizes_);

    const std::size_t ku = static_cast<std::size_t>(k);
    const std::size_t m = flat_edges.size() / ku;
    h.codes_.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::span<Vertex> e(flat_edges.data() + i * ku, ku);
        for (Vertex v : e)
            if (v >= h.vertex_count())
                throw Error(ErrorCode::OutOfRange, "vertex id " + std::to_string(v) + " >= " +
                                                       std::to_string(h.vertex_count()));
        std::sort(e.begin(), e.end());
        for (std::size_t j = 0; j < ku; ++j)
            if (h.part_of(e[j]) != j)
                throw Error(ErrorCode::IllegalEdge, "edge does not meet every part exactly once");
        h.codes_.push_back(h.encode_sorted(e));
    }
    std::sort(h.codes_.begin(), h.codes_.end());
    h.codes_.erase(std::unique(h.codes_.begin(), h.codes_.end()), h.codes_.end());
    h.finalize();
    return h;
}

void KPartiteHypergraph::finalize() {
    const std::size_t ku = static_cast<std::size_t>(k_);
    flat_.assign(codes_.size() * ku, 0);
    for (std::size_t i = 0; i < codes_.size(); ++i) {
        std::uint64_t code = codes_[i];
        for (std::size_t j = ku; j-- > 0;) {
            flat_[i * ku + j] = offsets_[j] + static_cast<Vertex>(code % part_sizes_[j]);
            code /= part_sizes_[j];
        }
    }
    bits_.clear();
    if (legal_count_ <= dense_bits_limit) {
        bits_.assign((legal_count_ + 63) / 64, 0);
        for (std::uint64_t c : codes_)
            bits_[c >> 6] |= std::uint64_t{1} << (c & 63);
    }
    index_ = std::make_shared<Index>(ku);
}

std::size_t KPartiteHypergraph::part_of(Vertex v) const {
    check_vertex(v);
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), v);
    return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

void KPartiteHypergraph::check_vertex(Vertex v) const {
    if (v >= vertex_count())
        throw Error(ErrorCode::OutOfRange, "vertex id " + std::to_string(v));
}

bool KPartiteHypergraph::is_balanced() const {
    return std::adjacent_find(part_sizes_.begin(), part_sizes_.end(), std::not_equal_to<>()) ==
           part_sizes_.end();
}

std::uint64_t KPartiteHypergraph::encode_sorted(std::span<const Vertex> set) const {
    std::uint64_t code = 0;
    for (std::size_t j = 0; j < set.size(); ++j)
        code = code * part_sizes_[j] + (set[j] - offsets_[j]);
    return code;
}

std::vector<VertexSet> KPartiteHypergraph::edges() const {
    std::vector<VertexSet> out;
    out.reserve(edge_count());
    for (std::size_t i = 0; i < edge_count(); ++i) {
        auto e = edge(i);
        out.emplace_back(e.begin(), e.end());
    }
    return out;
}

bool KPartiteHypergraph::has_edge(std::span<const Vertex> set) const {
    if (set.size() != static_cast<std::size_t>(k_))
        return false;
    for (std::size_t j = 0; j < set.size(); ++j)
        if (set[j] < offsets_[j] || set[j] >= offsets_[j + 1])
            return false;
    const std::uint64_t code = encode_sorted(set);
    if (!bits_.empty() || legal_count_ == 0)
        return legal_count_ != 0 && ((bits_[code >> 6] >> (code & 63)) & 1) != 0;
    return std::binary_search(codes_.begin(), codes_.end(), code);
}

const std::vector<std::size_t>& KPartiteHypergraph::neighbor_offsets(std::size_t part) const {
    Index& idx = *index_;
    std::call_once(idx.neighbor_flags[part], [&] {
        const std::size_t ku = static_cast<std::size_t>(k_);
        std::uint64_t keys = 1;
        for (std::size_t j = 0; j < ku; ++j)
            if (j != part)
                keys *= part_sizes_[j];
        if (keys > index_key_limit)
            throw Error(ErrorCode::TooLarge, "codegree index would need " + std::to_string(keys) +
                                                 " slots");
        auto key_of = [&](std::size_t edge_index) {
            std::uint64_t key = 0;
            for (std::size_t j = 0; j < ku; ++j)
                if (j != part)
                    key = key * part_sizes_[j] + (flat_[edge_index * ku + j] - offsets_[j]);
            return key;
        };
        auto& offs = idx.neighbor_offsets[part];
        offs.assign(keys + 1, 0);
        for (std::size_t i = 0; i < edge_count(); ++i)
            ++offs[key_of(i) + 1];
        std::partial_sum(offs.begin(), offs.end(), offs.begin());
        auto& lists = idx.neighbor_lists[part];
        lists.assign(edge_count(), 0);
        std::vector<std::size_t> cursor(offs.begin(), offs.end() - 1);
        for (std::size_t i = 0; i < edge_count(); ++i)
            lists[cursor[key_of(i)]++] = flat_[i * ku + part];
    });
    return idx.neighbor_offsets[part];
}

std::span<const Vertex> KPartiteHypergraph::neighbors(std::span<const Vertex> others,
                                                      std::size_t part) const {
    const std::size_t ku = static_cast<std::size_t>(k_);
    if (part >= ku || others.size() + 1 != ku)
        throw Error(ErrorCode::BadArity, "neighbors() needs k-1 vertices and a part index");
    std::uint64_t key = 0;
    std::size_t pos = 0;
    for (std::size_t j = 0; j < ku; ++j) {
        if (j == part)
            continue;
        const Vertex v = others[pos++];
        if (v < offsets_[j] || v >= offsets_[j + 1])
            throw Error(ErrorCode::WrongPart, "neighbors(): vertex " + std::to_string(v) +
                                                  " not in part " + std::to_string(j));
        key = key * part_sizes_[j] + (v - offsets_[j]);
    }
    if (part_sizes_[part] == 0)
        return {};
    const auto& offs = neighbor_offsets(part);
    const auto& lists = index_->neighbor_lists[part];
    return {lists.data() + offs[key], offs[key + 1] - offs[key]};
}

std::span<const std::uint32_t> KPartiteHypergraph::incident_edges(Vertex v) const {
    check_vertex(v);
    Index& idx = *index_;
    std::call_once(idx.incidence_flag, [&] {
        if (edge_count() > std::numeric_limits<std::uint32_t>::max())
            throw Error(ErrorCode::TooLarge, "too many edges for the incidence index");
        idx.incidence_offsets.assign(vertex_count() + 1, 0);
        for (Vertex u : flat_)
            ++idx.incidence_offsets[u + 1];
        std::partial_sum(idx.incidence_offsets.begin(), idx.incidence_offsets.end(),
                         idx.incidence_offsets.begin());
        idx.incidence.assign(flat_.size(), 0);
        std::vector<std::size_t> cursor(idx.incidence_offsets.begin(),
                                        idx.incidence_offsets.end() - 1);
        const std::size_t ku = static_cast<std::size_t>(k_);
        for (std::size_t i = 0; i < flat_.size(); ++i)
            idx.incidence[cursor[flat_[i]]++] = static_cast<std::uint32_t>(i / ku);
    });
    const auto& offs = idx.incidence_offsets;
    return {idx.incidence.data() + offs[v], offs[v + 1] - offs[v]};
}

std::uint64_t KPartiteHypergraph::degree(std::span<const Vertex> set) const {
    const std::size_t s = set.size();
    if (s < 1 || s >= static_cast<std::size_t>(k_))
        throw Error(ErrorCode::BadArity, "degree() takes a legal s-set with 1 <= s <= k-1");
    std::vector<std::size_t> parts;
    for (std::size_t i = 0; i < s; ++i) {
        parts.push_back(part_of(set[i]));
        if (i > 0 && parts[i] <= parts[i - 1])
            throw Error(ErrorCode::IllegalEdge, "degree() set is not a sorted legal set");
    }
    if (s + 1 == static_cast<std::size_t>(k_)) {
        std::size_t missing = 0;
        while (missing < s && parts[missing] == missing)
            ++missing;
        return neighbors(set, missing).size();
    }
    std::uint64_t count = 0;
    const std::size_t ku = static_cast<std::size_t>(k_);
    for (std::uint32_t ei : incident_edges(set[0])) {
        bool all = true;
        for (std::size_t i = 1; i < s && all; ++i)
            all = flat_[ei * ku + parts[i]] == set[i];
        count += all ? 1 : 0;
    }
    return count;
}

std::uint64_t KPartiteHypergraph::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t x) {
        for (int b = 0; b < 8; ++b) {
            h ^= (x >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(k_));
    for (std::size_t s : part_sizes_)
        mix(s);
    for (std::uint64_t c : codes_)
        mix(c);
    return h;
}

bool operator==(const KPartiteHypergraph& a, const KPartiteHypergraph& b) {
    return a.k_ == b.k_ && a.part_sizes_ == b.part_sizes_ && a.codes_ == b.codes_;
}

KPartiteHypergraph build_hypergraph(int k, std::vector<std::size_t> part_sizes,
                                    std::vector<VertexSet> edges) {
    for (std::size_t s : part_sizes)
        if (s == 0)
            throw Error(ErrorCode::BadPartSizes, "part sizes must be positive");
    return KPartiteHypergraph(k, std::move(part_sizes), std::move(edges));
}

KPartiteHypergraph complete_hypergraph(int k, std::vector<std::size_t> part_sizes) {
    const std::uint64_t total = checked_product(part_sizes);
    if (total > (std::uint64_t{1} << 31))
        throw Error(ErrorCode::TooLarge, "complete host too large");
    std::vector<Vertex> flat;
    flat.reserve(total * static_cast<std::size_t>(k));
    std::vector<Vertex> offsets{0};
    for (std::size_t s : part_sizes)
        offsets.push_back(offsets.back() + static_cast<Vertex>(s));
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        std::vector<Vertex> e(static_cast<std::size_t>(k));
        for (std::size_t j = e.size(); j-- > 0;) {
            e[j] = offsets[j] + static_cast<Vertex>(c % part_sizes[j]);
            c /= part_sizes[j];
        }
        flat.insert(flat.end(), e.begin(), e.end());
    }
    return KPartiteHypergraph::from_flat(k, std::move(part_sizes), std::move(flat));
}

namespace {

// Calls fn(parts) for every size-s subset of [0, k), ascending lexicographic.
template <class Fn>
void for_each_part_subset(std::size_t k, std::size_t s, Fn&& fn) {
    std::vector<std::size_t> idx(s);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        fn(std::span<const std::size_t>(idx));
        std::size_t i = s;
        while (i > 0 && idx[i - 1] == k - s + i - 1)
            --i;
        if (i == 0)
            return;
        ++idx[i - 1];
        for (std::size_t j = i; j < s; ++j)
            idx[j] = idx[j - 1] + 1;
    }
}

} // namespace

DegreeRange partite_degree_range(const KPartiteHypergraph& h, int s) {
    if (s < 1 || s > h.k() - 1)
        throw Error(ErrorCode::BadArity, "s must satisfy 1 <= s <= k-1");
    const std::size_t ku = static_cast<std::size_t>(h.k());
    DegreeRange range{std::numeric_limits<std::uint64_t>::max(), 0};
    bool any = false;
    for_each_part_subset(ku, static_cast<std::size_t>(s), [&](std::span<const std::size_t> parts) {
        std::uint64_t keys = 1;
        for (std::size_t j : parts)
            keys *= h.part_size(j);
        if (keys == 0)
            return;
        if (keys > index_key_limit)
            throw Error(ErrorCode::TooLarge, "too many legal s-sets to scan");
        std::vector<std::uint32_t> counts(keys, 0);
        for (std::size_t i = 0; i < h.edge_count(); ++i) {
            auto e = h.edge(i);
            std::uint64_t key = 0;
            for (std::size_t j : parts)
                key = key * h.part_size(j) + (e[j] - h.part_begin(j));
            ++counts[key];
        }
        auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        range.min = std::min<std::uint64_t>(range.min, *lo);
        range.max = std::max<std::uint64_t>(range.max, *hi);
        any = true;
    });
    if (!any)
        return {};
    return range;
}

std::uint64_t partite_min_degree(const KPartiteHypergraph& h, int s) {
    return partite_degree_range(h, s).min;
}

std::uint64_t edge_count_between(const KPartiteHypergraph& h,
                                 std::span<const VertexSet> subsets) {
    const std::size_t ku = static_cast<std::size_t>(h.k());
    if (subsets.size() != ku)
        throw Error(ErrorCode::BadArity, "need one subset per part");
    for (std::size_t j = 0; j < ku; ++j)
        for (Vertex v : subsets[j])
            if (v < h.part_begin(j) || v >= h.part_end(j))
                throw Error(ErrorCode::WrongPart, "vertex " + std::to_string(v) +
                                                      " is not in part " + std::to_string(j));
    std::size_t pivot = 0;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t j = 0; j < ku; ++j) {
        if (subsets[j].empty())
            return 0;
        std::size_t work = 0;
        for (Vertex v : subsets[j])
            work += h.vertex_degree(v);
        if (work < best) {
            best = work;
            pivot = j;
        }
    }
    std::vector<char> member(h.vertex_count(), 0);
    for (const auto& x : subsets)
        for (Vertex v : x)
            member[v] = 1;
    std::uint64_t count = 0;
    auto flat = h.flat_edges();
    for (Vertex v : subsets[pivot]) {
        if (member[v] == 2)
            continue; // duplicate inside the pivot subset
        member[v] = 2;
        for (std::uint32_t ei : h.incident_edges(v)) {
            bool all = true;
            for (std::size_t j = 0; j < ku && all; ++j)
                all = j == pivot || member[flat[ei * ku + j]] != 0;
            count += all ? 1 : 0;
        }
    }
    return count;
}

InducedSubgraph induced(const KPartiteHypergraph& h, const VertexSet& keep_in) {
    VertexSet keep = keep_in;
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    std::vector<std::int64_t> remap(h.vertex_count(), -1);
    const std::size_t ku = static_cast<std::size_t>(h.k());
    std::vector<std::size_t> sizes(ku, 0);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        sizes[h.part_of(keep[i])]++;
        remap[keep[i]] = static_cast<std::int64_t>(i);
    }
    std::vector<Vertex> flat;
    // Scan only edges at the part whose kept vertices touch the fewest edges.
    std::size_t pivot = 0;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t j = 0; j < ku; ++j) {
        std::size_t work = 0;
        for (Vertex v : keep)
            if (v >= h.part_begin(j) && v < h.part_end(j))
                work += h.vertex_degree(v);
        if (work < best) {
            best = work;
            pivot = j;
        }
    }
    auto all = h.flat_edges();
    for (Vertex v : keep) {
        if (v < h.part_begin(pivot) || v >= h.part_end(pivot))
            continue;
        for (std::uint32_t ei : h.incident_edges(v)) {
            bool inside = true;
            for (std::size_t j = 0; j < ku && inside; ++j)
                inside = remap[all[ei * ku + j]] >= 0;
            if (!inside)
                continue;
            for (std::size_t j = 0; j < ku; ++j)
                flat.push_back(static_cast<Vertex>(remap[all[ei * ku + j]]));
        }
    }
    return {KPartiteHypergraph::from_flat(h.k(), std::move(sizes), std::move(flat)),
            std::move(keep)};
}

RefinedPartition::RefinedPartition(const KPartiteHypergraph& h, std::vector<Block> blocks,
                                   std::vector<VertexSet> exceptional_per_part)
    : blocks_(std::move(blocks)), exceptional_(std::move(exceptional_per_part)),
      block_of_(h.vertex_count(), -1) {
    const std::size_t ku = static_cast<std::size_t>(h.k());
    if (exceptional_.empty())
        exceptional_.assign(ku, {});
    if (exceptional_.size() != ku)
        throw Error(ErrorCode::BadPartSizes, "exceptional blocks must be given per part");
    std::vector<char> seen(h.vertex_count(), 0);
    auto claim = [&](Vertex v, std::size_t part) {
        if (v >= h.vertex_count())
            throw Error(ErrorCode::OutOfRange, "partition vertex " + std::to_string(v));
        if (h.part_of(v) != part)
            throw Error(ErrorCode::WrongPart, "block vertex " + std::to_string(v) +
                                                  " outside its host part");
        if (seen[v])
            throw Error(ErrorCode::BadParams, "blocks overlap at vertex " + std::to_string(v));
        seen[v] = 1;
    };
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        auto& blk = blocks_[b];
        if (blk.part >= ku)
            throw Error(ErrorCode::WrongPart, "block part index out of range");
        std::sort(blk.vertices.begin(), blk.vertices.end());
        for (Vertex v : blk.vertices) {
            claim(v, blk.part);
            block_of_[v] = static_cast<std::int32_t>(b);
        }
    }
    for (std::size_t j = 0; j < ku; ++j) {
        std::sort(exceptional_[j].begin(), exceptional_[j].end());
        for (Vertex v : exceptional_[j])
            claim(v, j);
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw Error(ErrorCode::BadParams, "partition does not cover every vertex");
}

RefinedPartition RefinedPartition::trivial(const KPartiteHypergraph& h) {
    std::vector<Block> blocks;
    for (std::size_t j = 0; j < static_cast<std::size_t>(h.k()); ++j) {
        Block b{j, {}};
        for (Vertex v = h.part_begin(j); v < h.part_end(j); ++v)
            b.vertices.push_back(v);
        blocks.push_back(std::move(b));
    }
    return RefinedPartition(h, std::move(blocks));
}

std::optional<std::size_t> RefinedPartition::block_of(Vertex v) const {
    if (v >= block_of_.size())
        throw Error(ErrorCode::OutOfRange, "vertex " + std::to_string(v));
    if (block_of_[v] < 0)
        return std::nullopt;
    return static_cast<std::size_t>(block_of_[v]);
}

std::vector<std::size_t> RefinedPartition::blocks_of_part(std::size_t part) const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < blocks_.size(); ++b)
        if (blocks_[b].part == part)
            out.push_back(b);
    return out;
}

IndexVector index_vector(const VertexSet& s, const RefinedPartition& p) {
    IndexVector out(p.block_count(), 0);
    for (Vertex v : s) {
        auto b = p.block_of(v);
        if (!b)
            throw Error(ErrorCode::UnhousedVertex,
                        "vertex " + std::to_string(v) + " lies in an exceptional block");
        ++out[*b];
    }
    return out;
}

} // namespace hytile
