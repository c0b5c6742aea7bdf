#include "hytile/generators.hpp"

#include "hytile/error.hpp"
#include "hytile/parallel.hpp"
#include "hytile/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hytile {

namespace {

constexpr std::uint64_t chunk_size = std::uint64_t{1} << 16;

std::uint64_t ipow(std::uint64_t base, int exp) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && r > (std::uint64_t{1} << 62) / base)
            throw Error(ErrorCode::TooLarge, "parameterization too large");
        r *= base;
    }
    return r;
}

std::uint64_t binomial(int n, int r) {
    if (r < 0 || r > n)
        return 0;
    std::uint64_t b = 1;
    for (int i = 1; i <= r; ++i)
        b = b * static_cast<std::uint64_t>(n - r + i) / static_cast<std::uint64_t>(i);
    return b;
}

// Scans every legal k-set of an n-balanced host in code order and keeps those
// the predicate accepts. Chunks run in parallel; concatenation keeps order.
template <class Pred>
KPartiteHypergraph scan_legal_ksets(int k, std::size_t n, unsigned workers, Pred&& is_edge) {
    const std::size_t ku = static_cast<std::size_t>(k);
    const std::uint64_t total = ipow(n, k);
    const std::uint64_t chunks = (total + chunk_size - 1) / chunk_size;
    std::vector<std::vector<Vertex>> pieces(chunks);
    parallel_for(chunks, workers, [&](std::size_t c) {
        std::vector<Vertex> e(ku);
        auto& out = pieces[c];
        const std::uint64_t end = std::min<std::uint64_t>(total, (c + 1) * chunk_size);
        for (std::uint64_t code = c * chunk_size; code < end; ++code) {
            std::uint64_t rest = code;
            for (std::size_t j = ku; j-- > 0;) {
                e[j] = static_cast<Vertex>(j * n + rest % n);
                rest /= n;
            }
            if (is_edge(code, e))
                out.insert(out.end(), e.begin(), e.end());
        }
    });
    std::vector<Vertex> flat;
    std::size_t size = 0;
    for (const auto& p : pieces)
        size += p.size();
    flat.reserve(size);
    for (auto& p : pieces)
        flat.insert(flat.end(), p.begin(), p.end());
    return KPartiteHypergraph::from_flat(k, std::vector<std::size_t>(ku, n), std::move(flat));
}

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::BadParams, std::string(name) + " must lie in [0, 1]");
}

// Canonical ids for the legal (ℓ+1)-sets of Construction B's graph G. Part
// subsets are ranked lexicographically; within a subset the local indices
// form a mixed-radix number with the first part most significant. Part 1 of
// G excludes the special vertex, so its local indices run over n-1 values.
class ColoredSetIndex {
public:
    ColoredSetIndex(int k, int width, std::size_t n) : k_(k), width_(width), n_(n) {
        std::vector<int> parts(static_cast<std::size_t>(width));
        std::iota(parts.begin(), parts.end(), 0);
        while (true) {
            std::uint64_t size = 1;
            for (int j : parts)
                size *= part_size(j);
            subsets_.push_back(parts);
            offsets_.push_back(total_);
            total_ += size;
            int i = width;
            while (i > 0 && parts[static_cast<std::size_t>(i - 1)] == k - width + i - 1)
                --i;
            if (i == 0)
                break;
            ++parts[static_cast<std::size_t>(i - 1)];
            for (int j = i; j < width; ++j)
                parts[static_cast<std::size_t>(j)] = parts[static_cast<std::size_t>(j - 1)] + 1;
        }
    }

    std::uint64_t total() const { return total_; }

    std::uint64_t part_size(int part) const { return part == 0 ? n_ - 1 : n_; }

    // Local index of a host vertex in G (part 0 shifted past the special vertex).
    std::uint64_t local(Vertex v, int part) const {
        const std::uint64_t raw = v - static_cast<std::uint64_t>(part) * n_;
        return part == 0 ? raw - 1 : raw;
    }

    /// Id of the sub-(ℓ+1)-set of the legal k-set `e` picked by `subset_rank`.
    std::uint64_t id(std::size_t subset_rank, std::span<const Vertex> e) const {
        std::uint64_t code = 0;
        for (int j : subsets_[subset_rank])
            code = code * part_size(j) + local(e[static_cast<std::size_t>(j)], j);
        return offsets_[subset_rank] + code;
    }

    const std::vector<std::vector<int>>& subsets() const { return subsets_; }

private:
    int k_;
    int width_;
    std::size_t n_;
    std::vector<std::vector<int>> subsets_;
    std::vector<std::uint64_t> offsets_;
    std::uint64_t total_ = 0;
};

} // namespace

KPartiteHypergraph gen_iid(int k, std::size_t n, double p, std::uint64_t seed,
                           const GeneratorOptions& options) {
    if (k < 2)
        throw Error(ErrorCode::BadArity, "k must be at least 2");
    if (n < 1)
        throw Error(ErrorCode::BadPartSizes, "n must be positive");
    check_probability(p, "p");
    return scan_legal_ksets(k, n, options.workers, [&](std::uint64_t code, std::span<const Vertex>) {
        return unit_at(seed, stream::iid_edges, code) < p;
    });
}

KPartiteHypergraph gen_complete(int k, std::size_t n) {
    if (n < 1)
        throw Error(ErrorCode::BadPartSizes, "n must be positive");
    return complete_hypergraph(k, std::vector<std::size_t>(static_cast<std::size_t>(k), n));
}

std::size_t construction_a_split(std::size_t n, std::size_t m) {
    const std::size_t half = n / 2;
    return (m != 0 && half % m == 0) ? (half == 0 ? 0 : half - 1) : half;
}

Construction gen_construction_a(int k, std::size_t n, std::size_t m, std::uint64_t seed,
                                const GeneratorOptions& options) {
    if (k < 3)
        throw Error(ErrorCode::BadArity, "Construction A needs k >= 3");
    if (m < 2 || n < 2)
        throw Error(ErrorCode::BadParams, "Construction A needs m >= 2 and n >= 2");
    const std::size_t first = construction_a_split(n, m);
    if (first == 0)
        throw Error(ErrorCode::DegenerateSplit, "V_{k,1} would be empty");

    ConstructionMeta meta;
    meta.which = ConstructionKind::A;
    meta.k = k;
    meta.n = n;
    meta.m = m;
    meta.seed = seed;
    meta.colored_sets = ipow(n, k - 1);
    if (meta.colored_sets > options.max_coloring_bits)
        throw Error(ErrorCode::TooLarge, "coloring table exceeds the memory budget");
    meta.red_bits.assign((meta.colored_sets + 63) / 64, 0);
    for (std::uint64_t id = 0; id < meta.colored_sets; ++id)
        if (unit_at(seed, stream::cons_a_color, id) < 0.5)
            meta.red_bits[id >> 6] |= std::uint64_t{1} << (id & 63);
    const Vertex last_part = static_cast<Vertex>((k - 1) * n);
    for (std::size_t i = 0; i < n; ++i)
        (i < first ? meta.split_first : meta.split_second).push_back(last_part + static_cast<Vertex>(i));

    // The legal k-set code is (k-1)-set code * n + local index in part k.
    auto host = scan_legal_ksets(k, n, options.workers, [&](std::uint64_t code, std::span<const Vertex>) {
        const std::uint64_t set_id = code / n;
        const bool in_first = code % n < first;
        return meta.red(set_id) == in_first;
    });
    return {std::move(host), std::move(meta)};
}

Construction gen_construction_b(int k, std::size_t n, std::size_t m, int ell, double q,
                                std::uint64_t seed, const GeneratorOptions& options) {
    if (k < 3)
        throw Error(ErrorCode::BadArity, "Construction B needs k >= 3");
    if (ell < 1 || ell > k - 2)
        throw Error(ErrorCode::BadEll, "ell must satisfy 1 <= ell <= k-2");
    if (m < 2 || n < 2)
        throw Error(ErrorCode::BadParams, "Construction B needs m >= 2 and n >= 2");
    check_probability(q, "q");

    ColoredSetIndex index(k, ell + 1, n);
    ConstructionMeta meta;
    meta.which = ConstructionKind::B;
    meta.k = k;
    meta.n = n;
    meta.m = m;
    meta.ell = ell;
    meta.q = q;
    meta.seed = seed;
    meta.special_vertex = 0;
    meta.colored_sets = index.total();
    if (meta.colored_sets > options.max_coloring_bits)
        throw Error(ErrorCode::TooLarge, "coloring table exceeds the memory budget");
    meta.red_bits.assign((meta.colored_sets + 63) / 64, 0);
    for (std::uint64_t id = 0; id < meta.colored_sets; ++id)
        if (unit_at(seed, stream::cons_b_color, id) < q)
            meta.red_bits[id >> 6] |= std::uint64_t{1} << (id & 63);

    // Split the sub-(ℓ+1)-sets into those touching part 1 and the rest.
    std::vector<std::size_t> without_first;
    for (std::size_t r = 0; r < index.subsets().size(); ++r)
        if (index.subsets()[r][0] != 0)
            without_first.push_back(r);
    const std::size_t all_subsets = index.subsets().size();

    auto host = scan_legal_ksets(k, n, options.workers, [&](std::uint64_t, std::span<const Vertex> e) {
        if (e[0] == meta.special_vertex) {
            for (std::size_t r : without_first)
                if (!meta.red(index.id(r, e)))
                    return true;
            return false;
        }
        for (std::size_t r = 0; r < all_subsets; ++r)
            if (!meta.red(index.id(r, e)))
                return false;
        return true;
    });
    return {std::move(host), std::move(meta)};
}

double construction_b_density(int k, int ell, double q) {
    return std::pow(q, static_cast<double>(binomial(k, ell + 1)));
}

double construction_b_alpha(int k, int ell, double q) {
    const double a = std::pow(q, static_cast<double>(binomial(k, ell + 1)));
    const double b = 1.0 - std::pow(q, static_cast<double>(binomial(k - 1, ell + 1)));
    return 0.5 * std::min(a, b);
}

namespace {

// Calls fn(set) for every legal set taking one vertex from each listed part,
// in ascending code order.
template <class Fn>
void for_each_cross_set(const KPartiteHypergraph& h, const std::vector<std::size_t>& parts, Fn&& fn) {
    std::vector<Vertex> set;
    for (std::size_t j : parts) {
        if (h.part_size(j) == 0)
            return;
        set.push_back(h.part_begin(j));
    }
    while (true) {
        if (!fn(std::span<const Vertex>(set)))
            return;
        std::size_t i = parts.size();
        while (i > 0) {
            --i;
            if (++set[i] < h.part_end(parts[i]))
                break;
            set[i] = h.part_begin(parts[i]);
            if (i == 0)
                return;
        }
    }
}

} // namespace

InvariantReport verify_construction_invariant(const KPartiteHypergraph& h,
                                              const ConstructionMeta& meta) {
    const std::size_t ku = static_cast<std::size_t>(h.k());
    if (meta.k != h.k())
        throw Error(ErrorCode::MetaMismatch, "meta k differs from host k");
    for (std::size_t j = 0; j < ku; ++j)
        if (h.part_size(j) != meta.n)
            throw Error(ErrorCode::MetaMismatch, "meta n differs from host part sizes");

    InvariantReport report;
    if (meta.which == ConstructionKind::A) {
        std::vector<char> side(h.vertex_count(), 0);
        if (meta.split_first.size() + meta.split_second.size() != meta.n)
            throw Error(ErrorCode::MetaMismatch, "split does not cover part k");
        for (Vertex v : meta.split_first) {
            if (v >= h.vertex_count() || h.part_of(v) != ku - 1)
                throw Error(ErrorCode::MetaMismatch, "split vertex outside part k");
            side[v] = 1;
        }
        for (Vertex v : meta.split_second) {
            if (v >= h.vertex_count() || h.part_of(v) != ku - 1 || side[v])
                throw Error(ErrorCode::MetaMismatch, "split vertex outside part k or repeated");
            side[v] = 2;
        }
        std::vector<std::size_t> parts(ku - 1);
        std::iota(parts.begin(), parts.end(), 0);
        for_each_cross_set(h, parts, [&](std::span<const Vertex> s) {
            ++report.checked;
            std::optional<Vertex> a, b;
            for (Vertex w : h.neighbors(s, ku - 1)) {
                if (side[w] == 1 && !a)
                    a = w;
                if (side[w] == 2 && !b)
                    b = w;
            }
            if (a && b) {
                report.pass = false;
                VertexSet witness(s.begin(), s.end());
                witness.push_back(*a);
                witness.push_back(*b);
                report.counterexample = witness;
                report.detail = "a legal (k-1)-set has neighbors in both V_{k,1} and V_{k,2}";
                return false;
            }
            return true;
        });
        return report;
    }

    const Vertex v = meta.special_vertex;
    if (v >= h.vertex_count() || h.part_of(v) != 0)
        throw Error(ErrorCode::MetaMismatch, "special vertex must lie in part 1");
    std::vector<std::size_t> parts(ku - 1);
    std::iota(parts.begin(), parts.end(), 1);
    for_each_cross_set(h, parts, [&](std::span<const Vertex> t) {
        ++report.checked;
        auto nbrs = h.neighbors(t, 0);
        const bool has_v = std::binary_search(nbrs.begin(), nbrs.end(), v);
        if (has_v && nbrs.size() > 1) {
            report.pass = false;
            VertexSet witness(t.begin(), t.end());
            witness.push_back(v);
            witness.push_back(nbrs[0] == v ? nbrs[1] : nbrs[0]);
            report.counterexample = witness;
            report.detail = "a legal (k-1)-set joins both v and another vertex of part 1";
            return false;
        }
        return true;
    });
    return report;
}

} // namespace hytile
