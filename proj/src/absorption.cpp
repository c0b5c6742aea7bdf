#include "hytile/absorption.hpp"

#include "hytile/error.hpp"
#include "hytile/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace hytile {

namespace {

std::vector<std::size_t> pattern_part_sizes(const PatternGraph& f) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < static_cast<std::size_t>(f.k()); ++j)
        out.push_back(f.part_size(j));
    return out;
}

void check_arity(const KPartiteHypergraph& h, const PatternGraph& f) {
    if (h.k() != f.k())
        throw Error(ErrorCode::ArityMismatch, "pattern and host have different k");
}

double binomial(std::size_t n, std::size_t r) {
    if (r > n)
        return 0;
    double out = 1;
    for (std::size_t i = 0; i < r; ++i)
        out = out * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return std::round(out);
}

// All r-subsets of `pool` in lexicographic order.
std::vector<VertexSet> combinations(const VertexSet& pool, std::size_t r) {
    std::vector<VertexSet> out;
    if (r > pool.size())
        return out;
    std::vector<std::size_t> idx(r);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        VertexSet s;
        for (std::size_t i : idx)
            s.push_back(pool[i]);
        out.push_back(std::move(s));
        std::size_t i = r;
        while (i > 0 && idx[i - 1] == pool.size() - r + i - 1)
            --i;
        if (i == 0)
            return out;
        ++idx[i - 1];
        for (std::size_t j = i; j < r; ++j)
            idx[j] = idx[j - 1] + 1;
    }
}

VertexSet sample_subset(const VertexSet& pool, std::size_t r, Rng& rng) {
    VertexSet tmp = pool;
    for (std::size_t i = 0; i < r; ++i)
        std::swap(tmp[i], tmp[i + rng.below(tmp.size() - i)]);
    VertexSet out(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(r));
    std::sort(out.begin(), out.end());
    return out;
}

VertexSet merge(const VertexSet& a, const VertexSet& b) {
    VertexSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

VertexSet minus(const VertexSet& a, const VertexSet& b) {
    VertexSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool intersects(const VertexSet& a, const VertexSet& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i == *j)
            return true;
        if (*i < *j)
            ++i;
        else
            ++j;
    }
    return false;
}

// exact_factor on H[s], witness translated back to host ids.
FactorResult factor_on(const KPartiteHypergraph& h, const PatternGraph& f, const VertexSet& s,
                       std::uint64_t budget) {
    auto sub = induced(h, s);
    FactorOptions opts;
    opts.node_budget = budget;
    FactorResult r = exact_factor(sub.graph, f, opts);
    if (r.tiling)
        for (auto& e : r.tiling->embeddings)
            for (auto& v : e.image)
                v = sub.to_host[v];
    return r;
}

std::vector<VertexSet> part_pools(const KPartiteHypergraph& h, const VertexSet& avoid) {
    std::vector<VertexSet> pools(static_cast<std::size_t>(h.k()));
    for (std::size_t j = 0; j < pools.size(); ++j)
        for (Vertex v = h.part_begin(j); v < h.part_end(j); ++v)
            if (!std::binary_search(avoid.begin(), avoid.end(), v))
                pools[j].push_back(v);
    return pools;
}

// Extension sets C_F(v) as sorted vertex sets, from anchored enumeration.
std::vector<VertexSet> extensions(const KPartiteHypergraph& h, const PatternGraph& f, Vertex v) {
    std::vector<VertexSet> out;
    const std::size_t part = h.part_of(v);
    const auto& g = f.graph();
    for (Vertex x = g.part_begin(part); x < g.part_end(part); ++x) {
        EnumerationOptions opts;
        opts.anchor = std::make_pair(x, v);
        auto copies = distinct_copies(h, f, opts);
        for (auto& s : copies.sets) {
            s.erase(std::find(s.begin(), s.end(), v));
            out.push_back(std::move(s));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void check_same_part(const KPartiteHypergraph& h, Vertex u, Vertex v) {
    if (u >= h.vertex_count() || v >= h.vertex_count())
        throw Error(ErrorCode::OutOfRange, "vertex out of range");
    if (u == v || h.part_of(u) != h.part_of(v))
        throw Error(ErrorCode::SamePart, "need two distinct vertices of one part");
}

std::uint64_t pow_guard(double x) {
    return x > 1.8e19 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(x);
}

} // namespace

double AbsorptionParams::eta1(std::size_t km) const {
    return eta / 2 * std::pow(beta0_prime / 2, static_cast<double>(km) - 1);
}

std::size_t AbsorptionParams::absorber_size(std::size_t km) const {
    if (a)
        return *a;
    return static_cast<std::size_t>(i0_prime) * km * (km - 1);
}

ExtensionIndex::ExtensionIndex(const KPartiteHypergraph& h, const PatternGraph& f,
                               std::uint64_t max_copies)
    : words_((h.vertex_count() + 63) / 64), sets_(h.vertex_count()) {
    check_arity(h, f);
    auto copies = distinct_copies(h, f, {}, max_copies);
    copies_ = copies.sets.size();
    std::vector<std::uint64_t> row(words_);
    for (const auto& s : copies.sets) {
        std::fill(row.begin(), row.end(), 0);
        for (Vertex v : s)
            row[v / 64] |= std::uint64_t{1} << (v % 64);
        for (Vertex v : s) {
            auto& dst = sets_[v];
            for (std::size_t w = 0; w < words_; ++w)
                dst.push_back(w == v / 64 ? row[w] & ~(std::uint64_t{1} << (v % 64)) : row[w]);
        }
    }
    for (auto& flat : sets_) {
        const std::size_t rows = words_ ? flat.size() / words_ : 0;
        std::vector<std::size_t> order(rows);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::lexicographical_compare(flat.begin() + a * words_, flat.begin() + (a + 1) * words_,
                                                flat.begin() + b * words_, flat.begin() + (b + 1) * words_);
        });
        std::vector<std::uint64_t> sorted;
        sorted.reserve(flat.size());
        for (std::size_t i : order)
            sorted.insert(sorted.end(), flat.begin() + i * words_, flat.begin() + (i + 1) * words_);
        flat = std::move(sorted);
    }
}

std::uint64_t ExtensionIndex::common(Vertex u, Vertex v) const {
    const auto& a = sets_[u];
    const auto& b = sets_[v];
    const std::size_t w = words_;
    std::size_t i = 0, j = 0;
    std::uint64_t count = 0;
    while (i < a.size() && j < b.size()) {
        const auto ai = a.begin() + i, bj = b.begin() + j;
        if (std::lexicographical_compare(ai, ai + w, bj, bj + w)) {
            i += w;
        } else if (std::lexicographical_compare(bj, bj + w, ai, ai + w)) {
            j += w;
        } else {
            const bool clear = !((ai[u / 64] >> (u % 64)) & 1) && !((ai[v / 64] >> (v % 64)) & 1);
            count += clear ? 1 : 0;
            i += w;
            j += w;
        }
    }
    return count;
}

std::uint64_t common_extension_count(const KPartiteHypergraph& h, const PatternGraph& f,
                                     Vertex u, Vertex v) {
    check_arity(h, f);
    check_same_part(h, u, v);
    auto cu = extensions(h, f, u);
    auto cv = extensions(h, f, v);
    std::uint64_t count = 0;
    auto i = cu.begin();
    auto j = cv.begin();
    while (i != cu.end() && j != cv.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            const bool clear = !std::binary_search(i->begin(), i->end(), u) &&
                               !std::binary_search(i->begin(), i->end(), v);
            count += clear ? 1 : 0;
            ++i;
            ++j;
        }
    }
    return count;
}

const char* to_string(Reachability r) {
    switch (r) {
    case Reachability::Yes:
        return "yes";
    case Reachability::No:
        return "no";
    case Reachability::Inconclusive:
        return "inconclusive";
    }
    return "?";
}

ReachabilityReport is_reachable(const KPartiteHypergraph& h, const PatternGraph& f, Vertex u,
                                Vertex v, const AbsorptionParams& params,
                                const ReachabilityMode& mode) {
    check_arity(h, f);
    check_same_part(h, u, v);
    if (params.i < 1)
        throw Error(ErrorCode::BadParams, "reachability iteration must be at least 1");
    const double n = static_cast<double>(h.vertex_count());
    const std::size_t iu = static_cast<std::size_t>(params.i);
    const std::size_t set_size = iu * f.f() - 1;
    ReachabilityReport r;
    r.threshold = params.beta * std::pow(n, static_cast<double>(set_size));

    if (mode.kind == ReachabilityMode::Kind::Exact) {
        if (params.i != 1)
            throw Error(ErrorCode::ModeUnsupported, "exact reachability is only available for i = 1");
        r.count = common_extension_count(h, f, u, v);
        r.verdict = static_cast<double>(*r.count) >= r.threshold ? Reachability::Yes : Reachability::No;
        return r;
    }

    // Candidate sets: i f_j vertices of each part j, one fewer in u's part,
    // avoiding u and v.
    const std::size_t home = h.part_of(u);
    auto pools = part_pools(h, {std::min(u, v), std::max(u, v)});
    std::vector<std::size_t> need(pools.size());
    double candidates = 1;
    for (std::size_t j = 0; j < pools.size(); ++j) {
        need[j] = iu * f.part_size(j) - (j == home ? 1 : 0);
        candidates *= binomial(pools[j].size(), need[j]);
    }
    r.needed = candidates > 0 ? r.threshold / candidates : std::numeric_limits<double>::infinity();
    r.trials = mode.trials;
    if (candidates == 0 || mode.trials == 0) {
        r.verdict = r.needed > 1 || candidates == 0 ? Reachability::No : Reachability::Inconclusive;
        return r;
    }
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < mode.trials; ++t) {
        Rng rng(derive_seed(mode.seed, stream::reachability, t));
        VertexSet w;
        for (std::size_t j = 0; j < pools.size(); ++j) {
            auto s = sample_subset(pools[j], need[j], rng);
            w.insert(w.end(), s.begin(), s.end());
        }
        std::sort(w.begin(), w.end());
        auto with = [&](Vertex x) {
            VertexSet s = w;
            s.insert(std::lower_bound(s.begin(), s.end(), x), x);
            return factor_on(h, f, s, params.node_budget).verdict == FactorVerdict::Found;
        };
        hits += (with(u) && with(v)) ? 1 : 0;
    }
    const double trials = static_cast<double>(mode.trials);
    const double phat = static_cast<double>(hits) / trials;
    const double z = 1.959963984540054;
    const double denom = 1 + z * z / trials;
    const double centre = (phat + z * z / (2 * trials)) / denom;
    const double half = z * std::sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom;
    r.estimate = phat;
    r.ci_low = std::max(0.0, centre - half);
    r.ci_high = std::min(1.0, centre + half);
    if (r.ci_low >= r.needed)
        r.verdict = Reachability::Yes;
    else if (r.ci_high < r.needed)
        r.verdict = Reachability::No;
    else
        r.verdict = Reachability::Inconclusive;
    return r;
}

ReachabilityGraph::ReachabilityGraph(const KPartiteHypergraph& h, const PatternGraph& f, double beta)
    : adj_(h.vertex_count()) {
    ExtensionIndex index(h, f);
    threshold_ = beta * std::pow(static_cast<double>(h.vertex_count()), static_cast<double>(f.f()) - 1);
    for (std::size_t j = 0; j < static_cast<std::size_t>(h.k()); ++j)
        for (Vertex u = h.part_begin(j); u < h.part_end(j); ++u)
            for (Vertex v = u + 1; v < h.part_end(j); ++v)
                if (static_cast<double>(index.common(u, v)) >= threshold_) {
                    adj_[u].push_back(v);
                    adj_[v].push_back(u);
                }
    for (auto& a : adj_)
        std::sort(a.begin(), a.end());
}

bool ReachabilityGraph::reachable(Vertex u, Vertex v) const {
    return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
}

std::vector<PartPrune> prune_closed_candidates(const ReachabilityGraph& reach,
                                               const KPartiteHypergraph& h, double delta) {
    const double bound = delta * static_cast<double>(h.vertex_count());
    std::vector<PartPrune> out(static_cast<std::size_t>(h.k()));
    std::vector<char> current(h.vertex_count(), 0);
    for (std::size_t j = 0; j < out.size(); ++j) {
        for (Vertex v = h.part_begin(j); v < h.part_end(j); ++v)
            current[v] = 1;
        auto inside = [&](Vertex v) {
            std::size_t c = 0;
            for (Vertex w : reach.neighbourhood(v))
                c += current[w] ? 1 : 0;
            return c;
        };
        while (true) {
            std::optional<Vertex> pivot;
            for (Vertex v = h.part_begin(j); v < h.part_end(j) && !pivot; ++v)
                if (current[v] && static_cast<double>(inside(v)) < bound)
                    pivot = v;
            if (!pivot)
                break;
            PruneStep step;
            step.pivot = *pivot;
            step.removed.push_back(*pivot);
            for (Vertex w : reach.neighbourhood(*pivot))
                if (current[w])
                    step.removed.push_back(w);
            std::sort(step.removed.begin(), step.removed.end());
            for (Vertex w : step.removed)
                current[w] = 0;
            out[j].trace.push_back(std::move(step));
        }
        for (Vertex v = h.part_begin(j); v < h.part_end(j); ++v)
            if (current[v])
                out[j].kept.push_back(v);
    }
    return out;
}

std::vector<PartPrune> prune_closed_candidates(const KPartiteHypergraph& h, const PatternGraph& f,
                                               const AbsorptionParams& params) {
    return prune_closed_candidates(ReachabilityGraph(h, f, params.beta), h, params.delta);
}

ClosedPartition partition_closed(const ReachabilityGraph& reach, const VertexSet& s,
                                 std::size_t total_vertices, const AbsorptionParams& params) {
    const double minimum = (params.delta - params.beta) * static_cast<double>(total_vertices);
    std::map<Vertex, std::size_t> slot;
    for (std::size_t i = 0; i < s.size(); ++i)
        slot[s[i]] = i;
    std::vector<std::size_t> parent(s.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < s.size(); ++i)
        for (Vertex w : reach.neighbourhood(s[i])) {
            auto it = slot.find(w);
            if (it != slot.end())
                parent[find(i)] = find(it->second);
        }
    std::map<std::size_t, VertexSet> groups;
    for (std::size_t i = 0; i < s.size(); ++i)
        groups[find(i)].push_back(s[i]);
    std::vector<VertexSet> comps;
    for (auto& [root, vs] : groups)
        comps.push_back(std::move(vs));
    std::sort(comps.begin(), comps.end(), [](const VertexSet& a, const VertexSet& b) { return a[0] < b[0]; });
    ClosedPartition out;
    for (auto& c : comps) {
        if (static_cast<double>(c.size()) < minimum)
            out.exceptional.insert(out.exceptional.end(), c.begin(), c.end());
        else
            out.blocks.push_back(std::move(c));
    }
    std::sort(out.exceptional.begin(), out.exceptional.end());
    return out;
}

ClosedPartition partition_closed(const KPartiteHypergraph& h, const PatternGraph& f,
                                 const VertexSet& s, const AbsorptionParams& params) {
    return partition_closed(ReachabilityGraph(h, f, params.beta), s, h.vertex_count(), params);
}

std::vector<RobustVector> robust_vectors(const KPartiteHypergraph& h, const PatternGraph& f,
                                         const RefinedPartition& p, double lambda,
                                         std::uint64_t max_copies) {
    check_arity(h, f);
    auto copies = distinct_copies(h, f, {}, max_copies);
    std::map<IndexVector, std::uint64_t> buckets;
    for (const auto& s : copies.sets) {
        bool housed = true;
        for (Vertex v : s)
            housed = housed && p.block_of(v).has_value();
        if (housed)
            ++buckets[index_vector(s, p)];
    }
    const double threshold =
        lambda * std::pow(static_cast<double>(h.vertex_count()), static_cast<double>(f.f()));
    std::vector<RobustVector> out;
    for (auto& [vec, count] : buckets)
        if (static_cast<double>(count) >= threshold)
            out.push_back({vec, count});
    return out;
}

TransferralReport transferral_check(const KPartiteHypergraph& h, const PatternGraph& f,
                                    const RefinedPartition& p, double lambda) {
    TransferralReport report;
    report.robust = robust_vectors(h, f, p, lambda);
    std::vector<IndexVector> gens;
    for (const auto& r : report.robust)
        gens.push_back(r.vector);
    Lattice lattice(p.block_count(), gens);
    for (std::size_t j = 0; j < static_cast<std::size_t>(h.k()); ++j) {
        auto blocks = p.blocks_of_part(j);
        for (std::size_t a = 0; a < blocks.size(); ++a)
            for (std::size_t b = a + 1; b < blocks.size(); ++b) {
                IndexVector target(p.block_count(), 0);
                target[blocks[a]] = 1;
                target[blocks[b]] = -1;
                auto m = lattice_contains(lattice, target);
                report.pairs.push_back({j, blocks[a], blocks[b], m.member, m.coefficients});
                report.pass = report.pass && m.member;
            }
    }
    return report;
}

AbsorbingSetsReport absorbing_sets(const KPartiteHypergraph& h, const PatternGraph& f,
                                   const VertexSet& s, std::size_t a, std::uint64_t budget,
                                   std::uint64_t seed) {
    check_arity(h, f);
    const std::size_t k = static_cast<std::size_t>(h.k());
    const auto fp = pattern_part_sizes(f);
    std::vector<std::size_t> in_part(k, 0);
    for (Vertex v : s) {
        if (v >= h.vertex_count())
            throw Error(ErrorCode::OutOfRange, "vertex out of range");
        ++in_part[h.part_of(v)];
    }
    if (in_part != fp || !std::is_sorted(s.begin(), s.end()))
        throw Error(ErrorCode::BadParams, "S must be a sorted set with |S ∩ V_j| = |F_j|");
    if (a == 0 || a % f.f() != 0)
        throw Error(ErrorCode::BadParams, "a must be a positive multiple of |F|");
    const std::size_t copies_per_set = a / f.f();

    auto pools = part_pools(h, s);
    std::vector<std::size_t> need(k);
    AbsorbingSetsReport report;
    double total = 1;
    for (std::size_t j = 0; j < k; ++j) {
        need[j] = copies_per_set * fp[j];
        total *= binomial(pools[j].size(), need[j]);
    }
    report.candidates = pow_guard(total);

    auto check = [&](const VertexSet& cand) {
        ++report.examined;
        if (factor_on(h, f, cand, 10'000'000).verdict != FactorVerdict::Found)
            return;
        if (factor_on(h, f, merge(cand, s), 10'000'000).verdict != FactorVerdict::Found)
            return;
        ++report.absorbing;
        report.members.push_back(cand);
    };

    if (total <= static_cast<double>(budget)) {
        report.exhaustive = true;
        std::vector<std::vector<VertexSet>> choices(k);
        for (std::size_t j = 0; j < k; ++j)
            choices[j] = combinations(pools[j], need[j]);
        std::vector<std::size_t> idx(k, 0);
        if (total > 0) {
            while (true) {
                VertexSet cand;
                for (std::size_t j = 0; j < k; ++j)
                    cand.insert(cand.end(), choices[j][idx[j]].begin(), choices[j][idx[j]].end());
                check(cand);
                std::size_t j = k;
                while (j > 0 && ++idx[j - 1] == choices[j - 1].size()) {
                    idx[j - 1] = 0;
                    --j;
                }
                if (j == 0)
                    break;
            }
        }
    } else {
        for (std::uint64_t t = 0; t < budget; ++t) {
            Rng rng(derive_seed(seed, stream::absorbing, t));
            VertexSet cand;
            for (std::size_t j = 0; j < k; ++j) {
                auto part = sample_subset(pools[j], need[j], rng);
                cand.insert(cand.end(), part.begin(), part.end());
            }
            check(cand);
        }
        std::sort(report.members.begin(), report.members.end());
        report.members.erase(std::unique(report.members.begin(), report.members.end()),
                             report.members.end());
    }
    const double na = std::pow(static_cast<double>(h.vertex_count()), static_cast<double>(a));
    if (report.examined > 0) {
        const double frac = static_cast<double>(report.absorbing) / static_cast<double>(report.examined);
        report.density = report.exhaustive ? static_cast<double>(report.absorbing) / na : frac * total / na;
    }
    return report;
}

const char* to_string(FamilyStatus s) {
    return s == FamilyStatus::Ok ? "ok" : "family-too-small";
}

double balanced_set_count(const KPartiteHypergraph& h, std::size_t a) {
    const std::size_t k = static_cast<std::size_t>(h.k());
    if (a % k != 0)
        return 0;
    double total = 1;
    for (std::size_t j = 0; j < k; ++j)
        total *= binomial(h.part_size(j), a / k);
    return total;
}

namespace {

double log_selection_base(const KPartiteHypergraph& h, const PatternGraph& f,
                          const AbsorptionParams& params, std::size_t a) {
    const double n = static_cast<double>(h.vertex_count());
    return std::log(params.eta1(f.f())) + (1.0 - static_cast<double>(a)) * std::log(n) -
           std::log(8.0 * static_cast<double>(a));
}

std::vector<std::size_t> absorber_need(const PatternGraph& f, std::size_t a) {
    std::vector<std::size_t> need;
    for (std::size_t j = 0; j < static_cast<std::size_t>(f.k()); ++j)
        need.push_back(a / f.f() * f.part_size(j));
    return need;
}

double candidate_count(const KPartiteHypergraph& h, const std::vector<std::size_t>& need) {
    double total = 1;
    for (std::size_t j = 0; j < need.size(); ++j)
        total *= binomial(h.part_size(j), need[j]);
    return total;
}

} // namespace

double multiplier_for_expected(const KPartiteHypergraph& h, const PatternGraph& f,
                               const AbsorptionParams& params, double expected) {
    const std::size_t a = params.absorber_size(f.f());
    const double m = candidate_count(h, absorber_need(f, a));
    if (m == 0 || expected <= 0)
        return 0;
    return std::exp(std::log(expected) - std::log(m) - log_selection_base(h, f, params, a));
}

AbsorbingFamily build_absorbing_family(const KPartiteHypergraph& h, const PatternGraph& f,
                                       const AbsorptionParams& params,
                                       const std::vector<VertexSet>& exceptional,
                                       std::uint64_t seed) {
    check_arity(h, f);
    const std::size_t k = static_cast<std::size_t>(h.k());
    AbsorbingFamily fam;
    fam.a = params.absorber_size(f.f());
    if (fam.a == 0 || fam.a % f.f() != 0)
        throw Error(ErrorCode::BadParams, "absorber size must be a positive multiple of |F|");
    if (params.family_multiplier < 0)
        throw Error(ErrorCode::BadParams, "family multiplier must be non-negative");
    const auto need = absorber_need(f, fam.a);
    const double m = candidate_count(h, need);
    fam.candidates = pow_guard(m);
    fam.probability = params.family_multiplier > 0
                          ? std::min(1.0, std::exp(std::log(params.family_multiplier) +
                                                   log_selection_base(h, f, params, fam.a)))
                          : 0.0;
    fam.selection_seed = derive_seed(seed, stream::family, 0);
    fam.absorb_seed = derive_seed(seed, stream::absorbing, 0);

    VertexSet v0;
    for (const auto& e : exceptional)
        v0.insert(v0.end(), e.begin(), e.end());
    std::sort(v0.begin(), v0.end());

    // Selection.
    std::vector<VertexSet> selected;
    auto all_pools = part_pools(h, {});
    if (fam.probability > 0 && m > 0) {
        if (m <= static_cast<double>(std::uint64_t{1} << 22)) {
            std::vector<std::vector<VertexSet>> choices(k);
            for (std::size_t j = 0; j < k; ++j)
                choices[j] = combinations(all_pools[j], need[j]);
            std::vector<std::size_t> idx(k, 0);
            for (std::uint64_t rank = 0;; ++rank) {
                if (unit_at(fam.selection_seed, stream::family, rank) < fam.probability) {
                    VertexSet cand;
                    for (std::size_t j = 0; j < k; ++j)
                        cand.insert(cand.end(), choices[j][idx[j]].begin(), choices[j][idx[j]].end());
                    selected.push_back(std::move(cand));
                }
                std::size_t j = k;
                while (j > 0 && ++idx[j - 1] == choices[j - 1].size()) {
                    idx[j - 1] = 0;
                    --j;
                }
                if (j == 0)
                    break;
            }
        } else {
            const double mean = fam.probability * m;
            if (mean > static_cast<double>(std::uint64_t{1} << 22))
                throw Error(ErrorCode::Budget, "expected family size is too large");
            std::mt19937_64 engine(fam.selection_seed);
            std::poisson_distribution<std::uint64_t> poisson(mean);
            const std::uint64_t count = poisson(engine);
            Rng rng(derive_seed(fam.selection_seed, stream::family, 1));
            for (std::uint64_t i = 0; i < count; ++i) {
                VertexSet cand;
                for (std::size_t j = 0; j < k; ++j) {
                    auto part = sample_subset(all_pools[j], need[j], rng);
                    cand.insert(cand.end(), part.begin(), part.end());
                }
                selected.push_back(std::move(cand));
            }
        }
    }
    fam.selected = selected.size();

    // Drop later members of intersecting pairs.
    std::vector<VertexSet> disjoint;
    VertexSet used;
    for (auto& s : selected) {
        if (intersects(s, used)) {
            ++fam.dropped_intersecting;
            continue;
        }
        used = merge(used, s);
        disjoint.push_back(std::move(s));
    }

    // Keep members with a factor that absorb at least one sampled S outside V^0.
    const auto fp = pattern_part_sizes(f);
    for (std::size_t i = 0; i < disjoint.size(); ++i) {
        const VertexSet& a = disjoint[i];
        FactorResult own = factor_on(h, f, a, params.node_budget);
        FamilyMember member{a, {}, 0};
        if (own.verdict == FactorVerdict::Found) {
            member.factor = *own.tiling;
            auto pools = part_pools(h, merge(v0, a));
            bool room = true;
            for (std::size_t j = 0; j < k; ++j)
                room = room && pools[j].size() >= fp[j];
            for (std::uint64_t t = 0; room && t < params.absorb_trials; ++t) {
                Rng rng(derive_seed(fam.absorb_seed, i, t));
                VertexSet s;
                for (std::size_t j = 0; j < k; ++j) {
                    auto part = sample_subset(pools[j], fp[j], rng);
                    s.insert(s.end(), part.begin(), part.end());
                }
                std::sort(s.begin(), s.end());
                if (factor_on(h, f, merge(a, s), params.node_budget).verdict == FactorVerdict::Found)
                    ++member.absorbed_samples;
            }
        }
        if (member.absorbed_samples == 0) {
            ++fam.dropped_not_absorbing;
            continue;
        }
        fam.members.push_back(std::move(member));
    }

    // F_2: cover the exceptional vertices outside V(F_1) by copies avoiding V(F_1).
    EnumerationOptions opts;
    opts.allowed.assign(h.vertex_count(), 1);
    opts.limit = 1;
    opts.node_budget = params.node_budget;
    for (const auto& mem : fam.members)
        for (Vertex v : mem.vertices)
            opts.allowed[v] = 0;
    const auto& g = f.graph();
    for (Vertex v : v0) {
        if (!opts.allowed[v])
            continue;
        std::optional<Embedding> found;
        const std::size_t part = h.part_of(v);
        for (Vertex x = g.part_begin(part); x < g.part_end(part) && !found; ++x) {
            EnumerationOptions anchored = opts;
            anchored.anchor = std::make_pair(x, v);
            enumerate_embeddings(h, f, anchored, [&](const Embedding& e) {
                found = e;
                return false;
            });
        }
        if (!found) {
            fam.uncovered_exceptional.push_back(v);
            continue;
        }
        for (Vertex u : found->image)
            opts.allowed[u] = 0;
        fam.cover.push_back(std::move(*found));
    }

    for (const auto& mem : fam.members)
        fam.w.insert(fam.w.end(), mem.vertices.begin(), mem.vertices.end());
    for (const auto& e : fam.cover)
        fam.w.insert(fam.w.end(), e.image.begin(), e.image.end());
    std::sort(fam.w.begin(), fam.w.end());
    fam.status = fam.members.empty() || !fam.uncovered_exceptional.empty() ? FamilyStatus::FamilyTooSmall
                                                                           : FamilyStatus::Ok;
    return fam;
}

PipelineResult perfect_tiling_pipeline(const KPartiteHypergraph& h, const PatternGraph& f,
                                       const AbsorptionParams& params, std::uint64_t seed) {
    check_arity(h, f);
    const std::size_t k = static_cast<std::size_t>(h.k());
    PipelineResult out;
    auto log = [&](std::string stage, std::string status, std::string detail,
                   std::optional<std::uint64_t> s = {}) {
        if (status == "fail" && out.failed_stage.empty())
            out.failed_stage = stage;
        out.stages.push_back({std::move(stage), std::move(status), std::move(detail), s});
    };

    if (!factor_divisibility(h, f)) {
        log("divisibility", "fail", "part sizes are not a common multiple of the pattern's");
        out.verdict = FactorVerdict::None;
        return out;
    }
    log("divisibility", "ok", "");

    std::vector<VertexSet> exceptional(k);
    try {
        ReachabilityGraph reach(h, f, params.beta);
        auto pruned = prune_closed_candidates(reach, h, params.delta);
        std::size_t removed = 0;
        for (std::size_t j = 0; j < k; ++j) {
            VertexSet part;
            for (Vertex v = h.part_begin(j); v < h.part_end(j); ++v)
                part.push_back(v);
            exceptional[j] = minus(part, pruned[j].kept);
            removed += exceptional[j].size();
        }
        log("prune", "ok", "exceptional vertices: " + std::to_string(removed));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Budget)
            throw;
        log("prune", "skipped", e.what());
    }

    const std::uint64_t family_seed = derive_seed(seed, stream::family, 1);
    AbsorbingFamily fam = build_absorbing_family(h, f, params, exceptional, family_seed);
    log("family", fam.status == FamilyStatus::Ok ? "ok" : "short",
        std::string(to_string(fam.status)) + "; selected " + std::to_string(fam.selected) + ", kept " +
            std::to_string(fam.members.size()) + ", |W| = " + std::to_string(fam.w.size()),
        family_seed);

    VertexSet everything(h.vertex_count());
    std::iota(everything.begin(), everything.end(), 0);
    const VertexSet rest = minus(everything, fam.w);
    const double omega = params.gamma_prime / static_cast<double>(k);
    std::vector<std::size_t> max_left(k);
    for (std::size_t j = 0; j < k; ++j)
        max_left[j] = static_cast<std::size_t>(std::floor(omega * static_cast<double>(h.part_size(j))));
    TilingReport greedy = greedy_tiling_within(h, f, rest, max_left, params.node_budget);
    const VertexSet& u = greedy.leftover_vertices;
    log("greedy", "ok",
        std::string(to_string(greedy.stopped_reason)) + "; copies " +
            std::to_string(greedy.tiling.embeddings.size()) + ", leftover " + std::to_string(u.size()));

    auto finish = [&](Tiling t) {
        std::string why;
        if (!validate_tiling(h, f, t, true, &why))
            return false;
        out.verdict = FactorVerdict::Found;
        out.tiling = std::move(t);
        return true;
    };

    // Absorb U: ascending ids per part, cut into groups shaped like F.
    {
        const auto fp = pattern_part_sizes(f);
        std::vector<VertexSet> per_part(k);
        for (Vertex v : u)
            per_part[h.part_of(v)].push_back(v);
        std::string problem;
        std::size_t groups = 0;
        for (std::size_t j = 0; j < k && problem.empty(); ++j) {
            if (per_part[j].size() % fp[j] != 0) {
                problem = "leftover is not a union of pattern-shaped sets";
            } else {
                const std::size_t g = per_part[j].size() / fp[j];
                if (j > 0 && g != groups)
                    problem = "leftover is not balanced";
                groups = g;
            }
        }
        Tiling t = greedy.tiling;
        t.embeddings.insert(t.embeddings.end(), fam.cover.begin(), fam.cover.end());
        std::vector<char> spent(fam.members.size(), 0);
        for (std::size_t g = 0; g < groups && problem.empty(); ++g) {
            VertexSet s;
            for (std::size_t j = 0; j < k; ++j)
                s.insert(s.end(), per_part[j].begin() + static_cast<std::ptrdiff_t>(g * fp[j]),
                         per_part[j].begin() + static_cast<std::ptrdiff_t>((g + 1) * fp[j]));
            std::sort(s.begin(), s.end());
            bool placed = false;
            for (std::size_t i = 0; i < fam.members.size() && !placed; ++i) {
                if (spent[i])
                    continue;
                FactorResult r = factor_on(h, f, merge(fam.members[i].vertices, s), params.node_budget);
                if (r.verdict == FactorVerdict::Found) {
                    spent[i] = 1;
                    placed = true;
                    t.embeddings.insert(t.embeddings.end(), r.tiling->embeddings.begin(),
                                        r.tiling->embeddings.end());
                }
            }
            if (!placed)
                problem = "no unused member absorbs group " + std::to_string(g);
        }
        if (problem.empty()) {
            for (std::size_t i = 0; i < fam.members.size(); ++i)
                if (!spent[i])
                    t.embeddings.insert(t.embeddings.end(), fam.members[i].factor.embeddings.begin(),
                                        fam.members[i].factor.embeddings.end());
            if (finish(std::move(t))) {
                log("absorb", "ok", "groups absorbed: " + std::to_string(groups));
                return out;
            }
            problem = "assembled tiling failed validation";
        }
        log("absorb", "fail", problem);
    }

    out.used_fallback = true;
    const VertexSet wu = merge(fam.w, u);
    if (!wu.empty()) {
        FactorResult r = factor_on(h, f, wu, params.node_budget);
        log("fallback-absorber", to_string(r.verdict), "exact solver on H[W ∪ U], " +
                                                           std::to_string(wu.size()) + " vertices");
        if (r.verdict == FactorVerdict::Found) {
            Tiling t = greedy.tiling;
            t.embeddings.insert(t.embeddings.end(), r.tiling->embeddings.begin(), r.tiling->embeddings.end());
            if (finish(std::move(t)))
                return out;
        }
    }
    FactorOptions opts;
    opts.node_budget = params.node_budget;
    FactorResult full = exact_factor(h, f, opts);
    log("fallback-full", to_string(full.verdict), "exact solver on H");
    out.verdict = full.verdict;
    out.tiling = full.tiling;
    return out;
}

} // namespace hytile
