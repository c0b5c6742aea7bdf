#include "hytile/tiling.hpp"

#include "hytile/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace hytile {

namespace {

struct VertexSetHash {
    std::size_t operator()(const VertexSet& s) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (Vertex v : s) {
            h ^= v;
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

std::uint64_t count_automorphisms(const KPartiteHypergraph& g) {
    const std::size_t ku = static_cast<std::size_t>(g.k());
    std::vector<std::vector<Vertex>> perms(ku);
    for (std::size_t j = 0; j < ku; ++j)
        for (Vertex v = g.part_begin(j); v < g.part_end(j); ++v)
            perms[j].push_back(v);
    std::vector<Vertex> map(g.vertex_count());
    std::uint64_t count = 0;
    std::vector<Vertex> e(ku);
    while (true) {
        for (std::size_t j = 0; j < ku; ++j)
            for (std::size_t i = 0; i < perms[j].size(); ++i)
                map[g.part_begin(j) + i] = perms[j][i];
        bool ok = true;
        for (std::size_t i = 0; i < g.edge_count() && ok; ++i) {
            auto src = g.edge(i);
            for (std::size_t j = 0; j < ku; ++j)
                e[j] = map[src[j]];
            ok = g.has_edge(e);
        }
        count += ok ? 1 : 0;
        std::size_t j = 0;
        while (j < ku && !std::next_permutation(perms[j].begin(), perms[j].end()))
            ++j;
        if (j == ku)
            return count;
    }
}

} // namespace

PatternGraph::PatternGraph(KPartiteHypergraph graph) : graph_(std::move(graph)) {
    if (graph_.vertex_count() <= 12)
        automorphisms_ = count_automorphisms(graph_);
}

PatternGraph pattern_complete(int k, std::size_t m) {
    if (m < 1)
        throw Error(ErrorCode::BadPartSizes, "pattern part size must be positive");
    return PatternGraph(complete_hypergraph(k, std::vector<std::size_t>(static_cast<std::size_t>(k), m)));
}

VertexSet Embedding::vertex_set() const {
    VertexSet s = image;
    std::sort(s.begin(), s.end());
    return s;
}

bool is_valid_embedding(const KPartiteHypergraph& h, const PatternGraph& f, const Embedding& e) {
    const auto& g = f.graph();
    if (e.image.size() != g.vertex_count() || g.k() != h.k())
        return false;
    for (Vertex x = 0; x < e.image.size(); ++x) {
        const Vertex v = e.image[x];
        if (v >= h.vertex_count() || h.part_of(v) != g.part_of(x))
            return false;
    }
    VertexSet s = e.vertex_set();
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
        return false;
    std::vector<Vertex> img(static_cast<std::size_t>(g.k()));
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        auto src = g.edge(i);
        for (std::size_t j = 0; j < img.size(); ++j)
            img[j] = e.image[src[j]];
        if (!h.has_edge(img))
            return false;
    }
    return true;
}

VertexSet Tiling::covered() const {
    VertexSet out;
    for (const auto& e : embeddings)
        out.insert(out.end(), e.image.begin(), e.image.end());
    std::sort(out.begin(), out.end());
    return out;
}

bool validate_tiling(const KPartiteHypergraph& h, const PatternGraph& f, const Tiling& t,
                     bool perfect, std::string* why) {
    auto fail = [why](std::string msg) {
        if (why)
            *why = std::move(msg);
        return false;
    };
    for (std::size_t i = 0; i < t.embeddings.size(); ++i)
        if (!is_valid_embedding(h, f, t.embeddings[i]))
            return fail("embedding " + std::to_string(i) + " is not a copy of F in H");
    VertexSet cov = t.covered();
    if (std::adjacent_find(cov.begin(), cov.end()) != cov.end())
        return fail("embeddings overlap");
    if (perfect && cov.size() != h.vertex_count())
        return fail("tiling covers " + std::to_string(cov.size()) + " of " +
                    std::to_string(h.vertex_count()) + " vertices");
    return true;
}

std::vector<Vertex> search_order(const PatternGraph& f, std::optional<Vertex> first) {
    const auto& g = f.graph();
    const std::size_t n = g.vertex_count();
    std::vector<Vertex> order;
    std::vector<char> placed(n, 0);
    std::vector<std::vector<std::uint32_t>> inc(n);
    for (std::uint32_t i = 0; i < g.edge_count(); ++i)
        for (Vertex x : g.edge(i))
            inc[x].push_back(i);
    auto pick = [&](Vertex x) {
        order.push_back(x);
        placed[x] = 1;
    };
    if (first) {
        if (*first >= n)
            throw Error(ErrorCode::OutOfRange, "anchor pattern vertex");
        pick(*first);
    }
    while (order.size() < n) {
        Vertex best = 0;
        std::pair<std::size_t, std::size_t> best_score{0, 0};
        bool have = false;
        for (Vertex x = 0; x < n; ++x) {
            if (placed[x])
                continue;
            std::size_t completing = 0, touching = 0;
            for (std::uint32_t ei : inc[x]) {
                std::size_t others_placed = 0;
                for (Vertex y : g.edge(ei))
                    others_placed += (y != x && placed[y]) ? 1 : 0;
                completing += others_placed + 1 == static_cast<std::size_t>(g.k()) ? 1 : 0;
                touching += others_placed > 0 ? 1 : 0;
            }
            std::pair<std::size_t, std::size_t> score{completing, order.empty() ? inc[x].size() : touching};
            if (!have || score > best_score) {
                best = x;
                best_score = score;
                have = true;
            }
        }
        pick(best);
    }
    return order;
}

namespace {

class EmbeddingSearch {
public:
    EmbeddingSearch(const KPartiteHypergraph& h, const PatternGraph& f,
                    const EnumerationOptions& options, const EmbeddingVisitor& visit)
        : h_(h), g_(f.graph()), opts_(options), visit_(visit),
          order_(search_order(f, options.anchor ? std::optional<Vertex>(options.anchor->first)
                                                : std::nullopt)),
          used_(h.vertex_count(), 0) {
        const std::size_t ku = static_cast<std::size_t>(g_.k());
        std::vector<std::size_t> position(g_.vertex_count());
        for (std::size_t i = 0; i < order_.size(); ++i)
            position[order_[i]] = i;
        completing_.resize(order_.size());
        for (std::size_t ei = 0; ei < g_.edge_count(); ++ei) {
            auto e = g_.edge(ei);
            Vertex last = e[0];
            for (Vertex y : e)
                if (position[y] > position[last])
                    last = y;
            std::vector<Vertex> others;
            for (Vertex y : e)
                if (y != last)
                    others.push_back(y);
            completing_[position[last]].push_back(std::move(others));
        }
        part_.resize(order_.size());
        for (std::size_t i = 0; i < order_.size(); ++i)
            part_[i] = g_.part_of(order_[i]);
        current_.image.assign(g_.vertex_count(), 0);
        scratch_.resize(ku);
    }

    EnumerationResult run() {
        if (g_.vertex_count() == 0) {
            emit();
        } else {
            descend(0);
        }
        result_.truncated = stopped_ && !result_.out_of_budget;
        return result_;
    }

private:
    bool allowed(Vertex v) const {
        return !used_[v] && (opts_.allowed.empty() || opts_.allowed[v] != 0);
    }

    bool completes(std::size_t pos, std::size_t from, Vertex w) {
        const auto& edges = completing_[pos];
        for (std::size_t i = from; i < edges.size(); ++i) {
            std::size_t n = 0;
            for (Vertex y : edges[i])
                scratch_[n++] = current_.image[y];
            scratch_[n++] = w;
            std::sort(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(n));
            if (!h_.has_edge(scratch_))
                return false;
        }
        return true;
    }

    void emit() {
        ++result_.labelled;
        if (visit_ && !visit_(current_))
            stopped_ = true;
        if (opts_.limit && result_.labelled >= *opts_.limit)
            stopped_ = true;
    }

    void place(std::size_t pos, Vertex w) {
        current_.image[order_[pos]] = w;
        used_[w] = 1;
        descend(pos + 1);
        used_[w] = 0;
    }

    void descend(std::size_t pos) {
        if (stopped_)
            return;
        if (opts_.node_budget && ++result_.nodes > opts_.node_budget) {
            result_.out_of_budget = true;
            stopped_ = true;
            return;
        }
        if (pos == order_.size()) {
            emit();
            return;
        }
        const std::size_t part = part_[pos];
        if (pos == 0 && opts_.anchor) {
            const Vertex w = opts_.anchor->second;
            if (w < h_.vertex_count() && h_.part_of(w) == part && allowed(w))
                place(pos, w);
            return;
        }
        const auto& edges = completing_[pos];
        if (!edges.empty()) {
            std::vector<Vertex> others;
            others.reserve(edges[0].size());
            for (Vertex y : edges[0])
                others.push_back(current_.image[y]);
            std::sort(others.begin(), others.end());
            for (Vertex w : h_.neighbors(others, part)) {
                if (stopped_)
                    return;
                if (allowed(w) && completes(pos, 1, w))
                    place(pos, w);
            }
            return;
        }
        for (Vertex w = h_.part_begin(part); w < h_.part_end(part) && !stopped_; ++w)
            if (allowed(w))
                place(pos, w);
    }

    const KPartiteHypergraph& h_;
    const KPartiteHypergraph& g_;
    const EnumerationOptions& opts_;
    const EmbeddingVisitor& visit_;
    std::vector<Vertex> order_;
    std::vector<std::size_t> part_;
    std::vector<std::vector<std::vector<Vertex>>> completing_;
    std::vector<char> used_;
    Embedding current_;
    std::vector<Vertex> scratch_;
    EnumerationResult result_;
    bool stopped_ = false;
};

} // namespace

EnumerationResult enumerate_embeddings(const KPartiteHypergraph& h, const PatternGraph& f,
                                       const EnumerationOptions& options,
                                       const EmbeddingVisitor& visit) {
    if (h.k() != f.k())
        throw Error(ErrorCode::ArityMismatch, "pattern and host have different k");
    if (!options.allowed.empty() && options.allowed.size() != h.vertex_count())
        throw Error(ErrorCode::BadParams, "allowed mask has the wrong length");
    EmbeddingSearch search(h, f, options, visit);
    EnumerationResult r = search.run();
    if (auto aut = f.automorphism_count(); aut && *aut > 0)
        r.unlabelled = r.labelled / *aut;
    return r;
}

std::uint64_t copies_containing(const KPartiteHypergraph& h, const PatternGraph& f, Vertex v) {
    const std::size_t part = h.part_of(v);
    auto aut = f.automorphism_count();
    if (!aut)
        throw Error(ErrorCode::TooLarge, "automorphism count unavailable for f > 12");
    std::uint64_t anchored = 0;
    const auto& g = f.graph();
    for (Vertex x = g.part_begin(part); x < g.part_end(part); ++x) {
        EnumerationOptions opts;
        opts.anchor = std::make_pair(x, v);
        anchored += enumerate_embeddings(h, f, opts).labelled;
    }
    return anchored / *aut;
}

CopyList distinct_copies(const KPartiteHypergraph& h, const PatternGraph& f,
                         const EnumerationOptions& options, std::uint64_t max_copies) {
    std::unordered_map<VertexSet, std::size_t, VertexSetHash> seen;
    CopyList raw;
    bool overflow = false;
    auto r = enumerate_embeddings(h, f, options, [&](const Embedding& e) {
        VertexSet s = e.vertex_set();
        auto [it, inserted] = seen.emplace(s, raw.sets.size());
        if (inserted) {
            raw.sets.push_back(std::move(s));
            raw.witnesses.push_back(e);
            if (raw.sets.size() > max_copies) {
                overflow = true;
                return false;
            }
        }
        return true;
    });
    if (overflow || r.out_of_budget)
        throw Error(ErrorCode::Budget, overflow ? "too many copies of F" : "enumeration budget exhausted");
    std::vector<std::size_t> idx(raw.sets.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return raw.sets[a] < raw.sets[b]; });
    CopyList out;
    out.sets.reserve(idx.size());
    out.witnesses.reserve(idx.size());
    for (std::size_t i : idx) {
        out.sets.push_back(std::move(raw.sets[i]));
        out.witnesses.push_back(std::move(raw.witnesses[i]));
    }
    return out;
}

const char* to_string(FactorVerdict v) {
    switch (v) {
    case FactorVerdict::Found: return "found";
    case FactorVerdict::None: return "none";
    case FactorVerdict::Unknown: return "unknown";
    }
    return "?";
}

bool factor_divisibility(const KPartiteHypergraph& h, const PatternGraph& f) {
    if (h.k() != f.k())
        return false;
    std::optional<std::size_t> quotient;
    for (std::size_t j = 0; j < static_cast<std::size_t>(h.k()); ++j) {
        const std::size_t m = f.part_size(j);
        if (m == 0 || h.part_size(j) % m != 0)
            return false;
        const std::size_t q = h.part_size(j) / m;
        if (quotient && *quotient != q)
            return false;
        quotient = q;
    }
    return true;
}

namespace {

// Exact cover where every vertex must be covered by exactly one copy. Copies
// die when one of their vertices gets covered; a live-copy counter per vertex
// lets a branch fail as soon as some uncovered vertex has no live copy left.
class ExactCover {
public:
    ExactCover(const KPartiteHypergraph& h, const std::vector<VertexSet>& copies,
               const FactorOptions& opts)
        : h_(h), n_(h.vertex_count()), copies_(copies), opts_(opts), by_vertex_(n_),
          live_(copies.size(), 1),
          live_count_(n_, 0), covered_(n_, 0) {
        for (std::size_t c = 0; c < copies.size(); ++c)
            for (Vertex v : copies[c]) {
                by_vertex_[v].push_back(static_cast<std::uint32_t>(c));
                ++live_count_[v];
            }
        use_memo_ = n_ <= 64;
    }

    FactorVerdict solve() {
        for (std::size_t v = 0; v < n_; ++v)
            if (live_count_[v] == 0)
                return FactorVerdict::None;
        for (std::size_t j = 0; j < static_cast<std::size_t>(h_.k()); ++j)
            if (!projection_coverable(j))
                return budget_hit_ ? FactorVerdict::Unknown : FactorVerdict::None;
        bool ok = search(0);
        if (ok)
            return FactorVerdict::Found;
        return budget_hit_ ? FactorVerdict::Unknown : FactorVerdict::None;
    }

    const std::vector<std::uint32_t>& chosen() const { return chosen_; }
    std::uint64_t nodes() const { return nodes_; }

private:
    // A factor restricted to part j is an exact cover of part j by the traces
    // that copies leave on it. Checked once per part before the main search.
    bool projection_coverable(std::size_t part) {
        const Vertex begin = h_.part_begin(part);
        const std::size_t size = h_.part_size(part);
        if (size == 0 || size > 64)
            return true;
        std::vector<std::uint64_t> traces;
        for (const auto& c : copies_) {
            std::uint64_t mask = 0;
            for (Vertex v : c)
                if (v >= begin && v < h_.part_end(part))
                    mask |= std::uint64_t{1} << (v - begin);
            traces.push_back(mask);
        }
        std::sort(traces.begin(), traces.end());
        traces.erase(std::unique(traces.begin(), traces.end()), traces.end());
        std::vector<std::vector<std::uint64_t>> by_low(size);
        for (std::uint64_t t : traces)
            if (t != 0)
                by_low[static_cast<std::size_t>(std::countr_zero(t))].push_back(t);
        const std::uint64_t full = size == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << size) - 1;
        std::unordered_set<std::uint64_t> failed;
        std::function<bool(std::uint64_t)> cover = [&](std::uint64_t done) {
            if (done == full)
                return true;
            if (failed.count(done))
                return false;
            const auto low = static_cast<std::size_t>(std::countr_one(done));
            for (std::uint64_t t : by_low[low]) {
                if (t & done)
                    continue;
                if (++nodes_ > opts_.node_budget) {
                    budget_hit_ = true;
                    return false;
                }
                if (cover(done | t))
                    return true;
                if (budget_hit_)
                    return false;
            }
            failed.insert(done);
            return false;
        };
        return cover(0);
    }

    std::optional<std::size_t> branch_vertex() const {
        std::optional<std::size_t> pick;
        for (std::size_t v = 0; v < n_; ++v) {
            if (covered_[v])
                continue;
            if (!opts_.fail_first)
                return v;
            if (!pick || live_count_[v] < live_count_[*pick])
                pick = v;
        }
        return pick;
    }

    // Returns false when some uncovered vertex lost its last live copy.
    bool take(std::uint32_t c, std::vector<std::uint32_t>& killed) {
        bool viable = true;
        for (Vertex v : copies_[c]) {
            covered_[v] = 1;
            state_ |= use_memo_ ? (std::uint64_t{1} << v) : 0;
        }
        for (Vertex v : copies_[c])
            for (std::uint32_t d : by_vertex_[v]) {
                if (!live_[d])
                    continue;
                live_[d] = 0;
                killed.push_back(d);
                for (Vertex u : copies_[d])
                    if (--live_count_[u] == 0 && !covered_[u])
                        viable = false;
            }
        return viable;
    }

    void undo(std::uint32_t c, const std::vector<std::uint32_t>& killed) {
        for (auto it = killed.rbegin(); it != killed.rend(); ++it) {
            live_[*it] = 1;
            for (Vertex u : copies_[*it])
                ++live_count_[u];
        }
        for (Vertex v : copies_[c]) {
            covered_[v] = 0;
            state_ &= use_memo_ ? ~(std::uint64_t{1} << v) : ~std::uint64_t{0};
        }
    }

    bool search(std::size_t depth) {
        auto v = branch_vertex();
        if (!v)
            return true;
        if (use_memo_ && failed_.count(state_))
            return false;
        const bool budget_before = budget_hit_;
        std::vector<std::uint32_t> options;
        for (std::uint32_t c : by_vertex_[*v])
            if (live_[c])
                options.push_back(c);
        for (std::uint32_t c : options) {
            if (++nodes_ > opts_.node_budget) {
                budget_hit_ = true;
                return false;
            }
            std::vector<std::uint32_t> killed;
            const bool viable = take(c, killed);
            chosen_.push_back(c);
            if (viable && search(depth + 1))
                return true;
            chosen_.pop_back();
            undo(c, killed);
            if (budget_hit_)
                return false;
        }
        if (use_memo_ && !budget_hit_ && !budget_before)
            failed_.insert(state_);
        return false;
    }

    const KPartiteHypergraph& h_;
    std::size_t n_;
    const std::vector<VertexSet>& copies_;
    const FactorOptions& opts_;
    std::vector<std::vector<std::uint32_t>> by_vertex_;
    std::vector<char> live_;
    std::vector<std::uint32_t> live_count_;
    std::vector<char> covered_;
    std::vector<std::uint32_t> chosen_;
    bool use_memo_ = false;
    std::uint64_t state_ = 0;
    std::unordered_set<std::uint64_t> failed_;
    std::uint64_t nodes_ = 0;
    bool budget_hit_ = false;
};

} // namespace

FactorResult exact_factor(const KPartiteHypergraph& h, const PatternGraph& f,
                          const FactorOptions& options) {
    if (h.k() != f.k())
        throw Error(ErrorCode::ArityMismatch, "pattern and host have different k");
    FactorResult result;
    if (!factor_divisibility(h, f)) {
        result.verdict = FactorVerdict::None;
        result.note = "part sizes not divisible by the pattern's part sizes";
        return result;
    }
    if (h.vertex_count() == 0) {
        result.verdict = FactorVerdict::Found;
        result.tiling = Tiling{};
        return result;
    }
    CopyList copies;
    try {
        EnumerationOptions eo;
        eo.node_budget = options.node_budget;
        copies = distinct_copies(h, f, eo, options.max_copies);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Budget)
            throw;
        result.verdict = FactorVerdict::Unknown;
        result.note = e.what();
        return result;
    }
    result.copies = copies.sets.size();
    ExactCover solver(h, copies.sets, options);
    result.verdict = solver.solve();
    result.nodes = solver.nodes();
    if (result.verdict == FactorVerdict::Found) {
        Tiling t;
        for (std::uint32_t c : solver.chosen())
            t.embeddings.push_back(copies.witnesses[c]);
        result.tiling = std::move(t);
    } else if (result.verdict == FactorVerdict::Unknown) {
        result.note = "node budget exhausted";
    }
    return result;
}

const char* to_string(StopReason r) {
    switch (r) {
    case StopReason::CoveredAll: return "covered-all";
    case StopReason::OmegaReached: return "omega-reached";
    case StopReason::NoCopyInRemainder: return "no-copy-in-remainder";
    case StopReason::BudgetExhausted: return "budget-exhausted";
    }
    return "?";
}

TilingReport greedy_tiling_within(const KPartiteHypergraph& h, const PatternGraph& f,
                                  const VertexSet& within,
                                  const std::vector<std::size_t>& max_left,
                                  std::uint64_t node_budget_per_search) {
    if (h.k() != f.k())
        throw Error(ErrorCode::ArityMismatch, "pattern and host have different k");
    const std::size_t ku = static_cast<std::size_t>(h.k());
    if (max_left.size() != ku)
        throw Error(ErrorCode::BadParams, "need one leftover bound per part");
    EnumerationOptions opts;
    opts.allowed.assign(h.vertex_count(), 0);
    opts.limit = 1;
    opts.node_budget = node_budget_per_search;
    std::vector<std::size_t> left(ku, 0);
    for (Vertex v : within) {
        if (!opts.allowed[v]) {
            opts.allowed[v] = 1;
            ++left[h.part_of(v)];
        }
    }
    TilingReport report;
    while (true) {
        bool done = true;
        for (std::size_t j = 0; j < ku; ++j)
            done = done && left[j] <= max_left[j];
        if (done) {
            const bool empty = std::all_of(left.begin(), left.end(), [](std::size_t x) { return x == 0; });
            report.stopped_reason = empty ? StopReason::CoveredAll : StopReason::OmegaReached;
            break;
        }
        std::optional<Embedding> found;
        auto r = enumerate_embeddings(h, f, opts, [&](const Embedding& e) {
            found = e;
            return false;
        });
        if (!found) {
            report.stopped_reason = r.out_of_budget ? StopReason::BudgetExhausted
                                                    : StopReason::NoCopyInRemainder;
            break;
        }
        for (Vertex v : found->image) {
            opts.allowed[v] = 0;
            --left[h.part_of(v)];
        }
        report.tiling.embeddings.push_back(std::move(*found));
    }
    report.leftover_per_part = left;
    for (Vertex v = 0; v < h.vertex_count(); ++v)
        if (opts.allowed[v])
            report.leftover_vertices.push_back(v);
    return report;
}

TilingReport greedy_tiling(const KPartiteHypergraph& h, const PatternGraph& f, double omega,
                           std::uint64_t node_budget_per_search) {
    if (!(omega >= 0.0 && omega <= 1.0))
        throw Error(ErrorCode::BadParams, "omega must lie in [0, 1]");
    VertexSet all(h.vertex_count());
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::size_t> max_left;
    for (std::size_t j = 0; j < static_cast<std::size_t>(h.k()); ++j)
        max_left.push_back(static_cast<std::size_t>(std::floor(omega * static_cast<double>(h.part_size(j)) + 1e-9)));
    return greedy_tiling_within(h, f, all, max_left, node_budget_per_search);
}

SupersaturationReport supersaturation_report(const KPartiteHypergraph& h, const PatternGraph& f,
                                             double p_prime) {
    SupersaturationReport r;
    const double n = static_cast<double>(h.vertex_count());
    r.edges = h.edge_count();
    r.edge_threshold = p_prime * std::pow(n, h.k());
    r.edge_bound_holds = static_cast<double>(r.edges) >= r.edge_threshold;
    auto e = enumerate_embeddings(h, f);
    r.labelled_copies = e.labelled;
    r.unlabelled_copies = e.unlabelled;
    r.eta = n > 0 ? static_cast<double>(e.labelled) / std::pow(n, static_cast<double>(f.f())) : 0.0;
    r.flagged = r.edge_bound_holds && e.labelled == 0;
    return r;
}

} // namespace hytile
