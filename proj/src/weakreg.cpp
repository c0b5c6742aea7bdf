#include "hytile/weakreg.hpp"

#include "hytile/error.hpp"
#include "hytile/parallel.hpp"
#include "hytile/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace hytile {

namespace {

void check_tuple(const KPartiteHypergraph& h, const SetTuple& a) {
    if (a.size() != static_cast<std::size_t>(h.k()))
        throw Error(ErrorCode::BadArity, "need one set per part");
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j].empty())
            throw Error(ErrorCode::EmptySet, "tuple set " + std::to_string(j) + " is empty");
        for (Vertex v : a[j])
            if (v >= h.vertex_count() || h.part_of(v) != j)
                throw Error(ErrorCode::WrongPart, "tuple set " + std::to_string(j) + " leaves its part");
    }
}

std::size_t min_size(double eps, std::size_t n) {
    const double raw = std::ceil(eps * static_cast<double>(n) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, n);
}

// Edges of H inside the tuple, as local indices (k per edge).
std::vector<std::uint32_t> tuple_edges(const KPartiteHypergraph& h, const SetTuple& v) {
    const std::size_t k = v.size();
    const std::size_t last = k - 1;
    std::vector<std::int32_t> local(h.part_size(last), -1);
    for (std::size_t i = 0; i < v[last].size(); ++i)
        local[v[last][i] - h.part_begin(last)] = static_cast<std::int32_t>(i);
    std::vector<std::uint32_t> out;
    std::vector<std::size_t> pos(last, 0);
    std::vector<Vertex> others(last);
    while (true) {
        for (std::size_t j = 0; j < last; ++j)
            others[j] = v[j][pos[j]];
        for (Vertex w : h.neighbors(others, last)) {
            const std::int32_t li = local[w - h.part_begin(last)];
            if (li < 0)
                continue;
            for (std::size_t j = 0; j < last; ++j)
                out.push_back(static_cast<std::uint32_t>(pos[j]));
            out.push_back(static_cast<std::uint32_t>(li));
        }
        std::size_t j = last;
        while (j > 0 && ++pos[j - 1] == v[j - 1].size()) {
            pos[j - 1] = 0;
            --j;
        }
        if (j == 0)
            return out;
    }
}

Rational reduce(std::uint64_t num, std::uint64_t den) {
    const std::uint64_t g = std::gcd(num, den);
    return g ? Rational{num / g, den / g} : Rational{0, 1};
}

SetTuple to_global(const SetTuple& v, const std::vector<std::vector<char>>& in) {
    SetTuple out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        for (std::size_t i = 0; i < v[j].size(); ++i)
            if (in[j][i])
                out[j].push_back(v[j][i]);
    return out;
}

RegularityResult exact_regularity(const SetTuple& v, double eps,
                                  std::uint64_t cap, const std::vector<std::uint32_t>& edges,
                                  double d) {
    const std::size_t k = v.size();
    const std::size_t last = k - 1;
    std::size_t bits = 0;
    for (const auto& s : v)
        bits += s.size();
    if (bits >= 63 || (std::uint64_t{1} << bits) > cap)
        throw Error(ErrorCode::TooLarge, "exact regularity needs 2^" + std::to_string(bits) + " sub-tuples");

    std::vector<std::size_t> shift(last, 0);
    std::size_t prefix_bits = 0;
    for (std::size_t j = last; j-- > 0;) {
        shift[j] = prefix_bits;
        prefix_bits += v[j].size();
    }
    const std::size_t n_last = v[last].size();
    std::vector<std::vector<std::uint64_t>> by_last(n_last);
    for (std::size_t e = 0; e < edges.size(); e += k) {
        std::uint64_t mask = 0;
        for (std::size_t j = 0; j < last; ++j)
            mask |= std::uint64_t{1} << (shift[j] + edges[e + j]);
        by_last[edges[e + last]].push_back(mask);
    }
    std::vector<std::size_t> need(k);
    for (std::size_t j = 0; j < k; ++j)
        need[j] = min_size(eps, v[j].size());

    RegularityResult r;
    std::vector<std::uint64_t> c(n_last);
    std::vector<std::size_t> order(n_last);
    for (std::uint64_t prefix = 0; prefix < (std::uint64_t{1} << prefix_bits); ++prefix) {
        double prod = 1;
        bool admissible = true;
        for (std::size_t j = 0; j < last && admissible; ++j) {
            const auto size = static_cast<std::size_t>(
                std::popcount((prefix >> shift[j]) & ((std::uint64_t{1} << v[j].size()) - 1)));
            admissible = size >= need[j];
            prod *= static_cast<double>(size);
        }
        if (!admissible)
            continue;
        for (std::size_t i = 0; i < n_last; ++i) {
            c[i] = 0;
            for (std::uint64_t m : by_last[i])
                c[i] += (m & ~prefix) == 0 ? 1 : 0;
        }
        for (int direction : {+1, -1}) {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return direction > 0 ? c[a] > c[b] : c[a] < c[b];
            });
            std::uint64_t sum = 0;
            for (std::size_t a = 0; a < n_last; ++a) {
                sum += c[order[a]];
                if (a + 1 < need[last])
                    continue;
                const double dens = static_cast<double>(sum) / (prod * static_cast<double>(a + 1));
                const double dev = std::abs(dens - d);
                r.worst_deviation = std::max(r.worst_deviation, dev);
                if (dev > eps && !r.witness) {
                    std::vector<std::vector<char>> in(k);
                    for (std::size_t j = 0; j < last; ++j) {
                        in[j].assign(v[j].size(), 0);
                        for (std::size_t i = 0; i < v[j].size(); ++i)
                            in[j][i] = (prefix >> (shift[j] + i)) & 1;
                    }
                    in[last].assign(n_last, 0);
                    for (std::size_t i = 0; i <= a; ++i)
                        in[last][order[i]] = 1;
                    r.witness = to_global(v, in);
                    r.witness_density = dens;
                }
            }
        }
    }
    r.verdict = r.witness ? RegularityVerdict::Refuted : RegularityVerdict::Certified;
    return r;
}

class SampledRegularity {
public:
    SampledRegularity(const SetTuple& v, const std::vector<std::uint32_t>& edges, double eps, double d)
        : v_(v), edges_(edges), k_(v.size()), eps_(eps), d_(d), need_(k_), in_(k_), gain_(k_) {
        for (std::size_t j = 0; j < k_; ++j) {
            need_[j] = min_size(eps, v[j].size());
            in_[j].assign(v[j].size(), 0);
            gain_[j].assign(v[j].size(), 0);
        }
    }

    RegularityResult run(std::uint64_t trials, std::uint64_t seed) {
        RegularityResult r;
        double prod = 1;
        for (std::size_t j = 0; j < k_; ++j)
            prod *= static_cast<double>(need_[j]);
        std::optional<std::uint64_t> worst_trial;
        double worst = -1;
        for (std::uint64_t t = 0; t < trials; ++t) {
            draw(derive_seed(seed, stream::regularity, t));
            const double dev = std::abs(static_cast<double>(count()) / prod - d_);
            if (dev > worst) {
                worst = dev;
                worst_trial = t;
            }
        }
        if (!worst_trial) {
            r.verdict = RegularityVerdict::NoRefutationFound;
            return r;
        }
        draw(derive_seed(seed, stream::regularity, *worst_trial));
        std::uint64_t edges_in = count();
        std::size_t total = 0;
        for (const auto& s : v_)
            total += s.size();
        for (std::size_t step = 0; step < 4 * total; ++step) {
            auto next = best_swap(edges_in, prod);
            if (!next)
                break;
            edges_in = *next;
        }
        const double dens = static_cast<double>(edges_in) / prod;
        r.worst_deviation = std::abs(dens - d_);
        if (r.worst_deviation > eps_) {
            r.verdict = RegularityVerdict::Refuted;
            r.witness = to_global(v_, in_);
            r.witness_density = dens;
        } else {
            r.verdict = RegularityVerdict::NoRefutationFound;
        }
        return r;
    }

private:
    void draw(std::uint64_t seed) {
        Rng rng(seed);
        for (std::size_t j = 0; j < k_; ++j) {
            std::vector<std::size_t> idx(v_[j].size());
            std::iota(idx.begin(), idx.end(), 0);
            std::fill(in_[j].begin(), in_[j].end(), 0);
            for (std::size_t i = 0; i < need_[j]; ++i) {
                std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
                in_[j][idx[i]] = 1;
            }
        }
    }

    std::uint64_t count() const {
        std::uint64_t c = 0;
        for (std::size_t e = 0; e < edges_.size(); e += k_) {
            bool all = true;
            for (std::size_t j = 0; j < k_ && all; ++j)
                all = in_[j][edges_[e + j]];
            c += all ? 1 : 0;
        }
        return c;
    }

    // Applies the single swap that increases |d_A - d| most; returns the new
    // edge count, or nullopt at a local optimum.
    std::optional<std::uint64_t> best_swap(std::uint64_t edges_in, double prod) {
        for (auto& g : gain_)
            std::fill(g.begin(), g.end(), 0);
        for (std::size_t e = 0; e < edges_.size(); e += k_) {
            std::size_t missing = 0, lone = 0;
            for (std::size_t j = 0; j < k_; ++j)
                if (!in_[j][edges_[e + j]]) {
                    ++missing;
                    lone = j;
                }
            if (missing == 0) {
                for (std::size_t j = 0; j < k_; ++j)
                    ++gain_[j][edges_[e + j]];
            } else if (missing == 1) {
                ++gain_[lone][edges_[e + lone]];
            }
        }
        const double current = std::abs(static_cast<double>(edges_in) / prod - d_);
        double best = current + 1e-12;
        std::optional<std::uint64_t> best_count;
        std::size_t bj = 0, bout = 0, bin = 0;
        for (std::size_t j = 0; j < k_; ++j) {
            // Extremes of the gain inside and outside A_j, lowest index on ties.
            std::optional<std::size_t> in_min, in_max, out_min, out_max;
            for (std::size_t i = 0; i < in_[j].size(); ++i) {
                auto& lo = in_[j][i] ? in_min : out_min;
                auto& hi = in_[j][i] ? in_max : out_max;
                if (!lo || gain_[j][i] < gain_[j][*lo])
                    lo = i;
                if (!hi || gain_[j][i] > gain_[j][*hi])
                    hi = i;
            }
            if (!in_min || !out_max)
                continue;
            const std::pair<std::size_t, std::size_t> moves[2] = {{*in_min, *out_max}, {*in_max, *out_min}};
            for (auto [out, in] : moves) {
                const std::int64_t next = static_cast<std::int64_t>(edges_in) -
                                          static_cast<std::int64_t>(gain_[j][out]) +
                                          static_cast<std::int64_t>(gain_[j][in]);
                const double dev = std::abs(static_cast<double>(next) / prod - d_);
                if (dev > best) {
                    best = dev;
                    best_count = static_cast<std::uint64_t>(next);
                    bj = j;
                    bout = out;
                    bin = in;
                }
            }
        }
        if (best_count) {
            in_[bj][bout] = 0;
            in_[bj][bin] = 1;
        }
        return best_count;
    }

    const SetTuple& v_;
    const std::vector<std::uint32_t>& edges_;
    std::size_t k_;
    double eps_;
    double d_;
    std::vector<std::size_t> need_;
    std::vector<std::vector<char>> in_;
    std::vector<std::vector<std::uint64_t>> gain_;
};

std::uint64_t tuple_count(const std::vector<std::size_t>& per_part) {
    std::uint64_t total = 1;
    for (std::size_t c : per_part)
        total *= c;
    return total;
}

std::vector<std::size_t> decode(std::uint64_t index, const std::vector<std::size_t>& per_part) {
    std::vector<std::size_t> out(per_part.size());
    for (std::size_t j = per_part.size(); j-- > 0;) {
        out[j] = index % per_part[j];
        index /= per_part[j];
    }
    return out;
}

// Pieces of one part: clusters first, then exceptional pieces.
struct PartState {
    std::vector<VertexSet> clusters;
    std::vector<VertexSet> spare;
};

double energy(const KPartiteHypergraph& h, const std::vector<PartState>& parts) {
    const std::size_t k = parts.size();
    std::vector<std::int64_t> piece(h.vertex_count(), -1);
    std::vector<std::vector<double>> size(k);
    for (std::size_t j = 0; j < k; ++j) {
        std::int64_t id = 0;
        for (const auto* list : {&parts[j].clusters, &parts[j].spare})
            for (const auto& p : *list) {
                if (p.empty())
                    continue;
                for (Vertex v : p)
                    piece[v] = id;
                size[j].push_back(static_cast<double>(p.size()));
                ++id;
            }
    }
    std::unordered_map<std::uint64_t, std::uint64_t> counts;
    for (std::size_t i = 0; i < h.edge_count(); ++i) {
        std::uint64_t code = 0;
        for (std::size_t j = 0; j < k; ++j)
            code = code * size[j].size() + static_cast<std::uint64_t>(piece[h.edge(i)[j]]);
        ++counts[code];
    }
    double norm = 1;
    for (std::size_t j = 0; j < k; ++j)
        norm *= static_cast<double>(h.part_size(j));
    double total = 0;
    std::vector<std::uint64_t> keys;
    keys.reserve(counts.size());
    for (const auto& [code, c] : counts)
        keys.push_back(code);
    std::sort(keys.begin(), keys.end());
    for (std::uint64_t code : keys) {
        std::uint64_t rest = code;
        double prod = 1;
        for (std::size_t j = k; j-- > 0;) {
            prod *= size[j][rest % size[j].size()];
            rest /= size[j].size();
        }
        const double e = static_cast<double>(counts[code]);
        total += e * e / (prod * norm);
    }
    return total;
}

struct RoundTest {
    std::vector<RegularityResult> results;
    std::uint64_t refuted = 0;
};

RoundTest test_all(const KPartiteHypergraph& h, const std::vector<PartState>& parts, double eps,
                   std::uint64_t trials, std::uint64_t seed, unsigned workers) {
    std::vector<std::size_t> per;
    for (const auto& p : parts)
        per.push_back(p.clusters.size());
    RoundTest out;
    out.results.resize(tuple_count(per));
    parallel_for(out.results.size(), workers, [&](std::size_t idx) {
        const auto pick = decode(idx, per);
        SetTuple tuple(parts.size());
        for (std::size_t j = 0; j < parts.size(); ++j)
            tuple[j] = parts[j].clusters[pick[j]];
        out.results[idx] = regularity_test(h, tuple, eps,
                                           RegularityMode::sampled(trials, derive_seed(seed, stream::regularity, idx)));
    });
    for (const auto& r : out.results)
        out.refuted += r.verdict == RegularityVerdict::Refuted ? 1 : 0;
    return out;
}

std::vector<PartState> refine(const std::vector<PartState>& parts, const RoundTest& test, double eps,
                              std::size_t per_cluster) {
    const std::size_t k = parts.size();
    std::vector<std::size_t> per;
    for (const auto& p : parts)
        per.push_back(p.clusters.size());
    struct Cut {
        double deviation;
        std::size_t tuple;
        const VertexSet* set;
    };
    std::vector<std::vector<std::vector<Cut>>> cuts(k);
    for (std::size_t j = 0; j < k; ++j)
        cuts[j].resize(per[j]);
    for (std::size_t idx = 0; idx < test.results.size(); ++idx) {
        const auto& r = test.results[idx];
        if (!r.witness)
            continue;
        const auto pick = decode(idx, per);
        for (std::size_t j = 0; j < k; ++j)
            cuts[j][pick[j]].push_back({r.worst_deviation, idx, &(*r.witness)[j]});
    }

    // Venn atoms of every cluster, ordered by least vertex.
    std::vector<std::vector<std::vector<VertexSet>>> atoms(k);
    std::size_t largest = 1;
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t c = 0; c < per[j]; ++c) {
            auto& list = cuts[j][c];
            std::stable_sort(list.begin(), list.end(),
                             [](const Cut& a, const Cut& b) { return a.deviation > b.deviation; });
            if (per_cluster > 0 && list.size() > per_cluster)
                list.resize(per_cluster);
            std::map<std::vector<char>, VertexSet> split;
            for (Vertex v : parts[j].clusters[c]) {
                std::vector<char> sig;
                for (const auto& cut : list)
                    sig.push_back(std::binary_search(cut.set->begin(), cut.set->end(), v) ? 1 : 0);
                split[sig].push_back(v);
            }
            std::vector<VertexSet> ordered;
            for (auto& [sig, vs] : split)
                ordered.push_back(std::move(vs));
            std::sort(ordered.begin(), ordered.end(),
                      [](const VertexSet& a, const VertexSet& b) { return a[0] < b[0]; });
            for (const auto& atom : ordered)
                largest = std::max(largest, atom.size());
            atoms[j].push_back(std::move(ordered));
        }
    }

    // Common chunk size: least total remainder, larger on ties.
    const std::size_t m_old = parts[0].clusters.empty() ? 1 : parts[0].clusters[0].size();
    const std::size_t lo = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(eps * static_cast<double>(m_old) - 1e-9)));
    std::size_t s = lo;
    std::uint64_t best_loss = ~std::uint64_t{0};
    for (std::size_t cand = lo; cand <= std::max(lo, std::min(largest, m_old)); ++cand) {
        std::uint64_t loss = 0;
        for (const auto& part : atoms)
            for (const auto& cluster : part)
                for (const auto& atom : cluster)
                    loss += atom.size() % cand;
        if (loss <= best_loss) {
            best_loss = loss;
            s = cand;
        }
    }

    std::vector<PartState> out(k);
    for (std::size_t j = 0; j < k; ++j) {
        out[j].spare = parts[j].spare;
        for (const auto& cluster : atoms[j])
            for (const auto& atom : cluster) {
                const std::size_t chunks = atom.size() / s;
                for (std::size_t i = 0; i < chunks; ++i)
                    out[j].clusters.emplace_back(atom.begin() + static_cast<std::ptrdiff_t>(i * s),
                                                 atom.begin() + static_cast<std::ptrdiff_t>((i + 1) * s));
                if (chunks * s < atom.size())
                    out[j].spare.emplace_back(atom.begin() + static_cast<std::ptrdiff_t>(chunks * s), atom.end());
            }
    }
    return out;
}

} // namespace

Rational tuple_density(const KPartiteHypergraph& h, const SetTuple& a) {
    check_tuple(h, a);
    std::uint64_t den = 1;
    for (const auto& s : a)
        den *= s.size();
    return reduce(edge_count_between(h, a), den);
}

const char* to_string(RegularityVerdict v) {
    switch (v) {
    case RegularityVerdict::Certified:
        return "certified";
    case RegularityVerdict::Refuted:
        return "refuted";
    case RegularityVerdict::NoRefutationFound:
        return "no-refutation-found";
    }
    return "?";
}

RegularityResult regularity_test(const KPartiteHypergraph& h, const SetTuple& v, double eps,
                                 const RegularityMode& mode) {
    check_tuple(h, v);
    if (!(eps > 0 && eps < 1))
        throw Error(ErrorCode::BadParams, "epsilon must lie in (0, 1)");
    const Rational density = tuple_density(h, v);
    const auto edges = tuple_edges(h, v);
    RegularityResult r;
    if (mode.kind == RegularityMode::Kind::Exact) {
        r = exact_regularity(v, eps, mode.cap, edges, density.value());
    } else {
        r = SampledRegularity(v, edges, eps, density.value()).run(mode.trials, mode.seed);
    }
    r.density = density;
    return r;
}

RegPartition weak_regular_partition(const KPartiteHypergraph& h, double eps, std::size_t t0,
                                    std::uint64_t seed, const WeakRegOptions& options) {
    if (!(eps > 0 && eps < 1))
        throw Error(ErrorCode::BadParams, "epsilon must lie in (0, 1)");
    if (!h.is_balanced())
        throw Error(ErrorCode::BadPartSizes, "weak regular partition needs equal parts");
    const std::size_t k = static_cast<std::size_t>(h.k());
    const std::size_t n = h.part_size(0);
    if (t0 < 1 || n / t0 == 0)
        throw Error(ErrorCode::BadParams, "need 1 <= t0 <= part size");

    std::vector<PartState> parts(k);
    const std::size_t m = n / t0;
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t c = 0; c < t0; ++c) {
            VertexSet cluster;
            for (std::size_t i = 0; i < m; ++i)
                cluster.push_back(h.part_begin(j) + static_cast<Vertex>(c * m + i));
            parts[j].clusters.push_back(std::move(cluster));
        }
        if (t0 * m < n) {
            VertexSet rest;
            for (Vertex v = h.part_begin(j) + static_cast<Vertex>(t0 * m); v < h.part_end(j); ++v)
                rest.push_back(v);
            parts[j].spare.push_back(std::move(rest));
        }
    }

    RegPartition out;
    out.k = h.k();
    out.epsilon = eps;
    const double gain_floor = std::pow(eps, 2.0 * static_cast<double>(k)) / 2;
    double current_energy = energy(h, parts);
    out.energy_history.push_back(current_energy);
    for (std::size_t round = 0;; ++round) {
        RoundTest test = test_all(h, parts, eps, options.trials,
                                  derive_seed(seed, stream::regularity, round), options.workers);
        const double frac = static_cast<double>(test.refuted) / static_cast<double>(test.results.size());
        out.rounds = round + 1;
        if (frac <= eps) {
            out.stop_reason = "regular";
            break;
        }
        if (round + 1 >= options.round_cap) {
            out.stop_reason = "round-cap";
            out.round_cap_hit = true;
            break;
        }
        auto next = refine(parts, test, eps, options.witnesses_per_cluster);
        const double next_energy = energy(h, next);
        out.energy_history.push_back(next_energy);
        if (next_energy + 1e-12 < current_energy)
            out.energy_monotone = false;
        if (next_energy - current_energy < gain_floor) {
            out.stop_reason = "energy-gain";
            break;
        }
        bool empty_part = false;
        for (const auto& p : next)
            empty_part = empty_part || p.clusters.empty();
        if (empty_part) {
            out.stop_reason = "degenerate";
            break;
        }
        parts = std::move(next);
        current_energy = next_energy;
    }

    std::size_t t = parts[0].clusters.size();
    for (const auto& p : parts)
        t = std::min(t, p.clusters.size());
    for (auto& p : parts) {
        while (p.clusters.size() > t) {
            p.spare.push_back(std::move(p.clusters.back()));
            p.clusters.pop_back();
        }
    }
    out.t = t;
    out.m0 = t > 0 ? parts[0].clusters[0].size() : 0;
    out.energy = energy(h, parts);
    for (auto& p : parts) {
        out.clusters.push_back(p.clusters);
        for (const auto& s : p.spare)
            out.exceptional.insert(out.exceptional.end(), s.begin(), s.end());
    }
    std::sort(out.exceptional.begin(), out.exceptional.end());
    if (t > 0) {
        RoundTest final_test = test_all(h, parts, eps, options.trials,
                                        derive_seed(seed, stream::regularity, 1u << 20), options.workers);
        out.refuted_tuples = final_test.refuted;
        out.refuted_fraction =
            static_cast<double>(final_test.refuted) / static_cast<double>(final_test.results.size());
    } else {
        out.refuted_fraction = 1;
    }
    out.exceptional_within_bound =
        static_cast<double>(out.exceptional.size()) <= eps * static_cast<double>(h.vertex_count());
    return out;
}

bool validate_partition(const KPartiteHypergraph& h, const RegPartition& p, std::string* why) {
    auto fail = [why](std::string msg) {
        if (why)
            *why = std::move(msg);
        return false;
    };
    if (p.clusters.size() != static_cast<std::size_t>(h.k()))
        return fail("wrong number of parts");
    std::vector<char> seen(h.vertex_count(), 0);
    auto mark = [&](Vertex v) {
        if (v >= h.vertex_count() || seen[v])
            return false;
        seen[v] = 1;
        return true;
    };
    for (std::size_t j = 0; j < p.clusters.size(); ++j) {
        if (p.clusters[j].size() != p.t)
            return fail("part " + std::to_string(j) + " does not have t clusters");
        for (const auto& c : p.clusters[j]) {
            if (c.size() != p.m0)
                return fail("cluster size differs from m0");
            for (Vertex v : c)
                if (!mark(v) || h.part_of(v) != j)
                    return fail("cluster vertex repeated or outside its part");
        }
    }
    for (Vertex v : p.exceptional)
        if (!mark(v))
            return fail("exceptional vertex repeated");
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        return fail("partition does not cover V(H)");
    return true;
}

ClusterHypergraph cluster_hypergraph(const KPartiteHypergraph& h, const RegPartition& p, double eps,
                                     double d, const RegularityMode& mode, unsigned workers) {
    const std::size_t k = static_cast<std::size_t>(h.k());
    if (p.clusters.size() != k)
        throw Error(ErrorCode::BadParams, "partition does not match the host");
    std::vector<std::size_t> per(k, p.t);
    ClusterHypergraph out;
    out.d = d;
    out.epsilon = eps;
    out.provenance.resize(tuple_count(per));
    parallel_for(out.provenance.size(), workers, [&](std::size_t idx) {
        TupleRecord rec;
        rec.clusters = decode(idx, per);
        SetTuple tuple(k);
        for (std::size_t j = 0; j < k; ++j)
            tuple[j] = p.clusters[j][rec.clusters[j]];
        RegularityMode m = mode;
        if (m.kind == RegularityMode::Kind::Sampled)
            m.seed = derive_seed(mode.seed, stream::regularity, idx);
        auto r = regularity_test(h, tuple, eps, m);
        rec.density = r.density;
        rec.verdict = r.verdict;
        rec.edge = r.verdict != RegularityVerdict::Refuted && r.density.value() >= d;
        out.provenance[idx] = std::move(rec);
    });
    std::vector<VertexSet> edges;
    for (const auto& rec : out.provenance)
        if (rec.edge) {
            VertexSet e;
            for (std::size_t j = 0; j < k; ++j)
                e.push_back(static_cast<Vertex>(j * p.t + rec.clusters[j]));
            edges.push_back(std::move(e));
        }
    out.graph = KPartiteHypergraph(h.k(), per, edges);
    return out;
}

namespace {

// Calls fn(set, missing part) for every legal (k-1)-set of r.
template <class Fn>
void for_each_codegree_set(const KPartiteHypergraph& r, Fn&& fn) {
    const std::size_t k = static_cast<std::size_t>(r.k());
    for (std::size_t miss = 0; miss < k; ++miss) {
        std::vector<std::size_t> parts;
        for (std::size_t j = 0; j < k; ++j)
            if (j != miss)
                parts.push_back(j);
        bool empty = false;
        for (std::size_t j : parts)
            empty = empty || r.part_size(j) == 0;
        if (empty)
            continue;
        std::vector<std::size_t> pos(parts.size(), 0);
        VertexSet s(parts.size());
        while (true) {
            for (std::size_t i = 0; i < parts.size(); ++i)
                s[i] = r.part_begin(parts[i]) + static_cast<Vertex>(pos[i]);
            fn(s, miss);
            std::size_t i = parts.size();
            while (i > 0 && ++pos[i - 1] == r.part_size(parts[i - 1])) {
                pos[i - 1] = 0;
                --i;
            }
            if (i == 0)
                break;
        }
    }
}

} // namespace

CodegreeReport codegree_inheritance(const KPartiteHypergraph& r, double eps, double xi) {
    if (!r.is_balanced())
        throw Error(ErrorCode::BadPartSizes, "cluster hypergraph must have t clusters per part");
    const std::size_t k = static_cast<std::size_t>(r.k());
    CodegreeReport rep;
    rep.t = r.part_size(0);
    rep.threshold = (0.5 + eps / 4) * static_cast<double>(rep.t);
    rep.violations_by_missing_part.assign(k, 0);
    for_each_codegree_set(r, [&](const VertexSet& s, std::size_t miss) {
        const std::uint64_t deg = r.degree(s);
        ++rep.sets;
        ++rep.histogram[deg];
        if (static_cast<double>(deg) < rep.threshold) {
            ++rep.violations;
            ++rep.violations_by_missing_part[miss];
        }
    });
    rep.pass = static_cast<double>(rep.violations) <=
               xi * std::pow(static_cast<double>(rep.t), static_cast<double>(k) - 1);
    return rep;
}

ClusterMatching cluster_matching(const KPartiteHypergraph& r, std::optional<std::size_t> t0,
                                 std::uint64_t node_budget) {
    const std::size_t k = static_cast<std::size_t>(r.k());
    ClusterMatching out;
    std::vector<char> used(r.vertex_count(), 0);
    std::vector<std::size_t> free_count(k);
    for (std::size_t j = 0; j < k; ++j)
        free_count[j] = r.part_size(j);
    std::vector<std::uint32_t> chosen, best;
    bool stopped = false;

    auto search = [&](auto&& self, Vertex v) -> void {
        if (stopped)
            return;
        if (++out.nodes > node_budget) {
            stopped = true;
            return;
        }
        std::size_t bound = r.part_end(0) - v;
        for (std::size_t j = 1; j < k; ++j)
            bound = std::min(bound, free_count[j]);
        if (chosen.size() + bound <= best.size())
            return;
        if (v == r.part_end(0)) {
            best = chosen;
            return;
        }
        for (std::uint32_t ei : r.incident_edges(v)) {
            auto e = r.edge(ei);
            bool ok = true;
            for (Vertex x : e)
                ok = ok && !used[x];
            if (!ok)
                continue;
            for (std::size_t j = 0; j < k; ++j) {
                used[e[j]] = 1;
                --free_count[j];
            }
            chosen.push_back(ei);
            self(self, v + 1);
            chosen.pop_back();
            for (std::size_t j = 0; j < k; ++j) {
                used[e[j]] = 0;
                ++free_count[j];
            }
        }
        self(self, v + 1);
    };
    search(search, r.part_begin(0));
    out.optimal = !stopped;
    for (std::uint32_t ei : best) {
        auto e = r.edge(ei);
        out.edges.emplace_back(e.begin(), e.end());
    }
    for (std::size_t j = 0; j < k; ++j)
        out.leftover_per_part.push_back(r.part_size(j) - best.size());

    const std::size_t t = r.part_size(0);
    const std::size_t rem = t % k;
    out.delta_prime = (rem == 0 || rem == k - 1) ? (t + k - 1) / k : t / k;
    for_each_codegree_set(r, [&](const VertexSet& s, std::size_t) {
        out.low_degree_sets += r.degree(s) < out.delta_prime ? 1 : 0;
    });
    if (t0) {
        const std::int64_t limit = static_cast<std::int64_t>((k - 1) * *t0) - 1;
        bool met = true;
        for (std::size_t left : out.leftover_per_part)
            met = met && static_cast<std::int64_t>(left) <= limit;
        out.bound_met = met;
    }
    return out;
}

TilingReport tile_regular_tuple(const KPartiteHypergraph& h, const SetTuple& w, const PatternGraph& f,
                                double eps_star) {
    check_tuple(h, w);
    const std::size_t m0 = w[0].size();
    for (const auto& s : w)
        if (s.size() != m0)
            throw Error(ErrorCode::BadParams, "tuple clusters must have equal size");
    VertexSet within;
    for (const auto& s : w)
        within.insert(within.end(), s.begin(), s.end());
    std::sort(within.begin(), within.end());
    const auto left = static_cast<std::size_t>(std::floor(eps_star * static_cast<double>(m0)));
    return greedy_tiling_within(h, f, within, std::vector<std::size_t>(w.size(), left));
}

} // namespace hytile
