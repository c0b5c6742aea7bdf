#include "hytile/denseness.hpp"

#include "hytile/error.hpp"
#include "hytile/parallel.hpp"
#include "hytile/rng.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace hytile {

namespace {

bool better(double candidate, double best) {
    if (std::isinf(best))
        return candidate < best;
    return candidate < best - 1e-9 * std::max(1.0, std::abs(best));
}

double product_of_sizes(const SubsetTuple& x) {
    double prod = 1;
    for (const auto& s : x)
        prod *= static_cast<double>(s.size());
    return prod;
}

SubsetTuple tuple_from_membership(const KPartiteHypergraph& h, const std::vector<char>& in) {
    SubsetTuple x(static_cast<std::size_t>(h.k()));
    for (std::size_t j = 0; j < x.size(); ++j)
        for (Vertex v = h.part_begin(j); v < h.part_end(j); ++v)
            if (in[v])
                x[j].push_back(v);
    return x;
}

// Edge counts of subset tuples. Uses one bitset of last-part neighbours per
// legal (k-1)-set of the first k-1 parts when that table is small enough.
class TupleCounter {
public:
    explicit TupleCounter(const KPartiteHypergraph& h) : h_(h), k_(static_cast<std::size_t>(h.k())) {
        const std::size_t last = k_ - 1;
        words_ = (h.part_size(last) + 63) / 64;
        std::uint64_t prefixes = 1;
        for (std::size_t j = 0; j < last; ++j)
            prefixes *= h.part_size(j);
        if (words_ == 0 || prefixes * words_ > (std::uint64_t{1} << 22))
            return;
        table_.assign(prefixes * words_, 0);
        for (std::size_t i = 0; i < h.edge_count(); ++i) {
            auto e = h.edge(i);
            std::uint64_t code = 0;
            for (std::size_t j = 0; j < last; ++j)
                code = code * h.part_size(j) + (e[j] - h.part_begin(j));
            const Vertex local = e[last] - h.part_begin(last);
            table_[code * words_ + local / 64] |= std::uint64_t{1} << (local % 64);
        }
    }

    std::uint64_t count(const std::vector<char>& in, const SubsetTuple& x) const {
        for (const auto& s : x)
            if (s.empty())
                return 0;
        if (table_.empty()) {
            std::uint64_t total = 0;
            for (std::size_t i = 0; i < h_.edge_count(); ++i) {
                bool all = true;
                for (Vertex v : h_.edge(i))
                    all = all && in[v];
                total += all ? 1 : 0;
            }
            return total;
        }
        const std::size_t last = k_ - 1;
        std::vector<std::uint64_t> mask(words_, 0);
        for (Vertex v : x[last]) {
            const Vertex local = v - h_.part_begin(last);
            mask[local / 64] |= std::uint64_t{1} << (local % 64);
        }
        std::uint64_t total = 0;
        std::vector<std::size_t> pos(last, 0);
        while (true) {
            std::uint64_t code = 0;
            for (std::size_t j = 0; j < last; ++j)
                code = code * h_.part_size(j) + (x[j][pos[j]] - h_.part_begin(j));
            const std::uint64_t* row = table_.data() + code * words_;
            for (std::size_t w = 0; w < words_; ++w)
                total += static_cast<std::uint64_t>(std::popcount(row[w] & mask[w]));
            std::size_t j = last;
            while (j > 0 && ++pos[j - 1] == x[j - 1].size()) {
                pos[j - 1] = 0;
                --j;
            }
            if (j == 0)
                return total;
        }
    }

private:
    const KPartiteHypergraph& h_;
    std::size_t k_;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> table_;
};

// Steepest descent over single-vertex toggles; returns the number of moves.
// inside[v]: edges within X through v. outside[v]: edges whose only vertex
// outside X is v.
std::uint64_t descend(const KPartiteHypergraph& h, double p, std::vector<char>& in,
                      std::uint64_t max_steps) {
    const std::size_t n = h.vertex_count();
    const std::size_t k = static_cast<std::size_t>(h.k());
    std::vector<std::int64_t> inside(n, 0), outside(n, 0);
    std::vector<double> size(k, 0.0);
    for (std::size_t v = 0; v < n; ++v)
        if (in[v])
            size[h.part_of(static_cast<Vertex>(v))] += 1;
    for (std::size_t i = 0; i < h.edge_count(); ++i) {
        auto e = h.edge(i);
        std::size_t missing = 0;
        Vertex lone = 0;
        for (Vertex v : e)
            if (!in[v]) {
                ++missing;
                lone = v;
            }
        if (missing == 0) {
            for (Vertex v : e)
                ++inside[v];
        } else if (missing == 1) {
            ++outside[lone];
        }
    }

    std::uint64_t steps = 0;
    while (steps < max_steps) {
        std::vector<double> others(k, 1.0);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t l = 0; l < k; ++l)
                if (l != j)
                    others[j] *= size[l];
        double best = 0;
        std::optional<Vertex> move;
        for (std::size_t v = 0; v < n; ++v) {
            const double rest = p * others[h.part_of(static_cast<Vertex>(v))];
            const double delta = in[v] ? rest - static_cast<double>(inside[v])
                                       : static_cast<double>(outside[v]) - rest;
            if (better(delta, best)) {
                best = delta;
                move = static_cast<Vertex>(v);
            }
        }
        if (!move)
            break;
        const Vertex w = *move;
        const std::int64_t sign = in[w] ? -1 : 1;
        for (std::uint32_t ei : h.incident_edges(w)) {
            auto e = h.edge(ei);
            // State of the edge with w counted as outside X.
            std::size_t missing = 0;
            Vertex lone = w;
            for (Vertex v : e)
                if (v != w && !in[v]) {
                    ++missing;
                    lone = v;
                }
            if (missing == 0) {
                outside[w] -= sign;
                for (Vertex v : e)
                    inside[v] += sign;
            } else if (missing == 1) {
                outside[lone] += sign;
            }
        }
        in[w] = !in[w];
        size[h.part_of(w)] += static_cast<double>(sign);
        ++steps;
    }
    return steps;
}

} // namespace

const char* to_string(DensenessVerdict v) {
    switch (v) {
    case DensenessVerdict::CertifiedDense:
        return "certified-dense";
    case DensenessVerdict::Refuted:
        return "refuted";
    case DensenessVerdict::NoRefutationFound:
        return "no-refutation-found";
    }
    return "?";
}

double slack(const KPartiteHypergraph& h, double p, const SubsetTuple& x) {
    if (x.size() != static_cast<std::size_t>(h.k()))
        throw Error(ErrorCode::BadArity, "subset tuple needs one set per part");
    return static_cast<double>(edge_count_between(h, x)) - p * product_of_sizes(x);
}

SlackResult min_slack_exact(const KPartiteHypergraph& h, double p, std::uint64_t cap) {
    const std::size_t k = static_cast<std::size_t>(h.k());
    const std::size_t last = k - 1;
    std::size_t bits = 0;
    for (std::size_t j = 0; j < k; ++j)
        bits += h.part_size(j);
    if (bits >= 63 || (std::uint64_t{1} << bits) > cap)
        throw Error(ErrorCode::TooLarge, "exact denseness needs 2^" + std::to_string(bits) +
                                             " tuples, cap is " + std::to_string(cap));

    // Part 1 occupies the most significant bits of the prefix mask.
    std::vector<std::size_t> shift(last, 0);
    std::size_t prefix_bits = 0;
    for (std::size_t j = last; j-- > 0;) {
        shift[j] = prefix_bits;
        prefix_bits += h.part_size(j);
    }
    const std::size_t n_last = h.part_size(last);
    std::vector<std::vector<std::uint64_t>> by_last(n_last);
    for (std::size_t i = 0; i < h.edge_count(); ++i) {
        auto e = h.edge(i);
        std::uint64_t mask = 0;
        for (std::size_t j = 0; j < last; ++j)
            mask |= std::uint64_t{1} << (shift[j] + (e[j] - h.part_begin(j)));
        by_last[e[last] - h.part_begin(last)].push_back(mask);
    }

    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_prefix = 0;
    std::vector<char> best_last(n_last, 0);
    std::vector<char> chosen(n_last, 0);
    const std::uint64_t prefix_count = std::uint64_t{1} << prefix_bits;
    for (std::uint64_t prefix = 0; prefix < prefix_count; ++prefix) {
        double prod = 1;
        for (std::size_t j = 0; j < last; ++j) {
            const std::uint64_t part_mask =
                (prefix >> shift[j]) & ((std::uint64_t{1} << h.part_size(j)) - 1);
            prod *= std::popcount(part_mask);
        }
        std::uint64_t edges = 0, taken = 0;
        for (std::size_t v = 0; v < n_last; ++v) {
            std::uint64_t c = 0;
            for (std::uint64_t m : by_last[v])
                c += (m & ~prefix) == 0 ? 1 : 0;
            chosen[v] = static_cast<double>(c) < p * prod;
            if (chosen[v]) {
                edges += c;
                ++taken;
            }
        }
        const double value = static_cast<double>(edges) - p * (prod * static_cast<double>(taken));
        if (better(value, best)) {
            best = value;
            best_prefix = prefix;
            best_last = chosen;
        }
    }

    SlackResult out;
    out.value = best;
    out.witness.assign(k, {});
    for (std::size_t j = 0; j < last; ++j)
        for (std::size_t i = 0; i < h.part_size(j); ++i)
            if ((best_prefix >> (shift[j] + i)) & 1)
                out.witness[j].push_back(h.part_begin(j) + static_cast<Vertex>(i));
    for (std::size_t v = 0; v < n_last; ++v)
        if (best_last[v])
            out.witness[last].push_back(h.part_begin(last) + static_cast<Vertex>(v));
    return out;
}

DensenessCertificate denseness_verdict(const KPartiteHypergraph& h, double p, double mu,
                                       const DensenessMode& mode) {
    if (!(p > 0 && p < 1) || mu < 0)
        throw Error(ErrorCode::BadParams, "need 0 < p < 1 and mu >= 0");
    const std::size_t k = static_cast<std::size_t>(h.k());
    DensenessCertificate cert;
    cert.p = p;
    cert.mu = mu;
    cert.vertex_count = h.vertex_count();
    cert.normalization = std::pow(static_cast<double>(h.vertex_count()), static_cast<double>(k));
    if (h.is_balanced())
        cert.per_part_normalization =
            std::pow(static_cast<double>(k * h.part_size(0)), static_cast<double>(k));
    const double threshold = -mu * cert.normalization;

    if (mode.kind == DensenessMode::Kind::Exact) {
        SlackResult r = min_slack_exact(h, p, mode.cap);
        cert.min_slack = r.value;
        if (r.value >= threshold) {
            cert.verdict = DensenessVerdict::CertifiedDense;
        } else {
            cert.verdict = DensenessVerdict::Refuted;
            cert.witness = std::move(r.witness);
        }
        return cert;
    }

    const std::size_t n = h.vertex_count();
    TupleCounter counter(h);
    auto draw = [&](std::uint64_t trial) {
        const std::uint64_t s = derive_seed(mode.seed, stream::denseness_trial, trial);
        std::vector<char> in(n);
        for (std::size_t v = 0; v < n; ++v)
            in[v] = unit_at(s, 0, v) < 0.5;
        return in;
    };
    std::vector<double> values(mode.trials);
    parallel_for(mode.trials, mode.workers, [&](std::size_t t) {
        auto in = draw(t);
        SubsetTuple x = tuple_from_membership(h, in);
        values[t] = static_cast<double>(counter.count(in, x)) - p * product_of_sizes(x);
    });
    cert.trials = mode.trials;

    std::vector<char> start(n, 0);
    double best = 0;
    for (std::size_t t = 0; t < values.size(); ++t)
        if (t == 0 || better(values[t], best)) {
            best = values[t];
            start = draw(t);
        }
    cert.descent_steps = descend(h, p, start, 10 * static_cast<std::uint64_t>(n));
    SubsetTuple x = tuple_from_membership(h, start);
    const double final_value = static_cast<double>(counter.count(start, x)) - p * product_of_sizes(x);
    cert.best_slack = std::min(final_value, values.empty() ? final_value : best);
    if (final_value < threshold) {
        cert.verdict = DensenessVerdict::Refuted;
        cert.witness = std::move(x);
    } else {
        cert.verdict = DensenessVerdict::NoRefutationFound;
    }
    return cert;
}

} // namespace hytile
