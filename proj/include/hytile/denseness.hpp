#pragma once

#include "hytile/hypergraph.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hytile {

/// One subset of every part, X_j inside part j.
using SubsetTuple = std::vector<VertexSet>;

struct SlackResult {
    double value = 0;
    SubsetTuple witness;
};

/// e_H(X_1..X_k) - p |X_1|...|X_k|.
double slack(const KPartiteHypergraph& h, double p, const SubsetTuple& x);

/// Exhaustive minimum of the slack over all subset tuples. The witness is the
/// least minimizer when each X_j is read as a bitmask of its part (bit i =
/// i-th vertex of the part) and tuples are compared part 1 first. Throws
/// TooLarge when the product of 2^{|part|} exceeds `cap`.
SlackResult min_slack_exact(const KPartiteHypergraph& h, double p,
                            std::uint64_t cap = std::uint64_t{1} << 24);

enum class DensenessVerdict { CertifiedDense, Refuted, NoRefutationFound };
const char* to_string(DensenessVerdict v);

struct DensenessMode {
    enum class Kind { Exact, Sampled } kind = Kind::Exact;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t cap = std::uint64_t{1} << 24;
    unsigned workers = 1;

    static DensenessMode exact(std::uint64_t cap = std::uint64_t{1} << 24) {
        DensenessMode m;
        m.cap = cap;
        return m;
    }
    static DensenessMode sampled(std::uint64_t trials, std::uint64_t seed, unsigned workers = 1) {
        DensenessMode m;
        m.kind = Kind::Sampled;
        m.trials = trials;
        m.seed = seed;
        m.workers = workers;
        return m;
    }
};

struct DensenessCertificate {
    double p = 0;
    double mu = 0;
    std::uint64_t vertex_count = 0;
    double normalization = 0;              // N^k
    std::optional<double> per_part_normalization; // (kn)^k, balanced hosts only
    DensenessVerdict verdict = DensenessVerdict::NoRefutationFound;
    std::optional<SubsetTuple> witness;
    std::optional<double> min_slack;       // exact mode
    std::optional<double> best_slack;      // sampled mode: least slack seen
    std::uint64_t trials = 0;
    std::uint64_t descent_steps = 0;
};

/// Checks e_H(X_1..X_k) >= p|X_1|...|X_k| - mu N^k, N = |V(H)|.
DensenessCertificate denseness_verdict(const KPartiteHypergraph& h, double p, double mu,
                                       const DensenessMode& mode);

} // namespace hytile
