#pragma once

#include "hytile/hypergraph.hpp"

#include <optional>
#include <vector>

namespace hytile {

struct LatticeMembership {
    bool member = false;
    /// Coefficients over the generators with sum c_i g_i = target.
    std::optional<IndexVector> coefficients;
};

class Lattice;

/// Exact membership. Throws DimensionMismatch, or Overflow if an
/// intermediate leaves the int64 range.
LatticeMembership lattice_contains(const Lattice& lattice, const IndexVector& target);

/// Integer lattice spanned by a list of generators. The basis is the row
/// Hermite normal form of the generator matrix, kept together with the
/// unimodular rows that express each basis vector in the generators.
class Lattice {
public:
    Lattice(std::size_t dimension, std::vector<IndexVector> generators);

    std::size_t dimension() const { return dim_; }
    const std::vector<IndexVector>& generators() const { return generators_; }
    const std::vector<IndexVector>& basis() const { return basis_; }
    const std::vector<std::size_t>& pivots() const { return pivots_; }

private:
    friend LatticeMembership lattice_contains(const Lattice&, const IndexVector&);

    std::size_t dim_;
    std::vector<IndexVector> generators_;
    std::vector<IndexVector> basis_;
    std::vector<std::size_t> pivots_;
    std::vector<IndexVector> transform_;
};

} // namespace hytile
