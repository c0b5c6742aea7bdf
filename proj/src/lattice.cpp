#include "hytile/lattice.hpp"

#include "hytile/error.hpp"

#include <cstdlib>
#include <utility>

namespace hytile {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw Error(ErrorCode::Overflow, "lattice arithmetic left the int64 range");
    return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r))
        throw Error(ErrorCode::Overflow, "lattice arithmetic left the int64 range");
    return r;
}

// row -= q * other
void sub_multiple(IndexVector& row, const IndexVector& other, std::int64_t q) {
    if (q == 0)
        return;
    for (std::size_t i = 0; i < row.size(); ++i)
        row[i] = checked_sub(row[i], checked_mul(q, other[i]));
}

void negate(IndexVector& row) {
    for (auto& x : row)
        x = checked_sub(0, x);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

} // namespace

Lattice::Lattice(std::size_t dimension, std::vector<IndexVector> generators)
    : dim_(dimension), generators_(std::move(generators)) {
    const std::size_t r = generators_.size();
    for (const auto& g : generators_)
        if (g.size() != dim_)
            throw Error(ErrorCode::DimensionMismatch, "generator has the wrong dimension");

    std::vector<IndexVector> rows = generators_;
    std::vector<IndexVector> u(r, IndexVector(r, 0));
    for (std::size_t i = 0; i < r; ++i)
        u[i][i] = 1;

    std::size_t top = 0;
    for (std::size_t col = 0; col < dim_ && top < r; ++col) {
        // Euclid on column `col` among rows top..r-1.
        while (true) {
            std::size_t best = r;
            for (std::size_t i = top; i < r; ++i)
                if (rows[i][col] != 0 && (best == r || std::llabs(rows[i][col]) < std::llabs(rows[best][col])))
                    best = i;
            if (best == r)
                break;
            std::swap(rows[top], rows[best]);
            std::swap(u[top], u[best]);
            bool done = true;
            for (std::size_t i = top + 1; i < r; ++i) {
                if (rows[i][col] == 0)
                    continue;
                const std::int64_t q = rows[i][col] / rows[top][col];
                sub_multiple(rows[i], rows[top], q);
                sub_multiple(u[i], u[top], q);
                done = done && rows[i][col] == 0;
            }
            if (done)
                break;
        }
        if (rows[top][col] == 0)
            continue;
        if (rows[top][col] < 0) {
            negate(rows[top]);
            negate(u[top]);
        }
        for (std::size_t i = 0; i < top; ++i) {
            const std::int64_t q = floor_div(rows[i][col], rows[top][col]);
            sub_multiple(rows[i], rows[top], q);
            sub_multiple(u[i], u[top], q);
        }
        pivots_.push_back(col);
        ++top;
    }
    basis_.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(top));
    transform_.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(top));
}

LatticeMembership lattice_contains(const Lattice& lattice, const IndexVector& target) {
    if (target.size() != lattice.dim_)
        throw Error(ErrorCode::DimensionMismatch, "target has the wrong dimension");
    IndexVector rest = target;
    IndexVector x(lattice.basis_.size(), 0);
    for (std::size_t b = 0; b < lattice.basis_.size(); ++b) {
        const std::size_t col = lattice.pivots_[b];
        const std::int64_t pivot = lattice.basis_[b][col];
        if (rest[col] % pivot != 0)
            return {};
        x[b] = rest[col] / pivot;
        sub_multiple(rest, lattice.basis_[b], x[b]);
    }
    for (std::int64_t v : rest)
        if (v != 0)
            return {};
    IndexVector coeff(lattice.generators_.size(), 0);
    for (std::size_t b = 0; b < x.size(); ++b)
        for (std::size_t g = 0; g < coeff.size(); ++g)
            coeff[g] = checked_sub(coeff[g], checked_mul(-x[b], lattice.transform_[b][g]));
    return {true, coeff};
}

} // namespace hytile
