#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace fmgeig {

using Vector = std::vector<double>;

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed-row matrix. Column indices are strictly increasing within each
/// row. Square instances hold the discrete bilinear forms; rectangular ones
/// hold inter-level transfer operators.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Takes ownership of CSR arrays; throws InvalidArgument if they are inconsistent.
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                 std::vector<std::size_t> col_idx, std::vector<double> values);

    /// Duplicate (row, col) entries are summed in input order.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                      std::vector<Triplet> triplets);
    static SparseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }
    bool square() const noexcept { return rows_ == cols_; }

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    /// Entry lookup by binary search; structural zeros read as 0.
    double at(std::size_t row, std::size_t col) const;

    double max_abs() const noexcept;
    SparseMatrix transpose() const;

    /// Exact structural and numerical symmetry.
    bool is_symmetric() const;
    /// max |M - M^T| over all entries.
    double symmetry_defect() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

/// C = A * B.
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// P^T A P.
SparseMatrix galerkin_product(const SparseMatrix& p, const SparseMatrix& a);

/// A + scale * B (same shape).
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double scale = 1.0);

/// MatrixMarket coordinate (general, real) text.
void write_matrix_market(const SparseMatrix& m, std::ostream& out);
SparseMatrix read_matrix_market(std::istream& in);

} // namespace fmgeig
