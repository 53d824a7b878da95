#pragma once

#include "fmgeig/sparse_matrix.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fmgeig {

/// Row-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix from_sparse(const SparseMatrix& m);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<const double> data() const noexcept { return data_; }

    double max_abs() const noexcept;
    DenseMatrix transpose() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
Vector operator*(const DenseMatrix& a, std::span<const double> x);

Vector spmv(const SparseMatrix& m, std::span<const double> x);

/// sqrt(v^T M v). Round-off down to -1e-14 is clamped to zero; anything
/// more negative raises NotPositiveDefinite.
double energy_norm(const SparseMatrix& m, std::span<const double> v);

/// Result of a (preconditioned) conjugate gradient run. `residual` is the
/// final Euclidean residual norm relative to the initial one.
struct CgResult {
    Vector x;
    std::size_t iterations = 0;
    double residual = 0.0;
};

/// Applies z = M^{-1} r.
using Preconditioner = std::function<void(std::span<const double> r, std::span<double> z)>;

/// Plain CG from x0 until ||b - Mx|| <= tol * ||b - M x0|| or max_iters.
/// Breakdown (p^T M p <= 0) raises NotPositiveDefinite.
CgResult cg_solve(const SparseMatrix& m, std::span<const double> b, std::span<const double> x0,
                  std::size_t max_iters, double tol);

CgResult pcg_solve(const SparseMatrix& m, std::span<const double> b, std::span<const double> x0,
                   const Preconditioner& precond, std::size_t max_iters, double tol);

/// Lower-triangular factor L with L L^T = M.
class CholeskyFactor {
public:
    explicit CholeskyFactor(DenseMatrix lower) : lower_(std::move(lower)) {}

    const DenseMatrix& lower() const noexcept { return lower_; }
    std::size_t size() const noexcept { return lower_.rows(); }

    /// Solves M x = b.
    Vector solve(std::span<const double> b) const;
    /// Solves L y = b in place.
    void forward(std::span<double> b) const;
    /// Solves L^T x = y in place.
    void backward(std::span<double> y) const;

private:
    DenseMatrix lower_;
};

/// Relative pivot threshold below which cholesky_dense reports failure.
inline constexpr double kCholeskyPivotTol = 1e-14;

CholeskyFactor cholesky_dense(const DenseMatrix& m);

/// Diagonal-pivoted Cholesky: P^T M P = L L^T on the retained columns.
/// Elimination stops once the largest remaining pivot drops to
/// rel_drop_tol * max(diag(M)); the remaining columns are reported as dropped.
struct PivotedCholesky {
    DenseMatrix lower;               ///< n x rank, rows in permuted order
    std::vector<std::size_t> perm;   ///< perm[k] = original index of pivot k
    std::size_t rank = 0;
    std::vector<std::size_t> kept;   ///< original indices of retained columns, ascending
    std::vector<std::size_t> dropped;///< original indices of dropped columns, ascending
};

PivotedCholesky pivoted_cholesky(const DenseMatrix& m, double rel_drop_tol);

struct EigenPair {
    double value = 0.0;
    Vector vector;
};

/// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
/// Returns pairs ascending by value (stable with respect to the Jacobi index).
inline constexpr std::size_t kJacobiMaxSweeps = 100;
std::vector<EigenPair> symmetric_eig_jacobi(const DenseMatrix& a);

/// q smallest eigenpairs of A y = lambda B y with B-orthonormal vectors.
/// B = L L^T, Jacobi on L^{-1} A L^{-T}, back substitution.
std::vector<EigenPair> generalized_eig_dense(const DenseMatrix& a, const DenseMatrix& b,
                                             std::size_t q);

} // namespace fmgeig
