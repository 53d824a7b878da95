#include "fmgeig/linalg.hpp"

#include "fmgeig/errors.hpp"
#include "fmgeig/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fmgeig {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_sparse(const SparseMatrix& s) {
    DenseMatrix m(s.rows(), s.cols());
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t k = s.row_ptr()[i]; k < s.row_ptr()[i + 1]; ++k)
            m(i, s.col_idx()[k]) = s.values()[k];
    return m;
}

double DenseMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_)
        m = std::max(m, std::abs(v));
    return m;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            t(j, i) = (*this)(i, j);
    return t;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionMismatch("dense multiply: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0)
                continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                c(i, j) += aik * b(k, j);
        }
    return c;
}

Vector operator*(const DenseMatrix& a, std::span<const double> x) {
    if (a.cols() != x.size())
        throw DimensionMismatch("dense matvec: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j)
            s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Vector spmv(const SparseMatrix& m, std::span<const double> x) {
    Vector y(m.rows());
    kernels::spmv(m, x, y);
    return y;
}

double energy_norm(const SparseMatrix& m, std::span<const double> v) {
    const Vector mv = spmv(m, v);
    const double q = kernels::dot(v, mv);
    if (q < -1e-14)
        throw NotPositiveDefinite("energy_norm: v^T M v is negative");
    return q <= 0.0 ? 0.0 : std::sqrt(q);
}

CgResult cg_solve(const SparseMatrix& m, std::span<const double> b, std::span<const double> x0,
                  std::size_t max_iters, double tol) {
    if (!m.square() || m.rows() != b.size() || b.size() != x0.size())
        throw DimensionMismatch("cg_solve: dimension mismatch");
    const std::size_t n = b.size();
    CgResult out;
    out.x.assign(x0.begin(), x0.end());
    Vector r(n), p(n), q(n);
    kernels::residual(m, b, out.x, r);
    double rr = kernels::dot(r, r);
    const double r0 = std::sqrt(rr);
    if (r0 == 0.0)
        return out;
    p = r;
    const double target = tol * r0;
    while (out.iterations < max_iters && std::sqrt(rr) > target) {
        kernels::spmv(m, p, q);
        const double pq = kernels::dot(p, q);
        if (!(pq > 0.0))
            throw NotPositiveDefinite("cg_solve: breakdown, p^T M p <= 0");
        const double alpha = rr / pq;
        kernels::axpy(alpha, p, out.x);
        kernels::axpy(-alpha, q, r);
        const double rr_new = kernels::dot(r, r);
        kernels::xpby(r, rr_new / rr, p);
        rr = rr_new;
        ++out.iterations;
    }
    out.residual = std::sqrt(rr) / r0;
    return out;
}

CgResult pcg_solve(const SparseMatrix& m, std::span<const double> b, std::span<const double> x0,
                   const Preconditioner& precond, std::size_t max_iters, double tol) {
    if (!m.square() || m.rows() != b.size() || b.size() != x0.size())
        throw DimensionMismatch("pcg_solve: dimension mismatch");
    const std::size_t n = b.size();
    CgResult out;
    out.x.assign(x0.begin(), x0.end());
    Vector r(n), z(n), p(n), q(n), r_prev(n);
    kernels::residual(m, b, out.x, r);
    const double r0 = std::sqrt(kernels::dot(r, r));
    if (r0 == 0.0)
        return out;
    std::fill(z.begin(), z.end(), 0.0);
    precond(r, z);
    p = z;
    double rz = kernels::dot(r, z);
    double rnorm = r0;
    const double target = tol * r0;
    while (out.iterations < max_iters && rnorm > target) {
        kernels::spmv(m, p, q);
        const double pq = kernels::dot(p, q);
        if (!(pq > 0.0))
            throw NotPositiveDefinite("pcg_solve: breakdown, p^T M p <= 0");
        const double alpha = rz / pq;
        kernels::axpy(alpha, p, out.x);
        r_prev = r;
        kernels::axpy(-alpha, q, r);
        rnorm = std::sqrt(kernels::dot(r, r));
        ++out.iterations;
        if (rnorm <= target)
            break;
        std::fill(z.begin(), z.end(), 0.0);
        precond(r, z);
        // Polak-Ribiere form tolerates a slightly varying preconditioner.
        double rz_new = kernels::dot(r, z);
        double num = rz_new - kernels::dot(r_prev, z);
        const double beta = std::max(0.0, num / rz);
        kernels::xpby(z, beta, p);
        rz = rz_new;
    }
    out.residual = rnorm / r0;
    return out;
}

Vector CholeskyFactor::solve(std::span<const double> b) const {
    if (b.size() != size())
        throw DimensionMismatch("CholeskyFactor::solve: dimension mismatch");
    Vector x(b.begin(), b.end());
    forward(x);
    backward(x);
    return x;
}

void CholeskyFactor::forward(std::span<double> b) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k)
            s -= lower_(i, k) * b[k];
        b[i] = s / lower_(i, i);
    }
}

void CholeskyFactor::backward(std::span<double> y) const {
    const std::size_t n = size();
    for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < n; ++k)
            s -= lower_(k, i) * y[k];
        y[i] = s / lower_(i, i);
    }
}

CholeskyFactor cholesky_dense(const DenseMatrix& m) {
    if (m.rows() != m.cols())
        throw DimensionMismatch("cholesky_dense: matrix is not square");
    const std::size_t n = m.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_diag = std::max(max_diag, std::abs(m(i, i)));
    DenseMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k)
            d -= l(j, k) * l(j, k);
        if (!(d > kCholeskyPivotTol * max_diag))
            throw NotPositiveDefinite("cholesky_dense: non-positive pivot at column " +
                                      std::to_string(j));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k)
                s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return CholeskyFactor(std::move(l));
}

PivotedCholesky pivoted_cholesky(const DenseMatrix& m, double rel_drop_tol) {
    if (m.rows() != m.cols())
        throw DimensionMismatch("pivoted_cholesky: matrix is not square");
    const std::size_t n = m.rows();
    DenseMatrix w = m;
    DenseMatrix l(n, n);
    PivotedCholesky out;
    out.perm.resize(n);
    std::iota(out.perm.begin(), out.perm.end(), std::size_t{0});
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_diag = std::max(max_diag, w(i, i));
    const double threshold = rel_drop_tol * max_diag;

    std::size_t k = 0;
    for (; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (w(i, i) > w(piv, piv))
                piv = i;
        if (!(w(piv, piv) > threshold))
            break;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(w(k, j), w(piv, j));
            for (std::size_t i = 0; i < n; ++i)
                std::swap(w(i, k), w(i, piv));
            for (std::size_t j = 0; j < k; ++j)
                std::swap(l(k, j), l(piv, j));
            std::swap(out.perm[k], out.perm[piv]);
        }
        const double lkk = std::sqrt(w(k, k));
        l(k, k) = lkk;
        for (std::size_t i = k + 1; i < n; ++i)
            l(i, k) = w(i, k) / lkk;
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j <= i; ++j) {
                w(i, j) -= l(i, k) * l(j, k);
                w(j, i) = w(i, j);
            }
    }
    out.rank = k;
    out.lower = DenseMatrix(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j)
            out.lower(i, j) = l(i, j);
    out.kept.assign(out.perm.begin(), out.perm.begin() + static_cast<std::ptrdiff_t>(k));
    out.dropped.assign(out.perm.begin() + static_cast<std::ptrdiff_t>(k), out.perm.end());
    std::sort(out.kept.begin(), out.kept.end());
    std::sort(out.dropped.begin(), out.dropped.end());
    return out;
}

std::vector<EigenPair> symmetric_eig_jacobi(const DenseMatrix& input) {
    if (input.rows() != input.cols())
        throw DimensionMismatch("symmetric_eig_jacobi: matrix is not square");
    const std::size_t n = input.rows();
    DenseMatrix a = input;
    DenseMatrix v = DenseMatrix::identity(n);

    double frob2 = 0.0;
    for (double x : a.data())
        frob2 += x * x;
    const double eps = std::numeric_limits<double>::epsilon();

    bool converged = n <= 1;
    for (std::size_t sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
        double off2 = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off2 += 2.0 * a(p, q) * a(p, q);
        if (off2 <= eps * eps * frob2 || off2 == 0.0) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                // Off-diagonal already negligible against both diagonals.
                if (std::abs(apq) <= eps * 1e-3 * std::min(std::abs(app), std::abs(aqq))) {
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    continue;
                }
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) {
        double off2 = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off2 += 2.0 * a(p, q) * a(p, q);
        if (off2 > eps * eps * frob2 && off2 != 0.0)
            throw ConvergenceError("symmetric_eig_jacobi: no convergence within sweep limit");
    }

    std::vector<EigenPair> pairs(n);
    for (std::size_t j = 0; j < n; ++j) {
        pairs[j].value = a(j, j);
        pairs[j].vector.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            pairs[j].vector[i] = v(i, j);
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const EigenPair& x, const EigenPair& y) { return x.value < y.value; });
    return pairs;
}

std::vector<EigenPair> generalized_eig_dense(const DenseMatrix& a, const DenseMatrix& b,
                                             std::size_t q) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.rows() != n || b.cols() != n)
        throw DimensionMismatch("generalized_eig_dense: shapes differ");
    if (q > n)
        throw InvalidArgument("generalized_eig_dense: q exceeds the dimension");
    const CholeskyFactor chol = cholesky_dense(b);

    // W = L^{-1} A, then C = L^{-1} W^T = L^{-1} A L^{-T}.
    DenseMatrix w(n, n);
    Vector col(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i)
            col[i] = a(i, j);
        chol.forward(col);
        for (std::size_t i = 0; i < n; ++i)
            w(i, j) = col[i];
    }
    DenseMatrix c(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i)
            col[i] = w(j, i);
        chol.forward(col);
        for (std::size_t i = 0; i < n; ++i)
            c(i, j) = col[i];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = 0.5 * (c(i, j) + c(j, i));
            c(i, j) = s;
            c(j, i) = s;
        }

    std::vector<EigenPair> pairs = symmetric_eig_jacobi(c);
    pairs.resize(q);
    for (auto& pair : pairs)
        chol.backward(pair.vector);
    return pairs;
}

} // namespace fmgeig
