#include "fmgeig/kernels.hpp"

#include "fmgeig/errors.hpp"

#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fmgeig::kernels {

namespace {

void check_spmv(const SparseMatrix& m, std::size_t nx, std::size_t ny) {
    if (m.cols() != nx || m.rows() != ny)
        throw DimensionMismatch("spmv: vector length does not match matrix shape");
}

void check_same(std::size_t a, std::size_t b) {
    if (a != b)
        throw DimensionMismatch("vector lengths differ");
}

using Index = std::ptrdiff_t;

} // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0)
        omp_set_num_threads(n);
#else
    (void)n;
#endif
}

void spmv(const SparseMatrix& m, std::span<const double> x, std::span<double> y) {
    check_spmv(m, x.size(), y.size());
    const auto rp = m.row_ptr();
    const auto ci = m.col_idx();
    const auto v = m.values();
    const Index n = static_cast<Index>(m.rows());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
            sum += v[k] * x[ci[k]];
        y[i] = sum;
    }
}

void residual(const SparseMatrix& m, std::span<const double> b, std::span<const double> x,
              std::span<double> y) {
    check_spmv(m, x.size(), y.size());
    check_same(b.size(), y.size());
    const auto rp = m.row_ptr();
    const auto ci = m.col_idx();
    const auto v = m.values();
    const Index n = static_cast<Index>(m.rows());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
            sum += v[k] * x[ci[k]];
        y[i] = b[i] - sum;
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    check_same(x.size(), y.size());
    const std::size_t n = x.size();
    const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
    if (chunks <= 1) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += x[i] * y[i];
        return s;
    }
    std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
    for (Index c = 0; c < static_cast<Index>(chunks); ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * kReductionChunk;
        const std::size_t hi = std::min(n, lo + kReductionChunk);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            s += x[i] * y[i];
        partial[c] = s;
    }
    double s = 0.0;
    for (double p : partial)
        s += p;
    return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    check_same(x.size(), y.size());
    const Index n = static_cast<Index>(x.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i)
        y[i] += a * x[i];
}

void xpby(std::span<const double> x, double b, std::span<double> y) {
    check_same(x.size(), y.size());
    const Index n = static_cast<Index>(x.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i)
        y[i] = x[i] + b * y[i];
}

void scale(double a, std::span<double> x) {
    const Index n = static_cast<Index>(x.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i)
        x[i] *= a;
}

} // namespace fmgeig::kernels
