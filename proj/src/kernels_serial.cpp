#include "fmgeig/kernels.hpp"

#include "fmgeig/errors.hpp"

namespace fmgeig::kernels::serial {

void spmv(const SparseMatrix& m, std::span<const double> x, std::span<double> y) {
    if (m.cols() != x.size() || m.rows() != y.size())
        throw DimensionMismatch("spmv: vector length does not match matrix shape");
    const auto rp = m.row_ptr();
    const auto ci = m.col_idx();
    const auto v = m.values();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
            sum += v[k] * x[ci[k]];
        y[i] = sum;
    }
}

void residual(const SparseMatrix& m, std::span<const double> b, std::span<const double> x,
              std::span<double> y) {
    if (b.size() != y.size())
        throw DimensionMismatch("residual: vector lengths differ");
    spmv(m, x, y);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = b[i] - y[i];
}

double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw DimensionMismatch("dot: vector lengths differ");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += x[i] * y[i];
    return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size())
        throw DimensionMismatch("axpy: vector lengths differ");
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += a * x[i];
}

void xpby(std::span<const double> x, double b, std::span<double> y) {
    if (x.size() != y.size())
        throw DimensionMismatch("xpby: vector lengths differ");
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = x[i] + b * y[i];
}

void scale(double a, std::span<double> x) {
    for (double& v : x)
        v *= a;
}

} // namespace fmgeig::kernels::serial
