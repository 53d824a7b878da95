#pragma once

// Data-parallel vector and CSR kernels. The functions in `kernels` use
// OpenMP; `kernels::serial` holds the straightforward reference loops that
// tests and benchmarks compare against.
//
// Every parallel kernel is deterministic for any thread count: spmv writes
// each row independently, and reductions sum fixed-size chunks whose
// partials are combined in chunk order.

#include "fmgeig/sparse_matrix.hpp"

#include <cstddef>
#include <span>

namespace fmgeig::kernels {

/// Reduction chunk length; independent of the thread count.
inline constexpr std::size_t kReductionChunk = 4096;

void spmv(const SparseMatrix& m, std::span<const double> x, std::span<double> y);
/// y = b - M x
void residual(const SparseMatrix& m, std::span<const double> b, std::span<const double> x,
              std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
/// y += a x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// y = x + b y
void xpby(std::span<const double> x, double b, std::span<double> y);
void scale(double a, std::span<double> x);

/// Number of OpenMP threads the kernels will use (1 without OpenMP).
int max_threads();
void set_threads(int n);

namespace serial {

void spmv(const SparseMatrix& m, std::span<const double> x, std::span<double> y);
void residual(const SparseMatrix& m, std::span<const double> b, std::span<const double> x,
              std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double b, std::span<double> y);
void scale(double a, std::span<double> x);

} // namespace serial

} // namespace fmgeig::kernels
