// Serial reference loops against the OpenMP kernels on model stiffness
// matrices. Argument: cells per side of the unit square mesh.

#include "fmgeig/fem.hpp"
#include "fmgeig/kernels.hpp"
#include "fmgeig/mesh.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

namespace {

using namespace fmgeig;

const SparseMatrix& stiffness(std::size_t nx) {
    static std::map<std::size_t, std::unique_ptr<SparseMatrix>> cache;
    auto& slot = cache[nx];
    if (!slot) {
        const Mesh mesh = unit_square_mesh(nx);
        slot = std::make_unique<SparseMatrix>(
            assemble_stiffness(mesh, DofMap(mesh), CoefficientField::laplace()));
    }
    return *slot;
}

template <bool Parallel>
void BM_spmv(benchmark::State& state) {
    const SparseMatrix& a = stiffness(static_cast<std::size_t>(state.range(0)));
    Vector x(a.cols(), 1.0), y(a.rows());
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::spmv(a, x, y);
        else
            kernels::serial::spmv(a, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * a.nnz()));
}

template <bool Parallel>
void BM_dot(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0) * state.range(0));
    Vector x(n, 0.5), y(n, 2.0);
    for (auto _ : state) {
        double d = Parallel ? kernels::dot(x, y) : kernels::serial::dot(x, y);
        benchmark::DoNotOptimize(d);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * n));
}

template <bool Parallel>
void BM_axpy(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0) * state.range(0));
    Vector x(n, 0.5), y(n, 2.0);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::axpy(1e-9, x, y);
        else
            kernels::serial::axpy(1e-9, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * n));
}

} // namespace

BENCHMARK(BM_spmv<false>)->Name("spmv/serial")->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_spmv<true>)->Name("spmv/omp")->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_dot<false>)->Name("dot/serial")->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_dot<true>)->Name("dot/omp")->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_axpy<false>)->Name("axpy/serial")->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_axpy<true>)->Name("axpy/omp")->RangeMultiplier(4)->Range(64, 1024);

BENCHMARK_MAIN();
