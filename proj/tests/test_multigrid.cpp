#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fmgeig/errors.hpp"
#include "fmgeig/fem.hpp"
#include "fmgeig/linalg.hpp"
#include "fmgeig/mesh.hpp"
#include "fmgeig/multigrid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace fmgeig;

namespace {

Vector random_vector(std::size_t n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Vector v(n);
    for (double& x : v)
        x = d(gen);
    return v;
}

Vector difference(const Vector& a, const Vector& b) {
    Vector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        d[i] = a[i] - b[i];
    return d;
}

/// Largest per-cycle energy error reduction over `cycles` V-cycles.
double contraction(const MGContext& ctx, std::size_t level, std::size_t cycles, unsigned seed) {
    const SparseMatrix& a = ctx.stiffness(level);
    const Vector f = random_vector(a.rows(), seed);
    const Vector exact = cg_solve(a, f, Vector(a.rows(), 0.0), 10000, 1e-14).x;
    Vector x = random_vector(a.rows(), seed + 1);
    double theta = 0.0;
    double err = energy_norm(a, difference(x, exact));
    for (std::size_t c = 0; c < cycles; ++c) {
        x = v_cycle(ctx, level, f, x);
        const double next = energy_norm(a, difference(x, exact));
        theta = std::max(theta, next / err);
        err = next;
    }
    return theta;
}

MGContext square_context(std::size_t nx, std::size_t levels, CycleSettings settings = {}) {
    return build_mg_context(build_hierarchy(unit_square_mesh(nx), levels),
                            CoefficientField::laplace(), settings);
}

} // namespace

TEST_CASE("single-level context solves exactly") {
    const MGContext ctx = square_context(4, 1);
    const SparseMatrix& a = ctx.stiffness(0);
    const Vector f = random_vector(a.rows(), 1);
    const Vector x = v_cycle(ctx, 0, f, Vector(a.rows(), 0.0));
    Vector r(a.rows());
    const Vector ax = spmv(a, x);
    for (std::size_t i = 0; i < r.size(); ++i)
        CHECK(std::abs(ax[i] - f[i]) <= 1e-12);
}

TEST_CASE("transfer operators") {
    const MGContext ctx = square_context(4, 3);
    for (std::size_t k = 1; k < 3; ++k) {
        CHECK(ctx.prolongation(k).rows() == ctx.n_dofs(k));
        CHECK(ctx.prolongation(k).cols() == ctx.n_dofs(k - 1));
        CHECK(ctx.restriction(k).rows() == ctx.n_dofs(k - 1));
        CHECK(ctx.restriction(k).cols() == ctx.n_dofs(k));
        // Nested spaces: the fine forms restricted to the coarse space are the coarse forms.
        const SparseMatrix ga = galerkin_product(ctx.prolongation(k), ctx.stiffness(k));
        CHECK(add(ga, ctx.stiffness(k - 1), -1.0).max_abs() <= 1e-10);
        const SparseMatrix gb = galerkin_product(ctx.prolongation(k), ctx.mass(k));
        CHECK(add(gb, ctx.mass(k - 1), -1.0).max_abs() <= 1e-12);
    }
    CHECK_THROWS_AS(ctx.prolongation(0), InvalidArgument);
    CHECK_THROWS_AS(ctx.prolongation(3), InvalidArgument);
    const CoarseSpace& cs = ctx.coarse_space(2);
    CHECK(cs.prolongation.rows() == ctx.n_dofs(2));
    CHECK(cs.prolongation.cols() == ctx.n_dofs(0));
    CHECK(add(cs.stiffness, ctx.stiffness(0), -1.0).max_abs() <= 1e-10);
}

TEST_CASE("V-cycle fixed points") {
    const MGContext ctx = square_context(4, 3);
    const std::size_t n = ctx.n_dofs(2);
    for (double v : v_cycle(ctx, 2, Vector(n, 0.0), Vector(n, 0.0)))
        CHECK(v == 0.0);
    const Vector xs = random_vector(n, 4);
    const Vector f = spmv(ctx.stiffness(2), xs);
    const Vector out = v_cycle(ctx, 2, f, xs);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(out[i] - xs[i]) <= 1e-12);
}

TEST_CASE("V-cycle contraction") {
    for (Smoother s : {Smoother::ConjugateGradient, Smoother::SymmetricGaussSeidel}) {
        const MGContext ctx = square_context(4, 4, {s, 2});
        CHECK(contraction(ctx, 3, 6, 7) <= 0.35);
    }
}

TEST_CASE("contraction is uniform in the number of levels") {
    double lo = 1.0, hi = 0.0;
    for (std::size_t levels : {3, 4, 5}) {
        const MGContext ctx = square_context(4, levels);
        const double theta = contraction(ctx, levels - 1, 5, 11);
        lo = std::min(lo, theta);
        hi = std::max(hi, theta);
    }
    CHECK(hi - lo < 0.1);
}

TEST_CASE("mg_solve") {
    const MGContext ctx = square_context(4, 3);
    const SparseMatrix& a = ctx.stiffness(2);
    const Vector f = random_vector(a.rows(), 21);
    const Vector exact = cholesky_dense(DenseMatrix::from_sparse(a)).solve(f);
    const Vector x0(a.rows(), 0.0);
    const double e0 = energy_norm(a, difference(x0, exact));
    const double theta = contraction(ctx, 2, 1, 21);
    const double e1 = energy_norm(a, difference(mg_solve(ctx, 2, f, x0, 1), exact));
    const double e2 = energy_norm(a, difference(mg_solve(ctx, 2, f, x0, 2), exact));
    CHECK(e1 < e0);
    CHECK(e2 <= e1);
    CHECK(e2 <= 0.35 * 0.35 * e0);
    CHECK(theta < 1.0);
    const Vector many = mg_solve(ctx, 2, f, x0, 30);
    for (std::size_t i = 0; i < many.size(); ++i)
        CHECK(std::abs(many[i] - exact[i]) <= 1e-9 * (1.0 + std::abs(exact[i])));
    CHECK(energy_functional(a, f, many) <= energy_functional(a, f, x0));
    CHECK_THROWS_AS(mg_solve(ctx, 2, f, x0, 0), InvalidArgument);
}

TEST_CASE("SGS V-cycle is an affine map") {
    const MGContext ctx = square_context(4, 3, {Smoother::SymmetricGaussSeidel, 2});
    const std::size_t n = ctx.n_dofs(2);
    const Vector f1 = random_vector(n, 31), f2 = random_vector(n, 32);
    const Vector x1 = random_vector(n, 33), x2 = random_vector(n, 34);
    const double a = 0.7, b = -1.3;
    Vector fc(n), xc(n);
    for (std::size_t i = 0; i < n; ++i) {
        fc[i] = a * f1[i] + b * f2[i];
        xc[i] = a * x1[i] + b * x2[i];
    }
    const Vector y1 = v_cycle(ctx, 2, f1, x1);
    const Vector y2 = v_cycle(ctx, 2, f2, x2);
    const Vector yc = v_cycle(ctx, 2, fc, xc);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(yc[i] - (a * y1[i] + b * y2[i])) <= 1e-12);
}

TEST_CASE("SGS V-cycle from zero is homogeneous in f") {
    const MGContext ctx = square_context(4, 4, {Smoother::SymmetricGaussSeidel, 2});
    const std::size_t n = ctx.n_dofs(3);
    const Vector f = random_vector(n, 51);
    Vector f2 = f;
    for (double& v : f2)
        v *= 2.0;
    const Vector y = v_cycle(ctx, 3, f, Vector(n, 0.0));
    const Vector y2 = v_cycle(ctx, 3, f2, Vector(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        CHECK(y2[i] == 2.0 * y[i]);
}

TEST_CASE("work accounting and argument checks") {
    const MGContext ctx = square_context(4, 3);
    const std::size_t n = ctx.n_dofs(2);
    WorkCounter work;
    const Vector f = random_vector(n, 41);
    v_cycle(ctx, 2, f, Vector(n, 0.0), &work);
    // two smoothing phases of nu = 2 on levels 2 and 1
    CHECK(work.total() == 4 * (ctx.n_dofs(2) + ctx.n_dofs(1)));
    CHECK(work.per_level().at(2) == 4 * ctx.n_dofs(2));

    CHECK_THROWS_AS(v_cycle(ctx, 3, f, f), InvalidArgument);
    CHECK_THROWS_AS(v_cycle(ctx, 1, f, f), DimensionMismatch);
    CHECK_THROWS_AS(build_mg_context(build_hierarchy(unit_square_mesh(2), 2),
                                     CoefficientField::laplace(), {Smoother::ConjugateGradient, 0}),
                    InvalidArgument);
}
