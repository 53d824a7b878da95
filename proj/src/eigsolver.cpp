#include "fmgeig/eigsolver.hpp"

#include "fmgeig/errors.hpp"
#include "fmgeig/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace fmgeig {

void SolverConfig::validate() const {
    if (q == 0 || m == 0 || p == 0 || nu == 0)
        throw InvalidArgument("SolverConfig: q, m, p and nu must all be positive");
    if (initial_level < coarse_index)
        throw InvalidArgument("SolverConfig: initial_level below coarse_index");
    if (!(gram_drop_tol >= 0.0) || gram_drop_tol >= 1.0)
        throw InvalidArgument("SolverConfig: gram_drop_tol must lie in [0, 1)");
}

double orthonormality_defect(const SparseMatrix& mass, std::span<const Vector> vectors) {
    double defect = 0.0;
    for (std::size_t j = 0; j < vectors.size(); ++j) {
        const Vector bj = spmv(mass, vectors[j]);
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            const double target = i == j ? 1.0 : 0.0;
            defect = std::max(defect, std::abs(kernels::dot(vectors[i], bj) - target));
        }
    }
    return defect;
}

void b_orthonormalize(const SparseMatrix& mass, std::vector<Vector>& vectors) {
    for (std::size_t j = 0; j < vectors.size(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            const Vector bj = spmv(mass, vectors[j]);
            for (std::size_t i = 0; i < j; ++i)
                kernels::axpy(-kernels::dot(vectors[i], bj), vectors[i], vectors[j]);
        }
        const double norm = energy_norm(mass, vectors[j]);
        if (!(norm > 0.0))
            throw SolverError("b_orthonormalize: vector " + std::to_string(j) +
                              " is linearly dependent on its predecessors");
        kernels::scale(1.0 / norm, vectors[j]);
    }
}

void normalize_signs(std::vector<Vector>& vectors) {
    for (auto& v : vectors) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (std::abs(v[i]) > std::abs(v[arg]))
                arg = i;
        if (!v.empty() && v[arg] < 0.0)
            kernels::scale(-1.0, v);
    }
}

namespace {

double rayleigh_quotient(const SparseMatrix& a, const SparseMatrix& b, std::span<const double> v) {
    return kernels::dot(v, spmv(a, v)) / kernels::dot(v, spmv(b, v));
}

void check_hierarchy(const MGContext& ctx, const MeshHierarchy& hierarchy) {
    if (ctx.n_levels() != hierarchy.n_levels())
        throw InvalidArgument("multigrid context and hierarchy have different level counts");
}

/// Dense [C^T M C] for C = [P | extra].
DenseMatrix augmented_form(const SparseMatrix& coarse_form, const SparseMatrix& prolongation,
                           const SparseMatrix& fine_form, std::span<const Vector> extra) {
    const std::size_t nh = coarse_form.rows();
    const std::size_t n = nh + extra.size();
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < nh; ++i)
        for (std::size_t k = coarse_form.row_ptr()[i]; k < coarse_form.row_ptr()[i + 1]; ++k)
            out(i, coarse_form.col_idx()[k]) = coarse_form.values()[k];
    const SparseMatrix pt = prolongation.transpose();
    std::vector<Vector> m_extra;
    m_extra.reserve(extra.size());
    for (const auto& w : extra)
        m_extra.push_back(spmv(fine_form, w));
    for (std::size_t j = 0; j < extra.size(); ++j) {
        const Vector cross = spmv(pt, m_extra[j]);
        for (std::size_t i = 0; i < nh; ++i) {
            out(i, nh + j) = cross[i];
            out(nh + j, i) = cross[i];
        }
        for (std::size_t i = 0; i <= j; ++i) {
            const double v = kernels::dot(extra[i], m_extra[j]);
            out(nh + i, nh + j) = v;
            out(nh + j, nh + i) = v;
        }
    }
    return out;
}

DenseMatrix submatrix(const DenseMatrix& m, std::span<const std::size_t> idx) {
    DenseMatrix out(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            out(i, j) = m(idx[i], idx[j]);
    return out;
}

/// Deterministic pseudo-random start vectors.
Vector random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Vector v(n);
    for (auto& x : v)
        x = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
    return v;
}

} // namespace

EigenApprox coarse_eigensolve(const MGContext& ctx, const MeshHierarchy& hierarchy, std::size_t q,
                              std::size_t level) {
    check_hierarchy(ctx, hierarchy);
    if (level >= ctx.n_levels())
        throw InvalidArgument("coarse_eigensolve: level out of range");
    if (q == 0 || q > ctx.n_dofs(level))
        throw InvalidArgument("coarse_eigensolve: q = " + std::to_string(q) +
                              " but the level has " + std::to_string(ctx.n_dofs(level)) +
                              " dofs");
    const auto pairs = generalized_eig_dense(DenseMatrix::from_sparse(ctx.stiffness(level)),
                                             DenseMatrix::from_sparse(ctx.mass(level)), q);
    EigenApprox out;
    out.level = level;
    for (const auto& pair : pairs) {
        out.eigenvalues.push_back(pair.value);
        out.vectors.push_back(pair.vector);
    }
    normalize_signs(out.vectors);
    return out;
}

EigenApprox solve_augmented(const MGContext& ctx, std::size_t level,
                            std::span<const Vector> extra, std::size_t q, double drop_tol) {
    const CoarseSpace& space = ctx.coarse_space(level);
    const std::size_t n_fine = ctx.n_dofs(level);
    for (const auto& w : extra)
        if (w.size() != n_fine)
            throw DimensionMismatch("solve_augmented: vector length differs from the level");

    DenseMatrix a = augmented_form(space.stiffness, space.prolongation, ctx.stiffness(level), extra);
    DenseMatrix b = augmented_form(space.mass, space.prolongation, ctx.mass(level), extra);
    const std::size_t n = a.rows();

    // Unit-diagonal scaling makes the pivot threshold relative per column.
    Vector scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        scale[i] = b(i, i) > 0.0 ? 1.0 / std::sqrt(b(i, i)) : 0.0;
    std::vector<std::size_t> nonzero;
    for (std::size_t i = 0; i < n; ++i)
        if (scale[i] > 0.0)
            nonzero.push_back(i);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            a(i, j) *= scale[i] * scale[j];
            b(i, j) *= scale[i] * scale[j];
        }

    const DenseMatrix b_nz = submatrix(b, nonzero);
    const PivotedCholesky pc = pivoted_cholesky(b_nz, drop_tol);
    std::vector<std::size_t> kept;
    kept.reserve(pc.kept.size());
    for (std::size_t i : pc.kept)
        kept.push_back(nonzero[i]);
    if (kept.size() < q)
        throw DegenerateAugmentation("augmented space has rank " + std::to_string(kept.size()) +
                                     " < q = " + std::to_string(q));

    const auto pairs = generalized_eig_dense(submatrix(a, kept), submatrix(b, kept), q);

    const std::size_t nh = space.prolongation.cols();
    EigenApprox out;
    out.level = level;
    for (const auto& pair : pairs) {
        Vector coarse(nh, 0.0);
        Vector u(n_fine, 0.0);
        for (std::size_t r = 0; r < kept.size(); ++r) {
            const std::size_t col = kept[r];
            const double coef = pair.vector[r] * scale[col];
            if (col < nh)
                coarse[col] = coef;
            else
                kernels::axpy(coef, extra[col - nh], u);
        }
        if (nh > 0)
            kernels::axpy(1.0, spmv(space.prolongation, coarse), u);
        out.eigenvalues.push_back(pair.value);
        out.vectors.push_back(std::move(u));
    }
    b_orthonormalize(ctx.mass(level), out.vectors);
    normalize_signs(out.vectors);
    return out;
}

EigenApprox one_correction_step(const MGContext& ctx, const MeshHierarchy& hierarchy,
                                const EigenApprox& approx, const SolverConfig& config,
                                WorkCounter* work) {
    config.validate();
    check_hierarchy(ctx, hierarchy);
    if (config.coarse_index != ctx.coarse_index())
        throw InvalidArgument("one_correction_step: config coarse_index differs from the context");
    const std::size_t k = approx.level;
    if (k >= ctx.n_levels() || k < ctx.coarse_index())
        throw InvalidArgument("one_correction_step: level outside the correction range");
    if (approx.vectors.size() != approx.eigenvalues.size() || approx.vectors.empty())
        throw InvalidArgument("one_correction_step: malformed approximation");
    const std::size_t q = approx.size();

    const SparseMatrix& a = ctx.stiffness(k);
    const SparseMatrix& b = ctx.mass(k);
    std::vector<Vector> smoothed;
    smoothed.reserve(q);
    for (std::size_t j = 0; j < q; ++j) {
        Vector f = spmv(b, approx.vectors[j]);
        kernels::scale(approx.eigenvalues[j], f);
        const double before = energy_functional(a, f, approx.vectors[j]);
        Vector w = mg_solve(ctx, k, f, approx.vectors[j], config.m, work);
        const double after = energy_functional(a, f, w);
        if (after > before + 1e-12 * std::abs(before))
            throw SolverError("one_correction_step: multigrid increased the energy error "
                              "for eigenpair " + std::to_string(j));
        smoothed.push_back(std::move(w));
    }
    return solve_augmented(ctx, k, smoothed, q, config.gram_drop_tol);
}

EigenApprox prolongate(const MGContext& ctx, const EigenApprox& approx) {
    const std::size_t k = approx.level + 1;
    if (k >= ctx.n_levels())
        throw InvalidArgument("prolongate: already on the finest level");
    EigenApprox out;
    out.level = k;
    for (const auto& v : approx.vectors)
        out.vectors.push_back(spmv(ctx.prolongation(k), v));
    b_orthonormalize(ctx.mass(k), out.vectors);
    for (const auto& v : out.vectors)
        out.eigenvalues.push_back(rayleigh_quotient(ctx.stiffness(k), ctx.mass(k), v));
    return out;
}

EigenApprox full_multigrid(const MGContext& ctx, const MeshHierarchy& hierarchy,
                           const SolverConfig& config, const LevelObserver& observer,
                           WorkCounter* work) {
    config.validate();
    check_hierarchy(ctx, hierarchy);
    if (config.initial_level >= ctx.n_levels())
        throw InvalidArgument("full_multigrid: initial level beyond the hierarchy");
    WorkCounter local;
    WorkCounter& counter = work ? *work : local;

    EigenApprox approx = coarse_eigensolve(ctx, hierarchy, config.q, config.initial_level);
    if (observer)
        observer(approx, counter);
    for (std::size_t k = config.initial_level + 1; k < ctx.n_levels(); ++k) {
        approx = prolongate(ctx, approx);
        for (std::size_t l = 0; l < config.p; ++l)
            approx = one_correction_step(ctx, hierarchy, approx, config, &counter);
        if (observer)
            observer(approx, counter);
    }
    return approx;
}

EigenApprox full_multigrid(const MeshHierarchy& hierarchy, const CoefficientField& coeff,
                           const SolverConfig& config) {
    config.validate();
    if (config.coarse_index != hierarchy.coarse_index)
        throw InvalidArgument("full_multigrid: config coarse_index differs from the hierarchy");
    const MGContext ctx = build_mg_context(hierarchy, coeff, config.cycle_settings());
    return full_multigrid(ctx, hierarchy, config);
}

double max_residual(const SparseMatrix& stiffness, const SparseMatrix& mass,
                    const EigenApprox& approx) {
    double worst = 0.0;
    for (std::size_t j = 0; j < approx.size(); ++j) {
        Vector r = spmv(stiffness, approx.vectors[j]);
        kernels::axpy(-approx.eigenvalues[j], spmv(mass, approx.vectors[j]), r);
        worst = std::max(worst, std::sqrt(kernels::dot(r, r)));
    }
    return worst;
}

EigenApprox direct_fine_solve(const MGContext& ctx, const MeshHierarchy& hierarchy, std::size_t q,
                              double tol, std::size_t level, WorkCounter* work,
                              const DirectOptions& options) {
    check_hierarchy(ctx, hierarchy);
    if (!(tol > 0.0))
        throw InvalidArgument("direct_fine_solve: tol must be positive");
    if (level >= ctx.n_levels())
        throw InvalidArgument("direct_fine_solve: level out of range");
    const std::size_t n = ctx.n_dofs(level);
    if (q == 0 || q > n)
        throw InvalidArgument("direct_fine_solve: q out of range");
    const std::size_t block = std::min(n, q + std::max<std::size_t>(q, 4));
    const SparseMatrix& a = ctx.stiffness(level);
    const SparseMatrix& b = ctx.mass(level);
    const double a_max = a.max_abs();

    // Start from the coarsest-level spectrum carried up the hierarchy.
    std::vector<Vector> x;
    const std::size_t n0 = ctx.n_dofs(0);
    if (level > 0 && n0 > 0) {
        EigenApprox start = coarse_eigensolve(ctx, hierarchy, std::min(block, n0), 0);
        for (auto& v : start.vectors) {
            for (std::size_t k = 1; k <= level; ++k)
                v = spmv(ctx.prolongation(k), v);
            x.push_back(std::move(v));
        }
    }
    for (std::uint64_t seed = 1; x.size() < block; ++seed)
        x.push_back(random_vector(n, seed));
    b_orthonormalize(b, x);

    // Symmetric Gauss-Seidel keeps the V-cycle a fixed SPD preconditioner.
    const CycleSettings precond_settings{Smoother::SymmetricGaussSeidel, ctx.settings().nu};
    const Preconditioner precond = [&](std::span<const double> r, std::span<double> z) {
        const Vector zero(r.size(), 0.0);
        const Vector out = v_cycle(ctx, precond_settings, level, r, zero, work);
        std::copy(out.begin(), out.end(), z.begin());
    };

    std::vector<double> lambda(block, 0.0);
    for (std::size_t j = 0; j < block; ++j)
        lambda[j] = rayleigh_quotient(a, b, x[j]);

    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        std::vector<Vector> y;
        y.reserve(block);
        for (std::size_t j = 0; j < block; ++j) {
            const Vector rhs = spmv(b, x[j]);
            Vector guess = x[j];
            kernels::scale(1.0 / lambda[j], guess);
            CgResult res = pcg_solve(a, rhs, guess, precond, options.inner_max_iterations,
                                     options.inner_tol);
            y.push_back(std::move(res.x));
        }
        DenseMatrix a_s(block, block), b_s(block, block);
        std::vector<Vector> ay, by;
        for (const auto& v : y) {
            ay.push_back(spmv(a, v));
            by.push_back(spmv(b, v));
        }
        for (std::size_t i = 0; i < block; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                a_s(i, j) = a_s(j, i) = kernels::dot(y[i], ay[j]);
                b_s(i, j) = b_s(j, i) = kernels::dot(y[i], by[j]);
            }
        const auto pairs = generalized_eig_dense(a_s, b_s, block);
        std::vector<Vector> next(block, Vector(n, 0.0));
        std::vector<double> next_lambda(block);
        for (std::size_t j = 0; j < block; ++j) {
            for (std::size_t i = 0; i < block; ++i)
                kernels::axpy(pairs[j].vector[i], y[i], next[j]);
            next_lambda[j] = pairs[j].value;
        }
        b_orthonormalize(b, next);

        double change = 0.0;
        for (std::size_t j = 0; j < q; ++j)
            change = std::max(change, std::abs(next_lambda[j] - lambda[j]) / next_lambda[j]);
        x = std::move(next);
        lambda = std::move(next_lambda);

        EigenApprox out;
        out.level = level;
        out.eigenvalues.assign(lambda.begin(), lambda.begin() + static_cast<std::ptrdiff_t>(q));
        out.vectors.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(q));
        if (change <= tol && max_residual(a, b, out) <= tol * a_max) {
            normalize_signs(out.vectors);
            return out;
        }
    }
    throw ConvergenceError("direct_fine_solve: no convergence within " +
                           std::to_string(options.max_iterations) + " iterations");
}

EigenApprox direct_fine_solve(const MGContext& ctx, const MeshHierarchy& hierarchy, std::size_t q,
                              double tol) {
    return direct_fine_solve(ctx, hierarchy, q, tol, ctx.n_levels() - 1);
}

} // namespace fmgeig
