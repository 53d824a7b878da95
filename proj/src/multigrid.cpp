#include "fmgeig/multigrid.hpp"

#include "fmgeig/errors.hpp"
#include "fmgeig/kernels.hpp"

#include <algorithm>

namespace fmgeig {

void WorkCounter::add(std::size_t level, std::size_t n_dofs) {
    if (per_level_.size() <= level)
        per_level_.resize(level + 1, 0);
    per_level_[level] += n_dofs;
    total_ += n_dofs;
}

void WorkCounter::merge(const WorkCounter& other) {
    if (per_level_.size() < other.per_level_.size())
        per_level_.resize(other.per_level_.size(), 0);
    for (std::size_t k = 0; k < other.per_level_.size(); ++k)
        per_level_[k] += other.per_level_[k];
    total_ += other.total_;
}

const SparseMatrix& MGContext::prolongation(std::size_t k) const {
    if (k == 0 || k >= levels_.size())
        throw InvalidArgument("MGContext::prolongation: level out of range");
    return levels_[k].prolongation;
}

const SparseMatrix& MGContext::restriction(std::size_t k) const {
    if (k == 0 || k >= levels_.size())
        throw InvalidArgument("MGContext::restriction: level out of range");
    return levels_[k].restriction;
}

const CoarseSpace& MGContext::coarse_space(std::size_t k) const {
    if (k < coarse_index_ || k >= levels_.size())
        throw InvalidArgument("MGContext::coarse_space: level below the coarse space");
    return levels_[k].coarse;
}

MGContext build_mg_context(const MeshHierarchy& hierarchy, const CoefficientField& coeff,
                           CycleSettings settings) {
    if (hierarchy.n_levels() == 0)
        throw InvalidArgument("build_mg_context: empty hierarchy");
    if (settings.nu == 0)
        throw InvalidArgument("build_mg_context: smoothing count must be positive");
    MGContext ctx;
    ctx.settings_ = settings;
    ctx.coarse_index_ = hierarchy.coarse_index;
    ctx.levels_.reserve(hierarchy.n_levels());
    for (std::size_t k = 0; k < hierarchy.n_levels(); ++k) {
        const Mesh& mesh = hierarchy.meshes[k];
        DofMap dofs(mesh);
        SparseMatrix a = assemble_stiffness(mesh, dofs, coeff);
        SparseMatrix b = assemble_mass(mesh, dofs, coeff.density);
        SparseMatrix p, r;
        if (k > 0) {
            p = restrict_to_dofs(hierarchy.prolongations[k - 1], dofs, ctx.levels_[k - 1].dofs);
            r = p.transpose();
        }
        ctx.levels_.push_back(
            {std::move(dofs), std::move(a), std::move(b), std::move(p), std::move(r), {}});
    }

    const std::size_t c = ctx.coarse_index_;
    SparseMatrix embed = SparseMatrix::identity(ctx.levels_[c].dofs.n_dofs());
    for (std::size_t k = c; k < ctx.levels_.size(); ++k) {
        auto& level = ctx.levels_[k];
        if (k > c)
            embed = multiply(level.prolongation, embed);
        level.coarse.prolongation = embed;
        level.coarse.stiffness = galerkin_product(embed, level.stiffness);
        level.coarse.mass = galerkin_product(embed, level.mass);
    }

    if (ctx.levels_[0].dofs.n_dofs() > 0)
        ctx.coarsest_ = cholesky_dense(DenseMatrix::from_sparse(ctx.levels_[0].stiffness));
    return ctx;
}

namespace {

void smooth_cg(const SparseMatrix& a, std::span<const double> f, std::span<double> x,
               std::size_t steps, std::size_t level, WorkCounter* work) {
    const std::size_t n = x.size();
    Vector r(n), p(n), q(n);
    kernels::residual(a, f, x, r);
    double rr = kernels::dot(r, r);
    p = r;
    for (std::size_t s = 0; s < steps && rr > 0.0; ++s) {
        kernels::spmv(a, p, q);
        const double pq = kernels::dot(p, q);
        if (!(pq > 0.0))
            throw NotPositiveDefinite("CG smoother: breakdown, p^T A p <= 0");
        const double alpha = rr / pq;
        kernels::axpy(alpha, p, x);
        kernels::axpy(-alpha, q, r);
        const double rr_new = kernels::dot(r, r);
        kernels::xpby(r, rr_new / rr, p);
        rr = rr_new;
        if (work)
            work->add(level, n);
    }
}

void gauss_seidel_sweep(const SparseMatrix& a, std::span<const double> f, std::span<double> x,
                        bool forward) {
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto v = a.values();
    const std::size_t n = x.size();
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t i = forward ? s : n - 1 - s;
        double sum = f[i];
        double diag = 0.0;
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
            if (ci[k] == i)
                diag = v[k];
            else
                sum -= v[k] * x[ci[k]];
        }
        x[i] = sum / diag;
    }
}

void smooth(const SparseMatrix& a, const CycleSettings& settings, std::span<const double> f,
            std::span<double> x, std::size_t level, WorkCounter* work) {
    if (settings.smoother == Smoother::ConjugateGradient) {
        smooth_cg(a, f, x, settings.nu, level, work);
        return;
    }
    for (std::size_t s = 0; s < settings.nu; ++s) {
        gauss_seidel_sweep(a, f, x, true);
        gauss_seidel_sweep(a, f, x, false);
        if (work)
            work->add(level, x.size());
    }
}

void cycle(const MGContext& ctx, const CycleSettings& settings, std::size_t level,
           std::span<const double> f, std::span<double> x, WorkCounter* work) {
    if (level == 0) {
        if (ctx.coarsest_factor()) {
            const Vector sol = ctx.coarsest_factor()->solve(f);
            std::copy(sol.begin(), sol.end(), x.begin());
        }
        return;
    }
    const SparseMatrix& a = ctx.stiffness(level);
    smooth(a, settings, f, x, level, work);

    Vector r(x.size());
    kernels::residual(a, f, x, r);
    const SparseMatrix& restrict_op = ctx.restriction(level);
    Vector rc(restrict_op.rows());
    kernels::spmv(restrict_op, r, rc);
    Vector ec(rc.size(), 0.0);
    cycle(ctx, settings, level - 1, rc, ec, work);
    kernels::spmv(ctx.prolongation(level), ec, r);
    kernels::axpy(1.0, r, x);

    smooth(a, settings, f, x, level, work);
}

void check_level(const MGContext& ctx, std::size_t level, std::size_t nf, std::size_t nx) {
    if (level >= ctx.n_levels())
        throw InvalidArgument("multigrid: level out of range");
    if (nf != ctx.n_dofs(level) || nx != ctx.n_dofs(level))
        throw DimensionMismatch("multigrid: vector length differs from the level dof count");
}

} // namespace

Vector v_cycle(const MGContext& ctx, const CycleSettings& settings, std::size_t level,
               std::span<const double> f, std::span<const double> x, WorkCounter* work) {
    check_level(ctx, level, f.size(), x.size());
    Vector out(x.begin(), x.end());
    cycle(ctx, settings, level, f, out, work);
    return out;
}

Vector v_cycle(const MGContext& ctx, std::size_t level, std::span<const double> f,
               std::span<const double> x, WorkCounter* work) {
    return v_cycle(ctx, ctx.settings(), level, f, x, work);
}

Vector mg_solve(const MGContext& ctx, std::size_t level, std::span<const double> f,
                std::span<const double> x0, std::size_t m, WorkCounter* work) {
    if (m == 0)
        throw InvalidArgument("mg_solve: iteration count must be positive");
    check_level(ctx, level, f.size(), x0.size());
    Vector x(x0.begin(), x0.end());
    for (std::size_t i = 0; i < m; ++i)
        cycle(ctx, ctx.settings(), level, f, x, work);
    return x;
}

double energy_functional(const SparseMatrix& a, std::span<const double> f,
                         std::span<const double> x) {
    const Vector ax = spmv(a, x);
    return 0.5 * kernels::dot(x, ax) - kernels::dot(f, x);
}

} // namespace fmgeig
