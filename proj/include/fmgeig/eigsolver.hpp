#pragma once

// Multilevel-correction eigensolver.
//
// A correction step on level k improves a set of eigenpair approximations
// (lambda_j, u_j) by
//   1. running m V-cycles on A w = lambda_j B u_j starting from u_j, and
//   2. Rayleigh-Ritz on the small space V_H + span{w_1, ..., w_q}, where V_H
//      is the coarse finite element space embedded in level k.
// The full multigrid driver solves densely on the initial level, then on
// every finer level prolongates the current vectors and applies p correction
// steps. Total smoothing work is linear in the finest dof count.

#include "fmgeig/linalg.hpp"
#include "fmgeig/mesh.hpp"
#include "fmgeig/multigrid.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fmgeig {

/// q eigenpair approximations on one level; vectors are B-orthonormal.
struct EigenApprox {
    std::size_t level = 0;
    std::vector<double> eigenvalues; ///< ascending
    std::vector<Vector> vectors;

    std::size_t size() const noexcept { return eigenvalues.size(); }
};

struct SolverConfig {
    std::size_t q = 1;            ///< eigenpairs
    std::size_t m = 2;            ///< V-cycles per correction
    std::size_t p = 2;            ///< correction steps per level
    std::size_t nu = 2;           ///< smoothing steps
    std::size_t coarse_index = 0; ///< level of the coarse correction space
    std::size_t initial_level = 0;///< level solved densely; >= coarse_index
    double gram_drop_tol = 1e-12; ///< relative pivot threshold on the augmented Gram matrix
    Smoother smoother = Smoother::ConjugateGradient;

    /// Throws InvalidArgument when a count is zero or levels are inconsistent.
    void validate() const;
    CycleSettings cycle_settings() const { return {smoother, nu}; }
};

/// max_{i,j} |u_i^T B u_j - delta_ij|
double orthonormality_defect(const SparseMatrix& mass, std::span<const Vector> vectors);

/// Modified Gram-Schmidt in the B inner product (two passes).
void b_orthonormalize(const SparseMatrix& mass, std::vector<Vector>& vectors);

/// Scales each vector so its largest-magnitude entry is positive.
void normalize_signs(std::vector<Vector>& vectors);

/// q smallest eigenpairs of the pencil on `level` by the dense solver.
EigenApprox coarse_eigensolve(const MGContext& ctx, const MeshHierarchy& hierarchy, std::size_t q,
                              std::size_t level = 0);

/// Rayleigh-Ritz on V_H + span{extra} inside level `level`. Columns whose
/// pivots fall below drop_tol in the scaled Gram matrix are discarded.
EigenApprox solve_augmented(const MGContext& ctx, std::size_t level,
                            std::span<const Vector> extra, std::size_t q, double drop_tol);

/// One correction step on approx.level.
EigenApprox one_correction_step(const MGContext& ctx, const MeshHierarchy& hierarchy,
                                const EigenApprox& approx, const SolverConfig& config,
                                WorkCounter* work = nullptr);

/// Moves approx to the next finer level: prolongation, B-orthonormalization,
/// Rayleigh quotients.
EigenApprox prolongate(const MGContext& ctx, const EigenApprox& approx);

/// Called once per level with the level's final approximation and the
/// cumulative work counter.
using LevelObserver = std::function<void(const EigenApprox&, const WorkCounter&)>;

EigenApprox full_multigrid(const MGContext& ctx, const MeshHierarchy& hierarchy,
                           const SolverConfig& config, const LevelObserver& observer = {},
                           WorkCounter* work = nullptr);

/// Builds the multigrid context from the config and runs full_multigrid.
EigenApprox full_multigrid(const MeshHierarchy& hierarchy, const CoefficientField& coeff,
                           const SolverConfig& config);

struct DirectOptions {
    std::size_t max_iterations = 500;
    std::size_t inner_max_iterations = 300;
    double inner_tol = 1e-12;
};

/// Reference solver: block inverse iteration with MG-preconditioned CG inner
/// solves and a Rayleigh-Ritz projection per sweep, iterated until both the
/// relative eigenvalue change and the residual ||Au - lambda Bu|| / ||A||_max
/// drop to tol. Throws ConvergenceError past the iteration cap.
EigenApprox direct_fine_solve(const MGContext& ctx, const MeshHierarchy& hierarchy, std::size_t q,
                              double tol, std::size_t level, WorkCounter* work = nullptr,
                              const DirectOptions& options = {});

/// direct_fine_solve on the finest level.
EigenApprox direct_fine_solve(const MGContext& ctx, const MeshHierarchy& hierarchy, std::size_t q,
                              double tol);

/// Largest ||A u_j - lambda_j B u_j||_2 over the approximation.
double max_residual(const SparseMatrix& stiffness, const SparseMatrix& mass,
                    const EigenApprox& approx);

} // namespace fmgeig
