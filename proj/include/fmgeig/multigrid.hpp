#pragma once

#include "fmgeig/fem.hpp"
#include "fmgeig/linalg.hpp"
#include "fmgeig/mesh.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fmgeig {

enum class Smoother { ConjugateGradient, SymmetricGaussSeidel };

struct CycleSettings {
    Smoother smoother = Smoother::ConjugateGradient;
    std::size_t nu = 2; ///< pre- and post-smoothing steps
};

/// Counts smoothing work: each smoothing step on level k adds the level's
/// dof count. Caller-owned, so concurrent solves use separate counters.
class WorkCounter {
public:
    void add(std::size_t level, std::size_t n_dofs);
    std::uint64_t total() const noexcept { return total_; }
    const std::vector<std::uint64_t>& per_level() const noexcept { return per_level_; }
    void merge(const WorkCounter& other);

private:
    std::uint64_t total_ = 0;
    std::vector<std::uint64_t> per_level_;
};

/// Coarse correction space V_H embedded in level k: interior prolongation
/// from the coarse level plus the Galerkin-projected level-k forms.
struct CoarseSpace {
    SparseMatrix prolongation; ///< N_k x N_H
    SparseMatrix stiffness;    ///< P^T A_k P
    SparseMatrix mass;         ///< P^T B_k P
};

/// Level operators for the V-cycle plus the per-level data the eigensolver
/// shares. Immutable after build_mg_context.
class MGContext {
public:
    std::size_t n_levels() const noexcept { return levels_.size(); }
    const CycleSettings& settings() const noexcept { return settings_; }
    std::size_t coarse_index() const noexcept { return coarse_index_; }

    const DofMap& dofs(std::size_t k) const { return levels_.at(k).dofs; }
    std::size_t n_dofs(std::size_t k) const { return levels_.at(k).dofs.n_dofs(); }
    const SparseMatrix& stiffness(std::size_t k) const { return levels_.at(k).stiffness; }
    const SparseMatrix& mass(std::size_t k) const { return levels_.at(k).mass; }
    /// Interior prolongation from level k-1 to level k (k >= 1).
    const SparseMatrix& prolongation(std::size_t k) const;
    /// Transpose of prolongation(k).
    const SparseMatrix& restriction(std::size_t k) const;
    /// Defined for k >= coarse_index().
    const CoarseSpace& coarse_space(std::size_t k) const;
    /// Dense factor of the level-0 stiffness; empty when level 0 has no dofs.
    const std::optional<CholeskyFactor>& coarsest_factor() const noexcept { return coarsest_; }

private:
    struct Level {
        DofMap dofs;
        SparseMatrix stiffness;
        SparseMatrix mass;
        SparseMatrix prolongation;
        SparseMatrix restriction;
        CoarseSpace coarse;
    };

    friend MGContext build_mg_context(const MeshHierarchy&, const CoefficientField&,
                                      CycleSettings);

    std::vector<Level> levels_;
    CycleSettings settings_;
    std::size_t coarse_index_ = 0;
    std::optional<CholeskyFactor> coarsest_;
};

MGContext build_mg_context(const MeshHierarchy& hierarchy, const CoefficientField& coeff,
                           CycleSettings settings = {});

/// One V-cycle on level `level` for A x = f starting from x.
Vector v_cycle(const MGContext& ctx, std::size_t level, std::span<const double> f,
               std::span<const double> x, WorkCounter* work = nullptr);
/// Same, with smoother settings overriding the context defaults.
Vector v_cycle(const MGContext& ctx, const CycleSettings& settings, std::size_t level,
               std::span<const double> f, std::span<const double> x,
               WorkCounter* work = nullptr);

/// m V-cycles from x0.
Vector mg_solve(const MGContext& ctx, std::size_t level, std::span<const double> f,
                std::span<const double> x0, std::size_t m, WorkCounter* work = nullptr);

/// 1/2 x^T A x - f^T x; decreases exactly when the energy error does.
double energy_functional(const SparseMatrix& a, std::span<const double> f,
                         std::span<const double> x);

} // namespace fmgeig
