#pragma once

#include "fmgeig/linalg.hpp"
#include "fmgeig/mesh.hpp"
#include "fmgeig/sparse_matrix.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace fmgeig {

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

using ScalarField = std::function<double(const Point&)>;
using TensorField = std::function<Sym2(const Point&)>;

/// Problem data of -div(A grad u) + phi u = lambda rho u.
struct CoefficientField {
    TensorField diffusion;
    ScalarField reaction;
    ScalarField density;

    /// A = I, phi = 0, rho = 1.
    static CoefficientField laplace();
    /// Variable-coefficient test problem on the unit square:
    /// A = [[1+(x-1/2)^2, (x-1/2)(y-1/2)], [(x-1/2)(y-1/2), 1+(y-1/2)^2]],
    /// phi = exp((x-1/2)(y-1/2)), rho = 1 + (x-1/2)(y-1/2).
    static CoefficientField variable();
};

/// Numbers interior vertices contiguously; boundary vertices carry no dof.
class DofMap {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    explicit DofMap(const Mesh& mesh);

    std::size_t n_dofs() const noexcept { return vertex_of_.size(); }
    std::size_t n_vertices() const noexcept { return dof_of_.size(); }
    /// npos for boundary vertices.
    std::size_t dof_of(std::size_t vertex) const { return dof_of_.at(vertex); }
    std::size_t vertex_of(std::size_t dof) const { return vertex_of_.at(dof); }

    const std::vector<std::size_t>& dof_table() const noexcept { return dof_of_; }

private:
    std::vector<std::size_t> dof_of_;
    std::vector<std::size_t> vertex_of_;
};

using ElementMatrix = std::array<std::array<double, 3>, 3>;

/// Local a(psi_i, psi_j) on one triangle with the 3-point edge-midpoint rule.
ElementMatrix element_stiffness(const std::array<Point, 3>& corners, const CoefficientField& coeff);
/// Local rho-weighted b(psi_i, psi_j) with the same rule.
ElementMatrix element_mass(const std::array<Point, 3>& corners, const ScalarField& rho);

/// Interior-dof matrices (Dirichlet elimination).
SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs, const CoefficientField& coeff);
SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs, const ScalarField& rho);

/// All-vertex matrices before boundary elimination.
SparseMatrix assemble_stiffness_full(const Mesh& mesh, const CoefficientField& coeff);
SparseMatrix assemble_mass_full(const Mesh& mesh, const ScalarField& rho);

inline double norm_a(const SparseMatrix& stiffness, std::span<const double> v) {
    return energy_norm(stiffness, v);
}
inline double norm_b(const SparseMatrix& mass, std::span<const double> v) {
    return energy_norm(mass, v);
}

/// Samples f at interior vertices in dof order.
Vector interpolate(const Mesh& mesh, const DofMap& dofs, const ScalarField& f);

/// Dof vector to per-vertex values, zero on the boundary.
Vector to_vertex_values(const DofMap& dofs, std::span<const double> v);

/// Restricts a vertex-level prolongation (fine x coarse vertices) to interior dofs.
SparseMatrix restrict_to_dofs(const SparseMatrix& vertex_map, const DofMap& fine,
                              const DofMap& coarse);

} // namespace fmgeig
