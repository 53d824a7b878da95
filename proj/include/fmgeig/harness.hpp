#pragma once

#include "fmgeig/eigsolver.hpp"
#include "fmgeig/fem.hpp"
#include "fmgeig/mesh.hpp"
#include "fmgeig/multigrid.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fmgeig {

enum class ProblemKind { Model, General };

/// Exact eigenfunction with its gradient.
struct ExactEigenfunction {
    ScalarField value;
    std::function<Point(const Point&)> gradient;
};

struct ModelExactData {
    std::vector<double> eigenvalues; ///< ascending, with multiplicity
    std::vector<ExactEigenfunction> eigenfunctions;
    std::vector<std::pair<int, int>> modes; ///< (i, j) of 2 sin(i pi x) sin(j pi y)
};

/// First q Dirichlet Laplacian eigenpairs on the unit square:
/// (i^2 + j^2) pi^2 with u = 2 sin(i pi x) sin(j pi y), ordered by
/// eigenvalue, then i.
ModelExactData model_exact_data(std::size_t q);

struct ProblemSpec {
    ProblemKind kind = ProblemKind::Model;
    std::string name;
    CoefficientField coeff;
    std::vector<double> exact_eigenvalues;            ///< empty when unknown
    std::vector<ExactEigenfunction> eigenfunctions;   ///< aligned with exact_eigenvalues
    std::vector<bool> simple; ///< false where the exact eigenvalue is repeated in the full spectrum
};

ProblemSpec make_problem(ProblemKind kind, std::size_t q);

/// One method's results on one level. Optional entries are absent when no
/// reference exists (unknown eigenvalues, or clustered eigenvalues for the
/// eigenfunction error).
struct StudyRow {
    std::string method;
    std::size_t level = 0; ///< 1-based: level 1 is the initial mesh
    std::size_t n_dofs = 0;
    std::vector<double> lambda_h;
    std::vector<std::optional<double>> lambda_ref;
    std::vector<std::optional<double>> abs_err;
    std::vector<std::optional<double>> energy_err;
    std::uint64_t work_units = 0;
    double wall_ms = 0.0;
};

/// Eigenvalue errors against the exact values (or `reference` when given)
/// and, for simple exact eigenvalues, ||I_h u - u_h||_a with the sign of u_h
/// chosen so that b(I_h u, u_h) >= 0.
StudyRow compute_errors(const EigenApprox& approx, const ProblemSpec& spec,
                        const MeshHierarchy& hierarchy, const MGContext& ctx,
                        const std::vector<double>* reference = nullptr);

/// ||u - u_h||_a by 7-point quadrature on every triangle, sign-aligned as in
/// compute_errors. Unlike the interpolant-based value this measures the
/// full discretization error.
double exact_energy_error(const Mesh& mesh, const DofMap& dofs, const CoefficientField& coeff,
                          const ExactEigenfunction& u, std::span<const double> uh,
                          const SparseMatrix& mass);

/// Richardson extrapolation: fine + (fine - coarse) / (beta^order - 1).
double extrapolate_reference(double lambda_coarse, double lambda_fine, double beta = 2.0,
                             double order = 2.0);

struct StudyOptions {
    ProblemKind problem = ProblemKind::Model;
    Mesh initial_mesh = unit_square_mesh(8);
    std::size_t n_levels = 5;
    SolverConfig config;
    bool compare_direct = false;
    double direct_tol = 1e-10;
    bool record_timing = true; ///< false writes wall_ms = 0 for byte-stable output
};

/// Runs the full multigrid solver once, recording every level, and
/// optionally the direct solver on each level. The general problem's
/// reference values come from extrapolating the direct solver's two
/// finest levels.
std::vector<StudyRow> run_study(const StudyOptions& options);

inline constexpr const char* kCsvHeader =
    "method,level,n_dofs,eig_index,lambda_h,lambda_ref,abs_err,energy_err,work_units,wall_ms";

/// One line per (row, eigen index); absent optional values are empty fields.
void write_csv(const std::vector<StudyRow>& rows, std::ostream& out);
void write_csv_file(const std::vector<StudyRow>& rows, const std::filesystem::path& path);

} // namespace fmgeig
