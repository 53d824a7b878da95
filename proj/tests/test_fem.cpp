#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fmgeig/errors.hpp"
#include "fmgeig/fem.hpp"
#include "fmgeig/linalg.hpp"
#include "fmgeig/mesh.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace fmgeig;

namespace {

constexpr double kPi = std::numbers::pi;

double lowest_eigenvalue(const Mesh& mesh, const CoefficientField& coeff) {
    const DofMap dofs(mesh);
    const auto pairs =
        generalized_eig_dense(DenseMatrix::from_sparse(assemble_stiffness(mesh, dofs, coeff)),
                              DenseMatrix::from_sparse(assemble_mass(mesh, dofs, coeff.density)),
                              1);
    return pairs[0].value;
}

/// Unit square mesh with interior vertices moved by up to `amp` times the spacing.
Mesh perturbed_square(std::size_t nx, double amp, unsigned seed) {
    const Mesh base = unit_square_mesh(nx);
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(-amp, amp);
    std::vector<Point> pts = base.vertices();
    const double h = 1.0 / static_cast<double>(nx);
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (!base.is_boundary(i)) {
            pts[i].x += d(gen) * h;
            pts[i].y += d(gen) * h;
        }
    return Mesh(std::move(pts), base.triangles());
}

} // namespace

TEST_CASE("reference element matrices") {
    const std::array<Point, 3> ref{{{0, 0}, {1, 0}, {0, 1}}};
    const ElementMatrix k = element_stiffness(ref, CoefficientField::laplace());
    const double ke[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    const ElementMatrix m = element_mass(ref, [](const Point&) { return 1.0; });
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            CHECK(k[i][j] == doctest::Approx(ke[i][j]).epsilon(1e-14));
            CHECK(m[i][j] == doctest::Approx((i == j ? 2.0 : 1.0) / 24.0).epsilon(1e-14));
        }
}

TEST_CASE("full assembly identities") {
    const Mesh mesh = unit_square_mesh(6);
    const SparseMatrix k = assemble_stiffness_full(mesh, CoefficientField::laplace());
    for (std::size_t i = 0; i < k.rows(); ++i) {
        double s = 0.0;
        for (std::size_t p = k.row_ptr()[i]; p < k.row_ptr()[i + 1]; ++p)
            s += k.values()[p];
        CHECK(std::abs(s) <= 1e-13);
    }
    const SparseMatrix m = assemble_mass_full(mesh, [](const Point&) { return 1.0; });
    double total = 0.0;
    for (double v : m.values())
        total += v;
    CHECK(std::abs(total - 1.0) <= 1e-13);

    CoefficientField shifted = CoefficientField::laplace();
    shifted.reaction = [](const Point&) { return 1.0; };
    const SparseMatrix diff =
        add(assemble_stiffness_full(mesh, shifted), add(k, m), -1.0);
    CHECK(diff.max_abs() <= 1e-12);
}

TEST_CASE("density-weighted mass integrates rho") {
    // integral of 1 + (x-1/2)(y-1/2) over the unit square is 1
    const Mesh mesh = unit_square_mesh(16);
    const SparseMatrix m = assemble_mass_full(mesh, CoefficientField::variable().density);
    double total = 0.0;
    for (double v : m.values())
        total += v;
    CHECK(std::abs(total - 1.0) <= 1e-10);
}

TEST_CASE("interior matrices") {
    const Mesh mesh = unit_square_mesh(8);
    const DofMap dofs(mesh);
    CHECK(dofs.n_dofs() == 49);
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
        CHECK((dofs.dof_of(v) == DofMap::npos) == mesh.is_boundary(v));
    for (const auto& coeff : {CoefficientField::laplace(), CoefficientField::variable()}) {
        const SparseMatrix a = assemble_stiffness(mesh, dofs, coeff);
        const SparseMatrix b = assemble_mass(mesh, dofs, coeff.density);
        CHECK(a.is_symmetric());
        CHECK(b.is_symmetric());
        CHECK_NOTHROW(cholesky_dense(DenseMatrix::from_sparse(a)));
        CHECK_NOTHROW(cholesky_dense(DenseMatrix::from_sparse(b)));
    }
}

TEST_CASE("norms") {
    const SparseMatrix id = SparseMatrix::identity(2);
    CHECK(norm_a(id, Vector{0.0, 0.0}) == 0.0);
    CHECK(norm_a(id, Vector{3.0, 4.0}) == doctest::Approx(5.0));
    CHECK(norm_b(id, Vector{3.0, 4.0}) == doctest::Approx(5.0));

    const Mesh mesh = unit_square_mesh(64);
    const DofMap dofs(mesh);
    const Vector u = interpolate(mesh, dofs, [](const Point& p) {
        return 2.0 * std::sin(kPi * p.x) * std::sin(kPi * p.y);
    });
    const double na = norm_a(assemble_stiffness(mesh, dofs, CoefficientField::laplace()), u);
    const double nb = norm_b(assemble_mass(mesh, dofs, [](const Point&) { return 1.0; }), u);
    const double rq = na * na / (nb * nb);
    CHECK(rq >= 2.0 * kPi * kPi);
    CHECK(rq <= 2.0 * kPi * kPi * 1.01);
}

TEST_CASE("interpolate") {
    const Mesh mesh = unit_square_mesh(2);
    const DofMap dofs(mesh);
    REQUIRE(dofs.n_dofs() == 1);
    CHECK(interpolate(mesh, dofs, [](const Point&) { return 0.0; })[0] == 0.0);
    CHECK(interpolate(mesh, dofs, [](const Point& p) { return p.x + p.y; })[0] == 1.0);

    const Mesh fine = unit_square_mesh(8);
    const DofMap fd(fine);
    for (double v : interpolate(fine, fd, [](const Point& p) {
             return 2.0 * std::sin(kPi * p.x) * std::sin(kPi * p.y);
         })) {
        CHECK(v > 0.0);
        CHECK(v <= 2.0);
    }
    const Vector vv = to_vertex_values(fd, Vector(fd.n_dofs(), 1.0));
    for (std::size_t v = 0; v < fine.n_vertices(); ++v)
        CHECK(vv[v] == (fine.is_boundary(v) ? 0.0 : 1.0));
}

TEST_CASE("discrete eigenvalues bound the continuous one and decrease") {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t nx : {4, 8, 16}) {
        const double lam = lowest_eigenvalue(unit_square_mesh(nx), CoefficientField::laplace());
        CHECK(lam >= 2.0 * kPi * kPi);
        CHECK(lam <= prev);
        prev = lam;
    }
    // scipy.linalg.eigh on an independent assembly (tests/oracles/p1_oracle.py)
    CHECK(lowest_eigenvalue(unit_square_mesh(8), CoefficientField::laplace()) ==
          doctest::Approx(2.050554489770798e+01).epsilon(1e-12));
    CHECK(lowest_eigenvalue(unit_square_mesh(16), CoefficientField::laplace()) ==
          doctest::Approx(1.992978984221665e+01).epsilon(1e-12));
}

TEST_CASE("non-finite coefficients are reported") {
    CoefficientField bad = CoefficientField::laplace();
    bad.reaction = [](const Point& p) {
        return p.x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    };
    const Mesh mesh = unit_square_mesh(4);
    const DofMap dofs(mesh);
    CHECK_THROWS_AS(assemble_stiffness(mesh, dofs, bad), AssemblyError);
}

TEST_CASE("properties on perturbed meshes") {
    for (unsigned seed = 0; seed < 5; ++seed) {
        const Mesh mesh = perturbed_square(6, 0.2, seed);
        const DofMap dofs(mesh);
        const SparseMatrix a = assemble_stiffness(mesh, dofs, CoefficientField::laplace());
        const SparseMatrix b = assemble_mass(mesh, dofs, [](const Point&) { return 1.0; });
        CHECK(a.is_symmetric());
        CHECK(b.is_symmetric());
        const SparseMatrix kf = assemble_stiffness_full(mesh, CoefficientField::laplace());
        for (std::size_t i = 0; i < kf.rows(); ++i) {
            double s = 0.0;
            for (std::size_t p = kf.row_ptr()[i]; p < kf.row_ptr()[i + 1]; ++p)
                s += kf.values()[p];
            CHECK(std::abs(s) <= 1e-12);
        }
        CHECK(lowest_eigenvalue(mesh, CoefficientField::laplace()) >= 2.0 * kPi * kPi);
    }
}
