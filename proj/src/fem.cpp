#include "fmgeig/fem.hpp"

#include "fmgeig/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fmgeig {

CoefficientField CoefficientField::laplace() {
    return {[](const Point&) { return Sym2{1.0, 0.0, 1.0}; },
            [](const Point&) { return 0.0; },
            [](const Point&) { return 1.0; }};
}

CoefficientField CoefficientField::variable() {
    return {[](const Point& p) {
                const double a = p.x - 0.5;
                const double b = p.y - 0.5;
                return Sym2{1.0 + a * a, a * b, 1.0 + b * b};
            },
            [](const Point& p) { return std::exp((p.x - 0.5) * (p.y - 0.5)); },
            [](const Point& p) { return 1.0 + (p.x - 0.5) * (p.y - 0.5); }};
}

DofMap::DofMap(const Mesh& mesh) : dof_of_(mesh.n_vertices(), npos) {
    vertex_of_.reserve(mesh.n_vertices() - mesh.n_boundary());
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
        if (mesh.is_boundary(v))
            continue;
        dof_of_[v] = vertex_of_.size();
        vertex_of_.push_back(v);
    }
}

namespace {

std::array<Point, 3> edge_midpoints(const std::array<Point, 3>& c) {
    return {Point{0.5 * (c[0].x + c[1].x), 0.5 * (c[0].y + c[1].y)},
            Point{0.5 * (c[1].x + c[2].x), 0.5 * (c[1].y + c[2].y)},
            Point{0.5 * (c[2].x + c[0].x), 0.5 * (c[2].y + c[0].y)}};
}

// Value of local basis function i at edge midpoint q (edge q joins q and q+1).
constexpr double kMidpointBasis[3][3] = {
    {0.5, 0.0, 0.5},
    {0.5, 0.5, 0.0},
    {0.0, 0.5, 0.5},
};

bool finite(const ElementMatrix& m) {
    for (const auto& row : m)
        for (double v : row)
            if (!std::isfinite(v))
                return false;
    return true;
}

/// Weighted midpoint-rule mass term: (area/3) sum_q w(x_q) psi_i psi_j.
ElementMatrix weighted_mass(const std::array<Point, 3>& c, const ScalarField& weight) {
    const double area = signed_area(c[0], c[1], c[2]);
    const auto mid = edge_midpoints(c);
    const double w[3] = {weight(mid[0]), weight(mid[1]), weight(mid[2])};
    ElementMatrix m{};
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            double s = 0.0;
            for (int q = 0; q < 3; ++q)
                s += w[q] * kMidpointBasis[i][q] * kMidpointBasis[j][q];
            m[i][j] = m[j][i] = area / 3.0 * s;
        }
    return m;
}

/// Builds a CSR matrix from per-triangle element matrices. `index` maps
/// vertices to matrix rows (npos drops the vertex). Each entry sums its
/// triangle contributions in ascending triangle order, so (i,j) and (j,i)
/// see identical operands in identical order.
SparseMatrix gather(const Mesh& mesh, std::span<const std::size_t> index, std::size_t n,
                    const std::vector<ElementMatrix>& elements) {
    const std::size_t nv = mesh.n_vertices();
    const auto& tris = mesh.triangles();

    std::vector<std::size_t> inc_ptr(nv + 1, 0);
    for (const auto& t : tris)
        for (std::size_t v : t)
            ++inc_ptr[v + 1];
    std::partial_sum(inc_ptr.begin(), inc_ptr.end(), inc_ptr.begin());
    std::vector<std::size_t> incident(inc_ptr.back());
    {
        std::vector<std::size_t> next(inc_ptr.begin(), inc_ptr.end() - 1);
        for (std::size_t t = 0; t < tris.size(); ++t)
            for (std::size_t v : tris[t])
                incident[next[v]++] = t;
    }

    std::vector<std::size_t> row_vertex(n);
    for (std::size_t v = 0; v < nv; ++v)
        if (index[v] != DofMap::npos)
            row_vertex[index[v]] = v;

    std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < count; ++r) {
        const std::size_t v = row_vertex[static_cast<std::size_t>(r)];
        auto& row = rows[static_cast<std::size_t>(r)];
        for (std::size_t k = inc_ptr[v]; k < inc_ptr[v + 1]; ++k) {
            const std::size_t t = incident[k];
            const auto& tri = tris[t];
            const int li = tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
            for (int lj = 0; lj < 3; ++lj) {
                const std::size_t col = index[tri[lj]];
                if (col == DofMap::npos)
                    continue;
                auto it = std::find_if(row.begin(), row.end(),
                                       [col](const auto& e) { return e.first == col; });
                if (it == row.end())
                    row.emplace_back(col, elements[t][li][lj]);
                else
                    it->second += elements[t][li][lj];
            }
        }
        std::sort(row.begin(), row.end());
    }

    std::vector<std::size_t> row_ptr(n + 1, 0);
    for (std::size_t r = 0; r < n; ++r)
        row_ptr[r + 1] = row_ptr[r] + rows[r].size();
    std::vector<std::size_t> col_idx(row_ptr.back());
    std::vector<double> values(row_ptr.back());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < rows[r].size(); ++k) {
            col_idx[row_ptr[r] + k] = rows[r][k].first;
            values[row_ptr[r] + k] = rows[r][k].second;
        }
    return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

template <class ElementFn>
std::vector<ElementMatrix> compute_elements(const Mesh& mesh, ElementFn&& fn) {
    const std::size_t nt = mesh.n_triangles();
    std::vector<ElementMatrix> elements(nt);
    std::vector<char> bad(nt, 0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(nt); ++t) {
        const auto ut = static_cast<std::size_t>(t);
        elements[ut] = fn(mesh.corners(ut));
        bad[ut] = finite(elements[ut]) ? 0 : 1;
    }
    const auto it = std::find(bad.begin(), bad.end(), 1);
    if (it != bad.end())
        throw AssemblyError(static_cast<std::size_t>(it - bad.begin()),
                            "coefficient evaluation produced a non-finite value");
    return elements;
}

std::vector<std::size_t> identity_index(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

} // namespace

ElementMatrix element_stiffness(const std::array<Point, 3>& c, const CoefficientField& coeff) {
    const double area = signed_area(c[0], c[1], c[2]);
    // grad lambda_i = (y_{i+1} - y_{i+2}, x_{i+2} - x_{i+1}) / (2 area)
    double gx[3], gy[3];
    for (int i = 0; i < 3; ++i) {
        const Point& a = c[(i + 1) % 3];
        const Point& b = c[(i + 2) % 3];
        gx[i] = (a.y - b.y) / (2.0 * area);
        gy[i] = (b.x - a.x) / (2.0 * area);
    }
    const auto mid = edge_midpoints(c);
    Sym2 abar;
    for (const auto& p : mid) {
        const Sym2 a = coeff.diffusion(p);
        abar.xx += a.xx / 3.0;
        abar.xy += a.xy / 3.0;
        abar.yy += a.yy / 3.0;
    }
    ElementMatrix k = weighted_mass(c, coeff.reaction);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const double ax = abar.xx * gx[j] + abar.xy * gy[j];
            const double ay = abar.xy * gx[j] + abar.yy * gy[j];
            k[i][j] += area * (gx[i] * ax + gy[i] * ay);
            k[j][i] = k[i][j];
        }
    return k;
}

ElementMatrix element_mass(const std::array<Point, 3>& corners, const ScalarField& rho) {
    return weighted_mass(corners, rho);
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs,
                                const CoefficientField& coeff) {
    if (dofs.n_vertices() != mesh.n_vertices())
        throw DimensionMismatch("assemble_stiffness: dof map built for another mesh");
    const auto elements =
        compute_elements(mesh, [&](const auto& c) { return element_stiffness(c, coeff); });
    return gather(mesh, dofs.dof_table(), dofs.n_dofs(), elements);
}

SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs, const ScalarField& rho) {
    if (dofs.n_vertices() != mesh.n_vertices())
        throw DimensionMismatch("assemble_mass: dof map built for another mesh");
    const auto elements =
        compute_elements(mesh, [&](const auto& c) { return element_mass(c, rho); });
    return gather(mesh, dofs.dof_table(), dofs.n_dofs(), elements);
}

SparseMatrix assemble_stiffness_full(const Mesh& mesh, const CoefficientField& coeff) {
    const auto elements =
        compute_elements(mesh, [&](const auto& c) { return element_stiffness(c, coeff); });
    return gather(mesh, identity_index(mesh.n_vertices()), mesh.n_vertices(), elements);
}

SparseMatrix assemble_mass_full(const Mesh& mesh, const ScalarField& rho) {
    const auto elements =
        compute_elements(mesh, [&](const auto& c) { return element_mass(c, rho); });
    return gather(mesh, identity_index(mesh.n_vertices()), mesh.n_vertices(), elements);
}

Vector interpolate(const Mesh& mesh, const DofMap& dofs, const ScalarField& f) {
    Vector v(dofs.n_dofs());
    for (std::size_t d = 0; d < v.size(); ++d)
        v[d] = f(mesh.vertex(dofs.vertex_of(d)));
    return v;
}

Vector to_vertex_values(const DofMap& dofs, std::span<const double> v) {
    if (v.size() != dofs.n_dofs())
        throw DimensionMismatch("to_vertex_values: vector length differs from dof count");
    Vector out(dofs.n_vertices(), 0.0);
    for (std::size_t d = 0; d < v.size(); ++d)
        out[dofs.vertex_of(d)] = v[d];
    return out;
}

SparseMatrix restrict_to_dofs(const SparseMatrix& vertex_map, const DofMap& fine,
                              const DofMap& coarse) {
    if (vertex_map.rows() != fine.n_vertices() || vertex_map.cols() != coarse.n_vertices())
        throw DimensionMismatch("restrict_to_dofs: map shape differs from the dof maps");
    std::vector<std::size_t> row_ptr(fine.n_dofs() + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    for (std::size_t d = 0; d < fine.n_dofs(); ++d) {
        const std::size_t v = fine.vertex_of(d);
        for (std::size_t k = vertex_map.row_ptr()[v]; k < vertex_map.row_ptr()[v + 1]; ++k) {
            const std::size_t c = coarse.dof_of(vertex_map.col_idx()[k]);
            if (c == DofMap::npos)
                continue;
            col_idx.push_back(c);
            values.push_back(vertex_map.values()[k]);
        }
        row_ptr[d + 1] = col_idx.size();
    }
    return SparseMatrix(fine.n_dofs(), coarse.n_dofs(), std::move(row_ptr), std::move(col_idx),
                        std::move(values));
}

} // namespace fmgeig
