#pragma once

#include "fmgeig/sparse_matrix.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fmgeig {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Triangle = std::array<std::size_t, 3>;
using Edge = std::pair<std::size_t, std::size_t>; ///< first < second

/// Conforming triangulation of a 2D polygonal domain. Construction validates
/// indices and counterclockwise orientation and derives boundary flags from
/// edge incidence (a vertex is on the boundary iff it touches an edge owned
/// by exactly one triangle).
class Mesh {
public:
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::size_t level = 0);

    std::size_t n_vertices() const noexcept { return vertices_.size(); }
    std::size_t n_triangles() const noexcept { return triangles_.size(); }
    std::size_t n_boundary() const noexcept { return n_boundary_; }
    std::size_t level() const noexcept { return level_; }

    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    const Point& vertex(std::size_t i) const { return vertices_.at(i); }
    std::array<Point, 3> corners(std::size_t t) const;
    bool is_boundary(std::size_t v) const { return boundary_.at(v) != 0; }

    double triangle_area(std::size_t t) const;
    double total_area() const;
    double max_edge_length() const;

    /// Unique edges sorted by (first, second).
    std::vector<Edge> edges() const;

private:
    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<char> boundary_;
    std::size_t n_boundary_ = 0;
    std::size_t level_ = 0;
};

/// Signed area of (a, b, c); positive for counterclockwise order.
double signed_area(const Point& a, const Point& b, const Point& c);

/// Edge-incidence conformity test: every edge lies in one or two triangles
/// and every boundary vertex touches an even number of boundary edges.
bool is_conforming(const Mesh& mesh);

/// (nx+1)^2 vertices, 2 nx^2 triangles on (0,1)^2; every square is split
/// along its lower-left to upper-right diagonal.
Mesh unit_square_mesh(std::size_t nx);

/// Text format: `NV NT`, NV lines `x y`, NT lines `i j k` (0-based).
/// Errors carry the offending line number.
Mesh load_mesh(std::string_view text);
std::string save_mesh(const Mesh& mesh);
Mesh load_mesh_file(const std::filesystem::path& path);
void save_mesh_file(const Mesh& mesh, const std::filesystem::path& path);

struct Refinement {
    Mesh mesh;
    /// fine_vertices x coarse_vertices; retained vertices copy, midpoints average.
    SparseMatrix prolongation;
};

/// Splits every triangle into four congruent children through its edge
/// midpoints. Coarse vertices keep their indices; midpoint vertices follow
/// in sorted edge-key order.
Refinement refine_regular(const Mesh& mesh);

inline constexpr std::size_t kDefaultVertexCap = std::size_t{1} << 26;

/// Nested meshes ordered coarse to fine with one prolongation per
/// consecutive pair. `coarse_index` names the level used as the coarse
/// correction space.
struct MeshHierarchy {
    std::vector<Mesh> meshes;
    std::vector<SparseMatrix> prolongations; ///< prolongations[k]: level k -> k+1
    std::size_t coarse_index = 0;
    int beta = 2;

    std::size_t n_levels() const noexcept { return meshes.size(); }
    const Mesh& finest() const { return meshes.back(); }

    /// Vertex prolongation from level `from` to level `to` (from <= to).
    SparseMatrix composed_prolongation(std::size_t from, std::size_t to) const;
};

/// Refines `coarse` n_levels-1 times. Throws SizingError before allocating
/// when the projected finest vertex count exceeds `vertex_cap`.
MeshHierarchy build_hierarchy(const Mesh& coarse, std::size_t n_levels,
                              std::size_t vertex_cap = kDefaultVertexCap,
                              std::size_t coarse_index = 0);

} // namespace fmgeig
