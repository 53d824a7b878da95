#include "fmgeig/mesh.hpp"

#include "fmgeig/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace fmgeig {

double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

namespace {

Edge edge_key(std::size_t a, std::size_t b) {
    return a < b ? Edge{a, b} : Edge{b, a};
}

/// Edge -> number of owning triangles.
std::map<Edge, int> edge_incidence(const std::vector<Triangle>& triangles) {
    std::map<Edge, int> count;
    for (const auto& t : triangles)
        for (int e = 0; e < 3; ++e)
            ++count[edge_key(t[e], t[(e + 1) % 3])];
    return count;
}

} // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::size_t level)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), level_(level) {
    if (triangles_.empty())
        throw InvalidArgument("Mesh: no triangles");
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        for (std::size_t v : tri)
            if (v >= vertices_.size())
                throw InvalidArgument("Mesh: triangle " + std::to_string(t) +
                                      " references a missing vertex");
        if (!(signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]) > 0.0))
            throw InvalidArgument("Mesh: triangle " + std::to_string(t) +
                                  " is degenerate or clockwise");
    }
    boundary_.assign(vertices_.size(), 0);
    for (const auto& [edge, count] : edge_incidence(triangles_)) {
        if (count == 1) {
            boundary_[edge.first] = 1;
            boundary_[edge.second] = 1;
        }
    }
    n_boundary_ = static_cast<std::size_t>(std::count(boundary_.begin(), boundary_.end(), 1));
}

std::array<Point, 3> Mesh::corners(std::size_t t) const {
    const auto& tri = triangles_.at(t);
    return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

double Mesh::triangle_area(std::size_t t) const {
    const auto c = corners(t);
    return signed_area(c[0], c[1], c[2]);
}

double Mesh::total_area() const {
    double sum = 0.0;
    for (std::size_t t = 0; t < triangles_.size(); ++t)
        sum += triangle_area(t);
    return sum;
}

double Mesh::max_edge_length() const {
    double h = 0.0;
    for (const auto& [a, b] : edges())
        h = std::max(h, std::hypot(vertices_[a].x - vertices_[b].x,
                                   vertices_[a].y - vertices_[b].y));
    return h;
}

std::vector<Edge> Mesh::edges() const {
    std::vector<Edge> out;
    out.reserve(3 * triangles_.size());
    for (const auto& t : triangles_)
        for (int e = 0; e < 3; ++e)
            out.push_back(edge_key(t[e], t[(e + 1) % 3]));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool is_conforming(const Mesh& mesh) {
    std::vector<int> boundary_degree(mesh.n_vertices(), 0);
    for (const auto& [edge, count] : edge_incidence(mesh.triangles())) {
        if (count > 2)
            return false;
        if (count == 1) {
            ++boundary_degree[edge.first];
            ++boundary_degree[edge.second];
        }
    }
    return std::all_of(boundary_degree.begin(), boundary_degree.end(),
                       [](int d) { return d % 2 == 0; });
}

Mesh unit_square_mesh(std::size_t nx) {
    if (nx == 0)
        throw InvalidArgument("unit_square_mesh: nx must be positive");
    const std::size_t n1 = nx + 1;
    std::vector<Point> vertices;
    vertices.reserve(n1 * n1);
    const double h = 1.0 / static_cast<double>(nx);
    for (std::size_t j = 0; j < n1; ++j)
        for (std::size_t i = 0; i < n1; ++i)
            vertices.push_back({i == nx ? 1.0 : static_cast<double>(i) * h,
                                j == nx ? 1.0 : static_cast<double>(j) * h});
    std::vector<Triangle> triangles;
    triangles.reserve(2 * nx * nx);
    for (std::size_t j = 0; j < nx; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t v00 = j * n1 + i;
            const std::size_t v10 = v00 + 1;
            const std::size_t v01 = v00 + n1;
            const std::size_t v11 = v01 + 1;
            triangles.push_back({v00, v10, v11});
            triangles.push_back({v00, v11, v01});
        }
    return Mesh(std::move(vertices), std::move(triangles));
}

Mesh load_mesh(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> std::istringstream {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                return std::istringstream(line);
        }
        throw ParseError(line_no + 1, "unexpected end of file");
    };
    auto expect_end = [&](std::istringstream& ss) {
        std::string rest;
        if (ss >> rest)
            throw ParseError(line_no, "trailing data '" + rest + "'");
    };

    std::size_t nv = 0, nt = 0;
    {
        auto ss = next_line();
        long long v = 0, t = 0;
        if (!(ss >> v >> t) || v < 0 || t < 0)
            throw ParseError(line_no, "expected header 'NV NT'");
        expect_end(ss);
        nv = static_cast<std::size_t>(v);
        nt = static_cast<std::size_t>(t);
    }
    std::vector<Point> vertices(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        auto ss = next_line();
        if (!(ss >> vertices[i].x >> vertices[i].y) || !std::isfinite(vertices[i].x) ||
            !std::isfinite(vertices[i].y))
            throw ParseError(line_no, "expected vertex coordinates 'x y'");
        expect_end(ss);
    }
    std::vector<Triangle> triangles(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        auto ss = next_line();
        long long a = 0, b = 0, c = 0;
        if (!(ss >> a >> b >> c))
            throw ParseError(line_no, "expected triangle indices 'i j k'");
        expect_end(ss);
        for (long long idx : {a, b, c})
            if (idx < 0 || static_cast<std::size_t>(idx) >= nv)
                throw ParseError(line_no, "vertex index " + std::to_string(idx) +
                                              " out of range for " + std::to_string(nv) +
                                              " vertices");
        triangles[t] = {static_cast<std::size_t>(a), static_cast<std::size_t>(b),
                        static_cast<std::size_t>(c)};
        if (!(signed_area(vertices[triangles[t][0]], vertices[triangles[t][1]],
                          vertices[triangles[t][2]]) > 0.0))
            throw ParseError(line_no, "triangle has zero or negative area");
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            throw ParseError(line_no, "unexpected data after the last triangle");
    }
    if (nt == 0)
        throw ParseError(line_no, "mesh has no triangles");
    return Mesh(std::move(vertices), std::move(triangles));
}

std::string save_mesh(const Mesh& mesh) {
    std::string out = std::to_string(mesh.n_vertices()) + ' ' +
                      std::to_string(mesh.n_triangles()) + '\n';
    char buf[64];
    for (const auto& p : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
        out += buf;
    }
    for (const auto& t : mesh.triangles())
        out += std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' +
               std::to_string(t[2]) + '\n';
    return out;
}

Mesh load_mesh_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open mesh file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_mesh(ss.str());
}

void save_mesh_file(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write mesh file " + path.string());
    out << save_mesh(mesh);
    if (!out)
        throw IoError("write failed for " + path.string());
}

Refinement refine_regular(const Mesh& mesh) {
    const std::size_t nv = mesh.n_vertices();
    const std::vector<Edge> edges = mesh.edges();
    std::map<Edge, std::size_t> midpoint;
    std::vector<Point> vertices = mesh.vertices();
    vertices.reserve(nv + edges.size());
    std::vector<Triplet> prolong;
    prolong.reserve(nv + 2 * edges.size());
    for (std::size_t v = 0; v < nv; ++v)
        prolong.push_back({v, v, 1.0});
    for (const auto& e : edges) {
        const std::size_t id = vertices.size();
        midpoint.emplace(e, id);
        const Point& a = mesh.vertex(e.first);
        const Point& b = mesh.vertex(e.second);
        vertices.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
        prolong.push_back({id, e.first, 0.5});
        prolong.push_back({id, e.second, 0.5});
    }

    std::vector<Triangle> triangles;
    triangles.reserve(4 * mesh.n_triangles());
    for (const auto& t : mesh.triangles()) {
        const std::size_t mab = midpoint.at(edge_key(t[0], t[1]));
        const std::size_t mbc = midpoint.at(edge_key(t[1], t[2]));
        const std::size_t mca = midpoint.at(edge_key(t[2], t[0]));
        triangles.push_back({t[0], mab, mca});
        triangles.push_back({mab, t[1], mbc});
        triangles.push_back({mca, mbc, t[2]});
        triangles.push_back({mab, mbc, mca});
    }
    const std::size_t fine_nv = vertices.size();
    return Refinement{Mesh(std::move(vertices), std::move(triangles), mesh.level() + 1),
                      SparseMatrix::from_triplets(fine_nv, nv, std::move(prolong))};
}

SparseMatrix MeshHierarchy::composed_prolongation(std::size_t from, std::size_t to) const {
    if (from > to || to >= meshes.size())
        throw InvalidArgument("composed_prolongation: invalid level range");
    SparseMatrix p = SparseMatrix::identity(meshes[from].n_vertices());
    for (std::size_t k = from; k < to; ++k)
        p = multiply(prolongations[k], p);
    return p;
}

MeshHierarchy build_hierarchy(const Mesh& coarse, std::size_t n_levels, std::size_t vertex_cap,
                              std::size_t coarse_index) {
    if (n_levels == 0)
        throw InvalidArgument("build_hierarchy: n_levels must be positive");
    if (coarse_index >= n_levels)
        throw InvalidArgument("build_hierarchy: coarse_index beyond the finest level");

    // Project V_{k+1} = V + E, E_{k+1} = 2E + 3T, T_{k+1} = 4T.
    double v = static_cast<double>(coarse.n_vertices());
    double e = static_cast<double>(coarse.edges().size());
    double t = static_cast<double>(coarse.n_triangles());
    for (std::size_t k = 1; k < n_levels; ++k) {
        v += e;
        e = 2.0 * e + 3.0 * t;
        t *= 4.0;
    }
    if (v > static_cast<double>(vertex_cap))
        throw SizingError("build_hierarchy: projected " + std::to_string(v) +
                          " vertices exceed the cap of " + std::to_string(vertex_cap));

    MeshHierarchy h;
    h.coarse_index = coarse_index;
    h.meshes.reserve(n_levels);
    h.meshes.push_back(coarse);
    for (std::size_t k = 1; k < n_levels; ++k) {
        Refinement r = refine_regular(h.meshes.back());
        h.meshes.push_back(std::move(r.mesh));
        h.prolongations.push_back(std::move(r.prolongation));
    }
    return h;
}

} // namespace fmgeig
