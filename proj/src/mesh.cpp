#include "tlns/mesh.hpp"

#include "tlns/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>

namespace tlns {

bool Rectangle::on_boundary(const Point& p, double tol) const
{
    const double scale = std::max(x1 - x0, y1 - y0);
    const double t = tol * scale;
    return std::abs(p.x - x0) <= t || std::abs(p.x - x1) <= t || std::abs(p.y - y0) <= t
        || std::abs(p.y - y1) <= t;
}

namespace {

double distance(const Point& a, const Point& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

} // namespace

Triangulation::Triangulation(Rectangle domain,
                             std::vector<Point> vertices,
                             std::vector<TriangleVertices> triangles,
                             double grid_spacing,
                             int level,
                             std::shared_ptr<const Triangulation> parent_mesh,
                             std::vector<int> parent_triangle)
    : domain_(domain)
    , vertices_(std::move(vertices))
    , triangles_(std::move(triangles))
    , grid_spacing_(grid_spacing)
    , level_(level)
    , parent_mesh_(std::move(parent_mesh))
    , parent_triangle_(std::move(parent_triangle))
{
    if (parent_mesh_ && parent_triangle_.size() != triangles_.size())
        throw InvalidArgument("parent map must cover every triangle");

    // Edge table: edges are keyed by (min, max) vertex pair in order of first appearance.
    std::map<EdgeVertices, int> edge_index;
    std::vector<int> edge_use;
    triangle_edges_.resize(triangles_.size());
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        for (int k = 0; k < 3; ++k) {
            int a = tri[k];
            int b = tri[(k + 1) % 3];
            EdgeVertices key{std::min(a, b), std::max(a, b)};
            auto [it, inserted] = edge_index.emplace(key, static_cast<int>(edges_.size()));
            if (inserted) {
                edges_.push_back(key);
                edge_use.push_back(0);
            }
            ++edge_use[it->second];
            triangle_edges_[t][k] = it->second;
        }
    }

    boundary_edge_.assign(edges_.size(), false);
    boundary_vertex_.assign(vertices_.size(), false);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        if (edge_use[e] == 1) {
            boundary_edge_[e] = true;
            boundary_vertex_[edges_[e][0]] = true;
            boundary_vertex_[edges_[e][1]] = true;
        }
    }

    for (const auto& e : edges_)
        mesh_size_ = std::max(mesh_size_, distance(vertices_[e[0]], vertices_[e[1]]));
}

double Triangulation::signed_area(int triangle) const
{
    const auto& t = triangles_[triangle];
    const Point& a = vertices_[t[0]];
    const Point& b = vertices_[t[1]];
    const Point& c = vertices_[t[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Point Triangulation::centroid(int triangle) const
{
    const auto& t = triangles_[triangle];
    Point c;
    for (int v : t) {
        c.x += vertices_[v].x / 3.0;
        c.y += vertices_[v].y / 3.0;
    }
    return c;
}

MeshPtr build_structured_mesh(int n, const Rectangle& domain)
{
    if (n < 1)
        throw InvalidArgument("build_structured_mesh: n must be at least 1, got " + std::to_string(n));

    const int stride = n + 1;
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(stride * stride));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            // Exact endpoints keep boundary detection free of rounding.
            double x = (i == n) ? domain.x1 : domain.x0 + (domain.x1 - domain.x0) * i / n;
            double y = (j == n) ? domain.y1 : domain.y0 + (domain.y1 - domain.y0) * j / n;
            vertices.push_back({x, y});
        }
    }

    std::vector<TriangleVertices> triangles;
    triangles.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            int v00 = j * stride + i;
            int v10 = v00 + 1;
            int v01 = v00 + stride;
            int v11 = v01 + 1;
            triangles.push_back({v00, v10, v11});
            triangles.push_back({v00, v11, v01});
        }
    }

    const double spacing = std::max(domain.x1 - domain.x0, domain.y1 - domain.y0) / n;
    return std::make_shared<const Triangulation>(domain, std::move(vertices), std::move(triangles),
                                                 spacing, 0);
}

MeshPtr refine_uniform(const MeshPtr& mesh)
{
    const auto& old_vertices = mesh->vertices();
    const int nv = static_cast<int>(old_vertices.size());

    std::vector<Point> vertices = old_vertices;
    vertices.reserve(old_vertices.size() + mesh->num_edges());
    for (const auto& e : mesh->edges()) {
        const Point& a = old_vertices[e[0]];
        const Point& b = old_vertices[e[1]];
        vertices.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    }

    std::vector<TriangleVertices> triangles;
    std::vector<int> parents;
    triangles.reserve(4 * mesh->num_triangles());
    parents.reserve(4 * mesh->num_triangles());
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
        const auto& tri = mesh->triangles()[t];
        const auto& te = mesh->triangle_edges()[t];
        // m0 on edge (v0,v1), m1 on (v1,v2), m2 on (v2,v0).
        int m0 = nv + te[0];
        int m1 = nv + te[1];
        int m2 = nv + te[2];
        triangles.push_back({tri[0], m0, m2});
        triangles.push_back({m0, tri[1], m1});
        triangles.push_back({m2, m1, tri[2]});
        triangles.push_back({m0, m1, m2});
        for (int i = 0; i < 4; ++i)
            parents.push_back(static_cast<int>(t));
    }

    return std::make_shared<const Triangulation>(mesh->domain(), std::move(vertices),
                                                 std::move(triangles), 0.5 * mesh->grid_spacing(),
                                                 mesh->level() + 1, mesh, std::move(parents));
}

ConformityReport check_conformity(const Triangulation& mesh)
{
    ConformityReport report;
    double total_area = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        double area = mesh.signed_area(static_cast<int>(t));
        if (!(area > 0.0))
            report.positive_orientation = false;
        total_area += area;
    }
    const double domain_area = mesh.domain().area();
    report.area_matches_domain = std::abs(total_area - domain_area) <= 1e-12 * std::max(1.0, domain_area);

    std::vector<int> use(mesh.num_edges(), 0);
    for (const auto& te : mesh.triangle_edges())
        for (int e : te)
            ++use[e];

    const auto& verts = mesh.vertices();
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        if (use[e] > 2)
            report.edges_shared_at_most_twice = false;
        if (use[e] == 1) {
            const auto& ev = mesh.edges()[e];
            const Point mid{0.5 * (verts[ev[0]].x + verts[ev[1]].x), 0.5 * (verts[ev[0]].y + verts[ev[1]].y)};
            const Point& a = verts[ev[0]];
            const Point& b = verts[ev[1]];
            const auto& d = mesh.domain();
            const double tol = 1e-12 * std::max(d.x1 - d.x0, d.y1 - d.y0);
            bool vertical_side = (std::abs(a.x - b.x) <= tol)
                && (std::abs(a.x - d.x0) <= tol || std::abs(a.x - d.x1) <= tol);
            bool horizontal_side = (std::abs(a.y - b.y) <= tol)
                && (std::abs(a.y - d.y0) <= tol || std::abs(a.y - d.y1) <= tol);
            if (!(vertical_side || horizontal_side) || !d.on_boundary(mid))
                report.open_edges_on_boundary = false;
        }
    }

    const long long euler = static_cast<long long>(mesh.num_vertices())
        - static_cast<long long>(mesh.num_edges()) + static_cast<long long>(mesh.num_triangles());
    report.euler_characteristic_ok = (euler == 1);

    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        if (mesh.boundary_vertex()[v] != mesh.domain().on_boundary(verts[v]))
            report.boundary_flags_exact = false;
    }
    return report;
}

MeshHierarchy::MeshHierarchy(std::vector<MeshPtr> levels)
    : levels_(std::move(levels))
{
    if (levels_.empty())
        throw InvalidArgument("mesh hierarchy needs at least one level");
    for (std::size_t k = 1; k < levels_.size(); ++k) {
        if (levels_[k]->parent_mesh() != levels_[k - 1])
            throw NotNested("level " + std::to_string(k) + " is not a refinement of level " + std::to_string(k - 1));
    }
}

const std::vector<int>& MeshHierarchy::parent_map(int k) const
{
    if (k < 0 || k + 1 >= num_levels())
        throw InvalidArgument("parent_map: no level pair (" + std::to_string(k) + ", " + std::to_string(k + 1) + ")");
    return levels_[static_cast<std::size_t>(k + 1)]->parent_triangle();
}

MeshHierarchy build_hierarchy(int n_coarse, int fine_levels, const Rectangle& domain)
{
    if (fine_levels < 0)
        throw InvalidArgument("build_hierarchy: fine_levels must be nonnegative");
    std::vector<MeshPtr> levels;
    levels.push_back(build_structured_mesh(n_coarse, domain));
    for (int k = 0; k < fine_levels; ++k)
        levels.push_back(refine_uniform(levels.back()));
    return MeshHierarchy(std::move(levels));
}

int choose_fine_level_for_coupling(double coarse_spacing, const MeshHierarchy& hierarchy)
{
    const double bound = std::sqrt(2.0) * coarse_spacing * coarse_spacing;
    for (int k = 1; k < hierarchy.num_levels(); ++k) {
        if (hierarchy.level(k)->grid_spacing() <= bound * (1.0 + 1e-12))
            return k;
    }
    throw CouplingError("no level of the hierarchy (finest h = " + std::to_string(hierarchy.finest()->grid_spacing())
                        + ") satisfies h <= sqrt(2) H^2 = " + std::to_string(bound)
                        + "; add refinement levels");
}

bool is_ancestor(const Triangulation& coarse, const Triangulation& fine)
{
    const Triangulation* m = &fine;
    while (m) {
        if (m == &coarse)
            return true;
        m = m->parent_mesh().get();
    }
    return false;
}

int ancestor_triangle(const Triangulation& fine, int triangle, const Triangulation& coarse)
{
    const Triangulation* m = &fine;
    int t = triangle;
    while (m != &coarse) {
        if (!m->parent_mesh())
            throw NotNested("mesh is not a refinement of the requested coarse mesh");
        t = m->parent_triangle()[static_cast<std::size_t>(t)];
        m = m->parent_mesh().get();
    }
    return t;
}

std::array<double, 3> barycentric(const Triangulation& mesh, int triangle, const Point& p)
{
    const auto& t = mesh.triangles()[triangle];
    const Point& a = mesh.vertices()[t[0]];
    const Point& b = mesh.vertices()[t[1]];
    const Point& c = mesh.vertices()[t[2]];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    const double l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
    const double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
    return {1.0 - l1 - l2, l1, l2};
}

void write_mesh(std::ostream& os, const Triangulation& mesh)
{
    os << "vertices " << mesh.num_vertices() << " triangles " << mesh.num_triangles() << '\n';
    os.precision(17);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        const Point& p = mesh.vertices()[v];
        os << p.x << ' ' << p.y << ' ' << (mesh.boundary_vertex()[v] ? 1 : 0) << '\n';
    }
    for (const auto& t : mesh.triangles())
        os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

} // namespace tlns
