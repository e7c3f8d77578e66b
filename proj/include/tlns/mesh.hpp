#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

namespace tlns {

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rectangle
{
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 1.0;
    double y1 = 1.0;

    double area() const { return (x1 - x0) * (y1 - y0); }
    bool on_boundary(const Point& p, double tol = 1e-12) const;
};

using TriangleVertices = std::array<int, 3>;
using EdgeVertices = std::array<int, 2>;

/**
 * An immutable conforming triangulation.
 *
 * Triangles are counterclockwise. Local edge k of a triangle joins local
 * vertices k and (k + 1) % 3. Edges are stored with the smaller vertex index
 * first. Meshes produced by refine_uniform() remember the mesh they were
 * refined from, which gives cheap ancestor lookups for nested-space transfer.
 */
class Triangulation
{
public:
    Triangulation(Rectangle domain,
                  std::vector<Point> vertices,
                  std::vector<TriangleVertices> triangles,
                  double grid_spacing,
                  int level,
                  std::shared_ptr<const Triangulation> parent_mesh = nullptr,
                  std::vector<int> parent_triangle = {});

    const Rectangle& domain() const { return domain_; }
    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<TriangleVertices>& triangles() const { return triangles_; }
    const std::vector<EdgeVertices>& edges() const { return edges_; }
    /// Global edge index of each local edge of each triangle.
    const std::vector<std::array<int, 3>>& triangle_edges() const { return triangle_edges_; }
    const std::vector<bool>& boundary_vertex() const { return boundary_vertex_; }
    const std::vector<bool>& boundary_edge() const { return boundary_edge_; }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_triangles() const { return triangles_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    /// Longest edge over all triangles.
    double mesh_size() const { return mesh_size_; }
    /// Leg length of the structured grid cells (1/n on the unit square).
    double grid_spacing() const { return grid_spacing_; }
    int level() const { return level_; }

    double signed_area(int triangle) const;
    Point centroid(int triangle) const;

    const std::shared_ptr<const Triangulation>& parent_mesh() const { return parent_mesh_; }
    /// For each triangle the index of its parent in parent_mesh(); empty at level 0.
    const std::vector<int>& parent_triangle() const { return parent_triangle_; }

private:
    Rectangle domain_;
    std::vector<Point> vertices_;
    std::vector<TriangleVertices> triangles_;
    std::vector<EdgeVertices> edges_;
    std::vector<std::array<int, 3>> triangle_edges_;
    std::vector<bool> boundary_vertex_;
    std::vector<bool> boundary_edge_;
    double mesh_size_ = 0.0;
    double grid_spacing_ = 0.0;
    int level_ = 0;
    std::shared_ptr<const Triangulation> parent_mesh_;
    std::vector<int> parent_triangle_;
};

using MeshPtr = std::shared_ptr<const Triangulation>;

/// n x n cells over the domain, each cell cut along its (x0,y0)-(x1,y1) diagonal.
MeshPtr build_structured_mesh(int n, const Rectangle& domain = {});

/// Red refinement: every triangle is split into four congruent children.
/// Child 4t+i of the result has parent t.
MeshPtr refine_uniform(const MeshPtr& mesh);

struct ConformityReport
{
    bool positive_orientation = true;
    bool edges_shared_at_most_twice = true;
    bool open_edges_on_boundary = true;
    bool euler_characteristic_ok = true;
    bool boundary_flags_exact = true;
    bool area_matches_domain = true;

    bool ok() const
    {
        return positive_orientation && edges_shared_at_most_twice && open_edges_on_boundary
            && euler_characteristic_ok && boundary_flags_exact && area_matches_domain;
    }
};

/// Edge-sharing audit of a triangulation.
ConformityReport check_conformity(const Triangulation& mesh);

class MeshHierarchy
{
public:
    explicit MeshHierarchy(std::vector<MeshPtr> levels);

    const std::vector<MeshPtr>& levels() const { return levels_; }
    const MeshPtr& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }
    const MeshPtr& coarsest() const { return levels_.front(); }
    const MeshPtr& finest() const { return levels_.back(); }
    int num_levels() const { return static_cast<int>(levels_.size()); }

    /// Parent of each level-(k+1) triangle in level k.
    const std::vector<int>& parent_map(int k) const;

private:
    std::vector<MeshPtr> levels_;
};

MeshHierarchy build_hierarchy(int n_coarse, int fine_levels, const Rectangle& domain = {});

/**
 * Pick the fine level for a two-level run with coarse spacing H: the
 * coarsest level k >= 1 whose grid spacing satisfies h <= sqrt(2) H^2.
 * Throws CouplingError if the hierarchy is not deep enough.
 */
int choose_fine_level_for_coupling(double coarse_spacing, const MeshHierarchy& hierarchy);

/// Index of the ancestor of `triangle` (a triangle of `fine`) in `coarse`.
/// Throws NotNested if `coarse` is not an ancestor mesh of `fine`.
int ancestor_triangle(const Triangulation& fine, int triangle, const Triangulation& coarse);

/// True if `coarse` is `fine` or one of its ancestors.
bool is_ancestor(const Triangulation& coarse, const Triangulation& fine);

/// Barycentric coordinates of p with respect to triangle t.
std::array<double, 3> barycentric(const Triangulation& mesh, int triangle, const Point& p);

/// Plain-text dump: "vertices N triangles M", then "x y flag" and "i j k" lines.
void write_mesh(std::ostream& os, const Triangulation& mesh);

} // namespace tlns
