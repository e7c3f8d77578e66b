#pragma once

#include "tlns/mesh.hpp"
#include "tlns/quadrature.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace tlns {

/// Velocity/pressure pair. Both are inf-sup stable.
enum class ElementKind
{
    Mini,       // P1 + cubic bubble / P1
    TaylorHood, // P2 / P1
};

std::string_view to_string(ElementKind kind);

inline constexpr int kMaxLocalVelocityDofs = 6;

/// Affine map data of one triangle.
struct ElementGeometry
{
    std::array<Point, 3> vertices;
    std::array<std::array<double, 2>, 3> grad_lambda; // physical gradients of barycentric coordinates
    double area = 0.0;

    Point map(const std::array<double, 3>& bary) const;
};

/// Values and physical gradients of the local scalar velocity shape functions.
struct LocalBasis
{
    int count = 0;
    std::array<double, kMaxLocalVelocityDofs> value{};
    std::array<std::array<double, 2>, kMaxLocalVelocityDofs> grad{};
};

/**
 * Scalar velocity numbering:
 *   MINI         vertices, then one bubble per triangle (nv + t)
 *   Taylor-Hood  vertices, then one node per edge (nv + e)
 * Local order: the three vertices, then the bubble or the three edges
 * (local edge k joins local vertices k and k+1).
 *
 * Vector velocity coefficients are blocked by component: index
 * c * scalar_dofs() + s for component c in {0, 1}. Pressure is P1 on vertices.
 */
class MixedSpace
{
public:
    MixedSpace(MeshPtr mesh, ElementKind kind);

    const MeshPtr& mesh() const { return mesh_; }
    ElementKind kind() const { return kind_; }

    int scalar_dofs() const { return scalar_dofs_; }
    int velocity_dofs() const { return 2 * scalar_dofs_; }
    int pressure_dofs() const { return pressure_dofs_; }
    int local_velocity_dofs() const { return local_count_; }

    std::span<const int> element_velocity_dofs(int triangle) const;
    std::span<const int> element_pressure_dofs(int triangle) const;

    /// Indexed by scalar velocity DOF.
    const std::vector<bool>& dirichlet() const { return dirichlet_; }
    /// Physical location of each scalar velocity node (bubble nodes sit at centroids).
    const std::vector<Point>& velocity_nodes() const { return nodes_; }

    const ElementGeometry& geometry(int triangle) const { return geometry_[static_cast<std::size_t>(triangle)]; }

    /// Velocity shape functions at a barycentric point. Throws for points outside the closed element.
    LocalBasis velocity_basis(int triangle, const std::array<double, 3>& bary) const;
    /// P1 pressure shape functions (value and constant gradient).
    LocalBasis pressure_basis(int triangle, const std::array<double, 3>& bary) const;

private:
    MeshPtr mesh_;
    ElementKind kind_;
    int scalar_dofs_ = 0;
    int pressure_dofs_ = 0;
    int local_count_ = 0;
    std::vector<int> velocity_map_; // local_count_ per triangle
    std::vector<int> pressure_map_; // 3 per triangle
    std::vector<bool> dirichlet_;
    std::vector<Point> nodes_;
    std::vector<ElementGeometry> geometry_;
};

using SpacePtr = std::shared_ptr<const MixedSpace>;

SpacePtr build_space(MeshPtr mesh, ElementKind kind);

/// Free-function form of MixedSpace::velocity_basis.
LocalBasis eval_velocity_basis(const MixedSpace& space, int triangle, const std::array<double, 3>& bary);

/// Tabulated shape data on every element for a fixed quadrature rule.
class ElementTables
{
public:
    ElementTables(const MixedSpace& space, const QuadratureRule& rule);

    std::size_t points_per_element() const { return rule_->size(); }
    const LocalBasis& velocity(int triangle, std::size_t q) const { return velocity_[index(triangle, q)]; }
    const LocalBasis& pressure(int triangle, std::size_t q) const { return pressure_[index(triangle, q)]; }
    double weight(int triangle, std::size_t q) const { return weights_[index(triangle, q)]; }
    const Point& point(int triangle, std::size_t q) const { return points_[index(triangle, q)]; }

private:
    std::size_t index(int triangle, std::size_t q) const
    {
        return static_cast<std::size_t>(triangle) * rule_->size() + q;
    }

    const QuadratureRule* rule_;
    std::vector<LocalBasis> velocity_;
    std::vector<LocalBasis> pressure_;
    std::vector<double> weights_; // physical weights (include 2 * area)
    std::vector<Point> points_;
};

/// Velocity value and gradient at one point: grad[c][d] = d u_c / d x_d.
struct VelocitySample
{
    std::array<double, 2> value{};
    std::array<std::array<double, 2>, 2> grad{};
};

VelocitySample evaluate_velocity(const MixedSpace& space, const Eigen::VectorXd& velocity, int triangle,
                                 const LocalBasis& basis);
VelocitySample evaluate_velocity(const MixedSpace& space, const Eigen::VectorXd& velocity, int triangle,
                                 const std::array<double, 3>& bary);
double evaluate_pressure(const MixedSpace& space, const Eigen::VectorXd& pressure, int triangle,
                         const std::array<double, 3>& bary);

using VectorFunction = std::function<std::array<double, 2>(const Point&)>;
using ScalarFunction = std::function<double(const Point&)>;

/// Nodal interpolant. For MINI the bubble coefficient makes the interpolant
/// match the function at each centroid.
Eigen::VectorXd interpolate_velocity(const MixedSpace& space, const VectorFunction& u);
Eigen::VectorXd interpolate_pressure(const MixedSpace& space, const ScalarFunction& p);

} // namespace tlns
