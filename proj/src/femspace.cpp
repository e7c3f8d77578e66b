#include "tlns/femspace.hpp"

#include "tlns/error.hpp"

#include <cmath>
#include <string>

namespace tlns {

std::string_view to_string(ElementKind kind)
{
    switch (kind) {
    case ElementKind::Mini:
        return "MINI";
    case ElementKind::TaylorHood:
        return "TAYLOR_HOOD";
    }
    return "?";
}

Point ElementGeometry::map(const std::array<double, 3>& bary) const
{
    Point p;
    for (int i = 0; i < 3; ++i) {
        p.x += bary[i] * vertices[i].x;
        p.y += bary[i] * vertices[i].y;
    }
    return p;
}

namespace {

ElementGeometry make_geometry(const Triangulation& mesh, int t)
{
    ElementGeometry g;
    const auto& tri = mesh.triangles()[t];
    for (int i = 0; i < 3; ++i)
        g.vertices[i] = mesh.vertices()[tri[i]];
    const Point& a = g.vertices[0];
    const Point& b = g.vertices[1];
    const Point& c = g.vertices[2];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    g.area = 0.5 * det;
    // grad lambda_i = rot(opposite edge) / det
    g.grad_lambda[0] = {(b.y - c.y) / det, (c.x - b.x) / det};
    g.grad_lambda[1] = {(c.y - a.y) / det, (a.x - c.x) / det};
    g.grad_lambda[2] = {(a.y - b.y) / det, (b.x - a.x) / det};
    return g;
}

void check_barycentric(const std::array<double, 3>& bary)
{
    constexpr double tol = 1e-12;
    const double sum = bary[0] + bary[1] + bary[2];
    if (std::abs(sum - 1.0) > tol || bary[0] < -tol || bary[1] < -tol || bary[2] < -tol)
        throw InvalidArgument("point lies outside the element (barycentric " + std::to_string(bary[0]) + ", "
                              + std::to_string(bary[1]) + ", " + std::to_string(bary[2]) + ")");
}

} // namespace

MixedSpace::MixedSpace(MeshPtr mesh, ElementKind kind)
    : mesh_(std::move(mesh))
    , kind_(kind)
{
    if (!mesh_)
        throw InvalidArgument("MixedSpace: null mesh");
    const auto& m = *mesh_;
    const int nv = static_cast<int>(m.num_vertices());
    const int nt = static_cast<int>(m.num_triangles());
    const int ne = static_cast<int>(m.num_edges());

    pressure_dofs_ = nv;
    pressure_map_.reserve(static_cast<std::size_t>(3 * nt));
    for (const auto& tri : m.triangles())
        pressure_map_.insert(pressure_map_.end(), tri.begin(), tri.end());

    nodes_ = m.vertices();
    dirichlet_ = m.boundary_vertex();

    if (kind_ == ElementKind::Mini) {
        local_count_ = 4;
        scalar_dofs_ = nv + nt;
        for (int t = 0; t < nt; ++t) {
            const auto& tri = m.triangles()[t];
            velocity_map_.insert(velocity_map_.end(), {tri[0], tri[1], tri[2], nv + t});
            nodes_.push_back(m.centroid(t));
            dirichlet_.push_back(false);
        }
    } else {
        local_count_ = 6;
        scalar_dofs_ = nv + ne;
        for (int t = 0; t < nt; ++t) {
            const auto& tri = m.triangles()[t];
            const auto& te = m.triangle_edges()[t];
            velocity_map_.insert(velocity_map_.end(), {tri[0], tri[1], tri[2], nv + te[0], nv + te[1], nv + te[2]});
        }
        for (int e = 0; e < ne; ++e) {
            const auto& ev = m.edges()[e];
            const Point& a = m.vertices()[ev[0]];
            const Point& b = m.vertices()[ev[1]];
            nodes_.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
            dirichlet_.push_back(m.boundary_edge()[e]);
        }
    }

    geometry_.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t)
        geometry_.push_back(make_geometry(m, t));
}

std::span<const int> MixedSpace::element_velocity_dofs(int triangle) const
{
    return {velocity_map_.data() + static_cast<std::size_t>(triangle) * local_count_,
            static_cast<std::size_t>(local_count_)};
}

std::span<const int> MixedSpace::element_pressure_dofs(int triangle) const
{
    return {pressure_map_.data() + static_cast<std::size_t>(triangle) * 3, 3};
}

LocalBasis MixedSpace::velocity_basis(int triangle, const std::array<double, 3>& l) const
{
    check_barycentric(l);
    const auto& g = geometry(triangle);
    LocalBasis b;
    b.count = local_count_;
    if (kind_ == ElementKind::Mini) {
        for (int i = 0; i < 3; ++i) {
            b.value[i] = l[i];
            b.grad[i] = g.grad_lambda[i];
        }
        b.value[3] = 27.0 * l[0] * l[1] * l[2];
        for (int d = 0; d < 2; ++d) {
            b.grad[3][d] = 27.0
                * (g.grad_lambda[0][d] * l[1] * l[2] + l[0] * g.grad_lambda[1][d] * l[2]
                   + l[0] * l[1] * g.grad_lambda[2][d]);
        }
    } else {
        for (int i = 0; i < 3; ++i) {
            b.value[i] = l[i] * (2.0 * l[i] - 1.0);
            for (int d = 0; d < 2; ++d)
                b.grad[i][d] = (4.0 * l[i] - 1.0) * g.grad_lambda[i][d];
        }
        for (int k = 0; k < 3; ++k) {
            const int i = k;
            const int j = (k + 1) % 3;
            b.value[3 + k] = 4.0 * l[i] * l[j];
            for (int d = 0; d < 2; ++d)
                b.grad[3 + k][d] = 4.0 * (l[i] * g.grad_lambda[j][d] + l[j] * g.grad_lambda[i][d]);
        }
    }
    return b;
}

LocalBasis MixedSpace::pressure_basis(int triangle, const std::array<double, 3>& l) const
{
    check_barycentric(l);
    const auto& g = geometry(triangle);
    LocalBasis b;
    b.count = 3;
    for (int i = 0; i < 3; ++i) {
        b.value[i] = l[i];
        b.grad[i] = g.grad_lambda[i];
    }
    return b;
}

SpacePtr build_space(MeshPtr mesh, ElementKind kind)
{
    return std::make_shared<const MixedSpace>(std::move(mesh), kind);
}

LocalBasis eval_velocity_basis(const MixedSpace& space, int triangle, const std::array<double, 3>& bary)
{
    return space.velocity_basis(triangle, bary);
}

ElementTables::ElementTables(const MixedSpace& space, const QuadratureRule& rule)
    : rule_(&rule)
{
    const int nt = static_cast<int>(space.mesh()->num_triangles());
    const std::size_t n = static_cast<std::size_t>(nt) * rule.size();
    velocity_.reserve(n);
    pressure_.reserve(n);
    weights_.reserve(n);
    points_.reserve(n);
    for (int t = 0; t < nt; ++t) {
        const auto& g = space.geometry(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            velocity_.push_back(space.velocity_basis(t, rule.points[q]));
            pressure_.push_back(space.pressure_basis(t, rule.points[q]));
            weights_.push_back(2.0 * g.area * rule.weights[q]);
            points_.push_back(g.map(rule.points[q]));
        }
    }
}

VelocitySample evaluate_velocity(const MixedSpace& space, const Eigen::VectorXd& velocity, int triangle,
                                 const LocalBasis& basis)
{
    VelocitySample s;
    const auto dofs = space.element_velocity_dofs(triangle);
    const int ns = space.scalar_dofs();
    for (int a = 0; a < basis.count; ++a) {
        for (int c = 0; c < 2; ++c) {
            const double coeff = velocity[c * ns + dofs[a]];
            s.value[c] += coeff * basis.value[a];
            s.grad[c][0] += coeff * basis.grad[a][0];
            s.grad[c][1] += coeff * basis.grad[a][1];
        }
    }
    return s;
}

VelocitySample evaluate_velocity(const MixedSpace& space, const Eigen::VectorXd& velocity, int triangle,
                                 const std::array<double, 3>& bary)
{
    return evaluate_velocity(space, velocity, triangle, space.velocity_basis(triangle, bary));
}

double evaluate_pressure(const MixedSpace& space, const Eigen::VectorXd& pressure, int triangle,
                         const std::array<double, 3>& bary)
{
    check_barycentric(bary);
    const auto dofs = space.element_pressure_dofs(triangle);
    return bary[0] * pressure[dofs[0]] + bary[1] * pressure[dofs[1]] + bary[2] * pressure[dofs[2]];
}

Eigen::VectorXd interpolate_velocity(const MixedSpace& space, const VectorFunction& u)
{
    const int ns = space.scalar_dofs();
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(2 * ns);
    const auto& nodes = space.velocity_nodes();
    const int nv = static_cast<int>(space.mesh()->num_vertices());
    const int lagrange_nodes = space.kind() == ElementKind::Mini ? nv : ns;
    for (int s = 0; s < lagrange_nodes; ++s) {
        const auto val = u(nodes[s]);
        coeffs[s] = val[0];
        coeffs[ns + s] = val[1];
    }
    if (space.kind() == ElementKind::Mini) {
        const auto& tris = space.mesh()->triangles();
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            const int s = nv + t;
            const auto val = u(nodes[s]);
            for (int c = 0; c < 2; ++c) {
                const double p1 = (coeffs[c * ns + tris[t][0]] + coeffs[c * ns + tris[t][1]]
                                   + coeffs[c * ns + tris[t][2]]) / 3.0;
                coeffs[c * ns + s] = val[c] - p1;
            }
        }
    }
    return coeffs;
}

Eigen::VectorXd interpolate_pressure(const MixedSpace& space, const ScalarFunction& p)
{
    const auto& verts = space.mesh()->vertices();
    Eigen::VectorXd coeffs(static_cast<Eigen::Index>(verts.size()));
    for (std::size_t v = 0; v < verts.size(); ++v)
        coeffs[static_cast<Eigen::Index>(v)] = p(verts[v]);
    return coeffs;
}

} // namespace tlns
