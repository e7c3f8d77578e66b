#include "tlns/field.hpp"

#include "tlns/error.hpp"

#include <algorithm>
#include <cmath>

namespace tlns {

FieldPair FieldPair::zero(SpacePtr space, double time)
{
    FieldPair f;
    f.velocity = Eigen::VectorXd::Zero(space->velocity_dofs());
    f.pressure = Eigen::VectorXd::Zero(space->pressure_dofs());
    f.space = std::move(space);
    f.time = time;
    return f;
}

namespace {

std::array<double, 3> clamp_bary(std::array<double, 3> l)
{
    // Points on shared edges can land a few ulps outside the ancestor.
    for (double& v : l)
        v = std::clamp(v, 0.0, 1.0);
    const double s = l[0] + l[1] + l[2];
    for (double& v : l)
        v /= s;
    return l;
}

int host_to_field_triangle(const FieldPair& field, const Triangulation& host_mesh, int host_triangle)
{
    const auto& field_mesh = *field.space->mesh();
    if (!is_ancestor(field_mesh, host_mesh))
        throw NotNested("field mesh is not an ancestor of the evaluation mesh");
    return ancestor_triangle(host_mesh, host_triangle, field_mesh);
}

} // namespace

VelocitySample evaluate_velocity_at(const FieldPair& field, const Triangulation& host_mesh, int host_triangle,
                                    const Point& p)
{
    const int t = host_to_field_triangle(field, host_mesh, host_triangle);
    const auto bary = clamp_bary(barycentric(*field.space->mesh(), t, p));
    return evaluate_velocity(*field.space, field.velocity, t, bary);
}

double evaluate_pressure_at(const FieldPair& field, const Triangulation& host_mesh, int host_triangle,
                            const Point& p)
{
    const int t = host_to_field_triangle(field, host_mesh, host_triangle);
    const auto bary = clamp_bary(barycentric(*field.space->mesh(), t, p));
    return evaluate_pressure(*field.space, field.pressure, t, bary);
}

FieldPair prolong(const FieldPair& coarse, const SpacePtr& fine_space)
{
    const auto& fine_mesh = *fine_space->mesh();
    if (!is_ancestor(*coarse.space->mesh(), fine_mesh))
        throw NotNested("prolong: fine space is not built on a refinement of the coarse mesh");
    if (coarse.space->kind() != fine_space->kind())
        throw InvalidArgument("prolong: element kinds differ");

    FieldPair fine = FieldPair::zero(fine_space, coarse.time);
    const int ns = fine_space->scalar_dofs();
    const int nv = static_cast<int>(fine_mesh.num_vertices());
    const int nt = static_cast<int>(fine_mesh.num_triangles());
    const auto& nodes = fine_space->velocity_nodes();

    // Every node is reached through some containing element; the coarse
    // function is continuous so the choice of element does not matter.
    std::vector<bool> done(static_cast<std::size_t>(ns), false);
    std::vector<bool> pressure_done(static_cast<std::size_t>(nv), false);
    for (int t = 0; t < nt; ++t) {
        const auto dofs = fine_space->element_velocity_dofs(t);
        for (int s : dofs) {
            if (done[static_cast<std::size_t>(s)])
                continue;
            const bool is_bubble = fine_space->kind() == ElementKind::Mini && s >= nv;
            if (is_bubble)
                continue;
            const auto v = evaluate_velocity_at(coarse, fine_mesh, t, nodes[s]);
            fine.velocity[s] = v.value[0];
            fine.velocity[ns + s] = v.value[1];
            done[static_cast<std::size_t>(s)] = true;
        }
        for (int v : fine_space->element_pressure_dofs(t)) {
            if (pressure_done[static_cast<std::size_t>(v)])
                continue;
            fine.pressure[v] = evaluate_pressure_at(coarse, fine_mesh, t, fine_mesh.vertices()[v]);
            pressure_done[static_cast<std::size_t>(v)] = true;
        }
    }

    if (fine_space->kind() == ElementKind::Mini) {
        const auto& tris = fine_mesh.triangles();
        for (int t = 0; t < nt; ++t) {
            const int s = nv + t;
            const auto v = evaluate_velocity_at(coarse, fine_mesh, t, nodes[s]);
            for (int c = 0; c < 2; ++c) {
                const double p1 = (fine.velocity[c * ns + tris[t][0]] + fine.velocity[c * ns + tris[t][1]]
                                   + fine.velocity[c * ns + tris[t][2]]) / 3.0;
                fine.velocity[c * ns + s] = v.value[c] - p1;
            }
        }
    }

    // Keep homogeneous boundary values exact when the coarse field has them.
    const int cns = coarse.space->scalar_dofs();
    bool coarse_homogeneous = true;
    for (int s = 0; s < cns && coarse_homogeneous; ++s) {
        if (coarse.space->dirichlet()[s])
            coarse_homogeneous = coarse.velocity[s] == 0.0 && coarse.velocity[cns + s] == 0.0;
    }
    if (coarse_homogeneous) {
        for (int s = 0; s < ns; ++s) {
            if (fine_space->dirichlet()[s]) {
                fine.velocity[s] = 0.0;
                fine.velocity[ns + s] = 0.0;
            }
        }
    }
    return fine;
}

double prolongation_defect(const FieldPair& coarse, const FieldPair& prolonged)
{
    const auto& fine_space = *prolonged.space;
    const auto& fine_mesh = *fine_space.mesh();
    const auto& rule = quadrature(6);
    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(fine_mesh.num_triangles()); ++t) {
        const auto& g = fine_space.geometry(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point p = g.map(rule.points[q]);
            const auto vc = evaluate_velocity_at(coarse, fine_mesh, t, p);
            const auto vf = evaluate_velocity(fine_space, prolonged.velocity, t, rule.points[q]);
            const double dx = vc.value[0] - vf.value[0];
            const double dy = vc.value[1] - vf.value[1];
            sum += 2.0 * g.area * rule.weights[q] * (dx * dx + dy * dy);
        }
    }
    return std::sqrt(sum);
}

} // namespace tlns
