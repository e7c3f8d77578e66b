#include "tlns/assembly.hpp"

#include "tlns/error.hpp"

#include <vector>

namespace tlns {

namespace {

using Triplet = Eigen::Triplet<double>;

// Mass products of MINI bubbles are degree 6; the stiffness and divergence
// integrands stay within degree 4.
constexpr int kMassQuadrature = 6;

} // namespace

DiscreteSystem assemble_bilinear(SpacePtr space)
{
    const auto& sp = *space;
    const int ns = sp.scalar_dofs();
    const int nvel = sp.velocity_dofs();
    const int np = sp.pressure_dofs();
    const int nt = static_cast<int>(sp.mesh()->num_triangles());
    const int nloc = sp.local_velocity_dofs();

    const auto& mass_rule = quadrature(kMassQuadrature);
    const auto& rule = quadrature(kBilinearQuadrature);

    std::vector<Triplet> mass_t;
    std::vector<Triplet> stiff_t;
    std::vector<Triplet> div_t;
    std::vector<Triplet> pattern_t;
    mass_t.reserve(static_cast<std::size_t>(nt * nloc * nloc * 2));
    stiff_t.reserve(mass_t.capacity());
    div_t.reserve(static_cast<std::size_t>(nt * 3 * nloc * 2));
    pattern_t.reserve(static_cast<std::size_t>(nt * nloc * nloc * 4));
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(np);

    for (int t = 0; t < nt; ++t) {
        const auto& g = sp.geometry(t);
        const auto vdofs = sp.element_velocity_dofs(t);
        const auto pdofs = sp.element_pressure_dofs(t);

        double m_loc[kMaxLocalVelocityDofs][kMaxLocalVelocityDofs] = {};
        double a_loc[kMaxLocalVelocityDofs][kMaxLocalVelocityDofs] = {};
        double b_loc[3][kMaxLocalVelocityDofs][2] = {};

        for (std::size_t q = 0; q < mass_rule.size(); ++q) {
            const double w = 2.0 * g.area * mass_rule.weights[q];
            const auto phi = sp.velocity_basis(t, mass_rule.points[q]);
            for (int a = 0; a < nloc; ++a)
                for (int b = 0; b < nloc; ++b)
                    m_loc[a][b] += w * phi.value[a] * phi.value[b];
        }
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double w = 2.0 * g.area * rule.weights[q];
            const auto phi = sp.velocity_basis(t, rule.points[q]);
            const auto chi = sp.pressure_basis(t, rule.points[q]);
            for (int a = 0; a < nloc; ++a)
                for (int b = 0; b < nloc; ++b)
                    a_loc[a][b] += w * (phi.grad[a][0] * phi.grad[b][0] + phi.grad[a][1] * phi.grad[b][1]);
            for (int i = 0; i < 3; ++i) {
                for (int a = 0; a < nloc; ++a)
                    for (int d = 0; d < 2; ++d)
                        b_loc[i][a][d] += w * chi.value[i] * phi.grad[a][d];
            }
        }
        for (int i = 0; i < 3; ++i)
            mean[pdofs[i]] += g.area / 3.0;

        for (int c = 0; c < 2; ++c) {
            for (int a = 0; a < nloc; ++a) {
                const int row = c * ns + vdofs[a];
                for (int b = 0; b < nloc; ++b) {
                    const int col = c * ns + vdofs[b];
                    mass_t.emplace_back(row, col, m_loc[a][b]);
                    stiff_t.emplace_back(row, col, a_loc[a][b]);
                }
                for (int d = 0; d < 2; ++d)
                    for (int b = 0; b < nloc; ++b)
                        pattern_t.emplace_back(row, d * ns + vdofs[b], 0.0);
            }
        }
        for (int i = 0; i < 3; ++i)
            for (int a = 0; a < nloc; ++a)
                for (int d = 0; d < 2; ++d)
                    div_t.emplace_back(pdofs[i], d * ns + vdofs[a], b_loc[i][a][d]);
    }

    DiscreteSystem sys;
    sys.space = std::move(space);
    sys.mass.resize(nvel, nvel);
    sys.mass.setFromTriplets(mass_t.begin(), mass_t.end());
    sys.stiffness.resize(nvel, nvel);
    sys.stiffness.setFromTriplets(stiff_t.begin(), stiff_t.end());
    sys.divergence.resize(np, nvel);
    sys.divergence.setFromTriplets(div_t.begin(), div_t.end());
    sys.full_pattern.resize(nvel, nvel);
    sys.full_pattern.setFromTriplets(pattern_t.begin(), pattern_t.end());
    sys.pressure_mean = mean;
    sys.mass_diagonal = sys.mass.diagonal();
    for (int s = 0; s < ns; ++s) {
        if (sys.space->dirichlet()[s]) {
            sys.mass_diagonal[s] = 0.0;
            sys.mass_diagonal[ns + s] = 0.0;
        }
    }
    return sys;
}

Eigen::VectorXd assemble_load(const TimeVectorFunction& f, double t, const MixedSpace& space)
{
    const int ns = space.scalar_dofs();
    const int nloc = space.local_velocity_dofs();
    const auto& rule = quadrature(kNonlinearQuadrature);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(space.velocity_dofs());
    for (int e = 0; e < static_cast<int>(space.mesh()->num_triangles()); ++e) {
        const auto& g = space.geometry(e);
        const auto dofs = space.element_velocity_dofs(e);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double w = 2.0 * g.area * rule.weights[q];
            const auto phi = space.velocity_basis(e, rule.points[q]);
            const auto fv = f(g.map(rule.points[q]), t);
            for (int a = 0; a < nloc; ++a) {
                load[dofs[a]] += w * fv[0] * phi.value[a];
                load[ns + dofs[a]] += w * fv[1] * phi.value[a];
            }
        }
    }
    return load;
}

ConvectionOperator::ConvectionOperator(SpacePtr space)
    : space_(std::move(space))
    , tables_(std::make_shared<const ElementTables>(*space_, quadrature(kNonlinearQuadrature)))
{
}

Eigen::VectorXd ConvectionOperator::apply(const Eigen::VectorXd& w, const Eigen::VectorXd& u) const
{
    const auto& sp = *space_;
    if (w.size() != sp.velocity_dofs() || u.size() != sp.velocity_dofs())
        throw InvalidArgument("convection: field sizes do not match the space");
    const int ns = sp.scalar_dofs();
    const int nloc = sp.local_velocity_dofs();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(sp.velocity_dofs());
    for (int e = 0; e < static_cast<int>(sp.mesh()->num_triangles()); ++e) {
        const auto dofs = sp.element_velocity_dofs(e);
        for (std::size_t q = 0; q < tables_->points_per_element(); ++q) {
            const auto& phi = tables_->velocity(e, q);
            const double wq = tables_->weight(e, q);
            const auto ws = evaluate_velocity(sp, w, e, phi);
            const auto us = evaluate_velocity(sp, u, e, phi);
            for (int c = 0; c < 2; ++c) {
                const double w_grad_u = ws.value[0] * us.grad[c][0] + ws.value[1] * us.grad[c][1];
                for (int a = 0; a < nloc; ++a) {
                    const double w_grad_phi = ws.value[0] * phi.grad[a][0] + ws.value[1] * phi.grad[a][1];
                    out[c * ns + dofs[a]] += wq * 0.5 * (w_grad_u * phi.value[a] - w_grad_phi * us.value[c]);
                }
            }
        }
    }
    return out;
}

SparseMatrix ConvectionOperator::jacobian(const Eigen::VectorXd& u) const
{
    const auto& sp = *space_;
    if (u.size() != sp.velocity_dofs())
        throw InvalidArgument("convection jacobian: field size does not match the space");
    const int ns = sp.scalar_dofs();
    const int nloc = sp.local_velocity_dofs();
    const int nt = static_cast<int>(sp.mesh()->num_triangles());
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(nt * nloc * nloc * 4));

    for (int e = 0; e < nt; ++e) {
        const auto dofs = sp.element_velocity_dofs(e);
        // local[c][a][d][r]
        double local[2][kMaxLocalVelocityDofs][2][kMaxLocalVelocityDofs] = {};
        for (std::size_t q = 0; q < tables_->points_per_element(); ++q) {
            const auto& phi = tables_->velocity(e, q);
            const double wq = 0.5 * tables_->weight(e, q);
            const auto us = evaluate_velocity(sp, u, e, phi);
            for (int a = 0; a < nloc; ++a) {
                const double u_grad_a = us.value[0] * phi.grad[a][0] + us.value[1] * phi.grad[a][1];
                for (int r = 0; r < nloc; ++r) {
                    const double u_grad_r = us.value[0] * phi.grad[r][0] + us.value[1] * phi.grad[r][1];
                    // b(u, v, phi): only same-component coupling.
                    const double same = u_grad_r * phi.value[a] - u_grad_a * phi.value[r];
                    for (int c = 0; c < 2; ++c) {
                        local[c][a][c][r] += wq * same;
                        // b(v, u, phi) with v = psi_r e_d.
                        for (int d = 0; d < 2; ++d) {
                            local[c][a][d][r] += wq * phi.value[r]
                                * (us.grad[c][d] * phi.value[a] - phi.grad[a][d] * us.value[c]);
                        }
                    }
                }
            }
        }
        for (int c = 0; c < 2; ++c)
            for (int a = 0; a < nloc; ++a)
                for (int d = 0; d < 2; ++d)
                    for (int r = 0; r < nloc; ++r)
                        trips.emplace_back(c * ns + dofs[a], d * ns + dofs[r], local[c][a][d][r]);
    }
    SparseMatrix jac(sp.velocity_dofs(), sp.velocity_dofs());
    jac.setFromTriplets(trips.begin(), trips.end());
    return jac;
}

SparseMatrix ConvectionOperator::oseen(const Eigen::VectorXd& w) const
{
    const auto& sp = *space_;
    if (w.size() != sp.velocity_dofs())
        throw InvalidArgument("oseen operator: field size does not match the space");
    const int ns = sp.scalar_dofs();
    const int nloc = sp.local_velocity_dofs();
    const int nt = static_cast<int>(sp.mesh()->num_triangles());
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(nt * nloc * nloc * 4));
    for (int e = 0; e < nt; ++e) {
        const auto dofs = sp.element_velocity_dofs(e);
        double local[kMaxLocalVelocityDofs][kMaxLocalVelocityDofs] = {};
        for (std::size_t q = 0; q < tables_->points_per_element(); ++q) {
            const auto& phi = tables_->velocity(e, q);
            const double wq = 0.5 * tables_->weight(e, q);
            const auto ws = evaluate_velocity(sp, w, e, phi);
            for (int a = 0; a < nloc; ++a) {
                const double w_grad_a = ws.value[0] * phi.grad[a][0] + ws.value[1] * phi.grad[a][1];
                for (int r = 0; r < nloc; ++r) {
                    const double w_grad_r = ws.value[0] * phi.grad[r][0] + ws.value[1] * phi.grad[r][1];
                    local[a][r] += wq * (w_grad_r * phi.value[a] - w_grad_a * phi.value[r]);
                }
            }
        }
        for (int c = 0; c < 2; ++c)
            for (int a = 0; a < nloc; ++a)
                for (int d = 0; d < 2; ++d)
                    for (int r = 0; r < nloc; ++r)
                        trips.emplace_back(c * ns + dofs[a], d * ns + dofs[r], c == d ? local[a][r] : 0.0);
    }
    SparseMatrix op(sp.velocity_dofs(), sp.velocity_dofs());
    op.setFromTriplets(trips.begin(), trips.end());
    return op;
}

Eigen::VectorXd convection_apply(const FieldPair& w, const FieldPair& u)
{
    if (w.space != u.space)
        throw InvalidArgument("convection_apply: fields live on different spaces");
    return ConvectionOperator(u.space).apply(w.velocity, u.velocity);
}

SparseMatrix convection_jacobian(const FieldPair& u)
{
    return ConvectionOperator(u.space).jacobian(u.velocity);
}

Eigen::VectorXd discrete_divergence(const DiscreteSystem& system, const Eigen::VectorXd& velocity)
{
    return system.divergence * velocity;
}

} // namespace tlns
