#pragma once

#include "tlns/field.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <memory>

namespace tlns {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Quadrature degree for bilinear forms.
inline constexpr int kBilinearQuadrature = 4;
/// Quadrature degree for the convection form, loads and error integrals.
inline constexpr int kNonlinearQuadrature = 5;

/**
 * Assembled operators of the Galerkin weak form on one MixedSpace.
 *
 * mass and stiffness act on vector velocities (both components, block
 * diagonal); stiffness carries no viscosity factor. divergence has entries
 * (chi_i, div phi_j). pressure_mean has entries int chi_i. All matrices are
 * assembled without boundary conditions; the saddle solver eliminates the
 * Dirichlet rows and columns.
 */
struct DiscreteSystem
{
    SpacePtr space;
    SparseMatrix mass;
    SparseMatrix stiffness;
    SparseMatrix divergence;
    Eigen::VectorXd pressure_mean;
    /// Diagonal of `mass` with Dirichlet entries set to zero. Used for dual norms.
    Eigen::VectorXd mass_diagonal;
    /// Zero-pattern matrix covering every velocity-velocity element coupling.
    SparseMatrix full_pattern;
};

DiscreteSystem assemble_bilinear(SpacePtr space);

/// Analytic vector field f(x, t).
using TimeVectorFunction = std::function<std::array<double, 2>(const Point&, double)>;

/// Entries (f(., t), phi_i) for every vector velocity test function.
Eigen::VectorXd assemble_load(const TimeVectorFunction& f, double t, const MixedSpace& space);

/**
 * Matrix-free application of the skew-symmetrized convection form
 *   b(w, u, phi) = 1/2 ((w . grad) u, phi) - 1/2 ((w . grad) phi, u)
 * returning the vector with entries b(w, u, phi_i).
 */
class ConvectionOperator
{
public:
    explicit ConvectionOperator(SpacePtr space);

    const SpacePtr& space() const { return space_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& w, const Eigen::VectorXd& u) const;

    /// Jacobian of u -> N(u, u): L v = b(u, v, .) + b(v, u, .).
    /// Assembled on the full element coupling pattern so its structure never changes.
    SparseMatrix jacobian(const Eigen::VectorXd& u) const;

    /// Oseen (Picard) linearization: O v = b(w, v, .), on the same full pattern.
    SparseMatrix oseen(const Eigen::VectorXd& w) const;

private:
    SpacePtr space_;
    std::shared_ptr<const ElementTables> tables_;
};

Eigen::VectorXd convection_apply(const FieldPair& w, const FieldPair& u);
SparseMatrix convection_jacobian(const FieldPair& u);

/// Discrete divergence B u (one entry per pressure test function).
Eigen::VectorXd discrete_divergence(const DiscreteSystem& system, const Eigen::VectorXd& velocity);

} // namespace tlns
