#pragma once

#include "tlns/femspace.hpp"

#include <Eigen/Core>

namespace tlns {

/// Velocity and pressure coefficients on a MixedSpace at one time.
struct FieldPair
{
    SpacePtr space;
    Eigen::VectorXd velocity;
    Eigen::VectorXd pressure;
    double time = 0.0;

    static FieldPair zero(SpacePtr space, double time = 0.0);
};

/// Evaluate `field` at a physical point lying in `triangle` of a mesh nested
/// inside (or equal to) the field's mesh.
VelocitySample evaluate_velocity_at(const FieldPair& field, const Triangulation& host_mesh, int host_triangle,
                                    const Point& p);
double evaluate_pressure_at(const FieldPair& field, const Triangulation& host_mesh, int host_triangle,
                            const Point& p);

/**
 * Represent a coarse field on a nested fine space.
 *
 * Continuous P1/P2 components are reproduced exactly. A coarse MINI bubble is
 * not in the fine space; it is carried over by fine-space interpolation
 * (fine vertex values plus centroid-matching bubbles).
 */
FieldPair prolong(const FieldPair& coarse, const SpacePtr& fine_space);

/// L2 norm of (coarse - prolong(coarse)) evaluated with both representations
/// on the fine mesh. Zero up to rounding unless a MINI bubble is involved.
double prolongation_defect(const FieldPair& coarse, const FieldPair& prolonged);

} // namespace tlns
