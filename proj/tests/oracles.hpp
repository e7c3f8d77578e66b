#pragma once

// Independent reference computations used by the unit tests and the
// acceptance binary. They share only the basis evaluation with the library
// and deliberately use dense or per-point code paths.

#include "tlns/assembly.hpp"
#include "tlns/quadrature.hpp"

#include <Eigen/Dense>

#include <random>

namespace tlns::oracle {

/// b(w, u, phi_i) by looping elements and points with the degree-5 rule.
inline Eigen::VectorXd slow_convection(const MixedSpace& sp, const Eigen::VectorXd& w, const Eigen::VectorXd& u)
{
    const int ns = sp.scalar_dofs();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * ns);
    const auto& rule = quadrature(kNonlinearQuadrature);
    for (int t = 0; t < static_cast<int>(sp.mesh()->num_triangles()); ++t) {
        const auto dofs = sp.element_velocity_dofs(t);
        const double area = sp.geometry(t).area;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto W = evaluate_velocity(sp, w, t, rule.points[q]);
            const auto U = evaluate_velocity(sp, u, t, rule.points[q]);
            const auto phi = sp.velocity_basis(t, rule.points[q]);
            const double jw = 2.0 * area * rule.weights[q];
            for (int a = 0; a < phi.count; ++a) {
                const double wgrad_phi = W.value[0] * phi.grad[a][0] + W.value[1] * phi.grad[a][1];
                for (int c = 0; c < 2; ++c) {
                    const double wgrad_u = W.value[0] * U.grad[c][0] + W.value[1] * U.grad[c][1];
                    out[c * ns + dofs[a]] += jw * 0.5 * (wgrad_u * phi.value[a] - wgrad_phi * U.value[c]);
                }
            }
        }
    }
    return out;
}

/// (f, phi_i) by per-point evaluation with a chosen rule.
inline Eigen::VectorXd slow_load(const TimeVectorFunction& f, double time, const MixedSpace& sp, int degree)
{
    const int ns = sp.scalar_dofs();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * ns);
    const auto& rule = quadrature(degree);
    for (int t = 0; t < static_cast<int>(sp.mesh()->num_triangles()); ++t) {
        const auto dofs = sp.element_velocity_dofs(t);
        const auto& g = sp.geometry(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto fx = f(g.map(rule.points[q]), time);
            const auto phi = sp.velocity_basis(t, rule.points[q]);
            for (int a = 0; a < phi.count; ++a)
                for (int c = 0; c < 2; ++c)
                    out[c * ns + dofs[a]] += 2.0 * g.area * rule.weights[q] * fx[c] * phi.value[a];
        }
    }
    return out;
}

struct DenseSolution
{
    Eigen::VectorXd velocity;
    Eigen::VectorXd pressure;
};

/**
 * Dense solve of  K u - B^T p = f,  -B u + c l = g,  c^T p = 0  with Dirichlet
 * rows of K replaced by identity rows and f zeroed there. Uses full-pivot LU.
 */
inline DenseSolution dense_saddle_solve(const SparseMatrix& K, const DiscreteSystem& sys, const Eigen::VectorXd& f,
                                        const Eigen::VectorXd& g = {})
{
    const int nv = static_cast<int>(K.rows());
    const int np = static_cast<int>(sys.divergence.rows());
    const int n = nv + np + 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    const Eigen::MatrixXd Kd = Eigen::MatrixXd(K);
    const Eigen::MatrixXd Bd = Eigen::MatrixXd(sys.divergence);
    A.topLeftCorner(nv, nv) = Kd;
    A.block(0, nv, nv, np) = -Bd.transpose();
    A.block(nv, 0, np, nv) = -Bd;
    A.block(nv, nv + np, np, 1) = sys.pressure_mean;
    A.block(nv + np, nv, 1, np) = sys.pressure_mean.transpose();
    b.head(nv) = f;
    if (g.size() == np)
        b.segment(nv, np) = g;
    const int ns = sys.space->scalar_dofs();
    for (int s = 0; s < ns; ++s) {
        if (!sys.space->dirichlet()[static_cast<std::size_t>(s)])
            continue;
        for (int c = 0; c < 2; ++c) {
            const int i = c * ns + s;
            A.row(i).setZero();
            A.col(i).setZero();
            A(i, i) = 1.0;
            b[i] = 0.0;
        }
    }
    const Eigen::VectorXd x = A.fullPivLu().solve(b);
    return {x.head(nv), x.segment(nv, np)};
}

/// Random coefficient vector with homogeneous Dirichlet values.
inline Eigen::VectorXd random_velocity(const MixedSpace& sp, std::mt19937& rng, bool zero_boundary = true)
{
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int ns = sp.scalar_dofs();
    Eigen::VectorXd v(2 * ns);
    for (int i = 0; i < 2 * ns; ++i)
        v[i] = dist(rng);
    if (zero_boundary)
        for (int s = 0; s < ns; ++s)
            if (sp.dirichlet()[static_cast<std::size_t>(s)])
                v[s] = v[ns + s] = 0.0;
    return v;
}

} // namespace tlns::oracle
