#pragma once

#include "tlns/assembly.hpp"
#include "tlns/field.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace tlns {

enum class Regularity
{
    Smooth, // closed-form (u, p) for all t
    H1Only, // only u0 and f are known; errors by self-convergence
};

using Gradient = std::array<std::array<double, 2>, 2>; // grad[c][d] = d u_c / d x_d
using TimeGradientFunction = std::function<Gradient(const Point&, double)>;
using TimeScalarFunction = std::function<double(const Point&, double)>;

/**
 * Manufactured solution of the incompressible Navier-Stokes equations on the
 * unit square with u = 0 on the boundary. For Smooth fixtures every callback
 * is set and the forcing is synthesized as f = u_t + (u.grad)u - nu lap u + grad p.
 * For H1Only fixtures only initial_velocity and forcing are set.
 */
struct ExactSolution
{
    double nu = 1.0;
    Regularity regularity = Regularity::Smooth;
    std::string description;

    TimeVectorFunction velocity;
    TimeGradientFunction velocity_gradient;
    TimeVectorFunction velocity_laplacian;
    TimeVectorFunction velocity_dt;
    TimeScalarFunction pressure;
    TimeVectorFunction pressure_gradient;

    VectorFunction initial_velocity;
    TimeVectorFunction forcing;

    /// Strong momentum residual u_t + (u.grad)u - nu lap u + grad p - f at (p, t).
    std::array<double, 2> strong_residual(const Point& p, double t) const;
};

/// psi = sin^2(pi x) sin^2(pi y) g(t), g = 1 + sin(t)/2, u = curl psi,
/// p = (x - 1/2)(y - 1/2) g(t).
ExactSolution make_smooth_solution(double nu);

struct NonsmoothParams
{
    int modes = 64;     // truncation K of the sine series
    double delta = 0.5; // coefficients decay like k^(-3 + delta)
    double forcing_amplitude = 1.0;
};

/**
 * u0 = curl psi0 with psi0(x, y) = phi(x) phi(y),
 * phi(x) = sin^2(pi x) * sum_{k=1..K} k^(-3+delta) sin(k pi (x - 1/2)).
 * The series is rough along x = 1/2 and y = 1/2, where the H2 seminorm of u0
 * grows without bound in K. u0 is divergence free and vanishes on the
 * boundary. The forcing is amplitude * (-nu lap curl(sin^2(pi x) sin^2(pi y))),
 * time independent, which keeps the flow away from rest.
 */
ExactSolution make_nonsmooth_initial_solution(double nu, const NonsmoothParams& params = {});

/// H2 seminorm of the non-smooth u0, from the analytic series (tensor Gauss quadrature).
double nonsmooth_initial_h2_seminorm(const NonsmoothParams& params);

struct ErrorTriple
{
    double velocity_l2 = 0.0;
    double velocity_h1 = 0.0; // seminorm ||grad(u - u_h)||
    double pressure_l2 = 0.0; // both pressures normalized to zero mean
};

/// Errors against a closed-form solution. Each element is split into four
/// children and integrated with the degree-5 rule on each.
ErrorTriple compute_errors(const FieldPair& field, const ExactSolution& exact, double t);

/// Errors of `field` against `reference` on a nested finer space. The field
/// is prolonged to the reference space and the difference is integrated there.
ErrorTriple compute_self_errors(const FieldPair& field, const FieldPair& reference);

/// order_i = log2(e_i / e_{i+1}); sizes must halve from entry to entry.
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& sizes);

/// tau*(t) = min(1, t).
double tau_star(double t);

/// e_i * tau*(t_i)^power. Requires t_i > 0.
std::vector<double> weighted_error_trace(const std::vector<double>& times, const std::vector<double>& errors,
                                         double weight_power);

struct WeightPowers
{
    double velocity_l2 = 0.5;
    double velocity_h1 = 0.5;
    double pressure_l2 = 0.5;
};

struct ErrorRow
{
    double t = 0.0;
    double h = 0.0;
    double H = 0.0;
    ErrorTriple error;
    ErrorTriple weighted;
};

struct ErrorReport
{
    std::vector<ErrorRow> rows;
    WeightPowers powers;

    void add(double t, double h, double H, const ErrorTriple& e);

    /// EOC of rows with sample time t, ordered by decreasing h.
    struct EocTable
    {
        std::vector<double> h;
        std::vector<double> velocity_l2;
        std::vector<double> velocity_h1;
        std::vector<double> pressure_l2;
    };
    EocTable eoc_at(double t) const;
};

/// Columns: t, h, H, err_u_L2, err_u_H1, err_p_L2, w_err_u_L2, w_err_u_H1, w_err_p_L2.
void write_csv(std::ostream& os, const ErrorReport& report);

} // namespace tlns
