#pragma once

#include "tlns/assembly.hpp"
#include "tlns/saddle_solver.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace tlns {

/// Uniform backward-Euler grid t_n = n * dt on [0, t_final].
struct TimeGrid
{
    double t_final = 0.0;
    double dt = 0.0;
    int steps = 0;
    /// True if the requested dt was shrunk so that t_final is a multiple of it.
    bool dt_adjusted = false;

    static TimeGrid make(double t_final, double requested_dt);

    double time(int n) const { return n * dt; }
    /// Index of the grid node closest to t; throws if t is off-grid by more than 1e-9 dt.
    int index_of(double t) const;
};

struct SolverConfig
{
    double nu = 1.0;
    double newton_tol = 1e-10;
    int newton_max_iters = 25;
    bool picard_fallback = true;

    void validate() const;
};

struct NonlinearLog
{
    std::vector<double> residuals; // one per iterate, starting with the initial guess
    int iterations = 0;            // linear solves performed
    bool used_picard = false;
};

/// Per-step bookkeeping reported to observers.
struct StepReport
{
    int step = 0;
    double time = 0.0;
    double divergence_inf = 0.0;   // ||B u||_inf
    double residual_inf = 0.0;     // worst saddle residual of the step
    NonlinearLog nonlinear;
};

using StepObserver = std::function<void(const FieldPair&, const StepReport&)>;

/**
 * Constrained L2 projection of u0 onto the discretely divergence-free space:
 * (u_0h, phi) - (q, div phi) = (u0, phi), (div u_0h, chi) = 0.
 */
FieldPair project_initial_data(const VectorFunction& u0, const DiscreteSystem& system);

/// Dual norm sqrt(sum r_i^2 / M_ii) over non-Dirichlet rows.
double dual_norm(const DiscreteSystem& system, const Eigen::VectorXd& momentum_residual);

/**
 * One backward-Euler step of the nonlinear Galerkin system
 *   M (u - u_n)/dt + nu A u + N(u, u) - B^T p = F(t_{n+1}),  B u = 0,
 * solved by Newton with an assembled convection Jacobian, falling back to
 * Picard (Oseen) iterations when Newton fails.
 */
class GalerkinStepper
{
public:
    GalerkinStepper(const DiscreteSystem& system, TimeVectorFunction forcing, SolverConfig config, double dt);

    FieldPair step(const FieldPair& state, double t_next);
    const StepReport& last_report() const { return report_; }

private:
    bool iterate(const FieldPair& guess, const Eigen::VectorXd& rhs_fixed, bool newton, FieldPair& iterate_state);
    FieldPair initial_guess(const FieldPair& state) const;
    double residual(const Eigen::VectorXd& rhs_fixed, const FieldPair& s, const Eigen::VectorXd& n_uu) const;

    const DiscreteSystem* system_;
    TimeVectorFunction forcing_;
    SolverConfig config_;
    double dt_;
    ConvectionOperator convection_;
    SparseMatrix linear_block_; // M/dt + nu A on the full coupling pattern
    SaddleSolver solver_;
    StepReport report_;
    // Last accepted step, used for a linear-extrapolation initial guess.
    std::optional<FieldPair> previous_input_;
    std::optional<FieldPair> previous_output_;
};

/**
 * Linear Stokes step with frozen convection forcing:
 *   M (u - u_n)/dt + nu A u - B^T p = F(t_{n+1}) - N(w, w),  B u = 0,
 * where w is a given field on the same space. The saddle matrix is
 * factorized once in the constructor and reused by every step.
 */
class FrozenStokesStepper
{
public:
    FrozenStokesStepper(const DiscreteSystem& system, TimeVectorFunction forcing, SolverConfig config, double dt);

    /// `frozen` may be null, in which case no convection forcing is applied.
    FieldPair step(const FieldPair& state, const FieldPair* frozen, double t_next);
    const StepReport& last_report() const { return report_; }
    const SaddleFactorization& factorization() const { return fact_; }

private:
    const DiscreteSystem* system_;
    TimeVectorFunction forcing_;
    SolverConfig config_;
    double dt_;
    ConvectionOperator convection_;
    SaddleFactorization fact_;
    StepReport report_;
};

/// Sampled trajectory of a time march.
struct Trajectory
{
    std::vector<FieldPair> samples;
    double max_divergence = 0.0;
    double max_residual = 0.0;
    int nonlinear_iterations = 0;
    int picard_fallbacks = 0;
};

/// Grid times at which `sample_times` are recorded; empty means only t_final.
std::vector<int> sample_indices(const TimeGrid& grid, const std::vector<double>& sample_times);

/// Project u0 then march the Galerkin system over `grid`.
Trajectory run_one_level(const VectorFunction& u0, const TimeVectorFunction& f, const DiscreteSystem& system,
                         const TimeGrid& grid, const SolverConfig& config, const std::vector<double>& sample_times,
                         const StepObserver& observer = {});

} // namespace tlns
