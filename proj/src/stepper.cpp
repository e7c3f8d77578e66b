#include "tlns/stepper.hpp"

#include "tlns/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tlns {

TimeGrid TimeGrid::make(double t_final, double requested_dt)
{
    if (!(t_final >= 0.0))
        throw InvalidArgument("time grid: t_final must be nonnegative");
    if (!(requested_dt > 0.0))
        throw InvalidArgument("time grid: dt must be positive");
    TimeGrid g;
    g.t_final = t_final;
    if (t_final == 0.0) {
        g.dt = requested_dt;
        g.steps = 0;
        return g;
    }
    const double ratio = t_final / requested_dt;
    g.steps = static_cast<int>(std::ceil(ratio - 1e-9));
    g.dt = t_final / g.steps;
    g.dt_adjusted = std::abs(g.dt - requested_dt) > 1e-12 * requested_dt;
    return g;
}

int TimeGrid::index_of(double t) const
{
    const int n = static_cast<int>(std::lround(t / dt));
    if (n < 0 || n > steps || std::abs(n * dt - t) > 1e-9 * dt)
        throw InvalidArgument("time " + std::to_string(t) + " is not a node of the time grid (dt = "
                              + std::to_string(dt) + ")");
    return n;
}

void SolverConfig::validate() const
{
    if (!(nu > 0.0))
        throw InvalidArgument("nu must be positive");
    if (!(newton_tol > 0.0))
        throw InvalidArgument("newton_tol must be positive");
    if (newton_max_iters < 1)
        throw InvalidArgument("newton_max_iters must be at least 1");
}

double dual_norm(const DiscreteSystem& system, const Eigen::VectorXd& r)
{
    double sum = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const double m = system.mass_diagonal[i];
        if (m > 0.0)
            sum += r[i] * r[i] / m;
    }
    return std::sqrt(sum);
}

namespace {

double divergence_dual_norm(const DiscreteSystem& system, const Eigen::VectorXd& velocity)
{
    const Eigen::VectorXd div = system.divergence * velocity;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < div.size(); ++i)
        sum += div[i] * div[i] / system.pressure_mean[i];
    return std::sqrt(sum);
}

void zero_dirichlet(const MixedSpace& space, Eigen::VectorXd& v)
{
    const int ns = space.scalar_dofs();
    for (int s = 0; s < ns; ++s) {
        if (space.dirichlet()[static_cast<std::size_t>(s)]) {
            v[s] = 0.0;
            v[ns + s] = 0.0;
        }
    }
}

SparseMatrix linear_block(const DiscreteSystem& system, double nu, double dt, bool full_pattern)
{
    SparseMatrix k = system.mass / dt + nu * system.stiffness;
    if (full_pattern)
        k = k + system.full_pattern;
    k.makeCompressed();
    return k;
}

} // namespace

FieldPair project_initial_data(const VectorFunction& u0, const DiscreteSystem& system)
{
    const Eigen::VectorXd load = assemble_load([&](const Point& p, double) { return u0(p); }, 0.0, *system.space);
    const SaddleFactorization fact(system.mass, system);
    const SaddleSolution sol = fact.solve(load);
    FieldPair f = FieldPair::zero(system.space, 0.0);
    f.velocity = sol.velocity;
    // The multiplier of the projection is not a physical pressure.
    return f;
}

GalerkinStepper::GalerkinStepper(const DiscreteSystem& system, TimeVectorFunction forcing, SolverConfig config,
                                 double dt)
    : system_(&system)
    , forcing_(std::move(forcing))
    , config_(config)
    , dt_(dt)
    , convection_(system.space)
    , linear_block_(linear_block(system, config.nu, dt, true))
    , solver_(system)
{
    config_.validate();
    if (!(dt > 0.0))
        throw InvalidArgument("GalerkinStepper: dt must be positive");
}

double GalerkinStepper::residual(const Eigen::VectorXd& rhs_fixed, const FieldPair& s, const Eigen::VectorXd& n_uu) const
{
    Eigen::VectorXd r = linear_block_ * s.velocity + n_uu - system_->divergence.transpose() * s.pressure - rhs_fixed;
    zero_dirichlet(*system_->space, r);
    const double momentum = dual_norm(*system_, r);
    const double continuity = divergence_dual_norm(*system_, s.velocity);
    return std::hypot(momentum, continuity);
}

FieldPair GalerkinStepper::initial_guess(const FieldPair& state) const
{
    FieldPair guess = state;
    if (previous_output_ && previous_output_->velocity.size() == state.velocity.size()
        && previous_output_->velocity == state.velocity && previous_output_->time == state.time) {
        guess.velocity = 2.0 * state.velocity - previous_input_->velocity;
        guess.pressure = 2.0 * state.pressure - previous_input_->pressure;
    }
    return guess;
}

bool GalerkinStepper::iterate(const FieldPair& guess, const Eigen::VectorXd& rhs_fixed, bool newton, FieldPair& s)
{
    s = guess;
    auto& log = report_.nonlinear;
    Eigen::VectorXd n_uu = convection_.apply(s.velocity, s.velocity);
    double r = residual(rhs_fixed, s, n_uu);
    log.residuals.push_back(r);
    if (r <= config_.newton_tol)
        return true;

    for (int k = 0; k < config_.newton_max_iters; ++k) {
        SparseMatrix block;
        Eigen::VectorXd rhs;
        if (newton) {
            const SparseMatrix jac = convection_.jacobian(s.velocity);
            block = linear_block_ + jac;
            rhs = rhs_fixed - n_uu + jac * s.velocity;
        } else {
            block = linear_block_ + convection_.oseen(s.velocity);
            rhs = rhs_fixed;
        }
        const auto& fact = solver_.factorize(block);
        const SaddleSolution sol = fact.solve(rhs);
        ++log.iterations;
        report_.residual_inf = std::max(report_.residual_inf, sol.stats.residual_norm);
        s.velocity = sol.velocity;
        s.pressure = sol.pressure;

        n_uu = convection_.apply(s.velocity, s.velocity);
        const double r_new = residual(rhs_fixed, s, n_uu);
        log.residuals.push_back(r_new);
        if (!std::isfinite(r_new))
            return false;
        if (r_new <= config_.newton_tol)
            return true;
        // Rounding floor: the update no longer reduces the residual and it is
        // already within a small multiple of the tolerance.
        if (r_new >= 0.5 * r && r_new <= 10.0 * config_.newton_tol)
            return true;
        if (newton && k >= 2 && r_new > r)
            return false;
        r = r_new;
    }
    return false;
}

FieldPair GalerkinStepper::step(const FieldPair& state, double t_next)
{
    if (state.space != system_->space)
        throw InvalidArgument("GalerkinStepper: state lives on a different space");
    report_ = StepReport{};
    report_.time = t_next;

    Eigen::VectorXd rhs_fixed = system_->mass * state.velocity / dt_ + assemble_load(forcing_, t_next, *system_->space);
    zero_dirichlet(*system_->space, rhs_fixed);

    FieldPair next;
    bool ok = iterate(initial_guess(state), rhs_fixed, true, next);
    if (!ok && config_.picard_fallback) {
        report_.nonlinear.used_picard = true;
        ok = iterate(state, rhs_fixed, false, next);
    }
    if (!ok) {
        std::ostringstream msg;
        msg << "nonlinear solve failed at t = " << t_next << "; residual history:";
        for (double r : report_.nonlinear.residuals)
            msg << ' ' << r;
        throw SolverError(SolverFailure::NewtonDiverged, msg.str());
    }
    next.time = t_next;
    report_.divergence_inf = (system_->divergence * next.velocity).lpNorm<Eigen::Infinity>();
    previous_input_ = state;
    previous_output_ = next;
    return next;
}

FrozenStokesStepper::FrozenStokesStepper(const DiscreteSystem& system, TimeVectorFunction forcing,
                                         SolverConfig config, double dt)
    : system_(&system)
    , forcing_(std::move(forcing))
    , config_(config)
    , dt_(dt)
    , convection_(system.space)
    , fact_(linear_block(system, config.nu, dt, false), system)
{
    config_.validate();
}

FieldPair FrozenStokesStepper::step(const FieldPair& state, const FieldPair* frozen, double t_next)
{
    if (state.space != system_->space)
        throw InvalidArgument("FrozenStokesStepper: state lives on a different space");
    report_ = StepReport{};
    report_.time = t_next;

    Eigen::VectorXd rhs = system_->mass * state.velocity / dt_ + assemble_load(forcing_, t_next, *system_->space);
    if (frozen) {
        if (frozen->space != system_->space)
            throw InvalidArgument("FrozenStokesStepper: frozen convection field must be prolonged to the fine space");
        rhs -= convection_.apply(frozen->velocity, frozen->velocity);
    }
    zero_dirichlet(*system_->space, rhs);

    const SaddleSolution sol = fact_.solve(rhs);
    report_.residual_inf = sol.stats.residual_norm;
    FieldPair next = FieldPair::zero(system_->space, t_next);
    next.velocity = sol.velocity;
    next.pressure = sol.pressure;
    report_.divergence_inf = (system_->divergence * next.velocity).lpNorm<Eigen::Infinity>();
    return next;
}

std::vector<int> sample_indices(const TimeGrid& grid, const std::vector<double>& sample_times)
{
    std::vector<int> idx;
    if (sample_times.empty()) {
        idx.push_back(grid.steps);
        return idx;
    }
    for (double t : sample_times)
        idx.push_back(grid.index_of(t));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

Trajectory run_one_level(const VectorFunction& u0, const TimeVectorFunction& f, const DiscreteSystem& system,
                         const TimeGrid& grid, const SolverConfig& config, const std::vector<double>& sample_times,
                         const StepObserver& observer)
{
    const auto wanted = sample_indices(grid, sample_times);
    Trajectory traj;
    FieldPair state = project_initial_data(u0, system);
    traj.max_divergence = (system.divergence * state.velocity).lpNorm<Eigen::Infinity>();
    auto next_sample = wanted.begin();
    if (next_sample != wanted.end() && *next_sample == 0) {
        traj.samples.push_back(state);
        ++next_sample;
    }
    if (grid.steps == 0)
        return traj;

    GalerkinStepper stepper(system, f, config, grid.dt);
    for (int n = 1; n <= grid.steps; ++n) {
        state = stepper.step(state, grid.time(n));
        auto report = stepper.last_report();
        report.step = n;
        traj.max_divergence = std::max(traj.max_divergence, report.divergence_inf);
        traj.max_residual = std::max(traj.max_residual, report.residual_inf);
        traj.nonlinear_iterations += report.nonlinear.iterations;
        traj.picard_fallbacks += report.nonlinear.used_picard ? 1 : 0;
        if (observer)
            observer(state, report);
        if (next_sample != wanted.end() && *next_sample == n) {
            traj.samples.push_back(state);
            ++next_sample;
        }
    }
    return traj;
}

} // namespace tlns
