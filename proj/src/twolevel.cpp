#include "tlns/twolevel.hpp"

#include "tlns/error.hpp"

#include <algorithm>
#include <chrono>

namespace tlns {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class Fn>
auto with_level(const char* level, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const SolverError& e) {
        throw SolverError(e.kind(), std::string(level) + " level: " + e.what());
    }
}

} // namespace

int resolve_fine_level(const MeshHierarchy& hierarchy, const TwoLevelConfig& config)
{
    if (config.fine_level_rule == FineLevelRule::HSquared)
        return choose_fine_level_for_coupling(hierarchy.coarsest()->grid_spacing(), hierarchy);
    if (config.explicit_level < 0 || config.explicit_level >= hierarchy.num_levels())
        throw CouplingError("explicit fine level " + std::to_string(config.explicit_level)
                            + " is outside the hierarchy (levels 0.." + std::to_string(hierarchy.num_levels() - 1)
                            + ")");
    return config.explicit_level;
}

TwoLevelResult run_two_level(const VectorFunction& u0, const TimeVectorFunction& f, const MeshHierarchy& hierarchy,
                             const TwoLevelConfig& config)
{
    config.solver.validate();
    const TimeGrid& grid = config.time_grid;
    const auto wanted = sample_indices(grid, config.sample_times);

    TwoLevelResult result;
    result.fine_level = resolve_fine_level(hierarchy, config);
    result.actual_H = hierarchy.coarsest()->grid_spacing();
    result.actual_h = hierarchy.level(result.fine_level)->grid_spacing();

    // First level.
    auto start = Clock::now();
    const DiscreteSystem coarse = assemble_bilinear(build_space(hierarchy.coarsest(), config.element));
    std::vector<FieldPair> coarse_states;
    coarse_states.reserve(static_cast<std::size_t>(grid.steps) + 1);
    result.coarse = with_level("coarse", [&] {
        return run_one_level(u0, f, coarse, grid, config.solver, config.sample_times,
                             [&](const FieldPair& s, const StepReport&) { coarse_states.push_back(s); });
    });
    result.timings.coarse_solve = seconds_since(start);

    // Second level.
    start = Clock::now();
    const DiscreteSystem fine = assemble_bilinear(build_space(hierarchy.level(result.fine_level), config.element));
    FieldPair state = project_initial_data(u0, fine);
    auto& traj = result.fine;
    traj.max_divergence = (fine.divergence * state.velocity).lpNorm<Eigen::Infinity>();
    auto next_sample = wanted.begin();
    if (next_sample != wanted.end() && *next_sample == 0) {
        traj.samples.push_back(state);
        ++next_sample;
    }
    std::optional<FrozenStokesStepper> stepper;
    if (grid.steps > 0)
        with_level("fine", [&] { stepper.emplace(fine, f, config.solver, grid.dt); });
    result.timings.fine_solve = seconds_since(start);

    for (int n = 1; n <= grid.steps; ++n) {
        start = Clock::now();
        const FieldPair& coarse_state = coarse_states[static_cast<std::size_t>(n - 1)];
        const FieldPair frozen = prolong(coarse_state, fine.space);
        result.timings.prolongation += seconds_since(start);

        start = Clock::now();
        state = with_level("fine", [&] {
            return stepper->step(state, config.drop_fine_convection ? nullptr : &frozen, grid.time(n));
        });
        const auto& report = stepper->last_report();
        traj.max_divergence = std::max(traj.max_divergence, report.divergence_inf);
        traj.max_residual = std::max(traj.max_residual, report.residual_inf);
        result.timings.fine_solve += seconds_since(start);

        if (next_sample != wanted.end() && *next_sample == n) {
            traj.samples.push_back(state);
            result.max_prolongation_defect
                = std::max(result.max_prolongation_defect, prolongation_defect(coarse_state, frozen));
            ++next_sample;
        }
    }
    return result;
}

ComparisonResult run_comparison(const VectorFunction& u0, const TimeVectorFunction& f,
                                const MeshHierarchy& hierarchy, const TwoLevelConfig& config,
                                const ErrorEvaluator& errors)
{
    ComparisonResult out;
    const int level = resolve_fine_level(hierarchy, config);

    auto start = Clock::now();
    const DiscreteSystem fine = assemble_bilinear(build_space(hierarchy.level(level), config.element));
    out.one_level = run_one_level(u0, f, fine, config.time_grid, config.solver, config.sample_times);
    out.one_level_seconds = seconds_since(start);

    start = Clock::now();
    out.two_level = run_two_level(u0, f, hierarchy, config);
    out.two_level_seconds = seconds_since(start);

    if (errors) {
        const auto idx = sample_indices(config.time_grid, config.sample_times);
        ErrorReport one, two;
        const double h = out.two_level.actual_h;
        const double H = out.two_level.actual_H;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double t = config.time_grid.time(idx[i]);
            one.add(t, h, h, errors(out.one_level.samples[i], t));
            two.add(t, h, H, errors(out.two_level.fine.samples[i], t));
        }
        out.one_level_errors = std::move(one);
        out.two_level_errors = std::move(two);
    }
    return out;
}

} // namespace tlns
