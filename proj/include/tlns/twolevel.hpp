#pragma once

#include "tlns/stepper.hpp"
#include "tlns/verification.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace tlns {

enum class FineLevelRule
{
    HSquared, // coarsest level with h <= sqrt(2) H^2
    Explicit, // the level given in TwoLevelConfig::explicit_level
};

/// Two-level run on levels of a MeshHierarchy. Level 0 is the coarse mesh.
struct TwoLevelConfig
{
    FineLevelRule fine_level_rule = FineLevelRule::HSquared;
    int explicit_level = 1;
    ElementKind element = ElementKind::Mini;
    SolverConfig solver;
    TimeGrid time_grid;
    std::vector<double> sample_times; // empty: final time only

    /// Test hook: drop the frozen convection forcing on the fine level.
    bool drop_fine_convection = false;
};

struct TwoLevelTimings
{
    double coarse_solve = 0.0;
    double prolongation = 0.0;
    double fine_solve = 0.0;
    double total() const { return coarse_solve + prolongation + fine_solve; }
};

struct TwoLevelResult
{
    Trajectory coarse; // (u_H, p_H) samples
    Trajectory fine;   // (u^h, p^h) samples
    int fine_level = 0;
    double actual_H = 0.0; // grid spacing of the coarse mesh
    double actual_h = 0.0; // grid spacing of the fine mesh
    TwoLevelTimings timings;
    /// Largest L2 distance between a coarse sample and its prolongation.
    double max_prolongation_defect = 0.0;
};

/// Level the config selects in `hierarchy`; throws CouplingError or InvalidArgument.
int resolve_fine_level(const MeshHierarchy& hierarchy, const TwoLevelConfig& config);

/**
 * First level: the nonlinear Galerkin march on hierarchy level 0, all states kept.
 * Second level: starting from the projection of u0 on the fine space, each step
 * solves the linear Stokes problem with the convection N(u_H, u_H) of the
 * prolonged coarse state at the new time level. One factorization serves
 * every fine step. The coarse pressure is reported but not used.
 */
TwoLevelResult run_two_level(const VectorFunction& u0, const TimeVectorFunction& f, const MeshHierarchy& hierarchy,
                             const TwoLevelConfig& config);

/// Maps a sampled field at time t to its error triple.
using ErrorEvaluator = std::function<ErrorTriple(const FieldPair&, double)>;

struct ComparisonResult
{
    Trajectory one_level;
    TwoLevelResult two_level;
    double one_level_seconds = 0.0;
    double two_level_seconds = 0.0;
    std::optional<ErrorReport> one_level_errors;
    std::optional<ErrorReport> two_level_errors;

    double time_ratio() const { return two_level_seconds / one_level_seconds; }
};

/// One-level Galerkin on the fine level against the two-level method with the
/// same data and time grid. Error reports are filled when `errors` is set.
ComparisonResult run_comparison(const VectorFunction& u0, const TimeVectorFunction& f,
                                const MeshHierarchy& hierarchy, const TwoLevelConfig& config,
                                const ErrorEvaluator& errors = {});

} // namespace tlns
