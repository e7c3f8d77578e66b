// Acceptance suite: one PASS/FAIL line per criterion, detail lines indented.
// Exit status is nonzero when any criterion fails.

#include "oracles.hpp"

#include "tlns/experiment.hpp"
#include "tlns/stepper.hpp"
#include "tlns/twolevel.hpp"
#include "tlns/verification.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

using namespace tlns;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;
double worst_divergence = 0.0;
int divergence_runs = 0;

void verdict(int id, bool ok, const std::string& what)
{
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    if (!ok)
        ++failures;
}

void track(const Trajectory& t)
{
    worst_divergence = std::max(worst_divergence, t.max_divergence);
    ++divergence_runs;
}

bool in_band(double x, double lo, double hi) { return x >= lo && x <= hi; }

const ExactSolution& smooth()
{
    static const ExactSolution ex = make_smooth_solution(1.0);
    return ex;
}

struct OneLevel
{
    double h = 0.0;
    ErrorTriple error;
    double seconds = 0.0;
};

// One-level Galerkin, MINI, nu = 1, dt = h^2/4, errors at t = 1.
OneLevel one_level(int n)
{
    const auto t0 = Clock::now();
    const auto sys = assemble_bilinear(build_space(build_structured_mesh(n), ElementKind::Mini));
    const double h = 1.0 / n;
    const auto grid = TimeGrid::make(1.0, h * h / 4.0);
    const auto traj = run_one_level(smooth().initial_velocity, smooth().forcing, sys, grid, {}, {});
    track(traj);
    return {h, compute_errors(traj.samples.back(), smooth(), 1.0), seconds_since(t0)};
}

// Two-level on H = 1/n_coarse with the fine level `levels` refinements down.
ErrorTriple two_level(int n_coarse, int levels, int* fine_n = nullptr)
{
    const auto hierarchy = build_hierarchy(n_coarse, levels);
    TwoLevelConfig c;
    c.fine_level_rule = FineLevelRule::Explicit;
    c.explicit_level = levels;
    const double h = hierarchy.finest()->grid_spacing();
    c.time_grid = TimeGrid::make(1.0, h * h / 4.0);
    const auto r = run_two_level(smooth().initial_velocity, smooth().forcing, hierarchy, c);
    track(r.coarse);
    track(r.fine);
    if (fine_n)
        *fine_n = static_cast<int>(std::lround(1.0 / r.actual_h));
    return compute_errors(r.fine.samples.back(), smooth(), 1.0);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

} // namespace

int main()
{
    const auto start = Clock::now();

    // Criteria 1 and 2: Galerkin spatial rates.
    std::map<int, OneLevel> galerkin;
    double c1_seconds = 0.0;
    for (int n : {4, 8, 16, 32}) {
        galerkin[n] = one_level(n);
        c1_seconds += galerkin[n].seconds;
        const auto& e = galerkin[n].error;
        std::printf("  n=%-3d |u-u_h|=%.4e |u-u_h|_1=%.4e |p-p_h|=%.4e (%.1f s)\n", n, e.velocity_l2, e.velocity_h1,
                    e.pressure_l2, galerkin[n].seconds);
    }
    {
        std::vector<double> h, eu, eh, ep;
        for (const auto& [n, r] : galerkin) {
            h.push_back(r.h);
            eu.push_back(r.error.velocity_l2);
            eh.push_back(r.error.velocity_h1);
            ep.push_back(r.error.pressure_l2);
        }
        const auto ru = eoc(eu, h), rh = eoc(eh, h), rp = eoc(ep, h);
        bool ok1 = true, ok2 = true;
        for (std::size_t i = 0; i < ru.size(); ++i) {
            std::printf("  EOC n=%d->%d: u L2 %.3f, u H1 %.3f, p L2 %.3f\n", 4 << i, 8 << i, ru[i], rh[i], rp[i]);
            ok1 = ok1 && in_band(ru[i], 1.8, 2.3) && in_band(rh[i], 0.9, 1.3);
            ok2 = ok2 && in_band(rp[i], 0.9, 1.3);
        }
        verdict(1, ok1 && c1_seconds < 300.0,
                fmt("velocity L2 EOC in [1.8, 2.3] and H1 EOC in [0.9, 1.3] for n=4..32, runtime %.0f s (< 300 s)",
                    c1_seconds));
        verdict(2, ok2, "pressure L2 EOC in [0.9, 1.3] for n=4..32");
    }

    // Criterion 3: two-level against Galerkin on the same fine mesh, coupled pairs.
    ErrorTriple tl_16;
    {
        bool ok = true;
        struct Pair
        {
            int n_coarse, levels;
        };
        for (const Pair p : {Pair{2, 1}, Pair{4, 2}}) {
            int fine_n = 0;
            const auto e2 = two_level(p.n_coarse, p.levels, &fine_n);
            if (p.n_coarse == 4)
                tl_16 = e2;
            const auto& e1 = galerkin.at(fine_n).error;
            const double ru = e2.velocity_h1 / e1.velocity_h1;
            const double rp = e2.pressure_l2 / e1.pressure_l2;
            std::printf("  H=1/%d h=1/%d: |u-u^h|_1/|u-u_h|_1 = %.4f, |p-p^h|/|p-p_h| = %.4f\n", p.n_coarse, fine_n,
                        ru, rp);
            ok = ok && in_band(ru, 0.5, 2.0) && in_band(rp, 0.5, 2.0);
        }
        verdict(3, ok, "two-level/Galerkin error ratios in [0.5, 2.0] for H=1/2->h=1/4 and H=1/4->h=1/16");
    }

    // Criterion 4: plateau of the two-level H1 error for fixed H.
    {
        const auto e32 = two_level(4, 3);
        const double ratio = tl_16.velocity_h1 / e32.velocity_h1;
        std::printf("  H=1/4: |u-u^h|_1 = %.4e (h=1/16), %.4e (h=1/32); pressure %.4e, %.4e\n", tl_16.velocity_h1,
                    e32.velocity_h1, tl_16.pressure_l2, e32.pressure_l2);
        const double change = std::max(ratio, 1.0 / ratio);
        verdict(4, change < 1.5, fmt("refining h beyond coupling changes |u-u^h|_1 by factor %.3f (< 1.5)", change));
    }

    // Criterion 5: efficiency.
    {
        const auto hierarchy = build_hierarchy(4, 2);
        TwoLevelConfig c;
        c.time_grid = TimeGrid::make(1.0, 1.0 / 64.0);
        const auto r = run_comparison(smooth().initial_velocity, smooth().forcing, hierarchy, c);
        track(r.one_level);
        track(r.two_level.coarse);
        track(r.two_level.fine);
        std::printf("  one-level %.3f s, two-level %.3f s, fine nonlinear iterations %d, steps %d\n",
                    r.one_level_seconds, r.two_level_seconds, r.two_level.fine.nonlinear_iterations,
                    c.time_grid.steps);
        verdict(5, r.time_ratio() < 1.0 && r.two_level.fine.nonlinear_iterations == 0,
                fmt("two-level/one-level wall time %.3f (< 1) with zero fine nonlinear iterations", r.time_ratio()));
    }

    // Criterion 6: antisymmetry b(v, w, w) = 0.
    {
        std::mt19937 rng(20240601);
        double worst = 0.0;
        for (auto kind : {ElementKind::Mini, ElementKind::TaylorHood}) {
            const auto space = build_space(build_structured_mesh(8), kind);
            const ConvectionOperator conv(space);
            for (int trial = 0; trial < 20; ++trial) {
                const Eigen::VectorXd v = oracle::random_velocity(*space, rng, trial % 2 == 0);
                const Eigen::VectorXd w = oracle::random_velocity(*space, rng, trial % 2 == 0);
                const Eigen::VectorXd n = conv.apply(v, w);
                const double scale = n.cwiseAbs().dot(w.cwiseAbs());
                worst = std::max(worst, std::abs(w.dot(n)) / scale);
            }
        }
        verdict(6, worst <= 1e-12, fmt("max |b(v,w,w)| / sum|b_i w_i| = %.2e over 2 x 20 triples (<= 1e-12)", worst));
    }

    // Criterion 9: oracle equivalence on n = 2.
    {
        std::mt19937 rng(7);
        double saddle = 0.0, conv_diff = 0.0;
        for (auto kind : {ElementKind::Mini, ElementKind::TaylorHood}) {
            const auto sys = assemble_bilinear(build_space(build_structured_mesh(2), kind));
            const ConvectionOperator conv(sys.space);
            const Eigen::VectorXd u = oracle::random_velocity(*sys.space, rng, false);
            const SparseMatrix stokes = SparseMatrix(sys.mass / 0.01) + sys.stiffness;
            const SparseMatrix newton = stokes + conv.jacobian(u);
            for (const SparseMatrix* k : {&stokes, &newton}) {
                const Eigen::VectorXd f = oracle::random_velocity(*sys.space, rng, false);
                const auto fast = factorize(*k, sys).solve(f);
                const auto slow = oracle::dense_saddle_solve(*k, sys, f);
                saddle = std::max({saddle, (fast.velocity - slow.velocity).lpNorm<Eigen::Infinity>(),
                                   (fast.pressure - slow.pressure).lpNorm<Eigen::Infinity>()});
            }
            for (int trial = 0; trial < 5; ++trial) {
                const Eigen::VectorXd w = oracle::random_velocity(*sys.space, rng, false);
                const Eigen::VectorXd v = oracle::random_velocity(*sys.space, rng, false);
                conv_diff = std::max(
                    conv_diff, (conv.apply(w, v) - oracle::slow_convection(*sys.space, w, v)).lpNorm<Eigen::Infinity>());
            }
        }
        verdict(9, saddle <= 1e-10 && conv_diff <= 1e-12,
                fmt("saddle vs dense %.2e (<= 1e-10), convection vs slow evaluator %.2e (<= 1e-12)", saddle,
                    conv_diff));
    }

    // Criterion 10: temporal order on a fixed mesh.
    {
        const auto sys = assemble_bilinear(build_space(build_structured_mesh(8), ElementKind::Mini));
        std::vector<FieldPair> end;
        for (int steps : {16, 32, 64, 128}) {
            const auto traj = run_one_level(smooth().initial_velocity, smooth().forcing, sys,
                                            TimeGrid::make(1.0, 1.0 / steps), {}, {});
            track(traj);
            end.push_back(traj.samples.back());
        }
        std::vector<double> d, dt;
        for (std::size_t i = 0; i + 1 < end.size(); ++i) {
            d.push_back(compute_self_errors(end[i], end[i + 1]).velocity_l2);
            dt.push_back(1.0 / (16 << i));
        }
        const auto r = eoc(d, dt);
        bool ok = true;
        for (std::size_t i = 0; i < r.size(); ++i) {
            std::printf("  |u(dt) - u(dt/2)| at t=1: %.4e -> %.4e, EOC %.3f\n", d[i], d[i + 1], r[i]);
            ok = ok && in_band(r[i], 0.8, 1.2);
        }
        verdict(10, ok, "backward Euler self-convergence EOC in [0.8, 1.2] for dt=1/16..1/128 on n=8");
    }

    // Criterion 8: non-smooth data, weighted error boundedness.
    {
        const auto ex = make_nonsmooth_initial_solution(1.0);
        const auto hierarchy = build_hierarchy(4, 3);
        const std::vector<double> times{1.0 / 64, 1.0 / 16, 1.0 / 4, 1.0};
        const auto grid = TimeGrid::make(1.0, 1.0 / 1024);
        std::vector<Trajectory> runs;
        for (int k = 0; k < hierarchy.num_levels(); ++k) {
            const auto sys = assemble_bilinear(build_space(hierarchy.level(k), ElementKind::Mini));
            runs.push_back(run_one_level(ex.initial_velocity, ex.forcing, sys, grid, {}, times));
            track(runs.back());
        }
        bool ok = true;
        for (int k = 0; k + 1 < hierarchy.num_levels(); ++k) {
            std::vector<double> e;
            for (std::size_t i = 0; i < times.size(); ++i)
                e.push_back(compute_self_errors(runs[k].samples[i], runs.back().samples[i]).velocity_l2);
            const auto w = weighted_error_trace(times, e, 0.5);
            double rise = 0.0;
            for (std::size_t i = 0; i + 1 < w.size(); ++i)
                rise = std::max(rise, w[i] / w[i + 1]);
            const bool grows = e.front() > e.back();
            std::printf("  n=%d: e = %.3e %.3e %.3e %.3e; weighted = %.3e %.3e %.3e %.3e; max rise %.3f\n", 4 << k,
                        e[0], e[1], e[2], e[3], w[0], w[1], w[2], w[3], rise);
            ok = ok && rise <= 2.0 && grows;
        }
        verdict(8, ok,
                "weighted trace t^(1/2)|u_ref-u_h| rises by at most 2x per step toward t->0 and unweighted error "
                "grows, n=4,8,16 against n=32");
    }

    // Criterion 7: collected over every run above.
    verdict(7, worst_divergence <= 1e-9,
            fmt("max |B u|_inf over every step of %.0f runs = %.2e (<= 1e-9)", divergence_runs, worst_divergence));

    std::printf("acceptance: %d failing criteria, %.0f s\n", failures, seconds_since(start));
    return failures == 0 ? 0 : 1;
}
