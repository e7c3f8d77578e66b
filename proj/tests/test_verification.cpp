#include "tlns/error.hpp"
#include "tlns/stepper.hpp"
#include "tlns/verification.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace tlns;

namespace {

const Point kPoints[] = {{0.3, 0.7}, {0.11, 0.42}, {0.5, 0.5}, {0.93, 0.21}};

// Finite-difference checks of the closed-form derivatives of a fixture.
void check_derivatives(const ExactSolution& ex, double t)
{
    const double e = 1e-5;
    for (const auto& p : kPoints) {
        const auto g = ex.velocity_gradient(p, t);
        const auto ux1 = ex.velocity({p.x + e, p.y}, t), ux0 = ex.velocity({p.x - e, p.y}, t);
        const auto uy1 = ex.velocity({p.x, p.y + e}, t), uy0 = ex.velocity({p.x, p.y - e}, t);
        const auto u = ex.velocity(p, t);
        const auto lap = ex.velocity_laplacian(p, t);
        for (int c = 0; c < 2; ++c) {
            EXPECT_NEAR(g[c][0], (ux1[c] - ux0[c]) / (2 * e), 1e-6);
            EXPECT_NEAR(g[c][1], (uy1[c] - uy0[c]) / (2 * e), 1e-6);
            const double fd_lap = (ux1[c] + ux0[c] + uy1[c] + uy0[c] - 4 * u[c]) / (e * e);
            EXPECT_NEAR(lap[c], fd_lap, 1e-3 * (1.0 + std::abs(lap[c])));
            const double fd_t = (ex.velocity(p, t + e)[c] - ex.velocity(p, t - e)[c]) / (2 * e);
            EXPECT_NEAR(ex.velocity_dt(p, t)[c], fd_t, 1e-6);
        }
        EXPECT_NEAR(g[0][0] + g[1][1], 0.0, 1e-12);
        const double px = (ex.pressure({p.x + e, p.y}, t) - ex.pressure({p.x - e, p.y}, t)) / (2 * e);
        EXPECT_NEAR(ex.pressure_gradient(p, t)[0], px, 1e-6);
    }
}

} // namespace

TEST(Smooth, DerivativesAndDivergence)
{
    check_derivatives(make_smooth_solution(1.0), 0.0);
    check_derivatives(make_smooth_solution(0.1), 0.8);
}

TEST(Smooth, ForcingClosesTheEquation)
{
    const auto ex = make_smooth_solution(0.5);
    for (const auto& p : kPoints)
        for (double t : {0.0, 0.3, 1.0}) {
            const auto r = ex.strong_residual(p, t);
            EXPECT_NEAR(r[0], 0.0, 1e-12);
            EXPECT_NEAR(r[1], 0.0, 1e-12);
        }
}

TEST(Smooth, BoundaryValuesAndMeanPressure)
{
    const auto ex = make_smooth_solution(1.0);
    for (double s : {0.0, 0.25, 0.6, 1.0}) {
        for (const Point p : {Point{s, 0.0}, Point{s, 1.0}, Point{0.0, s}, Point{1.0, s}}) {
            const auto u = ex.velocity(p, 0.4);
            EXPECT_NEAR(u[0], 0.0, 1e-14);
            EXPECT_NEAR(u[1], 0.0, 1e-14);
        }
    }
    EXPECT_THROW(make_smooth_solution(0.0), InvalidArgument);
}

TEST(Nonsmooth, InitialDataIsSolenoidalAndVanishesOnBoundary)
{
    const auto ex = make_nonsmooth_initial_solution(1.0);
    EXPECT_EQ(ex.regularity, Regularity::H1Only);
    const double e = 1e-6;
    for (const auto& p : kPoints) {
        const double div = (ex.initial_velocity({p.x + e, p.y})[0] - ex.initial_velocity({p.x - e, p.y})[0]
                            + ex.initial_velocity({p.x, p.y + e})[1] - ex.initial_velocity({p.x, p.y - e})[1])
                           / (2 * e);
        EXPECT_NEAR(div, 0.0, 1e-5);
    }
    for (double s : {0.0, 0.3, 0.5, 1.0}) {
        const auto a = ex.initial_velocity({s, 0.0});
        const auto b = ex.initial_velocity({1.0, s});
        EXPECT_NEAR(std::hypot(a[0], a[1]) + std::hypot(b[0], b[1]), 0.0, 1e-12);
    }
}

TEST(Nonsmooth, H2SeminormGrowsWithModes)
{
    NonsmoothParams a, b;
    a.modes = 32;
    b.modes = 128;
    const double ra = nonsmooth_initial_h2_seminorm(a);
    const double rb = nonsmooth_initial_h2_seminorm(b);
    EXPECT_GT(rb / ra, 1.3);
}

TEST(Nonsmooth, ParameterValidation)
{
    NonsmoothParams p;
    p.modes = 0;
    EXPECT_THROW(make_nonsmooth_initial_solution(1.0, p), InvalidArgument);
    p.modes = 8;
    p.delta = 1.0;
    EXPECT_THROW(make_nonsmooth_initial_solution(1.0, p), InvalidArgument);
}

TEST(Errors, InterpolantErrorsConverge)
{
    const auto ex = make_smooth_solution(1.0);
    std::vector<double> e_l2, e_h1, e_p, h;
    for (int n : {4, 8, 16}) {
        const auto space = build_space(build_structured_mesh(n), ElementKind::Mini);
        FieldPair f = FieldPair::zero(space, 0.5);
        f.velocity = interpolate_velocity(*space, [&](const Point& p) { return ex.velocity(p, 0.5); });
        f.pressure = interpolate_pressure(*space, [&](const Point& p) { return ex.pressure(p, 0.5); });
        const auto e = compute_errors(f, ex, 0.5);
        e_l2.push_back(e.velocity_l2);
        e_h1.push_back(e.velocity_h1);
        e_p.push_back(e.pressure_l2);
        h.push_back(1.0 / n);
    }
    EXPECT_NEAR(eoc(e_l2, h).back(), 2.0, 0.2);
    EXPECT_NEAR(eoc(e_h1, h).back(), 1.0, 0.15);
    EXPECT_NEAR(eoc(e_p, h).back(), 2.0, 0.2);
}

TEST(Errors, ZeroFieldGivesNormsOfSolution)
{
    // At t = 0, ||u1||^2 = int (2 pi sin^2(pi x) sin(pi y) cos(pi y))^2 = 4 pi^2 * 3/8 * 1/8,
    // and ||u2|| = ||u1|| by symmetry.
    const auto ex = make_smooth_solution(1.0);
    const auto space = build_space(build_structured_mesh(8), ElementKind::TaylorHood);
    const auto e = compute_errors(FieldPair::zero(space), ex, 0.0);
    const double pi = std::acos(-1.0);
    EXPECT_NEAR(e.velocity_l2, std::sqrt(2.0 * 4.0 * pi * pi * 3.0 / 64.0), 1e-6);
    EXPECT_NEAR(e.pressure_l2, 1.0 / 12.0, 1e-10); // ||(x-1/2)(y-1/2)|| = 1/12
}

TEST(Errors, SelfErrorsVanishOnSameSpace)
{
    const auto ex = make_smooth_solution(1.0);
    const auto space = build_space(build_structured_mesh(4), ElementKind::Mini);
    FieldPair f = FieldPair::zero(space);
    f.velocity = interpolate_velocity(*space, [&](const Point& p) { return ex.velocity(p, 0.0); });
    const auto e = compute_self_errors(f, f);
    EXPECT_LT(e.velocity_l2, 1e-14);
    EXPECT_LT(e.velocity_h1, 1e-13);
}

TEST(Errors, SelfErrorsAcrossLevels)
{
    const auto ex = make_smooth_solution(1.0);
    const auto h = build_hierarchy(4, 1);
    const auto coarse = build_space(h.level(0), ElementKind::TaylorHood);
    const auto fine = build_space(h.level(1), ElementKind::TaylorHood);
    FieldPair c = FieldPair::zero(coarse);
    c.velocity = interpolate_velocity(*coarse, [&](const Point& p) { return ex.velocity(p, 0.0); });
    const auto e = compute_self_errors(c, prolong(c, fine));
    EXPECT_LT(e.velocity_l2, 1e-13);
    EXPECT_THROW(compute_self_errors(FieldPair::zero(fine), c), NotNested);
}

TEST(Errors, RejectsH1OnlyFixture)
{
    const auto ex = make_nonsmooth_initial_solution(1.0);
    const auto space = build_space(build_structured_mesh(2), ElementKind::Mini);
    EXPECT_THROW(compute_errors(FieldPair::zero(space), ex, 0.0), InvalidArgument);
}

TEST(Rates, Eoc)
{
    const auto r = eoc({1.0, 0.25, 0.0625}, {0.5, 0.25, 0.125});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_DOUBLE_EQ(r[0], 2.0);
    EXPECT_DOUBLE_EQ(r[1], 2.0);
    EXPECT_THROW(eoc({1.0}, {0.5}), InvalidArgument);
    EXPECT_THROW(eoc({1.0, 0.5}, {0.5, 0.3}), InvalidArgument);
    EXPECT_THROW(eoc({1.0, 0.0}, {0.5, 0.25}), InvalidArgument);
}

TEST(Rates, TauAndWeights)
{
    EXPECT_DOUBLE_EQ(tau_star(0.25), 0.25);
    EXPECT_DOUBLE_EQ(tau_star(3.0), 1.0);
    const auto w = weighted_error_trace({0.25, 1.0, 2.0}, {4.0, 1.0, 1.0}, 0.5);
    EXPECT_DOUBLE_EQ(w[0], 2.0);
    EXPECT_DOUBLE_EQ(w[1], 1.0);
    EXPECT_DOUBLE_EQ(w[2], 1.0);
    EXPECT_THROW(weighted_error_trace({0.0}, {1.0}, 0.5), InvalidArgument);
}

TEST(Report, EocTableAndCsv)
{
    ErrorReport rep;
    rep.add(1.0, 0.125, 0.125, {0.01, 0.1, 0.1});
    rep.add(1.0, 0.25, 0.25, {0.04, 0.2, 0.2});
    rep.add(0.5, 0.25, 0.25, {1.0, 1.0, 1.0});
    const auto table = rep.eoc_at(1.0);
    ASSERT_EQ(table.h.size(), 2u);
    EXPECT_DOUBLE_EQ(table.h[0], 0.25);
    EXPECT_NEAR(table.velocity_l2[0], 2.0, 1e-14);
    EXPECT_NEAR(table.velocity_h1[0], 1.0, 1e-14);
    EXPECT_NEAR(rep.rows[2].weighted.velocity_l2, std::sqrt(0.5), 1e-15);

    std::ostringstream os;
    write_csv(os, rep);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "t,h,H,err_u_L2,err_u_H1,err_p_L2,w_err_u_L2,w_err_u_H1,w_err_p_L2");
    int lines = 0;
    for (std::string l; std::getline(is, l);)
        ++lines;
    EXPECT_EQ(lines, 3);
}
