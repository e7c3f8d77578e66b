#include "tlns/verification.hpp"

#include "tlns/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace tlns {

namespace {

constexpr double pi = std::numbers::pi;

// sin^2(pi x) and its first three derivatives.
struct SinSquared
{
    double v, d1, d2, d3;
    explicit SinSquared(double x)
    {
        const double s = std::sin(pi * x);
        const double s2 = std::sin(2.0 * pi * x);
        const double c2 = std::cos(2.0 * pi * x);
        v = s * s;
        d1 = pi * s2;
        d2 = 2.0 * pi * pi * c2;
        d3 = -4.0 * pi * pi * pi * s2;
    }
};

// Velocity, gradient and Laplacian of curl(sin^2(pi x) sin^2(pi y)).
struct CurlBump
{
    std::array<double, 2> u;
    Gradient grad;
    std::array<double, 2> lap;

    explicit CurlBump(const Point& p)
    {
        const SinSquared X(p.x);
        const SinSquared Y(p.y);
        u = {X.v * Y.d1, -X.d1 * Y.v};
        grad = {{{X.d1 * Y.d1, X.v * Y.d2}, {-X.d2 * Y.v, -X.d1 * Y.d1}}};
        lap = {X.d2 * Y.d1 + X.v * Y.d3, -(X.d3 * Y.v + X.d1 * Y.d2)};
    }
};

double amplitude(double t) { return 1.0 + 0.5 * std::sin(t); }
double amplitude_dt(double t) { return 0.5 * std::cos(t); }

std::array<double, 2> navier_stokes_forcing(const ExactSolution& e, const Point& p, double t)
{
    const auto u = e.velocity(p, t);
    const auto g = e.velocity_gradient(p, t);
    const auto lap = e.velocity_laplacian(p, t);
    const auto ut = e.velocity_dt(p, t);
    const auto gp = e.pressure_gradient(p, t);
    std::array<double, 2> f{};
    for (int c = 0; c < 2; ++c)
        f[c] = ut[c] + u[0] * g[c][0] + u[1] * g[c][1] - e.nu * lap[c] + gp[c];
    return f;
}

// phi(x) = sin^2(pi x) * sum a_k sin(k pi (x - 1/2)) and three derivatives.
// The series is singular at x = 1/2, away from the cutoff zeros.
struct SeriesProfile
{
    std::vector<double> coeff;

    explicit SeriesProfile(const NonsmoothParams& params)
    {
        if (params.modes < 1)
            throw InvalidArgument("nonsmooth fixture: modes must be at least 1");
        if (!(params.delta > 0.0 && params.delta < 1.0))
            throw InvalidArgument("nonsmooth fixture: delta must lie in (0, 1)");
        for (int k = 1; k <= params.modes; ++k)
            coeff.push_back(std::pow(static_cast<double>(k), -3.0 + params.delta));
    }

    std::array<double, 4> eval(double x) const
    {
        double t0 = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;
        const double xs = x - 0.5;
        for (std::size_t i = 0; i < coeff.size(); ++i) {
            const double w = static_cast<double>(i + 1) * pi;
            const double s = std::sin(w * xs);
            const double c = std::cos(w * xs);
            t0 += coeff[i] * s;
            t1 += coeff[i] * w * c;
            t2 -= coeff[i] * w * w * s;
            t3 -= coeff[i] * w * w * w * c;
        }
        const SinSquared m(x);
        return {m.v * t0, m.d1 * t0 + m.v * t1, m.d2 * t0 + 2.0 * m.d1 * t1 + m.v * t2,
                m.d3 * t0 + 3.0 * m.d2 * t1 + 3.0 * m.d1 * t2 + m.v * t3};
    }
};

} // namespace

std::array<double, 2> ExactSolution::strong_residual(const Point& p, double t) const
{
    const auto lhs = navier_stokes_forcing(*this, p, t);
    const auto f = forcing(p, t);
    return {lhs[0] - f[0], lhs[1] - f[1]};
}

ExactSolution make_smooth_solution(double nu)
{
    if (!(nu > 0.0))
        throw InvalidArgument("nu must be positive");
    ExactSolution e;
    e.nu = nu;
    e.regularity = Regularity::Smooth;
    e.description = "u = curl(sin^2(pi x) sin^2(pi y) g(t)), p = (x-1/2)(y-1/2) g(t), g = 1 + sin(t)/2";
    e.velocity = [](const Point& p, double t) {
        const CurlBump b(p);
        const double g = amplitude(t);
        return std::array<double, 2>{b.u[0] * g, b.u[1] * g};
    };
    e.velocity_gradient = [](const Point& p, double t) {
        CurlBump b(p);
        const double g = amplitude(t);
        for (auto& row : b.grad)
            for (double& v : row)
                v *= g;
        return b.grad;
    };
    e.velocity_laplacian = [](const Point& p, double t) {
        const CurlBump b(p);
        const double g = amplitude(t);
        return std::array<double, 2>{b.lap[0] * g, b.lap[1] * g};
    };
    e.velocity_dt = [](const Point& p, double t) {
        const CurlBump b(p);
        const double g = amplitude_dt(t);
        return std::array<double, 2>{b.u[0] * g, b.u[1] * g};
    };
    e.pressure = [](const Point& p, double t) { return (p.x - 0.5) * (p.y - 0.5) * amplitude(t); };
    e.pressure_gradient = [](const Point& p, double t) {
        const double g = amplitude(t);
        return std::array<double, 2>{(p.y - 0.5) * g, (p.x - 0.5) * g};
    };
    e.initial_velocity = [v = e.velocity](const Point& p) { return v(p, 0.0); };
    // Captures a copy of the callbacks, so the forcing stays valid on its own.
    e.forcing = [copy = e](const Point& p, double t) { return navier_stokes_forcing(copy, p, t); };
    return e;
}

ExactSolution make_nonsmooth_initial_solution(double nu, const NonsmoothParams& params)
{
    if (!(nu > 0.0))
        throw InvalidArgument("nu must be positive");
    const auto profile = std::make_shared<const SeriesProfile>(params);
    ExactSolution e;
    e.nu = nu;
    e.regularity = Regularity::H1Only;
    std::ostringstream desc;
    desc << "u0 = curl(phi(x) phi(y)), phi = sin^2(pi x) sum_{k<=" << params.modes << "} k^(" << -3.0 + params.delta
         << ") sin(k pi (x - 1/2)); f = -" << params.forcing_amplitude
         << " nu lap curl(sin^2(pi x) sin^2(pi y)) (truncated-series proxy for H1-only data)";
    e.description = desc.str();
    e.initial_velocity = [profile](const Point& p) {
        const auto X = profile->eval(p.x);
        const auto Y = profile->eval(p.y);
        return std::array<double, 2>{X[0] * Y[1], -X[1] * Y[0]};
    };
    e.forcing = [scale = nu * params.forcing_amplitude](const Point& p, double) {
        const CurlBump b(p);
        return std::array<double, 2>{-scale * b.lap[0], -scale * b.lap[1]};
    };
    return e;
}

double nonsmooth_initial_h2_seminorm(const NonsmoothParams& params)
{
    const SeriesProfile profile(params);
    // Composite 5-point Gauss-Legendre on 1024 panels.
    static const std::array<double, 5> gx{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                          0.9061798459386640};
    static const std::array<double, 5> gw{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                          0.2369268850561891, 0.2369268850561891};
    constexpr int panels = 1024;
    std::array<double, 4> sq{};
    for (int i = 0; i < panels; ++i) {
        const double a = static_cast<double>(i) / panels;
        const double half = 0.5 / panels;
        for (int q = 0; q < 5; ++q) {
            const auto d = profile.eval(a + half * (1.0 + gx[q]));
            for (int k = 0; k < 4; ++k)
                sq[k] += half * gw[q] * d[k] * d[k];
        }
    }
    // |u|_{H2}^2 = sum over both components of u_xx^2 + 2 u_xy^2 + u_yy^2.
    return std::sqrt(2.0 * (3.0 * sq[1] * sq[2] + sq[0] * sq[3]));
}

namespace {

// Quadrature on the four red children of an element, in parent barycentrics.
struct SubQuadrature
{
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights; // reference weights, sum 1/2
};

const SubQuadrature& error_quadrature()
{
    static const SubQuadrature sub = [] {
        SubQuadrature s;
        const auto& rule = quadrature(kNonlinearQuadrature);
        using B = std::array<double, 3>;
        const B v0{1, 0, 0}, v1{0, 1, 0}, v2{0, 0, 1};
        const B m01{0.5, 0.5, 0}, m12{0, 0.5, 0.5}, m20{0.5, 0, 0.5};
        const std::array<std::array<B, 3>, 4> children{{{v0, m01, m20}, {m01, v1, m12}, {m20, m12, v2}, {m01, m12, m20}}};
        for (const auto& ch : children) {
            for (std::size_t q = 0; q < rule.size(); ++q) {
                B p{0, 0, 0};
                for (int i = 0; i < 3; ++i)
                    for (int k = 0; k < 3; ++k)
                        p[k] += rule.points[q][i] * ch[i][k];
                s.points.push_back(p);
                s.weights.push_back(rule.weights[q] / 4.0);
            }
        }
        return s;
    }();
    return sub;
}

} // namespace

ErrorTriple compute_errors(const FieldPair& field, const ExactSolution& exact, double t)
{
    if (exact.regularity != Regularity::Smooth || !exact.velocity || !exact.pressure)
        throw InvalidArgument("compute_errors: fixture has no closed-form solution; use compute_self_errors");
    const auto& sp = *field.space;
    const auto& sub = error_quadrature();
    const int nt = static_cast<int>(sp.mesh()->num_triangles());

    double mean_h = 0.0;
    double mean_exact = 0.0;
    for (int e = 0; e < nt; ++e) {
        const auto& g = sp.geometry(e);
        for (std::size_t q = 0; q < sub.weights.size(); ++q) {
            const double w = 2.0 * g.area * sub.weights[q];
            mean_h += w * evaluate_pressure(sp, field.pressure, e, sub.points[q]);
            mean_exact += w * exact.pressure(g.map(sub.points[q]), t);
        }
    }
    const double area = sp.mesh()->domain().area();
    mean_h /= area;
    mean_exact /= area;

    double l2 = 0.0, h1 = 0.0, pl2 = 0.0;
    for (int e = 0; e < nt; ++e) {
        const auto& g = sp.geometry(e);
        for (std::size_t q = 0; q < sub.weights.size(); ++q) {
            const double w = 2.0 * g.area * sub.weights[q];
            const Point x = g.map(sub.points[q]);
            const auto vh = evaluate_velocity(sp, field.velocity, e, sub.points[q]);
            const auto u = exact.velocity(x, t);
            const auto gu = exact.velocity_gradient(x, t);
            for (int c = 0; c < 2; ++c) {
                const double d = u[c] - vh.value[c];
                l2 += w * d * d;
                for (int k = 0; k < 2; ++k) {
                    const double dg = gu[c][k] - vh.grad[c][k];
                    h1 += w * dg * dg;
                }
            }
            const double dp = (exact.pressure(x, t) - mean_exact)
                - (evaluate_pressure(sp, field.pressure, e, sub.points[q]) - mean_h);
            pl2 += w * dp * dp;
        }
    }
    return {std::sqrt(l2), std::sqrt(h1), std::sqrt(pl2)};
}

ErrorTriple compute_self_errors(const FieldPair& field, const FieldPair& reference)
{
    const FieldPair lifted = prolong(field, reference.space);
    const auto& sp = *reference.space;
    const Eigen::VectorXd dv = reference.velocity - lifted.velocity;
    const Eigen::VectorXd dp = reference.pressure - lifted.pressure;
    const auto& sub = error_quadrature();
    const int nt = static_cast<int>(sp.mesh()->num_triangles());

    double mean = 0.0;
    for (int e = 0; e < nt; ++e) {
        const auto& g = sp.geometry(e);
        for (std::size_t q = 0; q < sub.weights.size(); ++q)
            mean += 2.0 * g.area * sub.weights[q] * evaluate_pressure(sp, dp, e, sub.points[q]);
    }
    mean /= sp.mesh()->domain().area();

    double l2 = 0.0, h1 = 0.0, pl2 = 0.0;
    for (int e = 0; e < nt; ++e) {
        const auto& g = sp.geometry(e);
        for (std::size_t q = 0; q < sub.weights.size(); ++q) {
            const double w = 2.0 * g.area * sub.weights[q];
            const auto v = evaluate_velocity(sp, dv, e, sub.points[q]);
            for (int c = 0; c < 2; ++c) {
                l2 += w * v.value[c] * v.value[c];
                h1 += w * (v.grad[c][0] * v.grad[c][0] + v.grad[c][1] * v.grad[c][1]);
            }
            const double p = evaluate_pressure(sp, dp, e, sub.points[q]) - mean;
            pl2 += w * p * p;
        }
    }
    return {std::sqrt(l2), std::sqrt(h1), std::sqrt(pl2)};
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& sizes)
{
    if (errors.size() != sizes.size() || errors.size() < 2)
        throw InvalidArgument("eoc: need at least two errors with matching sizes");
    for (double e : errors)
        if (!(e > 0.0))
            throw InvalidArgument("eoc: errors must be positive");
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        if (!(sizes[i + 1] > 0.0) || std::abs(sizes[i] / sizes[i + 1] - 2.0) > 1e-9)
            throw InvalidArgument("eoc: mesh sizes must halve from one entry to the next");
    }
    std::vector<double> orders;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
        orders.push_back(std::log2(errors[i] / errors[i + 1]));
    return orders;
}

double tau_star(double t) { return std::min(1.0, t); }

std::vector<double> weighted_error_trace(const std::vector<double>& times, const std::vector<double>& errors,
                                         double weight_power)
{
    if (times.size() != errors.size())
        throw InvalidArgument("weighted_error_trace: times and errors differ in length");
    std::vector<double> out;
    out.reserve(errors.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0))
            throw InvalidArgument("weighted_error_trace: sample times must be positive");
        out.push_back(errors[i] * std::pow(tau_star(times[i]), weight_power));
    }
    return out;
}

void ErrorReport::add(double t, double h, double H, const ErrorTriple& e)
{
    ErrorRow row{t, h, H, e, {}};
    if (t > 0.0) {
        row.weighted.velocity_l2 = e.velocity_l2 * std::pow(tau_star(t), powers.velocity_l2);
        row.weighted.velocity_h1 = e.velocity_h1 * std::pow(tau_star(t), powers.velocity_h1);
        row.weighted.pressure_l2 = e.pressure_l2 * std::pow(tau_star(t), powers.pressure_l2);
    }
    rows.push_back(row);
}

ErrorReport::EocTable ErrorReport::eoc_at(double t) const
{
    std::vector<ErrorRow> sel;
    for (const auto& r : rows)
        if (std::abs(r.t - t) <= 1e-12 * std::max(1.0, t))
            sel.push_back(r);
    std::sort(sel.begin(), sel.end(), [](const ErrorRow& a, const ErrorRow& b) { return a.h > b.h; });
    EocTable table;
    std::vector<double> eu, eh, ep;
    for (const auto& r : sel) {
        table.h.push_back(r.h);
        eu.push_back(r.error.velocity_l2);
        eh.push_back(r.error.velocity_h1);
        ep.push_back(r.error.pressure_l2);
    }
    if (sel.size() >= 2) {
        table.velocity_l2 = eoc(eu, table.h);
        table.velocity_h1 = eoc(eh, table.h);
        table.pressure_l2 = eoc(ep, table.h);
    }
    return table;
}

void write_csv(std::ostream& os, const ErrorReport& report)
{
    os << "t,h,H,err_u_L2,err_u_H1,err_p_L2,w_err_u_L2,w_err_u_H1,w_err_p_L2\n";
    const auto old_precision = os.precision(17);
    for (const auto& r : report.rows) {
        os << r.t << ',' << r.h << ',' << r.H << ',' << r.error.velocity_l2 << ',' << r.error.velocity_h1 << ','
           << r.error.pressure_l2 << ',' << r.weighted.velocity_l2 << ',' << r.weighted.velocity_h1 << ','
           << r.weighted.pressure_l2 << '\n';
    }
    os.precision(old_precision);
}

} // namespace tlns
