#include "tlns/error.hpp"
#include "tlns/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tlns;

namespace {

// Integral of x^a y^b over the reference triangle (0,0),(1,0),(0,1): a! b! / (a+b+2)!
double monomial_exact(int a, int b)
{
    return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}

double integrate(const QuadratureRule& rule, int a, int b)
{
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        // Reference coordinates: x = lambda_1, y = lambda_2.
        const double x = rule.points[q][1];
        const double y = rule.points[q][2];
        s += rule.weights[q] * std::pow(x, a) * std::pow(y, b);
    }
    return s;
}

} // namespace

TEST(Quadrature, ConstantGivesHalf)
{
    EXPECT_NEAR(integrate(quadrature(1), 0, 0), 0.5, 1e-16);
}

TEST(Quadrature, DegreeTwoOnXSquared)
{
    EXPECT_NEAR(integrate(quadrature(2), 2, 0), 1.0 / 12.0, 1e-16);
}

TEST(Quadrature, DegreeFiveOnX2Y2)
{
    EXPECT_NEAR(integrate(quadrature(5), 2, 2), 1.0 / 180.0, 1e-15);
}

TEST(Quadrature, ExactForAllMonomialsUpToDegree)
{
    for (int d = 1; d <= 6; ++d) {
        const auto& rule = quadrature(d);
        EXPECT_GE(rule.exactness_degree, d);
        for (int a = 0; a <= d; ++a)
            for (int b = 0; a + b <= d; ++b)
                EXPECT_NEAR(integrate(rule, a, b), monomial_exact(a, b), 2e-15) << "degree " << d << " x^" << a
                                                                                << " y^" << b;
    }
}

TEST(Quadrature, BarycentricPointsInsideAndNormalized)
{
    for (int d = 1; d <= 6; ++d) {
        const auto& rule = quadrature(d);
        for (const auto& p : rule.points) {
            EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
            for (double l : p)
                EXPECT_GE(l, 0.0);
        }
        for (double w : rule.weights)
            EXPECT_GT(w, 0.0);
    }
}

TEST(Quadrature, DegreeSixIsNotExactForDegreeSeven)
{
    // Guards against a rule that is accidentally of higher order than claimed
    // being used to hide a wrong table elsewhere.
    double worst = 0.0;
    for (int a = 0; a <= 7; ++a)
        worst = std::max(worst, std::abs(integrate(quadrature(6), a, 7 - a) - monomial_exact(a, 7 - a)));
    EXPECT_GT(worst, 1e-8);
}

TEST(Quadrature, UnsupportedDegreesRejected)
{
    EXPECT_THROW(quadrature(0), InvalidArgument);
    EXPECT_THROW(quadrature(7), InvalidArgument);
    EXPECT_THROW(quadrature(-1), InvalidArgument);
}
