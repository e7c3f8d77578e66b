#pragma once

#include <array>
#include <vector>

namespace tlns {

/// Symmetric rule on the reference triangle (0,0), (1,0), (0,1).
/// Weights sum to the reference area 1/2.
struct QuadratureRule
{
    std::vector<std::array<double, 3>> points; // barycentric
    std::vector<double> weights;
    int exactness_degree = 0;

    std::size_t size() const { return weights.size(); }
};

/// Rule exact for polynomials of total degree <= `degree`, degree in 1..6.
/// Degree 3 requests are served by the degree-4 rule.
const QuadratureRule& quadrature(int degree);

} // namespace tlns
