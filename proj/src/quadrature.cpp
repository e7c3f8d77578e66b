#include "tlns/quadrature.hpp"

#include "tlns/error.hpp"

#include <cmath>
#include <string>

namespace tlns {

namespace {

void add_centroid(QuadratureRule& rule, double w)
{
    rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    rule.weights.push_back(0.5 * w);
}

// Orbit (a, a, 1-2a), three points.
void add_orbit3(QuadratureRule& rule, double a, double w)
{
    const double b = 1.0 - 2.0 * a;
    rule.points.push_back({b, a, a});
    rule.points.push_back({a, b, a});
    rule.points.push_back({a, a, b});
    for (int i = 0; i < 3; ++i)
        rule.weights.push_back(0.5 * w);
}

// Orbit of (a, b, c) with distinct entries, six points.
void add_orbit6(QuadratureRule& rule, double a, double b, double w)
{
    const double c = 1.0 - a - b;
    const std::array<std::array<double, 3>, 6> perms{{{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}};
    for (const auto& p : perms) {
        rule.points.push_back(p);
        rule.weights.push_back(0.5 * w);
    }
}

QuadratureRule make_rule(int degree)
{
    QuadratureRule rule;
    switch (degree) {
    case 1:
        add_centroid(rule, 1.0);
        rule.exactness_degree = 1;
        break;
    case 2:
        add_orbit3(rule, 1.0 / 6.0, 1.0 / 3.0);
        rule.exactness_degree = 2;
        break;
    case 3:
    case 4:
        // Dunavant, 6 points.
        add_orbit3(rule, 0.445948490915965, 0.223381589678011);
        add_orbit3(rule, 0.091576213509771, 0.109951743655322);
        rule.exactness_degree = 4;
        break;
    case 5: {
        // Radon, 7 points, closed form.
        const double s = std::sqrt(15.0);
        add_centroid(rule, 9.0 / 40.0);
        add_orbit3(rule, (6.0 - s) / 21.0, (155.0 - s) / 1200.0);
        add_orbit3(rule, (6.0 + s) / 21.0, (155.0 + s) / 1200.0);
        rule.exactness_degree = 5;
        break;
    }
    case 6:
        // Dunavant, 12 points.
        add_orbit3(rule, 0.249286745170910, 0.116786275726379);
        add_orbit3(rule, 0.063089014491502, 0.050844906370207);
        add_orbit6(rule, 0.053145049844817, 0.310352451033784, 0.082851075618374);
        rule.exactness_degree = 6;
        break;
    default:
        throw InvalidArgument("quadrature: unsupported degree " + std::to_string(degree) + " (supported 1..6)");
    }
    return rule;
}

} // namespace

const QuadratureRule& quadrature(int degree)
{
    static const std::array<QuadratureRule, 6> rules{make_rule(1), make_rule(2), make_rule(3),
                                                    make_rule(4), make_rule(5), make_rule(6)};
    if (degree < 1 || degree > 6)
        throw InvalidArgument("quadrature: unsupported degree " + std::to_string(degree) + " (supported 1..6)");
    return rules[static_cast<std::size_t>(degree - 1)];
}

} // namespace tlns
