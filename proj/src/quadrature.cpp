// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/log.hpp>
#include <femlr/quadrature.hpp>

#include <cmath>
#include <string>

namespace femlr {

namespace {

void add_orbit3(QuadratureRule& r, double a, double w)
{
    // permutations of (a, a, 1−2a)
    const double b = 1.0 - 2.0 * a;
    r.points.emplace_back(b, a, a);
    r.points.emplace_back(a, b, a);
    r.points.emplace_back(a, a, b);
    r.weights.insert(r.weights.end(), 3, w);
}

} // namespace

QuadratureRule gauss_rule(int degree)
{
    if (degree < 1) throw Error("quadrature degree must be at least 1", "quadrature");
    if (degree > 5) throw Error("quadrature degree " + std::to_string(degree) + " is not supported", "quadrature");
    if (degree == 4) {
        log::warn("quadrature degree 4 is not supported; using the degree-5 rule");
        degree = 5;
    }

    QuadratureRule r;
    r.degree = degree;
    switch (degree) {
    case 1:
        r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
        r.weights.push_back(1.0);
        break;
    case 2:
        add_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
        break;
    case 3:
        // Dunavant 6-point rule, exact to degree 4.
        add_orbit3(r, 0.445948490915965, 0.223381589678011);
        add_orbit3(r, 0.091576213509771, 0.109951743655322);
        break;
    case 5: {
        // Radon's 7-point rule.
        const double s = std::sqrt(15.0);
        r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
        r.weights.push_back(9.0 / 40.0);
        add_orbit3(r, (6.0 - s) / 21.0, (155.0 - s) / 1200.0);
        add_orbit3(r, (6.0 + s) / 21.0, (155.0 + s) / 1200.0);
        break;
    }
    default: break;
    }
    return r;
}

} // namespace femlr
