// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <femlr/types.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace femlr {

struct OdeOptions
{
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    double min_step = 1e-14;
    long max_steps = 1000000;
};

///
/// Dormand–Prince 5(4) with embedded error control and FSAL, integrating
/// y' = f(t, y) from t0 to t1 (either direction). Throws Error on step-size
/// underflow or when the step budget is exhausted.
///
template <int N, typename F>
Eigen::Matrix<double, N, 1> integrate_dopri5(
    F&& f, double t0, double t1, Eigen::Matrix<double, N, 1> y, const OdeOptions& opts = {})
{
    using State = Eigen::Matrix<double, N, 1>;
    if (t0 == t1) return y;

    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b − b̂ (fifth minus fourth order weights)
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    double t = t0;
    State k1 = f(t, y);

    auto error_norm = [&](const State& y0, const State& y1, const State& err) {
        const State scale = (opts.abs_tol + opts.rel_tol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).matrix();
        return std::sqrt((err.cwiseQuotient(scale)).squaredNorm() / static_cast<double>(y0.size()));
    };

    // Initial step (Hairer–Nørsett–Wanner heuristic).
    double h;
    {
        const State scale = (opts.abs_tol + opts.rel_tol * y.cwiseAbs().array()).matrix();
        const double d0 = std::sqrt(y.cwiseQuotient(scale).squaredNorm() / N);
        const double d1 = std::sqrt(k1.cwiseQuotient(scale).squaredNorm() / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        const State y1 = y + dir * h0 * k1;
        const State k = f(t + dir * h0, y1);
        const double d2 = std::sqrt((k - k1).cwiseQuotient(scale).squaredNorm() / N) / h0;
        const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                    : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
        h = std::min({100 * h0, h1, span});
    }

    for (long step = 0; step < opts.max_steps; ++step) {
        const double remaining = std::abs(t1 - t);
        if (remaining <= 0.0) return y;
        bool last = false;
        if (h >= remaining) {
            h = remaining;
            last = true;
        }
        const double hs = dir * h;
        const State k2 = f(t + c2 * hs, y + hs * (a21 * k1));
        const State k3 = f(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
        const State k4 = f(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
        const State k5 = f(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const State k6 = f(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const State y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double t_new = last ? t1 : t + hs;
        const State k7 = f(t_new, y_new);
        const State err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = error_norm(y, y_new, err);

        if (en <= 1.0) {
            t = t_new;
            y = y_new;
            k1 = k7;
            if (last) return y;
            const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            h *= fac;
        } else {
            h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 1.0);
        }
        if (h < opts.min_step * std::max(1.0, std::abs(t))) {
            std::ostringstream os;
            os << "step size underflow at t = " << t;
            throw Error(os.str(), "ode");
        }
    }
    throw Error("step budget exhausted", "ode");
}

} // namespace femlr
