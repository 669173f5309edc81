// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/dynamics.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace femlr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double x)
{
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r -= kTwoPi;
    return r;
}

using FlowState = Eigen::Matrix<double, 6, 1>;

FlowState variational_rhs(const FlowSpec& spec, double t, const FlowState& s)
{
    const Vec2 x = s.head<2>();
    const Mat2 dv = spec.velocity_jacobian(x, t);
    Mat2 y;
    y << s[2], s[3], s[4], s[5];
    const Mat2 dy = dv * y;
    FlowState out;
    out.head<2>() = spec.velocity(x, t);
    out[2] = dy(0, 0);
    out[3] = dy(0, 1);
    out[4] = dy(1, 0);
    out[5] = dy(1, 1);
    return out;
}

template <typename Fn>
auto with_point(const Vec2& x, Fn&& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        std::ostringstream os;
        os.precision(17);
        os << e.what() << " (starting point " << x.x() << ", " << x.y() << ")";
        throw Error(os.str(), "dynamics");
    }
}

} // namespace

DynamicsModel standard_map(double a)
{
    DynamicsModel m;
    m.name = "standard_map";
    m.torus_periods = Vec2(kTwoPi, kTwoPi);
    m.map = [a](const Vec2& p) {
        const double s = a * std::sin(p.x());
        return Vec2(wrap_2pi(p.x() + p.y() + s), wrap_2pi(p.y() + s));
    };
    m.jacobian = [a](const Vec2& p) {
        const double c = a * std::cos(p.x());
        return (Mat2() << 1.0 + c, 1.0, c, 1.0).finished();
    };
    m.map_dot = [](const Vec2& p) {
        const double s = std::sin(p.x());
        return Vec2(s, s);
    };
    m.jacobian_dot = [](const Vec2& p) {
        const double c = std::cos(p.x());
        return (Mat2() << c, 0.0, c, 0.0).finished();
    };
    m.sample = [map = m.map, jac = m.jacobian, dot = m.map_dot, djac = m.jacobian_dot](const Vec2& p) {
        return DynamicsSample{map(p), jac(p), dot(p), djac(p)};
    };
    return m;
}

DynamicsFamily standard_map_family(double a)
{
    return {"standard_map", [a](double eps) { return standard_map(a + eps); }};
}

FlowResult flow_map(const FlowSpec& spec, const Vec2& x)
{
    FlowState s;
    s << x, 1.0, 0.0, 0.0, 1.0;
    const FlowState out = with_point(x, [&] {
        return integrate_dopri5<6>(
            [&spec](double t, const FlowState& y) { return variational_rhs(spec, t, y); }, spec.t0, spec.t1, s,
            spec.tolerances);
    });
    FlowResult r;
    r.image = out.head<2>();
    r.jacobian << out[2], out[3], out[4], out[5];
    return r;
}

Vec2 flow_position(const FlowSpec& spec, const Vec2& x)
{
    return with_point(x, [&] {
        return integrate_dopri5<2>([&spec](double t, const Vec2& y) { return spec.velocity(y, t); }, spec.t0, spec.t1,
            Vec2(x), spec.tolerances);
    });
}

DynamicsModel flow_time_model(const FlowSpec& spec, MapDotFrame frame)
{
    DynamicsModel m;
    m.name = "flow_time";
    m.invariant_domain = spec.invariant_domain;
    m.map = [spec](const Vec2& x) { return flow_position(spec, x); };
    m.jacobian = [spec](const Vec2& x) { return flow_map(spec, x).jacobian; };
    m.sample = [spec, frame](const Vec2& x) {
        const FlowResult f = flow_map(spec, x);
        DynamicsSample s;
        s.image = f.image;
        s.jacobian = f.jacobian;
        if (frame == MapDotFrame::Lagrangian) {
            s.map_dot = spec.velocity(f.image, spec.t1);
            s.jacobian_dot = spec.velocity_jacobian(f.image, spec.t1) * f.jacobian;
        } else {
            s.map_dot = spec.velocity(x, spec.t1);
            s.jacobian_dot = spec.velocity_jacobian(x, spec.t1);
        }
        return s;
    };
    if (frame == MapDotFrame::Lagrangian) {
        m.map_dot = [spec](const Vec2& x) { return spec.velocity(flow_position(spec, x), spec.t1); };
    } else {
        m.map_dot = [spec](const Vec2& x) { return spec.velocity(x, spec.t1); };
    }
    m.jacobian_dot = [sample = m.sample](const Vec2& x) { return sample(x).jacobian_dot; };
    return m;
}

DynamicsFamily flow_time_family(const FlowSpec& spec, MapDotFrame frame)
{
    return {"flow_time", [spec, frame](double eps) {
                FlowSpec s = spec;
                s.t1 = spec.t1 + eps;
                return flow_time_model(s, frame);
            }};
}

double transition(double t)
{
    if (t < 0.0) return 0.0;
    if (t > 1.0) return 1.0;
    return t * t * (3.0 - 2.0 * t);
}

FlowSpec double_gyre_spec(double t0, double t1)
{
    constexpr double pi = std::numbers::pi;
    FlowSpec spec;
    spec.t0 = t0;
    spec.t1 = t1;
    spec.invariant_domain = Rect{0.0, 0.0, 1.0, 1.0};
    // ψ = (1−s)ψ_P + sψ_F, ψ_P = sin(2πx)sin(πy), ψ_F = sin(πx)sin(2πy)
    spec.velocity = [](const Vec2& p, double t) {
        const double s = transition(t);
        const double sx1 = std::sin(pi * p.x()), cx1 = std::cos(pi * p.x());
        const double sx2 = std::sin(2 * pi * p.x()), cx2 = std::cos(2 * pi * p.x());
        const double sy1 = std::sin(pi * p.y()), cy1 = std::cos(pi * p.y());
        const double sy2 = std::sin(2 * pi * p.y()), cy2 = std::cos(2 * pi * p.y());
        const double psi_x = (1 - s) * 2 * pi * cx2 * sy1 + s * pi * cx1 * sy2;
        const double psi_y = (1 - s) * pi * sx2 * cy1 + s * 2 * pi * sx1 * cy2;
        return Vec2(-psi_y, psi_x);
    };
    spec.velocity_jacobian = [](const Vec2& p, double t) {
        const double s = transition(t);
        const double sx1 = std::sin(pi * p.x()), cx1 = std::cos(pi * p.x());
        const double sx2 = std::sin(2 * pi * p.x()), cx2 = std::cos(2 * pi * p.x());
        const double sy1 = std::sin(pi * p.y()), cy1 = std::cos(pi * p.y());
        const double sy2 = std::sin(2 * pi * p.y()), cy2 = std::cos(2 * pi * p.y());
        const double pi2 = pi * pi;
        const double psi_xx = (1 - s) * (-4 * pi2 * sx2 * sy1) + s * (-pi2 * sx1 * sy2);
        const double psi_yy = (1 - s) * (-pi2 * sx2 * sy1) + s * (-4 * pi2 * sx1 * sy2);
        const double psi_xy = (1 - s) * (2 * pi2 * cx2 * cy1) + s * (2 * pi2 * cx1 * cy2);
        return (Mat2() << -psi_xy, -psi_yy, psi_xx, psi_xy).finished();
    };
    return spec;
}

DynamicsModel identity_model(std::optional<Vec2> torus_periods, std::optional<Rect> domain)
{
    DynamicsModel m;
    m.name = "identity";
    m.torus_periods = torus_periods;
    m.invariant_domain = domain;
    m.map = [torus_periods](const Vec2& p) {
        if (!torus_periods) return p;
        Vec2 q = p;
        for (int k = 0; k < 2; ++k) {
            q[k] = std::fmod(q[k], (*torus_periods)[k]);
            if (q[k] < 0.0) q[k] += (*torus_periods)[k];
        }
        return q;
    };
    m.jacobian = [](const Vec2&) { return Mat2::Identity().eval(); };
    m.map_dot = [](const Vec2&) { return Vec2::Zero().eval(); };
    m.jacobian_dot = [](const Vec2&) { return Mat2::Zero().eval(); };
    m.sample = [map = m.map](const Vec2& p) {
        return DynamicsSample{map(p), Mat2::Identity(), Vec2::Zero(), Mat2::Zero()};
    };
    return m;
}

Mat2 finite_difference_jacobian(const DynamicsModel& model, const Vec2& x, double h)
{
    Mat2 j;
    for (int k = 0; k < 2; ++k) {
        Vec2 e = Vec2::Zero();
        e[k] = h;
        Vec2 d = model.map(x + e) - model.map(x - e);
        if (model.torus_periods)
            for (int i = 0; i < 2; ++i) d[i] -= (*model.torus_periods)[i] * std::round(d[i] / (*model.torus_periods)[i]);
        j.col(k) = d / (2 * h);
    }
    return j;
}

} // namespace femlr
