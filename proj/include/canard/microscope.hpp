#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "integrator.hpp"
#include "roots.hpp"
#include "signed_power.hpp"
#include "system.hpp"

namespace canard {

// A curve h = eps*gamma0(x) near the critical manifold, with two derivatives.
struct Gamma0 {
    std::string tag;
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;

    // -1/(1+x), the nullcline through the fold of van der Pol at q = 1
    static Gamma0 vdp()
    {
        return {"vdp_hyperbola", [](double x) { return -1.0 / (1.0 + x); },
                [](double x) { return 1.0 / ((1.0 + x) * (1.0 + x)); },
                [](double x) { return -2.0 / ((1.0 + x) * (1.0 + x) * (1.0 + x)); }};
    }

    // -(1/3)(x + (3p - 2r - eps)/(x + x_h)), x_h = branch*sqrt(r - eps)
    static Gamma0 fhn(double r, double p, double eps, int branch = 1)
    {
        if (!(r > eps))
            throw DomainError("fhn gamma0: requires r > eps");
        double xh = (branch >= 0 ? 1.0 : -1.0) * std::sqrt(r - eps);
        double k = 3 * p - 2 * r - eps;
        return {"fhn", [xh, k](double x) { return -(x + k / (x + xh)) / 3.0; },
                [xh, k](double x) { return -(1.0 - k / ((x + xh) * (x + xh))) / 3.0; },
                [xh, k](double x) { return -(2.0 * k / ((x + xh) * (x + xh) * (x + xh))) / 3.0; }};
    }

    // E_{I_h}(x)/(eps - eta'(x)) with the common factor (x - x_h) divided out,
    // E(x) = c + I_h - a x^3 + (b-d) x^2 - s (x - x1), eta(x) = -a x^3 + (b-d) x^2;
    // the quotient depends on c, x1, I_h and eps only through x_h
    static Gamma0 hr(double a, double b, double d, double s, double xh)
    {
        double k = b - d;
        // E = -a x^3 + k x^2 - s x + (c + Ih + s x1) = (x - xh)(A x^2 + B x + C)
        double A = -a;
        double B = k + A * xh;
        double C = -s + B * xh;
        // eps - eta' = 3a x^2 - 2k x + eps = 3a (x - xh)(x - xo)
        double xo = 2 * k / (3 * a) - xh;
        auto val = [=](double x) { return (A * x * x + B * x + C) / (3 * a * (x - xo)); };
        auto der = [=](double x) {
            double num = A * x * x + B * x + C, den = 3 * a * (x - xo);
            return ((2 * A * x + B) * den - num * 3 * a) / (den * den);
        };
        auto der2 = [=](double x) {
            // num/den with den linear: (num'' den^2 - 2 den' (num' den - num den')) / den^3
            double num = A * x * x + B * x + C, dn = 2 * A * x + B, ddn = 2 * A;
            double den = 3 * a * (x - xo), dd = 3 * a;
            return (ddn * den * den - 2 * dd * (dn * den - num * dd)) / (den * den * den);
        };
        return {"hr", val, der, der2};
    }

    // eps*gamma0 equal to the van der Pol flat-chart orbit at q = q0 through the
    // hyperbola at the window ends, integrated inward (the contracting
    // direction on both sides of q0). gamma0' is the orbit slope, so the
    // curve is invariant for the flow at q0.
    static Gamma0 vdp_invariant(double eps, double q0, double x_lo = 0.1, double x_hi = 1.9)
    {
        auto slope = [eps, q0](double x, double hv) { return eps * (q0 - x) / hv + 1.0 - x * x; };
        struct Table {
            std::vector<double> x, h;
        };
        auto build = [&](double x_start, double x_end) {
            double dir = x_end > x_start ? 1.0 : -1.0;
            // state (x, h) in time tau = |x - x_start|
            VectorField g;
            g.dim = 2;
            g.f = [slope, dir](const double* u, double* du) {
                du[0] = dir;
                du[1] = dir * slope(u[0], u[1]);
            };
            IntegrationConfig cfg;
            cfg.rel_tol = 1e-12;
            cfg.abs_tol = 1e-14;
            cfg.event_tol = 1e-14;
            cfg.sample_dt = 2e-4;
            auto tr = integrate(g, {x_start, -eps / (1.0 + x_start)}, 0.0, std::fabs(x_end - x_start), cfg);
            Table t;
            for (const auto& s : tr.states) {
                t.x.push_back(s[0]);
                t.h.push_back(s[1]);
            }
            t.x.back() = x_end;  // tau accumulates rounding, pin the join exactly
            if (dir < 0) {
                std::reverse(t.x.begin(), t.x.end());
                std::reverse(t.h.begin(), t.h.end());
            }
            return t;
        };
        auto left = std::make_shared<Table>(build(x_lo, q0));
        auto right = std::make_shared<Table>(build(x_hi, q0));
        auto hval = [left, right, q0, slope](double x) {
            const Table& t = x <= q0 ? *left : *right;
            if (x < t.x.front() || x > t.x.back())
                throw DomainError("vdp_invariant gamma0: x outside tabulated window");
            auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
            std::size_t i = it == t.x.begin() ? 0 : static_cast<std::size_t>(it - t.x.begin()) - 1;
            if (i + 1 >= t.x.size())
                i = t.x.size() - 2;
            double x0 = t.x[i], x1 = t.x[i + 1], h0 = t.h[i], h1 = t.h[i + 1];
            double dx = x1 - x0, s = (x - x0) / dx;
            double m0 = slope(x0, h0) * dx, m1 = slope(x1, h1) * dx;
            return (1 + 2 * s) * (1 - s) * (1 - s) * h0 + s * (1 - s) * (1 - s) * m0 + s * s * (3 - 2 * s) * h1 +
                   s * s * (s - 1) * m1;
        };
        auto val = [hval, eps](double x) { return hval(x) / eps; };
        auto der = [hval, slope, eps](double x) { return slope(x, hval(x)) / eps; };
        auto der2 = [hval, slope, eps, q0](double x) {
            double hv = hval(x), hp = slope(x, hv);
            return (-eps / hv - eps * (q0 - x) * hp / (hv * hv) - 2 * x) / eps;
        };
        return {"vdp_invariant", val, der, der2};
    }
};

enum class ChartKind { lienard, flat_h, v_scope, w_scope };

inline const char* to_string(ChartKind k)
{
    switch (k) {
    case ChartKind::lienard: return "lienard";
    case ChartKind::flat_h: return "flat_h";
    case ChartKind::v_scope: return "v_scope";
    default: return "w_scope";
    }
}

inline ChartKind chart_kind_from_string(const std::string& s)
{
    if (s == "lienard")
        return ChartKind::lienard;
    if (s == "flat_h" || s == "flat")
        return ChartKind::flat_h;
    if (s == "v_scope" || s == "V")
        return ChartKind::v_scope;
    if (s == "w_scope" || s == "W")
        return ChartKind::w_scope;
    throw ConfigError("unknown chart '" + s + "'");
}

// (x, h) of a planar state
inline State to_flat(const SlowFastSystem& sys, const State& u)
{
    if (sys.dimension() != 2)
        throw DomainError("to_flat: planar systems only");
    return {u[0], sys.h(u)};
}

inline State from_flat(const SlowFastSystem& sys, const State& xh)
{
    return {xh[0], sys.model().y_from_h(sys.values(), xh[0], xh[1])};
}

// velocity in (x, h) by the chain rule on the model field
inline State flat_rhs(const SlowFastSystem& sys, const State& xh)
{
    State u = from_flat(sys, xh);
    State du = sys.rhs(u);
    State g = sys.grad_h(u);
    return {du[0], g[0] * du[0] + g[1] * du[1]};
}

struct Chart {
    ChartKind kind = ChartKind::lienard;
    double eps = 0.04;
    std::optional<Gamma0> gamma0;
    double floor = 0.0;  // |ordinate| below this is pinch-zone interior

    static Chart lienard(double eps) { return {ChartKind::lienard, eps, std::nullopt, 0.0}; }
    static Chart flat(double eps) { return {ChartKind::flat_h, eps, std::nullopt, 0.0}; }
    static Chart v_scope(double eps) { return {ChartKind::v_scope, eps, std::nullopt, std::pow(eps, eps) * 1e-3}; }
    static Chart w_scope(double eps, Gamma0 g)
    {
        return {ChartKind::w_scope, eps, std::move(g), std::pow(eps, 2 * eps) * 1e-3};
    }

    std::string name() const { return to_string(kind); }

    // h offset removed before the power map (zero except for W)
    double shift(double x) const { return kind == ChartKind::w_scope ? eps * gamma0->value(x) : 0.0; }

    // chart ordinate -> h
    double h_of(double x, double ord) const
    {
        switch (kind) {
        case ChartKind::flat_h: return ord;
        case ChartKind::v_scope: return signed_pow(ord, 1.0 / eps);
        case ChartKind::w_scope: return signed_pow(ord, 1.0 / eps) + shift(x);
        default: throw DomainError("h_of: Lienard chart has no h ordinate");
        }
    }
    double ord_of(double x, double hv) const
    {
        switch (kind) {
        case ChartKind::flat_h: return hv;
        case ChartKind::v_scope: return signed_pow(hv, eps);
        case ChartKind::w_scope: return signed_pow(hv - shift(x), eps);
        default: throw DomainError("ord_of: Lienard chart has no h ordinate");
        }
    }

    State to_chart(const SlowFastSystem& sys, const State& u) const
    {
        if (kind == ChartKind::lienard)
            return u;
        State xh = to_flat(sys, u);
        return {xh[0], ord_of(xh[0], xh[1])};
    }
    State from_chart(const SlowFastSystem& sys, const State& c) const
    {
        if (kind == ChartKind::lienard)
            return c;
        return from_flat(sys, {c[0], h_of(c[0], c[1])});
    }

    // ordinate velocity divided by its positive singular factor: hdot for V,
    // hdot - eps gamma0' xdot for W. Same sign and zero set as the chart field.
    double drive_h(const SlowFastSystem& sys, double x, double hv) const
    {
        State f = flat_rhs(sys, {x, hv});
        if (kind == ChartKind::w_scope)
            return f[1] - eps * gamma0->d1(x) * f[0];
        return f[1];
    }
    double drive(const SlowFastSystem& sys, double x, double ord) const { return drive_h(sys, x, h_of(x, ord)); }

    State rhs(const SlowFastSystem& sys, const State& c) const
    {
        switch (kind) {
        case ChartKind::lienard: return sys.rhs(c);
        case ChartKind::flat_h: return flat_rhs(sys, c);
        default: break;
        }
        double x = c[0], ord = c[1];
        if (std::fabs(ord) < floor)
            throw PinchZoneInterior(name() + ": |ordinate| = " + std::to_string(std::fabs(ord)) + " below floor " +
                                    std::to_string(floor));
        double hv = h_of(x, ord);
        State f = flat_rhs(sys, {x, hv});
        double d = kind == ChartKind::w_scope ? f[1] - eps * gamma0->d1(x) * f[0] : f[1];
        // eps |ord|^(1 - 1/eps), log space
        double factor = eps * std::exp((1.0 - 1.0 / eps) * std::log(std::fabs(ord)));
        return {f[0], factor * d};
    }
};

inline State v_scope_rhs(const SlowFastSystem& sys, const State& xV)
{
    return Chart::v_scope(sys.epsilon()).rhs(sys, xV);
}

inline State w_scope_rhs(const SlowFastSystem& sys, const State& xW, const Gamma0& g)
{
    return Chart::w_scope(sys.epsilon(), g).rhs(sys, xW);
}

// ordinate of the chart nullcline at x; the drive is affine in h for every
// planar catalog model
inline std::optional<double> nullcline_ordinate(const SlowFastSystem& sys, const Chart& chart, double x)
{
    double d0 = chart.drive_h(sys, x, 0.0), d1 = chart.drive_h(sys, x, 1.0);
    if (d1 == d0)
        return std::nullopt;
    double hs = -d0 / (d1 - d0);
    if (chart.kind == ChartKind::lienard)
        return sys.model().y_from_h(sys.values(), x, hs);
    return chart.ord_of(x, hs);
}

struct SingularPoint {
    double x, ordinate, param;
};

struct Nullcline {
    Chart chart;
    std::function<std::optional<double>(double)> curve;
    std::vector<SingularPoint> singular_points;
};

inline Nullcline nullcline(const SlowFastSystem& sys, const Chart& chart)
{
    Nullcline n;
    n.chart = chart;
    n.curve = [sys, chart](double x) { return nullcline_ordinate(sys, chart, x); };
    return n;
}

// Crossing point of the nullcline branches: drive = d/dx drive = d/dord drive = 0
// in (x, ordinate, param), damped Newton from the seed.
inline SingularPoint nullcline_singularity(const SlowFastSystem& sys, const Chart& chart, const std::string& param,
                                           const SingularPoint& seed, double tol = 1e-12)
{
    auto D = [&](double x, double ord, double pv) { return chart.drive(sys.with(param, pv), x, ord); };
    auto F = [&](const Eigen::VectorXd& v) {
        double x = v[0], o = v[1], pv = v[2];
        double hx = 1e-5 * (1.0 + std::fabs(x)), ho = 1e-5 * std::max(std::fabs(o), 1e-3);
        Eigen::VectorXd r(3);
        r[0] = D(x, o, pv);
        r[1] = (D(x + hx, o, pv) - D(x - hx, o, pv)) / (2 * hx);
        r[2] = (D(x, o + ho, pv) - D(x, o - ho, pv)) / (2 * ho);
        return r;
    };
    Eigen::VectorXd x0(3);
    x0 << seed.x, seed.ordinate, seed.param;
    auto J = [&](const Eigen::VectorXd& v) { return fd_jacobian(F, v, 1e-6); };
    NewtonResult res = newton_solve(F, J, x0, tol, 200);
    if (!res.converged && res.residual > 1e-9)
        throw NumericFailure("nullcline_singularity: Newton did not converge (residual " + std::to_string(res.residual) + ")");
    return {res.x[0], res.x[1], res.x[2]};
}

// Identity check for the rewritten W field: |Wdot/W - [(x-q0)/gamma0 + eps(q-q0)/W^[1/eps]]| relative.
// The chart's gamma0 must make eps*gamma0 an orbit at q = q0 (Gamma0::vdp_invariant).
inline double lemma51_residual(const SlowFastSystem& vdp, const Chart& wchart, double x, double W, double q, double q0)
{
    if (W == 0.0)
        throw DomainError("lemma51_residual: W = 0");
    if (x == -1.0)
        throw DomainError("lemma51_residual: x = -1");
    double g = wchart.gamma0->value(x);
    if (g == 0.0)
        throw DomainError("lemma51_residual: gamma0(x) = 0");
    State f = wchart.rhs(vdp.with("q", q), {x, W});
    double lhs = f[1] / W;
    double rhs = (x - q0) / g + vdp.epsilon() * (q - q0) / signed_pow(W, 1.0 / vdp.epsilon());
    return std::fabs(lhs - rhs) / std::max(1.0, std::fabs(lhs));
}

// W0 exp(-q0 x - ((2q0-1)/2) x^2 + x^3/3 + x^4/4)
inline double canard_profile(double x, double W0, double q0)
{
    double e = -q0 * x - 0.5 * (2 * q0 - 1) * x * x + x * x * x / 3.0 + x * x * x * x / 4.0;
    return W0 * std::exp(e);
}

// piecewise-smooth fold approximation in (x, W)
inline State pws_fold_rhs(const State& xW, double q, double q0, double eps)
{
    double x = xW[0], W = xW[1];
    if (W == 0.0)
        throw DomainError("pws_fold_rhs: W = 0 lies on the switching line");
    double H = W > 0 ? 1.0 : 0.0;
    double u = signed_pow(W, 1.0 / eps);
    return {-0.5 + H * u / eps, 2 * W * ((q0 - x) + H * (q - q0) * (1.0 - (2.0 / eps) * u))};
}

// trace states expressed in another chart; samples inside the floor are dropped
inline OrbitTrace map_trace(const OrbitTrace& tr, const SlowFastSystem& sys, const Chart& chart)
{
    OrbitTrace out;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        State c = chart.to_chart(sys, tr.states[i]);
        if (chart.kind != ChartKind::lienard && std::fabs(c[1]) < chart.floor)
            continue;
        out.times.push_back(tr.times[i]);
        out.states.push_back(c);
    }
    for (const auto& e : tr.events)
        out.events.push_back({e.t, e.kind, chart.to_chart(sys, e.location), e.spec});
    return out;
}

}  // namespace canard
