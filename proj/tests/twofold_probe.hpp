#pragma once

// Brute-force labelling of a pinched two-fold by simulation only.
// Local fold: eps x' = y - x^2/2, y' = b z + c x, z' = a, pinch zone |h| < sigma.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace probe {

struct Labels {
    std::string sliding_type;  // folded_saddle, folded_node_attracting, ...
    int eig_in_region = 0;
    std::string curvature_case;  // mixed, both_toward, both_away
    std::string canard_class;    // simple, robust, visible, none
};

using V3 = std::array<double, 3>;
using V2 = std::array<double, 2>;

template <class F, class V>
V rk4(const F& f, V x, double dt, int n)
{
    for (int i = 0; i < n; ++i) {
        V k1 = f(x), k2, k3, k4, t;
        for (std::size_t j = 0; j < x.size(); ++j)
            t[j] = x[j] + 0.5 * dt * k1[j];
        k2 = f(t);
        for (std::size_t j = 0; j < x.size(); ++j)
            t[j] = x[j] + 0.5 * dt * k2[j];
        k3 = f(t);
        for (std::size_t j = 0; j < x.size(); ++j)
            t[j] = x[j] + dt * k3[j];
        k4 = f(t);
        for (std::size_t j = 0; j < x.size(); ++j)
            x[j] += dt / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
    return x;
}

struct TwoFold {
    double a, b, c, s;
    double eps = 0.1;

    double sigma() const { return s * eps; }
    V3 smooth(const V3& u) const { return {(u[1] - 0.5 * u[0] * u[0]) / eps, b * u[2] + c * u[0], a}; }
    double h(const V3& u) const { return u[1] - 0.5 * u[0] * u[0]; }
    // normal of the switching surface y = x^2/2 at Sigma coordinates (x, z)
    V3 normal(double x) const { return {-x, 1.0, 0.0}; }
    V3 boundary_point(double x, double z, int side) const { return {x, 0.5 * x * x + side * sigma(), z}; }

    // sign of h - (+-sigma) shortly after leaving a tangency point
    bool curves_away(int side) const
    {
        const double x = 1.0;
        // find z with hdot = 0 on the boundary by bisection on a wide bracket
        auto hdot = [&](double z) {
            V3 p = boundary_point(x, z, side);
            V3 f = smooth(p);
            return f[1] - p[0] * f[0];
        };
        double lo = -1e3, hi = 1e3;
        double flo = hdot(lo);
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            double fm = hdot(mid);
            if ((fm < 0) == (flo < 0)) {
                lo = mid;
                flo = fm;
            } else
                hi = mid;
        }
        V3 p = boundary_point(x, 0.5 * (lo + hi), side);
        auto f = [&](const V3& u) { return smooth(u); };
        V3 q = rk4(f, p, 1e-6, 2000);
        double excess = h(q) - side * sigma();
        return side > 0 ? excess > 0 : excess < 0;
    }

    // Filippov sliding vector on Sigma in (x, z), multiplied by x (desingularized)
    V2 desingularized(const V2& xz) const
    {
        double x = xz[0], z = xz[1];
        V3 fp = smooth(boundary_point(x, z, 1)), fm = smooth(boundary_point(x, z, -1));
        V3 n = normal(x);
        double dp = fp[0] * n[0] + fp[1] * n[1], dm = fm[0] * n[0] + fm[1] * n[1];
        // (dm fp - dp fm) / (dm - dp) rescaled by (dm - dp) / (2s), which is x
        V3 v;
        for (int j = 0; j < 3; ++j)
            v[j] = (dm * fp[j] - dp * fm[j]) / (2 * s);
        return {v[0], v[2]};
    }

    bool sliding_at(double x, double z) const
    {
        V3 fp = smooth(boundary_point(x, z, 1)), fm = smooth(boundary_point(x, z, -1));
        double dp = fp[1] - x * fp[0], dm = fm[1] - x * fm[0];
        return dp * dm < 0;
    }
};

// invariant rays of the desingularized field found from a fan of directions
inline std::vector<double> invariant_rays(const TwoFold& tf, int fan = 7200)
{
    auto f = [&](const V2& p) { return tf.desingularized(p); };
    const double pi = std::acos(-1.0);
    auto turn = [&](double th) {
        V2 p{std::cos(th), std::sin(th)};
        V2 q = rk4(f, p, 1e-5, 1);
        double d = std::atan2(q[1], q[0]) - th;
        while (d > pi)
            d -= 2 * pi;
        while (d < -pi)
            d += 2 * pi;
        return d;
    };
    std::vector<double> rays;
    double prev = turn(0.0);
    for (int i = 1; i <= fan; ++i) {
        double th = pi * i / fan;  // half circle: lines through the origin
        double cur = turn(th);
        if ((cur < 0) != (prev < 0)) {
            double lo = pi * (i - 1) / fan, hi = th;
            double flo = prev;
            for (int k = 0; k < 60; ++k) {
                double mid = 0.5 * (lo + hi), fm = turn(mid);
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else
                    hi = mid;
            }
            double ray = 0.5 * (lo + hi);
            // skip the singular direction x = 0, where the field is not smooth in theta
            if (std::fabs(std::cos(ray)) > 1e-6)
                rays.push_back(ray);
        }
        prev = cur;
    }
    return rays;
}

// mean log growth of |p| along the desingularized flow, renormalized each step
inline double growth_rate(const TwoFold& tf, double th, double T)
{
    auto f = [&](const V2& p) { return tf.desingularized(p); };
    V2 p{std::cos(th), std::sin(th)};
    double acc = 0;
    const double dt = 1e-3;
    int n = static_cast<int>(T / dt);
    for (int i = 0; i < n; ++i) {
        p = rk4(f, p, dt, 1);
        double r = std::hypot(p[0], p[1]);
        acc += std::log(r);
        p[0] /= r;
        p[1] /= r;
    }
    return acc / (n * dt);
}

inline Labels label(const TwoFold& tf)
{
    Labels L;
    auto rays = invariant_rays(tf);
    if (rays.size() == 2) {
        double g1 = growth_rate(tf, rays[0], 0.05), g2 = growth_rate(tf, rays[1], 0.05);
        if ((g1 > 0) != (g2 > 0))
            L.sliding_type = "folded_saddle";
        else
            L.sliding_type = g1 < 0 ? "folded_node_attracting" : "folded_node_repelling";
        for (double r : rays)
            if (tf.sliding_at(std::cos(r), std::sin(r)))
                ++L.eig_in_region;
    } else if (rays.empty()) {
        double g = growth_rate(tf, 0.3, 40.0);
        L.sliding_type = g < 0 ? "folded_focus_attracting" : "folded_focus_repelling";
    } else {
        L.sliding_type = "degenerate";
    }
    bool up = tf.curves_away(1), low = tf.curves_away(-1);
    L.curvature_case = up && low ? "both_away" : (!up && !low ? "both_toward" : "mixed");
    if (L.sliding_type == "folded_saddle" && L.eig_in_region == 2)
        L.canard_class = "simple";
    else if (L.sliding_type == "folded_node_attracting" && L.eig_in_region == 2)
        L.canard_class = "robust";
    else if (L.sliding_type == "folded_saddle" && L.eig_in_region == 1 && L.curvature_case == "both_away")
        L.canard_class = "visible";
    else
        L.canard_class = "none";
    return L;
}

}  // namespace probe
