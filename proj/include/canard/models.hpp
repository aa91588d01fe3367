#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "roots.hpp"
#include "system.hpp"

namespace canard {

namespace models {

// eps x' = y - x^3/3 + x,  y' = q - x
class VanDerPol final : public Model {
public:
    std::string tag() const override { return "vdp"; }
    std::size_t dimension() const override { return 2; }
    const std::vector<std::string>& parameter_names() const override
    {
        static const std::vector<std::string> n{"q"};
        return n;
    }
    std::vector<double> default_values() const override { return {0.9}; }
    std::vector<bool> fast_mask() const override { return {true, false}; }

    void rhs(const double* p, double eps, const double* u, double* du) const override
    {
        du[0] = (u[1] - u[0] * u[0] * u[0] / 3.0 + u[0]) / eps;
        du[1] = p[0] - u[0];
    }
    void jacobian(const double*, double eps, const double* u, Eigen::MatrixXd& J) const override
    {
        J << (1.0 - u[0] * u[0]) / eps, 1.0 / eps, -1.0, 0.0;
    }
    double h(const double*, const double* u) const override { return u[1] - u[0] * u[0] * u[0] / 3.0 + u[0]; }
    void grad_h(const double*, const double* u, double* g) const override
    {
        g[0] = 1.0 - u[0] * u[0];
        g[1] = 1.0;
    }
    std::vector<State> equilibrium_states(const double* p, double) const override
    {
        double q = p[0];
        return {{q, q * q * q / 3.0 - q}};
    }
    double y_from_h(const double*, double x, double hv) const override { return hv + x * x * x / 3.0 - x; }
    double spike_threshold(const double*) const override { return 0.0; }
};

// eps x' = y - x^3/3 + r x,  y' = q - p x - y
class FitzHughNagumo final : public Model {
public:
    std::string tag() const override { return "fhn"; }
    std::size_t dimension() const override { return 2; }
    const std::vector<std::string>& parameter_names() const override
    {
        static const std::vector<std::string> n{"q", "r", "p"};
        return n;
    }
    std::vector<double> default_values() const override { return {0.3, 1.0, 1.0}; }
    std::vector<bool> fast_mask() const override { return {true, false}; }

    void rhs(const double* p, double eps, const double* u, double* du) const override
    {
        du[0] = (u[1] - u[0] * u[0] * u[0] / 3.0 + p[1] * u[0]) / eps;
        du[1] = p[0] - p[2] * u[0] - u[1];
    }
    void jacobian(const double* p, double eps, const double* u, Eigen::MatrixXd& J) const override
    {
        J << (p[1] - u[0] * u[0]) / eps, 1.0 / eps, -p[2], -1.0;
    }
    double h(const double* p, const double* u) const override
    {
        return u[1] - u[0] * u[0] * u[0] / 3.0 + p[1] * u[0];
    }
    void grad_h(const double* p, const double* u, double* g) const override
    {
        g[0] = p[1] - u[0] * u[0];
        g[1] = 1.0;
    }
    // x^3/3 + (p - r) x - q = 0
    std::vector<State> equilibrium_states(const double* p, double) const override
    {
        std::vector<State> out;
        for (double x : real_polynomial_roots({-p[0], p[2] - p[1], 0.0, 1.0 / 3.0}))
            out.push_back({x, x * x * x / 3.0 - p[1] * x});
        return out;
    }
    double y_from_h(const double* p, double x, double hv) const override { return hv + x * x * x / 3.0 - p[1] * x; }
    double spike_threshold(const double*) const override { return 0.0; }
};

// eps v' = beta v^3 + (1+alpha) v^2 - alpha v - w + I,  w' = b v - c w
class FitzHughNagumoGeneric final : public Model {
public:
    std::string tag() const override { return "fhn_generic"; }
    std::size_t dimension() const override { return 2; }
    const std::vector<std::string>& parameter_names() const override
    {
        static const std::vector<std::string> n{"alpha", "beta", "I", "b", "c"};
        return n;
    }
    std::vector<double> default_values() const override { return {0.1, -1.0, 0.1, 1.0, 1.0}; }
    std::vector<bool> fast_mask() const override { return {true, false}; }

    static double f(const double* p, double v) { return p[1] * v * v * v + (1 + p[0]) * v * v - p[0] * v; }
    static double df(const double* p, double v) { return 3 * p[1] * v * v + 2 * (1 + p[0]) * v - p[0]; }

    void rhs(const double* p, double eps, const double* u, double* du) const override
    {
        du[0] = (f(p, u[0]) - u[1] + p[2]) / eps;
        du[1] = p[3] * u[0] - p[4] * u[1];
    }
    void jacobian(const double* p, double eps, const double* u, Eigen::MatrixXd& J) const override
    {
        J << df(p, u[0]) / eps, -1.0 / eps, p[3], -p[4];
    }
    double h(const double* p, const double* u) const override { return f(p, u[0]) - u[1] + p[2]; }
    void grad_h(const double* p, const double* u, double* g) const override
    {
        g[0] = df(p, u[0]);
        g[1] = -1.0;
    }
    // c (f(v) + I) - b v = 0 after eliminating w = f(v) + I
    std::vector<State> equilibrium_states(const double* p, double) const override
    {
        double c = p[4];
        std::vector<State> out;
        for (double v : real_polynomial_roots({c * p[2], -c * p[0] - p[3], c * (1 + p[0]), c * p[1]}))
            out.push_back({v, f(p, v) + p[2]});
        return out;
    }
    double y_from_h(const double* p, double v, double hv) const override { return f(p, v) + p[2] - hv; }
};

// eps x' = z - a x^3 + b x^2 + I - y,  y' = s (x - x1) - y,  eps z' = c - d x^2 - z
class HindmarshRose final : public Model {
public:
    std::string tag() const override { return "hindmarsh_rose"; }
    std::size_t dimension() const override { return 3; }
    const std::vector<std::string>& parameter_names() const override
    {
        static const std::vector<std::string> n{"a", "b", "c", "d", "s", "x1", "I"};
        return n;
    }
    std::vector<double> default_values() const override { return {1.0, 3.0, 1.0, 5.0, 4.0, -1.618, 2.0}; }
    std::vector<bool> fast_mask() const override { return {true, false, true}; }

    void rhs(const double* p, double eps, const double* u, double* du) const override
    {
        double x = u[0];
        du[0] = (u[2] - p[0] * x * x * x + p[1] * x * x + p[6] - u[1]) / eps;
        du[1] = p[4] * (x - p[5]) - u[1];
        du[2] = (p[2] - p[3] * x * x - u[2]) / eps;
    }
    void jacobian(const double* p, double eps, const double* u, Eigen::MatrixXd& J) const override
    {
        double x = u[0];
        J << (-3 * p[0] * x * x + 2 * p[1] * x) / eps, -1.0 / eps, 1.0 / eps, p[4], -1.0, 0.0, -2 * p[3] * x / eps, 0.0,
            -1.0 / eps;
    }
    double h(const double* p, const double* u) const override
    {
        double x = u[0];
        return u[2] - p[0] * x * x * x + p[1] * x * x + p[6] - u[1];
    }
    void grad_h(const double* p, const double* u, double* g) const override
    {
        double x = u[0];
        g[0] = -3 * p[0] * x * x + 2 * p[1] * x;
        g[1] = -1.0;
        g[2] = 1.0;
    }
    // z = c - d x^2, y = s (x - x1), c - d x^2 - a x^3 + b x^2 + I - s (x - x1) = 0
    std::vector<State> equilibrium_states(const double* p, double) const override
    {
        std::vector<State> out;
        for (double x : real_polynomial_roots({p[2] + p[6] + p[4] * p[5], -p[4], p[1] - p[3], -p[0]}))
            out.push_back({x, p[4] * (x - p[5]), p[2] - p[3] * x * x});
        return out;
    }
    // folds of a x^3 - b x^2 at 0 and 2b/(3a)
    double spike_threshold(const double* p) const override { return p[1] / (3 * p[0]); }
};

// HR restricted to z = c - d x^2:
// eps x' = c + I - y - a x^3 + (b - d) x^2,  y' = s (x - x1) - y
class HindmarshRoseReduced final : public Model {
public:
    std::string tag() const override { return "hr_reduced"; }
    std::size_t dimension() const override { return 2; }
    const std::vector<std::string>& parameter_names() const override
    {
        static const std::vector<std::string> n{"a", "b", "c", "d", "s", "x1", "I"};
        return n;
    }
    std::vector<double> default_values() const override { return {1.0, 3.0, 1.0, 5.0, 4.0, -1.618, 1.37}; }
    std::vector<bool> fast_mask() const override { return {true, false}; }

    static double hx(const double* p, double x, double y)
    {
        return p[2] + p[6] - y - p[0] * x * x * x + (p[1] - p[3]) * x * x;
    }
    void rhs(const double* p, double eps, const double* u, double* du) const override
    {
        du[0] = hx(p, u[0], u[1]) / eps;
        du[1] = p[4] * (u[0] - p[5]) - u[1];
    }
    void jacobian(const double* p, double eps, const double* u, Eigen::MatrixXd& J) const override
    {
        double x = u[0];
        J << (-3 * p[0] * x * x + 2 * (p[1] - p[3]) * x) / eps, -1.0 / eps, p[4], -1.0;
    }
    double h(const double* p, const double* u) const override { return hx(p, u[0], u[1]); }
    void grad_h(const double* p, const double* u, double* g) const override
    {
        double x = u[0];
        g[0] = -3 * p[0] * x * x + 2 * (p[1] - p[3]) * x;
        g[1] = -1.0;
    }
    std::vector<State> equilibrium_states(const double* p, double) const override
    {
        std::vector<State> out;
        for (double x : real_polynomial_roots({p[2] + p[6] + p[4] * p[5], -p[4], p[1] - p[3], -p[0]}))
            out.push_back({x, p[4] * (x - p[5])});
        return out;
    }
    double y_from_h(const double* p, double x, double hv) const override { return hx(p, x, 0.0) - hv; }
    // folds of a x^3 - (b - d) x^2
    double spike_threshold(const double* p) const override { return (p[1] - p[3]) / (3 * p[0]); }
};

// eps x' = y - x^2/2,  y' = q - x
class LocalFold2D final : public Model {
public:
    std::string tag() const override { return "local_fold_2d"; }
    std::size_t dimension() const override { return 2; }
    const std::vector<std::string>& parameter_names() const override
    {
        static const std::vector<std::string> n{"q"};
        return n;
    }
    std::vector<double> default_values() const override { return {0.1}; }
    std::vector<bool> fast_mask() const override { return {true, false}; }

    void rhs(const double* p, double eps, const double* u, double* du) const override
    {
        du[0] = (u[1] - 0.5 * u[0] * u[0]) / eps;
        du[1] = p[0] - u[0];
    }
    void jacobian(const double*, double eps, const double* u, Eigen::MatrixXd& J) const override
    {
        J << -u[0] / eps, 1.0 / eps, -1.0, 0.0;
    }
    double h(const double*, const double* u) const override { return u[1] - 0.5 * u[0] * u[0]; }
    void grad_h(const double*, const double* u, double* g) const override
    {
        g[0] = -u[0];
        g[1] = 1.0;
    }
    std::vector<State> equilibrium_states(const double* p, double) const override
    {
        return {{p[0], 0.5 * p[0] * p[0]}};
    }
    double y_from_h(const double*, double x, double hv) const override { return hv + 0.5 * x * x; }
};

// eps x' = y - x^2/2,  y' = b z + c x,  z' = a
class LocalFold3D final : public Model {
public:
    std::string tag() const override { return "local_fold_3d"; }
    std::size_t dimension() const override { return 3; }
    const std::vector<std::string>& parameter_names() const override
    {
        static const std::vector<std::string> n{"a", "b", "c"};
        return n;
    }
    std::vector<double> default_values() const override { return {1.0, 1.0, 0.5}; }
    std::vector<bool> fast_mask() const override { return {true, false, false}; }

    void rhs(const double* p, double eps, const double* u, double* du) const override
    {
        du[0] = (u[1] - 0.5 * u[0] * u[0]) / eps;
        du[1] = p[1] * u[2] + p[2] * u[0];
        du[2] = p[0];
    }
    void jacobian(const double* p, double eps, const double* u, Eigen::MatrixXd& J) const override
    {
        J << -u[0] / eps, 1.0 / eps, 0.0, p[2], 0.0, p[1], 0.0, 0.0, 0.0;
    }
    double h(const double*, const double* u) const override { return u[1] - 0.5 * u[0] * u[0]; }
    void grad_h(const double*, const double* u, double* g) const override
    {
        g[0] = -u[0];
        g[1] = 1.0;
        g[2] = 0.0;
    }
    std::vector<State> equilibrium_states(const double* p, double) const override
    {
        if (p[0] != 0.0)
            return {};
        throw DomainError("local_fold_3d: a = 0 gives a continuum of equilibria");
    }
};

}  // namespace models

inline const std::map<std::string, std::function<std::shared_ptr<const Model>()>>& model_registry()
{
    static const std::map<std::string, std::function<std::shared_ptr<const Model>()>> reg{
        {"vdp", [] { return std::make_shared<models::VanDerPol>(); }},
        {"fhn", [] { return std::make_shared<models::FitzHughNagumo>(); }},
        {"fhn_generic", [] { return std::make_shared<models::FitzHughNagumoGeneric>(); }},
        {"hindmarsh_rose", [] { return std::make_shared<models::HindmarshRose>(); }},
        {"hr_reduced", [] { return std::make_shared<models::HindmarshRoseReduced>(); }},
        {"local_fold_2d", [] { return std::make_shared<models::LocalFold2D>(); }},
        {"local_fold_3d", [] { return std::make_shared<models::LocalFold3D>(); }},
    };
    return reg;
}

inline SlowFastSystem make_system(const std::string& tag, const ParamMap& params = {})
{
    auto it = model_registry().find(tag);
    if (it == model_registry().end())
        throw ConfigError("unknown system '" + tag + "'");
    auto m = it->second();
    return SlowFastSystem(m, m->default_epsilon(), params);
}

// Catalog entries with the default constants.
struct ModelCatalog {
    static SlowFastSystem vdp_supercritical(double eps = 0.04, double q = 0.9)
    {
        return make_system("vdp", {{"eps", eps}, {"q", q}});
    }
    static SlowFastSystem fhn_subcritical(double eps = 0.04, double q = 0.3, double r = 1.0, double p = 1.0)
    {
        return make_system("fhn", {{"eps", eps}, {"q", q}, {"r", r}, {"p", p}});
    }
    static SlowFastSystem hindmarsh_rose(double eps = 0.04, double I = 2.0) { return make_system("hindmarsh_rose", {{"eps", eps}, {"I", I}}); }
    static SlowFastSystem hr_reduced(double eps = 0.04, double I = 1.37) { return make_system("hr_reduced", {{"eps", eps}, {"I", I}}); }
    static SlowFastSystem local_fold_2d(double eps = 0.04, double q = 0.1)
    {
        return make_system("local_fold_2d", {{"eps", eps}, {"q", q}});
    }
    static SlowFastSystem local_fold_3d(double eps, double a, double b, double c)
    {
        return make_system("local_fold_3d", {{"eps", eps}, {"a", a}, {"b", b}, {"c", c}});
    }
};

// Affine change of variables taking the generic FitzHugh-Nagumo form onto
// the cubic normal form: v = mu X + v0, w = f(v0) + I - mu Y, tau = c t.
struct FhnTranslation {
    double v0, mu, w_offset, time_scale;
    SlowFastSystem target;

    State to_normal_form(const State& vw) const { return {(vw[0] - v0) / mu, (w_offset - vw[1]) / mu}; }
    State from_normal_form(const State& xy) const { return {mu * xy[0] + v0, w_offset - mu * xy[1]}; }
};

inline FhnTranslation translate_fhn_generic(const SlowFastSystem& g)
{
    if (g.tag() != "fhn_generic")
        throw DomainError("translate_fhn_generic: expected fhn_generic system");
    double alpha = g.param("alpha"), beta = g.param("beta"), I = g.param("I"), b = g.param("b"), c = g.param("c");
    if (!(beta < 0.0) || !(c > 0.0))
        throw DomainError("translate_fhn_generic: requires beta < 0 and c > 0");
    double v0 = -(1.0 + alpha) / (3.0 * beta);
    double mu = 1.0 / std::sqrt(-3.0 * beta);
    double fv0 = beta * v0 * v0 * v0 + (1 + alpha) * v0 * v0 - alpha * v0;
    double r = 3 * beta * v0 * v0 + 2 * (1 + alpha) * v0 - alpha;
    double p = b / c;
    double q = (c * (fv0 + I) - b * v0) / (mu * c);
    auto target = make_system("fhn", {{"eps", g.epsilon() * c}, {"q", q}, {"r", r}, {"p", p}});
    return {v0, mu, fv0 + I, c, target};
}

}  // namespace canard
