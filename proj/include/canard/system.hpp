#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace canard {

using State = std::vector<double>;
using ParamMap = std::map<std::string, double>;

// Stateless description of a polynomial slow-fast vector field. Parameter
// values arrive as a flat array ordered like parameter_names().
class Model {
public:
    virtual ~Model() = default;

    virtual std::string tag() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual const std::vector<std::string>& parameter_names() const = 0;
    virtual std::vector<double> default_values() const = 0;
    virtual double default_epsilon() const { return 0.04; }
    // components multiplied by 1/eps
    virtual std::vector<bool> fast_mask() const = 0;

    virtual void rhs(const double* p, double eps, const double* x, double* dx) const = 0;
    virtual void jacobian(const double* p, double eps, const double* x, Eigen::MatrixXd& J) const = 0;
    virtual double h(const double* p, const double* x) const = 0;
    virtual void grad_h(const double* p, const double* x, double* g) const = 0;

    // all real equilibria (may be empty)
    virtual std::vector<State> equilibrium_states(const double* p, double eps) const = 0;

    // second coordinate recovered from (x, h); planar models with h affine in y
    virtual double y_from_h(const double*, double, double) const
    {
        throw DomainError(tag() + ": no flat chart");
    }

    // x-midpoint between the folds of the fast nullcline
    virtual double spike_threshold(const double*) const
    {
        throw DomainError(tag() + ": no spike threshold");
    }
};

class SlowFastSystem {
public:
    SlowFastSystem() = default;
    SlowFastSystem(std::shared_ptr<const Model> model, double eps, const ParamMap& params = {})
        : model_(std::move(model)), eps_(eps), values_(model_->default_values())
    {
        if (!(eps_ > 0.0))
            throw DomainError("epsilon must be positive");
        for (const auto& [k, v] : params)
            set(k, v);
    }

    const Model& model() const { return *model_; }
    std::shared_ptr<const Model> model_ptr() const { return model_; }
    std::string tag() const { return model_->tag(); }
    std::size_t dimension() const { return model_->dimension(); }
    double epsilon() const { return eps_; }

    double param(const std::string& name) const
    {
        if (name == "eps")
            return eps_;
        return values_[index(name)];
    }
    bool has_param(const std::string& name) const
    {
        const auto& n = model_->parameter_names();
        return name == "eps" || std::find(n.begin(), n.end(), name) != n.end();
    }
    ParamMap params() const
    {
        ParamMap m;
        const auto& n = model_->parameter_names();
        for (std::size_t i = 0; i < n.size(); ++i)
            m[n[i]] = values_[i];
        return m;
    }
    const double* values() const { return values_.data(); }

    SlowFastSystem with(const std::string& name, double v) const
    {
        SlowFastSystem s = *this;
        s.set(name, v);
        return s;
    }
    SlowFastSystem with(const ParamMap& m) const
    {
        SlowFastSystem s = *this;
        for (const auto& [k, v] : m)
            s.set(k, v);
        return s;
    }
    SlowFastSystem with_epsilon(double e) const { return with("eps", e); }

    void rhs(const double* x, double* dx) const { model_->rhs(values_.data(), eps_, x, dx); }
    State rhs(const State& x) const
    {
        check_dim(x);
        State dx(x.size());
        rhs(x.data(), dx.data());
        return dx;
    }
    Eigen::MatrixXd jacobian(const State& x) const
    {
        check_dim(x);
        Eigen::MatrixXd J(dimension(), dimension());
        model_->jacobian(values_.data(), eps_, x.data(), J);
        return J;
    }
    double h(const State& x) const { return model_->h(values_.data(), x.data()); }
    double h(const double* x) const { return model_->h(values_.data(), x); }
    State grad_h(const State& x) const
    {
        State g(x.size());
        model_->grad_h(values_.data(), x.data(), g.data());
        return g;
    }

    void check_dim(const State& x) const
    {
        if (x.size() != dimension())
            throw DomainError(tag() + ": state has dimension " + std::to_string(x.size()) + ", expected " +
                              std::to_string(dimension()));
    }

private:
    std::size_t index(const std::string& name) const
    {
        const auto& n = model_->parameter_names();
        auto it = std::find(n.begin(), n.end(), name);
        if (it == n.end())
            throw ConfigError(tag() + ": unknown parameter '" + name + "'");
        return static_cast<std::size_t>(it - n.begin());
    }
    void set(const std::string& name, double v)
    {
        if (name == "eps") {
            if (!(v > 0.0))
                throw DomainError("epsilon must be positive");
            eps_ = v;
            return;
        }
        values_[index(name)] = v;
    }

    std::shared_ptr<const Model> model_;
    double eps_ = 0.04;
    std::vector<double> values_;
};

// velocity at state with temporary parameter overrides
inline State eval_rhs(const SlowFastSystem& sys, const State& x, const ParamMap& params = {})
{
    return params.empty() ? sys.rhs(x) : sys.with(params).rhs(x);
}

enum class Stability { stable, unstable, saddle, center, degenerate };

inline const char* to_string(Stability s)
{
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::saddle: return "saddle";
    case Stability::center: return "center";
    default: return "degenerate";
    }
}

struct Equilibrium {
    State state;
    Stability stability;
    Eigen::VectorXcd eigenvalues;
};

inline Stability classify_eigenvalues(const Eigen::VectorXcd& ev, double tol = 1e-12)
{
    int pos = 0, neg = 0, zero = 0;
    double scale = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        scale = std::max(scale, std::abs(ev[i]));
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double re = ev[i].real();
        if (std::fabs(re) <= tol * std::max(1.0, scale))
            ++zero;
        else if (re > 0)
            ++pos;
        else
            ++neg;
    }
    if (zero == 0)
        return pos == 0 ? Stability::stable : neg == 0 ? Stability::unstable : Stability::saddle;
    if (zero == 2 && ev.size() == 2 && std::fabs(ev[0].imag()) > 0)
        return Stability::center;
    return Stability::degenerate;
}

inline std::vector<Equilibrium> equilibria(const SlowFastSystem& sys, const ParamMap& params = {})
{
    SlowFastSystem s = params.empty() ? sys : sys.with(params);
    std::vector<Equilibrium> out;
    for (auto& st : s.model().equilibrium_states(s.values(), s.epsilon())) {
        Eigen::MatrixXd J = s.jacobian(st);
        Eigen::VectorXcd ev = J.eigenvalues();
        out.push_back({st, classify_eigenvalues(ev), ev});
    }
    return out;
}

}  // namespace canard
