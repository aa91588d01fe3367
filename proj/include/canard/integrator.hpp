#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include "error.hpp"
#include "system.hpp"

namespace canard {

enum class Scheme { adaptive_explicit, implicit };

inline const char* to_string(Scheme s) { return s == Scheme::implicit ? "implicit" : "adaptive_explicit"; }

struct IntegrationConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.0;  // 0: unlimited
    Scheme scheme = Scheme::adaptive_explicit;
    double event_tol = 1e-12;
    std::size_t max_steps = 20'000'000;
    double sample_dt = 0.0;  // >0: record on a uniform grid instead of every step
    double escape_radius = std::numeric_limits<double>::infinity();

    void validate() const
    {
        if (!(rel_tol > 0) || !(abs_tol > 0))
            throw ConfigError("integration: tolerances must be positive");
        if (!(event_tol > 0) || event_tol > abs_tol)
            throw ConfigError("integration: event_tol must be positive and not exceed abs_tol");
        if (max_step < 0 || sample_dt < 0)
            throw ConfigError("integration: max_step and sample_dt must be non-negative");
    }
};

// the tolerance recipe: explicit for moderate stiffness, implicit BDF below eps = 0.01
inline IntegrationConfig default_config(double eps)
{
    IntegrationConfig cfg;
    if (eps < 0.01) {
        cfg.scheme = Scheme::implicit;
        cfg.rel_tol = 1e-9;
        cfg.abs_tol = 1e-11;
        cfg.event_tol = 1e-11;
    }
    return cfg;
}

enum class EventKind {
    h_zero_crossing,
    nullcline_crossing,
    poincare_return,
    sliding_entry,
    sliding_exit,
    crossing,
    branch_point,
    canard_point,
    user
};

inline const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::h_zero_crossing: return "h_zero_crossing";
    case EventKind::nullcline_crossing: return "nullcline_crossing";
    case EventKind::poincare_return: return "poincare_return";
    case EventKind::sliding_entry: return "sliding_entry";
    case EventKind::sliding_exit: return "sliding_exit";
    case EventKind::crossing: return "crossing";
    case EventKind::branch_point: return "branch_point";
    case EventKind::canard_point: return "canard_point";
    default: return "user";
    }
}

struct EventSpec {
    EventKind kind = EventKind::user;
    std::function<double(const State&)> g;
    int direction = 0;       // +1: g increasing only, -1: decreasing only, 0: both
    int terminal_after = 0;  // stop after this many hits, 0 = never
};

struct Event {
    double t;
    EventKind kind;
    State location;
    std::size_t spec = 0;
};

struct OrbitTrace {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<Event> events;
    bool terminated_by_event = false;
    bool escaped = false;

    std::size_t size() const { return times.size(); }
    const State& back() const { return states.back(); }
};

// autonomous field with optional exact Jacobian
struct VectorField {
    std::size_t dim = 0;
    std::function<void(const double*, double*)> f;
    std::function<void(const double*, Eigen::MatrixXd&)> jac;

    State operator()(const State& x) const
    {
        State dx(dim);
        f(x.data(), dx.data());
        return dx;
    }
};

inline VectorField field_of(const SlowFastSystem& sys)
{
    VectorField v;
    v.dim = sys.dimension();
    v.f = [sys](const double* x, double* dx) { sys.rhs(x, dx); };
    v.jac = [sys](const double* x, Eigen::MatrixXd& J) {
        sys.model().jacobian(sys.values(), sys.epsilon(), x, J);
    };
    return v;
}

inline VectorField reversed(const VectorField& v)
{
    VectorField r;
    r.dim = v.dim;
    r.f = [f = v.f, n = v.dim](const double* x, double* dx) {
        f(x, dx);
        for (std::size_t i = 0; i < n; ++i)
            dx[i] = -dx[i];
    };
    if (v.jac)
        r.jac = [j = v.jac](const double* x, Eigen::MatrixXd& J) {
            j(x, J);
            J = -J;
        };
    return r;
}

namespace detail {

namespace odeint = boost::numeric::odeint;

class ExplicitDense {
public:
    ExplicitDense(const VectorField& v, const IntegrationConfig& cfg)
        : field_(v),
          stepper_(odeint::make_dense_output(cfg.abs_tol, cfg.rel_tol, cfg.max_step,
                                             odeint::runge_kutta_dopri5<State>()))
    {
    }
    void initialize(const State& x, double t, double dt) { stepper_.initialize(x, t, dt); }
    std::pair<double, double> do_step()
    {
        auto sys = [this](const State& x, State& dx, double) { field_.f(x.data(), dx.data()); };
        return stepper_.do_step(sys);
    }
    void calc_state(double t, State& x) { stepper_.calc_state(t, x); }
    State current_state() const { return stepper_.current_state(); }
    double current_dt() const { return stepper_.current_time_step(); }

private:
    VectorField field_;
    decltype(odeint::make_dense_output(1.0, 1.0, 0.0, odeint::runge_kutta_dopri5<State>())) stepper_;
};

// GSL multistep BDF with exact Jacobian; dense output by cubic Hermite
// interpolation between accepted steps
class ImplicitDense {
public:
    ImplicitDense(const VectorField& v, const IntegrationConfig& cfg) : field_(v), cfg_(cfg), J_(v.dim, v.dim)
    {
        if (!field_.jac)
            throw ConfigError("implicit scheme needs a Jacobian");
        static const bool quiet = [] {
            gsl_set_error_handler_off();
            return true;
        }();
        (void)quiet;
        sys_ = {&ImplicitDense::f_cb, &ImplicitDense::j_cb, field_.dim, this};
        driver_ = gsl_odeiv2_driver_alloc_y_new(&sys_, gsl_odeiv2_step_msbdf, 1e-6, cfg.abs_tol, cfg.rel_tol);
        if (!driver_)
            throw NumericFailure("implicit stepper allocation failed");
        step_ = driver_->s;
        control_ = driver_->c;
        evolve_ = driver_->e;
    }
    ImplicitDense(const ImplicitDense&) = delete;
    ImplicitDense& operator=(const ImplicitDense&) = delete;
    ~ImplicitDense()
    {
        gsl_odeiv2_driver_free(driver_);
    }
    void initialize(const State& x, double t, double dt)
    {
        x_ = x;
        t_ = t;
        dt_ = dt;
        dx_ = field_(x_);
        gsl_odeiv2_evolve_reset(evolve_);
        gsl_odeiv2_step_reset(step_);
    }
    std::pair<double, double> do_step()
    {
        x_old_ = x_;
        dx_old_ = dx_;
        t_old_ = t_;
        double tmax = cfg_.max_step > 0 ? t_ + cfg_.max_step : std::numeric_limits<double>::max();
        if (cfg_.max_step > 0)
            dt_ = std::min(dt_, cfg_.max_step);
        int status = gsl_odeiv2_evolve_apply(evolve_, control_, step_, &sys_, &t_, tmax, &dt_, x_.data());
        if (status != GSL_SUCCESS)
            throw StiffnessFailure("implicit step failed at t=" + std::to_string(t_old_), t_old_);
        dx_ = field_(x_);
        return {t_old_, t_};
    }
    void calc_state(double t, State& x)
    {
        double h = t_ - t_old_;
        double s = (t - t_old_) / h;
        double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        x.resize(field_.dim);
        for (std::size_t i = 0; i < field_.dim; ++i)
            x[i] = h00 * x_old_[i] + h10 * h * dx_old_[i] + h01 * x_[i] + h11 * h * dx_[i];
    }
    State current_state() const { return x_; }
    double current_dt() const { return t_ - t_old_; }

private:
    static int f_cb(double, const double y[], double dydt[], void* self)
    {
        static_cast<ImplicitDense*>(self)->field_.f(y, dydt);
        return GSL_SUCCESS;
    }
    static int j_cb(double, const double y[], double* dfdy, double dfdt[], void* self)
    {
        auto* me = static_cast<ImplicitDense*>(self);
        me->field_.jac(y, me->J_);
        std::size_t n = me->field_.dim;
        for (std::size_t i = 0; i < n; ++i) {
            dfdt[i] = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                dfdy[i * n + j] = me->J_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        return GSL_SUCCESS;
    }

    VectorField field_;
    IntegrationConfig cfg_;
    Eigen::MatrixXd J_;
    gsl_odeiv2_system sys_{};
    gsl_odeiv2_driver* driver_ = nullptr;
    gsl_odeiv2_step* step_ = nullptr;
    gsl_odeiv2_control* control_ = nullptr;
    gsl_odeiv2_evolve* evolve_ = nullptr;
    State x_, dx_, x_old_, dx_old_;
    double t_ = 0, t_old_ = 0, dt_ = 0;
};

inline bool finite(const State& x)
{
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

inline double norm_inf(const State& x)
{
    double m = 0;
    for (double v : x)
        m = std::max(m, std::fabs(v));
    return m;
}

template <class Dense>
OrbitTrace run_dense(Dense& dense, const VectorField& v, const State& x0, double t0, double t1,
                     const IntegrationConfig& cfg, const std::vector<EventSpec>& events)
{
    OrbitTrace tr;
    tr.times.push_back(t0);
    tr.states.push_back(x0);
    if (t1 == t0)
        return tr;

    State dx = v(x0);
    double scale = std::max(norm_inf(dx), 1e-300);
    double dt0 = std::min(t1 - t0, std::max(1e-12, 1e-6 * (1.0 + norm_inf(x0)) / scale));
    if (cfg.max_step > 0)
        dt0 = std::min(dt0, cfg.max_step);
    dense.initialize(x0, t0, dt0);

    std::vector<double> last_g(events.size());
    std::vector<int> hits(events.size(), 0);
    for (std::size_t k = 0; k < events.size(); ++k)
        last_g[k] = events[k].g(x0);

    double next_sample = t0 + cfg.sample_dt;
    State xs(v.dim);
    std::size_t steps = 0;

    while (true) {
        if (++steps > cfg.max_steps)
            throw StiffnessFailure("integrate: step budget exhausted at t=" + std::to_string(tr.times.back()),
                                   tr.times.back());
        std::pair<double, double> iv;
        try {
            iv = dense.do_step();
        } catch (const boost::numeric::odeint::odeint_error& e) {
            throw StiffnessFailure(std::string("integrate: step size control failed at t=") +
                                       std::to_string(tr.times.back()) + " (" + e.what() + ")",
                                   tr.times.back());
        }
        auto [ta, tb] = iv;
        State xb = dense.current_state();
        if (!finite(xb))
            throw NonFiniteState("integrate: non-finite state near t=" + std::to_string(ta), ta);
        if (dense.current_dt() < 1e-14 * std::max(1.0, std::fabs(tb)))
            throw StiffnessFailure("integrate: step size underflow at t=" + std::to_string(tb), tb);

        double tend = std::min(tb, t1);

        // event localization on the dense interpolant
        struct Hit {
            double t;
            std::size_t k;
            State x;
        };
        std::vector<Hit> found;
        std::vector<double> g_end(events.size());
        for (std::size_t k = 0; k < events.size(); ++k) {
            State xe(v.dim);
            if (tend < tb)
                dense.calc_state(tend, xe);
            else
                xe = xb;
            double gb = events[k].g(xe);
            g_end[k] = gb;
            double ga = last_g[k];
            bool change = (ga < 0 && gb >= 0) || (ga > 0 && gb <= 0);
            if (!change)
                continue;
            int dir = gb > ga ? 1 : -1;
            if (events[k].direction != 0 && dir != events[k].direction)
                continue;
            if (gb == 0.0) {
                found.push_back({tend, k, xe});
                continue;
            }
            double lo = ta, hi = tend, glo = ga;
            State xm(v.dim);
            double tm = hi;
            for (int it = 0; it < 200; ++it) {
                tm = 0.5 * (lo + hi);
                dense.calc_state(tm, xm);
                double gm = events[k].g(xm);
                if (std::fabs(gm) <= cfg.event_tol)
                    break;
                if ((gm < 0) == (glo < 0)) {
                    lo = tm;
                    glo = gm;
                } else {
                    hi = tm;
                }
                if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(tm)))
                    break;
            }
            found.push_back({tm, k, xm});
        }
        std::sort(found.begin(), found.end(), [](const Hit& a, const Hit& b) { return a.t < b.t; });

        double stop_t = tend;
        bool stop = false;
        State stop_x;
        for (auto& h : found) {
            tr.events.push_back({h.t, events[h.k].kind, h.x, h.k});
            ++hits[h.k];
            if (events[h.k].terminal_after > 0 && hits[h.k] >= events[h.k].terminal_after) {
                stop = true;
                stop_t = h.t;
                stop_x = h.x;
                break;
            }
        }
        for (std::size_t k = 0; k < events.size(); ++k)
            if (g_end[k] != 0.0)
                last_g[k] = g_end[k];

        // recording
        auto push = [&tr](double t, const State& x) {
            if (t > tr.times.back()) {
                tr.times.push_back(t);
                tr.states.push_back(x);
            }
        };
        if (cfg.sample_dt > 0) {
            while (next_sample <= stop_t) {
                dense.calc_state(next_sample, xs);
                push(next_sample, xs);
                next_sample += cfg.sample_dt;
            }
        }
        if (stop) {
            push(stop_t, stop_x);
            tr.terminated_by_event = true;
            return tr;
        }
        State xend = xb;
        if (tend < tb)
            dense.calc_state(tend, xend);
        if (cfg.sample_dt <= 0 || tend >= t1)
            push(tend, xend);
        if (norm_inf(xend) > cfg.escape_radius) {
            tr.escaped = true;
            return tr;
        }
        if (tend >= t1)
            return tr;
    }
}

}  // namespace detail

// Integrate x' = v(x) over [t0, t1] recording accepted steps and localized events.
inline OrbitTrace integrate(const VectorField& v, const State& x0, double t0, double t1,
                            const IntegrationConfig& cfg = {}, const std::vector<EventSpec>& events = {})
{
    cfg.validate();
    if (x0.size() != v.dim)
        throw DomainError("integrate: initial state has wrong dimension");
    if (!detail::finite(x0))
        throw NonFiniteState("integrate: non-finite initial state", t0);
    if (!(t1 >= t0))
        throw DomainError("integrate: t_span must satisfy t1 >= t0 (integrate reversed(field) for backward time)");
    if (cfg.scheme == Scheme::implicit) {
        detail::ImplicitDense d(v, cfg);
        return detail::run_dense(d, v, x0, t0, t1, cfg, events);
    }
    detail::ExplicitDense d(v, cfg);
    return detail::run_dense(d, v, x0, t0, t1, cfg, events);
}

inline OrbitTrace integrate(const SlowFastSystem& sys, const State& x0, double t0, double t1,
                            const IntegrationConfig& cfg = {}, const std::vector<EventSpec>& events = {})
{
    sys.check_dim(x0);
    return integrate(field_of(sys), x0, t0, t1, cfg, events);
}

// common events
inline EventSpec h_zero_event(const SlowFastSystem& sys, int direction = 0)
{
    return {EventKind::h_zero_crossing, [sys](const State& x) { return sys.h(x); }, direction, 0};
}

inline EventSpec hyperplane_event(std::size_t coord, double value, int direction, EventKind kind = EventKind::poincare_return,
                                  int terminal_after = 0)
{
    return {kind, [coord, value](const State& x) { return x[coord] - value; }, direction, terminal_after};
}

}  // namespace canard
