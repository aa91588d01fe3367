#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "integrator.hpp"
#include "system.hpp"

namespace canard {

// hyperplane {x[coord] = value}, crossed with sign(dx[coord]) == direction
struct Section {
    std::size_t coord = 0;
    double value = 0.0;
    int direction = 1;
};

enum class CycleStability { stable, unstable };

inline const char* to_string(CycleStability s) { return s == CycleStability::stable ? "stable" : "unstable"; }

struct PeriodicOrbit {
    double period = 0;
    std::vector<double> times;       // from 0 to period
    std::vector<State> cycle_states;  // closed: front() == back()
    double l2_norm = 0;
    CycleStability stability = CycleStability::stable;
    double amplitude = 0;   // max - min of x
    double multiplier = 0;  // return-map slope (largest in modulus for 3D estimate)
    double closure_gap = 0;
    State section_point;
};

struct CycleOptions {
    std::optional<Section> section;
    bool reverse_time = false;     // search for cycles that repel in forward time
    double return_budget = 200.0;  // max time to wait for one section return
    int max_iterations = 400;
    double fixed_point_tol = 1e-10;
    double rest_tol = 1e-6;  // fixed point this close to an equilibrium counts as rest
    int samples = 4000;
};

namespace detail {

inline double dist(const State& a, const State& b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

struct ReturnResult {
    bool ok = false;
    State point;
    double time = 0;
    State end;
    bool escaped = false;
};

inline ReturnResult first_return(const VectorField& v, const State& x, const Section& sec, const IntegrationConfig& cfg,
                                 double budget)
{
    EventSpec ev = hyperplane_event(sec.coord, sec.value, sec.direction, EventKind::poincare_return, 1);
    ReturnResult r;
    OrbitTrace tr;
    try {
        tr = integrate(v, x, 0.0, budget, cfg, {ev});
    } catch (const NumericFailure&) {
        // finite-time blow-up (typically in reversed time) counts as escape
        r.end = x;
        r.escaped = true;
        return r;
    }
    r.end = tr.back();
    r.escaped = tr.escaped;
    if (tr.terminated_by_event) {
        r.ok = true;
        r.point = tr.events.back().location;
        r.point[sec.coord] = sec.value;
        r.time = tr.events.back().t;
    }
    return r;
}

inline bool near_rest(const VectorField& v, const State& x, const std::vector<Equilibrium>& eqs, double tol)
{
    for (const auto& e : eqs)
        if (dist(x, e.state) <= tol * (1.0 + norm_inf(e.state)))
            return true;
    State dx = v(x);
    return norm_inf(dx) <= 1e-9;
}

inline double trapezoid_l2(const std::vector<double>& t, const std::vector<State>& u)
{
    double acc = 0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        double a = 0, b = 0;
        for (double c : u[i - 1])
            a += c * c;
        for (double c : u[i])
            b += c * c;
        acc += 0.5 * (a + b) * (t[i] - t[i - 1]);
    }
    double T = t.back() - t.front();
    return T > 0 ? std::sqrt(acc / T) : 0.0;
}

}  // namespace detail

// the line through the (first non-saddle) equilibrium for planar systems, the
// plane y = y_eq for three-dimensional ones
inline Section default_section(const SlowFastSystem& sys)
{
    auto eqs = equilibria(sys);
    if (eqs.empty())
        throw DomainError(sys.tag() + ": no equilibrium to anchor a Poincare section");
    const Equilibrium* pick = &eqs.front();
    for (const auto& e : eqs)
        if (e.stability != Stability::saddle) {
            pick = &e;
            break;
        }
    if (sys.dimension() == 2)
        return {0, pick->state[0], 1};
    return {1, pick->state[1], 1};
}

// Shooting on the Poincare return map. Returns none when the orbit settles
// on an equilibrium (or escapes in reversed time).
inline std::optional<PeriodicOrbit> find_periodic_orbit(const SlowFastSystem& sys, const State& seed,
                                                        const IntegrationConfig& cfg = {}, const CycleOptions& opt = {})
{
    sys.check_dim(seed);
    Section sec = opt.section ? *opt.section : default_section(sys);
    VectorField v = opt.reverse_time ? reversed(field_of(sys)) : field_of(sys);
    auto eqs = equilibria(sys);
    const std::size_t n = sys.dimension();

    detail::ReturnResult r = detail::first_return(v, seed, sec, cfg, opt.return_budget);
    auto settle = [&](const detail::ReturnResult& rr) -> bool {
        if (rr.escaped)
            return true;
        if (detail::near_rest(v, rr.end, eqs, opt.rest_tol))
            return true;
        throw NoReturn(sys.tag() + ": no Poincare return within time budget " + std::to_string(opt.return_budget));
    };
    if (!r.ok) {
        settle(r);
        return std::nullopt;
    }

    auto on_section_ok = [&](const State& p) {
        State dx = v(p);
        return dx[sec.coord] * sec.direction > 0;
    };
    std::vector<std::size_t> free;  // return-map coordinates
    for (std::size_t i = 0; i < n; ++i)
        if (i != sec.coord)
            free.push_back(i);
    const auto m = static_cast<Eigen::Index>(free.size());
    auto reduce = [&](const State& x) {
        Eigen::VectorXd r(m);
        for (Eigen::Index i = 0; i < m; ++i)
            r[i] = x[free[static_cast<std::size_t>(i)]];
        return r;
    };
    auto lift = [&](const Eigen::VectorXd& r) {
        State x(n, sec.value);
        for (Eigen::Index i = 0; i < m; ++i)
            x[free[static_cast<std::size_t>(i)]] = r[i];
        return x;
    };
    auto P = [&](const State& x) -> std::optional<State> {
        auto rr = detail::first_return(v, x, sec, cfg, opt.return_budget);
        if (!rr.ok)
            return std::nullopt;
        return rr.point;
    };
    // forward-difference Jacobian of the reduced return map
    auto DP = [&](const State& x, const State& px) -> std::optional<Eigen::MatrixXd> {
        Eigen::MatrixXd J(m, m);
        Eigen::VectorXd base = reduce(px);
        for (Eigen::Index j = 0; j < m; ++j) {
            State xj = x;
            std::size_t c = free[static_cast<std::size_t>(j)];
            double d = 1e-7 * (1.0 + std::fabs(x[c]));
            xj[c] += d;
            auto pj = on_section_ok(xj) ? P(xj) : std::nullopt;
            if (!pj) {
                xj[c] = x[c] - d;
                pj = on_section_ok(xj) ? P(xj) : std::nullopt;
                if (!pj)
                    return std::nullopt;
                d = -d;
            }
            J.col(j) = (reduce(*pj) - base) / d;
        }
        return J;
    };

    // an equilibrium on the section is a fixed point of the map as well;
    // Newton may land on it even when it repels
    auto attracting_rest = [&](const State& x) -> std::optional<bool> {
        for (const auto& e : eqs)
            if (detail::dist(x, e.state) <= opt.rest_tol * (1.0 + detail::norm_inf(e.state))) {
                bool attracting = opt.reverse_time ? e.stability == Stability::unstable : e.stability == Stability::stable;
                return attracting;
            }
        return std::nullopt;
    };

    State p = r.point;
    const State start = p;
    State fixed;
    bool converged = false;
    bool allow_newton = true;
    double g_prev = std::numeric_limits<double>::infinity();
    int plain_steps = 0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        auto pn = P(p);
        if (!pn) {
            detail::ReturnResult rr = detail::first_return(v, p, sec, cfg, opt.return_budget);
            settle(rr);
            return std::nullopt;
        }
        Eigen::VectorXd G = reduce(*pn) - reduce(p);
        double g = G.norm();
        if (g <= opt.fixed_point_tol * (1.0 + detail::norm_inf(p))) {
            auto rest = attracting_rest(*pn);
            if (rest && !*rest && allow_newton) {
                allow_newton = false;
                p = start;
                g_prev = std::numeric_limits<double>::infinity();
                continue;
            }
            fixed = *pn;
            converged = true;
            break;
        }
        State next = *pn;
        ++plain_steps;
        // Newton on P(s) - s once the iteration contracts; before that it
        // would extrapolate back onto the equilibrium being left
        if (allow_newton && plain_steps >= 3 && g < g_prev) {
            if (auto J = DP(p, *pn)) {
                Eigen::MatrixXd A = *J - Eigen::MatrixXd::Identity(m, m);
                Eigen::VectorXd step = A.fullPivLu().solve(-G);
                State cand = lift(reduce(p) + step);
                if (step.allFinite() && step.norm() < 1e4 * g && on_section_ok(cand)) {
                    auto pc = P(cand);
                    if (pc && (reduce(*pc) - reduce(cand)).norm() < g) {
                        next = cand;
                        plain_steps = 0;
                    }
                }
            }
        }
        g_prev = g;
        p = next;
    }
    if (!converged)
        throw NoReturn(sys.tag() + ": return map did not converge in " + std::to_string(opt.max_iterations) +
                       " iterations");

    double multiplier = std::numeric_limits<double>::quiet_NaN();
    if (auto pf = P(fixed)) {
        if (auto J = DP(fixed, *pf)) {
            Eigen::VectorXcd ev = J->eigenvalues();
            multiplier = 0;
            for (Eigen::Index i = 0; i < ev.size(); ++i)
                if (std::abs(ev[i]) > std::fabs(multiplier))
                    multiplier = ev[i].real() < 0 ? -std::abs(ev[i]) : std::abs(ev[i]);
        }
    }

    for (const auto& e : eqs)
        if (detail::dist(fixed, e.state) <= opt.rest_tol * (1.0 + detail::norm_inf(e.state)))
            return std::nullopt;

    // one period, sampled uniformly
    auto r1 = detail::first_return(v, fixed, sec, cfg, opt.return_budget);
    if (!r1.ok)
        throw NoReturn(sys.tag() + ": fixed point lost its return");
    double T = r1.time;
    IntegrationConfig sc = cfg;
    sc.sample_dt = T / opt.samples;
    EventSpec ev = hyperplane_event(sec.coord, sec.value, sec.direction, EventKind::poincare_return, 1);
    OrbitTrace tr = integrate(v, fixed, 0.0, 2 * T, sc, {ev});

    PeriodicOrbit orb;
    orb.period = tr.times.back();
    orb.times = tr.times;
    orb.cycle_states = tr.states;
    orb.closure_gap = detail::dist(orb.cycle_states.front(), orb.cycle_states.back());
    orb.cycle_states.back() = orb.cycle_states.front();
    if (opt.reverse_time) {
        std::reverse(orb.cycle_states.begin(), orb.cycle_states.end());
        std::vector<double> t(orb.times.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = orb.period - orb.times[orb.times.size() - 1 - i];
        orb.times = t;
    }
    orb.section_point = fixed;
    orb.multiplier = multiplier;
    bool contracting = std::fabs(multiplier) < 1.0;
    orb.stability = (contracting != opt.reverse_time) ? CycleStability::stable : CycleStability::unstable;
    orb.l2_norm = detail::trapezoid_l2(orb.times, orb.cycle_states);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : orb.cycle_states) {
        lo = std::min(lo, s[0]);
        hi = std::max(hi, s[0]);
    }
    orb.amplitude = hi - lo;
    return orb;
}

// Attracting cycle from an outer seed and repelling cycle by reversed-time
// shooting from a point near the equilibrium.
inline std::vector<PeriodicOrbit> find_limit_cycles(const SlowFastSystem& sys, const State& outer_seed,
                                                    const IntegrationConfig& cfg = {}, CycleOptions opt = {},
                                                    double inner_offset = 1e-3)
{
    std::vector<PeriodicOrbit> out;
    opt.reverse_time = false;
    if (auto c = find_periodic_orbit(sys, outer_seed, cfg, opt))
        out.push_back(*c);
    auto eqs = equilibria(sys);
    if (!eqs.empty()) {
        State inner = eqs.front().state;
        inner[1] += inner_offset;
        opt.reverse_time = true;
        IntegrationConfig rc = cfg;
        rc.escape_radius = std::min(rc.escape_radius, 1e3);
        try {
            if (auto c = find_periodic_orbit(sys, inner, rc, opt))
                out.push_back(*c);
        } catch (const NoReturn&) {
        }
    }
    return out;
}

// local maxima of x above threshold over one period
inline int count_spikes(const PeriodicOrbit& orbit, double threshold)
{
    const auto& u = orbit.cycle_states;
    if (u.size() < 3)
        return 0;
    std::size_t n = u.size() - 1;  // last repeats first
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double prev = u[(i + n - 1) % n][0], cur = u[i][0], next = u[(i + 1) % n][0];
        if (cur > prev && cur >= next && cur > threshold)
            ++count;
    }
    return count;
}

inline double default_spike_threshold(const SlowFastSystem& sys) { return sys.model().spike_threshold(sys.values()); }

struct BranchPoint {
    double param = 0;
    std::optional<PeriodicOrbit> cycle;
    std::vector<Equilibrium> equilibria;
    double norm = 0;
    double amplitude = 0;
    double period = 0;
    std::string stability;  // stable / unstable cycle, or "equilibrium", or "error"
    int spike_count = -1;
    std::string error;
};

struct Explosion {
    double lo = 0, hi = 0;  // bracketing sample values
    double center = 0;
    double width = 0;  // numerical 10%-90% width, or the sample spacing if not refined
    double jump = 0;   // amplitude jump across the bracket
    bool refined = false;
};

struct BranchSweep {
    std::string param;
    std::vector<BranchPoint> points;
    IntegrationConfig cfg;
    std::optional<Explosion> explosion;
};

struct SweepOptions {
    CycleOptions cycle;
    std::optional<State> seed;
    double spike_threshold = std::numeric_limits<double>::quiet_NaN();
    unsigned threads = 1;
};

inline State default_seed(const SlowFastSystem& sys)
{
    if (sys.tag() == "hindmarsh_rose")
        return {-1.5, 1.0, -5.0};
    if (sys.tag() == "hr_reduced")
        return {-1.5, 1.0};
    if (sys.dimension() == 3)
        return {0.0, 0.0, 0.0};
    return {2.0, 0.0};
}

inline BranchPoint sweep_point(const SlowFastSystem& base, const std::string& param, double value,
                               const IntegrationConfig& cfg, const SweepOptions& opt)
{
    BranchPoint bp;
    bp.param = value;
    try {
        SlowFastSystem s = base.with(param, value);
        bp.equilibria = equilibria(s);
        State seed = opt.seed ? *opt.seed : default_seed(s);
        bp.cycle = find_periodic_orbit(s, seed, cfg, opt.cycle);
        if (bp.cycle) {
            bp.norm = bp.cycle->l2_norm;
            bp.amplitude = bp.cycle->amplitude;
            bp.period = bp.cycle->period;
            bp.stability = to_string(bp.cycle->stability);
            double thr = std::isnan(opt.spike_threshold) ? std::numeric_limits<double>::quiet_NaN() : opt.spike_threshold;
            if (std::isnan(thr)) {
                try {
                    thr = default_spike_threshold(s);
                } catch (const DomainError&) {
                }
            }
            if (!std::isnan(thr))
                bp.spike_count = count_spikes(*bp.cycle, thr);
        } else {
            bp.stability = "equilibrium";
            bp.spike_count = 0;
            if (!bp.equilibria.empty()) {
                double a = 0;
                for (double c : bp.equilibria.front().state)
                    a += c * c;
                bp.norm = std::sqrt(a);
            }
        }
    } catch (const Error& e) {
        bp.stability = "error";
        bp.error = e.what();
    }
    return bp;
}

inline std::optional<Explosion> detect_explosion(const std::vector<BranchPoint>& pts)
{
    std::optional<Explosion> best;
    double best_rate = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (!pts[i].error.empty() || !pts[i - 1].error.empty())
            continue;
        // rest on both sides is not an explosion, however steep the equilibrium branch
        if (!pts[i].cycle && !pts[i - 1].cycle)
            continue;
        double dp = pts[i].param - pts[i - 1].param;
        if (dp == 0)
            continue;
        double rate = std::fabs((pts[i].norm - pts[i - 1].norm) / dp);
        if (rate > best_rate) {
            best_rate = rate;
            Explosion e;
            e.lo = std::min(pts[i - 1].param, pts[i].param);
            e.hi = std::max(pts[i - 1].param, pts[i].param);
            e.center = 0.5 * (e.lo + e.hi);
            e.width = e.hi - e.lo;
            e.jump = std::fabs(pts[i].amplitude - pts[i - 1].amplitude);
            best = e;
        }
    }
    return best;
}

inline BranchSweep branch_sweep(const SlowFastSystem& sys, const std::string& param, double lo, double hi, int n,
                                const IntegrationConfig& cfg = {}, const SweepOptions& opt = {})
{
    if (n < 2)
        throw ConfigError("branch_sweep: n must be at least 2");
    if (!(hi > lo))
        throw ConfigError("branch_sweep: empty parameter range");
    if (!sys.has_param(param))
        throw ConfigError(sys.tag() + ": unknown parameter '" + param + "'");
    cfg.validate();
    BranchSweep out;
    out.param = param;
    out.cfg = cfg;
    out.points.resize(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < n; i = next++) {
            double v = lo + (hi - lo) * i / (n - 1);
            out.points[static_cast<std::size_t>(i)] = sweep_point(sys, param, v, cfg, opt);
        }
    };
    unsigned nt = std::max(1u, opt.threads);
    if (nt == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < nt; ++k)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    out.explosion = detect_explosion(out.points);
    return out;
}

// Bisection inside an explosion bracket on the amplitude levels 10%, 50%, 90%
// of the jump. The result is a numerical width at the given tolerances.
inline Explosion refine_explosion(const SlowFastSystem& sys, const std::string& param, const Explosion& ex,
                                  const IntegrationConfig& cfg = {}, const SweepOptions& opt = {}, double tol = 1e-9)
{
    auto amp = [&](double v) {
        BranchPoint bp = sweep_point(sys, param, v, cfg, opt);
        if (!bp.error.empty())
            throw NumericFailure("refine_explosion: " + bp.error);
        return bp.amplitude;
    };
    double a_lo = amp(ex.lo), a_hi = amp(ex.hi);
    auto level_crossing = [&](double frac) {
        double target = a_lo + frac * (a_hi - a_lo);
        double l = ex.lo, h = ex.hi;
        while (h - l > tol) {
            double m = 0.5 * (l + h);
            if ((amp(m) - target > 0) == (a_lo - target > 0))
                l = m;
            else
                h = m;
        }
        return 0.5 * (l + h);
    };
    Explosion r = ex;
    double x10 = level_crossing(0.1), x50 = level_crossing(0.5), x90 = level_crossing(0.9);
    r.center = x50;
    r.width = std::fabs(x90 - x10);
    r.jump = std::fabs(a_hi - a_lo);
    r.refined = true;
    return r;
}

}  // namespace canard
