#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "integrator.hpp"
#include "microscope.hpp"
#include "roots.hpp"
#include "system.hpp"

namespace canard {

inline double dot(const State& a, const State& b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

// Filippov convex sliding vector and lambda_S
inline std::pair<State, double> filippov_vector(const State& Fp, const State& Fm, const State& grad_h)
{
    double a = dot(Fp, grad_h), b = dot(Fm, grad_h);
    double den = b - a;
    if (den == 0.0 || !std::isfinite(den))
        throw DomainError("filippov_vector: (F- - F+).grad h vanishes");
    State out(Fp.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (b * Fp[i] - a * Fm[i]) / den;
    // remove the roundoff normal component
    double gg = dot(grad_h, grad_h);
    double r = dot(out, grad_h) / gg;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] -= r * grad_h[i];
    return {out, (a + b) / den};
}

// Strip |h| < sigma with fibres p_xi(lambda), lambda in [-1, 1].
struct PinchZone {
    std::function<double(const State&)> h;
    std::function<State(const State&)> grad_h;
    double sigma = 0.0;
    std::size_t fibre_coord = 1;  // straight fibres along this coordinate
    std::function<State(const State&, double)> custom_fibre;

    State grad(const State& x) const
    {
        if (grad_h)
            return grad_h(x);
        State g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            double d = 1e-7 * (1.0 + std::fabs(x[i]));
            State a = x, b = x;
            a[i] += d;
            b[i] -= d;
            g[i] = (h(a) - h(b)) / (2 * d);
        }
        return g;
    }

    // point on the fibre through xi with h = lambda sigma
    State fibre(const State& xi, double lambda) const
    {
        if (custom_fibre)
            return custom_fibre(xi, lambda);
        State x = xi;
        double target = lambda * sigma;
        for (int it = 0; it < 60; ++it) {
            double r = h(x) - target;
            if (std::fabs(r) <= 1e-15 * std::max(1.0, sigma))
                return x;
            double d = grad(x)[fibre_coord];
            if (d == 0.0)
                throw DomainError("fibre: h does not vary along the fibre direction");
            x[fibre_coord] -= r / d;
        }
        if (std::fabs(h(x) - target) > 1e-10 * std::max(1.0, sigma))
            throw NumericFailure("fibre: Newton did not reach the level set");
        return x;
    }
};

enum class SlidingMode { exact, filippov };
enum class UnstablePolicy { stay_sliding, depart_up, depart_down };
enum class RegionKind { stable_sliding, unstable_sliding, crossing };
enum class PinchMode { upper, lower, sliding_stable, sliding_unstable, crossing };

inline const char* to_string(RegionKind k)
{
    switch (k) {
    case RegionKind::stable_sliding: return "stable_sliding";
    case RegionKind::unstable_sliding: return "unstable_sliding";
    default: return "crossing";
    }
}

inline const char* to_string(PinchMode m)
{
    switch (m) {
    case PinchMode::upper: return "upper";
    case PinchMode::lower: return "lower";
    case PinchMode::sliding_stable: return "sliding_stable";
    case PinchMode::sliding_unstable: return "sliding_unstable";
    default: return "crossing";
    }
}

inline UnstablePolicy policy_from_string(const std::string& s)
{
    if (s == "stay_sliding")
        return UnstablePolicy::stay_sliding;
    if (s == "depart_up")
        return UnstablePolicy::depart_up;
    if (s == "depart_down")
        return UnstablePolicy::depart_down;
    throw ConfigError("unknown unstable-sliding policy '" + s + "'");
}

struct Tangency {
    State location;  // on Sigma_+ (side +1) or Sigma_- (side -1)
    double s = 0;    // scan coordinate
    int side = 1;
    double hddot = 0;
    bool degenerate = false;
    bool away = false;  // field curves away from Sigma (visible)
};

struct SlidingInterval {
    double lo, hi;
    RegionKind kind;
};

struct PinchedSystem {
    VectorField field;
    PinchZone zone;
    // sign-equivalent replacement for F.grad h that stays regular inside the zone
    std::function<double(const State&)> hdot_regular;
    // field used at interior fibre points for the exact sliding vector
    std::function<State(const State&)> interior_field;
    SlidingMode sliding = SlidingMode::exact;
    UnstablePolicy policy = UnstablePolicy::stay_sliding;
    // scans along Sigma: coordinate, window, base point for the rest
    std::size_t scan_coord = 0;
    double window_lo = -2.0, window_hi = 2.0;
    State base;
    int scan_cells = 4000;
    int fibre_samples = 64;
    int max_switches = 100000;
    // sliding time on an unstable region before a depart_* policy leaves it
    double depart_delay = 0.0;
    // orbits stop (escaped) when the scan coordinate leaves this interval
    double domain_lo = -std::numeric_limits<double>::infinity();
    double domain_hi = std::numeric_limits<double>::infinity();

    std::size_t dim() const { return field.dim; }

    double hdot(const State& x) const
    {
        if (hdot_regular)
            return hdot_regular(x);
        return dot(field(x), zone.grad(x));
    }
    double hdot_side(const State& xi, int side) const { return hdot(zone.fibre(xi, side)); }

    State point_on_sigma(double s) const
    {
        State xi = base.empty() ? State(dim(), 0.0) : base;
        xi[scan_coord] = s;
        return zone.fibre(xi, 0.0);
    }

    RegionKind region(const State& xi) const
    {
        double a = hdot_side(xi, 1), b = hdot_side(xi, -1);
        if (a < 0 && b > 0)
            return RegionKind::stable_sliding;
        if (a > 0 && b < 0)
            return RegionKind::unstable_sliding;
        return RegionKind::crossing;
    }

    State upper_field(const State& xi) const { return field(zone.fibre(xi, 1)); }
    State lower_field(const State& xi) const { return field(zone.fibre(xi, -1)); }

    std::pair<State, double> filippov(const State& xi) const
    {
        return filippov_vector(upper_field(xi), lower_field(xi), zone.grad(zone.fibre(xi, 0.0)));
    }

    // root lambda* of hdot along the fibre, if any
    std::optional<double> sliding_lambda(const State& xi) const
    {
        auto f = [&](double l) { return hdot(zone.fibre(xi, l)); };
        std::vector<double> roots = scan_roots(f, -1.0, 1.0, fibre_samples, 1e-15);
        roots.erase(std::remove_if(roots.begin(), roots.end(), [](double l) { return std::fabs(l) >= 1.0; }),
                    roots.end());
        if (roots.empty())
            return std::nullopt;
        if (roots.size() > 1)
            throw TransversalityViolation("sliding_vector_exact: " + std::to_string(roots.size()) +
                                              " tangent vectors on one fibre",
                                          xi[scan_coord]);
        return roots.front();
    }

    State tangent_part(const State& x, State F) const
    {
        State g = zone.grad(x);
        double r = dot(F, g) / dot(g, g);
        for (std::size_t i = 0; i < F.size(); ++i)
            F[i] -= r * g[i];
        return F;
    }

    // F at the tangent point of the fibre (exact sliding vector)
    std::optional<State> sliding_vector_exact(const State& xi) const
    {
        auto l = sliding_lambda(xi);
        if (!l)
            return std::nullopt;
        State p = zone.fibre(xi, *l);
        State F = interior_field ? interior_field(p) : field(p);
        return tangent_part(p, F);
    }

    // sliding field continued past the region ends by the endpoint field
    State sliding_field(const State& xi) const
    {
        if (sliding == SlidingMode::filippov) {
            State Fp = upper_field(xi), Fm = lower_field(xi);
            State g = zone.grad(zone.fibre(xi, 0.0));
            double a = dot(Fp, g), b = dot(Fm, g);
            if (b - a != 0.0 && (a <= 0) != (b <= 0))
                return filippov_vector(Fp, Fm, g).first;
            return tangent_part(zone.fibre(xi, 0.0), std::fabs(a) < std::fabs(b) ? Fp : Fm);
        }
        if (auto v = sliding_vector_exact(xi))
            return *v;
        double a = hdot_side(xi, 1), b = hdot_side(xi, -1);
        State p = zone.fibre(xi, std::fabs(a) < std::fabs(b) ? 1.0 : -1.0);
        return tangent_part(p, field(p));
    }

    // d/dt of hdot along the side field at a point of Sigma_+-
    double hddot(const State& p) const
    {
        State F = field(p);
        double n = 0;
        for (double v : F)
            n = std::max(n, std::fabs(v));
        double d = 1e-6 / std::max(n, 1e-12);
        State a = p, b = p;
        for (std::size_t i = 0; i < p.size(); ++i) {
            a[i] += d * F[i];
            b[i] -= d * F[i];
        }
        return (hdot(a) - hdot(b)) / (2 * d);
    }

    std::vector<Tangency> tangency_points(double degenerate_tol = 1e-10) const
    {
        std::vector<Tangency> out;
        for (int side : {1, -1}) {
            auto f = [&](double s) { return hdot_side(point_on_sigma(s), side); };
            for (double s : scan_roots(f, window_lo, window_hi, scan_cells, 1e-15)) {
                Tangency t;
                t.s = s;
                t.side = side;
                t.location = zone.fibre(point_on_sigma(s), side);
                t.hddot = hddot(t.location);
                t.degenerate = std::fabs(t.hddot) <= degenerate_tol;
                t.away = !t.degenerate && (side > 0 ? t.hddot > 0 : t.hddot < 0);
                out.push_back(t);
            }
        }
        std::sort(out.begin(), out.end(), [](const Tangency& a, const Tangency& b) { return a.s < b.s; });
        return out;
    }

    std::vector<SlidingInterval> sliding_regions() const
    {
        std::vector<double> cuts{window_lo};
        for (const auto& t : tangency_points())
            cuts.push_back(t.s);
        cuts.push_back(window_hi);
        std::vector<SlidingInterval> out;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] <= cuts[i])
                continue;
            RegionKind k = region(point_on_sigma(0.5 * (cuts[i] + cuts[i + 1])));
            if (!out.empty() && out.back().kind == k)
                out.back().hi = cuts[i + 1];
            else
                out.push_back({cuts[i], cuts[i + 1], k});
        }
        return out;
    }

    // pinched coordinates: the fibre coordinate shifted so that Sigma_+- meet
    State to_pinched(const State& x) const
    {
        double hv = zone.h(x);
        State c = zone.fibre(x, 0.0);
        if (std::fabs(hv) <= zone.sigma)
            return c;
        int side = hv > 0 ? 1 : -1;
        State e = zone.fibre(x, side);
        State out = x;
        out[zone.fibre_coord] -= e[zone.fibre_coord] - c[zone.fibre_coord];
        return out;
    }
};

// Transversality check on a grid of fibres over the scan window: each fibre
// may carry at most one sign change of hdot.
inline void check_transversality(const PinchedSystem& ps, int fibres = 200)
{
    double worst_s = 0;
    int worst = 0;
    for (int i = 0; i <= fibres; ++i) {
        double s = ps.window_lo + (ps.window_hi - ps.window_lo) * i / fibres;
        State xi = ps.point_on_sigma(s);
        State g = ps.zone.grad(xi);
        double gn = 0;
        for (double v : g)
            gn = std::max(gn, std::fabs(v));
        if (gn == 0.0)
            throw TransversalityViolation("pinch: grad h vanishes at s=" + std::to_string(s), s);
        int changes = 0;
        double prev = ps.hdot(ps.zone.fibre(xi, -1.0));
        for (int k = 1; k <= ps.fibre_samples; ++k) {
            double v = ps.hdot(ps.zone.fibre(xi, -1.0 + 2.0 * k / ps.fibre_samples));
            if ((prev < 0 && v > 0) || (prev > 0 && v < 0))
                ++changes;
            if (v != 0.0)
                prev = v;
        }
        if (changes > worst) {
            worst = changes;
            worst_s = s;
        }
    }
    if (worst > 1)
        throw TransversalityViolation("pinch: fibre at s=" + std::to_string(worst_s) + " meets hdot=0 " +
                                          std::to_string(worst) + " times",
                                      worst_s);
}

// Generic pinch of a smooth field with straight fibres along fibre_coord.
inline PinchedSystem pinch(const VectorField& F, std::function<double(const State&)> h,
                           std::function<State(const State&)> grad_h, double sigma, std::size_t fibre_coord,
                           double window_lo, double window_hi, std::size_t scan_coord = 0, State base = {})
{
    if (!(sigma > 0))
        throw DomainError("pinch: sigma must be positive");
    PinchedSystem ps;
    ps.field = F;
    ps.zone.h = std::move(h);
    ps.zone.grad_h = std::move(grad_h);
    ps.zone.sigma = sigma;
    ps.zone.fibre_coord = fibre_coord;
    ps.scan_coord = scan_coord;
    ps.window_lo = window_lo;
    ps.window_hi = window_hi;
    ps.base = base.empty() ? State(F.dim, 0.0) : base;
    check_transversality(ps);
    return ps;
}

inline PinchedSystem pinch(const SlowFastSystem& sys, double sigma, std::size_t fibre_coord, double window_lo,
                           double window_hi, std::size_t scan_coord = 0, State base = {})
{
    return pinch(field_of(sys), [sys](const State& x) { return sys.h(x); },
                 [sys](const State& x) { return sys.grad_h(x); }, sigma, fibre_coord, window_lo, window_hi, scan_coord,
                 std::move(base));
}

inline double default_sigma(const Chart& c)
{
    if (c.kind == ChartKind::v_scope)
        return std::pow(c.eps, c.eps);
    if (c.kind == ChartKind::w_scope)
        return std::pow(c.eps, 2 * c.eps);
    throw DomainError("default_sigma: defined for V and W charts");
}

// Pinch a planar system in a microscope chart along vertical fibres.
inline PinchedSystem pinch_chart(const SlowFastSystem& sys, const Chart& chart, double sigma, double window_lo,
                                 double window_hi)
{
    if (chart.kind != ChartKind::v_scope && chart.kind != ChartKind::w_scope && chart.kind != ChartKind::flat_h)
        throw DomainError("pinch_chart: needs an h-type chart");
    VectorField F;
    F.dim = 2;
    F.f = [sys, chart](const double* c, double* dc) {
        State r = chart.rhs(sys, {c[0], c[1]});
        dc[0] = r[0];
        dc[1] = r[1];
    };
    PinchedSystem ps;
    ps.field = F;
    ps.zone.h = [](const State& c) { return c[1]; };
    ps.zone.grad_h = [](const State&) { return State{0.0, 1.0}; };
    ps.zone.sigma = sigma;
    ps.zone.fibre_coord = 1;
    ps.hdot_regular = [sys, chart](const State& c) { return chart.drive(sys, c[0], c[1]); };
    ps.interior_field = [sys, chart](const State& c) {
        double hv = chart.h_of(c[0], c[1]);
        State f = flat_rhs(sys, {c[0], hv});
        return State{f[0], chart.drive_h(sys, c[0], hv)};
    };
    ps.scan_coord = 0;
    ps.window_lo = window_lo;
    ps.window_hi = window_hi;
    ps.base = {0.0, 0.0};
    check_transversality(ps);
    return ps;
}

struct PinchedTrace {
    OrbitTrace trace;             // pinched coordinates
    std::vector<PinchMode> modes;  // per sample
    std::vector<State> raw;       // unpinched chart coordinates
    int switches = 0;
};

namespace detail {

inline void append(PinchedTrace& out, double t, const State& pinched, const State& raw, PinchMode m)
{
    auto& tr = out.trace;
    if (!tr.times.empty() && t < tr.times.back())
        return;
    if (!tr.times.empty() && t == tr.times.back()) {
        tr.states.back() = pinched;
        out.raw.back() = raw;
        out.modes.back() = m;
        return;
    }
    tr.times.push_back(t);
    tr.states.push_back(pinched);
    out.raw.push_back(raw);
    out.modes.push_back(m);
}

}  // namespace detail

// Hybrid orbit of the pinched system: smooth flow off the zone, sliding flow
// on Sigma, crossings as jumps between Sigma_+ and Sigma_-.
inline PinchedTrace integrate_pinched(const PinchedSystem& ps, const State& x0, double t0, double t1,
                                      const IntegrationConfig& cfg = {}, const std::vector<EventSpec>& user_events = {})
{
    cfg.validate();
    if (x0.size() != ps.dim())
        throw DomainError("integrate_pinched: initial state has wrong dimension");
    if (t1 < t0)
        throw DomainError("integrate_pinched: t1 < t0");
    const double sigma = ps.zone.sigma;
    const std::size_t k = ps.zone.fibre_coord;
    const std::size_t sc = ps.scan_coord;
    const double inf = std::numeric_limits<double>::infinity();
    PinchedTrace out;

    PinchMode mode = PinchMode::upper;
    State x = x0;
    double t = t0;
    double depart_at = inf;
    int depart_side = ps.policy == UnstablePolicy::depart_down ? -1 : 1;
    auto tiny = [](double v) { return std::fabs(v) <= 1e-13; };
    auto event = [&](EventKind kind, const State& at) { out.trace.events.push_back({t, kind, at, 0}); };

    auto leave = [&](int side) {
        x = ps.zone.fibre(x, side);
        mode = side > 0 ? PinchMode::upper : PinchMode::lower;
        depart_at = inf;
    };

    // new branch point on an unstable region: apply the policy
    auto branch = [&](bool at_canard) {
        event(EventKind::branch_point, x);
        mode = PinchMode::sliding_unstable;
        if (ps.policy == UnstablePolicy::stay_sliding)
            return;
        bool visible = ps.hddot(ps.zone.fibre(x, depart_side)) * depart_side > 0;
        if (ps.depart_delay <= 0 && (!at_canard || visible)) {
            event(EventKind::sliding_exit, x);
            leave(depart_side);
        } else if (ps.depart_delay > 0) {
            depart_at = t + ps.depart_delay;
        }
    };

    // orbit meets Sigma_+- (or starts inside the zone)
    auto enter_sigma = [&](bool from_start) {
        State xi = ps.zone.fibre(x, 0.0);
        double a = ps.hdot_side(xi, 1), b = ps.hdot_side(xi, -1);
        if (a < 0 && b > 0) {
            x = xi;
            event(EventKind::sliding_entry, x);
            mode = PinchMode::sliding_stable;
            return;
        }
        if (a > 0 && b < 0) {
            if (!from_start) {
                // only reachable through a tangency: the arriving side repels again
                x = ps.zone.fibre(xi, mode == PinchMode::upper ? 1 : -1);
                return;
            }
            x = xi;
            event(EventKind::sliding_entry, x);
            branch(false);
            return;
        }
        if (from_start && !(tiny(a) || tiny(b)))
            throw DomainError("integrate_pinched: initial point lies in the pinch zone over a crossing region");
        int side = a > 0 ? 1 : -1;
        x = xi;
        event(EventKind::crossing, x);
        detail::append(out, t, x, x, PinchMode::crossing);
        leave(side);
    };

    double h0 = ps.zone.h(x0);
    if (h0 > sigma)
        mode = PinchMode::upper;
    else if (h0 < -sigma)
        mode = PinchMode::lower;
    else
        enter_sigma(true);
    detail::append(out, t, ps.to_pinched(x), x, mode);

    auto wrap_user = [&](bool sliding_phase) {
        std::vector<EventSpec> ev;
        for (const auto& u : user_events) {
            EventSpec e = u;
            e.terminal_after = 0;
            e.g = [&ps, g = u.g, sliding_phase](const State& s) {
                return g(sliding_phase ? ps.zone.fibre(s, 0.0) : ps.to_pinched(s));
            };
            ev.push_back(e);
        }
        bool bounded = std::isfinite(ps.domain_lo) || std::isfinite(ps.domain_hi);
        if (bounded)
            ev.push_back({EventKind::user,
                          [&ps, sc](const State& s) { return std::min(s[sc] - ps.domain_lo, ps.domain_hi - s[sc]); }, -1,
                          1});
        return ev;
    };
    const std::size_t nu = user_events.size();
    const bool bounded = std::isfinite(ps.domain_lo) || std::isfinite(ps.domain_hi);
    const std::size_t n_fixed = nu + (bounded ? 1 : 0);

    auto copy_user_events = [&](const OrbitTrace& seg, bool sliding_phase) {
        for (const auto& e : seg.events)
            if (e.spec < nu)
                out.trace.events.push_back(
                    {e.t, e.kind, sliding_phase ? ps.zone.fibre(e.location, 0.0) : ps.to_pinched(e.location), e.spec});
    };
    auto hit_domain = [&](const OrbitTrace& seg) {
        return bounded && seg.terminated_by_event && !seg.events.empty() && seg.events.back().spec == nu;
    };

    while (t < t1) {
        if (++out.switches > ps.max_switches)
            throw ChatteringError("integrate_pinched: more than " + std::to_string(ps.max_switches) +
                                  " mode switches (chattering)");
        if (mode == PinchMode::upper || mode == PinchMode::lower) {
            int side = mode == PinchMode::upper ? 1 : -1;
            double hv = ps.zone.h(x);
            if (std::fabs(hv - side * sigma) <= 1e-12 * std::max(1.0, sigma)) {
                // leaving from the boundary: if the field points back in, re-enter at once
                double hd = ps.hdot(x) * side;
                if (hd < 0) {
                    enter_sigma(false);
                    continue;
                }
            }
            std::vector<EventSpec> ev = wrap_user(false);
            // margin keeps the start strictly outside, so a graze back into the zone is seen
            double margin = 1e-12 * std::max(1.0, sigma);
            ev.push_back({EventKind::h_zero_crossing,
                          [&ps, side, sigma, margin](const State& s) {
                              return ps.zone.h(s) - side * (sigma - margin);
                          },
                          -side, 1});
            OrbitTrace seg = integrate(ps.field, x, t, t1, cfg, ev);
            for (std::size_t i = 0; i < seg.size(); ++i)
                detail::append(out, seg.times[i], ps.to_pinched(seg.states[i]), seg.states[i], mode);
            copy_user_events(seg, false);
            t = seg.times.back();
            x = seg.back();
            if (seg.escaped || hit_domain(seg)) {
                out.trace.escaped = true;
                break;
            }
            if (!seg.terminated_by_event)
                break;
            x[k] = ps.zone.fibre(x, side)[k];
            enter_sigma(false);
            continue;
        }

        // sliding on Sigma
        bool stable = mode == PinchMode::sliding_stable;
        VectorField slide;
        slide.dim = ps.dim();
        slide.f = [&ps, k](const double* s, double* ds) {
            State xi(s, s + ps.dim());
            xi = ps.zone.fibre(xi, 0.0);
            State v = ps.sliding_field(xi);
            for (std::size_t i = 0; i < v.size(); ++i)
                ds[i] = i == k ? 0.0 : v[i];
        };
        std::vector<EventSpec> ev = wrap_user(true);
        // stable: hdot(+1) < 0 < hdot(-1); unstable: reversed
        ev.push_back({EventKind::sliding_exit,
                      [&ps](const State& s) { return ps.hdot_side(ps.zone.fibre(s, 0.0), 1); }, stable ? 1 : -1, 1});
        ev.push_back({EventKind::sliding_exit,
                      [&ps](const State& s) { return ps.hdot_side(ps.zone.fibre(s, 0.0), -1); }, stable ? -1 : 1, 1});
        double t_end = std::min(t1, depart_at);
        OrbitTrace seg = integrate(slide, x, t, t_end, cfg, ev);
        for (std::size_t i = 0; i < seg.size(); ++i) {
            State xi = ps.zone.fibre(seg.states[i], 0.0);
            std::optional<double> l;
            try {
                l = ps.sliding_lambda(xi);
            } catch (const TransversalityViolation&) {
            }
            detail::append(out, seg.times[i], xi, ps.zone.fibre(xi, l ? *l : 0.0), mode);
        }
        copy_user_events(seg, true);
        t = seg.times.back();
        x = ps.zone.fibre(seg.back(), 0.0);
        if (hit_domain(seg)) {
            out.trace.escaped = true;
            break;
        }
        if (!seg.terminated_by_event) {
            if (t >= depart_at && t < t1) {
                event(EventKind::sliding_exit, x);
                leave(depart_side);
                continue;
            }
            break;
        }
        const Event& ex = seg.events.back();
        bool upper_hit = ex.spec == n_fixed;
        double a = ps.hdot_side(x, 1), b = ps.hdot_side(x, -1);
        double other = upper_hit ? b : a;
        // scale of hdot nearby, to judge a simultaneous tangency
        State pxi = x;
        pxi[sc] += 1e-3;
        double ref = std::max(std::fabs(ps.hdot_side(pxi, 1)), std::fabs(ps.hdot_side(pxi, -1)));
        if (std::fabs(other) <= 1e-6 * std::max(ref, 1e-12)) {
            event(EventKind::canard_point, x);
            // step past the double tangency along the sliding flow
            State v = ps.sliding_field(x);
            double n = 0;
            for (double c : v)
                n = std::max(n, std::fabs(c));
            double dt = n > 0 ? 1e-9 / n : 1e-9;
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] += dt * v[i];
            t += dt;
            if (stable)
                branch(true);
            else
                mode = PinchMode::sliding_stable;
            continue;
        }
        event(EventKind::sliding_exit, x);
        // stable: leave along the field that now points away; unstable: the other side repels
        leave(stable == upper_hit ? 1 : -1);
    }
    return out;
}

}  // namespace canard
