#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "microscope.hpp"
#include "models.hpp"
#include "pinch.hpp"
#include "roots.hpp"
#include "signed_power.hpp"

namespace canard {

struct CanardReport {
    std::string system;
    double eps = 0;
    // Hopf-type (hdot / Vdot nullcline) and maximal-canard (Wdot nullcline) parameters
    std::optional<double> q_V, q_W, q_h, q0, I_h, I_h_displayed, I0, I_sp;
    std::optional<double> x_h, h_h, x0, W0, x0_taylor, V_singular;
    std::optional<double> x_sp, y_sp, y1, y2;
    std::optional<double> gamma0_prime_gap;
    std::vector<std::string> notes;
};

// root of (1-q)(1+q)^3 = eps in (1/2, 1)
inline double vdp_maximal_canard_q(double eps)
{
    if (!(eps > 0 && eps < 1))
        throw DomainError("vdp_maximal_canard_q: requires 0 < eps < 1");
    auto f = [eps](double q) { return (1 - q) * (1 + q) * (1 + q) * (1 + q) - eps; };
    double lo = 0.5, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        (f(mid) > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct VSingularity {
    double q_V, x, V;
};

// closed form (1, 1, -(eps/2)^eps)
inline VSingularity vdp_v_singularity(double eps)
{
    if (!(eps > 0 && eps < 1))
        throw DomainError("vdp_v_singularity: requires 0 < eps < 1");
    return {1.0, 1.0, -std::exp(eps * std::log(eps / 2))};
}

// W ordinate of the Wdot-nullcline singularity for the hyperbola gamma0
inline double vdp_w_singular_ordinate(double eps, double qW)
{
    double u = 3 * eps * eps / (2 * (1 + qW) * (qW * std::pow(1 + qW, 3) - eps));
    return -std::exp(eps * std::log(u));
}

inline CanardReport vdp_report(double eps)
{
    CanardReport r;
    r.system = "vdp";
    r.eps = eps;
    auto v = vdp_v_singularity(eps);
    r.q_V = v.q_V;
    r.V_singular = v.V;
    r.q_W = vdp_maximal_canard_q(eps);
    r.x0 = *r.q_W;
    r.W0 = vdp_w_singular_ordinate(eps, *r.q_W);
    return r;
}

inline CanardReport fhn_report(double eps, double r, double p, int fold_branch = 1)
{
    if (!(r > eps))
        throw DomainError("fhn_report: requires r > eps");
    CanardReport rep;
    rep.system = "fhn";
    rep.eps = eps;
    double xh = (fold_branch >= 0 ? 1.0 : -1.0) * std::sqrt(r - eps);
    rep.x_h = xh;
    rep.h_h = eps * (eps - p) / (2 * xh);
    rep.q_h = xh * xh * xh / 3 + (p - r) * xh;

    Gamma0 g = Gamma0::fhn(r, p, eps, fold_branch);
    auto eta1 = [&](double x, double lam) { return r - lam - x * x; };
    auto B = [&](double x) { return eta1(x, eps) - eps * g.d1(x); };
    auto dB = [&](double x) { return -2 * x - eps * g.d2(x); };
    double seed = xh + 3 * eps * (2 * r - p - eps) / (4 * (r - eps) * (6 * r - 7 * eps)) * xh;
    rep.x0_taylor = seed;
    double x = seed;
    bool ok = false;
    for (int i = 0; i < 100; ++i) {
        double fx = B(x), d = dB(x);
        if (d == 0.0)
            break;
        double step = fx / d;
        // trust window around the fold
        if (std::fabs(x - step - xh) > 0.5 * std::fabs(xh))
            step = 0.5 * step;
        x -= step;
        if (std::fabs(step) < 1e-15 * std::max(1.0, std::fabs(x))) {
            ok = true;
            break;
        }
    }
    if (!ok && std::fabs(B(x)) > 1e-12)
        throw NumericFailure("fhn_report: no root of eta'_eps - eps gamma0' near x_h");
    rep.x0 = x;
    double u0 = -eps * g.value(x) - eta1(x, p) / (-2 * x / eps - g.d2(x));
    rep.W0 = signed_pow(u0, eps);
    rep.q0 = x * x * x / 3 + (p - r) * x;
    // quotient form of gamma0' against the closed-form derivative
    double gap = 0;
    for (int i = 0; i <= 40; ++i) {
        double xs = xh + (-0.5 + i / 40.0) * 0.8 * std::fabs(xh);
        if (std::fabs(xs - xh) < 1e-9 || std::fabs(xs + xh) < 1e-3)
            continue;
        double q = (2 * xs * g.value(xs) + (p - r + xs * xs)) / (r - eps - xs * xs);
        gap = std::max(gap, std::fabs(q - g.d1(xs)));
    }
    rep.gamma0_prime_gap = gap;
    return rep;
}

inline CanardReport hr_report(double eps, double a, double b, double c, double d, double s, double x1, double I)
{
    double k = b - d;
    double disc = k * k - 3 * a * eps;
    if (!(disc > 0))
        throw DomainError("hr_report: requires (b-d)^2 > 3 a eps");
    if (!(b * b > 3 * a))
        throw DomainError("hr_report: requires b^2 > 3a");
    CanardReport rep;
    rep.system = "hr_reduced";
    rep.eps = eps;
    // eta_d'(x) = eps: 3a x^2 - 2k x + eps = 0, root next to the nonzero fold x = 2k/(3a)
    double xh = (k - (k < 0 ? 1.0 : -1.0) * std::sqrt(disc)) / (3 * a);
    rep.x_h = xh;
    auto eta1 = [&](double x) { return -3 * a * x * x + 2 * k * x; };
    auto eta2 = [&](double x) { return -6 * a * x + 2 * k; };
    rep.h_h = -eps * (eta1(xh) - s) / eta2(xh);
    double Ih = a * xh * xh * xh - k * xh * xh - c + s * (xh - x1);
    rep.I_h = Ih;
    rep.I_h_displayed = a * xh * xh * xh - k * xh * xh - c;

    Gamma0 g = Gamma0::hr(a, b, d, s, xh);
    auto B = [&](double x) { return eta1(x) - eps * g.d1(x) - eps; };
    // bracket the root on the fold side of x_h
    double xo = 2 * k / (3 * a) - xh;
    double span = std::max(0.25 * std::fabs(xh - xo), 1e-3);
    std::vector<double> roots = scan_roots(B, xh - span, xh + span, 400);
    if (roots.empty())
        throw NumericFailure("hr_report: no root of eta_d' - eps gamma0' = eps near x_h");
    double x0 = roots.front();
    for (double rt : roots)
        if (std::fabs(rt - xh) < std::fabs(x0 - xh))
            x0 = rt;
    rep.x0 = x0;
    double E1 = eta1(x0) - s;
    double u0 = eps * E1 / (eps * g.d2(x0) - eta2(x0)) - eps * g.value(x0);
    rep.W0 = signed_pow(u0, eps);
    rep.I0 = a * x0 * x0 * x0 - k * x0 * x0 - c + s * (x0 - x1);

    double xsp = (b - std::sqrt(b * b - 3 * a)) / (3 * a);
    rep.x_sp = xsp;
    rep.y_sp = I + c - a * xsp * xsp * xsp + k * xsp * xsp;
    rep.y1 = I + c;
    rep.y2 = c + I + (2 / a) * (2 / a) * std::pow(k / 3, 3);
    double dI = *rep.I0 - Ih;
    rep.I_sp = *rep.I0 + (*rep.y_sp - *rep.y1) / (*rep.y2 - *rep.y1) * dI;
    rep.notes.push_back("I_sp assumes linear growth of the head with I; ordering only");
    rep.notes.push_back("I_h_displayed is a x_h^3 - (b-d) x_h^2 - c; I_h solves the full singularity system");
    return rep;
}

// ---- catastrophic sliding bifurcation -----------------------------------

struct SlidingBifurcation {
    double param;
    double x;  // collision point along the scan coordinate
    std::string kind;  // simple_canard, visible_canard, invisible
    double hddot_upper, hddot_lower;
};

namespace detail {

struct TangencyPair {
    Tangency t1, t2;
};

// T1 and T2 nearest x_ref, or the closest T1/T2 pair when x_ref is NaN
inline std::optional<TangencyPair> closest_pair(const PinchedSystem& ps, double x_ref)
{
    std::optional<TangencyPair> best;
    double bd = 1e300;
    auto ts = ps.tangency_points();
    if (!std::isnan(x_ref)) {
        std::optional<Tangency> t1, t2;
        for (const auto& t : ts) {
            auto& slot = t.side > 0 ? t1 : t2;
            if (!slot || std::fabs(t.s - x_ref) < std::fabs(slot->s - x_ref))
                slot = t;
        }
        if (t1 && t2)
            best = TangencyPair{*t1, *t2};
        return best;
    }
    for (const auto& a : ts)
        for (const auto& b : ts)
            if (a.side > 0 && b.side < 0 && std::fabs(a.s - b.s) < bd) {
                bd = std::fabs(a.s - b.s);
                best = TangencyPair{a, b};
            }
    return best;
}

}  // namespace detail

// Parameter where the upper tangency T1 and the lower tangency T2 collide.
inline SlidingBifurcation detect_sliding_bifurcation(const std::function<PinchedSystem(double)>& family, double lo,
                                                     double hi, double x_ref = std::nan(""), double tol = 1e-14)
{
    if (!(hi > lo))
        throw ConfigError("detect_sliding_bifurcation: empty parameter range");
    auto gap = [&](double p) {
        auto pr = detail::closest_pair(family(p), x_ref);
        if (!pr)
            throw NumericFailure("detect_sliding_bifurcation: no T1/T2 pair at parameter " + std::to_string(p));
        return pr->t1.s - pr->t2.s;
    };
    double glo = gap(lo), ghi = gap(hi);
    if ((glo > 0) == (ghi > 0))
        throw NumericFailure("detect_sliding_bifurcation: no tangency collision in range");
    double p = brent_root(gap, lo, hi, tol);
    double gp = std::min(std::fabs(gap(p)), std::fabs(gap(std::nextafter(p, hi))));
    if (gp > 1e-6)
        throw NumericFailure("detect_sliding_bifurcation: tangency gap jumps instead of closing (pair switch)");
    double x_polished = std::nan("");
    // Polish (x, p) on hdot(+1) = hdot(-1) = 0 jointly. Near the collision both
    // residuals are small, so this keeps digits the root difference loses.
    {
        auto pr = detail::closest_pair(family(p), x_ref);
        Eigen::Vector2d v(0.5 * (pr->t1.s + pr->t2.s), p);
        auto G = [&](const Eigen::VectorXd& w) {
            PinchedSystem ps = family(w[1]);
            State xi = ps.point_on_sigma(w[0]);
            Eigen::VectorXd r(2);
            r << ps.hdot_side(xi, 1), ps.hdot_side(xi, -1);
            return r;
        };
        Eigen::VectorXd cur = v;
        Eigen::VectorXd g = G(cur);
        for (int it = 0; it < 30; ++it) {
            Eigen::MatrixXd J = fd_jacobian(G, cur, 1e-7);
            Eigen::VectorXd step = J.fullPivLu().solve(-g);
            if (!step.allFinite())
                break;
            Eigen::VectorXd nxt = cur + step;
            if (nxt[1] < lo || nxt[1] > hi)
                break;
            Eigen::VectorXd gn = G(nxt);
            if (gn.norm() > g.norm() && it > 0)
                break;
            cur = nxt;
            g = gn;
            if (step.norm() <= 1e-16 * (1.0 + cur.norm()))
                break;
        }
        if (std::fabs(cur[1] - p) < 1e-6 * std::max(1.0, hi - lo)) {
            p = cur[1];
            x_polished = cur[0];
        }
    }
    SlidingBifurcation out;
    out.param = p;
    // curvatures on either side of the collision
    double dp = 1e-6 * std::max(1.0, std::fabs(hi - lo));
    double hu = 0, hl = 0, xs = 0;
    for (double pp : {p - dp, p + dp}) {
        auto pr = detail::closest_pair(family(pp), x_ref);
        hu += pr->t1.hddot;
        hl += pr->t2.hddot;
        xs += 0.5 * (pr->t1.s + pr->t2.s);
    }
    out.hddot_upper = hu / 2;
    out.hddot_lower = hl / 2;
    out.x = std::isnan(x_polished) ? xs / 2 : x_polished;
    bool up_away = out.hddot_upper > 0, low_away = out.hddot_lower < 0;
    if (up_away && low_away)
        out.kind = "visible_canard";
    else if (up_away != low_away)
        out.kind = "simple_canard";
    else
        out.kind = "invisible";
    return out;
}

inline std::function<PinchedSystem(double)> vdp_chart_family(double eps, ChartKind kind, double sigma_scale = 1.0,
                                                             double window_lo = 0.2, double window_hi = 1.8)
{
    return [=](double q) {
        SlowFastSystem sys = ModelCatalog::vdp_supercritical(eps, q);
        Chart c = kind == ChartKind::v_scope ? Chart::v_scope(eps) : Chart::w_scope(eps, Gamma0::vdp());
        return pinch_chart(sys, c, default_sigma(c) * sigma_scale, window_lo, window_hi);
    };
}

inline std::function<PinchedSystem(double)> fhn_w_family(double eps, double r, double p, double sigma_scale = 1.0,
                                                         double window_lo = 0.2, double window_hi = 1.8)
{
    return [=](double q) {
        SlowFastSystem sys = ModelCatalog::fhn_subcritical(eps, q, r, p);
        Chart c = Chart::w_scope(eps, Gamma0::fhn(r, p, eps));
        return pinch_chart(sys, c, default_sigma(c) * sigma_scale, window_lo, window_hi);
    };
}

// ---- two-fold classification ----------------------------------------------

enum class SlidingType {
    folded_saddle,
    folded_node_attracting,
    folded_node_repelling,
    folded_focus_attracting,
    folded_focus_repelling,
    degenerate
};
enum class CurvatureCase { mixed, both_toward, both_away, degenerate };
enum class CanardClass { simple, robust, visible, none };

inline const char* to_string(SlidingType t)
{
    switch (t) {
    case SlidingType::folded_saddle: return "folded_saddle";
    case SlidingType::folded_node_attracting: return "folded_node_attracting";
    case SlidingType::folded_node_repelling: return "folded_node_repelling";
    case SlidingType::folded_focus_attracting: return "folded_focus_attracting";
    case SlidingType::folded_focus_repelling: return "folded_focus_repelling";
    default: return "degenerate";
    }
}
inline const char* to_string(CurvatureCase c)
{
    switch (c) {
    case CurvatureCase::mixed: return "mixed";
    case CurvatureCase::both_toward: return "both_toward";
    case CurvatureCase::both_away: return "both_away";
    default: return "degenerate";
    }
}
inline const char* to_string(CanardClass c)
{
    switch (c) {
    case CanardClass::simple: return "simple";
    case CanardClass::robust: return "robust";
    case CanardClass::visible: return "visible";
    default: return "none";
    }
}

struct TwoFoldClassification {
    double a, b, c, sigma_over_eps;
    SlidingType sliding_type;
    int eig_in_region = 0;
    CurvatureCase curvature_case;
    CanardClass canard_class;
    double hddot_t1, hddot_t2;  // along T1 (upper) and T2 (lower)
    std::vector<double> eigenvalues;  // real eigenvalues of [[c, b], [a, 0]]
};

// Two-fold of the pinched local fold: eps x' = y - x^2/2, y' = b z + c x, z' = a.
// Eigenvectors (mu, a) of the desingularized sliding field lie in the sliding
// region iff |mu| < sigma/eps.
inline TwoFoldClassification classify_twofold(double a, double b, double c, double sigma_over_eps,
                                              double band = 1e-10)
{
    if (!(sigma_over_eps > 0))
        throw DomainError("classify_twofold: sigma/eps must be positive");
    double s = sigma_over_eps;
    double ab = a * b, disc = ab + 0.25 * c * c;
    if (std::fabs(ab) <= band || std::fabs(disc) <= band || std::fabs(c) <= band)
        throw DomainError("classify_twofold: degenerate parameters (ab, ab + c^2/4 or c within the band)");
    TwoFoldClassification r{a, b, c, s, SlidingType::degenerate, 0, CurvatureCase::degenerate, CanardClass::none,
                            ab + c * s - s * s, ab - c * s - s * s, {}};
    if (ab > 0)
        r.sliding_type = SlidingType::folded_saddle;
    else if (disc < 0)
        r.sliding_type = c < 0 ? SlidingType::folded_focus_attracting : SlidingType::folded_focus_repelling;
    else
        r.sliding_type = c < 0 ? SlidingType::folded_node_attracting : SlidingType::folded_node_repelling;
    if (disc > 0) {
        double sq = std::sqrt(disc);
        r.eigenvalues = {0.5 * c - sq, 0.5 * c + sq};
        for (double mu : r.eigenvalues) {
            if (std::fabs(std::fabs(mu) - s) <= band)
                throw DomainError("classify_twofold: eigenvector on the sliding-region boundary");
            if (std::fabs(mu) < s)
                ++r.eig_in_region;
        }
    }
    if (std::fabs(r.hddot_t1) <= band || std::fabs(r.hddot_t2) <= band)
        r.curvature_case = CurvatureCase::degenerate;
    else {
        bool up_away = r.hddot_t1 > 0, low_away = r.hddot_t2 < 0;
        r.curvature_case = up_away && low_away     ? CurvatureCase::both_away
                           : !up_away && !low_away ? CurvatureCase::both_toward
                                                   : CurvatureCase::mixed;
    }
    if (r.sliding_type == SlidingType::folded_saddle && r.eig_in_region == 2)
        r.canard_class = CanardClass::simple;
    else if (r.sliding_type == SlidingType::folded_node_attracting && r.eig_in_region == 2)
        r.canard_class = CanardClass::robust;
    else if (r.sliding_type == SlidingType::folded_saddle && r.eig_in_region == 1 &&
             r.curvature_case == CurvatureCase::both_away)
        r.canard_class = CanardClass::visible;
    return r;
}

struct TwoFoldSample {
    double a, b, c, sigma_over_eps;
};

// shipped archetypes: simple, robust, visible
inline std::vector<TwoFoldSample> twofold_archetypes()
{
    return {{1.0, 1.0, 0.5, 4.0}, {1.0, -1.0, -3.0, 4.0}, {1.0, 1.0, 0.5, 1.0}};
}

// classification over a grid; degenerate points are skipped
inline std::vector<TwoFoldClassification> twofold_table(const std::vector<double>& as, const std::vector<double>& bs,
                                                        const std::vector<double>& cs, const std::vector<double>& ss)
{
    std::vector<TwoFoldClassification> out;
    for (double a : as)
        for (double b : bs)
            for (double c : cs)
                for (double s : ss) {
                    try {
                        out.push_back(classify_twofold(a, b, c, s));
                    } catch (const DomainError&) {
                    }
                }
    return out;
}

}  // namespace canard
