// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
#include <canard/canard.hpp>

#include "../tests/twofold_probe.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace canard;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void run(int id, const char* title, double budget_s, const std::function<Outcome()>& body)
{
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > budget_s) {
        o.pass = false;
        o.detail += " [over time budget]";
    }
    if (!o.pass)
        ++failures;
    std::printf("[%s] %2d %-34s %s (%.2fs / %.0fs)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), dt,
                budget_s);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double quartic(double q, double eps) { return (1 - q) * (1 + q) * (1 + q) * (1 + q) - eps; }

// plain bisection, independent of the library
double oracle_bisect(const std::function<double(double)>& f, double lo, double hi)
{
    double flo = f(lo);
    for (int i = 0; i < 300; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        double fm = f(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// upward crossings of x = level, linearly interpolated
std::vector<double> upcrossings(const OrbitTrace& tr, double level)
{
    std::vector<double> t;
    for (std::size_t i = 1; i < tr.size(); ++i) {
        double a = tr.states[i - 1][0] - level, b = tr.states[i][0] - level;
        if (a < 0 && b >= 0)
            t.push_back(tr.times[i - 1] + (tr.times[i] - tr.times[i - 1]) * (-a) / (b - a));
    }
    return t;
}

}  // namespace

int main()
{
    const double eps = 0.04;
    const double qW_oracle = oracle_bisect([&](double q) { return quartic(q, eps); }, 0.5, 1.0);

    run(1, "quartic maximal-canard q_W", 1.0, [&] {
        double q = vdp_maximal_canard_q(eps);
        double res = std::fabs(quartic(q, eps));
        double diff = std::fabs(q - qW_oracle);
        return Outcome{res <= 1e-12 && diff <= 1e-10,
                       fmt("q_W=%.15f |quartic|=%.2e (<=1e-12) |q-oracle|=%.2e (<=1e-10)", q, res, diff)};
    });

    run(2, "Hopf location q_V = 1", 1.0, [&] {
        // trace of the vdp Jacobian at the equilibrium x = q: (1 - q^2)/eps
        auto sys = ModelCatalog::vdp_supercritical(eps, 1.0);
        auto J = sys.jacobian({1.0, 1.0 / 3.0 - 1.0});
        double tr = J.trace();
        auto vs = vdp_v_singularity(eps);
        SingularPoint seed{vs.x + 0.01, vs.V * 1.01, vs.q_V + 0.01};
        SingularPoint sp = nullcline_singularity(sys, Chart::v_scope(eps), "q", seed);
        double dq = std::fabs(sp.param - 1.0);
        return Outcome{std::fabs(tr) <= 1e-10 && dq <= 1e-8,
                       fmt("trace(q=1)=%.2e (<=1e-10) solved q_V=%.12f |q_V-1|=%.2e (<=1e-8)", tr, sp.param, dq)};
    });

    run(3, "W-chart rewrite residual", 1.0, [&] {
        double q0 = vdp_maximal_canard_q(eps);
        auto sys = ModelCatalog::vdp_supercritical(eps, q0);
        Chart w = Chart::w_scope(eps, Gamma0::vdp_invariant(eps, q0));
        double wlo = std::exp(2 * eps * std::log(eps)), worst = 0;
        int n = 0;
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j)
                for (double dq : {-1e-4, 1e-4}) {
                    double x = 0.2 + 1.6 * i / 19.0;
                    double W = wlo + (1.0 - wlo) * j / 19.0;
                    for (double sg : {1.0, -1.0})
                        worst = std::max(worst, lemma51_residual(sys, w, x, sg * W, q0 + dq, q0));
                    ++n;
                }
        return Outcome{worst <= 1e-8, fmt("max residual %.2e over %g points (<=1e-8)", worst, n)};
    });

    run(4, "Filippov tangency", 1.0, [&] {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> U(-1, 1);
        double worst = 0;
        int done = 0;
        while (done < 1000) {
            State Fp(3), Fm(3), g(3);
            for (int k = 0; k < 3; ++k) {
                Fp[k] = U(rng);
                Fm[k] = U(rng);
                g[k] = U(rng);
            }
            double den = dot(Fm, g) - dot(Fp, g);
            if (std::fabs(den) < 1e-3)
                continue;
            auto [v, lam] = filippov_vector(Fp, Fm, g);
            worst = std::max(worst, std::fabs(dot(v, g)));
            ++done;
        }
        auto [v, lam] = filippov_vector({1, -1}, {1, 1}, {0, 1});
        bool hand = v[0] == 1.0 && v[1] == 0.0;
        return Outcome{worst <= 1e-12 && hand,
                       fmt("max|v.grad h|=%.2e (<=1e-12) hand case (%g,%g) lambda=%g", worst, v[0], v[1], lam)};
    });

    auto v_tangency_check = [&](double scale) {
        // eps |x - q| = sigma^(1/eps) |1 - x^2|; at sigma = eps^eps this is |x - q| = |1 - x^2|
        double worst = 0;
        int count = 0;
        for (double q : {0.5, 0.9, 1.1}) {
            auto sys = ModelCatalog::vdp_supercritical(eps, q);
            Chart c = Chart::v_scope(eps);
            double sigma = default_sigma(c) * scale;
            auto ps = pinch_chart(sys, c, sigma, -2.5, 2.5);
            double u = std::exp(std::log(sigma) / eps);
            for (const auto& t : ps.tangency_points()) {
                worst = std::max(worst, std::fabs(eps * std::fabs(t.s - q) - u * std::fabs(1 - t.s * t.s)));
                ++count;
            }
        }
        double lf = 0;
        for (double q : {0.1, -0.2})
            for (double sig : {0.01, 0.02}) {
                auto ps = pinch(ModelCatalog::local_fold_2d(eps, q), sig * scale, 1, -1, 1);
                double r = sig * scale / eps;
                for (const auto& t : ps.tangency_points()) {
                    double e = std::min(std::fabs(t.s - q / (1 + r)), std::fabs(t.s - q / (1 - r)));
                    lf = std::max(lf, e);
                    ++count;
                }
            }
        return std::tuple<double, double, int>{worst, lf, count};
    };

    run(5, "sliding-region endpoints", 1.0, [&] {
        auto [worst, lf, count] = v_tangency_check(1.0);
        return Outcome{worst <= 1e-8 && lf <= 1e-8 && count >= 14,
                       fmt("V chart max||x-q|-|1-x^2||=%.2e local fold max err=%.2e (<=1e-8) tangencies=%g", worst,
                           lf, count)};
    });

    const double qW = vdp_maximal_canard_q(eps);
    SlidingBifurcation bV, bW;
    run(6, "tangency collision q*", 10.0, [&] {
        bW = detect_sliding_bifurcation(vdp_chart_family(eps, ChartKind::w_scope), 0.98, 0.998, 1.0);
        bV = detect_sliding_bifurcation(vdp_chart_family(eps, ChartKind::v_scope), 0.8, 1.2, 1.0);
        double dW = std::fabs(bW.param - qW), dV = std::fabs(bV.param - 1.0);
        return Outcome{dW <= 1e-6 && dV <= 1e-6,
                       fmt("W: q*=%.12f |q*-q_W|=%.2e, V: q*=%.12f |q*-1|=%.2e (<=1e-6)", bW.param, dW, bV.param, dV) +
                           " kinds " + bW.kind + "/" + bV.kind};
    });

    run(7, "smooth vs pinched relaxation cycle", 30.0, [&] {
        double q = 0.9;
        auto sys = ModelCatalog::vdp_supercritical(eps, q);
        auto orb = find_periodic_orbit(sys, {2.0, 0.0});
        if (!orb)
            return Outcome{false, "no smooth cycle"};
        Chart c = Chart::v_scope(eps);
        auto ps = pinch_chart(sys, c, default_sigma(c), -2.5, 2.5);
        IntegrationConfig cfg;
        cfg.rel_tol = 1e-9;
        cfg.abs_tol = 1e-11;
        cfg.event_tol = 1e-11;
        auto tr = integrate_pinched(ps, c.to_chart(sys, {2.0, 0.0}), 0.0, 20.0, cfg);
        auto up = upcrossings(tr.trace, 0.0);
        if (up.size() < 3)
            return Outcome{false, "pinched orbit not oscillating"};
        double T = up.back() - up[up.size() - 2];
        double lo = 1e9, hi = -1e9;
        for (std::size_t i = 0; i < tr.trace.size(); ++i)
            if (tr.trace.times[i] >= up[up.size() - 2]) {
                lo = std::min(lo, tr.trace.states[i][0]);
                hi = std::max(hi, tr.trace.states[i][0]);
            }
        double A = hi - lo;
        double eT = std::fabs(T - orb->period) / orb->period, eA = std::fabs(A - orb->amplitude) / orb->amplitude;
        return Outcome{eT <= 0.10 && eA <= 0.10,
                       fmt("period %.4f vs %.4f (%.1f%%), amplitude %.4f", T, orb->period, 100 * eT, A) +
                           fmt(" vs %.4f (%.1f%%) (<=10%%)", orb->amplitude, 100 * eA)};
    });

    run(8, "canard explosion localization", 300.0, [&] {
        auto sys = ModelCatalog::vdp_supercritical(eps, 0.99);
        IntegrationConfig cfg = default_config(eps);
        SweepOptions opt;
        auto sw = branch_sweep(sys, "q", 0.97, 1.01, 41, cfg, opt);
        if (!sw.explosion)
            return Outcome{false, "no explosion detected"};
        Explosion ex = refine_explosion(sys, "q", *sw.explosion, cfg, opt, 1e-7);
        double dc = std::fabs(ex.center - qW);
        return Outcome{dc <= 5e-3 && ex.width <= 1e-2,
                       fmt("centre %.6f |centre-q_W|=%.2e (<=5e-3) numerical width %.2e (<=1e-2)", ex.center, dc,
                           ex.width)};
    });

    run(9, "FHN subcritical coexistence", 120.0, [&] {
        auto rep = fhn_report(eps, 1.0, 1.0);
        double q0 = *rep.q0;
        auto below = find_limit_cycles(ModelCatalog::fhn_subcritical(eps, q0 - 1e-4), {2.0, 0.0});
        auto above = find_limit_cycles(ModelCatalog::fhn_subcritical(eps, q0 + 1e-2), {2.0, 0.0});
        int st = 0, un = 0;
        for (const auto& c : below)
            (c.stability == CycleStability::stable ? st : un)++;
        return Outcome{st == 1 && un == 1 && above.empty(),
                       fmt("q0=%.10f below: %g stable %g unstable; above: %g cycles", q0, st, un, above.size())};
    });

    run(10, "two-fold classification oracle", 120.0, [&] {
        std::mt19937 rng(20240611);
        std::uniform_real_distribution<double> U(-3, 3), S(0.2, 5);
        int agree = 0, n = 0;
        while (n < 50) {
            double a = U(rng), b = U(rng), c = U(rng), s = S(rng);
            TwoFoldClassification r;
            try {
                r = classify_twofold(a, b, c, s, 0.05);  // wide band keeps samples away from boundaries
            } catch (const DomainError&) {
                continue;
            }
            if (r.curvature_case == CurvatureCase::degenerate)
                continue;
            ++n;
            auto L = probe::label({a, b, c, s});
            agree += L.sliding_type == to_string(r.sliding_type) && L.eig_in_region == r.eig_in_region &&
                     L.curvature_case == to_string(r.curvature_case) && L.canard_class == to_string(r.canard_class);
        }
        bool simple = false, robust = false, visible = false;
        int arch_agree = 0;
        for (const auto& s : twofold_archetypes()) {
            auto r = classify_twofold(s.a, s.b, s.c, s.sigma_over_eps);
            simple |= r.canard_class == CanardClass::simple;
            robust |= r.canard_class == CanardClass::robust;
            visible |= r.canard_class == CanardClass::visible;
            arch_agree += probe::label({s.a, s.b, s.c, s.sigma_over_eps}).canard_class == to_string(r.canard_class);
        }
        return Outcome{agree == 50 && simple && robust && visible && arch_agree == 3,
                       fmt("random agreement %g/50, archetypes simple=%g robust=%g visible=%g", agree, simple, robust,
                           visible)};
    });

    run(11, "Hindmarsh-Rose spike onset", 300.0, [&] {
        auto rep = hr_report(eps, 1.0, 3.0, 1.0, 5.0, 4.0, -1.618, 1.37);
        bool order = rep.x_h && *rep.I_h < *rep.I0 && *rep.I0 < *rep.I_sp;
        auto sw = branch_sweep(ModelCatalog::hindmarsh_rose(eps, 2.0), "I", 1.9, 2.4, 11);
        // expect rest, then cycles without spikes, then one spike
        int phase = 0;
        bool ok = true, saw0 = false, saw1 = false;
        for (const auto& p : sw.points) {
            if (!p.cycle) {
                ok &= phase == 0;
                continue;
            }
            int sc = p.spike_count;
            if (sc == 0) {
                ok &= phase <= 1;
                phase = 1;
                saw0 = true;
            } else if (sc == 1) {
                phase = 2;
                saw1 = true;
            } else
                ok = false;
        }
        return Outcome{order && ok && saw0 && saw1,
                       fmt("I_h=%.6f < I0=%.6f < I_sp=%.6f", *rep.I_h, *rep.I0, *rep.I_sp) +
                           std::string(", spike counts step 0->1: ") + (ok && saw0 && saw1 ? "yes" : "no")};
    });

    run(12, "sigma independence", 10.0, [&] {
        double dq = 0, dx = 0, tang = 0;
        for (double scale : {0.5, 1.5}) {
            auto w = detect_sliding_bifurcation(vdp_chart_family(eps, ChartKind::w_scope, scale), 0.98, 0.998, 1.0);
            auto v = detect_sliding_bifurcation(vdp_chart_family(eps, ChartKind::v_scope, scale), 0.8, 1.2, 1.0);
            dq = std::max({dq, std::fabs(w.param - bW.param), std::fabs(v.param - bV.param)});
            dx = std::max({dx, std::fabs(w.x - bW.x), std::fabs(v.x - bV.x)});
            auto [worst, lf, count] = v_tangency_check(scale);
            tang = std::max({tang, worst, lf});
        }
        return Outcome{dq < 1e-9 && dx < 1e-9 && tang <= 1e-8,
                       fmt("max|dq*|=%.2e max|dx*|=%.2e (<1e-9), closed-form tangency err %.2e (<=1e-8)", dq, dx,
                           tang)};
    });

    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
