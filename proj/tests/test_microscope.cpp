#include <canard/canard_analysis.hpp>
#include <canard/microscope.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace canard;

namespace {
const double eps = 0.04;
}

TEST(Flat, FoldPointMapsToZeroH)
{
    auto s = ModelCatalog::vdp_supercritical(eps, 0.9);
    State xh = to_flat(s, {1.0, -2.0 / 3.0});
    EXPECT_EQ(xh[0], 1.0);
    EXPECT_NEAR(xh[1], 0.0, 1e-15);
}

TEST(Flat, RhsByHand)
{
    // xdot = h/eps, hdot = q - x - (x^2 - 1) h / eps
    auto s = ModelCatalog::vdp_supercritical(eps, 0.9);
    for (double x : {-1.5, 0.3, 1.7})
        for (double h : {-0.2, 0.05}) {
            State f = flat_rhs(s, {x, h});
            EXPECT_NEAR(f[0], h / eps, 1e-12);
            EXPECT_NEAR(f[1], 0.9 - x - (x * x - 1) * h / eps, 1e-12);
        }
}

TEST(Charts, RoundTrip)
{
    auto s = ModelCatalog::vdp_supercritical(eps, 0.9);
    std::vector<Chart> charts{Chart::lienard(eps), Chart::flat(eps), Chart::v_scope(eps),
                              Chart::w_scope(eps, Gamma0::vdp())};
    for (const auto& c : charts)
        for (State u : {State{1.5, 0.3}, State{-0.4, -0.9}, State{0.7, 0.2}}) {
            State back = c.from_chart(s, c.to_chart(s, u));
            EXPECT_NEAR(back[0], u[0], 1e-12) << c.name();
            EXPECT_NEAR(back[1], u[1], 1e-9) << c.name();
        }
}

TEST(Charts, RhsMatchesDifferentiatedOrbit)
{
    auto s = ModelCatalog::vdp_supercritical(eps, 0.9);
    IntegrationConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-13;
    cfg.event_tol = 1e-13;
    std::vector<Chart> charts{Chart::flat(eps), Chart::v_scope(eps), Chart::w_scope(eps, Gamma0::vdp())};
    for (double t : {0.3, 1.1, 2.4}) {
        State u = integrate(s, {2.0, 0.0}, 0.0, t, cfg).back();
        const double dt = 1e-6;
        State up = integrate(s, u, 0.0, dt, cfg).back();
        State um = integrate(reversed(field_of(s)), u, 0.0, dt, cfg).back();
        for (const auto& c : charts) {
            State cu = c.to_chart(s, u);
            if (c.kind != ChartKind::flat_h && std::fabs(cu[1]) < 10 * c.floor)
                continue;
            State cp = c.to_chart(s, up), cm = c.to_chart(s, um);
            State f = c.rhs(s, cu);
            for (int k = 0; k < 2; ++k) {
                double fd = (cp[k] - cm[k]) / (2 * dt);
                EXPECT_NEAR(fd, f[k], 1e-6 * std::max(1.0, std::fabs(f[k]))) << c.name() << " t=" << t << " k=" << k;
            }
        }
    }
}

TEST(Charts, FloorIsPinchZoneInterior)
{
    auto s = ModelCatalog::vdp_supercritical(eps, 0.9);
    Chart v = Chart::v_scope(eps);
    EXPECT_THROW(v.rhs(s, {0.5, 0.5 * v.floor}), PinchZoneInterior);
    Chart w = Chart::w_scope(eps, Gamma0::vdp());
    EXPECT_THROW(w.rhs(s, {0.5, -0.5 * w.floor}), PinchZoneInterior);
}

TEST(Nullcline, VScopeClosedForm)
{
    // V on the nullcline: (eps (x - q) / (1 - x^2))^[eps]
    for (double q : {0.5, 0.9, 1.1}) {
        auto s = ModelCatalog::vdp_supercritical(eps, q);
        for (double x : {-0.8, 0.1, 0.6, 1.4, 2.0}) {
            auto V = nullcline_ordinate(s, Chart::v_scope(eps), x);
            ASSERT_TRUE(V);
            double ref = signed_pow(eps * (x - q) / (1 - x * x), eps);
            EXPECT_NEAR(*V, ref, 1e-13);
        }
    }
}

TEST(Nullcline, VSingularityAtHopf)
{
    auto s = ModelCatalog::vdp_supercritical(eps, 1.0);
    auto vs = vdp_v_singularity(eps);
    EXPECT_NEAR(vs.V, -std::exp(eps * std::log(0.02)), 1e-15);
    EXPECT_NEAR(vs.V, -0.855, 1e-3);
    SingularPoint sp = nullcline_singularity(s, Chart::v_scope(eps), "q", {1.02, vs.V * 1.02, 1.01});
    EXPECT_NEAR(sp.param, 1.0, 1e-8);
    EXPECT_NEAR(sp.x, 1.0, 1e-8);
    EXPECT_NEAR(sp.ordinate, vs.V, 1e-6);
}

TEST(Nullcline, WSingularityAtQuarticRoot)
{
    double qW = vdp_maximal_canard_q(eps);
    auto s = ModelCatalog::vdp_supercritical(eps, qW);
    Chart w = Chart::w_scope(eps, Gamma0::vdp());
    double W0 = vdp_w_singular_ordinate(eps, qW);
    SingularPoint sp = nullcline_singularity(s, w, "q", {qW + 0.002, W0 * 0.99, qW - 0.001});
    EXPECT_NEAR(sp.param, qW, 1e-8);
    EXPECT_NEAR(sp.x, qW, 1e-8);
    EXPECT_NEAR(sp.ordinate, W0, 1e-6);
}

TEST(Nullcline, CrossShapedLevelSetAtSingularity)
{
    auto s = ModelCatalog::vdp_supercritical(eps, 1.0);
    Chart v = Chart::v_scope(eps);
    auto vs = vdp_v_singularity(eps);
    const double d = 1e-3;
    // the drive changes sign between neighbouring quadrants of a saddle-shaped level set
    double ne = v.drive(s, vs.x + d, vs.V + d), nw = v.drive(s, vs.x - d, vs.V + d);
    double se = v.drive(s, vs.x + d, vs.V - d), sw = v.drive(s, vs.x - d, vs.V - d);
    EXPECT_LT(ne * nw, 0);
    EXPECT_LT(ne * se, 0);
    EXPECT_GT(ne * sw, 0);
    EXPECT_GT(nw * se, 0);
}

TEST(Lemma, ResidualSmallWithInvariantGamma)
{
    double q0 = vdp_maximal_canard_q(eps);
    auto s = ModelCatalog::vdp_supercritical(eps, q0);
    Chart w = Chart::w_scope(eps, Gamma0::vdp_invariant(eps, q0));
    double wlo = std::exp(2 * eps * std::log(eps));
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j)
            for (double dq : {-1e-4, 1e-4}) {
                double x = 0.2 + 1.6 * i / 19.0, W = wlo + (1 - wlo) * j / 19.0;
                EXPECT_LE(lemma51_residual(s, w, x, W, q0 + dq, q0), 1e-8);
                EXPECT_LE(lemma51_residual(s, w, x, -W, q0 + dq, q0), 1e-8);
            }
}

TEST(Lemma, InvariantGammaIsAnOrbit)
{
    // eps*gamma0 solves dh/dx = eps (q0 - x)/h + 1 - x^2 ; independent RK4 from the left end
    double q0 = vdp_maximal_canard_q(eps);
    Gamma0 g = Gamma0::vdp_invariant(eps, q0);
    double x = 0.1, h = -eps / 1.1;
    const int n = 20000;
    const double dx = (0.8 - 0.1) / n;
    auto f = [&](double xx, double hh) { return eps * (q0 - xx) / hh + 1 - xx * xx; };
    for (int i = 0; i < n; ++i) {
        double k1 = f(x, h), k2 = f(x + dx / 2, h + dx / 2 * k1), k3 = f(x + dx / 2, h + dx / 2 * k2),
               k4 = f(x + dx, h + dx * k3);
        h += dx / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        x += dx;
    }
    EXPECT_NEAR(eps * g.value(0.8), h, 1e-9);
}

TEST(Lemma, WdotVanishesAtFixedPoint)
{
    double q0 = vdp_maximal_canard_q(eps);
    auto s = ModelCatalog::vdp_supercritical(eps, q0);
    Chart w = Chart::w_scope(eps, Gamma0::vdp_invariant(eps, q0));
    // at x = q0 and q = q0 both terms of the rewritten field vanish
    EXPECT_NEAR(w.rhs(s, {q0, 0.5})[1], 0.0, 1e-12);
}

TEST(Lemma, HyperbolaGammaIsOnlyApproximate)
{
    double q0 = vdp_maximal_canard_q(eps);
    auto s = ModelCatalog::vdp_supercritical(eps, q0);
    Chart w = Chart::w_scope(eps, Gamma0::vdp());
    double worst = 0;
    for (double x = 0.2; x <= 1.8; x += 0.1)
        worst = std::max(worst, lemma51_residual(s, w, x, 0.9, q0 + 1e-4, q0));
    EXPECT_GT(worst, 1e-4);
    EXPECT_LT(worst, 0.1);
}

TEST(Lemma, RejectsSingularInput)
{
    double q0 = vdp_maximal_canard_q(eps);
    auto s = ModelCatalog::vdp_supercritical(eps, q0);
    Chart w = Chart::w_scope(eps, Gamma0::vdp());
    EXPECT_THROW(lemma51_residual(s, w, 0.5, 0.0, q0, q0), DomainError);
}

TEST(Profile, NormalizedAtOrigin)
{
    EXPECT_EQ(canard_profile(0.0, 0.7, 0.99), 0.7);
    // log derivative equals -(q0 + (2q0-1)x - x^2 - x^3)
    double x = 0.4, q0 = 0.99, h = 1e-6;
    double ld = (std::log(canard_profile(x + h, 1, q0)) - std::log(canard_profile(x - h, 1, q0))) / (2 * h);
    EXPECT_NEAR(ld, -q0 - (2 * q0 - 1) * x + x * x + x * x * x, 1e-8);
}

TEST(PwsFold, SwitchingLineRejected) { EXPECT_THROW(pws_fold_rhs({0.1, 0.0}, 1.0, 1.0, eps), DomainError); }

TEST(PwsFold, LowerHalfIsPlainDrift)
{
    State f = pws_fold_rhs({0.3, -0.5}, 1.01, 1.0, eps);
    EXPECT_EQ(f[0], -0.5);
    EXPECT_NEAR(f[1], 2 * -0.5 * (1.0 - 0.3), 1e-15);
}

TEST(Gamma, FhnDerivativeQuotientMatchesDifferentiation)
{
    Gamma0 g = Gamma0::fhn(1.0, 1.0, eps);
    for (double x : {0.3, 0.9, 1.5}) {
        double h = 1e-6;
        EXPECT_NEAR(g.d1(x), (g.value(x + h) - g.value(x - h)) / (2 * h), 1e-7);
        EXPECT_NEAR(g.d2(x), (g.d1(x + h) - g.d1(x - h)) / (2 * h), 1e-6);
    }
    EXPECT_THROW(Gamma0::fhn(0.01, 1.0, eps), DomainError);
}
