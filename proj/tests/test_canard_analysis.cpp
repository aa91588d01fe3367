#include <canard/canard_analysis.hpp>

#include "twofold_probe.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace canard;

namespace {

const double eps = 0.04;

double bisect_quartic(double e)
{
    double lo = 0.5, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        double m = 0.5 * (lo + hi);
        ((1 - m) * std::pow(1 + m, 3) - e > 0 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(Quartic, MatchesBisectionOracle)
{
    double q = vdp_maximal_canard_q(eps);
    EXPECT_LE(std::fabs((1 - q) * std::pow(1 + q, 3) - eps), 1e-12);
    EXPECT_NEAR(q, bisect_quartic(eps), 1e-10);
    EXPECT_NEAR(q, 0.99497, 1e-5);
}

TEST(Quartic, SmallEpsilonLinearization)
{
    double q = vdp_maximal_canard_q(0.005);
    EXPECT_NEAR(q, bisect_quartic(0.005), 1e-10);
    EXPECT_NEAR(q, 1 - 0.005 / 8, 1e-5);
    EXPECT_NEAR(vdp_maximal_canard_q(1e-8), 1.0, 1e-8);
}

TEST(Quartic, RejectsBadEpsilon) { EXPECT_THROW(vdp_maximal_canard_q(0.0), DomainError); }

TEST(VSingularity, ClosedForm)
{
    auto v = vdp_v_singularity(eps);
    EXPECT_EQ(v.q_V, 1.0);
    EXPECT_NEAR(v.V, -std::pow(0.02, 0.04), 1e-15);
}

TEST(FhnReport, HopfValues)
{
    auto r = fhn_report(eps, 1.0, 1.0);
    EXPECT_NEAR(*r.x_h, std::sqrt(0.96), 1e-12);
    EXPECT_NEAR(*r.q_h, std::pow(0.96, 1.5) / 3, 1e-12);
    EXPECT_NEAR(*r.q_h, 0.31354, 1e-5);
}

TEST(FhnReport, MaximalCanardAboveHopf)
{
    auto r = fhn_report(eps, 1.0, 1.0);
    EXPECT_LT(*r.q_h, *r.q0);
    EXPECT_NEAR(*r.q0, std::pow(*r.x0, 3) / 3, 1e-14);
    EXPECT_LE(*r.gamma0_prime_gap, 1e-10);
    // Taylor seed close to the Newton root
    EXPECT_NEAR(*r.x0_taylor, *r.x0, 1e-3);
}

TEST(FhnReport, ApproachesVanDerPolStructure)
{
    for (double pr : {0.9, 0.99, 1.0}) {
        auto r = fhn_report(eps, pr, pr);
        EXPECT_NEAR(*r.q_h, std::pow(*r.x_h, 3) / 3, 1e-12);
        EXPECT_LT(*r.q_h, *r.q0);
    }
}

TEST(HrReport, SpikeOnsetPoint)
{
    auto r = hr_report(eps, 1.0, 3.0, 1.0, 5.0, 4.0, -1.618, 1.37);
    ASSERT_TRUE(r.x_sp);
    EXPECT_NEAR(*r.x_sp, (3 - std::sqrt(6.0)) / 3, 1e-12);
    ASSERT_TRUE(r.x_h);
    EXPECT_TRUE(std::isfinite(*r.x_h));
    EXPECT_LT(*r.I_h, *r.I0);
    EXPECT_LT(*r.I0, *r.I_sp);
    EXPECT_FALSE(r.notes.empty());
}

TEST(HrReport, HopfCurrentIsAHopf)
{
    // at I_h the reduced equilibrium sits at x_h with zero Jacobian trace
    auto r = hr_report(eps, 1.0, 3.0, 1.0, 5.0, 4.0, -1.618, 1.37);
    auto sys = ModelCatalog::hr_reduced(eps, *r.I_h);
    auto eqs = equilibria(sys);
    bool found = false;
    for (const auto& e : eqs)
        if (std::fabs(e.state[0] - *r.x_h) < 1e-8) {
            found = true;
            EXPECT_NEAR(sys.jacobian(e.state).trace(), 0.0, 1e-6);
        }
    EXPECT_TRUE(found);
}

TEST(SlidingBifurcation, VChartAtHopf)
{
    auto b = detect_sliding_bifurcation(vdp_chart_family(eps, ChartKind::v_scope), 0.8, 1.2, 1.0);
    EXPECT_NEAR(b.param, 1.0, 1e-9);
    EXPECT_NEAR(b.x, 1.0, 1e-9);
    EXPECT_EQ(b.kind, "simple_canard");
}

TEST(SlidingBifurcation, WChartAtQuartic)
{
    auto b = detect_sliding_bifurcation(vdp_chart_family(eps, ChartKind::w_scope), 0.98, 0.998, 1.0);
    EXPECT_NEAR(b.param, bisect_quartic(eps), 1e-6);
    EXPECT_EQ(b.kind, "visible_canard");
}

TEST(SlidingBifurcation, FhnAtMaximalCanard)
{
    auto r = fhn_report(eps, 1.0, 1.0);
    auto b = detect_sliding_bifurcation(fhn_w_family(eps, 1.0, 1.0), *r.q0 - 2e-3, *r.q0 + 2e-3, 1.0);
    EXPECT_NEAR(b.param, *r.q0, 1e-8);
}

TEST(SlidingBifurcation, SigmaIndependent)
{
    auto w1 = detect_sliding_bifurcation(vdp_chart_family(eps, ChartKind::w_scope), 0.98, 0.998, 1.0);
    auto f1 = detect_sliding_bifurcation(fhn_w_family(eps, 1.0, 1.0), 0.3165, 0.3205, 1.0);
    for (double s : {0.5, 1.5}) {
        auto w = detect_sliding_bifurcation(vdp_chart_family(eps, ChartKind::w_scope, s), 0.98, 0.998, 1.0);
        EXPECT_LT(std::fabs(w.param - w1.param), 1e-9);
        auto f = detect_sliding_bifurcation(fhn_w_family(eps, 1.0, 1.0, s), 0.3165, 0.3205, 1.0);
        EXPECT_LT(std::fabs(f.param - f1.param), 1e-9);
    }
}

TEST(SlidingBifurcation, NoCollisionInRangeThrows)
{
    EXPECT_THROW(detect_sliding_bifurcation(vdp_chart_family(eps, ChartKind::v_scope), 0.5, 0.7, 1.0),
                 NumericFailure);
}

TEST(TwoFold, Archetypes)
{
    auto arch = twofold_archetypes();
    ASSERT_EQ(arch.size(), 3u);
    auto simple = classify_twofold(arch[0].a, arch[0].b, arch[0].c, arch[0].sigma_over_eps);
    EXPECT_EQ(simple.sliding_type, SlidingType::folded_saddle);
    EXPECT_EQ(simple.canard_class, CanardClass::simple);
    auto robust = classify_twofold(arch[1].a, arch[1].b, arch[1].c, arch[1].sigma_over_eps);
    EXPECT_EQ(robust.sliding_type, SlidingType::folded_node_attracting);
    EXPECT_EQ(robust.canard_class, CanardClass::robust);
    auto visible = classify_twofold(arch[2].a, arch[2].b, arch[2].c, arch[2].sigma_over_eps);
    EXPECT_EQ(visible.eig_in_region, 1);
    EXPECT_EQ(visible.curvature_case, CurvatureCase::both_away);
    EXPECT_EQ(visible.canard_class, CanardClass::visible);
}

TEST(TwoFold, RobustArithmetic)
{
    // ab = -1 < 0, ab + c^2/4 = 1.25 > 0, c < 0
    auto r = classify_twofold(1, -1, -3, 4);
    ASSERT_EQ(r.eigenvalues.size(), 2u);
    EXPECT_NEAR(r.eigenvalues[0], -1.5 - std::sqrt(1.25), 1e-14);
    EXPECT_NEAR(r.eigenvalues[1], -1.5 + std::sqrt(1.25), 1e-14);
}

TEST(TwoFold, DegenerateBand)
{
    EXPECT_THROW(classify_twofold(1, 0, 1, 2), DomainError);
    EXPECT_THROW(classify_twofold(1, -1, 2, 2), DomainError);  // ab + c^2/4 = 0
    EXPECT_THROW(classify_twofold(1, 1, 1, -1), DomainError);
}

TEST(TwoFold, AgreesWithBruteForceProbe)
{
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> U(-3, 3), S(0.2, 5);
    int n = 0;
    while (n < 50) {
        double a = U(rng), b = U(rng), c = U(rng), s = S(rng);
        TwoFoldClassification r;
        try {
            r = classify_twofold(a, b, c, s, 0.05);
        } catch (const DomainError&) {
            continue;
        }
        if (r.curvature_case == CurvatureCase::degenerate)
            continue;
        ++n;
        auto L = probe::label({a, b, c, s});
        EXPECT_EQ(L.sliding_type, to_string(r.sliding_type)) << a << " " << b << " " << c << " " << s;
        EXPECT_EQ(L.eig_in_region, r.eig_in_region) << a << " " << b << " " << c << " " << s;
        EXPECT_EQ(L.curvature_case, to_string(r.curvature_case)) << a << " " << b << " " << c << " " << s;
        EXPECT_EQ(L.canard_class, to_string(r.canard_class)) << a << " " << b << " " << c << " " << s;
    }
}

TEST(TwoFold, TableSkipsDegenerate)
{
    auto t = twofold_table({0.0, 1.0}, {1.0}, {0.5}, {4.0});
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].a, 1.0);
}
