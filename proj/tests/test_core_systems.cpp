#include <canard/models.hpp>
#include <canard/signed_power.hpp>
#include <canard/integrator.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace canard;

TEST(SignedPower, OddRootOfNegative) { EXPECT_NEAR(signed_pow(-8.0, 1.0 / 3.0), -2.0, 1e-14); }

TEST(SignedPower, ZeroWithPositiveExponent) { EXPECT_EQ(signed_pow(0.0, 0.04), 0.0); }

TEST(SignedPower, LargeExponentMatchesLogExp)
{
    double oracle = std::exp(25.0 * std::log(0.5));
    EXPECT_NEAR(signed_pow(0.5, 25.0), oracle, 1e-22);
    EXPECT_NEAR(oracle, 2.98e-8, 1e-10);
}

TEST(SignedPower, ZeroWithNonPositiveExponentThrows)
{
    EXPECT_THROW(signed_pow(0.0, 0.0), DomainError);
    EXPECT_THROW(signed_pow(0.0, -1.0), DomainError);
}

TEST(SignedPower, AntisymmetryAndRoundTrip)
{
    const double eps = 0.04;
    for (double p : {eps, 2 * eps, 1 / eps})
        for (double x = -10; x <= 10; x += 0.37) {
            if (x == 0)
                continue;
            EXPECT_DOUBLE_EQ(signed_pow(-x, p), -signed_pow(x, p));
            double back = signed_pow(signed_pow(x, p), 1 / p);
            EXPECT_NEAR(back, x, 1e-12 * std::fabs(x)) << "x=" << x << " p=" << p;
        }
}

TEST(EvalRhs, VdpAtFold)
{
    auto s = ModelCatalog::vdp_supercritical(0.04, 0.9);
    State v = eval_rhs(s, {1.0, -2.0 / 3.0});
    EXPECT_NEAR(v[0], 0.0, 1e-14);
    EXPECT_NEAR(v[1], -0.1, 1e-14);
}

TEST(EvalRhs, VdpAtOrigin)
{
    auto s = ModelCatalog::vdp_supercritical(0.04, 0.9);
    State v = eval_rhs(s, {0.0, 0.0});
    EXPECT_EQ(v[0], 0.0);
    EXPECT_NEAR(v[1], 0.9, 1e-15);
}

TEST(EvalRhs, HindmarshRoseHandSubstitution)
{
    // x' = (z - a x^3 + b x^2 + I - y)/eps, y' = s(x - x1) - y, z' = (c - d x^2 - z)/eps
    auto s = make_system("hindmarsh_rose", {{"I", 0.0}});
    const double x = 0.5, y = -0.25, z = 0.125, eps = s.epsilon();
    const double a = 1, b = 3, c = 1, d = 5, sl = s.param("s"), x1 = s.param("x1");
    State v = eval_rhs(s, {x, y, z});
    EXPECT_NEAR(v[0], (z - a * x * x * x + b * x * x - y) / eps, 1e-12);
    EXPECT_NEAR(v[1], sl * (x - x1) - y, 1e-12);
    EXPECT_NEAR(v[2], (c - d * x * x - z) / eps, 1e-12);
}

TEST(EvalRhs, UnknownParameterRejected)
{
    auto s = ModelCatalog::vdp_supercritical();
    EXPECT_THROW(eval_rhs(s, {0.0, 0.0}, {{"nope", 1.0}}), ConfigError);
}

TEST(EvalRhs, WrongDimensionRejected)
{
    auto s = ModelCatalog::vdp_supercritical();
    EXPECT_THROW(eval_rhs(s, {0.0, 0.0, 0.0}), DomainError);
}

TEST(Equilibria, VdpUnstableInside)
{
    auto eqs = equilibria(ModelCatalog::vdp_supercritical(0.04, 0.9));
    ASSERT_EQ(eqs.size(), 1u);
    EXPECT_NEAR(eqs[0].state[0], 0.9, 1e-14);
    EXPECT_EQ(eqs[0].stability, Stability::unstable);
}

TEST(Equilibria, VdpStableOutside)
{
    auto eqs = equilibria(ModelCatalog::vdp_supercritical(0.04, 1.5));
    ASSERT_EQ(eqs.size(), 1u);
    EXPECT_NEAR(eqs[0].state[0], 1.5, 1e-14);
    EXPECT_EQ(eqs[0].stability, Stability::stable);
}

TEST(Equilibria, FhnSingleRootCubicOracle)
{
    // x^3/3 = 1 by bisection
    double lo = 0, hi = 3;
    for (int i = 0; i < 200; ++i) {
        double m = 0.5 * (lo + hi);
        (m * m * m / 3 - 1 > 0 ? hi : lo) = m;
    }
    auto eqs = equilibria(ModelCatalog::fhn_subcritical(0.04, 1.0, 1.0, 1.0));
    ASSERT_EQ(eqs.size(), 1u);
    EXPECT_NEAR(eqs[0].state[0], lo, 1e-12);
}

TEST(Catalog, FastComponentVanishesOnCriticalManifold)
{
    std::vector<SlowFastSystem> systems{ModelCatalog::vdp_supercritical(), ModelCatalog::fhn_subcritical(),
                                        ModelCatalog::hr_reduced(), ModelCatalog::local_fold_2d()};
    for (const auto& s : systems)
        for (double x = -1.5; x <= 1.5; x += 0.25) {
            State u{x, s.model().y_from_h(s.values(), x, 0.0)};
            EXPECT_NEAR(s.h(u), 0.0, 1e-12) << s.tag();
            EXPECT_NEAR(eval_rhs(s, u)[0], 0.0, 1e-10) << s.tag() << " x=" << x;
        }
}

TEST(Catalog, VdpFoldPoints)
{
    auto s = ModelCatalog::vdp_supercritical();
    for (double sg : {1.0, -1.0}) {
        State u{sg, -sg * 2.0 / 3.0};
        EXPECT_NEAR(s.h(u), 0.0, 1e-15);
        // fold: dh/dx vanishes along the critical manifold
        EXPECT_NEAR(s.grad_h(u)[0], 0.0, 1e-15);
    }
}

TEST(Catalog, HindmarshRoseDefaults)
{
    auto s = ModelCatalog::hindmarsh_rose();
    EXPECT_EQ(s.param("a"), 1.0);
    EXPECT_EQ(s.param("b"), 3.0);
    EXPECT_EQ(s.param("c"), 1.0);
    EXPECT_EQ(s.param("d"), 5.0);
}

TEST(Catalog, JacobianMatchesFiniteDifferences)
{
    std::vector<SlowFastSystem> systems{ModelCatalog::vdp_supercritical(), ModelCatalog::fhn_subcritical(),
                                        ModelCatalog::hindmarsh_rose(), ModelCatalog::hr_reduced(),
                                        ModelCatalog::local_fold_3d(0.04, 1, -1, 0.5)};
    for (const auto& s : systems) {
        State u(s.dimension());
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = 0.3 + 0.2 * i;
        auto J = s.jacobian(u);
        for (std::size_t j = 0; j < u.size(); ++j) {
            State up = u, um = u;
            up[j] += 1e-6;
            um[j] -= 1e-6;
            State fp = s.rhs(up), fm = s.rhs(um);
            for (std::size_t i = 0; i < u.size(); ++i)
                EXPECT_NEAR(J(i, j), (fp[i] - fm[i]) / 2e-6, 1e-5 * (1 + std::fabs(J(i, j)))) << s.tag();
        }
    }
}

TEST(Catalog, FhnGenericTranslationMapsTrajectories)
{
    auto g = make_system("fhn_generic");
    FhnTranslation tr = translate_fhn_generic(g);
    State vw0{0.2, 0.05};
    IntegrationConfig cfg;
    auto a = integrate(g, vw0, 0.0, 0.5, cfg);
    auto b = integrate(tr.target, tr.to_normal_form(vw0), 0.0, 0.5 * tr.time_scale, cfg);
    State mapped = tr.from_normal_form(b.back());
    EXPECT_NEAR(mapped[0], a.back()[0], 1e-7);
    EXPECT_NEAR(mapped[1], a.back()[1], 1e-7);
}

TEST(Catalog, ParametersAreImmutable)
{
    auto s = ModelCatalog::vdp_supercritical(0.04, 0.9);
    auto t = s.with("q", 1.2);
    EXPECT_EQ(s.param("q"), 0.9);
    EXPECT_EQ(t.param("q"), 1.2);
    EXPECT_THROW(s.with("zz", 1.0), ConfigError);
    EXPECT_THROW(make_system("nope"), ConfigError);
}
