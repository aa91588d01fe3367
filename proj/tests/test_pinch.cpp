#include <canard/models.hpp>
#include <canard/pinch.hpp>
#include <canard/periodic.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace canard;

namespace {

const double eps = 0.04;

PinchedSystem vdp_v(double q, double scale = 1.0)
{
    auto sys = ModelCatalog::vdp_supercritical(eps, q);
    Chart c = Chart::v_scope(eps);
    return pinch_chart(sys, c, default_sigma(c) * scale, -2.5, 2.5);
}

VectorField planar(std::function<State(const State&)> f)
{
    VectorField v;
    v.dim = 2;
    v.f = [f](const double* u, double* du) {
        State r = f({u[0], u[1]});
        du[0] = r[0];
        du[1] = r[1];
    };
    return v;
}

}  // namespace

TEST(Filippov, HandCase)
{
    auto [v, lam] = filippov_vector({1, -1}, {1, 1}, {0, 1});
    EXPECT_EQ(v[0], 1.0);
    EXPECT_EQ(v[1], 0.0);
    EXPECT_EQ(lam, 0.0);
}

TEST(Filippov, UpperTangencyReturnsUpperField)
{
    auto [v, lam] = filippov_vector({2, 0}, {1, 1}, {0, 1});
    EXPECT_EQ(v[0], 2.0);
    EXPECT_EQ(v[1], 0.0);
    EXPECT_EQ(lam, 1.0);
}

TEST(Filippov, EqualFieldsHaveNoSliding) { EXPECT_THROW(filippov_vector({1, 1}, {1, 1}, {0, 1}), DomainError); }

TEST(Filippov, RandomSamplesAreTangent)
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int i = 0; i < 500; ++i) {
        State a{U(rng), U(rng), U(rng)}, b{U(rng), U(rng), U(rng)}, g{U(rng), U(rng), U(rng)};
        if (std::fabs(dot(b, g) - dot(a, g)) < 1e-3)
            continue;
        auto [v, lam] = filippov_vector(a, b, g);
        EXPECT_LE(std::fabs(dot(v, g)), 1e-12);
    }
}

TEST(Pinch, VScopeSlidingRegionInequality)
{
    for (double q : {0.5, 0.9, 1.1}) {
        auto ps = vdp_v(q);
        for (double x = -2.4; x <= 2.4; x += 0.0137) {
            double margin = std::fabs(x - q) - std::fabs(1 - x * x);
            if (std::fabs(margin) < 1e-3)
                continue;
            bool sliding = ps.region(ps.point_on_sigma(x)) != RegionKind::crossing;
            EXPECT_EQ(sliding, margin < 0) << "q=" << q << " x=" << x;
        }
    }
}

TEST(Pinch, VScopeRegionsAtQ09)
{
    auto regs = vdp_v(0.9).sliding_regions();
    ASSERT_EQ(regs.size(), 5u);
    EXPECT_EQ(regs[0].kind, RegionKind::stable_sliding);
    EXPECT_EQ(regs[1].kind, RegionKind::crossing);
    EXPECT_EQ(regs[2].kind, RegionKind::unstable_sliding);
    EXPECT_EQ(regs[3].kind, RegionKind::crossing);
    EXPECT_EQ(regs[4].kind, RegionKind::stable_sliding);
    // |x - q| = |1 - x^2| roots by hand: x^2 + x - 1.9 = 0 and x^2 - x - 0.1 = 0
    EXPECT_NEAR(regs[0].hi, (-1 - std::sqrt(1 + 7.6)) / 2, 1e-10);
    EXPECT_NEAR(regs[1].hi, (1 - std::sqrt(1 + 0.4)) / 2, 1e-10);
}

TEST(Pinch, LocalFoldTangenciesAndSlidingField)
{
    const double q = 0.1, sigma = 0.02, r = sigma / eps;
    auto ps = pinch(ModelCatalog::local_fold_2d(eps, q), sigma, 1, -1, 1);
    auto ts = ps.tangency_points();
    ASSERT_EQ(ts.size(), 2u);
    EXPECT_NEAR(ts[0].s, q / (1 + r), 1e-12);
    EXPECT_NEAR(ts[1].s, q / (1 - r), 1e-12);
    for (double x : {0.08, 0.12, 0.15, 0.19}) {
        bool inside = std::fabs(q / x - 1) < r;
        auto v = ps.sliding_vector_exact(ps.point_on_sigma(x));
        ASSERT_EQ(bool(v), inside) << x;
        if (v) {
            // ((q - x)/x) (1, x)
            EXPECT_NEAR((*v)[0], (q - x) / x, 1e-9);
            EXPECT_NEAR((*v)[1], q - x, 1e-9);
        }
    }
}

TEST(Pinch, ConstantFieldCrossesEverywhere)
{
    auto F = planar([](const State&) { return State{0.0, -1.0}; });
    auto ps = pinch(F, [](const State& u) { return u[1]; }, [](const State&) { return State{0.0, 1.0}; }, 0.1, 1, -1,
                    1);
    auto regs = ps.sliding_regions();
    ASSERT_EQ(regs.size(), 1u);
    EXPECT_EQ(regs[0].kind, RegionKind::crossing);
    EXPECT_TRUE(ps.tangency_points().empty());
}

TEST(Pinch, SlidingEquilibriumAtQ)
{
    // the fibre over x = q is tangent along a whole segment, so probe either side of it
    auto ps = vdp_v(0.9);
    auto lo = ps.sliding_vector_exact(ps.point_on_sigma(0.9 - 1e-6));
    auto hi = ps.sliding_vector_exact(ps.point_on_sigma(0.9 + 1e-6));
    ASSERT_TRUE(lo && hi);
    EXPECT_LT((*lo)[0] * (*hi)[0], 0);
    EXPECT_LE(std::fabs((*lo)[0]), 1e-4);
    EXPECT_LE(std::fabs((*hi)[0]), 1e-4);
}

TEST(Pinch, NoSlidingVectorOnCrossingFibre)
{
    auto ps = vdp_v(0.9);
    EXPECT_FALSE(ps.sliding_vector_exact(ps.point_on_sigma(0.5 * (-1.966 - 0.0916))));
}

TEST(Pinch, VScopeSlidingMatchesReducedFlow)
{
    // on h' = 0 the flat rhs gives x' = h/eps = (x - q)/(1 - x^2)
    auto ps = vdp_v(0.9);
    for (double x : {-2.3, -2.2, 0.2, 0.5, 0.7, 2.0, 2.4}) {
        State xi = ps.point_on_sigma(x);
        double r = (x - 0.9) / (1 - x * x);
        auto ex = ps.sliding_vector_exact(xi);
        ASSERT_TRUE(ex) << x;
        EXPECT_NEAR((*ex)[0], r, 1e-12) << x;
        EXPECT_NEAR(ps.filippov(xi).first[0], r, 1e-12) << x;
    }
}

TEST(Pinch, TransversalityViolationIsReported)
{
    auto F = planar([](const State& u) { return State{1.0, u[1] * u[1] - 0.25}; });
    EXPECT_THROW(pinch(F, [](const State& u) { return u[1]; }, [](const State&) { return State{0.0, 1.0}; }, 1.0, 1,
                       -1, 1),
                 TransversalityViolation);
}

TEST(Pinch, RejectsNonPositiveSigma)
{
    EXPECT_THROW(pinch(ModelCatalog::local_fold_2d(eps, 0.1), 0.0, 1, -1, 1), DomainError);
}

TEST(Pinch, DefaultSigmas)
{
    EXPECT_NEAR(default_sigma(Chart::v_scope(eps)), std::exp(eps * std::log(eps)), 1e-15);
    EXPECT_NEAR(default_sigma(Chart::w_scope(eps, Gamma0::vdp())), std::exp(2 * eps * std::log(eps)), 1e-15);
    EXPECT_THROW(default_sigma(Chart::flat(eps)), DomainError);
}

TEST(PinchedOrbit, SlidingConfinement)
{
    auto ps = vdp_v(0.9);
    auto sys = ModelCatalog::vdp_supercritical(eps, 0.9);
    auto tr = integrate_pinched(ps, Chart::v_scope(eps).to_chart(sys, {2.0, 0.0}), 0.0, 10.0);
    int sliding = 0;
    for (std::size_t i = 0; i < tr.trace.size(); ++i) {
        PinchMode m = tr.modes[i];
        if (m != PinchMode::sliding_stable && m != PinchMode::sliding_unstable)
            continue;
        ++sliding;
        const State& p = tr.trace.states[i];
        EXPECT_EQ(p[1], 0.0);
        double x = p[0];
        EXPECT_LE(std::fabs(x - 0.9), std::fabs(1 - x * x) + 1e-6) << "t=" << tr.trace.times[i];
    }
    EXPECT_GT(sliding, 10);
}

TEST(PinchedOrbit, MatchesSmoothCycle)
{
    auto sys = ModelCatalog::vdp_supercritical(eps, 0.9);
    auto orb = find_periodic_orbit(sys, {2.0, 0.0});
    ASSERT_TRUE(orb);
    auto tr = integrate_pinched(vdp_v(0.9), Chart::v_scope(eps).to_chart(sys, {2.0, 0.0}), 0.0, 20.0,
                                {}, {hyperplane_event(0, 0.0, 1, EventKind::user)});
    std::vector<double> up;
    for (const auto& e : tr.trace.events)
        if (e.kind == EventKind::user)
            up.push_back(e.t);
    ASSERT_GE(up.size(), 3u);
    double T = up.back() - up[up.size() - 2];
    EXPECT_NEAR(T / orb->period, 1.0, 0.1);
}

TEST(PinchedOrbit, EquilibriumBeyondHopfAttracts)
{
    auto sys = ModelCatalog::vdp_supercritical(eps, 1.1);
    auto tr = integrate_pinched(vdp_v(1.1), Chart::v_scope(eps).to_chart(sys, {2.0, 0.0}), 0.0, 20.0);
    EXPECT_NEAR(tr.trace.back()[0], 1.1, 1e-3);
    EXPECT_EQ(tr.trace.back()[1], 0.0);
}

TEST(PinchedOrbit, CanardPointAndPolicies)
{
    auto sys = ModelCatalog::vdp_supercritical(eps, 1.0);
    State x0 = Chart::v_scope(eps).to_chart(sys, {2.0, 0.0});
    auto count = [](const PinchedTrace& tr, EventKind k) {
        int n = 0;
        for (const auto& e : tr.trace.events)
            n += e.kind == k;
        return n;
    };
    auto stay = integrate_pinched(vdp_v(1.0), x0, 0.0, 8.0);
    EXPECT_GE(count(stay, EventKind::canard_point), 1);
    // after the canard point the orbit slides along the unstable region
    bool unstable_slide = false;
    for (auto m : stay.modes)
        unstable_slide |= m == PinchMode::sliding_unstable;
    EXPECT_TRUE(unstable_slide);

    auto ps = vdp_v(1.0);
    ps.policy = UnstablePolicy::depart_down;
    auto down = integrate_pinched(ps, x0, 0.0, 8.0);
    EXPECT_GE(count(down, EventKind::canard_point), 1);
    bool down_unstable = false;
    for (auto m : down.modes)
        down_unstable |= m == PinchMode::sliding_unstable;
    EXPECT_FALSE(down_unstable);
}

TEST(PinchedOrbit, DomainExitStopsCleanly)
{
    double qW = 0.994962024018910;
    auto sys = ModelCatalog::vdp_supercritical(eps, qW - 1e-4);
    Chart w = Chart::w_scope(eps, Gamma0::vdp());
    auto ps = pinch_chart(sys, w, default_sigma(w), 0.2, 1.8);
    ps.domain_lo = -0.5;
    ps.domain_hi = 2.5;
    auto tr = integrate_pinched(ps, {1.6, 0.9}, 0.0, 3.0);
    for (const auto& s : tr.trace.states)
        EXPECT_GE(s[0], -0.5 - 1e-9);
}
