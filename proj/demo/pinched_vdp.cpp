// Pinched van der Pol in the V chart: sliding regions and orbits for q below,
// at and above the Hopf value.
#include <canard/canard.hpp>

#include <cstdio>

using namespace canard;

int main()
{
    const double eps = 0.04;
    Chart v = Chart::v_scope(eps);
    for (double q : {0.9, 1.0, 1.1}) {
        auto sys = ModelCatalog::vdp_supercritical(eps, q);
        auto ps = pinch_chart(sys, v, default_sigma(v), -2.5, 2.5);
        std::printf("q = %.2f\n", q);
        for (const auto& r : ps.sliding_regions())
            std::printf("  [% .4f, % .4f] %s\n", r.lo, r.hi, to_string(r.kind));
        auto tr = integrate_pinched(ps, v.to_chart(sys, {2.0, 0.0}), 0.0, 12.0);
        int counts[5] = {0, 0, 0, 0, 0};
        for (auto m : tr.modes)
            ++counts[static_cast<int>(m)];
        std::printf("  orbit: %zu samples, %d switches, end x = %.4f\n", tr.trace.size(), tr.switches,
                    tr.trace.back()[0]);
        std::printf("  samples upper/lower/stable/unstable: %d %d %d %d\n", counts[0], counts[1], counts[2],
                    counts[3]);
    }

    auto b = detect_sliding_bifurcation(vdp_chart_family(eps, ChartKind::w_scope), 0.98, 0.998, 1.0);
    std::printf("W-chart tangency collision at q* = %.12f (%s), quartic root %.12f\n", b.param, b.kind.c_str(),
                vdp_maximal_canard_q(eps));
}
