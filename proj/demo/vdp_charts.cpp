// One relaxation oscillation of van der Pol seen through the four charts.
#include <canard/canard.hpp>

#include <cstdio>

using namespace canard;

int main()
{
    const double eps = 0.04, q = 0.9;
    auto sys = ModelCatalog::vdp_supercritical(eps, q);
    auto orb = find_periodic_orbit(sys, {2.0, 0.0});
    if (!orb) {
        std::puts("no cycle");
        return 1;
    }
    std::printf("period %.6f  amplitude %.6f  L2 norm %.6f  multiplier %.3e\n", orb->period, orb->amplitude,
                orb->l2_norm, orb->multiplier);

    OrbitTrace tr;
    tr.times = orb->times;
    tr.states = orb->cycle_states;
    for (const Chart& c : {Chart::lienard(eps), Chart::flat(eps), Chart::v_scope(eps),
                           Chart::w_scope(eps, Gamma0::vdp())}) {
        OrbitTrace m = map_trace(tr, sys, c);
        double lo = 1e300, hi = -1e300;
        for (const auto& s : m.states) {
            lo = std::min(lo, s[1]);
            hi = std::max(hi, s[1]);
        }
        std::printf("%-8s %5zu samples, ordinate in [%.4f, %.4f]\n", c.name().c_str(), m.size(), lo, hi);
    }

    // where the microscopes put the Hopf and the maximal canard
    auto rep = vdp_report(eps);
    std::printf("q_V = %.12f  V* = %.6f\n", *rep.q_V, *rep.V_singular);
    std::printf("q_W = %.12f  W* = %.6f\n", *rep.q_W, *rep.W0);
}
