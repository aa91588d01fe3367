// Classification of the pinched two-fold for a few parameter choices.
#include <canard/canard.hpp>

#include <cstdio>

using namespace canard;

int main()
{
    std::printf("%6s %6s %6s %6s  %-24s %3s %-12s %s\n", "a", "b", "c", "s/e", "sliding type", "eig", "curvature",
                "canard");
    auto show = [](double a, double b, double c, double s) {
        try {
            auto r = classify_twofold(a, b, c, s);
            std::printf("%6.2f %6.2f %6.2f %6.2f  %-24s %3d %-12s %s\n", a, b, c, s, to_string(r.sliding_type),
                        r.eig_in_region, to_string(r.curvature_case), to_string(r.canard_class));
        } catch (const DomainError& e) {
            std::printf("%6.2f %6.2f %6.2f %6.2f  %s\n", a, b, c, s, e.what());
        }
    };
    for (const auto& s : twofold_archetypes())
        show(s.a, s.b, s.c, s.sigma_over_eps);
    // the same saddle as the pinch zone narrows
    for (double s : {0.3, 0.8, 1.2, 2.0, 6.0})
        show(1.0, 1.0, 0.5, s);
    show(1.0, -1.0, 2.0, 2.0);
}
