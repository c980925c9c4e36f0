// Gaussian data evolved by the heat semigroup and by a rough kappa=10 system,
// printing L2 decay and the tent / Carleson norms of both trajectories.

#include <cstdio>

#include "tentlab/config.hpp"
#include "tentlab/functionals.hpp"
#include "tentlab/propagator.hpp"
#include "tentlab/semigroup.hpp"

using namespace tentlab;

int main() {
    const Grid g = make_grid(1, 256, 32.0);
    const int m = 1;
    const double T = 4.0;
    const Field f = Field::from_function(g, 1, [](int, auto x) { return cplx{std::exp(-x[0] * x[0])}; });

    SolverConfig sc;
    sc.dt = 1.0 / 64;
    const auto heat = make_polyharmonic(g, m);
    const auto rough = build_coefficients("rough(10,7)", g, m, 1, T);
    const Propagator Ph(heat, sc), Pr(rough, sc);
    const auto uh = Ph.propagate(0.0, T, f);
    const auto ur = Pr.propagate(0.0, T, f);
    const Semigroup S(heat);

    std::printf("lambda=%.3f Lambda=%.3f for %s\n", rough.lambda, rough.Lambda_op, rough.description.c_str());
    std::printf("%8s %14s %14s %14s\n", "t", "|u_heat|", "|exact heat|", "|u_rough|");
    for (std::size_t k = 0; k < uh.size(); k += 32)
        std::printf("%8.3f %14.8f %14.8f %14.8f\n", uh.times[k], lp_norm(uh.slices[k], 2),
                    lp_norm(S.apply(uh.times[k], f), 2), lp_norm(ur.slices[k], 2));

    for (const auto* u : {&uh, &ur}) {
        const auto F = gradient_trajectory(*u, m);
        std::printf("%s: tent(p=2) %.6f  tent(p=4) %.6f  carleson %.6f\n", u == &uh ? "heat " : "rough",
                    tent_norm(F, 2.0, m).value, tent_norm(F, 4.0, m).value, carleson_from_gradient(F, m).value);
    }
    std::printf("|f|_2 / sqrt(2) = %.6f\n", lp_norm(f, 2) / std::sqrt(2.0));
    return 0;
}
